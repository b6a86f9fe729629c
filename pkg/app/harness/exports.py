"""CSV artifacts of a run, written with pandas."""
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import networkx as nx
import pandas as pd

from app.harness.scenario_io import save_scenario
from app.harness.trace_io import write_trace
from app.models.metrics import MetricsReport
from app.models.scenario import ScenarioConfig
from app.simulation.simulator import SimulationResult

REPORT_COLUMNS = [
    "scenario_id", "seed", "protocol", "n_nodes", "speed", "roh", "pkt_sent", "pkt_received",
    "pdr", "delay_s", "throughput_bps", "roh_total", "roh_standby",
]
DELIVERY_COLUMNS = ["pkt_id", "flow", "src", "dst", "size", "sent_at", "received_at", "hops"]
SWITCH_COLUMNS = ["time", "from", "to", "trigger", "value"]
ROUTE_COLUMNS = ["time", "node", "protocol", "dest", "next_hop", "metric"]
EDGE_COLUMNS = ["source", "target"]
MOBILITY_COLUMNS = ["time", "node", "x", "y"]


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def report_row(scenario: ScenarioConfig, report: MetricsReport) -> Dict[str, Any]:
    """One MetricsReport as a CSV row; `roh` honours the standby-overhead flag."""
    count_standby = scenario.mrp.count_standby if scenario.is_mrp else True
    return {
        "scenario_id": scenario.scenario_id,
        "seed": scenario.seed,
        "protocol": scenario.protocol_label,
        "n_nodes": scenario.n_nodes,
        "speed": scenario.speed_max,
        "roh": report.reported_roh(count_standby),
        "pkt_sent": report.pkt_sent,
        "pkt_received": report.pkt_received,
        "pdr": report.pdr,
        "delay_s": report.avg_delay,
        "throughput_bps": report.throughput_bps,
        "roh_total": report.roh,
        "roh_standby": report.roh_standby,
    }


def report_frame(rows: List[Dict[str, Any]], extra_columns: Optional[List[str]] = None) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=(extra_columns or []) + REPORT_COLUMNS)


def delivery_frame(result: SimulationResult) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (r.pkt_id, r.flow_id, r.src, r.dst, r.size, r.sent_at, r.received_at, r.hops)
            for r in result.deliveries
        ],
        columns=DELIVERY_COLUMNS,
    )


def switch_frame(result: SimulationResult) -> pd.DataFrame:
    return pd.DataFrame(
        [(s.at, s.from_protocol.value, s.to_protocol.value, s.trigger, s.value) for s in result.switches],
        columns=SWITCH_COLUMNS,
    )


def route_frame(result: SimulationResult) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in result.route_snapshot], columns=ROUTE_COLUMNS)


def edge_frame(graph: nx.Graph) -> pd.DataFrame:
    if graph.number_of_edges() == 0:
        return pd.DataFrame(columns=EDGE_COLUMNS)
    frame = nx.to_pandas_edgelist(graph)[EDGE_COLUMNS]
    return frame.sort_values(EDGE_COLUMNS).reset_index(drop=True)


def mobility_frame(result: SimulationResult) -> pd.DataFrame:
    return pd.DataFrame(result.mobility_rows, columns=MOBILITY_COLUMNS)


def write_run_artifacts(result: SimulationResult, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Persist everything one run produces under `out_dir`."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "scenario": save_scenario(result.scenario, out_dir / "scenario.txt"),
        "trace": write_trace(result.trace_lines(), out_dir / "trace.txt"),
        "report": write_csv(report_frame([report_row(result.scenario, result.report)]), out_dir / "report.csv"),
        "deliveries": write_csv(delivery_frame(result), out_dir / "deliveries.csv"),
        "routes": write_csv(route_frame(result), out_dir / "routes.csv"),
    }
    if result.scenario.is_mrp:
        paths["switches"] = write_csv(switch_frame(result), out_dir / "switches.csv")
    if result.connectivity is not None:
        paths["edges"] = write_csv(edge_frame(result.connectivity), out_dir / "edges.csv")
    if result.mobility_rows:
        paths["mobility"] = write_csv(mobility_frame(result), out_dir / "mobility.csv")
    return paths
