"""
Parameter sweeps: protocols x swept values x seeds, one independent run per cell.

Cells share nothing, so they can run in a process pool; results are merged in
cell order, which keeps the aggregate CSV byte-identical across reruns.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from app.core.exceptions import SimulatorException, SweepError
from app.core.logging_config import get_logger
from app.harness.exports import report_frame, report_row, write_csv
from app.harness.trace_io import write_trace
from app.models.scenario import ScenarioConfig, SweepSpec
from app.simulation.simulator import run_scenario

logger = get_logger(__name__)

CELL_COLUMNS = ["param", "value"]
AGGREGATE_METRICS = ["roh", "pkt_sent", "pkt_received", "pdr", "delay_s", "throughput_bps", "roh_standby"]


@dataclass(frozen=True)
class SweepCell:
    index: int
    token: str
    value: Any
    seed_offset: int
    scenario: ScenarioConfig

    def describe(self) -> str:
        return f"cell {self.index} (protocol={self.token}, value={self.value}, seed={self.scenario.seed})"


@dataclass
class CellOutcome:
    index: int
    row: Optional[Dict[str, Any]] = None
    error: Optional[str] = None


@dataclass
class SweepResult:
    out_dir: Path
    reports: pd.DataFrame
    aggregate: pd.DataFrame
    reports_path: Path
    aggregate_path: Path


def _plain(value: Any) -> Any:
    return value.value if isinstance(value, Enum) else value


def _run_id(base_id: str, token: str, param: str, value: Any, seed: int) -> str:
    label = token.replace(":", "_").replace("+", "-")
    return f"{base_id}-{label}-{param}{_plain(value)}-s{seed}"


def sweep_cells(spec: SweepSpec) -> List[SweepCell]:
    """Expand a sweep into its cells, in the order rows are written."""
    base = spec.base.model_dump()
    cells: List[SweepCell] = []
    for token in spec.protocol_tokens:
        for value in spec.values:
            for offset in range(spec.seeds):
                seed = spec.base.seed + offset
                values = {**base, spec.param: value, "seed": seed, "protocol": token}
                try:
                    scenario = ScenarioConfig.model_validate(values)
                except Exception as e:
                    raise SweepError(
                        f"Invalid sweep cell (protocol={token}, {spec.param}={value}, seed={seed}): {e}",
                        error_code="SWEEP_CELL_INVALID",
                        details={"protocol": token, "value": value, "seed": seed},
                    ) from e
                effective = _plain(getattr(scenario, spec.param))
                scenario = scenario.model_copy(
                    update={"scenario_id": _run_id(spec.base.scenario_id, token, spec.param, effective, seed)}
                )
                cells.append(SweepCell(len(cells), token, effective, offset, scenario))
    return cells


def run_cell(cell: SweepCell, param: str, out_dir: Optional[str] = None) -> CellOutcome:
    """Run one cell; failures come back as text so they cross process boundaries."""
    try:
        result = run_scenario(cell.scenario)
        if out_dir is not None:
            write_trace(result.trace_lines(), Path(out_dir) / "runs" / cell.scenario.scenario_id / "trace.txt")
        row = {"param": param, "value": cell.value, **report_row(cell.scenario, result.report)}
        return CellOutcome(cell.index, row=row)
    except SimulatorException as e:
        return CellOutcome(cell.index, error=f"{type(e).__name__}: {e.message}")
    except Exception as e:
        return CellOutcome(cell.index, error=f"{type(e).__name__}: {e}")


def aggregate_reports(reports: pd.DataFrame) -> pd.DataFrame:
    """Mean and sample standard deviation per (protocol, param, value)."""
    if reports.empty:
        raise SweepError("No report rows to aggregate", error_code="SWEEP_EMPTY")
    keys = ["protocol", "param", "value"]
    reports = reports.copy()
    reports[AGGREGATE_METRICS] = reports[AGGREGATE_METRICS].apply(pd.to_numeric, errors="coerce")
    grouped = reports.groupby(keys, sort=False)
    stats = grouped[AGGREGATE_METRICS].agg(["mean", "std"])
    stats.columns = [f"{metric}_{stat}" for metric, stat in stats.columns]
    stats.insert(0, "runs", grouped.size())
    return stats.reset_index()


def run_sweep(spec: SweepSpec, out_dir: Union[str, Path], workers: int = 1) -> SweepResult:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = sweep_cells(spec)
    logger.info(
        f"Sweep over {spec.param} with {len(spec.values)} values x {spec.seeds} seeds x "
        f"{len(spec.protocol_tokens)} protocols = {len(cells)} runs (workers={workers})"
    )

    outcomes: List[CellOutcome] = []
    if workers <= 1:
        for cell in cells:
            outcome = run_cell(cell, spec.param, str(out_dir))
            outcomes.append(outcome)
            if outcome.error:
                break
            logger.info(f"Finished {cell.describe()}")
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            for outcome in executor.map(run_cell, cells, [spec.param] * len(cells), [str(out_dir)] * len(cells)):
                outcomes.append(outcome)
                if outcome.error is None:
                    logger.info(f"Finished {cells[outcome.index].describe()}")

    failed = next((o for o in outcomes if o.error), None)
    if failed is not None:
        cell = cells[failed.index]
        logger.error(f"Sweep aborted at {cell.describe()}: {failed.error}")
        raise SweepError(
            f"Sweep failed at {cell.describe()}: {failed.error}",
            error_code="SWEEP_CELL_FAILED",
            details={"cell": cell.index, "protocol": cell.token, "value": cell.value, "seed": cell.scenario.seed},
        )

    reports = report_frame([o.row for o in outcomes], extra_columns=CELL_COLUMNS)
    aggregate = aggregate_reports(reports)
    reports_path = write_csv(reports, out_dir / "reports.csv")
    aggregate_path = write_csv(aggregate, out_dir / "aggregate.csv")
    logger.info(f"Sweep finished: {len(reports)} report rows, {len(aggregate)} aggregate rows in {out_dir}")
    return SweepResult(out_dir, reports, aggregate, reports_path, aggregate_path)
