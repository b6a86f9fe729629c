"""SVG line plots of an aggregate CSV: one line per protocol over the swept parameter."""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from app.core.exceptions import NotFoundError, PlotError  # noqa: E402
from app.core.logging_config import get_logger  # noqa: E402

logger = get_logger(__name__)

# metric name -> (aggregate column, y-axis label)
PLOT_METRICS: Dict[str, Tuple[str, str]] = {
    "pdr": ("pdr_mean", "Packet delivery ratio"),
    "delay": ("delay_s_mean", "Average end-to-end delay (s)"),
    "roh": ("roh_mean", "Routing overhead (control transmissions)"),
    "throughput": ("throughput_bps_mean", "Throughput (bit/s)"),
}

PARAM_LABELS = {
    "n_nodes": "Number of nodes",
    "speed_max": "Maximum speed (m/s)",
    "speed_min": "Minimum speed (m/s)",
    "pause": "Pause time (s)",
    "packet_rate": "Packet rate (packets/s)",
    "radio_range": "Radio range (m)",
    "mrp_epoch": "MRP epoch (s)",
}


@dataclass
class PlotSummary:
    metric: str
    path: Path
    param: str
    points: Dict[str, int] = field(default_factory=dict)


def _load(csv_path: Union[str, Path]) -> pd.DataFrame:
    path = Path(csv_path)
    if not path.is_file():
        raise NotFoundError(f"Aggregate CSV not found: {path}", error_code="CSV_NOT_FOUND", details={"path": str(path)})
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise PlotError(f"{path} is empty", error_code="PLOT_EMPTY_CSV")
    if frame.empty:
        raise PlotError(f"{path} has no rows", error_code="PLOT_EMPTY_CSV")
    return frame


def plot_aggregate(csv_path: Union[str, Path], metric: str, out_path: Union[str, Path]) -> PlotSummary:
    if metric not in PLOT_METRICS:
        raise PlotError(
            f"Unknown metric {metric!r}; valid metrics: {', '.join(sorted(PLOT_METRICS))}",
            error_code="PLOT_UNKNOWN_METRIC",
            details={"metric": metric, "valid": sorted(PLOT_METRICS)},
        )
    column, ylabel = PLOT_METRICS[metric]
    frame = _load(csv_path)
    missing = {"protocol", "value", column} - set(frame.columns)
    if missing:
        raise PlotError(f"Aggregate CSV lacks columns {sorted(missing)}", error_code="PLOT_BAD_CSV")

    protocols = list(dict.fromkeys(frame["protocol"]))
    if len(protocols) < 2:
        raise PlotError("Plot needs at least 2 protocols", error_code="PLOT_INSUFFICIENT")
    if frame["value"].nunique() < 2:
        raise PlotError("Plot needs at least 2 sweep points", error_code="PLOT_INSUFFICIENT")
    param = str(frame["param"].iloc[0]) if "param" in frame.columns else "value"

    plt.rcParams["svg.hashsalt"] = "manet-plot"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    summary = PlotSummary(metric=metric, path=Path(out_path), param=param)
    try:
        for protocol in protocols:
            series = frame[frame["protocol"] == protocol].sort_values("value")
            ax.plot(series["value"], series[column], marker="o", label=protocol)
            summary.points[protocol] = len(series)
        ax.set_xlabel(PARAM_LABELS.get(param, param))
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        summary.path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(summary.path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)

    logger.info(f"Wrote {metric} plot with {len(protocols)} protocols to {summary.path}")
    return summary
