"""
Trace persistence and the standalone trace analyzer.

`analyze_trace` recomputes every metric from a trace file in one pass with
its own parsing and counting, so it can check the engine's in-memory
report independently.
"""
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

from app.core.exceptions import NotFoundError, TraceParseError
from app.core.logging_config import get_logger
from app.models.metrics import MetricsReport

logger = get_logger(__name__)

TRACE_MAGIC = "# manet-trace v1"
ACTIONS = {"SEND", "RECV", "FWD", "DROP"}
LAYERS = {"AGT", "RTR", "MAC"}
DATA_KIND = "cbr"
SWITCH_KIND = "mrp"
NON_CONTROL_KINDS = {DATA_KIND, SWITCH_KIND}
# protocol ordinals used on switch lines
PROTOCOL_BY_ORDINAL = ["aodv", "dsr", "dsdv", "tora"]


@dataclass
class TraceHeader:
    duration: float
    active: str
    count_standby: bool = True


def write_trace(lines: Iterable[str], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line)
            f.write("\n")
    return path


def parse_header(line: str, line_number: int = 1) -> TraceHeader:
    if not line.startswith(TRACE_MAGIC):
        raise TraceParseError(
            f"line {line_number}: missing '{TRACE_MAGIC}' header",
            error_code="TRACE_HEADER",
            details={"line": line_number},
        )
    fields: Dict[str, str] = {}
    for token in line[len(TRACE_MAGIC):].split():
        key, _, value = token.partition("=")
        fields[key] = value
    try:
        duration = float(fields["duration"])
    except (KeyError, ValueError):
        raise TraceParseError(
            f"line {line_number}: header has no valid duration",
            error_code="TRACE_HEADER",
            details={"line": line_number},
        )
    return TraceHeader(
        duration=duration,
        active=fields.get("active", ""),
        count_standby=fields.get("standby_overhead") != "excluded",
    )


def _fail(line_number: int, message: str) -> TraceParseError:
    return TraceParseError(f"line {line_number}: {message}", error_code="TRACE_MALFORMED", details={"line": line_number})


def analyze_trace_lines(lines: Iterable[str], duration: Optional[float] = None) -> MetricsReport:
    header: Optional[TraceHeader] = None
    active: Optional[str] = None
    roh = 0
    roh_standby = 0
    sent_at: Dict[int, float] = {}
    sizes: Dict[int, int] = {}
    received_at: Dict[int, float] = {}
    drops: Dict[str, int] = {}

    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if line_number == 1 and line.startswith("#"):
            header = parse_header(line, line_number)
            active = header.active
            continue
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (9, 10):
            raise _fail(line_number, f"expected 9 or 10 fields, got {len(parts)}")
        time_s, action, layer, node_s, pkt_s, kind, size_s, src_s, dst_s = parts[:9]
        if action not in ACTIONS:
            raise _fail(line_number, f"unknown action {action!r}")
        if layer not in LAYERS:
            raise _fail(line_number, f"unknown layer {layer!r}")
        try:
            t = float(time_s)
            pkt_id, size, dst = int(pkt_s), int(size_s), int(dst_s)
            int(node_s), int(src_s)
        except ValueError:
            raise _fail(line_number, "non-numeric field")
        if not math.isfinite(t) or t < 0:
            raise _fail(line_number, f"invalid time {time_s!r}")
        if action == "DROP" and len(parts) == 10:
            drops[parts[9]] = drops.get(parts[9], 0) + 1

        if kind == SWITCH_KIND:
            if not 0 <= dst < len(PROTOCOL_BY_ORDINAL):
                raise _fail(line_number, f"unknown protocol ordinal {dst}")
            active = PROTOCOL_BY_ORDINAL[dst]
        elif layer == "RTR" and action in ("SEND", "FWD") and kind not in NON_CONTROL_KINDS:
            roh += 1
            if active and not kind.startswith(active + "-"):
                roh_standby += 1
        elif layer == "AGT" and kind == DATA_KIND:
            if action == "SEND":
                sent_at[pkt_id] = t
                sizes[pkt_id] = size
            elif action == "RECV" and pkt_id in sent_at and pkt_id not in received_at:
                received_at[pkt_id] = t

    if duration is None:
        if header is None:
            raise TraceParseError("trace has no header and no duration was given", error_code="TRACE_HEADER")
        duration = header.duration

    delays = [received_at[p] - sent_at[p] for p in received_at]
    pkt_sent = len(sent_at)
    pkt_received = len(received_at)
    return MetricsReport(
        roh=roh,
        roh_standby=roh_standby,
        pkt_sent=pkt_sent,
        pkt_received=pkt_received,
        pdr=pkt_received / pkt_sent if pkt_sent else None,
        avg_delay=math.fsum(delays) / len(delays) if delays else None,
        throughput_bps=sum(sizes[p] for p in received_at) * 8 / duration,
        m=pkt_received,
        drops=dict(sorted(drops.items())),
    )


def analyze_trace(path: Union[str, Path], duration: Optional[float] = None) -> MetricsReport:
    path = Path(path)
    if not path.is_file():
        raise NotFoundError(f"Trace file not found: {path}", error_code="TRACE_NOT_FOUND", details={"path": str(path)})
    with path.open("r", encoding="utf-8") as f:
        report = analyze_trace_lines(f, duration)
    logger.debug(f"Analyzed {path}: sent={report.pkt_sent} received={report.pkt_received} roh={report.roh}")
    return report
