"""
Run metrics computed from the trace alone.

ROH counts hop-wise routing control transmissions (RTR SEND + FWD). PDR is
received / sent. Average end-to-end delay is the mean of R - S over the
delivered packets. Throughput is delivered payload bits over the run
duration.
"""
import math
import statistics
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from app.core.exceptions import MetricsError
from app.models.metrics import MetricsReport, MetricsWindow
from app.models.scenario import ProtocolName
from app.models.trace import Action, Layer, PacketKind, TraceEvent

_WINDOW_EPSILON = 1e-9


@dataclass
class TracedDelivery:
    """Per data packet view reconstructed from AGT lines."""
    pkt_id: int
    size: int
    sent_at: float
    received_at: Optional[float] = None


def compute_roh(trace: Iterable[TraceEvent]) -> int:
    return sum(1 for event in trace if event.is_routing_transmission)


def compute_standby_roh(trace: Iterable[TraceEvent], initial_active: ProtocolName) -> int:
    """Control transmissions emitted by whichever protocol was standby at the time."""
    active = initial_active
    count = 0
    for event in trace:
        if event.kind is PacketKind.MRP_SWITCH:
            active = ProtocolName.from_ordinal(event.dst)
        elif event.is_routing_transmission and event.kind.protocol is not active:
            count += 1
    return count


def compute_pdr(pkt_sent: int, pkt_received: int) -> Optional[float]:
    """received / sent; None when nothing was sent."""
    if pkt_received > pkt_sent:
        raise MetricsError(
            f"Received count {pkt_received} exceeds sent count {pkt_sent}",
            error_code="RECEIVED_EXCEEDS_SENT",
            details={"pkt_sent": pkt_sent, "pkt_received": pkt_received},
        )
    if pkt_sent == 0:
        return None
    return pkt_received / pkt_sent


def compute_avg_e2e_delay(records: Iterable[Tuple[float, Optional[float]]]) -> Optional[float]:
    """Mean of (R - S) over `(S, R)` pairs with R present; None without deliveries."""
    delays = [received - sent for sent, received in records if received is not None]
    if not delays:
        return None
    return statistics.fmean(delays)


def compute_throughput(records: Iterable[Tuple[int, Optional[float]]], duration: float) -> float:
    """Delivered payload bits per second over `(size, R)` pairs."""
    if duration <= 0:
        raise MetricsError(
            f"Duration must be positive, got {duration}",
            error_code="NON_POSITIVE_DURATION",
        )
    delivered_bytes = sum(size for size, received in records if received is not None)
    return delivered_bytes * 8 / duration


def delivery_records_from_trace(trace: Iterable[TraceEvent]) -> Dict[int, TracedDelivery]:
    """First AGT RECV per packet completes the record; later ones are duplicates."""
    records: Dict[int, TracedDelivery] = {}
    for event in trace:
        if event.layer is not Layer.AGT or event.kind is not PacketKind.CBR:
            continue
        if event.action is Action.SEND:
            records[event.pkt_id] = TracedDelivery(event.pkt_id, event.size, event.time)
        elif event.action is Action.RECV:
            record = records.get(event.pkt_id)
            if record is not None and record.received_at is None:
                record.received_at = event.time
    return records


def build_report(trace: Sequence[TraceEvent], duration: float, initial_active: ProtocolName) -> MetricsReport:
    records = delivery_records_from_trace(trace)
    sent = len(records)
    received = sum(1 for r in records.values() if r.received_at is not None)
    drops = Counter(e.reason.value for e in trace if e.action is Action.DROP and e.reason is not None)
    return MetricsReport(
        roh=compute_roh(trace),
        roh_standby=compute_standby_roh(trace, initial_active),
        pkt_sent=sent,
        pkt_received=received,
        pdr=compute_pdr(sent, received),
        avg_delay=compute_avg_e2e_delay((r.sent_at, r.received_at) for r in records.values()),
        throughput_bps=compute_throughput(((r.size, r.received_at) for r in records.values()), duration),
        m=received,
        drops=dict(sorted(drops.items())),
    )


def window_count(duration: float, epoch: float) -> int:
    if epoch <= 0:
        raise MetricsError(f"Epoch must be positive, got {epoch}", error_code="NON_POSITIVE_EPOCH")
    return max(1, math.ceil(duration / epoch - _WINDOW_EPSILON))


def windowed_metrics(trace: Sequence[TraceEvent], epoch: float, duration: float) -> List[MetricsWindow]:
    """
    Partition [0, duration) into epochs; the last window is closed at `duration`.

    Sends fall in the window of their send time, and a reception counts in
    the window its packet was sent in, so per-window PDR stays within [0, 1]
    and every count sums to the whole-run total.
    """
    n = window_count(duration, epoch)

    def index(t: float) -> int:
        return min(int(t // epoch), n - 1)

    sent = [0] * n
    received = [0] * n
    delays: List[List[float]] = [[] for _ in range(n)]
    roh = [0] * n
    roh_by_protocol: List[Counter] = [Counter() for _ in range(n)]
    send_window: Dict[int, Tuple[int, float]] = {}
    delivered = set()

    for event in trace:
        if event.is_routing_transmission:
            w = index(event.time)
            roh[w] += 1
            roh_by_protocol[w][event.kind.protocol.value] += 1
        elif event.layer is Layer.AGT and event.kind is PacketKind.CBR:
            if event.action is Action.SEND:
                w = index(event.time)
                sent[w] += 1
                send_window[event.pkt_id] = (w, event.time)
            elif event.action is Action.RECV and event.pkt_id not in delivered and event.pkt_id in send_window:
                delivered.add(event.pkt_id)
                w, sent_at = send_window[event.pkt_id]
                received[w] += 1
                delays[w].append(event.time - sent_at)

    return [
        MetricsWindow(
            start=i * epoch,
            end=duration if i == n - 1 else (i + 1) * epoch,
            pkt_sent=sent[i],
            pkt_received=received[i],
            avg_delay=statistics.fmean(delays[i]) if delays[i] else None,
            roh=roh[i],
            roh_by_protocol=dict(sorted(roh_by_protocol[i].items())),
        )
        for i in range(n)
    ]


def summarize_window(events: Iterable[TraceEvent], start: float, end: float) -> MetricsWindow:
    """
    Window seen online at time `end` from the events recorded since `start`.

    Only receptions of packets sent inside the window (and already arrived)
    count, which is what an evaluation at `end` can observe.
    """
    sent_at: Dict[int, float] = {}
    delivered = set()
    delays: List[float] = []
    roh_by_protocol: Counter = Counter()
    for event in events:
        if event.time < start or event.time > end:
            continue
        if event.is_routing_transmission:
            roh_by_protocol[event.kind.protocol.value] += 1
        elif event.layer is Layer.AGT and event.kind is PacketKind.CBR:
            if event.action is Action.SEND:
                sent_at[event.pkt_id] = event.time
            elif event.action is Action.RECV and event.pkt_id in sent_at and event.pkt_id not in delivered:
                delivered.add(event.pkt_id)
                delays.append(event.time - sent_at[event.pkt_id])
    return MetricsWindow(
        start=start,
        end=end,
        pkt_sent=len(sent_at),
        pkt_received=len(delivered),
        avg_delay=statistics.fmean(delays) if delays else None,
        roh=sum(roh_by_protocol.values()),
        roh_by_protocol=dict(sorted(roh_by_protocol.items())),
    )
