"""In-memory trace of one run plus the line format it is persisted in."""
from typing import List, Optional

from app.models.scenario import ProtocolName
from app.models.trace import Action, DropReason, Layer, PacketKind, TraceEvent
from app.simulation.engine import SYSTEM

TRACE_MAGIC = "# manet-trace v1"


def format_header(duration: float, active: ProtocolName, count_standby: bool = True) -> str:
    header = f"{TRACE_MAGIC} duration={duration!r} active={active.value}"
    if not count_standby:
        header += " standby_overhead=excluded"
    return header


def format_event(event: TraceEvent) -> str:
    """`time action layer node pkt_id kind size src dst [reason]`; times use repr() so they parse back exactly."""
    line = (
        f"{event.time!r} {event.action.value} {event.layer.value} {event.node} "
        f"{event.pkt_id} {event.kind.value} {event.size} {event.src} {event.dst}"
    )
    if event.reason is not None:
        line += f" {event.reason.value}"
    return line


class Tracer:
    """Collects TraceEvents in emission order."""

    def __init__(self, duration: float, active: ProtocolName, count_standby: bool = True):
        self.duration = duration
        self.initial_active = active
        self.count_standby = count_standby
        self.events: List[TraceEvent] = []
        self.switch_count = 0

    def record(
        self,
        time: float,
        action: Action,
        layer: Layer,
        node: int,
        packet,
        reason: Optional[DropReason] = None,
    ) -> TraceEvent:
        event = TraceEvent(
            time=time,
            action=action,
            layer=layer,
            node=node,
            pkt_id=packet.pkt_id,
            kind=packet.kind,
            size=packet.size,
            src=packet.src,
            dst=packet.dst,
            reason=reason,
        )
        self.events.append(event)
        return event

    def record_switch(self, time: float, from_protocol: ProtocolName, to_protocol: ProtocolName) -> TraceEvent:
        """MRP handover line: src and dst carry the protocol ordinals."""
        self.switch_count += 1
        event = TraceEvent(
            time=time,
            action=Action.SEND,
            layer=Layer.AGT,
            node=SYSTEM,
            pkt_id=self.switch_count,
            kind=PacketKind.MRP_SWITCH,
            size=0,
            src=from_protocol.ordinal,
            dst=to_protocol.ordinal,
        )
        self.events.append(event)
        return event

    def header(self) -> str:
        return format_header(self.duration, self.initial_active, self.count_standby)

    def lines(self) -> List[str]:
        return [self.header()] + [format_event(e) for e in self.events]
