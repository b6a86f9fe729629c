"""Trace vocabulary shared by the simulator, the metrics and the trace analyzer."""
from enum import Enum
from typing import NamedTuple, Optional

from app.models.scenario import ProtocolName


class Action(str, Enum):
    SEND = "SEND"
    RECV = "RECV"
    FWD = "FWD"
    DROP = "DROP"


class Layer(str, Enum):
    AGT = "AGT"
    RTR = "RTR"
    MAC = "MAC"


class PacketKind(str, Enum):
    CBR = "cbr"
    AODV_RREQ = "aodv-rreq"
    AODV_RREP = "aodv-rrep"
    AODV_RERR = "aodv-rerr"
    DSR_RREQ = "dsr-rreq"
    DSR_RREP = "dsr-rrep"
    DSR_RERR = "dsr-rerr"
    DSDV_UPDATE = "dsdv-upd"
    TORA_QUERY = "tora-qry"
    TORA_UPDATE = "tora-upd"
    TORA_CLEAR = "tora-clr"
    MRP_SWITCH = "mrp"

    @property
    def protocol(self) -> Optional[ProtocolName]:
        """Routing protocol owning this control kind; None for data and MRP lines."""
        return _KIND_PROTOCOL[self]

    @property
    def is_control(self) -> bool:
        return self.protocol is not None


_KIND_PROTOCOL = {
    kind: next((p for p in ProtocolName if kind.value.startswith(p.value + "-")), None)
    for kind in PacketKind
}


class DropReason(str, Enum):
    IFQ = "IFQ"        # interface queue full or evicted by a routing packet
    NO_ROUTE = "NRTE"  # no usable route
    LINK = "LINK"      # next hop unreachable at transmission time
    DUPLICATE = "DUP"  # second delivery of the same data packet
    RETRY = "RETRY"    # route discovery retries exhausted
    LOOP = "LOOP"      # source route revisits a node


class TraceEvent(NamedTuple):
    """One trace line."""

    time: float
    action: Action
    layer: Layer
    node: int
    pkt_id: int
    kind: PacketKind
    size: int
    src: int
    dst: int
    reason: Optional[DropReason] = None

    @property
    def is_routing_transmission(self) -> bool:
        """A hop-wise control transmission, the unit routing overhead counts."""
        return (
            self.layer is Layer.RTR
            and self.kind.is_control
            and (self.action is Action.SEND or self.action is Action.FWD)
        )
