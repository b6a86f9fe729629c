import dataclasses
from typing import Any, Optional

from app.models.scenario import ProtocolName
from app.models.trace import PacketKind

BROADCAST = -1


@dataclasses.dataclass(slots=True)
class Packet:
    """
    One datagram on the air or in a queue.

    `header` is a frozen per-protocol dataclass, so a shallow copy is enough
    to give each broadcast receiver its own packet.
    """
    pkt_id: int
    kind: PacketKind
    size: int
    src: int
    dst: int
    protocol: Optional[ProtocolName] = None
    header: Any = None
    sent_at: float = 0.0
    flow_id: int = -1
    hop_count: int = 0
    next_hop: int = BROADCAST
    prev_hop: int = -1

    @property
    def is_data(self) -> bool:
        return self.kind is PacketKind.CBR

    @property
    def is_broadcast(self) -> bool:
        return self.next_hop == BROADCAST

    def clone(self) -> "Packet":
        return Packet(
            self.pkt_id, self.kind, self.size, self.src, self.dst, self.protocol, self.header,
            self.sent_at, self.flow_id, self.hop_count, self.next_hop, self.prev_hop,
        )
