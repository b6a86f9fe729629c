"""Contract every routing protocol instance implements, one instance per node."""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Dict, Hashable, List, Optional, Tuple

from app.models.scenario import ProtocolName, ScenarioConfig
from app.models.trace import DropReason, PacketKind
from app.simulation.packet import BROADCAST, Packet

if TYPE_CHECKING:
    from app.simulation.node import NodeContext

# forwarding walks longer than this are treated as loops
MAX_HOPS = 64
# seconds a flooded request id is remembered by default
SEEN_REQUEST_LIFETIME = 10.0


class SeenRequests:
    """
    Flood duplicate filter keyed by (origin, request id). An entry is
    forgotten `lifetime` seconds after it was recorded.
    """

    def __init__(self, lifetime: float = SEEN_REQUEST_LIFETIME):
        self.lifetime = lifetime
        self._expires: Dict[Tuple[int, int], float] = {}

    def __len__(self) -> int:
        return len(self._expires)

    def record(self, key: Tuple[int, int], now: float) -> bool:
        """Remember `key`; False when it is still remembered."""
        self._prune(now)
        if key in self._expires:
            return False
        self._expires[key] = now + self.lifetime
        return True

    def _prune(self, now: float) -> None:
        # insertion order is expiry order: the clock never goes back
        while self._expires:
            key = next(iter(self._expires))
            if self._expires[key] > now:
                break
            del self._expires[key]


@dataclass(frozen=True)
class RouteRow:
    dest: int
    next_hop: int
    metric: float


class RoutingProtocol(ABC):
    """
    Per-node protocol instance.

    The instance talks to the rest of the simulator only through its
    NodeContext: transmissions, deliveries, drops and timers.
    """

    name: ProtocolName

    def __init__(self, ctx: "NodeContext", scenario: ScenarioConfig):
        self.ctx = ctx
        self.scenario = scenario
        self.node_id = ctx.node_id

    def start(self) -> None:
        """Called once at t=0 for instances whose control plane runs."""

    @abstractmethod
    def on_data_to_send(self, packet: Packet) -> None:
        """A data packet originating here (or handed back for rerouting)."""

    @abstractmethod
    def on_packet(self, packet: Packet, sender: int) -> None:
        """A packet of this protocol arrived from neighbor `sender`."""

    @abstractmethod
    def on_link_failure(self, neighbor: int, packet: Packet) -> None:
        """Unicast of `packet` to `neighbor` failed at transmission start."""

    def on_tick(self, now: float, key: Hashable) -> None:
        """A timer set through the context fired."""

    @abstractmethod
    def has_route(self, dest: int) -> bool:
        ...

    @abstractmethod
    def next_hop(self, dest: int) -> Optional[int]:
        ...

    def refresh_route(self, dest: int) -> None:
        """Obtain a route to `dest` if none is held; control traffic only."""

    @abstractmethod
    def route_rows(self) -> List[RouteRow]:
        ...

    def buffered_packets(self) -> List[Packet]:
        return []

    # -- helpers shared by the implementations ----------------------------

    def control_packet(self, kind: PacketKind, size: int, dst: int, header: Any) -> Packet:
        return Packet(
            pkt_id=self.ctx.new_packet_id(),
            kind=kind,
            size=size,
            src=self.node_id,
            dst=dst,
            header=header,
            sent_at=self.ctx.now,
        )

    def broadcast(self, packet: Packet, forwarded: bool = False) -> None:
        self.ctx.send_control(packet, BROADCAST, forwarded)

    def hop_limit_exceeded(self, packet: Packet) -> bool:
        if packet.hop_count >= MAX_HOPS:
            self.ctx.drop(packet, DropReason.LOOP)
            return True
        return False
