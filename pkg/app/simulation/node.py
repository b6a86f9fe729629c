"""Per-node glue between the medium, the traffic ledger and the routing instances."""
from typing import TYPE_CHECKING, Callable, Dict, Hashable, List, Optional

from app.core.logging_config import get_logger
from app.models.scenario import ProtocolName
from app.models.trace import Action, DropReason, Layer
from app.simulation.engine import Engine, EventKind
from app.simulation.packet import Packet
from app.simulation.rng import RngStream
from app.simulation.tracer import Tracer

if TYPE_CHECKING:
    from app.simulation.netstack import Medium
    from app.simulation.routing.base import RoutingProtocol
    from app.simulation.traffic import TrafficManager

logger = get_logger(__name__)


class RoutingSelection:
    """Which protocol carries newly generated data; shared by every node."""

    def __init__(self, protocols: List[ProtocolName]):
        self.protocols = list(protocols)
        self.active = self.protocols[0]

    @property
    def standby(self) -> Optional[ProtocolName]:
        others = [p for p in self.protocols if p is not self.active]
        return others[0] if others else None

    def switch_to(self, protocol: ProtocolName) -> None:
        self.active = protocol


class NodeContext:
    """What one protocol instance on one node may do to the outside world."""

    def __init__(
        self,
        node_id: int,
        protocol: ProtocolName,
        engine: Engine,
        tracer: Tracer,
        medium: "Medium",
        traffic: "TrafficManager",
        rng: RngStream,
        new_packet_id: Callable[[], int],
    ):
        self.node_id = node_id
        self.protocol = protocol
        self.engine = engine
        self.tracer = tracer
        self.medium = medium
        self.traffic = traffic
        self.rng = rng
        self.new_packet_id = new_packet_id

    @property
    def now(self) -> float:
        return self.engine.clock

    def send_control(self, packet: Packet, next_hop: int, forwarded: bool = False) -> bool:
        packet.protocol = self.protocol
        packet.next_hop = next_hop
        self.tracer.record(self.now, Action.FWD if forwarded else Action.SEND, Layer.RTR, self.node_id, packet)
        return self.medium.enqueue(self.node_id, packet)

    def send_data(self, packet: Packet, next_hop: int) -> bool:
        """Hand a data packet to the interface; intermediate hops are traced as RTR FWD."""
        packet.protocol = self.protocol
        packet.next_hop = next_hop
        if packet.src != self.node_id:
            self.tracer.record(self.now, Action.FWD, Layer.RTR, self.node_id, packet)
        return self.medium.enqueue(self.node_id, packet)

    def deliver(self, packet: Packet) -> None:
        self.traffic.deliver(packet, self.now)

    def drop(self, packet: Packet, reason: DropReason) -> None:
        logger.debug(f"Node {self.node_id} drops packet {packet.pkt_id} ({packet.kind.value}): {reason.value}")
        self.tracer.record(self.now, Action.DROP, Layer.RTR, self.node_id, packet, reason)

    def set_timer(self, delay: float, key: Hashable) -> None:
        self.engine.schedule_in(delay, EventKind.ROUTING_TIMER, target=self.node_id, payload=(self.protocol, key))


class Node:
    """A MANET node running one routing instance per configured protocol."""

    def __init__(self, node_id: int, selection: RoutingSelection):
        self.node_id = node_id
        self.selection = selection
        self.protocols: Dict[ProtocolName, "RoutingProtocol"] = {}

    def attach(self, protocol: ProtocolName, instance: "RoutingProtocol") -> None:
        self.protocols[protocol] = instance

    def originate(self, packet: Packet) -> None:
        protocol = self.selection.active
        packet.protocol = protocol
        self.protocols[protocol].on_data_to_send(packet)

    def receive(self, packet: Packet, sender: int) -> None:
        instance = self.protocols.get(packet.protocol)
        if instance is not None:
            instance.on_packet(packet, sender)

    def link_failed(self, neighbor: int, packet: Packet) -> None:
        instance = self.protocols.get(packet.protocol)
        if instance is not None:
            instance.on_link_failure(neighbor, packet)

    def timer_fired(self, now: float, protocol: ProtocolName, key: Hashable) -> None:
        self.protocols[protocol].on_tick(now, key)

    def buffered_packets(self) -> List[Packet]:
        return [p for instance in self.protocols.values() for p in instance.buffered_packets()]
