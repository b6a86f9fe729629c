"""
TORA-lite: destination-rooted heights with Gafni-Bertsekas full reversal.

A QRY flood marks nodes as route-required; the destination answers with an
UPD carrying height (0, 0, dest) and each route-required node takes the
first UPD it hears, one delta above the sender. Data always moves to the
lowest strictly lower neighbor. A node left without a lower neighbor raises
itself above all of its neighbors and advertises the new height. Partial
reversal and the IMEP reliability layer are not modelled.
"""
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, NamedTuple, Optional, Set

from app.core.logging_config import get_logger
from app.models.scenario import ProtocolName, ScenarioConfig
from app.models.trace import DropReason, PacketKind
from app.simulation.packet import Packet
from app.simulation.routing.base import RouteRow, RoutingProtocol

logger = get_logger(__name__)

QRY_SIZE = 16
UPD_SIZE = 20
CLR_SIZE = 16


class Height(NamedTuple):
    level: int
    delta: int
    node: int


@dataclass(frozen=True)
class ToraQuery:
    dest: int


@dataclass(frozen=True)
class ToraUpdate:
    dest: int
    height: Optional[Height]


@dataclass(frozen=True)
class ToraClear:
    dest: int


@dataclass
class DestinationState:
    height: Optional[Height] = None
    neighbor_heights: Dict[int, Optional[Height]] = field(default_factory=dict)
    route_required: bool = False
    # route_required came from this node's own query rather than a relayed one
    querying: bool = False
    reversals: int = 0
    query_generation: int = 0
    query_attempts: int = 0
    pending: List[Packet] = field(default_factory=list)


class ToraProtocol(RoutingProtocol):
    name = ProtocolName.TORA

    def __init__(self, ctx, scenario: ScenarioConfig):
        super().__init__(ctx, scenario)
        self.states: Dict[int, DestinationState] = {}
        self.neighbors: Set[int] = set()
        self.max_reversals = scenario.tora_max_reversals
        self._generation = 0

    def _state(self, dest: int) -> DestinationState:
        state = self.states.get(dest)
        if state is None:
            state = DestinationState()
            if dest == self.node_id:
                state.height = Height(0, 0, self.node_id)
            self.states[dest] = state
        return state

    def height(self, dest: int) -> Optional[Height]:
        return self._state(dest).height

    # -- route selection --------------------------------------------------

    def tora_lite_route(self, dest: int) -> Optional[int]:
        """Lowest neighbor strictly below this node's height; ties cannot occur since heights embed the node id."""
        if dest == self.node_id:
            return None
        state = self._state(dest)
        if state.height is None:
            return None
        lower = [
            (h, n) for n, h in state.neighbor_heights.items()
            if h is not None and n in self.neighbors and h < state.height
        ]
        if not lower:
            return None
        return min(lower)[1]

    def next_hop(self, dest: int) -> Optional[int]:
        return self.tora_lite_route(dest)

    def has_route(self, dest: int) -> bool:
        return self.tora_lite_route(dest) is not None

    # -- data -------------------------------------------------------------

    def on_data_to_send(self, packet: Packet) -> None:
        self._route_data(packet)

    def _route_data(self, packet: Packet) -> None:
        if packet.dst == self.node_id:
            self.ctx.deliver(packet)
            return
        if self.hop_limit_exceeded(packet):
            return
        hop = self.tora_lite_route(packet.dst)
        if hop is not None:
            self.ctx.send_data(packet, hop)
            return
        state = self._state(packet.dst)
        state.pending.append(packet)
        if state.height is None and not state.querying:
            self._query(packet.dst)

    def _flush(self, dest: int) -> None:
        state = self._state(dest)
        if not state.pending or self.tora_lite_route(dest) is None:
            return
        packets, state.pending = state.pending, []
        for packet in packets:
            self._route_data(packet)

    def buffered_packets(self) -> List[Packet]:
        return [p for state in self.states.values() for p in state.pending]

    # -- creation ---------------------------------------------------------

    def _query(self, dest: int) -> None:
        state = self._state(dest)
        state.route_required = True
        state.querying = True
        state.query_attempts = 0
        self._generation += 1
        state.query_generation = self._generation
        self._send_query(dest, state)

    def _send_query(self, dest: int, state: DestinationState) -> None:
        self.broadcast(self.control_packet(PacketKind.TORA_QUERY, QRY_SIZE, dest, ToraQuery(dest)))
        timeout = self.scenario.rreq_timeout * (2 ** state.query_attempts)
        self.ctx.set_timer(timeout, ("qry", dest, state.query_generation))

    def refresh_route(self, dest: int) -> None:
        state = self._state(dest)
        if not self.has_route(dest) and state.height is None and not state.querying:
            self._query(dest)

    def on_tick(self, now: float, key: Hashable) -> None:
        _, dest, generation = key
        state = self._state(dest)
        if not state.route_required or state.query_generation != generation:
            return
        if not state.querying or state.query_attempts >= self.scenario.rreq_retries:
            state.route_required = False
            state.querying = False
            packets, state.pending = state.pending, []
            for packet in packets:
                self.ctx.drop(packet, DropReason.RETRY)
            return
        state.query_attempts += 1
        self._send_query(dest, state)

    def _advertise(self, dest: int) -> None:
        update = ToraUpdate(dest, self._state(dest).height)
        self.broadcast(self.control_packet(PacketKind.TORA_UPDATE, UPD_SIZE, dest, update))

    # -- control ----------------------------------------------------------

    def on_packet(self, packet: Packet, sender: int) -> None:
        if packet.kind is PacketKind.CBR:
            self._route_data(packet)
            return
        self.neighbors.add(sender)
        if packet.kind is PacketKind.TORA_QUERY:
            self._on_query(packet, sender)
        elif packet.kind is PacketKind.TORA_UPDATE:
            self._on_update(packet.header, sender)
        elif packet.kind is PacketKind.TORA_CLEAR:
            self._on_clear(packet.header, sender)

    def _on_query(self, packet: Packet, sender: int) -> None:
        dest = packet.header.dest
        state = self._state(dest)
        if state.height is not None:
            self._advertise(dest)
        elif not state.route_required:
            state.route_required = True
            self._generation += 1
            state.query_generation = self._generation
            self.broadcast(packet.clone(), forwarded=True)
            # a relay never re-queries; its timer only expires the route-required mark
            hold = self.scenario.rreq_timeout * (2 ** self.scenario.rreq_retries)
            self.ctx.set_timer(hold, ("qry", dest, state.query_generation))

    def _on_update(self, update: ToraUpdate, sender: int) -> None:
        dest = update.dest
        state = self._state(dest)
        state.neighbor_heights[sender] = update.height
        if dest == self.node_id:
            return
        if state.route_required and update.height is not None:
            state.height = Height(update.height.level, update.height.delta + 1, self.node_id)
            state.route_required = False
            state.querying = False
            state.reversals = 0
            self._advertise(dest)
        elif state.height is not None and self.tora_lite_route(dest) is None:
            self.tora_lite_reverse(dest)
        self._flush(dest)

    def tora_lite_reverse(self, dest: int) -> None:
        """Full reversal: rise above every known neighbor, or clear once the cap is hit."""
        if dest == self.node_id:
            return
        state = self._state(dest)
        known = [h for n, h in state.neighbor_heights.items() if h is not None and n in self.neighbors]
        state.reversals += 1
        if not known or state.reversals > self.max_reversals:
            self._clear(dest)
            return
        top_level = max(h.level for h in known)
        top_delta = max(h.delta for h in known if h.level == top_level)
        state.height = Height(top_level, top_delta + 1, self.node_id)
        self._advertise(dest)

    def _clear(self, dest: int) -> None:
        state = self._state(dest)
        logger.debug(f"TORA node {self.node_id}: clearing height toward {dest} after {state.reversals} reversals")
        state.height = None
        state.reversals = 0
        state.route_required = False
        state.querying = False
        packets, state.pending = state.pending, []
        for packet in packets:
            self.ctx.drop(packet, DropReason.NO_ROUTE)
        self.broadcast(self.control_packet(PacketKind.TORA_CLEAR, CLR_SIZE, dest, ToraClear(dest)))

    def _on_clear(self, clear: ToraClear, sender: int) -> None:
        dest = clear.dest
        state = self._state(dest)
        state.neighbor_heights[sender] = None
        if dest != self.node_id and state.height is not None and self.tora_lite_route(dest) is None:
            self._clear(dest)

    def on_link_failure(self, neighbor: int, packet: Packet) -> None:
        self.neighbors.discard(neighbor)
        for dest in sorted(self.states):
            state = self.states[dest]
            state.neighbor_heights.pop(neighbor, None)
            if dest != self.node_id and state.height is not None and self.tora_lite_route(dest) is None:
                self.tora_lite_reverse(dest)
        if packet.kind is PacketKind.CBR:
            self._route_data(packet)
        else:
            self.ctx.drop(packet, DropReason.LINK)

    def route_rows(self) -> List[RouteRow]:
        rows = []
        for dest in sorted(self.states):
            hop = self.tora_lite_route(dest)
            if hop is not None:
                rows.append(RouteRow(dest, hop, self.states[dest].height.delta))
        return rows
