"""
AODV: on-demand distance vector routing.

Routes are discovered with a flooded RREQ and a unicast RREP back along the
reverse path; broken next hops are reported to precursors with a RERR.
Link breaks come from the medium's unicast failure signal (no hellos).
"""
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Set, Tuple

from app.core.logging_config import get_logger
from app.models.scenario import ProtocolName, ScenarioConfig
from app.models.trace import DropReason, PacketKind
from app.simulation.packet import Packet
from app.simulation.routing.base import RouteRow, RoutingProtocol, SeenRequests

logger = get_logger(__name__)

RREQ_SIZE = 24
RREP_SIZE = 20
RERR_BASE_SIZE = 12
RERR_ENTRY_SIZE = 8

UNKNOWN_SEQ = -1


@dataclass(frozen=True)
class RreqHeader:
    origin: int
    origin_seq: int
    rreq_id: int
    dest: int
    dest_seq: int
    hop_count: int = 0


@dataclass(frozen=True)
class RrepHeader:
    origin: int
    dest: int
    dest_seq: int
    hop_count: int = 0


@dataclass(frozen=True)
class RerrHeader:
    unreachable: Tuple[Tuple[int, int], ...]


@dataclass
class AodvRoute:
    next_hop: int
    hop_count: int
    seq: int
    expires_at: float
    valid: bool = True
    precursors: Set[int] = field(default_factory=set)


@dataclass
class Discovery:
    generation: int
    attempts: int = 0


class AodvProtocol(RoutingProtocol):
    name = ProtocolName.AODV

    def __init__(self, ctx, scenario: ScenarioConfig):
        super().__init__(ctx, scenario)
        self.seq = 0
        self.rreq_id = 0
        self.table: Dict[int, AodvRoute] = {}
        self.seen = SeenRequests(scenario.aodv_route_lifetime)
        self.pending: Dict[int, List[Packet]] = {}
        self.discoveries: Dict[int, Discovery] = {}
        self._generation = 0
        self.lifetime = scenario.aodv_route_lifetime
        self.intermediate_reply = scenario.aodv_intermediate_reply

    # -- table ------------------------------------------------------------

    def _live(self, dest: int) -> Optional[AodvRoute]:
        route = self.table.get(dest)
        if route is None or not route.valid or route.expires_at <= self.ctx.now:
            return None
        return route

    def has_route(self, dest: int) -> bool:
        return self._live(dest) is not None

    def next_hop(self, dest: int) -> Optional[int]:
        route = self._live(dest)
        return route.next_hop if route else None

    def _update(self, dest: int, next_hop: int, hop_count: int, seq: int) -> bool:
        """Install when fresher, or equally fresh and shorter (or replacing an invalid entry)."""
        if dest == self.node_id:
            return False
        existing = self.table.get(dest)
        live = self._live(dest)
        if existing is not None:
            if seq < existing.seq:
                return False
            if seq == existing.seq and live is not None and hop_count >= live.hop_count:
                return False
        precursors = existing.precursors if existing is not None else set()
        self.table[dest] = AodvRoute(
            next_hop=next_hop,
            hop_count=hop_count,
            seq=seq,
            expires_at=self.ctx.now + self.lifetime,
            precursors=precursors,
        )
        return True

    def _learn_neighbor(self, neighbor: int) -> None:
        existing = self.table.get(neighbor)
        live = self._live(neighbor)
        if live is not None and live.hop_count == 1:
            live.expires_at = max(live.expires_at, self.ctx.now + self.lifetime)
            return
        seq = existing.seq if existing is not None else UNKNOWN_SEQ
        precursors = existing.precursors if existing is not None else set()
        self.table[neighbor] = AodvRoute(neighbor, 1, seq, self.ctx.now + self.lifetime, precursors=precursors)

    def _touch(self, route: AodvRoute) -> None:
        route.expires_at = max(route.expires_at, self.ctx.now + self.lifetime)

    # -- data -------------------------------------------------------------

    def on_data_to_send(self, packet: Packet) -> None:
        route = self._live(packet.dst)
        if route is not None:
            self._touch(route)
            self.ctx.send_data(packet, route.next_hop)
            return
        self.pending.setdefault(packet.dst, []).append(packet)
        if packet.dst not in self.discoveries:
            self.aodv_route_discover(packet.dst)

    def _forward_data(self, packet: Packet) -> None:
        if packet.dst == self.node_id:
            self.ctx.deliver(packet)
            return
        if self.hop_limit_exceeded(packet):
            return
        route = self._live(packet.dst)
        if route is None:
            self.ctx.drop(packet, DropReason.NO_ROUTE)
            entry = self.table.get(packet.dst)
            if entry is not None:
                self._send_rerr([(packet.dst, entry.seq)])
            return
        self._touch(route)
        route.precursors.add(packet.prev_hop)
        self.ctx.send_data(packet, route.next_hop)

    def _flush(self, dest: int) -> None:
        route = self._live(dest)
        packets = self.pending.pop(dest, [])
        for packet in packets:
            self.ctx.send_data(packet, route.next_hop)

    def buffered_packets(self) -> List[Packet]:
        return [p for packets in self.pending.values() for p in packets]

    # -- discovery --------------------------------------------------------

    def aodv_route_discover(self, dest: int) -> None:
        discovery = self.discoveries.get(dest)
        if discovery is None:
            self._generation += 1
            discovery = Discovery(self._generation)
            self.discoveries[dest] = discovery
        self._send_rreq(dest, discovery)

    def _send_rreq(self, dest: int, discovery: Discovery) -> None:
        self.seq += 1
        self.rreq_id += 1
        self.seen.record((self.node_id, self.rreq_id), self.ctx.now)
        known = self.table.get(dest)
        header = RreqHeader(
            origin=self.node_id,
            origin_seq=self.seq,
            rreq_id=self.rreq_id,
            dest=dest,
            dest_seq=known.seq if known is not None else UNKNOWN_SEQ,
        )
        self.broadcast(self.control_packet(PacketKind.AODV_RREQ, RREQ_SIZE, dest, header))
        timeout = self.scenario.rreq_timeout * (2 ** discovery.attempts)
        self.ctx.set_timer(timeout, ("rreq", dest, discovery.generation))

    def refresh_route(self, dest: int) -> None:
        if not self.has_route(dest) and dest not in self.discoveries:
            self.aodv_route_discover(dest)

    def on_tick(self, now: float, key: Hashable) -> None:
        _, dest, generation = key
        discovery = self.discoveries.get(dest)
        if discovery is None or discovery.generation != generation:
            return
        if self.has_route(dest):
            del self.discoveries[dest]
            self._flush(dest)
            return
        if discovery.attempts >= self.scenario.rreq_retries:
            del self.discoveries[dest]
            dropped = self.pending.pop(dest, [])
            if dropped:
                logger.debug(f"AODV node {self.node_id}: discovery of {dest} failed, dropping {len(dropped)} packets")
            for packet in dropped:
                self.ctx.drop(packet, DropReason.RETRY)
            return
        discovery.attempts += 1
        self._send_rreq(dest, discovery)

    # -- control ----------------------------------------------------------

    def on_packet(self, packet: Packet, sender: int) -> None:
        if packet.kind is PacketKind.CBR:
            self._forward_data(packet)
            return
        self._learn_neighbor(sender)
        if packet.kind is PacketKind.AODV_RREQ:
            self._on_rreq(packet, sender)
        elif packet.kind is PacketKind.AODV_RREP:
            self._on_rrep(packet, sender)
        elif packet.kind is PacketKind.AODV_RERR:
            self._on_rerr(packet, sender)

    def _on_rreq(self, packet: Packet, sender: int) -> None:
        header: RreqHeader = packet.header
        if not self.seen.record((header.origin, header.rreq_id), self.ctx.now):
            return
        self._update(header.origin, sender, header.hop_count + 1, header.origin_seq)

        if header.dest == self.node_id:
            self.seq = max(self.seq, header.dest_seq)
            reply = RrepHeader(origin=header.origin, dest=self.node_id, dest_seq=self.seq)
            self._send_rrep(reply, forwarded=False)
            return

        route = self._live(header.dest)
        if (
            self.intermediate_reply
            and route is not None
            and route.seq != UNKNOWN_SEQ
            and route.seq >= header.dest_seq
        ):
            route.precursors.add(sender)
            reverse = self._live(header.origin)
            if reverse is not None:
                reverse.precursors.add(route.next_hop)
            reply = RrepHeader(origin=header.origin, dest=header.dest, dest_seq=route.seq, hop_count=route.hop_count)
            self._send_rrep(reply, forwarded=False)
            return

        forwarded = RreqHeader(
            origin=header.origin,
            origin_seq=header.origin_seq,
            rreq_id=header.rreq_id,
            dest=header.dest,
            dest_seq=max(header.dest_seq, route.seq if route is not None else UNKNOWN_SEQ),
            hop_count=header.hop_count + 1,
        )
        copy = packet.clone()
        copy.header = forwarded
        self.broadcast(copy, forwarded=True)

    def _send_rrep(self, header: RrepHeader, forwarded: bool, packet: Optional[Packet] = None) -> None:
        reverse = self._live(header.origin)
        if packet is None:
            packet = self.control_packet(PacketKind.AODV_RREP, RREP_SIZE, header.origin, header)
        else:
            packet = packet.clone()
            packet.header = header
        if reverse is None:
            self.ctx.drop(packet, DropReason.NO_ROUTE)
            return
        self._touch(reverse)
        self.ctx.send_control(packet, reverse.next_hop, forwarded)

    def _on_rrep(self, packet: Packet, sender: int) -> None:
        header: RrepHeader = packet.header
        self._update(header.dest, sender, header.hop_count + 1, header.dest_seq)
        if header.origin == self.node_id:
            if self.has_route(header.dest):
                self.discoveries.pop(header.dest, None)
                self._flush(header.dest)
            return
        forward = self._live(header.dest)
        reverse = self._live(header.origin)
        if forward is not None and reverse is not None:
            forward.precursors.add(reverse.next_hop)
            reverse.precursors.add(sender)
        relayed = RrepHeader(
            origin=header.origin,
            dest=header.dest,
            dest_seq=header.dest_seq,
            hop_count=header.hop_count + 1,
        )
        self._send_rrep(relayed, forwarded=True, packet=packet)

    # -- maintenance ------------------------------------------------------

    def aodv_handle_link_failure(self, broken_neighbor: int) -> List[int]:
        """
        Invalidate every live route through `broken_neighbor`. One RERR lists
        them all, sent only when some upstream node (a precursor) uses one.
        """
        affected: List[Tuple[int, int]] = []
        upstream: Set[int] = set()
        for dest in sorted(self.table):
            route = self.table[dest]
            if route.valid and route.next_hop == broken_neighbor:
                route.valid = False
                if route.seq != UNKNOWN_SEQ:
                    route.seq += 1
                affected.append((dest, route.seq))
                upstream |= route.precursors
        upstream.discard(broken_neighbor)
        if upstream:
            self._send_rerr(affected)
        return [dest for dest, _ in affected]

    def _send_rerr(self, unreachable: List[Tuple[int, int]]) -> None:
        header = RerrHeader(tuple(unreachable))
        size = RERR_BASE_SIZE + RERR_ENTRY_SIZE * len(unreachable)
        self.broadcast(self.control_packet(PacketKind.AODV_RERR, size, -1, header))

    def on_link_failure(self, neighbor: int, packet: Packet) -> None:
        self.aodv_handle_link_failure(neighbor)
        if packet.kind is PacketKind.CBR and packet.src == self.node_id:
            self.on_data_to_send(packet)
        else:
            self.ctx.drop(packet, DropReason.LINK)

    def _on_rerr(self, packet: Packet, sender: int) -> None:
        header: RerrHeader = packet.header
        affected: List[Tuple[int, int]] = []
        upstream: Set[int] = set()
        for dest, seq in header.unreachable:
            route = self.table.get(dest)
            if route is not None and route.valid and route.next_hop == sender:
                route.valid = False
                route.seq = max(route.seq, seq)
                affected.append((dest, route.seq))
                upstream |= route.precursors
        upstream.discard(sender)
        if upstream:
            self._send_rerr(affected)

    def route_rows(self) -> List[RouteRow]:
        rows = []
        for dest in sorted(self.table):
            route = self._live(dest)
            if route is not None:
                rows.append(RouteRow(dest, route.next_hop, route.hop_count))
        return rows
