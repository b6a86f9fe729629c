"""
DSR: source routing with an accumulated-record route discovery.

Data packets carry the whole path. The route cache learns every sub-route
it sees (RREQ records reversed, RREP routes, forwarded source routes) and a
route error purges every cached path that uses the dead link in either
direction.
"""
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Set, Tuple

from app.core.logging_config import get_logger
from app.models.scenario import ProtocolName, ScenarioConfig
from app.models.trace import DropReason, PacketKind
from app.simulation.packet import Packet
from app.simulation.routing.base import RouteRow, RoutingProtocol, SeenRequests

logger = get_logger(__name__)

Path = Tuple[int, ...]

RREQ_BASE_SIZE = 16
RREP_BASE_SIZE = 16
RERR_SIZE = 20
ADDRESS_SIZE = 4


@dataclass(frozen=True)
class DsrRreqHeader:
    origin: int
    rreq_id: int
    target: int
    record: Path


@dataclass(frozen=True)
class DsrRrepHeader:
    route: Path


@dataclass(frozen=True)
class DsrRerrHeader:
    broken: Tuple[int, int]
    path: Path  # detecting node back to the data source


@dataclass(frozen=True)
class SourceRoute:
    route: Path


@dataclass
class Discovery:
    generation: int
    attempts: int = 0


def has_repeats(path: Path) -> bool:
    return len(set(path)) != len(path)


def uses_link(path: Path, a: int, b: int) -> bool:
    return any({path[i], path[i + 1]} == {a, b} for i in range(len(path) - 1))


@dataclass
class RouteCache:
    """dest -> set of loop-free paths starting at the owning node; unbounded."""
    owner: int
    routes: Dict[int, Set[Path]] = field(default_factory=dict)

    def add(self, path: Path) -> None:
        if len(path) < 2 or path[0] != self.owner or has_repeats(path):
            return
        for end in range(1, len(path)):
            self.routes.setdefault(path[end], set()).add(path[: end + 1])

    def best(self, dest: int) -> Optional[Path]:
        paths = self.routes.get(dest)
        if not paths:
            return None
        return min(paths, key=lambda p: (len(p), p))

    def purge_link(self, a: int, b: int) -> int:
        removed = 0
        for dest in list(self.routes):
            kept = {p for p in self.routes[dest] if not uses_link(p, a, b)}
            removed += len(self.routes[dest]) - len(kept)
            if kept:
                self.routes[dest] = kept
            else:
                del self.routes[dest]
        return removed


class DsrProtocol(RoutingProtocol):
    name = ProtocolName.DSR

    def __init__(self, ctx, scenario: ScenarioConfig):
        super().__init__(ctx, scenario)
        self.cache = RouteCache(self.node_id)
        self.rreq_id = 0
        self.seen = SeenRequests()
        self.pending: Dict[int, List[Packet]] = {}
        self.discoveries: Dict[int, Discovery] = {}
        self._generation = 0
        self.cache_reply = scenario.dsr_cache_reply

    def has_route(self, dest: int) -> bool:
        return self.cache.best(dest) is not None

    def next_hop(self, dest: int) -> Optional[int]:
        route = self.cache.best(dest)
        return route[1] if route else None

    def _learn(self, path: Path) -> None:
        """Cache the parts of `path` usable from here, in both directions."""
        if self.node_id not in path:
            return
        i = path.index(self.node_id)
        self.cache.add(path[i:])
        self.cache.add(tuple(reversed(path[: i + 1])))

    # -- data -------------------------------------------------------------

    def on_data_to_send(self, packet: Packet) -> None:
        route = self.cache.best(packet.dst)
        if route is not None:
            packet.header = SourceRoute(route)
            self.ctx.send_data(packet, route[1])
            return
        self.pending.setdefault(packet.dst, []).append(packet)
        if packet.dst not in self.discoveries:
            self.dsr_route_discover(packet.dst)

    def dsr_forward(self, packet: Packet) -> None:
        if packet.dst == self.node_id:
            self.ctx.deliver(packet)
            return
        route = packet.header.route
        if has_repeats(route) or self.node_id not in route[:-1]:
            self.ctx.drop(packet, DropReason.LOOP)
            return
        self._learn(route)
        i = route.index(self.node_id)
        self.ctx.send_data(packet, route[i + 1])

    def _flush(self, dest: int) -> None:
        for packet in self.pending.pop(dest, []):
            self.on_data_to_send(packet)

    def buffered_packets(self) -> List[Packet]:
        return [p for packets in self.pending.values() for p in packets]

    # -- discovery --------------------------------------------------------

    def dsr_route_discover(self, dest: int) -> None:
        discovery = self.discoveries.get(dest)
        if discovery is None:
            self._generation += 1
            discovery = Discovery(self._generation)
            self.discoveries[dest] = discovery
        self._send_rreq(dest, discovery)

    def _send_rreq(self, dest: int, discovery: Discovery) -> None:
        self.rreq_id += 1
        self.seen.record((self.node_id, self.rreq_id), self.ctx.now)
        header = DsrRreqHeader(origin=self.node_id, rreq_id=self.rreq_id, target=dest, record=(self.node_id,))
        self.broadcast(self.control_packet(PacketKind.DSR_RREQ, RREQ_BASE_SIZE + ADDRESS_SIZE, dest, header))
        timeout = self.scenario.rreq_timeout * (2 ** discovery.attempts)
        self.ctx.set_timer(timeout, ("rreq", dest, discovery.generation))

    def refresh_route(self, dest: int) -> None:
        if not self.has_route(dest) and dest not in self.discoveries:
            self.dsr_route_discover(dest)

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
            for packet in self.pending.pop(dest, []):
                self.ctx.drop(packet, DropReason.RETRY)
            return
        discovery.attempts += 1
        self._send_rreq(dest, discovery)

    # -- control ----------------------------------------------------------

    def on_packet(self, packet: Packet, sender: int) -> None:
        if packet.kind is PacketKind.CBR:
            self.dsr_forward(packet)
        elif packet.kind is PacketKind.DSR_RREQ:
            self._on_rreq(packet)
        elif packet.kind is PacketKind.DSR_RREP:
            self._on_rrep(packet)
        elif packet.kind is PacketKind.DSR_RERR:
            self._on_rerr(packet)

    def _on_rreq(self, packet: Packet) -> None:
        header: DsrRreqHeader = packet.header
        if self.node_id in header.record:
            return
        if not self.seen.record((header.origin, header.rreq_id), self.ctx.now):
            return
        record = header.record + (self.node_id,)
        self._learn(record)

        if header.target == self.node_id:
            self._send_rrep(record)
            return

        if self.cache_reply:
            cached = self.cache.best(header.target)
            if cached is not None and not set(cached[1:]) & set(record):
                self._send_rrep(record + cached[1:])
                return

        copy = packet.clone()
        copy.header = DsrRreqHeader(header.origin, header.rreq_id, header.target, record)
        copy.size = RREQ_BASE_SIZE + ADDRESS_SIZE * len(record)
        self.broadcast(copy, forwarded=True)

    def _send_rrep(self, route: Path) -> None:
        i = route.index(self.node_id)
        packet = self.control_packet(
            PacketKind.DSR_RREP, RREP_BASE_SIZE + ADDRESS_SIZE * len(route), route[0], DsrRrepHeader(route)
        )
        self.ctx.send_control(packet, route[i - 1])

    def _on_rrep(self, packet: Packet) -> None:
        route = packet.header.route
        if self.node_id not in route:
            return
        self._learn(route)
        i = route.index(self.node_id)
        if i == 0:
            dest = route[-1]
            self.discoveries.pop(dest, None)
            self._flush(dest)
            return
        self.ctx.send_control(packet.clone(), route[i - 1], forwarded=True)

    # -- maintenance ------------------------------------------------------

    def on_link_failure(self, neighbor: int, packet: Packet) -> None:
        removed = self.cache.purge_link(self.node_id, neighbor)
        logger.debug(f"DSR node {self.node_id}: link to {neighbor} down, {removed} cached routes purged")
        if packet.kind is not PacketKind.CBR:
            self.ctx.drop(packet, DropReason.LINK)
            return
        if packet.src == self.node_id:
            self.on_data_to_send(packet)
            return
        self.ctx.drop(packet, DropReason.LINK)
        route = packet.header.route
        i = route.index(self.node_id)
        back = tuple(reversed(route[: i + 1]))
        header = DsrRerrHeader(broken=(self.node_id, neighbor), path=back)
        self.ctx.send_control(self.control_packet(PacketKind.DSR_RERR, RERR_SIZE, packet.src, header), back[1])

    def _on_rerr(self, packet: Packet) -> None:
        header: DsrRerrHeader = packet.header
        self.cache.purge_link(*header.broken)
        path = header.path
        i = path.index(self.node_id)
        if i + 1 < len(path):
            self.ctx.send_control(packet.clone(), path[i + 1], forwarded=True)

    def route_rows(self) -> List[RouteRow]:
        rows = []
        for dest in sorted(self.cache.routes):
            route = self.cache.best(dest)
            rows.append(RouteRow(dest, route[1], len(route) - 1))
        return rows
