"""
DSDV: destination-sequenced distance vector.

Each node dumps its full table every `dsdv_full_dump` seconds with its own
even sequence number bumped by two, and sends triggered incremental updates
for changed entries. A broken link is advertised with metric infinity and
an odd sequence number. Advertising of a new sequence number is held back
by a settling-time estimate to damp route fluctuation.
"""
import math
from dataclasses import dataclass
from typing import Dict, Hashable, List, Optional, Tuple

from app.core.logging_config import get_logger
from app.models.scenario import ProtocolName, ScenarioConfig
from app.models.trace import DropReason, PacketKind
from app.simulation.packet import Packet
from app.simulation.routing.base import RouteRow, RoutingProtocol

logger = get_logger(__name__)

INFINITY = math.inf
UPDATE_BASE_SIZE = 20
UPDATE_ENTRY_SIZE = 12
SETTLING_WEIGHT = 0.5

FULL_DUMP = "full"
INCREMENTAL = "incremental"


@dataclass(frozen=True)
class Advert:
    dest: int
    metric: float
    seq: int


@dataclass(frozen=True)
class DsdvUpdate:
    entries: Tuple[Advert, ...]
    full: bool


@dataclass
class DsdvRoute:
    next_hop: int
    metric: float
    seq: int
    changed: bool = True
    advertise_at: float = 0.0


@dataclass
class Settling:
    seq: int
    first_heard: float
    estimate: float = 0.0


def update_size(entries: int) -> int:
    return UPDATE_BASE_SIZE + UPDATE_ENTRY_SIZE * entries


def is_better(seq: int, metric: float, existing: Optional[DsdvRoute]) -> bool:
    """Higher sequence wins; an equal sequence needs a strictly smaller metric."""
    if existing is None:
        return metric < INFINITY
    if seq > existing.seq:
        return True
    return seq == existing.seq and metric < existing.metric


class DsdvProtocol(RoutingProtocol):
    name = ProtocolName.DSDV

    def __init__(self, ctx, scenario: ScenarioConfig):
        super().__init__(ctx, scenario)
        self.seq = 0
        self.table: Dict[int, DsdvRoute] = {self.node_id: DsdvRoute(self.node_id, 0, 0)}
        self.settling: Dict[int, Settling] = {}
        self._incremental_pending = False
        self.full_interval = scenario.dsdv_full_dump
        self.incremental_delay = scenario.dsdv_incremental

    def start(self) -> None:
        self.ctx.set_timer(self.ctx.rng.uniform(0.0, 1.0), FULL_DUMP)

    def has_route(self, dest: int) -> bool:
        return self.next_hop(dest) is not None

    def next_hop(self, dest: int) -> Optional[int]:
        route = self.table.get(dest)
        if route is None or route.metric == INFINITY or dest == self.node_id:
            return None
        return route.next_hop

    # -- data -------------------------------------------------------------

    def on_data_to_send(self, packet: Packet) -> None:
        self._route_data(packet)

    def _route_data(self, packet: Packet) -> None:
        if packet.dst == self.node_id:
            self.ctx.deliver(packet)
            return
        if self.hop_limit_exceeded(packet):
            return
        hop = self.next_hop(packet.dst)
        if hop is None:
            self.ctx.drop(packet, DropReason.NO_ROUTE)
            return
        self.ctx.send_data(packet, hop)

    # -- updates ----------------------------------------------------------

    def on_tick(self, now: float, key: Hashable) -> None:
        if key == FULL_DUMP:
            self.dsdv_periodic_update(now)
        elif key == INCREMENTAL:
            self._incremental_pending = False
            self._send_incremental(now)

    def dsdv_periodic_update(self, now: float) -> None:
        self.seq += 2
        own = self.table[self.node_id]
        own.seq = self.seq
        entries = tuple(Advert(dest, route.metric, route.seq) for dest, route in sorted(self.table.items()))
        for route in self.table.values():
            route.changed = False
        self._broadcast(entries, full=True)
        self.ctx.set_timer(self.full_interval, FULL_DUMP)

    def _send_incremental(self, now: float) -> None:
        ready = []
        held: List[float] = []
        for dest, route in sorted(self.table.items()):
            if dest == self.node_id or not route.changed:
                continue
            if route.advertise_at <= now:
                ready.append(Advert(dest, route.metric, route.seq))
                route.changed = False
            else:
                held.append(route.advertise_at)
        if ready:
            own = self.table[self.node_id]
            self._broadcast((Advert(self.node_id, 0, own.seq),) + tuple(ready), full=False)
        if held:
            self._schedule_incremental(min(held) - now)

    def _schedule_incremental(self, delay: float) -> None:
        if not self._incremental_pending:
            self._incremental_pending = True
            self.ctx.set_timer(max(delay, 0.0), INCREMENTAL)

    def _broadcast(self, entries: Tuple[Advert, ...], full: bool) -> None:
        packet = self.control_packet(PacketKind.DSDV_UPDATE, update_size(len(entries)), -1, DsdvUpdate(entries, full))
        self.broadcast(packet)

    def dsdv_apply_update(self, sender: int, update: DsdvUpdate) -> bool:
        """Apply a neighbor's advert; returns True when the table changed."""
        now = self.ctx.now
        changed = False
        for advert in update.entries:
            if advert.dest == self.node_id:
                continue
            metric = advert.metric + 1 if advert.metric < INFINITY else INFINITY
            existing = self.table.get(advert.dest)
            if not is_better(advert.seq, metric, existing):
                continue
            self.table[advert.dest] = DsdvRoute(
                next_hop=sender,
                metric=metric,
                seq=advert.seq,
                advertise_at=self._advertise_time(advert.dest, advert.seq, metric, now),
            )
            changed = True
        if changed:
            self._schedule_incremental(self.incremental_delay)
        return changed

    def _advertise_time(self, dest: int, seq: int, metric: float, now: float) -> float:
        """Broken links go out at once; a new sequence waits out the settling estimate."""
        if metric == INFINITY:
            return now
        settling = self.settling.get(dest)
        if settling is None or seq > settling.seq:
            estimate = settling.estimate if settling is not None else 0.0
            self.settling[dest] = Settling(seq=seq, first_heard=now, estimate=estimate)
            return now + 2 * estimate
        sample = now - settling.first_heard
        settling.estimate = (1 - SETTLING_WEIGHT) * settling.estimate + SETTLING_WEIGHT * sample
        return now

    def on_packet(self, packet: Packet, sender: int) -> None:
        if packet.kind is PacketKind.CBR:
            self._route_data(packet)
        elif packet.kind is PacketKind.DSDV_UPDATE:
            self.dsdv_apply_update(sender, packet.header)

    def on_link_failure(self, neighbor: int, packet: Packet) -> None:
        broken = []
        for dest, route in sorted(self.table.items()):
            if dest != self.node_id and route.next_hop == neighbor and route.metric < INFINITY:
                route.metric = INFINITY
                route.seq += 1
                route.changed = True
                route.advertise_at = self.ctx.now
                broken.append(dest)
        if broken:
            logger.debug(f"DSDV node {self.node_id}: link to {neighbor} down, {len(broken)} destinations unreachable")
            self._schedule_incremental(0.0)
        self.ctx.drop(packet, DropReason.LINK)

    def route_rows(self) -> List[RouteRow]:
        return [
            RouteRow(dest, route.next_hop, route.metric)
            for dest, route in sorted(self.table.items())
            if dest != self.node_id and route.metric < INFINITY
        ]
