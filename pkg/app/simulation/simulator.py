"""Builds and runs one scenario end to end."""
import itertools
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx

from app.core.logging_config import get_logger
from app.models.metrics import MetricsReport
from app.models.scenario import ScenarioConfig, SwitchPolicy
from app.models.trace import TraceEvent
from app.simulation.engine import Engine, Event, EventKind
from app.simulation.metrics import build_report
from app.simulation.mobility import MobilityManager, Point
from app.simulation.mrp import Evaluation, MrpSupervisor, SwitchEvent
from app.simulation.netstack import Medium
from app.simulation.node import Node, NodeContext, RoutingSelection
from app.simulation.packet import Packet
from app.simulation.rng import RngFactory
from app.simulation.routing import PROTOCOLS, RouteRow
from app.simulation.tracer import Tracer
from app.simulation.traffic import DeliveryRecord, Flow, TrafficManager, build_flows

logger = get_logger(__name__)


@dataclass(frozen=True)
class RouteSnapshotRow:
    time: float
    node: int
    protocol: str
    dest: int
    next_hop: int
    metric: float


@dataclass
class SimulationResult:
    scenario: ScenarioConfig
    tracer: Tracer
    report: MetricsReport
    deliveries: List[DeliveryRecord]
    flows: List[Flow]
    switches: List[SwitchEvent] = field(default_factory=list)
    evaluations: List[Evaluation] = field(default_factory=list)
    route_snapshot: List[RouteSnapshotRow] = field(default_factory=list)
    connectivity: Optional[nx.Graph] = None
    mobility_rows: List[Tuple[float, int, float, float]] = field(default_factory=list)
    in_flight: Set[int] = field(default_factory=set)
    event_count: int = 0
    max_queue_length: int = 0
    wall_seconds: float = 0.0

    @property
    def events(self) -> List[TraceEvent]:
        return self.tracer.events

    def trace_lines(self) -> List[str]:
        return self.tracer.lines()


class Simulation:
    """
    One run: engine, medium, mobility, traffic and a node per id.

    `positions` pins initial placement (and with static mobility, the whole
    topology); `flows` overrides the flows derived from the scenario.
    """

    def __init__(
        self,
        scenario: ScenarioConfig,
        positions: Optional[Sequence[Point]] = None,
        flows: Optional[List[Flow]] = None,
        record_mobility: bool = False,
    ):
        self.scenario = scenario
        self.engine = Engine()
        self.rng = RngFactory(scenario.seed)
        protocols = scenario.protocols
        self.mrp_config = scenario.mrp if scenario.is_mrp else None
        self.tracer = Tracer(
            scenario.duration,
            protocols[0],
            count_standby=self.mrp_config.count_standby if self.mrp_config else True,
        )
        self._packet_ids = itertools.count(1)
        self.mobility = MobilityManager(scenario, self.rng, positions=positions, record=record_mobility)
        self.medium = Medium(
            self.engine,
            self.tracer,
            scenario.radio,
            self.mobility,
            scenario.queue_capacity,
            on_receive=self._on_receive,
            on_link_failure=self._on_link_failure,
        )
        self.selection = RoutingSelection(protocols)
        self.nodes = [Node(i, self.selection) for i in range(scenario.n_nodes)]
        self.traffic = TrafficManager(
            self.engine,
            self.tracer,
            flows if flows is not None else build_flows(scenario, self.rng),
            self.new_packet_id,
            submit=self._originate,
        )
        for node in self.nodes:
            for protocol in protocols:
                ctx = NodeContext(
                    node.node_id,
                    protocol,
                    self.engine,
                    self.tracer,
                    self.medium,
                    self.traffic,
                    self.rng.stream(f"jitter:{protocol.value}:{node.node_id}"),
                    self.new_packet_id,
                )
                node.attach(protocol, PROTOCOLS[protocol](ctx, scenario))

        self.supervisor: Optional[MrpSupervisor] = None
        if self.mrp_config is not None and self.mrp_config.policy is not SwitchPolicy.DISABLED:
            self.supervisor = MrpSupervisor(
                self.engine, self.tracer, self.selection, self.nodes, self.traffic, self.mrp_config, scenario.duration
            )

        self.engine.register(EventKind.MOBILITY_UPDATE, self._handle_mobility)
        self.engine.register(EventKind.ROUTING_TIMER, self._handle_timer)
        self.engine.register(EventKind.METRIC_EPOCH, self._handle_epoch)
        self.engine.register(EventKind.SIMULATION_END, self._handle_end)
        self.finished = False
        self._started = False

    def new_packet_id(self) -> int:
        return next(self._packet_ids)

    # -- wiring -----------------------------------------------------------

    def _originate(self, node: int, packet: Packet) -> None:
        self.nodes[node].originate(packet)

    def _on_receive(self, node: int, packet: Packet, sender: int) -> None:
        self.nodes[node].receive(packet, sender)

    def _on_link_failure(self, sender: int, neighbor: int, packet: Packet) -> None:
        self.nodes[sender].link_failed(neighbor, packet)

    def _handle_timer(self, event: Event) -> None:
        protocol, key = event.payload
        self.nodes[event.target].timer_fired(event.fire_at, protocol, key)

    def _handle_mobility(self, event: Event) -> None:
        k = event.payload
        # positions move from the previous tick up to this one
        self.mobility.advance((k - 1) * self.mobility.tick, self.mobility.tick)
        next_at = (k + 1) * self.mobility.tick
        if next_at <= self.scenario.duration:
            self.engine.schedule(next_at, EventKind.MOBILITY_UPDATE, payload=k + 1)

    def _handle_epoch(self, event: Event) -> None:
        delivered = sum(1 for r in self.traffic.records.values() if r.delivered)
        logger.debug(
            f"t={event.fire_at:.1f} sent={len(self.traffic.records)} delivered={delivered} "
            f"trace_events={len(self.tracer.events)} active={self.selection.active.value}"
        )
        next_at = event.fire_at + self.scenario.mrp_epoch
        if next_at <= self.scenario.duration:
            self.engine.schedule(next_at, EventKind.METRIC_EPOCH)

    def _handle_end(self, event: Event) -> None:
        self.finished = True

    # -- lifecycle --------------------------------------------------------

    def start(self) -> None:
        if self._started:
            return
        self._started = True
        active = self.selection.active
        for node in self.nodes:
            for protocol, instance in node.protocols.items():
                # an inert supervisor leaves the standby control plane off
                if protocol is active or self.supervisor is not None:
                    instance.start()
        self.traffic.start()
        if not self.mobility.is_static and self.mobility.tick <= self.scenario.duration:
            self.engine.schedule(self.mobility.tick, EventKind.MOBILITY_UPDATE, payload=1)
        if self.scenario.mrp_epoch <= self.scenario.duration:
            self.engine.schedule(self.scenario.mrp_epoch, EventKind.METRIC_EPOCH)
        if self.supervisor is not None:
            self.supervisor.start()
        self.engine.schedule(self.scenario.duration, EventKind.SIMULATION_END)

    def run(self, until: Optional[float] = None) -> int:
        self.start()
        return self.engine.run(self.scenario.duration if until is None else until)

    def in_flight(self) -> Set[int]:
        """Data packets neither delivered nor dropped: queued, buffered or on the air."""
        ids = {p.pkt_id for _, p in self.medium.queued_packets() if p.is_data}
        ids.update(p.pkt_id for node in self.nodes for p in node.buffered_packets())
        for event in self.engine.pending():
            if event.kind is EventKind.PACKET_ARRIVAL and event.payload[0].is_data:
                ids.add(event.payload[0].pkt_id)
        return ids

    def route_snapshot(self) -> List[RouteSnapshotRow]:
        now = self.engine.clock
        rows = []
        for node in self.nodes:
            for protocol, instance in node.protocols.items():
                rows.extend(
                    RouteSnapshotRow(now, node.node_id, protocol.value, r.dest, r.next_hop, r.metric)
                    for r in instance.route_rows()
                )
        return rows

    def routes_of(self, node: int) -> Dict[str, List[RouteRow]]:
        return {p.value: i.route_rows() for p, i in self.nodes[node].protocols.items()}

    def result(self, event_count: int, wall_seconds: float = 0.0) -> SimulationResult:
        report = build_report(self.tracer.events, self.scenario.duration, self.tracer.initial_active)
        return SimulationResult(
            scenario=self.scenario,
            tracer=self.tracer,
            report=report,
            deliveries=self.traffic.delivery_rows(),
            flows=self.traffic.flows,
            switches=list(self.supervisor.switches) if self.supervisor else [],
            evaluations=list(self.supervisor.evaluations) if self.supervisor else [],
            route_snapshot=self.route_snapshot(),
            connectivity=self.medium.connectivity_graph(),
            mobility_rows=list(self.mobility.rows),
            in_flight=self.in_flight(),
            event_count=event_count,
            max_queue_length=self.medium.max_queue_length,
            wall_seconds=wall_seconds,
        )


def run_scenario(
    scenario: ScenarioConfig,
    positions: Optional[Sequence[Point]] = None,
    flows: Optional[List[Flow]] = None,
    record_mobility: bool = False,
) -> SimulationResult:
    logger.info(
        f"Starting run {scenario.scenario_id} seed={scenario.seed} protocol={scenario.protocol_label} "
        f"nodes={scenario.n_nodes} duration={scenario.duration}"
    )
    started = time.perf_counter()
    simulation = Simulation(scenario, positions=positions, flows=flows, record_mobility=record_mobility)
    count = simulation.run()
    elapsed = time.perf_counter() - started
    result = simulation.result(count, elapsed)
    logger.info(
        f"Finished run {scenario.scenario_id} seed={scenario.seed}: {count} events, "
        f"PDR={result.report.pdr}, ROH={result.report.roh}, switches={len(result.switches)} in {elapsed:.2f}s"
    )
    return result
