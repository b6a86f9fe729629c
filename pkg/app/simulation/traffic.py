"""CBR sources and the destination-side delivery ledger."""
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

from app.core.exceptions import ValidationError
from app.core.logging_config import get_logger
from app.models.scenario import ScenarioConfig
from app.models.trace import Action, DropReason, Layer, PacketKind
from app.simulation.engine import Engine, Event, EventKind
from app.simulation.packet import Packet
from app.simulation.rng import RngFactory
from app.simulation.tracer import Tracer

logger = get_logger(__name__)

# float slack when counting sends that fall exactly on the stop time
_BOUNDARY_EPSILON = 1e-9


@dataclass(frozen=True)
class Flow:
    flow_id: int
    source: int
    destination: int
    rate: float = 8.0
    payload: int = 512
    start: float = 0.0
    stop: float = 100.0

    def __post_init__(self):
        if self.source == self.destination:
            raise ValidationError(
                f"Flow {self.flow_id} has identical source and destination {self.source}",
                error_code="FLOW_LOOPBACK",
                details={"field": "flows"},
            )
        if self.rate <= 0 or self.payload <= 0:
            raise ValidationError(
                f"Flow {self.flow_id} needs a positive rate and payload",
                error_code="FLOW_INVALID",
                details={"field": "packet_rate" if self.rate <= 0 else "payload"},
            )

    @property
    def send_count(self) -> int:
        """Sends at start, start + 1/rate, ... up to and including stop."""
        if self.stop < self.start:
            return 0
        return math.floor((self.stop - self.start) * self.rate + _BOUNDARY_EPSILON) + 1

    def send_time(self, k: int) -> float:
        return min(self.start + k / self.rate, self.stop)

    def is_active(self, now: float) -> bool:
        return self.start <= now <= self.stop


@dataclass
class DeliveryRecord:
    pkt_id: int
    flow_id: int
    src: int
    dst: int
    size: int
    sent_at: float
    received_at: Optional[float] = None
    hops: Optional[int] = None

    @property
    def delivered(self) -> bool:
        return self.received_at is not None

    @property
    def delay(self) -> Optional[float]:
        if self.received_at is None:
            return None
        return self.received_at - self.sent_at


def build_flows(scenario: ScenarioConfig, rng: RngFactory) -> List[Flow]:
    """
    Explicit `flows` win; otherwise ceil(n/4) flows (or `flow_count`) with
    endpoints drawn without replacement from the "traffic" stream.
    """
    stop = scenario.effective_traffic_stop
    pairs = scenario.flow_pairs()
    if not pairs:
        count = scenario.flow_count or math.ceil(scenario.n_nodes / 4)
        stream = rng.stream("traffic")
        if 2 * count <= scenario.n_nodes:
            nodes = stream.sample_without_replacement(scenario.n_nodes, 2 * count)
            pairs = [(nodes[2 * i], nodes[2 * i + 1]) for i in range(count)]
        else:
            pairs = [tuple(stream.sample_without_replacement(scenario.n_nodes, 2)) for _ in range(count)]

    flows = []
    for flow_id, (src, dst) in enumerate(pairs):
        start = scenario.traffic_start
        if scenario.traffic_jitter > 0:
            start += rng.stream(f"traffic:jitter:{flow_id}").uniform(0.0, scenario.traffic_jitter)
        flows.append(Flow(
            flow_id=flow_id,
            source=src,
            destination=dst,
            rate=scenario.packet_rate,
            payload=scenario.payload,
            start=start,
            stop=stop,
        ))
    return flows


class TrafficManager:
    """
    Drives every flow from TRAFFIC_TICK events and owns the DeliveryRecords.

    `submit(node, packet)` hands a freshly generated data packet to the
    routing selection of the source node.
    """

    def __init__(
        self,
        engine: Engine,
        tracer: Tracer,
        flows: List[Flow],
        new_packet_id: Callable[[], int],
        submit: Callable[[int, Packet], None],
    ):
        self.engine = engine
        self.tracer = tracer
        self.flows = flows
        self._new_packet_id = new_packet_id
        self._submit = submit
        self.records: Dict[int, DeliveryRecord] = {}
        self.duplicates = 0
        engine.register(EventKind.TRAFFIC_TICK, self._handle_tick)

    def start(self) -> None:
        for flow in self.flows:
            if flow.send_count > 0:
                self.engine.schedule(flow.send_time(0), EventKind.TRAFFIC_TICK, target=flow.source, payload=(flow.flow_id, 0))

    def _handle_tick(self, event: Event) -> None:
        flow_id, k = event.payload
        flow = self.flows[flow_id]
        packet = self.generate(flow, event.fire_at)
        if k + 1 < flow.send_count:
            self.engine.schedule(flow.send_time(k + 1), EventKind.TRAFFIC_TICK, target=flow.source, payload=(flow_id, k + 1))
        self._submit(flow.source, packet)

    def generate(self, flow: Flow, now: float) -> Packet:
        packet = Packet(
            pkt_id=self._new_packet_id(),
            kind=PacketKind.CBR,
            size=flow.payload,
            src=flow.source,
            dst=flow.destination,
            sent_at=now,
            flow_id=flow.flow_id,
        )
        self.records[packet.pkt_id] = DeliveryRecord(
            pkt_id=packet.pkt_id,
            flow_id=flow.flow_id,
            src=flow.source,
            dst=flow.destination,
            size=flow.payload,
            sent_at=now,
        )
        self.tracer.record(now, Action.SEND, Layer.AGT, flow.source, packet)
        return packet

    def deliver(self, packet: Packet, at: float) -> bool:
        """Complete the record of `packet`; returns False for a duplicate."""
        record = self.records[packet.pkt_id]
        if record.delivered:
            self.duplicates += 1
            self.tracer.record(at, Action.DROP, Layer.AGT, packet.dst, packet, DropReason.DUPLICATE)
            return False
        record.received_at = at
        record.hops = packet.hop_count
        self.tracer.record(at, Action.RECV, Layer.AGT, packet.dst, packet)
        return True

    def active_flows(self, now: float) -> List[Flow]:
        return [f for f in self.flows if f.is_active(now)]

    def delivery_rows(self) -> List[DeliveryRecord]:
        return [self.records[k] for k in sorted(self.records)]
