"""
Runtime protocol switching.

Every node runs two routing instances. A global selection decides which
one carries newly generated data; the supervisor re-evaluates it once per
epoch from the window just observed and, for the standby, from its control
plane health plus a decaying memory of the last score it earned while
active. Switches are synchronized across all nodes.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional

from app.core.logging_config import get_logger
from app.models.metrics import MetricsWindow
from app.models.scenario import MrpConfig, ProtocolName, SwitchPolicy
from app.simulation.engine import Engine, Event, EventKind
from app.simulation.metrics import summarize_window
from app.simulation.node import Node, RoutingSelection
from app.simulation.traffic import TrafficManager
from app.simulation.tracer import Tracer

logger = get_logger(__name__)

_EVALUATION_EPSILON = 1e-9


@dataclass(frozen=True)
class ScoreTerms:
    pdr: float
    delay: float
    roh: float


@dataclass(frozen=True)
class StandbyEstimate:
    coverage: float
    control_rate: float
    memory_term: Optional[float]
    score: float


@dataclass(frozen=True)
class SwitchDecision:
    switch: bool
    active_score: Optional[float]
    standby_score: float
    trigger: str
    value: float


@dataclass(frozen=True)
class SwitchEvent:
    at: float
    from_protocol: ProtocolName
    to_protocol: ProtocolName
    trigger: str
    value: float


@dataclass(frozen=True)
class Evaluation:
    at: float
    active: ProtocolName
    window: MetricsWindow
    standby: StandbyEstimate
    decision: SwitchDecision


def normalized_rate(control_transmissions: int, epoch: float, n_nodes: int, config: MrpConfig) -> float:
    """Per-node control rate of a window as a fraction of `roh_ref`, capped at 1."""
    rate = control_transmissions / epoch
    return min(1.0, rate / (config.roh_ref * n_nodes))


def score_terms(window: MetricsWindow, control_transmissions: int, n_nodes: int, config: MrpConfig) -> Optional[ScoreTerms]:
    if not window.has_traffic:
        return None
    delay = window.avg_delay
    delay_term = 0.0 if delay is None else 1.0 - min(1.0, delay / config.delay_ref)
    epoch = max(window.end - window.start, _EVALUATION_EPSILON)
    return ScoreTerms(
        pdr=window.pdr,
        delay=delay_term,
        roh=1.0 - normalized_rate(control_transmissions, epoch, n_nodes, config),
    )


def weighted_score(terms: ScoreTerms, config: MrpConfig) -> float:
    return config.weight_pdr * terms.pdr + config.weight_delay * terms.delay + config.weight_roh * terms.roh


def mrp_standby_estimate(
    coverage: float,
    control_transmissions: int,
    epoch: float,
    n_nodes: int,
    config: MrpConfig,
    last_score: Optional[float] = None,
    epochs_since_active: int = 0,
) -> StandbyEstimate:
    """
    Health proxy of the standby: route coverage of the active flows stands in
    for both PDR and delay, the control rate for ROH. A protocol that carried
    traffic before blends its last score in, decayed per elapsed epoch.
    """
    rate = normalized_rate(control_transmissions, epoch, n_nodes, config)
    health = config.weight_pdr * coverage + config.weight_delay * coverage + config.weight_roh * (1.0 - rate)
    if last_score is None:
        return StandbyEstimate(coverage, rate, None, health)
    decay = config.memory_decay ** max(epochs_since_active, 1)
    memory = last_score * decay
    return StandbyEstimate(coverage, rate, memory, memory + (1.0 - decay) * health)


def mrp_evaluate(
    window: MetricsWindow,
    active: ProtocolName,
    config: MrpConfig,
    standby: StandbyEstimate,
    epochs_since_switch: int,
    n_nodes: int,
) -> SwitchDecision:
    """Switch iff dwell is satisfied and the standby beats the active score by more than the hysteresis margin."""
    dwell_ok = epochs_since_switch >= config.min_dwell
    if config.policy is SwitchPolicy.DISABLED:
        return SwitchDecision(False, None, standby.score, "disabled", 0.0)
    if config.policy is SwitchPolicy.FORCED:
        return SwitchDecision(dwell_ok, None, standby.score, "forced", float(epochs_since_switch))

    terms = score_terms(window, window.roh_of(active.value), n_nodes, config)
    if terms is None:
        return SwitchDecision(False, None, standby.score, "no_traffic", 0.0)
    active_score = weighted_score(terms, config)
    switch = dwell_ok and standby.score > active_score * (1.0 + config.hysteresis)
    trigger, value = _weakest_term(window, terms, n_nodes, config, active)
    return SwitchDecision(switch, active_score, standby.score, trigger, value)


def _weakest_term(window: MetricsWindow, terms: ScoreTerms, n_nodes: int, config: MrpConfig, active: ProtocolName):
    """Metric whose weighted shortfall is largest, reported with its raw windowed value."""
    shortfalls = {
        "pdr": config.weight_pdr * (1.0 - terms.pdr),
        "delay": config.weight_delay * (1.0 - terms.delay),
        "roh_rate": config.weight_roh * (1.0 - terms.roh),
    }
    name = max(shortfalls, key=lambda k: (shortfalls[k], k))
    epoch = max(window.end - window.start, _EVALUATION_EPSILON)
    raw = {
        "pdr": window.pdr,
        "delay": window.avg_delay if window.avg_delay is not None else 0.0,
        "roh_rate": window.roh_of(active.value) / epoch,
    }
    return name, float(raw[name])


class MrpSupervisor:
    """Owns the MRP_EVALUATION events of one run."""

    def __init__(
        self,
        engine: Engine,
        tracer: Tracer,
        selection: RoutingSelection,
        nodes: List[Node],
        traffic: TrafficManager,
        config: MrpConfig,
        duration: float,
    ):
        self.engine = engine
        self.tracer = tracer
        self.selection = selection
        self.nodes = nodes
        self.traffic = traffic
        self.config = config
        self.duration = duration
        self.n_nodes = len(nodes)
        self.switches: List[SwitchEvent] = []
        self.evaluations: List[Evaluation] = []
        self._cursor = 0
        self._last_evaluation = 0.0
        self._epochs_since_switch = 0
        self._last_score: Dict[ProtocolName, float] = {}
        self._last_active_epoch: Dict[ProtocolName, int] = {}
        self._epoch_index = 0
        engine.register(EventKind.MRP_EVALUATION, self._handle_evaluation)

    def start(self) -> None:
        count = int(self.duration / self.config.epoch + _EVALUATION_EPSILON)
        for k in range(1, count + 1):
            self.engine.schedule(k * self.config.epoch, EventKind.MRP_EVALUATION)

    def _coverage(self, protocol: ProtocolName, now: float) -> float:
        flows = self.traffic.active_flows(now)
        if not flows:
            return 0.0
        covered = sum(1 for f in flows if self.nodes[f.source].protocols[protocol].has_route(f.destination))
        return covered / len(flows)

    def _handle_evaluation(self, event: Event) -> None:
        now = event.fire_at
        self._epoch_index += 1
        self._epochs_since_switch += 1
        active = self.selection.active
        standby = self.selection.standby

        events = self.tracer.events[self._cursor:]
        self._cursor = len(self.tracer.events)
        window = summarize_window(events, self._last_evaluation, now)
        epoch = now - self._last_evaluation
        self._last_evaluation = now

        estimate = mrp_standby_estimate(
            coverage=self._coverage(standby, now),
            control_transmissions=window.roh_of(standby.value),
            epoch=epoch,
            n_nodes=self.n_nodes,
            config=self.config,
            last_score=self._last_score.get(standby),
            epochs_since_active=self._epoch_index - self._last_active_epoch.get(standby, 0),
        )
        decision = mrp_evaluate(window, active, self.config, estimate, self._epochs_since_switch, self.n_nodes)
        self.evaluations.append(Evaluation(now, active, window, estimate, decision))

        if decision.active_score is not None:
            self._last_score[active] = decision.active_score
        self._last_active_epoch[active] = self._epoch_index

        if decision.switch:
            self.mrp_switch(standby, now, decision)
        self._warm_standby(now)

    def mrp_switch(self, to: ProtocolName, at: float, decision: SwitchDecision) -> SwitchEvent:
        """Hand all subsequently generated data to `to`; in-flight packets keep their protocol."""
        previous = self.selection.active
        self.selection.switch_to(to)
        self.tracer.record_switch(at, previous, to)
        self._epochs_since_switch = 0
        switch = SwitchEvent(at, previous, to, decision.trigger, decision.value)
        self.switches.append(switch)
        logger.info(f"MRP switch at t={at:.3f}: {previous.value} -> {to.value} ({decision.trigger}={decision.value:.4f})")
        return switch

    def _warm_standby(self, now: float) -> None:
        standby = self.selection.standby
        for flow in self.traffic.active_flows(now):
            self.nodes[flow.source].protocols[standby].refresh_route(flow.destination)
