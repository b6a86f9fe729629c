import itertools

import pytest

from app.core.exceptions import ValidationError
from app.models.scenario import ProtocolName
from app.models.trace import Action, DropReason, Layer
from app.simulation.engine import Engine
from app.simulation.rng import RngFactory
from app.simulation.tracer import Tracer
from app.simulation.traffic import Flow, TrafficManager, build_flows
from tests.helpers import make_scenario, static_simulation


def manager(flows):
    engine = Engine()
    tracer = Tracer(100.0, ProtocolName.AODV)
    submitted = []
    ids = itertools.count(1)
    traffic = TrafficManager(engine, tracer, flows, lambda: next(ids), lambda node, packet: submitted.append(packet))
    return engine, tracer, traffic, submitted


def test_send_count_includes_both_ends():
    assert Flow(0, 0, 1, rate=8.0, start=0.0, stop=100.0).send_count == 801
    assert Flow(0, 0, 1, rate=8.0, start=0.0, stop=10.0).send_count == 81
    assert Flow(0, 0, 1, rate=3.0, start=0.0, stop=1.0).send_count == 4
    assert Flow(0, 0, 1, start=5.0, stop=5.0).send_count == 1


def test_flow_validation():
    with pytest.raises(ValidationError) as exc:
        Flow(0, 3, 3)
    assert exc.value.error_code == "FLOW_LOOPBACK"
    with pytest.raises(ValidationError):
        Flow(0, 0, 1, rate=0.0)


def test_hundred_second_flow_sends_801_packets():
    engine, tracer, traffic, submitted = manager([Flow(0, 0, 1)])
    traffic.start()
    engine.run(100.0)
    assert len(submitted) == 801
    assert submitted[-1].sent_at == pytest.approx(100.0)
    sends = [e for e in tracer.events if e.action is Action.SEND and e.layer is Layer.AGT]
    assert len(sends) == 801


def test_no_sends_after_stop():
    engine, _, traffic, submitted = manager([Flow(0, 0, 1, stop=10.0)])
    traffic.start()
    engine.run(100.0)
    assert len(submitted) == 81
    assert max(p.sent_at for p in submitted) <= 10.0


def test_delivery_completes_record_once():
    engine, tracer, traffic, _ = manager([Flow(0, 0, 1)])
    packet = traffic.generate(traffic.flows[0], 1.0)
    packet.hop_count = 2

    assert traffic.deliver(packet, 1.35)
    record = traffic.records[packet.pkt_id]
    assert record.delay == pytest.approx(0.35)
    assert record.hops == 2

    assert not traffic.deliver(packet, 1.5)
    assert record.received_at == 1.35
    assert traffic.duplicates == 1
    assert tracer.events[-1].reason is DropReason.DUPLICATE


def test_explicit_flows_and_derived_flows():
    scenario = make_scenario(nodes=6, flows="0-5;2-3")
    flows = build_flows(scenario, RngFactory(1))
    assert [(f.source, f.destination) for f in flows] == [(0, 5), (2, 3)]

    derived = build_flows(make_scenario(nodes=20), RngFactory(1))
    assert len(derived) == 5
    endpoints = [n for f in derived for n in (f.source, f.destination)]
    assert len(set(endpoints)) == 10
    assert derived == build_flows(make_scenario(nodes=20), RngFactory(1))


def test_traffic_jitter_shifts_start_within_bound():
    flows = build_flows(make_scenario(nodes=8, traffic_start=2.0, traffic_jitter=0.5), RngFactory(3))
    assert all(2.0 <= f.start < 2.5 for f in flows)


def test_full_run_sends_801_packets():
    sim = static_simulation([(100.0, 100.0), (200.0, 100.0)], flows="0-1", duration=100.0)
    sim.run()
    assert len(sim.traffic.records) == 801
    assert all(r.delivered for r in sim.traffic.delivery_rows()[:-1])
