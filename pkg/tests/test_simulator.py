import pytest

from app.models.trace import Action, DropReason, PacketKind
from app.simulation.simulator import Simulation, run_scenario
from tests.helpers import make_scenario


@pytest.mark.parametrize("protocol", ["aodv", "dsr", "dsdv", "tora", "mrp:aodv+tora"])
def test_same_seed_same_trace(protocol):
    scenario = make_scenario(nodes=15, mobility="rpgm", duration=20.0, seed=21, protocol=protocol)
    first = run_scenario(scenario)
    second = run_scenario(scenario)
    assert first.trace_lines() == second.trace_lines()
    assert first.report == second.report


def test_different_seeds_differ():
    a = run_scenario(make_scenario(nodes=15, mobility="rpgm", duration=10.0, seed=1))
    b = run_scenario(make_scenario(nodes=15, mobility="rpgm", duration=10.0, seed=2))
    assert a.trace_lines() != b.trace_lines()


@pytest.mark.parametrize("protocol", ["aodv", "dsr", "dsdv", "tora", "mrp:aodv+dsr"])
def test_every_data_packet_is_accounted_for(protocol):
    scenario = make_scenario(
        nodes=20, mobility="random_waypoint", speed_max=20.0, duration=30.0, seed=8, protocol=protocol
    )
    result = run_scenario(scenario)
    sent = {r.pkt_id for r in result.deliveries}
    delivered = {r.pkt_id for r in result.deliveries if r.delivered}
    dropped = {
        e.pkt_id for e in result.events
        if e.action is Action.DROP and e.kind is PacketKind.CBR and e.reason is not DropReason.DUPLICATE
    }
    assert not delivered & dropped
    assert not delivered & result.in_flight
    assert delivered | dropped | result.in_flight == sent
    assert result.max_queue_length <= scenario.queue_capacity


def test_trace_header_and_ordering():
    result = run_scenario(make_scenario(nodes=10, mobility="rpgm", duration=10.0, seed=5))
    lines = result.trace_lines()
    assert lines[0] == "# manet-trace v1 duration=10.0 active=aodv"
    times = [e.time for e in result.events]
    assert times == sorted(times)
    assert times[-1] <= 10.0


def test_delays_are_positive_and_receptions_in_horizon():
    result = run_scenario(make_scenario(nodes=12, mobility="rpgm", duration=15.0, seed=6))
    for record in result.deliveries:
        if record.delivered:
            assert record.delay > 0
            assert record.received_at <= 15.0


def test_run_can_resume_after_pause():
    scenario = make_scenario(nodes=10, mobility="rpgm", duration=10.0, seed=9)
    whole = run_scenario(scenario)
    stepped = Simulation(scenario)
    stepped.run(until=4.0)
    stepped.run()
    assert stepped.tracer.lines() == whole.trace_lines()


def test_mobility_rows_are_recorded_on_request():
    result = run_scenario(make_scenario(nodes=4, mobility="random_direction", duration=1.0), record_mobility=True)
    assert len(result.mobility_rows) == 4 * 11
    assert result.mobility_rows[0][:2] == (0.0, 0)
