from app.models.scenario import ProtocolName
from app.models.trace import Action, Layer, PacketKind
from app.simulation.routing.tora import Height
from tests.helpers import chain_positions, static_simulation

# A and C sit on opposite sides of the diamond, B above and D below; B-D is out of range
DIAMOND = [(100.0, 300.0), (250.0, 130.0), (400.0, 300.0), (250.0, 470.0)]


def tora(sim, node):
    return sim.nodes[node].protocols[ProtocolName.TORA]


def route_to(sim, node, dest):
    return next((r for r in sim.routes_of(node)["tora"] if r.dest == dest), None)


def test_chain_heights_count_down_to_destination():
    sim = static_simulation(chain_positions(3), protocol="tora", flows="0-2", traffic_start=1.0, duration=4.0)
    sim.run()
    assert [tora(sim, n).height(2).delta for n in range(3)] == [2, 1, 0]
    assert tora(sim, 2).height(2) == Height(0, 0, 2)
    assert route_to(sim, 0, 2).next_hop == 1
    delivered = [r for r in sim.traffic.delivery_rows() if r.delivered]
    assert delivered and all(r.hops == 2 for r in delivered)


def test_diamond_reroutes_after_link_break():
    sim = static_simulation(DIAMOND, protocol="tora", flows="0-2", traffic_start=1.0, duration=10.0)
    assert sim.medium.neighbors(1) == {0, 2}
    assert sim.medium.neighbors(3) == {0, 2}

    sim.run(until=5.0)
    assert route_to(sim, 0, 2).next_hop == 1

    sim.medium.break_link(1, 2)
    sim.run()
    assert route_to(sim, 0, 2).next_hop == 3
    assert tora(sim, 2).height(2) == Height(0, 0, 2)
    # B reversed above A
    assert tora(sim, 1).height(2) > tora(sim, 0).height(2)

    late = [r for r in sim.traffic.delivery_rows() if r.sent_at > 6.0 and r.sent_at < 9.0]
    assert late and all(r.delivered for r in late)


def test_destination_ignores_reversal_requests():
    sim = static_simulation(chain_positions(3), protocol="tora", flows="0-2", duration=1.0)
    dest = tora(sim, 2)
    dest.tora_lite_reverse(2)
    assert dest.height(2) == Height(0, 0, 2)
    assert dest.tora_lite_route(2) is None


def test_isolated_node_clears_height_after_losing_all_neighbors():
    sim = static_simulation(chain_positions(3), protocol="tora", flows="0-2", traffic_start=1.0, duration=3.0)
    sim.run()
    relay = tora(sim, 1)
    relay.neighbors.clear()
    relay.tora_lite_reverse(2)
    assert relay.height(2) is None


def test_relay_that_later_originates_data_sends_its_own_query():
    # 0 and 1 are neighbors, 2 is out of everyone's range
    positions = [(50.0, 300.0), (200.0, 300.0), (550.0, 300.0)]
    sim = static_simulation(
        positions, protocol="tora", flows="1-2", traffic_start=2.0, traffic_stop=2.0, duration=10.0
    )
    sim.run(until=1.0)
    tora(sim, 0).refresh_route(2)
    sim.run(until=1.5)
    relay = tora(sim, 1)
    assert relay.states[2].route_required and not relay.states[2].querying

    sim.run()
    queries = [
        e.time for e in sim.tracer.events
        if e.node == 1 and e.layer is Layer.RTR and e.action is Action.SEND and e.kind is PacketKind.TORA_QUERY
    ]
    assert queries == [2.0, 3.0, 5.0, 9.0]
    assert not [e for e in sim.tracer.events if e.action is Action.DROP]
    assert len(relay.buffered_packets()) == 1
