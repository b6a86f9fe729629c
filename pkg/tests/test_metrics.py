import pytest

from app.core.exceptions import MetricsError
from app.models.trace import Action, Layer, PacketKind, TraceEvent
from app.simulation.metrics import (
    compute_avg_e2e_delay,
    compute_pdr,
    compute_roh,
    compute_throughput,
    summarize_window,
    window_count,
    windowed_metrics,
)
from app.simulation.simulator import run_scenario
from tests.helpers import make_scenario


def ev(time, action, layer, node, pkt_id, kind=PacketKind.CBR, size=512, src=0, dst=2):
    return TraceEvent(time, Action(action), Layer(layer), node, pkt_id, kind, size, src, dst)


def test_pdr():
    assert compute_pdr(800, 800) == 1.0
    assert compute_pdr(800, 0) == 0.0
    assert compute_pdr(1000, 950) == 0.95
    assert compute_pdr(0, 0) is None
    with pytest.raises(MetricsError):
        compute_pdr(1, 2)


def test_average_delay():
    assert compute_avg_e2e_delay([(1.0, 1.2), (2.0, 2.5)]) == pytest.approx(0.35, abs=1e-12)
    assert compute_avg_e2e_delay([(3.0, 3.0)]) == 0.0
    assert compute_avg_e2e_delay([(1.0, None), (2.0, None)]) is None
    assert compute_avg_e2e_delay([(1.0, None), (2.0, 2.25)]) == 0.25


def test_throughput():
    records = [(512, float(i)) for i in range(800)]
    assert compute_throughput(records, 100.0) == 32768.0
    assert compute_throughput([(512, None)], 100.0) == 0.0
    with pytest.raises(MetricsError):
        compute_throughput(records, 0.0)


def test_roh_counts_routing_sends_and_forwards():
    assert compute_roh([]) == 0
    flood = [ev(0.0, "SEND", "RTR", 0, 1, PacketKind.AODV_RREQ, 24)]
    flood += [ev(0.001 * i, "FWD", "RTR", i, 1, PacketKind.AODV_RREQ, 24) for i in range(1, 5)]
    flood += [ev(0.0, "SEND", "MAC", 0, 1, PacketKind.AODV_RREQ, 24), ev(0.1, "FWD", "RTR", 1, 9)]
    assert compute_roh(flood) == 5


def test_window_count():
    assert window_count(100.0, 5.0) == 20
    assert window_count(102.0, 5.0) == 21
    assert window_count(3.0, 5.0) == 1
    with pytest.raises(MetricsError):
        window_count(100.0, 0.0)


def test_windows_attribute_receptions_to_send_window():
    trace = [
        ev(1.0, "SEND", "AGT", 0, 1),
        ev(4.9, "SEND", "AGT", 0, 2),
        ev(5.2, "RECV", "AGT", 2, 2),
        ev(6.0, "SEND", "RTR", 0, 3, PacketKind.DSR_RREQ, 20),
        ev(7.0, "SEND", "AGT", 0, 4),
        ev(7.1, "RECV", "AGT", 2, 4),
        ev(10.0, "SEND", "AGT", 0, 5),
    ]
    windows = windowed_metrics(trace, 5.0, 10.0)
    assert len(windows) == 2
    first, second = windows
    assert (first.pkt_sent, first.pkt_received, first.pdr) == (2, 1, 0.5)
    assert first.avg_delay == pytest.approx(0.3)
    assert (second.pkt_sent, second.pkt_received) == (2, 1)
    assert second.end == 10.0
    assert second.roh_by_protocol == {"dsr": 1}


def test_empty_window_has_no_pdr():
    windows = windowed_metrics([ev(1.0, "SEND", "AGT", 0, 1)], 5.0, 10.0)
    assert windows[1].pkt_sent == 0
    assert windows[1].pdr is None
    assert windows[1].avg_delay is None


def test_summarize_window_only_sees_packets_sent_inside_it():
    trace = [
        ev(4.0, "SEND", "AGT", 0, 1),
        ev(5.5, "RECV", "AGT", 2, 1),
        ev(6.0, "SEND", "AGT", 0, 2),
        ev(6.2, "RECV", "AGT", 2, 2),
    ]
    window = summarize_window(trace, 5.0, 10.0)
    assert (window.pkt_sent, window.pkt_received) == (1, 1)
    assert window.avg_delay == pytest.approx(0.2)


def test_windows_add_up_to_run_totals():
    result = run_scenario(make_scenario(nodes=12, mobility="rpgm", duration=20.0, seed=4, protocol="aodv"))
    windows = windowed_metrics(result.events, 5.0, 20.0)
    assert len(windows) == 4
    report = result.report
    assert sum(w.pkt_sent for w in windows) == report.pkt_sent
    assert sum(w.pkt_received for w in windows) == report.pkt_received
    assert sum(w.roh for w in windows) == report.roh
    for w in windows:
        if w.pdr is not None:
            assert 0.0 <= w.pdr <= 1.0
