import pytest

from app.core.exceptions import NotFoundError, TraceParseError
from app.harness.trace_io import analyze_trace, analyze_trace_lines, parse_header, write_trace
from app.simulation.simulator import run_scenario
from tests.helpers import make_scenario

HAND_TRACE = [
    "# manet-trace v1 duration=10.0 active=aodv",
    "0.0 SEND AGT 0 1 cbr 512 0 2",
    "0.5 SEND RTR 0 2 aodv-rreq 24 0 2",
    "0.6 FWD RTR 1 2 aodv-rreq 24 0 2",
    "0.7 SEND RTR 2 3 aodv-rrep 20 2 0",
    "1.0 SEND AGT 0 4 cbr 512 0 2",
    "1.2 RECV AGT 2 1 cbr 512 0 2",
]

PROTOCOLS = ["aodv", "dsr", "dsdv", "tora", "mrp:aodv+dsr", "mrp:tora+dsr"]


def test_hand_trace():
    report = analyze_trace_lines(HAND_TRACE)
    assert report.roh == 3
    assert (report.pkt_sent, report.pkt_received) == (2, 1)
    assert report.pdr == 0.5
    assert report.avg_delay == pytest.approx(1.2)
    assert report.throughput_bps == pytest.approx(512 * 8 / 10.0)


def test_duration_argument_overrides_header():
    report = analyze_trace_lines(HAND_TRACE, duration=4.096)
    assert report.throughput_bps == pytest.approx(1000.0)


def test_truncated_line_names_its_line_number():
    lines = HAND_TRACE[:3] + ["1.0 SEND AGT 0"] + HAND_TRACE[3:]
    with pytest.raises(TraceParseError) as exc:
        analyze_trace_lines(lines)
    assert exc.value.details["line"] == 4
    assert "line 4" in exc.value.message


def test_unknown_action_is_rejected():
    with pytest.raises(TraceParseError):
        analyze_trace_lines(HAND_TRACE[:1] + ["0.0 JUMP AGT 0 1 cbr 512 0 2"])


def test_headerless_trace_needs_duration():
    with pytest.raises(TraceParseError):
        analyze_trace_lines(HAND_TRACE[1:])
    assert analyze_trace_lines(HAND_TRACE[1:], duration=10.0).pdr == 0.5


def test_header_parsing():
    header = parse_header("# manet-trace v1 duration=30.0 active=dsr standby_overhead=excluded")
    assert (header.duration, header.active, header.count_standby) == (30.0, "dsr", False)
    with pytest.raises(TraceParseError):
        parse_header("not a header")


def test_missing_trace_file(tmp_path):
    with pytest.raises(NotFoundError):
        analyze_trace(tmp_path / "nope.txt")


def test_switch_lines_move_standby_attribution():
    lines = [
        "# manet-trace v1 duration=10.0 active=aodv",
        "1.0 SEND RTR 0 1 aodv-rreq 24 0 2",
        "1.0 SEND RTR 0 2 dsr-rreq 20 0 2",
        "5.0 SEND AGT -1 1 mrp 0 0 1",
        "6.0 SEND RTR 0 3 aodv-rreq 24 0 2",
        "6.5 FWD RTR 1 3 aodv-rreq 24 0 2",
    ]
    report = analyze_trace_lines(lines)
    assert report.roh == 4
    assert report.roh_standby == 3
    assert report.pkt_sent == 0


@pytest.mark.parametrize("run", range(20))
def test_analyzer_matches_engine_report(run, tmp_path):
    scenario = make_scenario(
        nodes=20, mobility="rpgm", duration=30.0, seed=100 + run, protocol=PROTOCOLS[run % len(PROTOCOLS)]
    )
    result = run_scenario(scenario)
    path = write_trace(result.trace_lines(), tmp_path / "trace.txt")
    analyzed = analyze_trace(path)
    engine = result.report

    assert analyzed.pkt_sent == engine.pkt_sent
    assert analyzed.pkt_received == engine.pkt_received
    assert analyzed.roh == engine.roh
    assert analyzed.roh_standby == engine.roh_standby
    assert analyzed.drops == engine.drops
    assert analyzed.pdr == engine.pdr
    assert analyzed.throughput_bps == engine.throughput_bps
    if engine.avg_delay is None:
        assert analyzed.avg_delay is None
    else:
        assert analyzed.avg_delay == pytest.approx(engine.avg_delay, rel=1e-9)
