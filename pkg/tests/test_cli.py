import json
import logging

import pandas as pd
import pytest

from cli import main, parse_param
from app.core.exceptions import ValidationError

SCENARIO = "nodes=4\nmobility=static\narea_width=150.0\narea_height=150.0\nduration=3.0\nflows=0-1\n"


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    yield
    logging.getLogger().handlers.clear()


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.txt"
    path.write_text(SCENARIO)
    return path


def test_parse_param():
    assert parse_param("nodes=20, 40,60") == ("nodes", ["20", "40", "60"])
    for bad in ("nodes", "=1,2", "nodes="):
        with pytest.raises(ValidationError):
            parse_param(bad)


def test_simulate_then_analyze(tmp_path, scenario_file, capsys):
    out = tmp_path / "one"
    assert main(["simulate", "--scenario", str(scenario_file), "--seed", "4", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert '"pkt_sent": 25' in printed
    trace = out / "trace.txt"
    assert trace.read_text().startswith("# manet-trace v1 duration=3.0 active=aodv")
    assert "seed=4" in (out / "scenario.txt").read_text().splitlines()

    assert main(["analyze", "--trace", str(trace)]) == 0
    report = json.loads(capsys.readouterr().out)
    simulated = pd.read_csv(out / "report.csv").iloc[0]
    assert report["pkt_sent"] == simulated["pkt_sent"] == 25
    assert report["pkt_received"] == simulated["pkt_received"]
    assert report["roh"] == simulated["roh"]


def test_simulate_with_protocol_override(tmp_path, capsys):
    out = tmp_path / "mrp"
    argv = ["simulate", "--protocol", "mrp:tora+dsr", "--out", str(out)]
    scenario = tmp_path / "short.txt"
    scenario.write_text("nodes=6\nmobility=static\nduration=6.0\nmrp_epoch=2.0\n")
    assert main(argv + ["--scenario", str(scenario)]) == 0
    assert (out / "switches.csv").is_file()
    assert "mrp(tora+dsr)" in capsys.readouterr().out


def test_sweep_plot_compare(tmp_path, scenario_file, capsys):
    out = tmp_path / "sweep"
    assert main([
        "sweep", "--scenario", str(scenario_file), "--param", "nodes=4,5",
        "--protocols", "aodv,dsr,mrp:aodv+dsr", "--out", str(out),
    ]) == 0
    aggregate = pd.read_csv(out / "aggregate.csv")
    assert len(aggregate) == 6

    svg = tmp_path / "pdr.svg"
    assert main(["plot", "--csv", str(out / "aggregate.csv"), "--metric", "roh", "--out", str(svg)]) == 0
    assert svg.is_file()

    verdicts = tmp_path / "verdicts.csv"
    code = main(["compare", "--csv", str(out / "aggregate.csv"), "--tolerance", "100", "--out", str(verdicts)])
    assert code == 0
    assert len(pd.read_csv(verdicts)) == 2 * 3


def test_compare_exit_code_when_outside(tmp_path):
    csv = tmp_path / "aggregate.csv"
    pd.DataFrame(
        [("aodv", 20, 0.8, 0.03, 400.0), ("dsr", 20, 0.9, 0.02, 300.0), ("mrp(aodv+dsr)", 20, 0.2, 0.025, 320.0)],
        columns=["protocol", "value", "pdr_mean", "delay_s_mean", "roh_mean"],
    ).to_csv(csv, index=False)
    assert main(["compare", "--csv", str(csv)]) == 1


def test_compare_can_accept_values_better_than_both(tmp_path):
    csv = tmp_path / "aggregate.csv"
    pd.DataFrame(
        [("aodv", 20, 0.8, 0.03, 400.0), ("dsr", 20, 0.9, 0.02, 300.0), ("mrp(aodv+dsr)", 20, 0.85, 0.010, 320.0)],
        columns=["protocol", "value", "pdr_mean", "delay_s_mean", "roh_mean"],
    ).to_csv(csv, index=False)
    assert main(["compare", "--csv", str(csv)]) == 1
    assert main(["compare", "--csv", str(csv), "--allow-favorable"]) == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "--trace", "missing.txt"],
        ["sweep", "--param", "nodes", "--out", "s"],
        ["plot", "--csv", "missing.csv", "--metric", "pdr", "--out", "p.svg"],
    ],
)
def test_errors_exit_with_code_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err.splitlines()[-1].startswith("error: ")


def test_bad_scenario_key(tmp_path, capsys):
    scenario = tmp_path / "bad.txt"
    scenario.write_text("nodes=4\nwarp=9\n")
    assert main(["simulate", "--scenario", str(scenario), "--out", str(tmp_path / "x")]) == 2
    assert "unknown key 'warp'" in capsys.readouterr().err
