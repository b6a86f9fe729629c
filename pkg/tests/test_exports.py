import pandas as pd

from app.harness.exports import REPORT_COLUMNS, SWITCH_COLUMNS, write_run_artifacts
from app.harness.scenario_io import load_scenario
from app.simulation.simulator import run_scenario
from tests.helpers import chain_positions, make_scenario


def _chain_run(**overrides):
    scenario = make_scenario(nodes=5, flows="0-4", duration=4.0, **overrides)
    return run_scenario(scenario, positions=chain_positions(5))


def test_run_artifacts(tmp_path):
    result = _chain_run()
    paths = write_run_artifacts(result, tmp_path / "run")
    assert set(paths) == {"scenario", "trace", "report", "deliveries", "routes", "edges"}
    assert all(p.is_file() for p in paths.values())

    assert load_scenario(paths["scenario"]) == result.scenario
    assert paths["report"].read_text().splitlines()[0] == ",".join(REPORT_COLUMNS)

    report = pd.read_csv(paths["report"])
    assert report.loc[0, "pkt_sent"] == result.report.pkt_sent == 33
    assert report.loc[0, "protocol"] == "aodv"

    deliveries = pd.read_csv(paths["deliveries"])
    assert len(deliveries) == result.report.pkt_sent
    assert deliveries["received_at"].notna().sum() == result.report.pkt_received

    edges = pd.read_csv(paths["edges"])
    assert list(zip(edges["source"], edges["target"])) == [(0, 1), (1, 2), (2, 3), (3, 4)]


def test_artifacts_are_byte_identical_across_reruns(tmp_path):
    first = write_run_artifacts(_chain_run(), tmp_path / "a")
    second = write_run_artifacts(_chain_run(), tmp_path / "b")
    for name, path in first.items():
        assert path.read_bytes() == second[name].read_bytes(), name


def test_mrp_runs_write_switches(tmp_path):
    result = _chain_run(protocol="mrp:aodv+dsr", mrp_policy="forced", mrp_epoch=1.0)
    paths = write_run_artifacts(result, tmp_path / "mrp")
    switches = pd.read_csv(paths["switches"])
    assert list(switches.columns) == SWITCH_COLUMNS
    assert len(switches) == len(result.switches) > 0
    assert switches.loc[0, "from"] == "aodv"
    assert switches.loc[0, "to"] == "dsr"


def test_mobility_csv_on_request(tmp_path):
    result = run_scenario(make_scenario(nodes=4, mobility="random_direction", duration=1.0), record_mobility=True)
    paths = write_run_artifacts(result, tmp_path / "mob")
    mobility = pd.read_csv(paths["mobility"])
    assert list(mobility.columns) == ["time", "node", "x", "y"]
    assert len(mobility) == 44
