import math

import pandas as pd
import pytest

from app.core.exceptions import SweepError
from app.harness.sweep import aggregate_reports, run_cell, run_sweep, sweep_cells
from app.models.scenario import SweepSpec
from tests.helpers import make_scenario


def small_spec(**overrides) -> SweepSpec:
    values = {
        "base": make_scenario(nodes=4, duration=3.0, flows="0-1"),
        "param": "nodes",
        "values": [4, 6],
        "seeds": 2,
        "protocols": ["aodv", "dsdv"],
    }
    values.update(overrides)
    return SweepSpec(**values)


def test_cells_cover_protocols_values_and_seeds_in_order():
    cells = sweep_cells(small_spec())
    assert len(cells) == 2 * 2 * 2
    assert [(c.token, c.value, c.scenario.seed) for c in cells] == [
        ("aodv", 4, 1), ("aodv", 4, 2), ("aodv", 6, 1), ("aodv", 6, 2),
        ("dsdv", 4, 1), ("dsdv", 4, 2), ("dsdv", 6, 1), ("dsdv", 6, 2),
    ]
    assert cells[0].scenario.scenario_id == "default-aodv-n_nodes4-s1"
    assert [c.index for c in cells] == list(range(8))


def test_mrp_tokens_get_filesystem_safe_ids():
    cells = sweep_cells(small_spec(protocols=["mrp:aodv+dsr"], values=[4], seeds=1))
    assert cells[0].scenario.is_mrp
    assert cells[0].scenario.scenario_id == "default-mrp_aodv-dsr-n_nodes4-s1"


def test_values_are_coerced_to_the_field_type():
    cells = sweep_cells(small_spec(param="speed_max", values=["2.5", "10"], protocols=None))
    assert [c.value for c in cells] == [2.5, 2.5, 10.0, 10.0]
    assert all(c.token == "aodv" for c in cells)


def test_invalid_cell_is_rejected_before_running():
    with pytest.raises(SweepError) as exc:
        sweep_cells(small_spec(values=[4, 1]))
    assert exc.value.error_code == "SWEEP_CELL_INVALID"
    assert exc.value.details["value"] == 1


@pytest.mark.parametrize("param", ["seed", "protocol", "warp"])
def test_unsweepable_params(param):
    with pytest.raises(ValueError):
        small_spec(param=param)


def test_run_sweep_writes_reports_aggregate_and_traces(tmp_path):
    result = run_sweep(small_spec(), tmp_path / "sweep")
    assert len(result.reports) == 8
    assert len(result.aggregate) == 4
    assert list(result.aggregate["runs"]) == [2, 2, 2, 2]
    assert list(zip(result.aggregate["protocol"], result.aggregate["value"])) == [
        ("aodv", 4), ("aodv", 6), ("dsdv", 4), ("dsdv", 6),
    ]
    assert {"pdr_mean", "pdr_std", "delay_s_mean", "roh_mean", "throughput_bps_std"} <= set(result.aggregate.columns)
    assert (result.aggregate["pkt_sent_mean"] == 25).all()

    reread = pd.read_csv(result.aggregate_path)
    assert len(reread) == 4
    for scenario_id in result.reports["scenario_id"]:
        trace = tmp_path / "sweep" / "runs" / scenario_id / "trace.txt"
        assert trace.read_text().startswith("# manet-trace v1")


def test_single_seed_has_undefined_spread(tmp_path):
    result = run_sweep(small_spec(seeds=1, values=[4], protocols=["aodv"]), tmp_path / "one")
    row = result.aggregate.iloc[0]
    assert row["runs"] == 1
    assert row["pkt_sent_mean"] == result.reports.iloc[0]["pkt_sent"]
    assert math.isnan(row["pkt_sent_std"])


def test_reruns_are_byte_identical(tmp_path):
    first = run_sweep(small_spec(), tmp_path / "a")
    second = run_sweep(small_spec(), tmp_path / "b")
    assert first.reports_path.read_bytes() == second.reports_path.read_bytes()
    assert first.aggregate_path.read_bytes() == second.aggregate_path.read_bytes()


def test_worker_count_does_not_change_results(tmp_path):
    serial = run_sweep(small_spec(), tmp_path / "serial", workers=1)
    parallel = run_sweep(small_spec(), tmp_path / "parallel", workers=2)
    assert serial.aggregate_path.read_bytes() == parallel.aggregate_path.read_bytes()


def test_cells_do_not_depend_on_their_neighbours(tmp_path):
    spec = small_spec()
    sweep = run_sweep(spec, tmp_path / "all")
    alone = run_cell(sweep_cells(spec)[5], spec.param)
    assert alone.error is None
    expected = sweep.reports.iloc[5]
    for column in ("scenario_id", "pkt_sent", "pkt_received", "roh"):
        assert alone.row[column] == expected[column]


def test_aggregating_nothing_fails():
    with pytest.raises(SweepError):
        aggregate_reports(pd.DataFrame(columns=["protocol", "param", "value", "pdr"]))
