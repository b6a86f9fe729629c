import math

import pandas as pd
import pytest

from app.core.exceptions import NotFoundError, ValidationError
from app.harness.comparison import check_envelope, compare_csv, envelope_bounds, within_envelope


def test_bounds_widen_both_sides():
    low, high = envelope_bounds(0.8, 0.9, 0.10)
    assert low == pytest.approx(0.72)
    assert high == pytest.approx(0.99)
    assert envelope_bounds(0.9, 0.8) == envelope_bounds(0.8, 0.9)


def test_membership():
    assert within_envelope(0.85, 0.8, 0.9)
    assert within_envelope(0.73, 0.8, 0.9)
    assert within_envelope(0.985, 0.8, 0.9)
    assert within_envelope(0.70, 0.8, 0.9) is False
    assert within_envelope(0.70, 0.8, 0.9, tolerance=0.2) is True
    assert within_envelope(math.nan, 0.8, 0.9) is None
    assert within_envelope(0.85, math.nan, 0.9) is None


def aggregate_frame(mrp_pdr: float = 0.85) -> pd.DataFrame:
    rows = [
        ("aodv", 20, 0.80, 0.030, 400.0),
        ("dsr", 20, 0.90, 0.020, 300.0),
        ("mrp(aodv+dsr)", 20, mrp_pdr, 0.025, 320.0),
        ("mrp(tora+dsr)", 20, 0.88, 0.021, 310.0),
    ]
    return pd.DataFrame(rows, columns=["protocol", "value", "pdr_mean", "delay_s_mean", "roh_mean"])


def test_check_envelope_per_metric():
    verdicts = check_envelope(aggregate_frame())
    assert [(v.mrp, v.metric) for v in verdicts] == [
        ("mrp(aodv+dsr)", "pdr"), ("mrp(aodv+dsr)", "delay_s"), ("mrp(aodv+dsr)", "roh"),
    ]
    assert all(v.inside for v in verdicts)


def test_outside_value_is_flagged():
    verdicts = check_envelope(aggregate_frame(mrp_pdr=0.5))
    pdr = next(v for v in verdicts if v.metric == "pdr")
    assert pdr.inside is False
    assert pdr.low == pytest.approx(0.72)


def test_negative_tolerance():
    with pytest.raises(ValidationError):
        check_envelope(aggregate_frame(), tolerance=-0.1)


def test_compare_csv(tmp_path):
    path = tmp_path / "aggregate.csv"
    aggregate_frame(mrp_pdr=0.5).to_csv(path, index=False)
    frame = compare_csv(path)
    assert list(frame["metric"]) == ["pdr", "delay_s", "roh"]
    assert list(frame["inside"]) == [False, True, True]


def test_compare_without_mrp_rows(tmp_path):
    path = tmp_path / "aggregate.csv"
    aggregate_frame().iloc[:2].to_csv(path, index=False)
    assert compare_csv(path).empty


def test_compare_missing_csv(tmp_path):
    with pytest.raises(NotFoundError):
        compare_csv(tmp_path / "absent.csv")


@pytest.mark.parametrize(
    "metric, value, favorable",
    [("delay_s", 0.010, True), ("delay_s", 0.050, False), ("roh", 100.0, True), ("pdr", 0.999, True), ("pdr", 0.5, False)],
)
def test_outside_verdicts_know_which_side_they_fall_on(metric, value, favorable):
    frame = aggregate_frame()
    frame.loc[frame["protocol"] == "mrp(aodv+dsr)", f"{metric}_mean"] = value
    verdict = next(v for v in check_envelope(frame) if v.metric == metric)
    assert verdict.inside is False
    assert verdict.favorable is favorable


def test_inside_verdicts_are_never_favorable():
    assert not any(v.favorable for v in check_envelope(aggregate_frame()))
