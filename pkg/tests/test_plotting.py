import pandas as pd
import pytest

from app.core.exceptions import NotFoundError, PlotError
from app.harness.plotting import plot_aggregate


def write_aggregate(path, protocols=("aodv", "dsr"), values=(20, 40)):
    rows = []
    for i, protocol in enumerate(protocols):
        for j, value in enumerate(values):
            rows.append({
                "protocol": protocol,
                "param": "n_nodes",
                "value": value,
                "runs": 10,
                "pdr_mean": 0.9 - 0.1 * i - 0.05 * j,
                "delay_s_mean": 0.02 + 0.01 * j,
                "roh_mean": 300.0 * (j + 1) + 50 * i,
                "throughput_bps_mean": 30000.0 - 1000 * j,
            })
    pd.DataFrame(rows).to_csv(path, index=False)
    return path


def test_plot_writes_deterministic_svg(tmp_path):
    csv = write_aggregate(tmp_path / "aggregate.csv")
    first = plot_aggregate(csv, "pdr", tmp_path / "a.svg")
    second = plot_aggregate(csv, "pdr", tmp_path / "b.svg")
    assert first.points == {"aodv": 2, "dsr": 2}
    assert first.param == "n_nodes"
    content = first.path.read_bytes()
    assert content.lstrip().startswith(b"<?xml")
    assert content == second.path.read_bytes()


@pytest.mark.parametrize("metric", ["pdr", "delay", "roh", "throughput"])
def test_every_metric_plots(tmp_path, metric):
    csv = write_aggregate(tmp_path / "aggregate.csv")
    summary = plot_aggregate(csv, metric, tmp_path / "out" / f"{metric}.svg")
    assert summary.path.is_file()


def test_unknown_metric_lists_the_valid_ones(tmp_path):
    csv = write_aggregate(tmp_path / "aggregate.csv")
    with pytest.raises(PlotError) as exc:
        plot_aggregate(csv, "jitter", tmp_path / "x.svg")
    assert exc.value.error_code == "PLOT_UNKNOWN_METRIC"
    assert "pdr" in exc.value.message
    assert not (tmp_path / "x.svg").exists()


@pytest.mark.parametrize(
    "protocols,values",
    [(("aodv",), (20, 40)), (("aodv", "dsr"), (20,))],
)
def test_too_little_data(tmp_path, protocols, values):
    csv = write_aggregate(tmp_path / "aggregate.csv", protocols, values)
    with pytest.raises(PlotError) as exc:
        plot_aggregate(csv, "pdr", tmp_path / "x.svg")
    assert exc.value.error_code == "PLOT_INSUFFICIENT"


def test_empty_csv(tmp_path):
    blank = tmp_path / "blank.csv"
    blank.write_text("")
    with pytest.raises(PlotError) as exc:
        plot_aggregate(blank, "pdr", tmp_path / "x.svg")
    assert exc.value.error_code == "PLOT_EMPTY_CSV"

    header_only = tmp_path / "header.csv"
    header_only.write_text("protocol,param,value,pdr_mean\n")
    with pytest.raises(PlotError) as exc:
        plot_aggregate(header_only, "pdr", tmp_path / "x.svg")
    assert exc.value.error_code == "PLOT_EMPTY_CSV"


def test_csv_without_the_metric_column(tmp_path):
    csv = tmp_path / "aggregate.csv"
    pd.DataFrame({"protocol": ["aodv", "dsr"], "value": [1, 2]}).to_csv(csv, index=False)
    with pytest.raises(PlotError) as exc:
        plot_aggregate(csv, "roh", tmp_path / "x.svg")
    assert exc.value.error_code == "PLOT_BAD_CSV"


def test_missing_csv(tmp_path):
    with pytest.raises(NotFoundError):
        plot_aggregate(tmp_path / "absent.csv", "pdr", tmp_path / "x.svg")
