import pytest

from app.core.exceptions import RandomStreamError
from app.simulation.rng import RngFactory, RngStream


def draws(stream, n=5):
    return [stream.uniform(0.0, 1.0) for _ in range(n)]


def test_same_seed_and_stream_repeat():
    assert draws(RngStream(7, "mobility:3")) == draws(RngStream(7, "mobility:3"))


def test_streams_are_independent():
    assert draws(RngStream(7, "mobility:3")) != draws(RngStream(7, "mobility:4"))
    assert draws(RngStream(7, "traffic")) != draws(RngStream(8, "traffic"))


def test_factory_reuses_streams():
    factory = RngFactory(3)
    first = factory.stream("traffic")
    first.uniform(0.0, 1.0)
    assert factory.stream("traffic") is first


def test_uniform_bounds():
    stream = RngStream(1, "bounds")
    for _ in range(1000):
        value = stream.uniform(2.0, 3.0)
        assert 2.0 <= value < 3.0


def test_zero_width_interval_returns_lower_bound():
    assert RngStream(1, "x").uniform(4.0, 4.0) == 4.0


def test_inverted_interval_raises():
    with pytest.raises(RandomStreamError) as exc:
        RngStream(1, "x").uniform(5.0, 1.0)
    assert exc.value.error_code == "INVERTED_INTERVAL"


def test_point_in_disk_stays_inside():
    stream = RngStream(2, "disk")
    for _ in range(1000):
        x, y = stream.point_in_disk(50.0)
        assert x * x + y * y <= 50.0 * 50.0 + 1e-9


def test_sample_without_replacement():
    picks = RngStream(4, "traffic").sample_without_replacement(10, 6)
    assert len(set(picks)) == 6
    assert all(0 <= p < 10 for p in picks)
    with pytest.raises(RandomStreamError):
        RngStream(4, "traffic").sample_without_replacement(3, 4)
