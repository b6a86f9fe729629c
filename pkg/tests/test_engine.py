import pytest

from app.core.exceptions import SchedulingError
from app.simulation.engine import Engine, EventKind


def collect(engine, kind=EventKind.ROUTING_TIMER):
    seen = []
    engine.register(kind, lambda event: seen.append((event.fire_at, event.payload)))
    return seen


def test_events_fire_in_time_order():
    engine = Engine()
    seen = collect(engine)
    for t in (3.0, 1.0, 2.0):
        engine.schedule(t, EventKind.ROUTING_TIMER, payload=t)
    engine.run(10.0)
    assert [t for t, _ in seen] == [1.0, 2.0, 3.0]


def test_simultaneous_events_keep_insertion_order():
    engine = Engine()
    seen = collect(engine)
    for name in ("a", "b", "c"):
        engine.schedule(1.0, EventKind.ROUTING_TIMER, payload=name)
    engine.run(1.0)
    assert [p for _, p in seen] == ["a", "b", "c"]


def test_run_stops_at_horizon_inclusive():
    engine = Engine()
    seen = collect(engine)
    engine.schedule(1.0, EventKind.ROUTING_TIMER, payload=1)
    engine.schedule(2.0, EventKind.ROUTING_TIMER, payload=2)
    engine.schedule(2.5, EventKind.ROUTING_TIMER, payload=3)

    assert engine.run(2.0) == 2
    assert engine.clock == 2.0
    assert len(engine) == 1

    engine.run(5.0)
    assert [p for _, p in seen] == [1, 2, 3]
    assert engine.processed == 3


def test_handlers_can_schedule_follow_ups():
    engine = Engine()
    fired = []

    def handler(event):
        fired.append(event.fire_at)
        if event.fire_at < 3.0:
            engine.schedule_in(1.0, EventKind.ROUTING_TIMER)

    engine.register(EventKind.ROUTING_TIMER, handler)
    engine.schedule(1.0, EventKind.ROUTING_TIMER)
    engine.run(10.0)
    assert fired == [1.0, 2.0, 3.0]


def test_scheduling_in_the_past_is_rejected():
    engine = Engine()
    engine.schedule(5.0, EventKind.ROUTING_TIMER)
    engine.run(5.0)
    with pytest.raises(SchedulingError) as exc:
        engine.schedule(4.0, EventKind.ROUTING_TIMER)
    assert exc.value.error_code == "SCHEDULE_IN_PAST"
    # the current instant is still allowed
    engine.schedule(5.0, EventKind.ROUTING_TIMER)
