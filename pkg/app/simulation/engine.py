"""Discrete-event engine: one clock, one priority queue, (time, sequence) total order."""
import heapq
from enum import Enum
from typing import Any, Callable, Dict, Iterator, List, NamedTuple, Tuple

from app.core.exceptions import SchedulingError
from app.core.logging_config import get_logger

logger = get_logger(__name__)

SYSTEM = -1


class EventKind(str, Enum):
    PACKET_ARRIVAL = "packet_arrival"
    TRANSMIT_COMPLETE = "transmit_complete"
    MOBILITY_UPDATE = "mobility_update"
    TRAFFIC_TICK = "traffic_tick"
    ROUTING_TIMER = "routing_timer"
    METRIC_EPOCH = "metric_epoch"
    MRP_EVALUATION = "mrp_evaluation"
    SIMULATION_END = "simulation_end"


class Event(NamedTuple):
    fire_at: float
    sequence: int
    target: int
    kind: EventKind
    payload: Any = None


Handler = Callable[[Event], None]


class Engine:
    """
    Single-threaded event loop.

    Events are dequeued by (fire_at, sequence); sequence grows with every
    insertion so simultaneous events keep insertion order.
    """

    def __init__(self) -> None:
        self.clock: float = 0.0
        self._queue: List[Tuple[float, int, Event]] = []
        self._sequence = 0
        self._handlers: Dict[EventKind, Handler] = {}
        self.processed = 0

    def register(self, kind: EventKind, handler: Handler) -> None:
        self._handlers[kind] = handler

    def schedule(self, fire_at: float, kind: EventKind, target: int = SYSTEM, payload: Any = None) -> Event:
        if fire_at < self.clock:
            raise SchedulingError(
                f"Cannot schedule {kind.value} at t={fire_at!r}: clock is already t={self.clock!r}",
                error_code="SCHEDULE_IN_PAST",
                details={"fire_at": fire_at, "clock": self.clock},
            )
        event = Event(fire_at, self._sequence, target, kind, payload)
        self._sequence += 1
        heapq.heappush(self._queue, (fire_at, event.sequence, event))
        return event

    def schedule_in(self, delay: float, kind: EventKind, target: int = SYSTEM, payload: Any = None) -> Event:
        return self.schedule(self.clock + delay, kind, target, payload)

    def run(self, until: float) -> int:
        """Process every event with fire_at <= until; return how many were processed."""
        count = 0
        queue = self._queue
        while queue and queue[0][0] <= until:
            fire_at, _, event = heapq.heappop(queue)
            self.clock = fire_at
            handler = self._handlers.get(event.kind)
            if handler is not None:
                handler(event)
            count += 1
        self.processed += count
        return count

    def pending(self) -> Iterator[Event]:
        """Events still queued, in no particular order."""
        return (entry[2] for entry in self._queue)

    def __len__(self) -> int:
        return len(self._queue)
