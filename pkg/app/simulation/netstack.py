"""
Abstracted PHY/MAC: unit-disk connectivity, per-node serialized transmission
with a closed-form hop delay, and the drop-tail interface queue with routing
priority.
"""
from collections import deque
from typing import Callable, Deque, Dict, FrozenSet, List, Optional, Set, Tuple

import networkx as nx
import numpy as np

from app.core.exceptions import NotFoundError
from app.core.logging_config import get_logger
from app.models.scenario import RadioConfig
from app.models.trace import Action, DropReason, Layer
from app.simulation.engine import Engine, Event, EventKind
from app.simulation.mobility import MobilityManager
from app.simulation.packet import BROADCAST, Packet
from app.simulation.tracer import Tracer

logger = get_logger(__name__)


class InterfaceQueue:
    """
    Bounded queue between routing and MAC.

    Routing packets go after the last queued routing packet and ahead of all
    data; data packets are appended. A full queue rejects data; a routing
    packet arriving at a full queue evicts the last data packet, or is
    rejected when the queue holds only routing packets.
    """

    def __init__(self, capacity: int = 50, on_drop: Optional[Callable[[Packet], None]] = None):
        self.capacity = capacity
        self._control: Deque[Packet] = deque()
        self._data: Deque[Packet] = deque()
        self._on_drop = on_drop

    def __len__(self) -> int:
        return len(self._control) + len(self._data)

    def __iter__(self):
        yield from self._control
        yield from self._data

    @property
    def is_full(self) -> bool:
        return len(self) >= self.capacity

    def enqueue(self, packet: Packet) -> bool:
        if packet.is_data:
            if self.is_full:
                self._drop(packet)
                return False
            self._data.append(packet)
            return True

        if self.is_full:
            if not self._data:
                self._drop(packet)
                return False
            self._drop(self._data.pop())
        self._control.append(packet)
        return True

    def dequeue(self) -> Optional[Packet]:
        if self._control:
            return self._control.popleft()
        if self._data:
            return self._data.popleft()
        return None

    def _drop(self, packet: Packet) -> None:
        if self._on_drop is not None:
            self._on_drop(packet)


def enqueue(queue: InterfaceQueue, packet: Packet) -> bool:
    return queue.enqueue(packet)


ReceiveCallback = Callable[[int, Packet, int], None]
LinkFailureCallback = Callable[[int, int, Packet], None]


class Medium:
    """
    Shared channel of one run.

    Each node transmits one frame at a time. A frame that starts at `t`
    reaches every in-range receiver at `t + size*8/bit_rate + processing`;
    the sender is free again after the serialization time. Unicast to a node
    that is out of range at start time produces a link-failure callback and
    no reception.
    """

    def __init__(
        self,
        engine: Engine,
        tracer: Tracer,
        radio: RadioConfig,
        mobility: MobilityManager,
        queue_capacity: int,
        on_receive: ReceiveCallback,
        on_link_failure: LinkFailureCallback,
    ):
        self.engine = engine
        self.tracer = tracer
        self.radio = radio
        self.mobility = mobility
        self.n_nodes = mobility.n_nodes
        self._on_receive = on_receive
        self._on_link_failure = on_link_failure
        self.queues: List[InterfaceQueue] = [
            InterfaceQueue(queue_capacity, on_drop=self._queue_drop_handler(node)) for node in range(self.n_nodes)
        ]
        self._busy = [False] * self.n_nodes
        self._servicing: Set[int] = set()
        self._blocked: Set[FrozenSet[int]] = set()
        self._adjacency: Optional[np.ndarray] = None
        self._adjacency_version = -1
        self._neighbor_cache: Dict[int, FrozenSet[int]] = {}
        self._receiver_cache: Dict[int, Tuple[int, ...]] = {}
        self.max_queue_length = 0

        engine.register(EventKind.PACKET_ARRIVAL, self._handle_arrival)
        engine.register(EventKind.TRANSMIT_COMPLETE, self._handle_transmit_complete)

    def _queue_drop_handler(self, node: int) -> Callable[[Packet], None]:
        def drop(packet: Packet) -> None:
            self.tracer.record(self.engine.clock, Action.DROP, Layer.MAC, node, packet, DropReason.IFQ)
        return drop

    # -- connectivity -----------------------------------------------------

    def _check_node(self, node: int) -> None:
        if not 0 <= node < self.n_nodes:
            raise NotFoundError(f"Unknown node id {node}", error_code="UNKNOWN_NODE", details={"node": node})

    def _current_adjacency(self) -> np.ndarray:
        if self._adjacency is None or self._adjacency_version != self.mobility.version:
            positions = self.mobility.positions
            delta = positions[:, None, :] - positions[None, :, :]
            squared = np.einsum("ijk,ijk->ij", delta, delta)
            adjacency = squared <= self.radio.range * self.radio.range
            np.fill_diagonal(adjacency, False)
            for pair in self._blocked:
                a, b = tuple(pair)
                adjacency[a, b] = adjacency[b, a] = False
            self._adjacency = adjacency
            self._adjacency_version = self.mobility.version
            self._neighbor_cache = {}
            self._receiver_cache = {}
        return self._adjacency

    def neighbors(self, node: int, at: Optional[float] = None) -> FrozenSet[int]:
        """
        Nodes within radio range of `node` (closed ball), excluding itself.

        Positions are piecewise constant between mobility ticks, so any `at`
        inside the current tick sees the same set.
        """
        self._check_node(node)
        adjacency = self._current_adjacency()
        cached = self._neighbor_cache.get(node)
        if cached is None:
            cached = frozenset(int(i) for i in np.flatnonzero(adjacency[node]))
            self._neighbor_cache[node] = cached
        return cached

    def _broadcast_receivers(self, node: int) -> Tuple[int, ...]:
        self._current_adjacency()
        receivers = self._receiver_cache.get(node)
        if receivers is None:
            receivers = tuple(sorted(self.neighbors(node)))
            self._receiver_cache[node] = receivers
        return receivers

    def break_link(self, a: int, b: int) -> None:
        """Force a link down regardless of distance (scripted scenarios)."""
        self._check_node(a)
        self._check_node(b)
        self._blocked.add(frozenset((a, b)))
        self._adjacency = None

    def restore_link(self, a: int, b: int) -> None:
        self._blocked.discard(frozenset((a, b)))
        self._adjacency = None

    def connectivity_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_nodes))
        adjacency = self._current_adjacency()
        rows, cols = np.nonzero(np.triu(adjacency))
        graph.add_edges_from(zip(rows.tolist(), cols.tolist()))
        return graph

    # -- transmission -----------------------------------------------------

    def enqueue(self, node: int, packet: Packet) -> bool:
        """Hand a packet (with `next_hop` set) to the node's interface."""
        accepted = self.queues[node].enqueue(packet)
        self.max_queue_length = max(self.max_queue_length, len(self.queues[node]))
        if accepted:
            self._service(node)
        return accepted

    def _service(self, node: int) -> None:
        # link-failure callbacks may enqueue again; only the outermost call drains
        if node in self._servicing:
            return
        self._servicing.add(node)
        try:
            queue = self.queues[node]
            while not self._busy[node] and len(queue):
                packet = queue.dequeue()
                self.transmit(packet, node, packet.next_hop, self.engine.clock)
        finally:
            self._servicing.discard(node)

    def transmit(self, packet: Packet, sender: int, to: int, at: float) -> bool:
        """
        Start sending `packet` from `sender` to `to` (or BROADCAST) at `at`.

        Returns False when a unicast receiver is out of range; the routing
        layer then gets the link-failure signal.
        """
        if to == BROADCAST:
            receivers = self._broadcast_receivers(sender)
        else:
            if to not in self.neighbors(sender, at):
                logger.debug(f"Link {sender}->{to} down at t={at:.6f} for packet {packet.pkt_id}")
                self._on_link_failure(sender, to, packet)
                return False
            receivers = (to,)

        serialization = packet.size * 8 / self.radio.bit_rate
        arrival = at + serialization + self.radio.processing_delay
        self._busy[sender] = True
        self.tracer.record(at, Action.SEND, Layer.MAC, sender, packet)
        self.engine.schedule(at + serialization, EventKind.TRANSMIT_COMPLETE, target=sender)
        if receivers:
            frame = packet.clone()
            frame.prev_hop = sender
            frame.hop_count = packet.hop_count + 1
            # one arrival event per frame; receivers are served in node order
            self.engine.schedule(arrival, EventKind.PACKET_ARRIVAL, target=sender, payload=(frame, sender, receivers))
        return True

    def _handle_transmit_complete(self, event: Event) -> None:
        self._busy[event.target] = False
        self._service(event.target)

    def _handle_arrival(self, event: Event) -> None:
        frame, sender, receivers = event.payload
        last = len(receivers) - 1
        for i, receiver in enumerate(receivers):
            packet = frame if i == last else frame.clone()
            self.tracer.record(event.fire_at, Action.RECV, Layer.MAC, receiver, packet)
            self._on_receive(receiver, packet, sender)

    def queued_packets(self) -> List[Tuple[int, Packet]]:
        return [(node, packet) for node, queue in enumerate(self.queues) for packet in queue]
