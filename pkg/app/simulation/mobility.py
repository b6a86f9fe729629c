"""
Mobility models: random direction, random waypoint, reference point group
mobility (RPGM) and static placement.

The step functions are pure: they take a state and return the next one.
`MobilityManager` owns the per-node states of a run and advances them on
every mobility tick.
"""
import dataclasses
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import MobilityError, ValidationError
from app.core.logging_config import get_logger
from app.models.scenario import Area, MobilityModelName, ScenarioConfig
from app.simulation.rng import RngFactory, RngStream

logger = get_logger(__name__)

Point = Tuple[float, float]

# pause 0 with a waypoint on the current position would otherwise spin
_MAX_LEGS_PER_STEP = 64
# arrival and pause-end comparisons absorb float drift from summed ticks
_ARRIVAL_EPSILON = 1e-9


class Phase(str, Enum):
    MOVING = "moving"
    PAUSED = "paused"


@dataclass(frozen=True, slots=True)
class MobilityParams:
    area: Area
    speed_min: float
    speed_max: float
    pause: float = 0.0


@dataclass(frozen=True, slots=True)
class MobilityState:
    position: Point
    velocity: Point = (0.0, 0.0)
    speed: float = 0.0
    phase: Phase = Phase.MOVING
    waypoint: Optional[Point] = None
    pause_until: Optional[float] = None


@dataclass(frozen=True, slots=True)
class GroupAssignment:
    group_id: int
    is_leader: bool
    offset: Point
    deviation_radius: float


def clamp_to_area(x: float, y: float, area: Area) -> Point:
    return min(max(x, 0.0), area.width), min(max(y, 0.0), area.height)


def random_position(rng: RngStream, area: Area) -> Point:
    return rng.uniform(0.0, area.width), rng.uniform(0.0, area.height)


def _heading(rng: RngStream, params: MobilityParams) -> Tuple[Point, float]:
    speed = rng.uniform(params.speed_min, params.speed_max)
    theta = rng.angle()
    return (speed * math.cos(theta), speed * math.sin(theta)), speed


def inward_heading(position: Point, rng: RngStream, params: MobilityParams) -> Tuple[Point, float]:
    """Fresh random heading folded so that it points away from every wall the node touches."""
    (vx, vy), speed = _heading(rng, params)
    x, y = position
    area = params.area
    if x <= 0.0:
        vx = abs(vx)
    elif x >= area.width:
        vx = -abs(vx)
    if y <= 0.0:
        vy = abs(vy)
    elif y >= area.height:
        vy = -abs(vy)
    return (vx, vy), speed


def initial_random_direction(position: Point, rng: RngStream, params: MobilityParams) -> MobilityState:
    velocity, speed = inward_heading(position, rng, params)
    return MobilityState(position=position, velocity=velocity, speed=speed)


def draw_waypoint_leg(position: Point, rng: RngStream, params: MobilityParams) -> MobilityState:
    """New uniform waypoint in the area and a new uniform speed."""
    waypoint = random_position(rng, params.area)
    speed = rng.uniform(params.speed_min, params.speed_max)
    dx, dy = waypoint[0] - position[0], waypoint[1] - position[1]
    distance = math.hypot(dx, dy)
    if distance > 0:
        velocity = (speed * dx / distance, speed * dy / distance)
    else:
        velocity = (0.0, 0.0)
    return MobilityState(position=position, velocity=velocity, speed=speed, phase=Phase.MOVING, waypoint=waypoint)


def step_random_direction(state: MobilityState, dt: float, rng: RngStream, params: MobilityParams) -> MobilityState:
    """
    Advance along the current heading. A node reaching a wall stops there for
    the rest of the tick and leaves with a new inward heading and speed.
    """
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}", error_code="INVALID_DT")
    area = params.area
    x, y = state.position
    vx, vy = state.velocity

    t_move = dt
    if vx > 0:
        t_move = min(t_move, (area.width - x) / vx)
    elif vx < 0:
        t_move = min(t_move, -x / vx)
    if vy > 0:
        t_move = min(t_move, (area.height - y) / vy)
    elif vy < 0:
        t_move = min(t_move, -y / vy)
    t_move = max(t_move, 0.0)

    nx, ny = clamp_to_area(x + vx * t_move, y + vy * t_move, area)
    hits_wall = (
        (nx <= 0.0 and vx < 0) or (nx >= area.width and vx > 0)
        or (ny <= 0.0 and vy < 0) or (ny >= area.height and vy > 0)
    )
    if hits_wall:
        velocity, speed = inward_heading((nx, ny), rng, params)
        return MobilityState(position=(nx, ny), velocity=velocity, speed=speed)
    return dataclasses.replace(state, position=(nx, ny))


def step_random_waypoint(
    state: MobilityState,
    now: float,
    dt: float,
    rng: RngStream,
    params: MobilityParams,
) -> MobilityState:
    """
    Move toward the waypoint; on arrival pause for `params.pause` seconds and
    then start a new leg. Time left over inside the tick is carried into the
    pause or the next leg, so arrival and pause boundaries are exact.
    """
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}", error_code="INVALID_DT")
    t = now
    end = now + dt
    current = state
    for _ in range(_MAX_LEGS_PER_STEP):
        if current.phase is Phase.PAUSED:
            if current.pause_until is None or current.pause_until - end > _ARRIVAL_EPSILON:
                return current
            t = current.pause_until
            current = draw_waypoint_leg(current.position, rng, params)
            continue

        if current.waypoint is None:
            current = draw_waypoint_leg(current.position, rng, params)
            continue

        remaining = max(end - t, 0.0)
        px, py = current.position
        wx, wy = current.waypoint
        distance = math.hypot(wx - px, wy - py)
        if distance - current.speed * remaining > _ARRIVAL_EPSILON:
            vx, vy = current.velocity
            position = clamp_to_area(px + vx * remaining, py + vy * remaining, params.area)
            return dataclasses.replace(current, position=position)

        t += distance / current.speed if current.speed > 0 else remaining
        if params.pause > 0:
            current = MobilityState(
                position=current.waypoint,
                phase=Phase.PAUSED,
                pause_until=t + params.pause,
            )
        else:
            current = draw_waypoint_leg(current.waypoint, rng, params)
    return current


def reference_point(leader_position: Point, offset: Point, area: Area) -> Point:
    """Leader position plus the member's fixed offset, kept inside the area."""
    return clamp_to_area(leader_position[0] + offset[0], leader_position[1] + offset[1], area)


def place_member(leader: MobilityState, assignment: GroupAssignment, rng: RngStream, area: Area) -> MobilityState:
    rx, ry = reference_point(leader.position, assignment.offset, area)
    dx, dy = rng.point_in_disk(assignment.deviation_radius)
    position = clamp_to_area(rx + dx, ry + dy, area)
    # members inherit the group motion; the jitter is a displacement, not a velocity
    return MobilityState(position=position, velocity=leader.velocity, speed=leader.speed, phase=leader.phase)


def step_rpgm(
    leader: MobilityState,
    members: Sequence[Tuple[MobilityState, Optional[GroupAssignment]]],
    now: float,
    dt: float,
    rng: RngStream,
    params: MobilityParams,
) -> Tuple[MobilityState, List[MobilityState]]:
    """
    Move the leader by the random-waypoint rule, then redraw every member
    around its reference point (leader position + offset).
    """
    group_ids = set()
    for _, assignment in members:
        if assignment is None:
            raise MobilityError("RPGM member without a group assignment", error_code="MEMBER_WITHOUT_GROUP")
        if assignment.is_leader:
            raise MobilityError(
                f"Group {assignment.group_id} lists its leader among the members",
                error_code="DUPLICATE_LEADER",
            )
        group_ids.add(assignment.group_id)
    if len(group_ids) > 1:
        raise MobilityError(f"Members from several groups passed together: {sorted(group_ids)}", error_code="MIXED_GROUPS")

    new_leader = step_random_waypoint(leader, now, dt, rng, params)
    new_members = [place_member(new_leader, assignment, rng, params.area) for _, assignment in members]
    return new_leader, new_members


def assign_groups(n_nodes: int, n_groups: int, radius: float, offset_radius: float, rng: RngStream) -> List[GroupAssignment]:
    """Contiguous equal groups; the lowest node id of each group leads it."""
    n_groups = min(n_groups, n_nodes)
    assignments: List[GroupAssignment] = []
    leaders_seen = set()
    for node in range(n_nodes):
        group = node * n_groups // n_nodes
        is_leader = group not in leaders_seen
        leaders_seen.add(group)
        offset = (0.0, 0.0) if is_leader else rng.point_in_disk(offset_radius)
        assignments.append(GroupAssignment(group, is_leader, offset, radius))
    return assignments


class MobilityManager:
    """Per-run owner of node trajectories."""

    def __init__(
        self,
        scenario: ScenarioConfig,
        rng: RngFactory,
        positions: Optional[Sequence[Point]] = None,
        record: bool = False,
    ):
        self.model = scenario.mobility
        self.n_nodes = scenario.n_nodes
        self.tick = scenario.mobility_tick
        self.params = MobilityParams(
            area=scenario.area,
            speed_min=scenario.speed_min,
            speed_max=scenario.speed_max,
            pause=scenario.pause,
        )
        self._rng = rng
        self.record = record
        self.rows: List[Tuple[float, int, float, float]] = []
        self.groups: List[Optional[GroupAssignment]] = [None] * self.n_nodes
        self.version = 0

        if positions is not None and len(positions) != self.n_nodes:
            raise ValidationError(
                f"Expected {self.n_nodes} positions, got {len(positions)}",
                error_code="POSITION_COUNT_MISMATCH",
            )
        for position in positions or []:
            if not self.params.area.contains(*position):
                raise ValidationError(f"Position {position} lies outside the area", error_code="POSITION_OUTSIDE_AREA")

        placement = rng.stream("mobility:placement")
        start = list(positions) if positions is not None else [
            random_position(placement, self.params.area) for _ in range(self.n_nodes)
        ]
        self.states: List[MobilityState] = self._initial_states(scenario, start, placement)
        self.positions = np.array([s.position for s in self.states], dtype=float)
        self._record(0.0)

    def _initial_states(self, scenario: ScenarioConfig, start: List[Point], placement: RngStream) -> List[MobilityState]:
        if self.model is MobilityModelName.STATIC:
            return [MobilityState(position=p, phase=Phase.PAUSED) for p in start]
        if self.model is MobilityModelName.RANDOM_DIRECTION:
            return [initial_random_direction(p, self._node_stream(i), self.params) for i, p in enumerate(start)]
        if self.model is MobilityModelName.RANDOM_WAYPOINT:
            return [draw_waypoint_leg(p, self._node_stream(i), self.params) for i, p in enumerate(start)]

        self.groups = list(assign_groups(
            self.n_nodes, scenario.rpgm_groups, scenario.rpgm_radius, scenario.rpgm_offset_radius, placement
        ))
        states: List[MobilityState] = [MobilityState(position=p) for p in start]
        for leader_id in self.leaders():
            leader = draw_waypoint_leg(start[leader_id], self._group_stream(leader_id), self.params)
            states[leader_id] = leader
            for member_id in self.members_of(leader_id):
                states[member_id] = place_member(leader, self.groups[member_id], self._group_stream(leader_id), self.params.area)
        return states

    def _node_stream(self, node: int) -> RngStream:
        return self._rng.stream(f"mobility:{node}")

    def _group_stream(self, leader: int) -> RngStream:
        return self._rng.stream(f"mobility:group:{self.groups[leader].group_id}")

    def leaders(self) -> List[int]:
        return [i for i, g in enumerate(self.groups) if g is not None and g.is_leader]

    def members_of(self, leader: int) -> List[int]:
        group_id = self.groups[leader].group_id
        return [i for i, g in enumerate(self.groups) if g is not None and not g.is_leader and g.group_id == group_id]

    def reference_of(self, member: int) -> Point:
        assignment = self.groups[member]
        if assignment is None:
            raise MobilityError(f"Node {member} has no group", error_code="MEMBER_WITHOUT_GROUP")
        leader = next(i for i in self.leaders() if self.groups[i].group_id == assignment.group_id)
        return reference_point(self.states[leader].position, assignment.offset, self.params.area)

    @property
    def is_static(self) -> bool:
        return self.model is MobilityModelName.STATIC

    def advance(self, now: float, dt: float) -> None:
        """Advance every node from `now` to `now + dt`."""
        if self.is_static:
            return
        if self.model is MobilityModelName.RANDOM_DIRECTION:
            self.states = [
                step_random_direction(s, dt, self._node_stream(i), self.params) for i, s in enumerate(self.states)
            ]
        elif self.model is MobilityModelName.RANDOM_WAYPOINT:
            self.states = [
                step_random_waypoint(s, now, dt, self._node_stream(i), self.params) for i, s in enumerate(self.states)
            ]
        else:
            states = list(self.states)
            for leader_id in self.leaders():
                member_ids = self.members_of(leader_id)
                leader, members = step_rpgm(
                    states[leader_id],
                    [(states[m], self.groups[m]) for m in member_ids],
                    now,
                    dt,
                    self._group_stream(leader_id),
                    self.params,
                )
                states[leader_id] = leader
                for member_id, member in zip(member_ids, members):
                    states[member_id] = member
            self.states = states

        self.positions = np.array([s.position for s in self.states], dtype=float)
        self.version += 1
        self._record(now + dt)

    def _record(self, time: float) -> None:
        if self.record:
            self.rows.extend((time, i, float(x), float(y)) for i, (x, y) in enumerate(self.positions))

    def position(self, node: int) -> Point:
        x, y = self.positions[node]
        return float(x), float(y)
