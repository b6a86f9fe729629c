from enum import Enum
from typing import Optional, List, Literal, Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ProtocolName(str, Enum):
    AODV = "aodv"
    DSR = "dsr"
    DSDV = "dsdv"
    TORA = "tora"

    @property
    def ordinal(self) -> int:
        return list(ProtocolName).index(self)

    @classmethod
    def from_ordinal(cls, ordinal: int) -> "ProtocolName":
        return list(cls)[ordinal]


class MobilityModelName(str, Enum):
    RANDOM_DIRECTION = "random_direction"
    RANDOM_WAYPOINT = "random_waypoint"
    RPGM = "rpgm"
    STATIC = "static"


class SwitchPolicy(str, Enum):
    ADAPTIVE = "adaptive"
    FORCED = "forced"
    DISABLED = "disabled"


class Area(BaseModel):
    """Simulation field in meters."""
    width: float = Field(600.0, gt=0)
    height: float = Field(600.0, gt=0)

    model_config = ConfigDict(frozen=True)

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


class RadioConfig(BaseModel):
    range: float = Field(250.0, gt=0)
    bit_rate: float = Field(2_000_000.0, gt=0)
    processing_delay: float = Field(0.001, ge=0)

    model_config = ConfigDict(frozen=True)

    def hop_delay(self, size_bytes: int) -> float:
        """Serialization plus processing delay of one transmission."""
        return size_bytes * 8 / self.bit_rate + self.processing_delay


class MrpConfig(BaseModel):
    primary: ProtocolName = ProtocolName.AODV
    secondary: ProtocolName = ProtocolName.DSR
    epoch: float = Field(5.0, gt=0)
    policy: SwitchPolicy = SwitchPolicy.ADAPTIVE
    weight_pdr: float = Field(0.5, ge=0)
    weight_delay: float = Field(0.3, ge=0)
    weight_roh: float = Field(0.2, ge=0)
    delay_ref: float = Field(0.5, gt=0, description="Delay (s) that normalizes to the worst delay term")
    roh_ref: float = Field(5.0, gt=0, description="Control transmissions per node per second that normalize to the worst ROH term")
    hysteresis: float = Field(0.1, ge=0)
    min_dwell: int = Field(2, ge=1)
    memory_decay: float = Field(0.5, ge=0, le=1)
    count_standby: bool = True

    model_config = ConfigDict(frozen=True)

    @model_validator(mode='after')
    def validate_pair(self):
        if self.primary == self.secondary:
            raise ValueError("MRP protocol pair must name two distinct protocols")
        return self

    @property
    def label(self) -> str:
        return f"mrp({self.primary.value}+{self.secondary.value})"


def parse_protocol_token(token: str) -> dict[str, Any]:
    """
    Expand a protocol token into scenario fields.

    Accepts `aodv`, `dsr`, `dsdv`, `tora`, `mrp`, and `mrp:<a>+<b>`.
    """
    token = token.strip().lower()
    if token.startswith("mrp:"):
        pair = token[len("mrp:"):].split("+")
        if len(pair) != 2:
            raise ValueError(f"MRP token must look like mrp:<a>+<b>, got {token!r}")
        return {"protocol": "mrp", "mrp_primary": pair[0], "mrp_secondary": pair[1]}
    return {"protocol": token}


class ScenarioConfig(BaseModel):
    """
    Full parameter set of one simulation run.

    Defaults describe the reference setup: 600 x 600 m, RPGM,
    0.5-5.0 m/s, pause 0, 100 s, CBR at 8 pkt/s with 512-byte payloads and a
    50-packet drop-tail queue. Field aliases are the scenario-file keys.
    """
    scenario_id: str = "default"
    n_nodes: int = Field(20, alias="nodes", ge=2)
    area_width: float = Field(600.0, gt=0)
    area_height: float = Field(600.0, gt=0)
    speed_min: float = Field(0.5, gt=0)
    speed_max: float = Field(5.0, gt=0)
    pause: float = Field(0.0, ge=0)
    mobility: MobilityModelName = MobilityModelName.RPGM
    mobility_tick: float = Field(0.1, gt=0)
    rpgm_groups: int = Field(4, ge=1)
    rpgm_radius: float = Field(50.0, ge=0)
    rpgm_offset_radius: float = Field(100.0, ge=0)

    protocol: Literal["aodv", "dsr", "dsdv", "tora", "mrp"] = "aodv"
    mrp_primary: ProtocolName = ProtocolName.AODV
    mrp_secondary: ProtocolName = ProtocolName.DSR
    mrp_policy: SwitchPolicy = SwitchPolicy.ADAPTIVE
    mrp_epoch: float = Field(5.0, gt=0)
    mrp_hysteresis: float = Field(0.1, ge=0)
    mrp_min_dwell: int = Field(2, ge=1)
    mrp_weight_pdr: float = Field(0.5, ge=0)
    mrp_weight_delay: float = Field(0.3, ge=0)
    mrp_weight_roh: float = Field(0.2, ge=0)
    mrp_delay_ref: float = Field(0.5, gt=0)
    mrp_roh_ref: float = Field(5.0, gt=0)
    mrp_memory_decay: float = Field(0.5, ge=0, le=1)
    mrp_count_standby: bool = True

    flows: Optional[str] = Field(None, description="Explicit flows as 'src-dst;src-dst'")
    flow_count: Optional[int] = Field(None, ge=1)
    packet_rate: float = Field(8.0, gt=0)
    payload: int = Field(512, gt=0)
    traffic_start: float = Field(0.0, ge=0)
    traffic_stop: Optional[float] = Field(None, ge=0)
    traffic_jitter: float = Field(0.0, ge=0)

    radio_range: float = Field(250.0, gt=0)
    bit_rate: float = Field(2_000_000.0, gt=0)
    processing_delay: float = Field(0.001, ge=0)
    queue_capacity: int = Field(50, ge=1)

    duration: float = Field(100.0, gt=0)
    seed: int = Field(1, ge=0, lt=2**64)

    aodv_route_lifetime: float = Field(10.0, gt=0)
    aodv_intermediate_reply: bool = True
    rreq_retries: int = Field(3, ge=0)
    rreq_timeout: float = Field(1.0, gt=0)
    dsr_cache_reply: bool = False
    dsdv_full_dump: float = Field(15.0, gt=0)
    dsdv_incremental: float = Field(1.0, gt=0)
    tora_max_reversals: int = Field(32, ge=1)

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    @model_validator(mode='before')
    @classmethod
    def expand_protocol_token(cls, data: Any) -> Any:
        if isinstance(data, dict) and isinstance(data.get("protocol"), str):
            data = {**data, **parse_protocol_token(data["protocol"])}
        return data

    @field_validator('flows')
    @classmethod
    def validate_flows(cls, v: Optional[str]) -> Optional[str]:
        if v is None or not v.strip():
            return None
        for pair in v.split(";"):
            parts = pair.strip().split("-")
            if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
                raise ValueError(f"flow {pair!r} must look like 'src-dst'")
            if int(parts[0]) == int(parts[1]):
                raise ValueError(f"flow {pair!r} has identical source and destination")
        return v.strip()

    @model_validator(mode='after')
    def validate_invariants(self):
        if self.speed_min > self.speed_max:
            raise ValueError("speed_min cannot be greater than speed_max")
        if self.protocol == "mrp" and self.mrp_primary == self.mrp_secondary:
            raise ValueError("mrp_primary and mrp_secondary must differ")
        if self.traffic_stop is not None and self.traffic_stop > self.duration:
            raise ValueError("traffic_stop cannot exceed duration")
        if self.traffic_stop is not None and self.traffic_stop < self.traffic_start:
            raise ValueError("traffic_stop cannot precede traffic_start")
        for src, dst in self.flow_pairs():
            if src >= self.n_nodes or dst >= self.n_nodes:
                raise ValueError(f"flow {src}-{dst} references a node outside 0..{self.n_nodes - 1}")
        return self

    def flow_pairs(self) -> List[tuple[int, int]]:
        if not self.flows:
            return []
        pairs = []
        for pair in self.flows.split(";"):
            src, dst = pair.strip().split("-")
            pairs.append((int(src), int(dst)))
        return pairs

    @property
    def area(self) -> Area:
        return Area(width=self.area_width, height=self.area_height)

    @property
    def radio(self) -> RadioConfig:
        return RadioConfig(range=self.radio_range, bit_rate=self.bit_rate, processing_delay=self.processing_delay)

    @property
    def mrp(self) -> MrpConfig:
        return MrpConfig(
            primary=self.mrp_primary,
            secondary=self.mrp_secondary,
            epoch=self.mrp_epoch,
            policy=self.mrp_policy,
            weight_pdr=self.mrp_weight_pdr,
            weight_delay=self.mrp_weight_delay,
            weight_roh=self.mrp_weight_roh,
            delay_ref=self.mrp_delay_ref,
            roh_ref=self.mrp_roh_ref,
            hysteresis=self.mrp_hysteresis,
            min_dwell=self.mrp_min_dwell,
            memory_decay=self.mrp_memory_decay,
            count_standby=self.mrp_count_standby,
        )

    @property
    def is_mrp(self) -> bool:
        return self.protocol == "mrp"

    @property
    def protocols(self) -> List[ProtocolName]:
        """Protocol instances every node runs; the first one carries data at t=0."""
        if self.is_mrp:
            return [self.mrp_primary, self.mrp_secondary]
        return [ProtocolName(self.protocol)]

    @property
    def protocol_label(self) -> str:
        return self.mrp.label if self.is_mrp else self.protocol

    @property
    def effective_traffic_stop(self) -> float:
        return self.duration if self.traffic_stop is None else self.traffic_stop

    @classmethod
    def field_for_key(cls, key: str) -> Optional[str]:
        """Map a scenario-file key (alias or field name) to the model field name."""
        for name, info in cls.model_fields.items():
            if key == name or key == info.alias:
                return name
        return None

    @classmethod
    def key_for_field(cls, name: str) -> str:
        info = cls.model_fields[name]
        return info.alias or name


class SweepSpec(BaseModel):
    base: ScenarioConfig
    param: str
    values: List[Any]
    seeds: int = Field(1, ge=1)
    protocols: Optional[List[str]] = None

    @field_validator('values')
    @classmethod
    def validate_values(cls, v: List[Any]) -> List[Any]:
        if not v:
            raise ValueError("swept values cannot be empty")
        return v

    @field_validator('param')
    @classmethod
    def validate_param(cls, v: str) -> str:
        field = ScenarioConfig.field_for_key(v.strip())
        if field is None:
            raise ValueError(f"unknown scenario parameter {v!r}")
        if field in ("seed", "protocol"):
            raise ValueError(f"{v!r} is controlled by the sweep itself and cannot be swept")
        return field

    @property
    def protocol_tokens(self) -> List[str]:
        if self.protocols:
            return self.protocols
        base = self.base
        if base.is_mrp:
            return [f"mrp:{base.mrp_primary.value}+{base.mrp_secondary.value}"]
        return [base.protocol]
