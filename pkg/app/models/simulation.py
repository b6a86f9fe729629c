from pydantic import BaseModel, Field
from typing import Any, Dict, List, Optional

from app.models.metrics import MetricsReport


class SimulationRequest(BaseModel):
    """Scenario overrides for one run; omitted keys keep their defaults."""
    scenario: Dict[str, Any] = Field(default_factory=dict)
    record_mobility: bool = False


class SwitchEventResponse(BaseModel):
    time: float
    from_protocol: str
    to_protocol: str
    trigger: str
    value: Optional[float] = None


class SimulationResponse(BaseModel):
    run_id: str
    scenario_id: str
    protocol: str
    report: MetricsReport
    switches: List[SwitchEventResponse] = []
    event_count: int
    wall_seconds: float
    artifacts: List[str] = []


class SweepRequest(BaseModel):
    scenario: Dict[str, Any] = Field(default_factory=dict)
    param: str
    values: List[Any]
    seeds: int = Field(1, ge=1)
    protocols: Optional[List[str]] = None


class SweepResponse(BaseModel):
    sweep_id: str
    runs: int
    aggregate: List[Dict[str, Any]]
