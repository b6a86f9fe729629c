from typing import Optional, Dict

from pydantic import BaseModel, Field, model_validator


class MetricsReport(BaseModel):
    """
    Whole-run metrics.

    `pdr` and `avg_delay` are None when undefined (no data sent, or nothing
    received); None is the no-traffic marker and never stands for 0 or 1.
    """
    roh: int = Field(..., ge=0, description="Routing control transmissions (RTR SEND + FWD)")
    roh_standby: int = Field(0, ge=0, description="Part of roh emitted by the then-standby MRP protocol")
    pkt_sent: int = Field(..., ge=0)
    pkt_received: int = Field(..., ge=0)
    pdr: Optional[float] = Field(None, ge=0, le=1)
    avg_delay: Optional[float] = Field(None, ge=0, description="Seconds")
    throughput_bps: float = Field(0.0, ge=0)
    m: int = Field(..., ge=0, description="Number of received packets in the delay average")
    drops: Dict[str, int] = Field(default_factory=dict)

    @model_validator(mode='after')
    def validate_counts(self):
        if self.pkt_received > self.pkt_sent:
            raise ValueError("pkt_received cannot exceed pkt_sent")
        if self.m != self.pkt_received:
            raise ValueError("m must equal pkt_received")
        if self.roh_standby > self.roh:
            raise ValueError("roh_standby cannot exceed roh")
        return self

    def reported_roh(self, count_standby: bool = True) -> int:
        return self.roh if count_standby else self.roh - self.roh_standby


class MetricsWindow(BaseModel):
    """Metrics of one evaluation epoch [start, end); the last window of a run is closed."""
    start: float
    end: float
    pkt_sent: int = 0
    pkt_received: int = 0
    avg_delay: Optional[float] = None
    roh: int = 0
    roh_by_protocol: Dict[str, int] = Field(default_factory=dict)

    @property
    def pdr(self) -> Optional[float]:
        if self.pkt_sent == 0:
            return None
        return self.pkt_received / self.pkt_sent

    @property
    def has_traffic(self) -> bool:
        return self.pkt_sent > 0

    def roh_of(self, protocol: str) -> int:
        return self.roh_by_protocol.get(protocol, 0)
