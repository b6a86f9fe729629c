"""
Envelope comparison of MRP rows against their two constituent protocols.

For every `mrp(a+b)` row of an aggregate CSV and each metric, the MRP mean
must lie within [min, max] of the `a` and `b` means at the same swept
value, widened by a relative tolerance. A verdict outside the envelope is
marked favorable when MRP beats both constituents on that metric.
"""
import math
import re
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import pandas as pd

from app.core.exceptions import NotFoundError, ValidationError
from app.core.logging_config import get_logger

logger = get_logger(__name__)

ENVELOPE_METRICS = ["pdr", "delay_s", "roh"]
LOWER_IS_BETTER = frozenset({"delay_s", "roh"})
DEFAULT_TOLERANCE = 0.10
_MRP_LABEL = re.compile(r"^mrp\((\w+)\+(\w+)\)$")


@dataclass(frozen=True)
class EnvelopeVerdict:
    mrp: str
    value: float
    metric: str
    mrp_mean: float
    low: float
    high: float
    inside: Optional[bool]
    favorable: bool = False


def envelope_bounds(a: float, b: float, tolerance: float = DEFAULT_TOLERANCE) -> Tuple[float, float]:
    lo, hi = min(a, b), max(a, b)
    return lo - abs(lo) * tolerance, hi + abs(hi) * tolerance


def within_envelope(value: float, a: float, b: float, tolerance: float = DEFAULT_TOLERANCE) -> Optional[bool]:
    """None when any side is undefined (no traffic or no deliveries)."""
    if any(math.isnan(x) for x in (value, a, b)):
        return None
    low, high = envelope_bounds(a, b, tolerance)
    return low <= value <= high


def beats_envelope(metric: str, value: float, low: float, high: float) -> bool:
    """True when `value` lies past the envelope on the side where `metric` is better."""
    return value < low if metric in LOWER_IS_BETTER else value > high


def check_envelope(aggregate: pd.DataFrame, tolerance: float = DEFAULT_TOLERANCE) -> List[EnvelopeVerdict]:
    if tolerance < 0:
        raise ValidationError("tolerance cannot be negative", error_code="INVALID_TOLERANCE")
    means = aggregate.set_index(["protocol", "value"])
    verdicts: List[EnvelopeVerdict] = []
    for label in dict.fromkeys(aggregate["protocol"]):
        match = _MRP_LABEL.match(str(label))
        if match is None:
            continue
        first, second = match.groups()
        for value in aggregate.loc[aggregate["protocol"] == label, "value"]:
            if (first, value) not in means.index or (second, value) not in means.index:
                logger.warning(f"No solo rows for {first}/{second} at value {value}; skipping {label}")
                continue
            for metric in ENVELOPE_METRICS:
                column = f"{metric}_mean"
                mrp_mean = float(means.loc[(label, value), column])
                a = float(means.loc[(first, value), column])
                b = float(means.loc[(second, value), column])
                low, high = envelope_bounds(a, b, tolerance)
                inside = within_envelope(mrp_mean, a, b, tolerance)
                favorable = inside is False and beats_envelope(metric, mrp_mean, low, high)
                verdicts.append(EnvelopeVerdict(label, value, metric, mrp_mean, low, high, inside, favorable))
    return verdicts


def compare_csv(csv_path: Union[str, Path], tolerance: float = DEFAULT_TOLERANCE) -> pd.DataFrame:
    path = Path(csv_path)
    if not path.is_file():
        raise NotFoundError(f"Aggregate CSV not found: {path}", error_code="CSV_NOT_FOUND", details={"path": str(path)})
    verdicts = check_envelope(pd.read_csv(path), tolerance)
    frame = pd.DataFrame([asdict(v) for v in verdicts], columns=list(EnvelopeVerdict.__dataclass_fields__))
    failed = int((frame["inside"] == False).sum())  # noqa: E712
    favorable = int(frame["favorable"].sum())
    logger.info(f"Envelope check of {path}: {len(frame)} verdicts, {failed} outside ({favorable} favorable)")
    return frame
