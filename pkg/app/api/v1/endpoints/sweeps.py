import math
import re
import uuid
from pathlib import Path

from fastapi import APIRouter, Query, status
from fastapi.responses import FileResponse
from pydantic import ValidationError as PydanticValidationError

from app.core.config import settings
from app.core.exceptions import NotFoundError, ValidationError
from app.core.logging_config import get_logger
from app.harness.plotting import plot_aggregate
from app.harness.scenario_io import build_scenario
from app.harness.sweep import run_sweep, sweep_cells
from app.models.scenario import SweepSpec
from app.models.simulation import SweepRequest, SweepResponse

logger = get_logger(__name__)
router = APIRouter()

_SWEEP_ID = re.compile(r"^[0-9a-f]{12}$")


def _sweep_dir(sweep_id: str) -> Path:
    if not _SWEEP_ID.match(sweep_id):
        raise NotFoundError(f"Sweep {sweep_id!r} not found", error_code="SWEEP_NOT_FOUND", details={"sweep_id": sweep_id})
    return Path(settings.OUTPUT_DIR) / "sweeps" / sweep_id


def _json_value(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


@router.post("", response_model=SweepResponse, status_code=status.HTTP_201_CREATED)
def create_sweep(request: SweepRequest):
    base = build_scenario(request.scenario)
    try:
        spec = SweepSpec(
            base=base,
            param=request.param,
            values=request.values,
            seeds=request.seeds,
            protocols=request.protocols,
        )
    except PydanticValidationError as e:
        raise ValidationError(
            f"Invalid sweep: {e.errors()[0].get('msg', 'invalid value')}",
            error_code="SWEEP_INVALID",
        ) from e

    largest = max(cell.scenario.n_nodes for cell in sweep_cells(spec))
    if largest > settings.MAX_NODES:
        raise ValidationError(
            f"n_nodes: at most {settings.MAX_NODES} nodes are accepted",
            error_code="SCENARIO_TOO_LARGE",
            details={"field": "n_nodes", "max": settings.MAX_NODES},
        )

    sweep_id = uuid.uuid4().hex[:12]
    result = run_sweep(spec, _sweep_dir(sweep_id), workers=settings.SWEEP_WORKERS)
    rows = [
        {key: _json_value(value) for key, value in row.items()}
        for row in result.aggregate.to_dict(orient="records")
    ]
    return SweepResponse(sweep_id=sweep_id, runs=len(result.reports), aggregate=rows)


@router.get("/{sweep_id}/plot")
def get_sweep_plot(sweep_id: str, metric: str = Query("pdr")):
    directory = _sweep_dir(sweep_id)
    csv_path = directory / "aggregate.csv"
    if not csv_path.is_file():
        raise NotFoundError(f"Sweep {sweep_id!r} not found", error_code="SWEEP_NOT_FOUND", details={"sweep_id": sweep_id})
    summary = plot_aggregate(csv_path, metric, directory / f"plot-{metric}.svg")
    return FileResponse(summary.path, media_type="image/svg+xml")
