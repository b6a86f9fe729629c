import re
import uuid
from pathlib import Path

from fastapi import APIRouter, status
from fastapi.responses import FileResponse

from app.core.config import settings
from app.core.exceptions import NotFoundError, ValidationError
from app.core.logging_config import get_logger
from app.harness.exports import write_run_artifacts
from app.harness.scenario_io import build_scenario
from app.models.simulation import SimulationRequest, SimulationResponse, SwitchEventResponse
from app.simulation import run_scenario

logger = get_logger(__name__)
router = APIRouter()

_RUN_ID = re.compile(r"^[0-9a-f]{12}$")


def _run_dir(run_id: str) -> Path:
    if not _RUN_ID.match(run_id):
        raise NotFoundError(f"Run {run_id!r} not found", error_code="RUN_NOT_FOUND", details={"run_id": run_id})
    return Path(settings.OUTPUT_DIR) / "runs" / run_id


@router.post("", response_model=SimulationResponse, status_code=status.HTTP_201_CREATED)
def create_simulation(request: SimulationRequest):
    """Run one scenario and persist its artifacts under OUTPUT_DIR/runs/<run_id>."""
    scenario = build_scenario(request.scenario)
    if scenario.n_nodes > settings.MAX_NODES:
        raise ValidationError(
            f"n_nodes: at most {settings.MAX_NODES} nodes are accepted",
            error_code="SCENARIO_TOO_LARGE",
            details={"field": "n_nodes", "max": settings.MAX_NODES},
        )
    run_id = uuid.uuid4().hex[:12]
    result = run_scenario(scenario, record_mobility=request.record_mobility)
    paths = write_run_artifacts(result, _run_dir(run_id))
    logger.info(f"Stored run {run_id} ({scenario.protocol_label}, seed {scenario.seed})")
    return SimulationResponse(
        run_id=run_id,
        scenario_id=scenario.scenario_id,
        protocol=scenario.protocol_label,
        report=result.report,
        switches=[
            SwitchEventResponse(
                time=s.at,
                from_protocol=s.from_protocol.value,
                to_protocol=s.to_protocol.value,
                trigger=s.trigger,
                value=s.value,
            )
            for s in result.switches
        ],
        event_count=result.event_count,
        wall_seconds=result.wall_seconds,
        artifacts=sorted(paths),
    )


@router.get("/{run_id}/trace")
def get_trace(run_id: str):
    path = _run_dir(run_id) / "trace.txt"
    if not path.is_file():
        raise NotFoundError(f"Run {run_id!r} not found", error_code="RUN_NOT_FOUND", details={"run_id": run_id})
    return FileResponse(path, media_type="text/plain", filename=f"{run_id}-trace.txt")
