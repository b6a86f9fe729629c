from typing import Any, Dict

from fastapi import APIRouter

from app.core.logging_config import get_logger
from app.models.scenario import ScenarioConfig

logger = get_logger(__name__)
router = APIRouter()


@router.get("/defaults")
def get_default_scenario() -> Dict[str, Any]:
    """Default scenario parameters, keyed by scenario-file field names."""
    return ScenarioConfig().model_dump(mode="json")
