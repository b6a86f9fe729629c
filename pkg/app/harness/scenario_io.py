"""
Flat `key=value` scenario files.

Blank lines and `#` comments are ignored; keys are scenario field names or
their aliases (`nodes` for `n_nodes`). Missing keys keep their defaults.
"""
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Union

from pydantic import ValidationError as PydanticValidationError

from app.core.exceptions import NotFoundError, ScenarioParseError, ValidationError
from app.core.logging_config import get_logger
from app.models.scenario import ScenarioConfig

logger = get_logger(__name__)


def parse_scenario_text(text: str, source: str = "<string>") -> ScenarioConfig:
    values: Dict[str, str] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioParseError(
                f"{source}:{line_number}: expected key=value, got {raw.strip()!r}",
                error_code="SCENARIO_SYNTAX",
                details={"line": line_number, "source": source},
            )
        key, value = (part.strip() for part in line.split("=", 1))
        field = ScenarioConfig.field_for_key(key)
        if field is None:
            raise ScenarioParseError(
                f"{source}:{line_number}: unknown key {key!r}",
                error_code="UNKNOWN_SCENARIO_KEY",
                details={"line": line_number, "source": source, "key": key},
            )
        if field in values:
            raise ScenarioParseError(
                f"{source}:{line_number}: key {key!r} given twice",
                error_code="DUPLICATE_SCENARIO_KEY",
                details={"line": line_number, "source": source, "key": key},
            )
        values[field] = value
    return build_scenario(values, source)


def build_scenario(values: Dict[str, Any], source: str = "<request>") -> ScenarioConfig:
    """Validate raw values into a ScenarioConfig, naming the offending field on failure."""
    try:
        return ScenarioConfig.model_validate(values)
    except PydanticValidationError as e:
        first = e.errors()[0]
        loc = first.get("loc") or ()
        field = ScenarioConfig.field_for_key(str(loc[0])) if loc else None
        message = first.get("msg", "invalid value")
        if message.startswith("Value error, "):
            message = message[len("Value error, "):]
        prefix = f"{field}: " if field else ""
        raise ValidationError(
            f"{source}: {prefix}{message}",
            error_code="SCENARIO_INVALID",
            details={"field": field, "source": source, "errors": len(e.errors())},
        ) from e


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        raise NotFoundError(f"Scenario file not found: {path}", error_code="SCENARIO_NOT_FOUND", details={"path": str(path)})
    scenario = parse_scenario_text(path.read_text(encoding="utf-8"), source=str(path))
    logger.debug(f"Loaded scenario {scenario.scenario_id} from {path}")
    return scenario


def _format_value(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_scenario(scenario: ScenarioConfig) -> str:
    """Every effective value, so a reload reproduces the same config."""
    lines = ["# manet scenario"]
    for name in ScenarioConfig.model_fields:
        value = getattr(scenario, name)
        if value is None:
            continue
        lines.append(f"{ScenarioConfig.key_for_field(name)}={_format_value(value)}")
    return "\n".join(lines) + "\n"


def save_scenario(scenario: ScenarioConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_scenario(scenario), encoding="utf-8")
    return path
