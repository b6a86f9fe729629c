from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import field_validator, Field
from urllib.parse import urlparse


_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


class Settings(BaseSettings):
    # Application
    APP_NAME: str = "MANET MRP Simulator"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = Field(default=False, description="Enable debug mode")
    ENVIRONMENT: str = Field(default="development", description="Environment: development, staging, production")
    LOG_LEVEL: str = Field(default="INFO", description="Root log level")

    # Harness
    OUTPUT_DIR: str = Field(default="runs", description="Directory where runs and sweeps are persisted")
    SWEEP_WORKERS: int = Field(default=1, description="Process pool size for sweep cells")
    MAX_NODES: int = Field(default=200, description="Largest node count the service accepts")

    # CORS
    FRONTEND_URL: str = "http://localhost:3000"

    # Server
    PORT: int = Field(default=8000, description="Server port")

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore"
    )

    @field_validator('LOG_LEVEL')
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Accept only standard logging level names."""
        level = v.strip().upper()
        if level not in _LOG_LEVELS:
            raise ValueError(f"LOG_LEVEL must be one of {sorted(_LOG_LEVELS)}, got {v!r}")
        return level

    @field_validator('SWEEP_WORKERS', 'MAX_NODES')
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator('FRONTEND_URL')
    @classmethod
    def validate_frontend_url(cls, v: str) -> str:
        """Validate frontend URL format."""
        if v:
            parsed = urlparse(v)
            if not parsed.scheme or not parsed.netloc:
                raise ValueError("FRONTEND_URL must be a valid URL")
        return v


def validate_settings() -> Settings:
    """Re-read settings from the environment and validate them."""
    from app.core.exceptions import ConfigurationError

    global settings
    try:
        settings = Settings()
    except Exception as e:
        raise ConfigurationError(
            f"Configuration error: {e}\n"
            f"Please check your environment or .env file.",
            error_code="CONFIG_ERROR"
        )
    return settings


settings = Settings()
