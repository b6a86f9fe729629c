import pytest


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Point the service's OUTPUT_DIR at a per-test directory."""
    from app.core.config import settings

    out = tmp_path / "out"
    monkeypatch.setattr(settings, "OUTPUT_DIR", str(out))
    return out
