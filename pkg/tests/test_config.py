import pytest

from minram.config import DEFAULT_SCAN_LIMIT, SCHEMA_TAG, load_settings
from minram.errors import MinramError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("MINRAM_LIMIT", "MINRAM_JOBS", "MINRAM_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


def test_defaults():
    settings = load_settings()
    assert settings.scan_limit == DEFAULT_SCAN_LIMIT
    assert settings.jobs == 1
    assert settings.log_level == "INFO"
    assert settings.schema_tag == SCHEMA_TAG


def test_environment(monkeypatch):
    monkeypatch.setenv("MINRAM_LIMIT", "1_000")
    monkeypatch.setenv("MINRAM_JOBS", "4")
    monkeypatch.setenv("MINRAM_LOG_LEVEL", "debug")
    settings = load_settings()
    assert settings.scan_limit == 1000
    assert settings.jobs == 4
    assert settings.log_level == "DEBUG"


def test_arguments_override_environment(monkeypatch):
    monkeypatch.setenv("MINRAM_LIMIT", "1000")
    settings = load_settings(scan_limit=50, jobs=2)
    assert settings.scan_limit == 50
    assert settings.jobs == 2


def test_malformed_variable_is_named(monkeypatch):
    monkeypatch.setenv("MINRAM_LIMIT", "lots")
    with pytest.raises(MinramError, match="MINRAM_LIMIT"):
        load_settings()
