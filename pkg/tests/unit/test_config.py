import pytest

from framework.config import Settings, load_settings


def test_defaults_without_environment():
    settings = load_settings({})
    assert settings == Settings()
    assert settings.depth_threshold == 0.05
    assert settings.multistart == 8
    assert settings.testing is False


def test_environment_overrides():
    settings = load_settings({
        "DENTFIT_LOG_LEVEL": "debug",
        "DENTFIT_CELL": " 1.5 ",
        "DENTFIT_WORKERS": "4",
        "DENTFIT_RING_WIDTH": "0",
        "TESTING": "true",
    })
    assert settings.log_level == "DEBUG"
    assert settings.cell == 1.5
    assert settings.workers == 4
    assert settings.ring_width == 0.0
    assert settings.testing is True


def test_empty_values_keep_defaults():
    assert load_settings({"DENTFIT_MAX_EVALS": ""}).max_evals == 20_000


def test_invalid_values_name_every_variable():
    with pytest.raises(EnvironmentError) as excinfo:
        load_settings({"DENTFIT_CELL": "-2", "DENTFIT_MULTISTART": "many", "DENTFIT_WORKERS": "2"})
    message = str(excinfo.value)
    assert "DENTFIT_CELL" in message
    assert "DENTFIT_MULTISTART" in message
    assert "DENTFIT_WORKERS" not in message


def test_unknown_log_level():
    with pytest.raises(EnvironmentError, match="DENTFIT_LOG_LEVEL"):
        load_settings({"DENTFIT_LOG_LEVEL": "chatty"})
