"""Tests for core configuration module."""

import pytest

from arw_fixation.core import config


def test_get_config_summary_returns_string():
    """Config summary should return a formatted string."""
    summary = config.get_config_summary()
    assert isinstance(summary, str)
    assert "Default budget" in summary


def test_output_dir_default():
    """OUTPUT_DIR should have a default value."""
    assert isinstance(config.OUTPUT_DIR, str)
    assert config.OUTPUT_DIR


def test_defaults_are_valid():
    """The shipped defaults should produce no configuration errors."""
    assert config.config_errors() == []


def test_bad_thread_count_reported(monkeypatch):
    """A non-positive worker cap should be reported."""
    monkeypatch.setattr(config, "ARW_THREADS", 0)
    errors = config.config_errors()
    assert any("ARW_THREADS" in e for e in errors)


def test_unknown_log_level_reported(monkeypatch):
    """An unknown log level name should be reported."""
    monkeypatch.setattr(config, "LOG_LEVEL", "CHATTY")
    assert any("ARW_LOG_LEVEL" in e for e in config.config_errors())


def test_validate_config_exits_on_error(monkeypatch, capsys):
    """validate_config should print to stderr and exit with status 1."""
    monkeypatch.setattr(config, "DEFAULT_BUDGET", -5)
    with pytest.raises(SystemExit) as exc:
        config.validate_config()
    assert exc.value.code == 1
    assert "ARW_DEFAULT_BUDGET" in capsys.readouterr().err
