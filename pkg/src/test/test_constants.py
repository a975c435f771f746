"""
Tests for the FDQE_* environment overrides and the shipped defaults.
"""

import pytest

from fdqe import constants
from fdqe.constants import _override
from fdqe.errors import ConfigurationError


def test_override_unset_returns_default(monkeypatch):
    monkeypatch.delenv("FDQE_SOMETHING", raising = False)
    assert _override("SOMETHING", 7) == 7


def test_override_converts_to_default_type(monkeypatch):
    monkeypatch.setenv("FDQE_DEFAULT_RESTARTS", "64")
    assert _override("DEFAULT_RESTARTS", 32) == 64
    monkeypatch.setenv("FDQE_DEFAULT_VALUE_TOLERANCE", "1e-8")
    assert _override("DEFAULT_VALUE_TOLERANCE", 1e-6) == pytest.approx(1e-8)
    monkeypatch.setenv("FDQE_DEFAULT_LANGUAGE", "min")
    assert _override("DEFAULT_LANGUAGE", "star") == "min"


def test_override_rejects_unparseable_values(monkeypatch):
    monkeypatch.setenv("FDQE_DEFAULT_SEED", "lots")
    with pytest.raises(ConfigurationError, match = "FDQE_DEFAULT_SEED"):
        _override("DEFAULT_SEED", 0)


def test_defaults_are_consistent():
    assert constants.DEFAULT_LANGUAGE in constants.LANGUAGES
    assert constants.LANGUAGES == ("base", "min", "sim", "star")
    assert constants.DEFAULT_RESTARTS >= 1
    assert constants.DEFAULT_SWEEP_WORKERS >= 1
    assert constants.TRACE < 10
