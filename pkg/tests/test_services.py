import logging

import pytest

from app import services
from app.exceptions import ValidationError


def test_success_is_logged(service, caplog):
    with caplog.at_level(logging.INFO, logger="app.services"):
        assert service.canonical("pssp").word == "sspp"
    assert "Successfully processed canonical request" in caplog.text


def test_application_errors_are_logged(service, caplog):
    with caplog.at_level(logging.INFO, logger="app.services"):
        with pytest.raises(ValidationError):
            service.canonical("psx")
    failures = [r for r in caplog.records if "failed" in r.getMessage()]
    assert [r.levelno for r in failures] == [logging.WARNING]


def test_unexpected_errors_are_logged(service, caplog, monkeypatch):
    def broken(t):
        raise RuntimeError("broken canonical form")

    monkeypatch.setattr(services, "canonical_ast", broken)
    with caplog.at_level(logging.INFO, logger="app.services"):
        with pytest.raises(RuntimeError):
            service.canonical("pssp")
    failures = [r for r in caplog.records if "failed" in r.getMessage()]
    assert len(failures) == 1
    assert failures[0].levelno == logging.ERROR
    assert "RuntimeError: broken canonical form" in failures[0].getMessage()
    assert "Successfully processed" not in caplog.text
