import pytest

from app.cli import main
from app.services import ClassificationService


@pytest.fixture
def service():
    return ClassificationService()


@pytest.fixture
def run_cli(capsys):
    """Run the command line in-process; returns (status, stdout, stderr)."""
    def run(*argv):
        status = main(list(argv))
        captured = capsys.readouterr()
        return status, captured.out, captured.err
    return run
