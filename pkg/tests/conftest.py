import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wpgen.harness import builtin_case_studies  # noqa: E402


@pytest.fixture(scope="session")
def presets():
    return builtin_case_studies()


@pytest.fixture(scope="session")
def mariner(presets):
    return presets["mariner"]


@pytest.fixture(scope="session")
def remus(presets):
    return presets["remus100"]


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import VERDICTS

    if VERDICTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
