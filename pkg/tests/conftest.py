import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20001113)


def pytest_terminal_summary(terminalreporter):
    import verdicts

    if verdicts.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(verdicts.LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
