"""One test per acceptance criterion, evaluated at the default lattice.

Every test prints its pass/fail line; the lines are also collected into a
summary section at the end of the pytest run.  ``python
tests/acceptance_checks.py`` prints the same report without pytest.
"""

import pytest

import acceptance_checks as ac
from conftest import ACCEPTANCE_LINES


def _report(result):
    line = result.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert result.passed, line


@pytest.mark.parametrize("check", ac.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(check):
    _report(check())


def test_criterion_9_determinism(tmp_path):
    _report(ac.criterion_9(tmp_path))
