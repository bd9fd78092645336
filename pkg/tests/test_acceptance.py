"""Acceptance suite: every criterion at its stated tolerance and runtime budget.

Each criterion runs once at the full budget tier and prints one PASS/FAIL
line. Failing checks are listed in the assertion message, each with its
observed and expected values against the tolerance.
"""

import pytest

from l1pred.validate import CRITERIA

pytestmark = pytest.mark.slow


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    report = CRITERIA[number]("full")
    with capsys.disabled():
        print(f"\n{report.summary()}")
    assert report.passed, "\n".join(check.line() for check in report.failures())
