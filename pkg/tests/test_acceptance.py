"""Acceptance battery: one PASS/FAIL line per criterion.

Runs the full budgets by default (several minutes on one core). Set
SYMTAIL_QUICK=1 for the reduced budgets. Also runnable directly:

    python3 tests/test_acceptance.py [--quick] [criterion ...]
"""

import os
import sys

import pytest

from symtail import suite

pytestmark = pytest.mark.slow

QUICK = os.environ.get("SYMTAIL_QUICK") not in (None, "", "0")
LINES = []


def report_line(res):
    line = res.line()
    if not res.within_time:
        line += f" over time budget {res.time_budget:.0f}s"
    LINES.append(line)
    print(line)
    return line


@pytest.mark.parametrize("number", range(1, 10))
def test_criterion(number):
    res = suite.run_criterion(number, quick=QUICK)
    report_line(res)
    assert res.passed, res.details
    assert res.within_time


def main(argv):
    quick = "--quick" in argv
    picks = [int(a) for a in argv if a.isdigit()] or range(1, 10)
    results = [suite.run_criterion(c, quick=quick) for c in picks]
    for r in results:
        report_line(r)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
