"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` or execute this file directly
for a plain report.  Tolerances live in :mod:`dormantwalk.acceptance` and
are not adjusted here.
"""
import sys

import pytest

from dormantwalk import acceptance

_results = {}


def _evaluate(number):
    if number not in _results:
        _results[number] = acceptance.run_all([number])[0]
    return _results[number]


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, capsys):
    result = _evaluate(number)
    with capsys.disabled():
        sys.stdout.write("\n" + result.line() + f" ({result.seconds:.1f} s)\n")
    assert result.passed, result.summary


if __name__ == "__main__":
    results = acceptance.run_all(echo=print)
    sys.exit(0 if all(r.passed for r in results) else 3)
