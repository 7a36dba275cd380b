"""The twelve acceptance criteria at their stated tolerances.

Each criterion prints one PASS/FAIL line (also under pytest's capture).  Run
directly with ``python3 tests/test_acceptance.py`` for just the summary.
"""

import sys

import pytest

from cmvflows import checks

# runtime limits in seconds, where a criterion states one
TIME_LIMITS = {1: 1.0, 4: 30.0, 6: 10.0, 9: 60.0}

CRITERIA = list(enumerate(checks.ACCEPTANCE, start=1))


def evaluate(i, fn):
    res = fn()
    limit = TIME_LIMITS.get(i)
    in_time = limit is None or res.seconds < limit
    ok = res.passed and in_time
    line = f"criterion {i:2d} {res.line(ok)}"
    if limit is not None:
        line += f" (limit {limit:g}s)"
    return res, ok, line


@pytest.mark.parametrize("i,fn", CRITERIA, ids=[fn.__name__ for _, fn in CRITERIA])
def test_criterion(i, fn, capsys):
    res, ok, line = evaluate(i, fn)
    with capsys.disabled():
        print("\n" + line)
    assert res.passed, res.details
    assert ok, f"runtime {res.seconds:.2f}s over the limit"


if __name__ == "__main__":
    bad = 0
    for i, fn in CRITERIA:
        _, ok, line = evaluate(i, fn)
        print(line)
        bad += not ok
    sys.exit(1 if bad else 0)
