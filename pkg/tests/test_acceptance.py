"""Acceptance criteria 1-12, one test per criterion.

Each test prints a single ``criterion N name: PASS|FAIL`` line (shown even
under output capture) and asserts the result together with its time budget.
Run ``python tests/test_acceptance.py`` for the same lines without pytest.
"""
import sys

import pytest

from qsuper import acceptance

# seconds per criterion; ones without a stated budget get None
BUDGET = {1: 10, 2: 30, 4: 300, 5: 600, 6: 600, 7: 1200, 12: 300}


@pytest.fixture(scope="module")
def ctx():
    return acceptance.RunContext()


def _line(res):
    status = "PASS" if res.passed else "FAIL"
    return f"criterion {res.number:2d} {res.name}: {status}  {res.summary}  ({res.seconds:.1f}s)"


@pytest.mark.parametrize("number, name, fn", acceptance.CHECKS, ids=[c[1] for c in acceptance.CHECKS])
def test_criterion(ctx, capsys, number, name, fn):
    res = acceptance.run_check(fn, ctx, number, name)
    with capsys.disabled():
        print("\n" + _line(res))
    assert res.error is None, res.error
    assert res.passed, res.details
    limit = BUDGET.get(number)
    if limit is not None:
        assert res.seconds < limit, f"{name} took {res.seconds:.1f}s, budget {limit}s"


def main() -> int:
    ctx = acceptance.RunContext()
    ok = True
    for number, name, fn in acceptance.CHECKS:
        res = acceptance.run_check(fn, ctx, number, name)
        print(_line(res), flush=True)
        ok = ok and res.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
