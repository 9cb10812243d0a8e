"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line. Run the file
directly (``python tests/test_acceptance.py``) for just those lines.
"""

import sys

import pytest

from traverse_lab.acceptance import CRITERIA, Context, graze_sensitivity, run_all


def _report(check, capsys):
    with capsys.disabled():
        print("\n" + check.line())
    return check


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda n: f"criterion-{n}")
def test_criterion(number, ctx, capsys):
    check = _report(CRITERIA[number](ctx), capsys)
    assert check.passed, check.detail
    assert check.ok, f"over time budget: {check.seconds:.1f} s > {check.budget} s"


def test_graze_probe(ctx, capsys):
    check = _report(graze_sensitivity(ctx), capsys)
    assert check.ok, check.detail


def test_graze_probe_detects_inflated_tolerance(ctx):
    assert not graze_sensitivity(ctx, graze_scale=1e4).passed


if __name__ == "__main__":
    checks = run_all(ctx=Context(seed=0))
    for c in checks:
        print(c.line())
    sys.exit(0 if all(c.ok for c in checks) else 1)
