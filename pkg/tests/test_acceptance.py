"""Acceptance criteria at their pinned trial counts and tolerances.

Each test prints one ``[PASS]``/``[FAIL]``/``[XFAIL]`` line.  Set
``QSDC_WORKERS`` to spread the Monte Carlo criteria over processes.
"""

import os

import pytest

from qsdc.acceptance import CRITERIA

WORKERS = int(os.environ.get("QSDC_WORKERS", "1"))


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number, capsys):
    res = CRITERIA[number](scale=1.0, workers=WORKERS)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
