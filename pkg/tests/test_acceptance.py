"""Acceptance criteria, one test and one printed PASS/FAIL line each."""
import subprocess
import sys
import time

import pytest

from esfkit import validation


@pytest.mark.slow
@pytest.mark.parametrize("criterion", validation.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion, capsys):
    result = validation.run_criterion(criterion)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail


@pytest.mark.slow
def test_criterion_13_validate_command(capsys):
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "esfkit", "validate"], capture_output=True, text=True, timeout=900)
    elapsed = time.perf_counter() - start
    passed = proc.returncode == 0 and elapsed < 600
    with capsys.disabled():
        print(f"\n[{'PASS' if passed else 'FAIL'}] 13 validate command: exit {proc.returncode} in {elapsed:.1f}s")
    assert passed, proc.stderr[-2000:]
