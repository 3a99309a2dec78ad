import time

import numpy as np
import pytest

from grouse.checks import (
    PropertyResult,
    SUITES,
    greedy_optimality,
    verify,
)


def test_quick_suite_passes_within_time_budget():
    started = time.perf_counter()
    report = verify(suite="all", seed=0, intensity="quick")
    elapsed = time.perf_counter() - started
    failed = [r.line() for r in report.results if not r.passed]
    assert report.passed, f"failing properties: {failed}"
    assert elapsed < 60.0
    assert len(report.results) == 23


def test_quick_suite_other_seed():
    report = verify(suite="step", seed=20260809, intensity="quick")
    assert report.passed


def test_suite_selection():
    report = verify(suite="metrics", seed=1, intensity="quick")
    assert {r.suite for r in report.results} == {"metrics"}
    with pytest.raises(ValueError):
        verify(suite="nonsense")
    with pytest.raises(ValueError):
        verify(intensity="medium")
    assert SUITES == ("metrics", "step", "data", "rates")


def test_corrupted_step_angle_fails_greedy_optimality():
    """Negative control: mis-scaling the applied angle must trip the property."""
    rng = np.random.default_rng(0)
    honest = greedy_optimality(rng, 100, theta_scale=1.0)
    assert honest.passed
    rng = np.random.default_rng(0)
    corrupted = greedy_optimality(rng, 100, theta_scale=1.5)
    assert not corrupted.passed
    assert corrupted.measured > 0


def test_property_result_line_format():
    result = PropertyResult(name="x", suite="s", measured=1.0, tolerated=2.0,
                            passed=True, detail="note")
    assert result.line().startswith("PASS s/x: measured=")
    assert "note" in result.line()
    bad = PropertyResult(name="x", suite="s", measured=3.0, tolerated=2.0, passed=False)
    assert bad.line().startswith("FAIL ")


def test_report_failure_accounting():
    report = verify(suite="metrics", seed=2, intensity="quick")
    assert report.failed_names == []
    assert report.runtime_s > 0
