"""Threshold-estimation tests.

The crossing finder is exercised on synthetic curves where the answer is
known in closed form: for p_log = p^2 / p0 the difference of logs is
linear in log p, so log-log interpolation recovers p0 exactly, on any
grid that brackets it.
"""

import math

import numpy as np
import pytest

from mfqec.circuits import Variant
from mfqec.codes import BIT_FLIP_CODE
from mfqec.threshold import (
    NoCrossing,
    SweepPoint,
    ThresholdEstimate,
    find_threshold_crossing,
    sweep_physical_error_rates,
    sweep_point,
)


def _point(p, p_log, failure_cycles=()):
    return SweepPoint(
        p=p,
        p_log=p_log,
        ci_low=p_log,
        ci_high=p_log,
        n_trials=100,
        n_censored=0,
        n_failures=100,
        mean_cycles=1.0 / p_log,
        failure_cycles=failure_cycles,
    )


def _quadratic_curve(p0, grid):
    return [_point(p, p * p / p0) for p in grid]


# ---------------------------------------------------------------------------
# dataclass validation
# ---------------------------------------------------------------------------


def test_sweep_point_validation():
    with pytest.raises(ValueError, match="p must be"):
        _point(0.0, 0.1)
    with pytest.raises(ValueError, match="p must be"):
        _point(1.0, 0.1)
    with pytest.raises(ValueError, match="does not contain"):
        SweepPoint(
            p=0.1, p_log=0.5, ci_low=0.1, ci_high=0.2,
            n_trials=1, n_censored=0, n_failures=1, mean_cycles=2.0,
        )
    # NaN rates (all-censored points) skip the containment check
    nan_point = SweepPoint(
        p=0.1, p_log=math.nan, ci_low=math.nan, ci_high=math.nan,
        n_trials=5, n_censored=5, n_failures=0, mean_cycles=math.nan,
    )
    assert nan_point.all_censored
    assert not _point(0.1, 0.05).all_censored


def test_threshold_estimate_validation():
    ThresholdEstimate(p_th=0.02, bracket=(0.01, 0.03), ci=(0.015, 0.025))
    with pytest.raises(ValueError, match="outside bracket"):
        ThresholdEstimate(p_th=0.05, bracket=(0.01, 0.03), ci=(0.0, 1.0))


# ---------------------------------------------------------------------------
# crossing finder on synthetic curves
# ---------------------------------------------------------------------------


def test_quadratic_curve_crossing_is_exact():
    p0 = 0.013
    grid = np.geomspace(p0 / 5, p0 * 5, 9)
    est = find_threshold_crossing(_quadratic_curve(p0, grid), n_bootstrap=50)
    assert est.p_th == pytest.approx(p0, rel=1e-12)
    assert est.bracket[0] < p0 < est.bracket[1]
    # fixed points bootstrap to the same crossing every time
    assert est.ci == (est.p_th, est.p_th)


def test_crossing_is_grid_independent_for_loglinear_curves():
    p0 = 3.7e-4
    coarse = np.geomspace(p0 / 4, p0 * 4, 5)
    fine = np.geomspace(p0 / 3, p0 * 3, 21)
    a = find_threshold_crossing(_quadratic_curve(p0, coarse), n_bootstrap=10)
    b = find_threshold_crossing(_quadratic_curve(p0, fine), n_bootstrap=10)
    assert a.p_th == pytest.approx(p0, rel=1e-12)
    assert b.p_th == pytest.approx(p0, rel=1e-12)


def test_exact_grid_point_crossing():
    points = [
        _point(0.01, 0.002),
        _point(0.02, 0.02),  # exactly on the identity line
        _point(0.04, 0.09),
    ]
    est = find_threshold_crossing(points, n_bootstrap=10)
    assert est.p_th == 0.02
    assert est.bracket == (0.01, 0.04)


def test_unsorted_and_censored_points_are_handled():
    p0 = 0.013
    grid = np.geomspace(p0 / 5, p0 * 5, 9)
    points = _quadratic_curve(p0, grid)
    reference = find_threshold_crossing(points, n_bootstrap=10).p_th
    nan_extra = SweepPoint(
        p=1e-5, p_log=math.nan, ci_low=math.nan, ci_high=math.nan,
        n_trials=5, n_censored=5, n_failures=0, mean_cycles=math.nan,
    )
    shuffled = [points[4], nan_extra, *points[5:], *points[:4]]
    est = find_threshold_crossing(shuffled, n_bootstrap=10)
    assert est.p_th == pytest.approx(reference, rel=1e-15)


def test_no_crossing_below():
    p0 = 0.1
    grid = np.geomspace(1e-4, 1e-2, 6)  # far below the crossing
    with pytest.raises(NoCrossing, match="stays below"):
        find_threshold_crossing(_quadratic_curve(p0, grid), n_bootstrap=10)


def test_no_crossing_above():
    points = [_point(p, min(0.9, 3 * p)) for p in (0.01, 0.03, 0.09)]
    with pytest.raises(NoCrossing, match="above or astride"):
        find_threshold_crossing(points, n_bootstrap=10)


def test_no_crossing_needs_two_points():
    with pytest.raises(NoCrossing, match="at least 2"):
        find_threshold_crossing([_point(0.01, 0.005)])
    nan_points = [
        SweepPoint(
            p=p, p_log=math.nan, ci_low=math.nan, ci_high=math.nan,
            n_trials=5, n_censored=5, n_failures=0, mean_cycles=math.nan,
        )
        for p in (0.01, 0.02, 0.04)
    ]
    with pytest.raises(NoCrossing, match="at least 2"):
        find_threshold_crossing(nan_points)


def test_bootstrap_ci_from_failure_cycles():
    rng = np.random.default_rng(8)
    p0 = 0.02
    points = []
    for p in np.geomspace(p0 / 4, p0 * 4, 7):
        p_log_true = p * p / p0
        cycles = rng.geometric(p_log_true, size=400)
        p_log = 1.0 / cycles.mean()
        points.append(_point(float(p), float(p_log), tuple(cycles)))
    est1 = find_threshold_crossing(points, n_bootstrap=300, seed=5)
    est2 = find_threshold_crossing(points, n_bootstrap=300, seed=5)
    est3 = find_threshold_crossing(points, n_bootstrap=300, seed=6)
    assert est1 == est2  # seeded bootstrap is reproducible
    assert est1.ci != est3.ci  # and actually depends on the seed
    lo, hi = est1.ci
    assert lo < hi
    assert lo < est1.p_th < hi
    # with 400 samples per point the crossing lands near the true value
    assert est1.p_th == pytest.approx(p0, rel=0.25)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def test_sweep_grid_validation():
    for bad in ([0.0, 0.1], [0.1, 1.0], [-0.2]):
        with pytest.raises(ValueError, match="in \\(0, 1\\)"):
            sweep_physical_error_rates(
                BIT_FLIP_CODE, Variant.SIMPLIFIED, bad, 5, 1
            )
    for bad in ([0.2, 0.1], [0.1, 0.1]):
        with pytest.raises(ValueError, match="strictly increasing"):
            sweep_physical_error_rates(
                BIT_FLIP_CODE, Variant.SIMPLIFIED, bad, 5, 1
            )


def test_sweep_end_to_end_and_point_independence():
    grid = [0.02, 0.05]
    kwargs = dict(max_cycles=100_000, engine="frame")
    points = sweep_physical_error_rates(
        BIT_FLIP_CODE, Variant.SIMPLIFIED, grid, 40, 3, **kwargs
    )
    again = sweep_physical_error_rates(
        BIT_FLIP_CODE, Variant.SIMPLIFIED, grid, 40, 3, **kwargs
    )
    assert points == again
    assert [pt.p for pt in points] == grid
    for index, pt in enumerate(points):
        assert pt.n_trials == 40
        assert pt.n_failures == len(pt.failure_cycles) > 0
        assert pt.ci_low <= pt.p_log <= pt.ci_high
        # a point's trials depend only on (master_seed, its own index)
        solo = sweep_point(
            BIT_FLIP_CODE, Variant.SIMPLIFIED, pt.p, 40, 3, index, **kwargs
        )
        assert solo == pt
    # more noise fails faster
    assert points[0].mean_cycles > points[1].mean_cycles


def test_sweep_progress_messages():
    messages = []
    sweep_physical_error_rates(
        BIT_FLIP_CODE, Variant.SIMPLIFIED, [0.05], 40, 3,
        max_cycles=100_000, engine="frame", progress=messages.append,
    )
    assert any(m.startswith("point 1/1") for m in messages)
    assert any(m.strip() == "40/40 trials" for m in messages)


def test_sweep_point_all_censored_is_nan():
    pt = sweep_point(
        BIT_FLIP_CODE, Variant.SIMPLIFIED, 1e-7, 5, 3, 0,
        max_cycles=5, engine="frame",
    )
    assert pt.all_censored
    assert pt.n_trials == pt.n_censored == 5
    assert math.isnan(pt.p_log) and math.isnan(pt.mean_cycles)
    assert pt.failure_cycles == ()
