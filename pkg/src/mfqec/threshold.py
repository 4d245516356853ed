"""Physical-error-rate sweeps and threshold (identity-crossing) estimation.

A sweep runs the time-to-failure Monte Carlo at each point of a grid of
physical error rates ``p`` and records the logical error rate ``p_log``
per point.  The threshold is the rate at which the ``p_log(p)`` curve
crosses the identity line ``p_log = p``: below it the code suppresses
errors, above it encoding makes things worse.  The crossing is located
by log-log linear interpolation between the bracketing grid points, and
its uncertainty is estimated by bootstrap-resampling each point's
failure times and re-locating the crossing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .codes import CodeSpec
from .circuits import Variant
from .montecarlo import AllCensored, estimate_logical_error_rate

__all__ = [
    "SweepPoint",
    "ThresholdEstimate",
    "NoCrossing",
    "sweep_physical_error_rates",
    "sweep_point",
    "find_threshold_crossing",
]


class NoCrossing(RuntimeError):
    """The p_log(p) curve never crosses the identity line on this grid."""


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a p_log(p) curve.

    ``p_log`` (and the CI bounds and ``mean_cycles``) are NaN when every
    trial at this point was censored: the point then carries no rate
    information but keeps its place in the grid.  ``failure_cycles``
    holds the raw uncensored cycles-to-failure so the threshold bootstrap
    can resample them; it may be empty for points reloaded from a CSV, in
    which case the bootstrap holds the point fixed at its ``p_log``.
    """

    p: float
    p_log: float
    ci_low: float
    ci_high: float
    n_trials: int
    n_censored: int
    n_failures: int
    mean_cycles: float
    failure_cycles: tuple = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.p < 1.0):
            raise ValueError(f"p must be in (0, 1), got {self.p}")
        if math.isfinite(self.p_log) and not (
            self.ci_low <= self.p_log <= self.ci_high
        ):
            raise ValueError(
                f"CI [{self.ci_low}, {self.ci_high}] does not contain "
                f"p_log={self.p_log}"
            )

    @property
    def all_censored(self) -> bool:
        return self.n_failures == 0


@dataclass(frozen=True)
class ThresholdEstimate:
    """Crossing of p_log(p) with the identity line.

    ``bracket`` is the pair of adjacent grid values between which the
    sign of log(p_log) - log(p) changes; ``ci`` is a bootstrap
    percentile interval for the crossing.
    """

    p_th: float
    bracket: tuple
    ci: tuple

    def __post_init__(self) -> None:
        lo, hi = self.bracket
        if not (lo <= self.p_th <= hi):
            raise ValueError(
                f"p_th={self.p_th} outside bracket [{lo}, {hi}]"
            )


def sweep_physical_error_rates(
    code: CodeSpec,
    variant: Variant,
    p_grid: Sequence[float],
    trials_per_point: int,
    master_seed: int,
    *,
    max_cycles: int = 10_000_000,
    workers: int = 1,
    engine: str = "tableau",
    progress: Optional[Callable[[str], None]] = None,
) -> list:
    """One SweepPoint per grid value, deterministic given master_seed.

    Points are seeded by (master_seed, grid index), so a point's trials
    do not depend on the rest of the grid.  A point where every trial is
    censored is returned with NaN rates rather than aborting the sweep.
    """
    grid = [float(p) for p in p_grid]
    for p in grid:
        if not (0.0 < p < 1.0):
            raise ValueError(f"p_grid values must be in (0, 1), got {p}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"p_grid must be strictly increasing, got {grid}")

    points = []
    for index, p in enumerate(grid):
        if progress is not None:
            progress(
                f"point {index + 1}/{len(grid)}: {code.name} "
                f"{variant.value} p={p:g} ({trials_per_point} trials)"
            )
        points.append(
            sweep_point(
                code,
                variant,
                p,
                trials_per_point,
                master_seed,
                index,
                max_cycles=max_cycles,
                workers=workers,
                engine=engine,
                progress=progress,
            )
        )
    return points


def sweep_point(
    code: CodeSpec,
    variant: Variant,
    p: float,
    trials_per_point: int,
    master_seed: int,
    index: int,
    *,
    max_cycles: int = 10_000_000,
    workers: int = 1,
    engine: str = "tableau",
    progress: Optional[Callable[[str], None]] = None,
) -> SweepPoint:
    """One grid point, seeded by (master_seed, index) exactly as
    sweep_physical_error_rates seeds the point at that grid position."""
    trial_progress = None
    if progress is not None:
        trial_progress = lambda done, total: progress(  # noqa: E731
            f"  {done}/{total} trials"
        )
    try:
        est = estimate_logical_error_rate(
            code,
            variant,
            p,
            trials_per_point,
            master_seed,
            max_cycles=max_cycles,
            point_index=index,
            workers=workers,
            engine=engine,
            progress=trial_progress,
        )
    except AllCensored:
        return SweepPoint(
            p=p,
            p_log=math.nan,
            ci_low=math.nan,
            ci_high=math.nan,
            n_trials=trials_per_point,
            n_censored=trials_per_point,
            n_failures=0,
            mean_cycles=math.nan,
        )
    return SweepPoint(
        p=p,
        p_log=est.p_log,
        ci_low=est.ci_low,
        ci_high=est.ci_high,
        n_trials=est.n_trials,
        n_censored=est.n_censored,
        n_failures=est.n_failures,
        mean_cycles=est.mean_cycles,
        failure_cycles=est.failure_cycles,
    )


def _crossing_from_curve(ps: np.ndarray, p_logs: np.ndarray):
    """Crossing of a discrete curve with the identity line.

    Returns (p_th, bracket) or None when the curve stays on one side.
    The crossing is the first grid interval where d = log(p_log) -
    log(p) changes from negative to non-negative; within it p_th is the
    log-log linear interpolant.  A grid point with d exactly zero is
    itself the crossing.
    """
    d = np.log(p_logs) - np.log(ps)
    for i in range(len(ps)):
        if d[i] == 0.0:
            lo = ps[i - 1] if i > 0 else ps[i]
            hi = ps[i + 1] if i + 1 < len(ps) else ps[i]
            return float(ps[i]), (float(lo), float(hi))
    for i in range(len(ps) - 1):
        if d[i] < 0.0 < d[i + 1]:
            t = -d[i] / (d[i + 1] - d[i])
            log_pth = math.log(ps[i]) + t * (math.log(ps[i + 1]) - math.log(ps[i]))
            return math.exp(log_pth), (float(ps[i]), float(ps[i + 1]))
    return None


def find_threshold_crossing(
    points: Sequence[SweepPoint],
    *,
    n_bootstrap: int = 1000,
    seed: int = 0,
) -> ThresholdEstimate:
    """Locate p_th where p_log(p) crosses the identity line.

    Censored-only points (NaN p_log) are ignored.  The bootstrap
    resamples each remaining point's failure times with replacement,
    recomputes p_log = 1/mean, and re-locates the crossing; resamples
    whose curve fails to cross are dropped.  Points lacking raw failure
    times are held fixed at their point estimate.  Raises NoCrossing
    when the observed curve does not cross the identity line.
    """
    usable = [
        pt
        for pt in sorted(points, key=lambda pt: pt.p)
        if math.isfinite(pt.p_log) and pt.p_log > 0.0
    ]
    if len(usable) < 2:
        raise NoCrossing(
            f"need at least 2 points with estimated rates, got {len(usable)}"
        )
    ps = np.array([pt.p for pt in usable])
    p_logs = np.array([pt.p_log for pt in usable])

    observed = _crossing_from_curve(ps, p_logs)
    if observed is None:
        side = "below" if np.all(p_logs < ps) else "above or astride"
        raise NoCrossing(
            f"curve does not cross the identity line on [{ps[0]:g}, "
            f"{ps[-1]:g}] (p_log stays {side} p)"
        )
    p_th, bracket = observed

    rng = np.random.default_rng(seed)
    cycles = [
        np.asarray(pt.failure_cycles, dtype=np.float64) for pt in usable
    ]
    boot = []
    for _ in range(n_bootstrap):
        resampled = np.empty_like(p_logs)
        for j, c in enumerate(cycles):
            if c.size == 0:
                resampled[j] = p_logs[j]
            else:
                resampled[j] = 1.0 / c[
                    rng.integers(0, c.size, size=c.size)
                ].mean()
        hit = _crossing_from_curve(ps, resampled)
        if hit is not None:
            boot.append(hit[0])
    if boot:
        ci = tuple(float(v) for v in np.percentile(boot, [2.5, 97.5]))
    else:
        ci = bracket
    return ThresholdEstimate(p_th=p_th, bracket=bracket, ci=ci)
