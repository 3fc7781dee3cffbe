"""Monte Carlo validation of the certificate curves.

Runs many independent trajectories, counts how often the recorded gap
crosses a bound curve, and reports the violation rate with its binomial
standard error. The guarantees are one-sided, so the pass criterion is
rate <= nominal + 3 standard errors.

Trials are processed in fixed-size chunks; a worker pool parallelizes over
chunks and results are merged in chunk order, so output is bitwise
independent of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .certificates import last_iterate_bound, uniform_envelope
from .engine import Trajectory, stream_batch
from .problems import OracleModel, ProblemSpec
from .schedule import ScheduleSpec
from .streams import StreamId

# Trials per chunk; fixed so results never depend on the worker count.
TRIAL_CHUNK = 256

DEFAULT_PROBES = (10, 100, 1_000, 10_000)


def binomial_se(count: int, n: int) -> float:
    """Standard error sqrt(p(1-p)/n) of an empirical rate."""
    p = count / n
    return math.sqrt(p * (1.0 - p) / n)


@dataclass(frozen=True, eq=False)
class TrialSummary:
    """Violation counts and sup-statistics aggregated over independent trials."""

    trials: int
    horizon: int
    beta: float
    nominal_rate: float
    aborted: int
    violations_uniform: int | None = None
    violated_uniform: np.ndarray | None = None
    sup_stats: np.ndarray | None = None
    violations_last: dict | None = None
    violated_last: dict | None = None
    bounds_last: dict | None = None
    gap_probe_ks: np.ndarray | None = None
    gap_probe_values: np.ndarray | None = None

    @property
    def uniform_rate(self) -> float:
        return self.violations_uniform / self.trials

    @property
    def uniform_se(self) -> float:
        return binomial_se(self.violations_uniform, self.trials)

    @property
    def uniform_pass(self) -> bool:
        return self.uniform_rate <= self.nominal_rate + 3.0 * self.uniform_se

    def last_rate(self, k: int) -> float:
        return self.violations_last[k] / self.trials

    def last_se(self, k: int) -> float:
        return binomial_se(self.violations_last[k], self.trials)

    @property
    def last_pass(self) -> bool:
        return all(
            self.last_rate(k) <= self.nominal_rate + 3.0 * self.last_se(k)
            for k in self.violations_last
        )


def _rebase(oracle: OracleModel, master_seed) -> OracleModel:
    if master_seed is None:
        return oracle
    return replace(oracle, stream=StreamId(int(master_seed), 0))


def _chunks(trials: int):
    return [
        range(lo, min(lo + TRIAL_CHUNK, trials)) for lo in range(0, trials, TRIAL_CHUNK)
    ]


def _run_chunks(worker, trials: int, workers: int | None):
    chunks = _chunks(trials)
    if workers is not None and workers < 1:
        raise ValueError("workers must be at least 1")
    if workers == 1 or len(chunks) == 1:
        return [worker(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, chunks))


def estimate_uniform_violation(
    problem: ProblemSpec,
    oracle: OracleModel,
    sched: ScheduleSpec,
    x0,
    beta: float,
    horizon: int,
    trials: int,
    master_seed=None,
    workers: int | None = None,
    initial_gap=None,
    bound_scale: float = 1.0,
    gap_probe_ks: Sequence[int] = (),
) -> TrialSummary:
    """Estimate how often a trajectory ever exceeds the uniform envelope.

    A trial violates iff gap_k > envelope(k) for any k in [1, horizon];
    aborted trials are counted as violations. Also records each trial's
    sup_{3 <= k} gap_k (k + B - 1) / log log k and, optionally, the gap at
    probe indices for plotting.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    oracle = _rebase(oracle, master_seed)
    gap0 = problem.gap(x0) if initial_gap is None else float(initial_gap)
    ks = np.arange(1, horizon + 1)
    env = bound_scale * uniform_envelope(
        sched.mu, sched.lip, gap0, beta, ks, sigma=oracle.sigma
    )
    sup_weight = np.zeros(horizon + 1)
    if horizon >= 3:
        kk = np.arange(3, horizon + 1, dtype=float)
        sup_weight[3:] = (kk + sched.offset - 1.0) / np.log(np.log(kk))
    probe_ks = np.asarray(sorted(set(int(k) for k in gap_probe_ks)), dtype=int)
    if probe_ks.size and (probe_ks.min() < 0 or probe_ks.max() > horizon):
        raise ValueError("gap probes must lie in [0, horizon]")

    def work(chunk):
        m = len(chunk)
        violated = np.zeros(m, dtype=bool)
        sup = np.zeros(m)
        probe_gap = np.zeros((m, probe_ks.size))
        probe_pos = {int(k): i for i, k in enumerate(probe_ks)}
        alive = None
        for state in stream_batch(problem, oracle, sched, x0, horizon, chunk):
            k = state.k
            if k >= 1:
                violated |= state.gap > env[k - 1]
            if k >= 3:
                np.maximum(sup, state.gap * sup_weight[k], out=sup)
            if k in probe_pos:
                probe_gap[:, probe_pos[k]] = state.gap
            alive = state.alive
        return violated, sup, ~alive, probe_gap

    parts = _run_chunks(work, trials, workers)
    violated = np.concatenate([p[0] for p in parts])
    sup = np.concatenate([p[1] for p in parts])
    aborted = np.concatenate([p[2] for p in parts])
    probe_gap = np.concatenate([p[3] for p in parts])
    return TrialSummary(
        trials=trials,
        horizon=horizon,
        beta=beta,
        nominal_rate=math.pi**2 * beta / 6.0,
        aborted=int(aborted.sum()),
        violations_uniform=int(violated.sum()),
        violated_uniform=violated,
        sup_stats=sup,
        gap_probe_ks=probe_ks if probe_ks.size else None,
        gap_probe_values=probe_gap if probe_ks.size else None,
    )


def estimate_last_iterate_violation(
    problem: ProblemSpec,
    oracle: OracleModel,
    sched: ScheduleSpec,
    x0,
    beta: float,
    probes: Sequence[int],
    trials: int,
    master_seed=None,
    workers: int | None = None,
    initial_gap=None,
    bound_scale: float = 1.0,
) -> TrialSummary:
    """Estimate the per-k violation rate of the last-iterate bound at each probe."""
    probes = sorted(set(int(k) for k in probes))
    if not probes:
        raise ValueError("need at least one probe index")
    if probes[0] < 1:
        raise ValueError("probe indices must be >= 1")
    if trials < 1:
        raise ValueError("need at least one trial")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    oracle = _rebase(oracle, master_seed)
    gap0 = problem.gap(x0) if initial_gap is None else float(initial_gap)
    horizon = probes[-1]
    bounds = {
        k: bound_scale
        * float(last_iterate_bound(sched.mu, sched.lip, gap0, beta, k, sigma=oracle.sigma))
        for k in probes
    }

    def work(chunk):
        m = len(chunk)
        violated = {k: np.zeros(m, dtype=bool) for k in probes}
        alive = None
        for state in stream_batch(problem, oracle, sched, x0, horizon, chunk):
            if state.k in violated:
                violated[state.k] |= state.gap > bounds[state.k]
            alive = state.alive
        return violated, ~alive

    parts = _run_chunks(work, trials, workers)
    violated = {k: np.concatenate([p[0][k] for p in parts]) for k in probes}
    aborted = np.concatenate([p[1] for p in parts])
    # an aborted trial never produced valid probe gaps: count it everywhere
    for k in probes:
        violated[k] |= aborted
    return TrialSummary(
        trials=trials,
        horizon=horizon,
        beta=beta,
        nominal_rate=beta,
        aborted=int(aborted.sum()),
        violations_last={k: int(v.sum()) for k, v in violated.items()},
        violated_last=violated,
        bounds_last=bounds,
    )


def sup_statistic_profile(traj: Trajectory, offset: float):
    """Running sup of gap_k (k + B - 1) / log log k at log-spaced horizons.

    Returns (horizons, sups); nondecreasing by construction. Needs at least
    three recorded steps so log log k is positive.
    """
    if traj.steps < 3:
        raise ValueError("profile needs a horizon of at least 3")
    k = np.arange(3, traj.steps + 1, dtype=float)
    stat = traj.gap[3:] * (k + offset - 1.0) / np.log(np.log(k))
    running = np.maximum.accumulate(stat)
    horizons = np.unique(
        np.round(np.logspace(np.log10(3), np.log10(traj.steps), 60)).astype(int)
    )
    return horizons, running[horizons - 3]


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit of log gap = intercept + slope * log k."""

    intercept: float
    slope: float
    residual_norm: float
    points: int


def fit_rate(traj: Trajectory, k_min: int) -> RateFit:
    """Fit the empirical decay exponent of the gap over k >= k_min.

    Uses only strictly positive gaps; a noisy strongly convex run should
    give a slope near -1.
    """
    k = np.arange(max(k_min, 1), traj.steps + 1)
    gap = traj.gap[k]
    usable = gap > 0
    if int(usable.sum()) == 0:
        raise ValueError("all gaps are zero; the decay rate is degenerate")
    if int(usable.sum()) < 10:
        raise ValueError("need at least 10 non-zero gaps to fit a rate")
    logk = np.log(k[usable])
    logg = np.log(gap[usable])
    design = np.column_stack([np.ones(logk.size), logk])
    coef, *_ = np.linalg.lstsq(design, logg, rcond=None)
    resid = logg - design @ coef
    return RateFit(
        intercept=float(coef[0]),
        slope=float(coef[1]),
        residual_norm=float(np.linalg.norm(resid)),
        points=int(usable.sum()),
    )
