"""Bit recovery through optimization: the lower-bound construction.

A hidden bit string v is embedded into a scalar location theta(v) by a
Cantor-style map with base-3 gaps, a one-dimensional location problem is
built around it, and the scheduled SGD run plays the role of a sequential
tester: after n_k samples the k-th bit is read off by projecting the
current iterate back onto the codeword set. A uniform-in-time rate eps(.)
makes every bit correct simultaneously with the envelope's coverage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .certificates import uniform_envelope
from .engine import stream_batch
from .montecarlo import _run_chunks, binomial_se
from .problems import sampling_oracle, tester_problem
from .schedule import ScheduleSpec


@dataclass(frozen=True)
class BitSequence:
    """A finite 0/1 string, most significant position first."""

    bits: tuple

    def __post_init__(self):
        if len(self.bits) < 1:
            raise ValueError("need at least one bit")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")

    @property
    def depth(self) -> int:
        return len(self.bits)

    @classmethod
    def of(cls, bits) -> "BitSequence":
        if isinstance(bits, BitSequence):
            return bits
        if isinstance(bits, str):
            return cls(tuple(int(c) for c in bits))
        return cls(tuple(int(b) for b in bits))


def encode_theta(v) -> float:
    """theta(v) = 2 * sum_i v_i 3^-i, in [0, 1 - 3^-depth].

    Monotone in the lexicographic order of v; evaluated by a Horner sweep
    from the last bit for accuracy.
    """
    v = BitSequence.of(v)
    acc = 0.0
    for b in reversed(v.bits):
        acc = (acc + 2.0 * b) / 3.0
    return acc


def project_to_v(theta: float, depth: int) -> BitSequence:
    """Nearest depth-K codeword to theta (zero-completed candidates).

    Ties break toward the lexicographically smaller sequence. Computed with
    exact rational arithmetic, so it agrees with exhaustive search over all
    2^K candidates for any float input. Non-finite inputs are rejected;
    finite inputs are clamped to [0, 1] first.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    t = Fraction(min(max(theta, 0.0), 1.0))
    bits = []
    for level in range(depth, 0, -1):
        # midpoint between the top of the 0-branch and the bottom of the 1-branch
        boundary = Fraction(3**level - 1, 2 * 3**level)
        if t <= boundary:
            bits.append(0)
        else:
            bits.append(1)
            t -= Fraction(2, 3)
        t *= 3
    return BitSequence(tuple(bits))


def decoded_bit(theta_estimate: float, position: int) -> int:
    """Bit read at `position` from a location estimate: project at that depth."""
    return project_to_v(theta_estimate, position).bits[position - 1]


def kl_between(v, v_other, mu: float, sigma: float) -> float:
    """KL divergence mu^2 (theta(v) - theta(v'))^2 / (2 sigma^2) of the sample laws.

    When the first k positions agree the value is at most 9^-k mu^2 / (2 sigma^2).
    """
    v = BitSequence.of(v)
    v_other = BitSequence.of(v_other)
    if v.depth != v_other.depth:
        raise ValueError("sequences must have equal depth")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    diff = encode_theta(v) - encode_theta(v_other)
    return mu * mu * diff * diff / (2.0 * sigma * sigma)


class UnattainableThresholdError(ValueError):
    """The bound curve never drops below the decoding threshold within the cap."""


_HEAD_SCAN = 64


def schedule_nk(
    bound_curve: Callable[[int], float], mu: float, k: int, cap: int = 10**7
) -> int:
    """Smallest n with bound_curve(n) < (mu/8) * 9^-k.

    The curve head may be non-monotone, so the first 64 indices are scanned
    linearly; beyond that the curve must be nonincreasing and the search
    doubles then bisects. The returned n is verified two-sidedly:
    curve(n) < threshold <= curve(n - 1).
    """
    if k < 1:
        raise ValueError("bit position k must be >= 1")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    threshold = (mu / 8.0) * 9.0 ** (-k)
    for n in range(1, min(_HEAD_SCAN, cap) + 1):
        if bound_curve(n) < threshold:
            return n
    if cap <= _HEAD_SCAN:
        raise UnattainableThresholdError(
            f"bound curve stays >= {threshold!r} for all n <= cap {cap}"
        )
    lo = _HEAD_SCAN  # curve(lo) >= threshold
    hi = 2 * lo
    while bound_curve(hi) >= threshold:
        lo = hi
        hi *= 2
        if lo >= cap:
            raise UnattainableThresholdError(
                f"bound curve stays >= {threshold!r} for all n <= cap {cap}"
            )
    hi = min(hi, cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound_curve(mid) < threshold:
            hi = mid
        else:
            lo = mid
    if not (bound_curve(hi) < threshold <= bound_curve(hi - 1)):
        raise UnattainableThresholdError(
            f"search landed on n = {hi} but the two-sided check failed"
        )
    if hi > cap:
        raise UnattainableThresholdError(f"n_{k} = {hi} exceeds cap {cap}")
    return hi


@dataclass(frozen=True, eq=False)
class TestExperimentReport:
    """Per-trial decoding outcomes of the bit-recovery experiment."""

    bits_true: BitSequence
    theta: float
    beta: float
    alpha: float
    sample_schedule: tuple
    trials: int
    decoded: np.ndarray
    decode_distance: np.ndarray
    all_correct: np.ndarray
    aborted: int

    @property
    def all_correct_rate(self) -> float:
        return float(self.all_correct.mean())

    @property
    def se(self) -> float:
        return binomial_se(int(self.all_correct.sum()), self.trials)

    @property
    def coverage_target(self) -> float:
        return 1.0 - self.alpha

    @property
    def passed(self) -> bool:
        return self.all_correct_rate >= self.coverage_target - 3.0 * self.se


def run_test_experiment(
    v_true,
    mu: float,
    sigma: float,
    beta: float,
    trials: int,
    master_seed: int,
    cap: int = 10**6,
    x0: float = 0.0,
    workers: int | None = None,
) -> TestExperimentReport:
    """Recover every bit of v_true by running SGD on its location problem.

    The k-th bit is decoded after n_k steps, where n_k is the first time the
    uniform envelope (with this experiment's own parameters) drops below the
    base-3 separation threshold. All n_k are scheduled up front; if any
    exceeds the cap the experiment fails before running. Test confidence is
    equated with envelope coverage, alpha = pi^2 beta / 6.
    """
    v_true = BitSequence.of(v_true)
    if trials < 50:
        raise ValueError("need at least 50 trials")
    theta = encode_theta(v_true)
    problem = tester_problem(mu, theta)
    oracle = sampling_oracle(sigma, master_seed)
    sched = ScheduleSpec(mu, mu)
    initial_gap = problem.gap([x0])

    def eps(n: int) -> float:
        return float(uniform_envelope(mu, mu, initial_gap, beta, n, sigma=sigma))

    n_schedule = tuple(
        schedule_nk(eps, mu, k, cap=cap) for k in range(1, v_true.depth + 1)
    )
    horizon = n_schedule[-1]
    decode_at = {n: i for i, n in enumerate(n_schedule)}
    depth = v_true.depth

    def work(chunk):
        m = len(chunk)
        x_rec = np.zeros((m, depth))
        ok_rec = np.ones((m, depth), dtype=bool)
        alive = None
        for state in stream_batch(problem, oracle, sched, [x0], horizon, chunk):
            if state.k in decode_at:
                # one decode step can serve several positions when n_k collide
                for pos in range(depth):
                    if n_schedule[pos] == state.k:
                        x_rec[:, pos] = state.x[:, 0]
                        ok_rec[:, pos] = state.alive
            alive = state.alive
        return x_rec, ok_rec, ~alive

    parts = _run_chunks(work, trials, workers)
    x_rec = np.concatenate([p[0] for p in parts])
    ok_rec = np.concatenate([p[1] for p in parts])
    aborted = np.concatenate([p[2] for p in parts])

    decoded = np.zeros((trials, depth), dtype=int)
    distance = np.full((trials, depth), np.inf)
    for i in range(trials):
        for pos in range(depth):
            if ok_rec[i, pos]:
                decoded[i, pos] = decoded_bit(float(x_rec[i, pos]), pos + 1)
                distance[i, pos] = abs(float(x_rec[i, pos]) - theta)
    truth = np.asarray(v_true.bits, dtype=int)
    all_correct = (decoded == truth).all(axis=1) & ok_rec.all(axis=1) & ~aborted

    return TestExperimentReport(
        bits_true=v_true,
        theta=theta,
        beta=beta,
        alpha=math.pi**2 * beta / 6.0,
        sample_schedule=n_schedule,
        trials=trials,
        decoded=decoded,
        decode_distance=distance,
        all_correct=all_correct,
        aborted=int(aborted.sum()),
    )
