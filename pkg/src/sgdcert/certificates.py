"""Closed-form high-probability bound curves for the scheduled SGD run.

Three curves, all pure functions of their parameters:

  last_iterate_bound   per-k bound, failure probability beta at each fixed k
  uniform_envelope     one bound holding for all k >= 1 simultaneously with
                       probability >= 1 - pi^2 beta / 6
  lower_bound_curve    the (1-alpha) log-log-n / n floor no method can beat
                       at infinitely many n

Natural logarithms throughout except the explicit base-2 log in the
envelope's doubling term. Noise scale sigma enters the upper bounds by the
exact change of variables x -> sigma * x, which multiplies the log(1/beta)
and smoothness terms by sigma^2 and leaves the initial-gap term alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .schedule import offset_for

_PI2_6 = math.pi**2 / 6.0
_LOG2 = math.log(2.0)


def _check_beta_unit(beta: float) -> None:
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")


def _check_beta_envelope(beta: float) -> None:
    if not 0.0 < beta < 6.0 / math.pi**2:
        raise ValueError(
            f"beta must lie in (0, 6/pi^2) = (0, {6.0 / math.pi ** 2:.5f}), got {beta}"
        )


def last_iterate_bound(mu, lip, initial_gap, beta, k, sigma: float = 1.0):
    """Per-k gap bound (16 mu sigma^2 log(1/beta) + mu^2 (B-1) gap0 + 16 lip sigma^2) / (mu^2 (k+B-1)).

    Valid at each fixed k >= 0 separately with failure probability beta.
    """
    _check_beta_unit(beta)
    if initial_gap < 0:
        raise ValueError("initial gap must be nonnegative")
    k = np.asarray(k, dtype=float)
    if (k < 0).any():
        raise ValueError("k must be nonnegative")
    B = offset_for(mu, lip)
    s2 = sigma * sigma
    numer = 16.0 * mu * s2 * math.log(1.0 / beta) + mu * mu * (B - 1.0) * initial_gap + 16.0 * lip * s2
    return (numer / (mu * mu * (k[()] + B - 1.0)))


def uniform_envelope(mu, lip, initial_gap, beta, k, sigma: float = 1.0):
    """Uniform-in-time gap bound, simultaneously valid for every k >= 1.

    value(k) = (16 mu s2 log((log2 k + 1)^2 / beta) + mu^2 (B-1) gap0
                + 16 (1 + log 2) lip s2) / (mu^2 (k + B - 1)),
    with coverage 1 - pi^2 beta / 6 over all k at once; beta in (0, 6/pi^2).
    """
    _check_beta_envelope(beta)
    if initial_gap < 0:
        raise ValueError("initial gap must be nonnegative")
    k = np.asarray(k, dtype=float)
    if (k < 1).any():
        raise ValueError("the envelope is defined for k >= 1")
    B = offset_for(mu, lip)
    s2 = sigma * sigma
    doubling = np.log((np.log2(k[()]) + 1.0) ** 2 / beta)
    numer = (
        16.0 * mu * s2 * doubling
        + mu * mu * (B - 1.0) * initial_gap
        + 16.0 * (1.0 + _LOG2) * lip * s2
    )
    return numer / (mu * mu * (k[()] + B - 1.0))


def coverage_of_beta(beta: float) -> float:
    """Simultaneous coverage 1 - pi^2 beta / 6 of the uniform envelope."""
    _check_beta_envelope(beta)
    return 1.0 - _PI2_6 * beta


def beta_for_coverage(target: float) -> float:
    """Envelope beta achieving the requested simultaneous coverage."""
    if not 0.0 < target < 1.0:
        raise ValueError("target coverage must lie in (0, 1)")
    return 6.0 * (1.0 - target) / math.pi**2


def lower_bound_curve(mu, sigma, alpha, n):
    """sigma^2 (1 - alpha) log log n / (48 mu n), defined for n >= 3.

    Any uniform-in-time rate with confidence 1 - alpha must exceed this at
    infinitely many n; at any fixed n the value carries no guarantee.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    n = np.asarray(n, dtype=float)
    if (n < 3).any():
        raise ValueError("the lower curve needs n >= 3 so log log n > 0")
    return sigma * sigma * (1.0 - alpha) * np.log(np.log(n[()])) / (48.0 * mu * n[()])


def prior_art_reference(beta, k, scale: float = 1.0):
    """Reference curve scale * log(k) * log(1/beta) / k for plot comparison only."""
    _check_beta_unit(beta)
    k = np.asarray(k, dtype=float)
    if (k < 2).any():
        raise ValueError("the reference curve is defined for k >= 2")
    return scale * np.log(k[()]) * math.log(1.0 / beta) / k[()]


CERTIFICATE_KINDS = ("last-iterate", "uniform-envelope", "lower-curve")


@dataclass(frozen=True, eq=False)
class Certificate:
    """An evaluated bound curve over a k-grid, with its parameters.

    values are at the oracle's noise scale sigma; unit_scale_values hold the
    same curve for the rescaled 1-sub-Gaussian problem (upper bounds only).
    """

    kind: str
    params: dict
    k: np.ndarray
    values: np.ndarray
    unit_scale_values: np.ndarray | None = None
    note: str = ""

    def __post_init__(self):
        if self.kind not in CERTIFICATE_KINDS:
            raise ValueError(f"unknown certificate kind {self.kind!r}")


def last_iterate_certificate(mu, lip, initial_gap, beta, k, sigma: float = 1.0) -> Certificate:
    k = np.atleast_1d(np.asarray(k, dtype=float))
    values = last_iterate_bound(mu, lip, initial_gap, beta, k, sigma)
    unit = last_iterate_bound(mu, lip, initial_gap / sigma**2, beta, k, 1.0)
    return Certificate(
        kind="last-iterate",
        params={"mu": mu, "lip": lip, "initial_gap": initial_gap, "beta": beta, "sigma": sigma},
        k=k,
        values=values,
        unit_scale_values=unit,
    )


def uniform_envelope_certificate(mu, lip, initial_gap, beta, k, sigma: float = 1.0) -> Certificate:
    k = np.atleast_1d(np.asarray(k, dtype=float))
    values = uniform_envelope(mu, lip, initial_gap, beta, k, sigma)
    unit = uniform_envelope(mu, lip, initial_gap / sigma**2, beta, k, 1.0)
    return Certificate(
        kind="uniform-envelope",
        params={
            "mu": mu,
            "lip": lip,
            "initial_gap": initial_gap,
            "beta": beta,
            "sigma": sigma,
            "coverage": coverage_of_beta(beta),
        },
        k=k,
        values=values,
        unit_scale_values=unit,
    )


def lower_curve_certificate(mu, sigma, alpha, n) -> Certificate:
    n = np.atleast_1d(np.asarray(n, dtype=float))
    return Certificate(
        kind="lower-curve",
        params={"mu": mu, "sigma": sigma, "alpha": alpha},
        k=n,
        values=lower_bound_curve(mu, sigma, alpha, n),
        note=(
            "asymptotic floor: guaranteed to be exceeded at infinitely many n; "
            "individual values carry no finite-n guarantee"
        ),
    )
