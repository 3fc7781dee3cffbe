"""Step-size schedule eta_k = 4 / (mu (k + B)) with B = max(4 L / mu, 3).

Alongside the step sizes this module evaluates the exponential-moment
parameter sequence t_k = mu (k - 1 + B) / 16 and the closed-form telescoping
products that make the certificate constants exact:

    prod_{i=0}^{k} (1 - mu eta_i / 2) = (B - 2)(B - 1) / ((k + B - 1)(k + B))

Everything here is a pure function of the immutable spec.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def offset_for(mu: float, lip: float) -> float:
    """The schedule offset B = max(4 lip / mu, 3), kept as an exact real."""
    return max(4.0 * lip / mu, 3.0)


@dataclass(frozen=True)
class ScheduleSpec:
    """Curvature pair (mu, lip) and the derived step-size offset.

    Requires lip >= mu > 0; for such pairs the offset is 4 lip / mu >= 4, so
    eta_k <= 1/lip holds from the first step and the B = 3 branch of the
    definition is never taken.
    """

    mu: float
    lip: float
    offset: float = field(init=False)

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.lip < self.mu:
            raise ValueError("need lip >= mu")
        object.__setattr__(self, "offset", offset_for(self.mu, self.lip))

    def step_size(self, k) -> float | np.ndarray:
        """eta_k = 4 / (mu (k + B)), strictly decreasing, <= 1/lip for all k >= 0."""
        k = _nonneg(k, "k")
        return 4.0 / (self.mu * (k + self.offset))

    def mgf_parameter(self, k) -> float | np.ndarray:
        """t_k = mu (k - 1 + B) / 16 for k >= 1.

        Satisfies 2 (t_{k+1} - t_k) - mu t_{k+1} eta_k = mu/8 - mu/4 < 0 and
        t_{k+1} eta_k = 1/4 for every k.
        """
        k = np.asarray(k)
        if (k < 1).any():
            raise ValueError("mgf parameter is defined for k >= 1")
        return self.mu * (k[()] - 1.0 + self.offset) / 16.0

    def contraction_product(self, k) -> float | np.ndarray:
        """prod_{i=0}^{k} (1 - mu eta_i / 2), via the exact closed form."""
        k = _nonneg(k, "k")
        return contraction_product_from_offset(self.offset, k)

    def tail_contraction(self, j, k) -> float | np.ndarray:
        """prod_{i=j+1}^{k} (1 - mu eta_i / 2) for 0 <= j <= k (empty product at j = k)."""
        j = np.asarray(j)
        k = np.asarray(k)
        if (j < 0).any() or (j > k).any():
            raise ValueError("need 0 <= j <= k")
        B = self.offset
        return ((j + B - 1.0) * (j + B)) / ((k + B - 1.0) * (k + B))

    def weighted_tail(self, j, k) -> float | np.ndarray:
        """t_{k+1} * eta_j * tail_contraction(j, k), equal to (j+B-1)/(4(k+B-1)) <= 1/4."""
        j = np.asarray(j)
        k = np.asarray(k)
        if (j < 0).any() or (j > k).any():
            raise ValueError("need 0 <= j <= k")
        B = self.offset
        return (j + B - 1.0) / (4.0 * (k + B - 1.0))

    def noise_weight_sum(self, k) -> float | np.ndarray:
        """t_{k+1} * lip * sum_{j=0}^{k} eta_j^2 * tail_contraction(j, k).

        Equals (lip/mu) * sum_j ((j+B-1)/(j+B)) / (k+B-1) <= lip/mu; this is
        the accumulated noise weight in the telescoped gap recursion.
        """
        k = np.asarray(k)
        if (k < 0).any():
            raise ValueError("k must be nonnegative")
        kmax = int(k.max())
        B = self.offset
        j = np.arange(kmax + 1)
        partial = np.cumsum((j + B - 1.0) / (j + B))
        return (self.lip / self.mu) * partial[k] / (k + B - 1.0)


def contraction_product_from_offset(B: float, k) -> float | np.ndarray:
    """(B - 2)(B - 1) / ((k + B - 1)(k + B)) for any offset B > 2."""
    k = _nonneg(k, "k")
    return ((B - 2.0) * (B - 1.0)) / ((k + B - 1.0) * (k + B))


def iterative_contraction_product(B: float, k: int) -> float:
    """Reference product of the raw factors (1 - 2/(i + B)), i = 0..k."""
    out = 1.0
    for i in range(k + 1):
        out *= 1.0 - 2.0 / (i + B)
    return out


def _nonneg(k, name):
    k = np.asarray(k)
    if (k < 0).any():
        raise ValueError(f"{name} must be nonnegative")
    return k[()]
