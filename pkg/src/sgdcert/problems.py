"""Synthetic strongly convex objectives and their stochastic gradient oracles.

Two analytic families with exact minimizers and minima:

  diagonal-quadratic   f(x) = 0.5 * sum_i spectrum_i * (x_i - x_star_i)^2 + f_star
  tester-location      f(x) = 0.5 * mu * (x - location)^2, one-dimensional

Oracles return the exact gradient plus additive noise whose squared-norm
moment generating function is dominated by the one-dimensional Gaussian
reference bound E exp(t ||noise||^2) <= (1 - 2 t sigma^2)^(-1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .streams import StreamId, normals_for_steps

PROBLEM_KINDS = ("diagonal-quadratic", "tester-location")
NOISE_KINDS = ("isotropic-gaussian", "tester-sample", "zero")


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """A strongly convex objective with known curvature and exact optimum.

    mu is the strong-convexity modulus (smallest curvature), lip the gradient
    Lipschitz constant (largest curvature). For diagonal quadratics these are
    the extreme eigenvalues of the (diagonal) Hessian; the tester-location
    family has mu == lip.
    """

    kind: str
    dimension: int
    mu: float
    lip: float
    spectrum: np.ndarray
    x_star: np.ndarray
    f_star: float
    location: float = 0.0

    def __post_init__(self):
        if self.kind not in PROBLEM_KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        if not (0 < self.mu <= self.lip):
            raise ValueError("need 0 < mu <= lip")
        if self.spectrum.shape != (self.dimension,):
            raise ValueError("spectrum must have one eigenvalue per coordinate")
        if self.x_star.shape != (self.dimension,):
            raise ValueError("x_star must match the dimension")
        if self.kind == "diagonal-quadratic":
            if not math.isclose(self.spectrum.min(), self.mu, rel_tol=1e-12):
                raise ValueError("mu must equal min(spectrum)")
            if not math.isclose(self.spectrum.max(), self.lip, rel_tol=1e-12):
                raise ValueError("lip must equal max(spectrum)")
        else:
            if self.dimension != 1:
                raise ValueError("tester-location problems are one-dimensional")
            if self.lip != self.mu:
                raise ValueError("tester-location has lip == mu")
            if self.f_star != 0.0:
                raise ValueError("tester-location has f_star == 0")
        self.spectrum.flags.writeable = False
        self.x_star.flags.writeable = False

    def check_point(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(
                f"point has shape {x.shape}, problem dimension is {self.dimension}"
            )
        return x

    def objective(self, x) -> float:
        """f(x), exact for the analytic family."""
        return float(self.gap(x) + self.f_star)

    def gradient(self, x) -> np.ndarray:
        """Exact gradient spectrum * (x - x_star)."""
        x = self.check_point(x)
        return self.spectrum * (x - self.x_star)

    def gap(self, x) -> float:
        """Suboptimality f(x) - f_star, computed directly from the quadratic form."""
        x = self.check_point(x)
        diff = x - self.x_star
        return float(0.5 * ((diff * self.spectrum) * diff).sum())

    def gradient_rows(self, X: np.ndarray) -> np.ndarray:
        """Gradient of each row of an (n, dimension) state array."""
        return (X - self.x_star) * self.spectrum

    def gap_rows(self, X: np.ndarray) -> np.ndarray:
        diff = X - self.x_star
        return 0.5 * ((diff * self.spectrum) * diff).sum(axis=-1)


def quadratic_problem(spectrum, x_star=None, f_star: float = 0.0) -> ProblemSpec:
    """Diagonal quadratic with the given Hessian eigenvalues."""
    spectrum = np.atleast_1d(np.asarray(spectrum, dtype=float)).copy()
    if spectrum.ndim != 1 or spectrum.size == 0:
        raise ValueError("spectrum must be a non-empty vector")
    if (spectrum <= 0).any():
        raise ValueError("all eigenvalues must be positive")
    d = spectrum.size
    if x_star is None:
        x_star = np.zeros(d)
    x_star = np.asarray(x_star, dtype=float).copy()
    return ProblemSpec(
        kind="diagonal-quadratic",
        dimension=d,
        mu=float(spectrum.min()),
        lip=float(spectrum.max()),
        spectrum=spectrum,
        x_star=x_star,
        f_star=float(f_star),
    )


def tester_problem(mu: float, location: float) -> ProblemSpec:
    """One-dimensional location family f(x) = 0.5 * mu * (x - location)^2."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    return ProblemSpec(
        kind="tester-location",
        dimension=1,
        mu=float(mu),
        lip=float(mu),
        spectrum=np.array([float(mu)]),
        x_star=np.array([float(location)]),
        f_star=0.0,
        location=float(location),
    )


@dataclass(frozen=True)
class OracleModel:
    """Stochastic gradient oracle: exact gradient plus seeded additive noise.

    noise kinds:
      zero               returns the exact gradient
      isotropic-gaussian adds N(0, sigma^2/d) per coordinate, so the total
                         squared-norm MGF (1 - 2 t sigma^2 / d)^(-d/2) stays
                         below the reference (1 - 2 t sigma^2)^(-1/2) in
                         every dimension
      tester-sample      returns g(x) = mu * x - X with X ~ N(mu * location,
                         sigma^2), one fresh draw per call

    The stream field fixes the (master_seed, trial_index) identity; the noise
    of step k is a pure function of (stream, k).
    """

    noise_kind: str
    sigma: float
    stream: StreamId

    def __post_init__(self):
        if self.noise_kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.noise_kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.noise_kind == "zero" and self.sigma != 0.0:
            raise ValueError("zero noise requires sigma == 0")

    def for_trial(self, trial_index: int) -> "OracleModel":
        return replace(self, stream=self.stream.with_trial(trial_index))

    def values_per_step(self, problem: ProblemSpec) -> int:
        if self.noise_kind == "zero":
            return 0
        if self.noise_kind == "tester-sample":
            return 1
        return problem.dimension

    def noise_block(
        self, problem: ProblemSpec, start_step: int, n_steps: int
    ) -> np.ndarray:
        """Additive noise g - grad f for steps [start_step, start_step + n_steps).

        Shape (n_steps, dimension). Deterministic in (stream, step): any
        blocking of the same step range concatenates to identical values.
        """
        vps = self.values_per_step(problem)
        if vps == 0:
            return np.zeros((n_steps, problem.dimension))
        z = normals_for_steps(self.stream.philox_key(), vps, start_step, n_steps)
        if self.noise_kind == "tester-sample":
            if problem.kind != "tester-location":
                raise ValueError("tester-sample noise requires a tester-location problem")
            # g = mu x - X, X = mu*location + sigma z, so the noise is -sigma z.
            return -self.sigma * z
        scale = self.sigma / math.sqrt(problem.dimension)
        return scale * z


def zero_oracle() -> OracleModel:
    return OracleModel("zero", 0.0, StreamId(0, 0))


def gaussian_oracle(sigma: float, master_seed: int, trial_index: int = 0) -> OracleModel:
    return OracleModel("isotropic-gaussian", float(sigma), StreamId(master_seed, trial_index))


def sampling_oracle(sigma: float, master_seed: int, trial_index: int = 0) -> OracleModel:
    return OracleModel("tester-sample", float(sigma), StreamId(master_seed, trial_index))


def sample_gradient(
    problem: ProblemSpec, oracle: OracleModel, x, step_index: int
) -> np.ndarray:
    """One stochastic gradient draw at x, addressed by step_index.

    Conditionally unbiased: the mean over the noise equals the exact
    gradient. Repeated calls with the same stream and step are bitwise
    identical.
    """
    x = problem.check_point(x)
    if step_index < 0:
        raise ValueError("step_index must be nonnegative")
    noise = oracle.noise_block(problem, step_index, 1)[0]
    return problem.gradient(x) + noise


@dataclass(frozen=True)
class DiagnosticReport:
    """Empirical MGF probes of the oracle noise against its analytic bounds."""

    t: float
    trials: int
    empirical_mgf_sqnorm: float
    se_sqnorm: float
    bound_sqnorm: float
    empirical_mgf_directional: float
    se_directional: float
    bound_directional: float

    @property
    def sqnorm_ok(self) -> bool:
        return self.empirical_mgf_sqnorm <= self.bound_sqnorm + 3 * self.se_sqnorm

    @property
    def directional_ok(self) -> bool:
        return self.empirical_mgf_directional <= self.bound_directional + 3 * self.se_directional


def subgaussian_diagnostic(
    oracle: OracleModel,
    problem: ProblemSpec,
    x,
    t: float,
    trials: int,
) -> DiagnosticReport:
    """Check the noise MGF conditions by direct sampling.

    Squared-norm probe: mean of exp(t ||noise||^2) against
    (1 - 2 t sigma^2)^(-1/2). Directional probe: mean of exp(<phi, noise>)
    for the fixed direction phi = t * e1 against exp(||phi||^2 sigma^2 / 2).
    A zero-noise oracle degenerates to 1 <= bound, which is allowed.
    """
    problem.check_point(x)
    if trials < 10_000:
        raise ValueError("diagnostic needs at least 10^4 trials")
    if t <= 0:
        raise ValueError("t must be positive")
    if oracle.sigma > 0 and t * oracle.sigma**2 >= 0.5:
        raise ValueError("need t * sigma^2 < 1/2 for the squared-norm probe")

    noise = oracle.noise_block(problem, 0, trials)

    sq = np.exp(t * (noise * noise).sum(axis=1))
    emp_sq = float(sq.mean())
    se_sq = float(sq.std(ddof=1) / math.sqrt(trials))
    bound_sq = 1.0 / math.sqrt(1.0 - 2.0 * t * oracle.sigma**2)

    directional = np.exp(t * noise[:, 0])
    emp_dir = float(directional.mean())
    se_dir = float(directional.std(ddof=1) / math.sqrt(trials))
    bound_dir = math.exp(t**2 * oracle.sigma**2 / 2.0)

    return DiagnosticReport(
        t=t,
        trials=trials,
        empirical_mgf_sqnorm=emp_sq,
        se_sqnorm=se_sq,
        bound_sqnorm=bound_sq,
        empirical_mgf_directional=emp_dir,
        se_directional=se_dir,
        bound_directional=bound_dir,
    )


def problem_to_config(problem: ProblemSpec) -> dict:
    """Flat key = value mapping for the config file [problem] section."""
    cfg = {
        "kind": problem.kind,
        "dimension": str(problem.dimension),
        "mu": repr(float(problem.mu)),
        "lip": repr(float(problem.lip)),
        "f_star": repr(float(problem.f_star)),
        "x_star": ",".join(repr(float(v)) for v in problem.x_star),
    }
    if problem.kind == "diagonal-quadratic":
        cfg["spectrum"] = ",".join(repr(float(v)) for v in problem.spectrum)
    else:
        cfg["theta"] = repr(float(problem.location))
    return cfg


def problem_from_config(cfg: dict) -> ProblemSpec:
    kind = cfg.get("kind", "diagonal-quadratic")
    if kind == "tester-location":
        return tester_problem(float(cfg["mu"]), float(cfg["theta"]))
    if kind != "diagonal-quadratic":
        raise ValueError(f"unknown problem kind {kind!r}")
    if "spectrum" in cfg:
        spectrum = [float(v) for v in cfg["spectrum"].split(",")]
    else:
        d = int(cfg.get("dimension", "1"))
        mu = float(cfg.get("mu", "1.0"))
        lip = float(cfg.get("lip", repr(mu)))
        spectrum = np.linspace(mu, lip, d) if d > 1 else [mu]
    x_star = None
    if "x_star" in cfg:
        x_star = [float(v) for v in cfg["x_star"].split(",")]
    return quadratic_problem(spectrum, x_star=x_star, f_star=float(cfg.get("f_star", "0.0")))


def oracle_to_config(oracle: OracleModel) -> dict:
    return {
        "noise_kind": oracle.noise_kind,
        "sigma": repr(oracle.sigma),
        "master_seed": str(oracle.stream.master_seed),
        "trial_index": str(oracle.stream.trial_index),
    }


def oracle_from_config(cfg: dict) -> OracleModel:
    return OracleModel(
        noise_kind=cfg.get("noise_kind", "isotropic-gaussian"),
        sigma=float(cfg.get("sigma", "1.0")),
        stream=StreamId(int(cfg.get("master_seed", "0")), int(cfg.get("trial_index", "0"))),
    )
