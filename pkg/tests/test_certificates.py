import math

import numpy as np
import pytest

from sgdcert.certificates import (
    beta_for_coverage,
    coverage_of_beta,
    last_iterate_bound,
    last_iterate_certificate,
    lower_bound_curve,
    lower_curve_certificate,
    prior_art_reference,
    uniform_envelope,
    uniform_envelope_certificate,
)

LOG_GRID = np.unique(np.round(np.logspace(0, 6, 400)).astype(int))


def test_last_iterate_examples():
    assert last_iterate_bound(1, 1, 1.0, 0.1, 100) == pytest.approx(
        (16 * math.log(10.0) + 3 + 16) / 103.0, rel=1e-12
    )
    assert last_iterate_bound(1, 1, 1.0, 0.1, 100) == pytest.approx(0.54215, rel=1e-4)
    # beta -> 1 limit with zero initial gap leaves only the smoothness term
    assert last_iterate_bound(1, 1, 0.0, 1 - 1e-12, 10) == pytest.approx(
        16.0 / 13.0, rel=1e-9
    )
    assert last_iterate_bound(1, 1, 0.0, math.exp(-1.0), 1) == pytest.approx(8.0, rel=1e-12)


def test_uniform_envelope_examples():
    v1 = uniform_envelope(1, 1, 1.0, 0.05, 1)
    assert v1 == pytest.approx((16 * math.log(1 / 0.05) + 3 + 16 * (1 + math.log(2))) / 4, rel=1e-12)
    assert v1 == pytest.approx(19.506, rel=1e-4)
    v2 = uniform_envelope(1, 1, 1.0, 0.05, 2)
    assert v2 == pytest.approx((16 * math.log(4 / 0.05) + 3 + 16 * (1 + math.log(2))) / 5, rel=1e-12)
    assert v2 == pytest.approx(20.04, rel=1e-3)
    for k in (1, 10, 10**6):
        assert uniform_envelope(1, 1, 1.0, 0.05, k) > last_iterate_bound(1, 1, 1.0, 0.05, k)


def test_domain_validation():
    with pytest.raises(ValueError):
        last_iterate_bound(1, 1, 1.0, 0.0, 10)
    with pytest.raises(ValueError):
        last_iterate_bound(1, 1, 1.0, 1.0, 10)
    with pytest.raises(ValueError):
        last_iterate_bound(1, 1, -0.5, 0.1, 10)
    with pytest.raises(ValueError):
        uniform_envelope(1, 1, 1.0, 0.65, 10)  # above 6/pi^2
    with pytest.raises(ValueError):
        uniform_envelope(1, 1, 1.0, 0.05, 0)
    with pytest.raises(ValueError):
        lower_bound_curve(1, 1, 0.5, 2)
    with pytest.raises(ValueError):
        lower_bound_curve(1, 1, 1.5, 10)
    with pytest.raises(ValueError):
        prior_art_reference(0.1, 1)
    with pytest.raises(ValueError):
        coverage_of_beta(0.62)
    with pytest.raises(ValueError):
        beta_for_coverage(1.0)


def test_coverage_conversions():
    beta = 6 / math.pi**2 * 0.1
    assert coverage_of_beta(beta) == pytest.approx(0.9, rel=1e-12)
    assert coverage_of_beta(1e-9) == pytest.approx(1.0, abs=1e-8)
    assert beta_for_coverage(0.95) == pytest.approx(0.03040, rel=1e-3)
    for target in (0.5, 0.9, 0.99):
        assert coverage_of_beta(beta_for_coverage(target)) == pytest.approx(target, rel=1e-12)


def test_lower_curve_examples():
    assert lower_bound_curve(1, 1, 0.5, 10**6) == pytest.approx(2.7353e-8, rel=1e-4)
    assert lower_bound_curve(1, 1, 0.999999, 100) <= 1e-6  # alpha -> 1 kills the prefactor
    assert lower_bound_curve(1, 1, 1e-15, 16) == pytest.approx(
        math.log(math.log(16.0)) / 768.0, rel=1e-9
    )


def test_prior_art_examples():
    assert prior_art_reference(math.exp(-1.0), math.exp(2.0)) == pytest.approx(
        2.0 / math.exp(2.0), rel=1e-12
    )
    assert prior_art_reference(1 - 1e-12, 100) == pytest.approx(0.0, abs=1e-10)
    # the log k / log log k gap widens without bound
    ratios = [
        prior_art_reference(0.05, k) / uniform_envelope(1, 1, 0.0, 0.05, k)
        for k in (10**2, 10**4, 10**6)
    ]
    assert ratios[0] < ratios[1] < ratios[2]


def test_envelope_dominates_last_iterate_on_grid():
    env = uniform_envelope(1, 1, 1.0, 0.05, LOG_GRID)
    last = last_iterate_bound(1, 1, 1.0, 0.05, LOG_GRID)
    assert (env > last).all()


def test_scaled_envelope_is_nondecreasing_in_numerator():
    B = 4.0
    env = uniform_envelope(1, 1, 1.0, 0.05, LOG_GRID)
    scaled = (LOG_GRID + B - 1.0) * env
    assert (np.diff(scaled) >= -1e-12).all()


def test_lower_curve_sits_below_envelope():
    grid = LOG_GRID[LOG_GRID >= 3]
    for alpha, beta in [(0.1, 0.05), (0.9, 0.01), (0.5, 0.5)]:
        lower = lower_bound_curve(1, 1, alpha, grid)
        env = uniform_envelope(1, 1, 1.0, beta, grid)
        assert (lower <= env).all()


def test_values_positive_and_finite():
    env = uniform_envelope(2.0, 5.0, 0.3, 0.1, LOG_GRID)
    last = last_iterate_bound(2.0, 5.0, 0.3, 0.1, LOG_GRID)
    for vals in (env, last):
        assert np.isfinite(vals).all()
        assert (vals > 0).all()


def test_sigma_change_of_variables_identity():
    # bound at scale sigma equals sigma^2 * unit bound at initial_gap / sigma^2
    for sigma in (0.5, 1.0, 2.0, 3.7):
        for k in (1, 10, 1000):
            direct = last_iterate_bound(1.5, 4.0, 0.7, 0.1, k, sigma=sigma)
            translated = sigma**2 * last_iterate_bound(
                1.5, 4.0, 0.7 / sigma**2, 0.1, k, sigma=1.0
            )
            assert direct == pytest.approx(translated, rel=1e-12)
            direct_env = uniform_envelope(1.5, 4.0, 0.7, 0.05, k, sigma=sigma)
            translated_env = sigma**2 * uniform_envelope(
                1.5, 4.0, 0.7 / sigma**2, 0.05, k, sigma=1.0
            )
            assert direct_env == pytest.approx(translated_env, rel=1e-12)


def test_certificate_objects():
    ks = np.arange(1, 50)
    cert = uniform_envelope_certificate(1.0, 2.0, 0.5, 0.05, ks, sigma=2.0)
    assert cert.kind == "uniform-envelope"
    assert cert.params["coverage"] == pytest.approx(coverage_of_beta(0.05))
    assert np.allclose(cert.values, 4.0 * cert.unit_scale_values, rtol=1e-12) is False
    # translated identity: values = sigma^2 * unit values evaluated at gap/sigma^2
    expected = 2.0**2 * uniform_envelope(1.0, 2.0, 0.5 / 4.0, 0.05, ks, sigma=1.0)
    assert np.allclose(cert.values, expected, rtol=1e-12)

    last = last_iterate_certificate(1.0, 1.0, 1.0, 0.1, [10, 100])
    assert last.values.shape == (2,)

    low = lower_curve_certificate(1.0, 1.0, 0.5, [3, 10, 100])
    assert "asymptotic" in low.note
    assert (low.values > 0).all()
