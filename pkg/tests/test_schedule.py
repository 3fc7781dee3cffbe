import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgdcert.schedule import (
    ScheduleSpec,
    contraction_product_from_offset,
    iterative_contraction_product,
    offset_for,
)


def test_offset_examples():
    assert ScheduleSpec(1.0, 1.0).offset == 4.0
    assert ScheduleSpec(1.0, 2.0).offset == 8.0
    assert ScheduleSpec(2.0, 2.0).offset == 4.0
    assert offset_for(1.0, 0.5) == 3.0  # raw formula keeps the max with 3


def test_spec_rejects_invalid_curvature():
    with pytest.raises(ValueError):
        ScheduleSpec(0.0, 1.0)
    with pytest.raises(ValueError):
        ScheduleSpec(-1.0, 1.0)
    with pytest.raises(ValueError):
        ScheduleSpec(1.0, 0.5)  # lip < mu


def test_step_size_examples():
    assert ScheduleSpec(1.0, 1.0).step_size(0) == 1.0
    assert ScheduleSpec(1.0, 2.0).step_size(0) == 0.5
    assert ScheduleSpec(1.0, 1.0).step_size(96) == 0.04


def test_step_size_decreasing_and_below_inverse_lip():
    for mu, lip in [(1.0, 1.0), (1.0, 2.0), (0.5, 5.0)]:
        s = ScheduleSpec(mu, lip)
        eta = s.step_size(np.arange(10_000))
        assert (np.diff(eta) < 0).all()
        assert (eta <= 1.0 / lip + 1e-15).all()
    with pytest.raises(ValueError):
        ScheduleSpec(1.0, 1.0).step_size(-1)


def test_mgf_parameter_examples():
    assert ScheduleSpec(1.0, 1.0).mgf_parameter(1) == 0.25
    # mu = 16 with the dead B = 3 branch, via the raw offset formula
    B = offset_for(16.0, 12.0)
    assert B == 3.0
    assert 16.0 * (2 - 1 + B) / 16.0 == 4.0
    with pytest.raises(ValueError):
        ScheduleSpec(1.0, 1.0).mgf_parameter(0)


def test_mgf_times_step_is_one_quarter():
    s = ScheduleSpec(1.0, 1.0)
    k = np.arange(0, 1000)
    prod = s.mgf_parameter(k + 1) * s.step_size(k)
    assert np.allclose(prod, 0.25, rtol=1e-14)


def test_lemma_condition_margin_is_exact():
    # 2(t_{k+1} - t_k) - mu t_{k+1} eta_k = mu/8 - mu/4 for every k
    for mu, lip in [(1.0, 1.0), (1.0, 2.0), (3.0, 10.0)]:
        s = ScheduleSpec(mu, lip)
        k = np.arange(1, 100_000)
        margin = 2.0 * (s.mgf_parameter(k + 1) - s.mgf_parameter(k)) - mu * s.mgf_parameter(
            k + 1
        ) * s.step_size(k)
        assert (margin <= 0).all()
        assert np.allclose(margin, -mu / 8.0, rtol=1e-12)


def test_contraction_product_examples():
    s4 = ScheduleSpec(1.0, 1.0)
    assert s4.contraction_product(2) == pytest.approx(0.2, rel=1e-15)
    assert s4.contraction_product(0) == pytest.approx(0.5, rel=1e-15)
    assert contraction_product_from_offset(3.0, 1) == pytest.approx(1.0 / 6.0, rel=1e-15)
    assert iterative_contraction_product(3.0, 1) == pytest.approx(1.0 / 6.0, rel=1e-15)


def test_contraction_closed_form_matches_iterative():
    for B in (4.0, 8.0, 40.0):
        k = np.arange(2_000)
        closed = contraction_product_from_offset(B, k)
        iterative = np.cumprod(1.0 - 2.0 / (k + B))
        assert np.allclose(closed, iterative, rtol=1e-12)


def test_tail_contraction_is_product_ratio():
    s = ScheduleSpec(1.0, 2.0)
    for j, k in [(0, 0), (0, 5), (3, 17), (100, 100)]:
        expected = 1.0
        for i in range(j + 1, k + 1):
            expected *= 1.0 - s.mu * s.step_size(i) / 2.0
        assert s.tail_contraction(j, k) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        s.tail_contraction(5, 3)


def test_weighted_tail_matches_brute_force_and_quarter_bound():
    s = ScheduleSpec(1.0, 1.0)
    for j in range(0, 60, 7):
        for k in range(j, 60, 5):
            brute = s.mgf_parameter(k + 1) * s.step_size(j)
            for i in range(j + 1, k + 1):
                brute *= 1.0 - s.mu * s.step_size(i) / 2.0
            assert s.weighted_tail(j, k) == pytest.approx(brute, rel=1e-12)
            assert s.weighted_tail(j, k) <= 0.25 + 1e-15


def test_noise_weight_sum_matches_brute_force_and_bound():
    s = ScheduleSpec(1.0, 2.0)
    for k in (0, 5, 100):
        brute = 0.0
        for j in range(k + 1):
            term = s.step_size(j) ** 2
            for i in range(j + 1, k + 1):
                term *= 1.0 - s.mu * s.step_size(i) / 2.0
            brute += term
        brute *= s.mgf_parameter(k + 1) * s.lip
        assert s.noise_weight_sum(k) == pytest.approx(brute, rel=1e-10)
    k = np.arange(10_000)
    assert (s.noise_weight_sum(k) <= s.lip / s.mu + 1e-12).all()


@given(
    mu=st.floats(min_value=0.01, max_value=50.0),
    ratio=st.floats(min_value=1.0, max_value=20.0),
    k=st.integers(min_value=0, max_value=10**6),
)
@settings(max_examples=50, deadline=None)
def test_quarter_identity_holds_everywhere(mu, ratio, k):
    s = ScheduleSpec(mu, mu * ratio)
    assert s.mgf_parameter(k + 1) * s.step_size(k) == pytest.approx(0.25, rel=1e-12)
    assert 0.0 < s.contraction_product(k) <= 1.0
