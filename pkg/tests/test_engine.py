import json
import math

import numpy as np
import pytest

from sgdcert import problems
from sgdcert.engine import (
    NonFiniteIterateError,
    export_trajectory,
    run,
    run_until_stopping,
    stream_batch,
)
from sgdcert.problems import gaussian_oracle, quadratic_problem, zero_oracle
from sgdcert.schedule import ScheduleSpec


def unit_quadratic():
    return quadratic_problem([1.0]), ScheduleSpec(1.0, 1.0)


def test_noiseless_one_step_exact_convergence():
    # eta_0 = 1 = 1/L sends x straight to the minimizer; gap stays 0 exactly
    p, s = unit_quadratic()
    traj = run(p, zero_oracle(), s, [1.0], 50)
    assert traj.gap[0] == 0.5
    assert (traj.gap[1:] == 0.0).all()


def test_noiseless_two_dim_hand_unrolled():
    p = quadratic_problem([1.0, 2.0])
    s = ScheduleSpec(1.0, 2.0)
    traj = run(p, zero_oracle(), s, [1.0, 1.0], 5)
    # independent scalar recursion per coordinate as the reference
    x = [1.0, 1.0]
    lam = [1.0, 2.0]
    for k in range(5):
        eta = 4.0 / (1.0 * (k + 8.0))
        x = [x[i] - eta * lam[i] * x[i] for i in range(2)]
        gap = 0.5 * sum(lam[i] * x[i] * x[i] for i in range(2))
        assert traj.gap[k + 1] == pytest.approx(gap, rel=1e-14)
        assert traj.x_at(k + 1) == pytest.approx(x, rel=1e-14)
    assert traj.x_at(1) == pytest.approx([0.5, 0.0], abs=1e-15)
    assert traj.gap[1] == pytest.approx(0.125, rel=1e-15)


def test_run_is_deterministic():
    p, s = unit_quadratic()
    o = gaussian_oracle(1.0, master_seed=17)
    a = run(p, o, s, [1.0], 200)
    b = run(p, o, s, [1.0], 200)
    assert np.array_equal(a.gap, b.gap)
    assert np.array_equal(a.displacement, b.displacement)


def test_single_run_matches_batch_row():
    p = quadratic_problem([1.0, 2.0])
    s = ScheduleSpec(1.0, 2.0)
    o = gaussian_oracle(1.0, master_seed=23)
    horizon = 150
    singles = [run(p, o.for_trial(t), s, [1.0, 1.0], horizon) for t in range(3)]
    batch_gap = np.empty((3, horizon + 1))
    for state in stream_batch(p, o, s, [1.0, 1.0], horizon, [0, 1, 2]):
        batch_gap[:, state.k] = state.gap
    for t in range(3):
        assert np.array_equal(batch_gap[t], singles[t].gap)


def test_gap_invariants():
    p = quadratic_problem([1.0, 3.0], x_star=[0.5, -0.5])
    s = ScheduleSpec(1.0, 3.0)
    o = gaussian_oracle(1.0, master_seed=5)
    traj = run(p, o, s, [2.0, 2.0], 300)
    assert (traj.gap >= 0).all()
    for k in traj.x_indices:
        x = traj.x_at(k)
        assert traj.gap[k] >= 0.5 * p.mu * np.sum((x - p.x_star) ** 2) - 1e-12


def test_displacement_matches_recorded_iterates():
    p = quadratic_problem([1.0, 2.0])
    s = ScheduleSpec(1.0, 2.0)
    o = gaussian_oracle(0.5, master_seed=9)
    traj = run(p, o, s, [1.0, -1.0], 50)
    for k in range(1, 51):
        d = np.linalg.norm(traj.x_at(k) - traj.x_at(k - 1))
        assert traj.displacement[k - 1] == pytest.approx(d, rel=1e-12)


def test_noiseless_linear_rate_sanity():
    p = quadratic_problem([1.0, 2.0])
    s = ScheduleSpec(1.0, 2.0)
    traj = run(p, zero_oracle(), s, [1.0, 1.0], 200)
    k = np.arange(200)
    contraction = np.cumprod(1.0 - p.mu * s.step_size(k))
    bound = traj.gap[0] * contraction**2 * (p.lip / p.mu)
    assert (traj.gap[1:] <= bound + 1e-15).all()


def test_stopping_examples():
    p, s = unit_quadratic()
    tau, traj = run_until_stopping(p, zero_oracle(), s, [1.0], 0.5, 100)
    assert tau == 2
    assert traj.steps == 2
    assert traj.displacement[0] == 1.0 and traj.displacement[1] == 0.0

    tau, _ = run_until_stopping(p, zero_oracle(), s, [1.0], 1.5, 100)
    assert tau == 1

    o = gaussian_oracle(1.0, master_seed=3)
    tau, traj = run_until_stopping(p, o, s, [1.0], 0.0, 100)
    assert tau is None
    assert traj.steps == 100


def test_stopping_preconditions():
    p, s = unit_quadratic()
    with pytest.raises(ValueError):
        run_until_stopping(p, zero_oracle(), s, [1.0], -1.0, 100)
    with pytest.raises(ValueError):
        run_until_stopping(p, zero_oracle(), s, [1.0], 0.1, 0)


def test_non_finite_initial_point_aborts_at_step_zero():
    p, s = unit_quadratic()
    with pytest.raises(NonFiniteIterateError) as exc:
        run(p, zero_oracle(), s, [1e308], 10)  # gap overflows at the start
    assert exc.value.step_index == 0


def test_non_finite_iterate_aborts_with_step_index():
    # schedule sized for lip = 1 on a lip = 50 problem: the top mode explodes
    p = quadratic_problem([1.0, 50.0])
    s = ScheduleSpec(1.0, 1.0)
    with pytest.raises(NonFiniteIterateError) as exc:
        run(p, zero_oracle(), s, [1e150, 1e150], 500)
    assert 1 <= exc.value.step_index <= 500


def test_run_rejects_bad_horizon():
    p, s = unit_quadratic()
    with pytest.raises(ValueError):
        run(p, zero_oracle(), s, [1.0], 0)


def one_step_mgf_samples(x, k, n, seed):
    """Empirical one-step MGF data on f = x^2/2 with unit Gaussian noise."""
    p = quadratic_problem([1.0])
    s = ScheduleSpec(1.0, 1.0)
    o = gaussian_oracle(1.0, master_seed=seed)
    eta = float(s.step_size(k))
    noise = o.noise_block(p, 0, n)[:, 0]
    x1 = x - eta * (p.gradient([x])[0] + noise)
    gap1 = 0.5 * x1 * x1
    return p, s, eta, gap1


def analytic_one_step_mgf(x, eta, t):
    """E exp(t (a x - eta Z)^2 / 2) for Z ~ N(0,1), a = 1 - eta."""
    lam = t / 2.0
    m = (1.0 - eta) * x
    s2 = eta * eta
    assert 2 * lam * s2 < 1
    return math.exp(lam * m * m / (1 - 2 * lam * s2)) / math.sqrt(1 - 2 * lam * s2)


@pytest.mark.parametrize("gap0", [1e-3, 1e-2, 0.1, 1.0])
def test_one_step_mgf_recursion(gap0):
    # E[exp(t gap_{k+1})] <= exp((1 - mu eta/2) t gap_k + t L eta^2), t = t_{k+1}
    k = 10
    x = math.sqrt(2.0 * gap0)
    p, s, eta, gap1 = one_step_mgf_samples(x, k, 100_000, seed=101)
    t = float(s.mgf_parameter(k + 1))
    vals = np.exp(t * gap1)
    emp, se = vals.mean(), vals.std(ddof=1) / math.sqrt(vals.size)
    rhs = math.exp((1.0 - eta / 2.0) * t * gap0 + t * eta * eta)
    assert emp <= rhs + 3 * se
    # the closed-form expectation confirms the inequality deterministically
    assert analytic_one_step_mgf(x, eta, t) <= rhs


@pytest.mark.parametrize("gap0", [1e-3, 0.1, 1.0])
def test_one_step_mgf_shifted_parameters(gap0):
    # E[exp(t_{k+1} gap_{k+1})] <= exp(t_k gap_k + t_{k+1} L eta^2)
    k = 4
    x = math.sqrt(2.0 * gap0)
    p, s, eta, gap1 = one_step_mgf_samples(x, k, 100_000, seed=202)
    t_next = float(s.mgf_parameter(k + 1))
    t_cur = float(s.mgf_parameter(k))
    vals = np.exp(t_next * gap1)
    emp, se = vals.mean(), vals.std(ddof=1) / math.sqrt(vals.size)
    rhs = math.exp(t_cur * gap0 + t_next * eta * eta)
    assert emp <= rhs + 3 * se
    assert analytic_one_step_mgf(x, eta, t_next) <= rhs


def test_export_trajectory_round_trip(tmp_path):
    p = quadratic_problem([1.0, 2.0])
    s = ScheduleSpec(1.0, 2.0)
    o = gaussian_oracle(1.0, master_seed=7)
    traj = run(p, o, s, [1.0, 1.0], 20)
    csv_path = tmp_path / "traj.csv"
    json_path = tmp_path / "traj.json"
    export_trajectory(traj, p, o, s, csv_path, json_path)

    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "k,gap,displacement"
    assert len(lines) == 22
    first = lines[1].split(",")
    assert int(first[0]) == 0 and float(first[1]) == traj.gap[0] and first[2] == ""
    row5 = lines[6].split(",")
    assert float(row5[1]) == traj.gap[5]
    assert float(row5[2]) == traj.displacement[4]

    meta = json.loads(json_path.read_text())
    assert meta["schedule"]["offset"] == 8.0
    assert meta["seed_provenance"] == [7, 0]
    assert meta["problem"]["kind"] == "diagonal-quadratic"

    # byte-identical on re-export
    again_csv = tmp_path / "traj2.csv"
    again_json = tmp_path / "traj2.json"
    export_trajectory(traj, p, o, s, again_csv, again_json)
    assert again_csv.read_bytes() == csv_path.read_bytes()
    assert again_json.read_bytes() == json_path.read_bytes()


def test_trajectory_checkpoint_thinning():
    p, s = unit_quadratic()
    o = gaussian_oracle(1.0, master_seed=1)
    traj = run(p, o, s, [1.0], 12_000, record_x_at=[11_111])
    assert 11_111 in traj.x_indices
    assert traj.x_indices.max() == 12_000
    # dense through 10^4, thinned beyond
    assert np.array_equal(
        traj.x_indices[traj.x_indices <= 10_000], np.arange(10_001)
    )
    assert (traj.x_indices > 10_000).sum() < 300
    with pytest.raises(KeyError):
        traj.x_at(11_112)
