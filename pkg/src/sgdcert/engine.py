"""SGD runner: x_{k+1} = x_k - eta_k * g(x_k), with dense gap recording.

The core is a generator that advances a batch of trials in lockstep, one
recursion step per yield. Single trajectories are the batch-of-one case;
the Monte Carlo layer streams larger batches through the same code path, so
a trial's numbers never depend on how trials are grouped.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .problems import OracleModel, ProblemSpec, oracle_to_config, problem_to_config
from .schedule import ScheduleSpec

# Steps per generated noise block; fixed so draws never depend on batching.
NOISE_BLOCK_STEPS = 4096

# Dense iterate storage up to here, logarithmic checkpoints beyond.
DENSE_X_LIMIT = 10_000


class NonFiniteIterateError(RuntimeError):
    """An iterate left the representable range; the run is aborted, not clamped."""

    def __init__(self, step_index: int):
        super().__init__(f"non-finite iterate at step {step_index}")
        self.step_index = step_index


class StepState(NamedTuple):
    """State after step k (k = 0 is the initial point, displacement None)."""

    k: int
    gap: np.ndarray
    displacement: np.ndarray | None
    x: np.ndarray
    alive: np.ndarray


def stream_batch(
    problem: ProblemSpec,
    oracle: OracleModel,
    sched: ScheduleSpec,
    x0,
    horizon: int,
    trial_indices: Sequence[int],
) -> Iterator[StepState]:
    """Advance len(trial_indices) trials in lockstep, yielding after every step.

    Yields k = 0..horizon. Rows of aborted trials report gap = +inf from the
    aborting step onward and stop moving; `alive` marks them. The yielded
    arrays are reused between steps: copy anything kept.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    x0 = problem.check_point(np.asarray(x0, dtype=float))
    trial_indices = list(trial_indices)
    m = len(trial_indices)
    d = problem.dimension

    X = np.tile(x0, (m, 1))
    with np.errstate(over="ignore", invalid="ignore"):
        raw_gap0 = problem.gap_rows(X)
    alive = np.isfinite(raw_gap0)
    gap0 = np.where(alive, raw_gap0, np.inf)
    yield StepState(0, gap0, None, X, alive.copy())
    if not alive.any():
        # initial point already out of range; freeze everything
        inf = np.full(m, np.inf)
        for k in range(horizon):
            yield StepState(k + 1, inf, inf, X, alive.copy())
        return

    oracles = [oracle.for_trial(t) for t in trial_indices]
    noisy = oracle.values_per_step(problem) > 0
    eta = sched.step_size(np.arange(horizon))
    gap = gap0.copy()
    disp = np.zeros(m)

    for block_start in range(0, horizon, NOISE_BLOCK_STEPS):
        block_end = min(block_start + NOISE_BLOCK_STEPS, horizon)
        if noisy:
            noise = np.stack(
                [o.noise_block(problem, block_start, block_end - block_start) for o in oracles]
            )
        for k in range(block_start, block_end):
            with np.errstate(over="ignore", invalid="ignore"):
                g = problem.gradient_rows(X)
                if noisy:
                    g = g + noise[:, k - block_start, :]
                step = eta[k] * g
                X = X - step
                new_gap = problem.gap_rows(X)
                new_disp = np.sqrt((step * step).sum(axis=-1))
            ok = np.isfinite(new_gap) & np.isfinite(new_disp)
            if not ok.all():
                died = alive & ~ok
                alive &= ok
                X[died] = problem.x_star  # park dead rows; outputs forced below
            np.copyto(gap, new_gap, where=alive)
            np.copyto(disp, new_disp, where=alive)
            gap[~alive] = np.inf
            disp[~alive] = np.inf
            yield StepState(k + 1, gap, disp, X, alive.copy())


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One recorded SGD run.

    gap is dense over k = 0..steps; displacement[i] = ||x_{i+1} - x_i||.
    Iterates are kept densely up to 10^4 and at logarithmically spaced
    checkpoints beyond, plus any explicitly requested indices.
    """

    steps: int
    gap: np.ndarray
    displacement: np.ndarray
    x_indices: np.ndarray
    x_values: np.ndarray
    seed_provenance: tuple[int, int]

    def x_at(self, k: int) -> np.ndarray:
        hits = np.nonzero(self.x_indices == k)[0]
        if hits.size == 0:
            raise KeyError(f"iterate {k} was not recorded")
        return self.x_values[hits[0]]


def _checkpoint_indices(horizon: int, extra=()) -> np.ndarray:
    dense = np.arange(0, min(horizon, DENSE_X_LIMIT) + 1)
    if horizon > DENSE_X_LIMIT:
        sparse = np.unique(
            np.round(
                np.logspace(np.log10(DENSE_X_LIMIT), np.log10(horizon), 200)
            ).astype(int)
        )
        dense = np.union1d(dense, sparse)
    if len(extra):
        dense = np.union1d(dense, np.asarray(list(extra), dtype=int))
    return dense[(dense >= 0) & (dense <= horizon)]


def run(
    problem: ProblemSpec,
    oracle: OracleModel,
    sched: ScheduleSpec,
    x0,
    horizon: int,
    record_x_at: Sequence[int] = (),
) -> Trajectory:
    """Run the recursion for `horizon` steps and record the trajectory.

    Raises NonFiniteIterateError (with the step index) if an iterate leaves
    the representable range.
    """
    keep = set(_checkpoint_indices(horizon, record_x_at).tolist())
    gap = np.empty(horizon + 1)
    disp = np.empty(horizon)
    x_idx: list[int] = []
    x_val: list[np.ndarray] = []
    for state in stream_batch(problem, oracle, sched, x0, horizon, [oracle.stream.trial_index]):
        if not state.alive[0]:
            raise NonFiniteIterateError(state.k)
        gap[state.k] = state.gap[0]
        if state.k > 0:
            disp[state.k - 1] = state.displacement[0]
        if state.k in keep:
            x_idx.append(state.k)
            x_val.append(state.x[0].copy())
    return Trajectory(
        steps=horizon,
        gap=gap,
        displacement=disp,
        x_indices=np.asarray(x_idx, dtype=int),
        x_values=np.asarray(x_val),
        seed_provenance=(oracle.stream.master_seed, oracle.stream.trial_index),
    )


def run_until_stopping(
    problem: ProblemSpec,
    oracle: OracleModel,
    sched: ScheduleSpec,
    x0,
    epsilon: float,
    max_steps: int,
) -> tuple[int | None, Trajectory]:
    """Run until the first k >= 1 with ||x_k - x_{k-1}|| <= epsilon.

    Returns (tau, trajectory up to min(tau, max_steps)); tau is None when the
    criterion never fires within max_steps.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    keep = set(_checkpoint_indices(max_steps).tolist())
    gap: list[float] = []
    disp: list[float] = []
    x_idx: list[int] = []
    x_val: list[np.ndarray] = []
    tau: int | None = None
    for state in stream_batch(problem, oracle, sched, x0, max_steps, [oracle.stream.trial_index]):
        if not state.alive[0]:
            raise NonFiniteIterateError(state.k)
        gap.append(float(state.gap[0]))
        if state.k > 0:
            disp.append(float(state.displacement[0]))
        if state.k in keep:
            x_idx.append(state.k)
            x_val.append(state.x[0].copy())
        if state.k >= 1 and state.displacement[0] <= epsilon:
            tau = state.k
            break
    steps = len(gap) - 1
    mask = np.asarray(x_idx) <= steps
    traj = Trajectory(
        steps=steps,
        gap=np.asarray(gap),
        displacement=np.asarray(disp),
        x_indices=np.asarray(x_idx, dtype=int)[mask],
        x_values=np.asarray(x_val)[mask],
        seed_provenance=(oracle.stream.master_seed, oracle.stream.trial_index),
    )
    return tau, traj


def export_trajectory(
    traj: Trajectory,
    problem: ProblemSpec,
    oracle: OracleModel,
    sched: ScheduleSpec,
    csv_path,
    sidecar_path,
    extra_metadata: dict | None = None,
) -> None:
    """Write the gap/displacement table and a JSON sidecar with full provenance."""
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "gap", "displacement"])
        writer.writerow([0, repr(float(traj.gap[0])), ""])
        for k in range(1, traj.steps + 1):
            writer.writerow(
                [k, repr(float(traj.gap[k])), repr(float(traj.displacement[k - 1]))]
            )
    meta = {
        "problem": problem_to_config(problem),
        "oracle": oracle_to_config(oracle),
        "schedule": {"mu": sched.mu, "lip": sched.lip, "offset": sched.offset},
        "steps": traj.steps,
        "seed_provenance": list(traj.seed_provenance),
        "x0": [float(v) for v in traj.x_values[0]],
    }
    if extra_metadata:
        meta.update(extra_metadata)
    with open(sidecar_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
