"""Counter-based Gaussian random streams.

Every stochastic draw in this package is addressed by the triple
(master_seed, trial_index, value_index): the first two derive a Philox key,
the third selects a position in that key's output stream. Draws are therefore
deterministic, reproducible bitwise, and independent of how work is split
across trials, blocks, or workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

# Philox4x64 emits 4 words per counter block.
_WORDS_PER_BLOCK = 4
_U64_11 = np.uint64(11)
_TO_UNIT = 2.0 ** -53
_HALF_ULP = 2.0 ** -54


@dataclass(frozen=True)
class StreamId:
    """Identity of one deterministic random stream.

    A stream is owned by a single trial; concurrent trials use distinct
    trial indices and never share state.
    """

    master_seed: int
    trial_index: int = 0

    def with_trial(self, trial_index: int) -> "StreamId":
        return StreamId(self.master_seed, trial_index)

    def philox_key(self) -> np.ndarray:
        seq = np.random.SeedSequence((self.master_seed, self.trial_index))
        return seq.generate_state(2, np.uint64)


def raw_words(key: np.ndarray, start: int, count: int) -> np.ndarray:
    """Philox output words at positions [start, start + count).

    Word w lives in counter block w // 4, lane w % 4, so any contiguous
    range can be produced in one call and arbitrary chunkings of the same
    range concatenate to identical output.
    """
    if count == 0:
        return np.empty(0, np.uint64)
    first_block = start // _WORDS_PER_BLOCK
    offset = start - first_block * _WORDS_PER_BLOCK
    bg = np.random.Philox(key=key, counter=first_block)
    words = bg.random_raw(offset + count)
    return words[offset : offset + count]


def standard_normals(key: np.ndarray, start: int, count: int) -> np.ndarray:
    """Standard normal values at stream positions [start, start + count).

    Each 64-bit word maps to a (0, 1) uniform on a 2^-53 lattice and then
    through the inverse normal CDF, so one word yields exactly one normal
    and positions are addressable.
    """
    words = raw_words(key, start, count)
    u = (words >> _U64_11) * _TO_UNIT + _HALF_ULP
    return ndtri(u)


def normals_for_steps(
    key: np.ndarray, values_per_step: int, start_step: int, n_steps: int
) -> np.ndarray:
    """Normal block for steps [start_step, start_step + n_steps).

    Returns shape (n_steps, values_per_step). Step k owns stream positions
    [k * values_per_step, (k + 1) * values_per_step), so the block of one
    step extracted here is bitwise identical to a single-step call.
    """
    z = standard_normals(key, start_step * values_per_step, n_steps * values_per_step)
    return z.reshape(n_steps, values_per_step)
