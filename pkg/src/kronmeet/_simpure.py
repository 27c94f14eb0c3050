"""Pure-numpy stepping kernel, stream-identical to the compiled one.

Each trial owns a splitmix64 stream whose phase is derived from the batch
key and the trial index; every step consumes one uniform for the pursuer
and one for the evader.  The compiled kernel in ``_simcore`` replays the
same arithmetic in C, so both backends return bit-identical outcomes.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


def _uniforms(states):
    return (_mix(states) >> np.uint64(11)).astype(np.float64) * _INV_2_53


def run_pair(cum_p, cum_e, i0, j0, trials, max_steps, key):
    """Meeting step per trial (int64; 0 marks a censored trial).

    ``cum_p`` / ``cum_e`` are row-wise cumulative transition matrices whose
    last column is exactly 1.0.
    """
    with np.errstate(over="ignore"):
        idx = np.arange(1, trials + 1, dtype=np.uint64)
        states = _mix(np.uint64(key) ^ (idx * GOLDEN))
        times = np.zeros(trials, dtype=np.int64)
        cur_p = np.full(trials, i0, dtype=np.int64)
        cur_e = np.full(trials, j0, dtype=np.int64)
        alive = np.arange(trials, dtype=np.int64)
        for step in range(1, max_steps + 1):
            if alive.size == 0:
                break
            states = states + GOLDEN
            u = _uniforms(states)
            cur_p = (cum_p[cur_p] <= u[:, None]).sum(axis=1)
            states = states + GOLDEN
            u = _uniforms(states)
            cur_e = (cum_e[cur_e] <= u[:, None]).sum(axis=1)
            met = cur_p == cur_e
            if met.any():
                times[alive[met]] = step
                keep = ~met
                alive = alive[keep]
                states = states[keep]
                cur_p = cur_p[keep]
                cur_e = cur_e[keep]
    return times
