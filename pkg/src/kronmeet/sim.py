"""Monte Carlo estimation of meeting times, for validating the exact solver.

Both walkers are stepped jointly, trial by trial, from a fixed start pair;
the first step ``t >= 1`` with co-location is recorded.  The hot loop runs
in a compiled extension when one was built, with a numpy fallback selected
at import; the two backends share one counter-based random stream, so a
given seed produces bit-identical results on either.  Set
``KRONMEET_SIM_BACKEND=python`` (or ``cython``) to force a backend.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .chain import as_matrix
from . import _simpure

try:
    from . import _simcore
except ImportError:  # extension not built; numpy path only
    _simcore = None

_MASK64 = (1 << 64) - 1


def _mix_int(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, i: int, j: int) -> int:
    """Base key of the (seed, start-pair) batch; trials split off it."""
    return _mix_int(_mix_int(seed) ^ _mix_int(((i + 1) << 32) ^ (j + 1)))


def available_backends() -> tuple[str, ...]:
    return ("cython", "python") if _simcore is not None else ("python",)


def default_backend() -> str:
    env = os.environ.get("KRONMEET_SIM_BACKEND")
    if env:
        if env not in available_backends():
            raise ValueError(
                f"KRONMEET_SIM_BACKEND={env!r} is not available; "
                f"choose from {available_backends()}"
            )
        return env
    return "cython" if _simcore is not None else "python"


def _kernel(backend: str | None):
    name = backend or default_backend()
    if name == "cython":
        if _simcore is None:
            raise ValueError("compiled backend requested but not built")
        return name, _simcore
    if name == "python":
        return name, _simpure
    raise ValueError(f"unknown backend {name!r}")


def _cumulative(A: np.ndarray) -> np.ndarray:
    cum = np.cumsum(A, axis=1)
    cum[:, -1] = 1.0  # guarantees the inverse-CDF scan terminates
    return np.ascontiguousarray(cum)


@dataclass(frozen=True)
class TrialBatch:
    """Outcome of one seeded batch of joint-walk trials from a start pair.

    ``times[t]`` is the meeting step of trial ``t`` or 0 if the trial was
    censored at the horizon.  ``mean`` and ``stderr`` are computed over the
    uncensored trials only (``inf`` when there are none); numpy's pairwise
    summation makes the aggregation order-independent.
    """

    pursuer_start: int
    evader_start: int
    trials: int
    max_steps: int
    seed: int
    backend: str
    times: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.times, dtype=np.int64)
        arr.flags.writeable = False
        object.__setattr__(self, "times", arr)

    @property
    def met(self) -> int:
        return int(np.count_nonzero(self.times))

    @property
    def censored(self) -> int:
        return self.trials - self.met

    @property
    def mean(self) -> float:
        hit = self.times[self.times > 0]
        if hit.size == 0:
            return math.inf
        return float(hit.mean())

    @property
    def stderr(self) -> float:
        hit = self.times[self.times > 0]
        if hit.size < 2:
            return math.inf
        return float(hit.std(ddof=1) / math.sqrt(hit.size))

    def to_dict(self) -> dict:
        """JSON form; node numbers are 1-based like all external formats."""
        mean, se = self.mean, self.stderr
        return {
            "i": self.pursuer_start + 1,
            "j": self.evader_start + 1,
            "trials": self.trials,
            "max_steps": self.max_steps,
            "seed": self.seed,
            "backend": self.backend,
            "mean": mean if math.isfinite(mean) else "inf",
            "stderr": se if math.isfinite(se) else "inf",
            "met": self.met,
            "censored": self.censored,
        }


def simulate_meeting(
    Pp,
    Pe,
    i: int,
    j: int,
    trials: int = 10_000,
    max_steps: int | None = None,
    seed: int = 0,
    backend: str | None = None,
) -> TrialBatch:
    """Estimate the meeting time from start pair ``(i, j)`` (0-based).

    Runs ``trials`` independent joint walks of both chains, each capped at
    ``max_steps`` (default ``100 * n**2``); trials that never meet are
    reported as censored, never dropped silently.  Identical seeds give
    identical batches.
    """
    Ap, Ae = as_matrix(Pp), as_matrix(Pe)
    n = Ap.shape[0]
    if Ae.shape != (n, n):
        raise ValueError(f"chains live on different node sets: {Ap.shape} vs {Ae.shape}")
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"start pair ({i}, {j}) out of range 0..{n - 1}")
    if trials < 1:
        raise ValueError("trials must be positive")
    if max_steps is None:
        max_steps = 100 * n * n
    name, kernel = _kernel(backend)
    cum_p, cum_e = _cumulative(Ap), _cumulative(Ae)
    key = stream_key(seed, i, j)
    times = kernel.run_pair(cum_p, cum_e, i, j, int(trials), int(max_steps), key)
    return TrialBatch(i, j, int(trials), int(max_steps), seed, name, times)


def simulate_all_pairs(
    Pp,
    Pe,
    trials: int = 10_000,
    max_steps: int | None = None,
    seed: int = 0,
    backend: str | None = None,
) -> list[TrialBatch]:
    """One :class:`TrialBatch` per start pair, row-major over (i, j)."""
    n = as_matrix(Pp).shape[0]
    return [
        simulate_meeting(Pp, Pe, i, j, trials, max_steps, seed, backend)
        for i in range(n)
        for j in range(n)
    ]
