"""Constrained optimization over row-stochastic matrices with fixed support.

Solves the three design programs used for walker strategies:

* minimum mean meeting time against a fixed evader (nonconvex),
* maximum entropy rate at a given stationary distribution (concave),
* minimum Kemeny constant at a given stationary distribution (nonconvex),

each over the polytope of chains supported on a digraph whose stationary
distribution is pinned to a target vector.  The stationarity equality is
handled by an augmented Lagrangian; the inner minimization is spectral
projected gradient on the per-row simplex-with-support (Barzilai-Borwein
steps, nonmonotone backtracking).  Objective gradients come from an
adjoint solve against the product-chain system, checked against finite
differences by :func:`gradient_check`.

Iterates whose mean meeting time is infinite are treated as value
``+inf``: the line search rejects the step and halves the step size, which
keeps the search inside the (open) finite region.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy.linalg

from .chain import StochasticMatrix, as_matrix, equal_neighbor, stationary_distribution, validate
from .errors import InfeasibleError, ValidationError
from .graph import Digraph
from .meeting import finiteness, unvec

_ENTROPY_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class OptimizerConfig:
    """Solver knobs; every field is echoed into results for reproducibility."""

    starts: int = 20
    seed: int = 0
    grad_tol: float = 1e-7
    constraint_tol: float = 1e-8
    max_outer: int = 500
    max_inner: int = 300
    penalty_init: float = 10.0
    penalty_growth: float = 10.0
    penalty_max: float = 1e12
    armijo: float = 1e-4
    step_min: float = 1e-14
    threads: int = 1

    def to_dict(self) -> dict:
        return {
            "starts": self.starts,
            "seed": self.seed,
            "grad_tol": self.grad_tol,
            "constraint_tol": self.constraint_tol,
            "max_outer": self.max_outer,
            "max_inner": self.max_inner,
            "penalty_init": self.penalty_init,
            "penalty_growth": self.penalty_growth,
            "penalty_max": self.penalty_max,
            "armijo": self.armijo,
            "step_min": self.step_min,
            "threads": self.threads,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "OptimizerConfig":
        unknown = set(doc) - set(cls().to_dict())
        if unknown:
            raise ValueError(f"unknown optimizer config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_file(cls, path) -> "OptimizerConfig":
        """Load from a JSON or TOML document (by extension)."""
        path = Path(path)
        data = path.read_bytes()
        if path.suffix.lower() == ".toml":
            try:
                import tomllib
            except ImportError:
                import tomli as tomllib
            return cls.from_dict(tomllib.loads(data.decode()))
        return cls.from_dict(json.loads(data.decode()))


# ---------------------------------------------------------------------------
# feasible set


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    k = v.size
    if k == 1:
        return np.ones(1)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, k + 1) > (css - 1.0))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@dataclass(frozen=True)
class FeasibleSet:
    """Row-stochastic matrices on a support pattern, with a target
    stationary distribution handled as an external equality constraint.

    ``project`` only enforces the per-row simplex-with-support geometry;
    stationarity is the augmented-Lagrangian's job.
    """

    support: np.ndarray
    target_pi: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=bool)
        pi = np.asarray(self.target_pi, dtype=float)
        n = support.shape[0]
        if support.shape != (n, n):
            raise ValidationError(f"support must be square, got {support.shape}")
        if pi.shape != (n,):
            raise ValidationError(f"target distribution length != {n}")
        if not support.any(axis=1).all():
            bad = int(np.flatnonzero(~support.any(axis=1))[0])
            raise ValidationError(f"node {bad} has no outgoing edges")
        if abs(pi.sum() - 1.0) > 1e-9 or (pi < 0).any():
            raise ValidationError("target distribution must be a probability vector")
        support.flags.writeable = False
        pi.flags.writeable = False
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "target_pi", pi)

    @classmethod
    def from_graph(cls, G: Digraph, target_pi) -> "FeasibleSet":
        support = np.zeros((G.n, G.n), dtype=bool)
        for i, j in G.edges:
            support[i, j] = True
        return cls(support, np.asarray(target_pi, dtype=float))

    @property
    def n(self) -> int:
        return self.support.shape[0]

    @property
    def _rows(self):
        rows = getattr(self, "_row_cache", None)
        if rows is None:
            rows = [np.flatnonzero(self.support[i]) for i in range(self.n)]
            object.__setattr__(self, "_row_cache", rows)
        return rows

    def project(self, P: np.ndarray) -> np.ndarray:
        """Row-wise projection: support zeros exact, rows on the simplex."""
        out = np.zeros_like(P, dtype=float)
        for i, idx in enumerate(self._rows):
            out[i, idx] = project_simplex(P[i, idx])
        return out

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        """Dirichlet(1) rows on the support: a uniform draw per row."""
        P = np.zeros((self.n, self.n))
        for i, idx in enumerate(self._rows):
            P[i, idx] = rng.dirichlet(np.ones(idx.size))
        return P

    def constraint(self, P: np.ndarray) -> np.ndarray:
        """Stationarity residual vector ``P^T pi - pi``."""
        return P.T @ self.target_pi - self.target_pi


# ---------------------------------------------------------------------------
# objectives (all minimized; ``sense`` on the wrapper flips reporting)


class _MeanMeetingObjective:
    """w^T vec(M(P)) with w = kron(pi_e, pi_p); adjoint-method gradient.

    Whether all meeting times are finite depends only on the support
    pattern of ``P``, so that check is cached by pattern; iterates whose
    pattern leaves the finite region evaluate to ``+inf``.
    """

    def __init__(self, Ae: np.ndarray, pi_p: np.ndarray, pi_e: np.ndarray):
        self.Ae = Ae
        self.n = Ae.shape[0]
        self.w = np.kron(pi_e, pi_p)
        self._diag = np.arange(self.n) * (self.n + 1)
        self._finite_cache: dict[bytes, bool] = {}
        self._eye = np.eye(self.n * self.n)

    def _all_finite(self, P: np.ndarray) -> bool:
        pattern = (P > 0).tobytes()
        hit = self._finite_cache.get(pattern)
        if hit is None:
            hit = finiteness(P, self.Ae).all_finite
            self._finite_cache[pattern] = hit
        return hit

    def _system(self, P: np.ndarray) -> np.ndarray | None:
        if not self._all_finite(P):
            return None
        Qk = np.kron(self.Ae, P)
        Qk[:, self._diag] = 0.0
        return self._eye - Qk

    def value(self, P: np.ndarray) -> float:
        A = self._system(P)
        if A is None:
            return math.inf
        m = scipy.linalg.solve(A, np.ones(self.n * self.n))
        return float(self.w @ m)

    def value_grad(self, P: np.ndarray) -> tuple[float, np.ndarray | None]:
        A = self._system(P)
        if A is None:
            return math.inf, None
        lu = scipy.linalg.lu_factor(A)
        m = scipy.linalg.lu_solve(lu, np.ones(self.n * self.n))
        y = scipy.linalg.lu_solve(lu, self.w, trans=1)
        M = unvec(m, self.n)
        Y = unvec(y, self.n)
        M0 = M.copy()
        np.fill_diagonal(M0, 0.0)
        grad = Y @ self.Ae @ M0.T
        return float(self.w @ m), grad


class _KemenyObjective(_MeanMeetingObjective):
    """Mean meeting time against a stationary evader sharing ``pi``."""

    def __init__(self, n: int, pi: np.ndarray):
        super().__init__(np.eye(n), pi, pi)


class _NegEntropyObjective:
    """Negated entropy rate at a fixed distribution; gradient floored
    near zero entries so boundary iterates stay differentiable."""

    def __init__(self, pi: np.ndarray):
        self.pi = pi

    def value(self, P: np.ndarray) -> float:
        mask = P > 0
        terms = np.zeros_like(P)
        terms[mask] = P[mask] * np.log(P[mask])
        return float(self.pi @ terms.sum(axis=1))

    def value_grad(self, P: np.ndarray) -> tuple[float, np.ndarray]:
        safe = np.maximum(P, _ENTROPY_FLOOR)
        grad = self.pi[:, None] * (np.log(safe) + 1.0)
        return self.value(P), grad


# ---------------------------------------------------------------------------
# augmented Lagrangian engine


@dataclass
class _SolveStats:
    P: np.ndarray
    objective: float
    iterations: int
    converged: bool
    kkt_residual: float
    constraint_residual: float


def _aug_value(obj, fs, P, lam, rho):
    f = obj.value(P)
    if not math.isfinite(f):
        return math.inf
    c = fs.constraint(P)
    return f + lam @ c + 0.5 * rho * (c @ c)


def _aug_value_grad(obj, fs, P, lam, rho):
    f, g = obj.value_grad(P)
    if not math.isfinite(f):
        return math.inf, None
    c = fs.constraint(P)
    L = f + lam @ c + 0.5 * rho * (c @ c)
    gL = g + np.outer(fs.target_pi, lam + rho * c)
    return L, gL


def _pg_norm(fs, P, g):
    return float(np.linalg.norm(fs.project(P - g) - P))


def _inner_spg(obj, fs, P, lam, rho, tol, cfg):
    """Spectral projected gradient on the AL function.

    Barzilai-Borwein steps with a nonmonotone (10-value) Armijo search
    along the feasible segment; far better conditioned than plain
    projected gradient on the near-singular meeting-time landscapes.
    Returns (point, projected-gradient norm, iterations, stalled).
    """
    L, g = _aug_value_grad(obj, fs, P, lam, rho)
    if g is None:
        return P, math.inf, 0, True
    alpha = 1.0
    history = [L]
    iters = 0
    stalled = False
    for _ in range(cfg.max_inner):
        d = fs.project(P - alpha * g) - P
        gd = float(np.sum(g * d))
        pg = _pg_norm(fs, P, g)
        if pg <= tol:
            break
        if gd >= -1e-16 * max(1.0, abs(L)):
            stalled = pg > tol
            break
        t = 1.0
        L_ref = max(history)
        accepted = False
        while t >= cfg.step_min:
            P_new = P + t * d  # convex combination: stays feasible
            L_new = _aug_value(obj, fs, P_new, lam, rho)
            if L_new <= L_ref + cfg.armijo * t * gd:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            stalled = True
            break
        L_new, g_new = _aug_value_grad(obj, fs, P_new, lam, rho)
        if g_new is None:
            raise ValidationError("line search accepted an infinite iterate")
        s = P_new - P
        y = g_new - g
        sy = float(np.sum(s * y))
        ss = float(np.sum(s * s))
        alpha = min(max(ss / sy, 1e-12), 1e8) if sy > 1e-30 else 1e8
        P, L, g = P_new, L_new, g_new
        history.append(L)
        if len(history) > 10:
            history.pop(0)
        iters += 1
    return P, _pg_norm(fs, P, g), iters, stalled


def _solve_single(obj, fs, P0, cfg: OptimizerConfig) -> _SolveStats:
    P = fs.project(np.asarray(P0, dtype=float))
    lam = np.zeros(fs.n)
    rho = cfg.penalty_init
    omega = max(1e-3, cfg.grad_tol)
    total = 0
    c_prev = math.inf
    kkt = math.inf
    cres = math.inf
    converged = False
    stagnant = 0
    if not math.isfinite(obj.value(P)):
        return _SolveStats(
            P, math.inf, 0, False, math.inf,
            float(np.max(np.abs(fs.constraint(P)))),
        )
    for _ in range(cfg.max_outer):
        P, kkt, it, stalled = _inner_spg(obj, fs, P, lam, rho, omega, cfg)
        total += it
        c = fs.constraint(P)
        cres = float(np.max(np.abs(c)))
        if cres <= cfg.constraint_tol and kkt <= cfg.grad_tol:
            converged = True
            break
        lam = lam + rho * c
        if cres > 0.25 * c_prev:
            rho = min(rho * cfg.penalty_growth, cfg.penalty_max)
        stagnant = stagnant + 1 if (stalled and cres >= 0.9 * c_prev) else 0
        if stagnant >= 3:
            break  # inner solver at its noise floor and multipliers settled
        c_prev = cres
        omega = max(omega / 5.0, cfg.grad_tol)
        if rho >= cfg.penalty_max and kkt <= cfg.grad_tol and cres > 1e-6:
            break  # constraint stalled at full penalty: infeasible support/pi
    return _SolveStats(P, obj.value(P), total, converged, kkt, cres)


# ---------------------------------------------------------------------------
# multi-start orchestration


@dataclass(frozen=True)
class OptimizationResult:
    """Best chain found plus convergence diagnostics and per-start values."""

    chain: StochasticMatrix
    objective: float
    iterations: int
    converged: bool
    kkt_residual: float
    constraint_residual: float
    starts_summary: tuple[tuple[int, float], ...]
    config: OptimizerConfig

    def to_dict(self) -> dict:
        return {
            "chain": self.chain.to_dict(),
            "objective": self.objective if math.isfinite(self.objective) else "inf",
            "iterations": self.iterations,
            "converged": self.converged,
            "kkt_residual": self.kkt_residual,
            "constraint_residual": self.constraint_residual,
            "starts_summary": [
                [idx, obj if math.isfinite(obj) else "inf"]
                for idx, obj in self.starts_summary
            ],
            "config": self.config.to_dict(),
        }


def _initial_points(G, fs, count, seed, extra_inits, include_identity=True):
    """Deterministic start list: named strategies first, Dirichlet fill.

    The list for ``count`` starts is a prefix of the list for ``count + 1``,
    which makes the best objective non-increasing in ``count``.
    """
    named = [equal_neighbor(G).P]
    if include_identity and G.has_all_self_loops():
        named.append(np.eye(G.n))
    for P in extra_inits or ():
        named.append(as_matrix(P))
    inits = named[:count]
    k = len(inits)
    while len(inits) < count:
        rng = np.random.default_rng([seed, k])
        inits.append(fs.random_point(rng))
        k += 1
    return inits


def _run_starts(obj, fs, inits, cfg: OptimizerConfig):
    def solve(pair):
        idx, P0 = pair
        return idx, _solve_single(obj, fs, P0, cfg)

    jobs = list(enumerate(inits))
    if cfg.threads > 1 and len(jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(solve, jobs))
    else:
        results = [solve(job) for job in jobs]
    results.sort(key=lambda r: r[0])
    return results


def _finish(G, obj, fs, inits, cfg, sense) -> OptimizationResult:
    results = _run_starts(obj, fs, inits, cfg)
    flip = -1.0 if sense == "max" else 1.0
    summary = tuple(
        (idx, flip * stats.objective if math.isfinite(stats.objective) else math.inf)
        for idx, stats in results
    )
    _, best = min(results, key=lambda r: (r[1].objective, r[0]))
    if not math.isfinite(best.objective):
        raise InfeasibleError(
            "no optimizer start produced a finite objective on this support",
            residual=best.constraint_residual,
        )
    if best.constraint_residual > 1e-6:
        raise InfeasibleError(
            "stationarity constraint residual "
            f"{best.constraint_residual:.3e} stayed bounded away from zero; "
            "no chain on this support has the target stationary distribution",
            residual=best.constraint_residual,
        )
    return OptimizationResult(
        chain=validate(best.P, G),
        objective=flip * best.objective,
        iterations=best.iterations,
        converged=best.converged,
        kkt_residual=best.kkt_residual,
        constraint_residual=best.constraint_residual,
        starts_summary=summary,
        config=cfg,
    )


def _resolve_config(config, starts) -> OptimizerConfig:
    cfg = config or OptimizerConfig()
    if starts is not None:
        cfg = replace(cfg, starts=int(starts))
    return cfg


def _check_positive(pi, name):
    pi = np.asarray(pi, dtype=float)
    if (pi <= 0).any():
        raise ValidationError(f"{name} must be strictly positive")
    return pi


# ---------------------------------------------------------------------------
# public programs


def minimize_mean_meeting(
    G: Digraph,
    Pe,
    pi_p=None,
    pi_e=None,
    starts: int | None = None,
    config: OptimizerConfig | None = None,
    extra_inits=None,
) -> OptimizationResult:
    """Design the pursuer: minimize the mean meeting time against ``Pe``.

    ``pi_e`` defaults to the evader's unique stationary distribution and
    ``pi_p`` to ``pi_e`` (the usual experimental setup).  Multi-start
    projected-gradient under an augmented Lagrangian; starts are the
    equal-neighbour walk, the identity when the support allows it, any
    ``extra_inits``, then seeded Dirichlet draws.
    """
    cfg = _resolve_config(config, starts)
    Ae = as_matrix(Pe)
    if pi_e is None:
        pi_e = stationary_distribution(Ae)
    pi_e = np.asarray(pi_e, dtype=float)
    pi_p = pi_e if pi_p is None else np.asarray(pi_p, dtype=float)
    _check_positive(pi_p, "pursuer stationary distribution")
    fs = FeasibleSet.from_graph(G, pi_p)
    obj = _MeanMeetingObjective(Ae, pi_p, pi_e)
    inits = _initial_points(G, fs, cfg.starts, cfg.seed, extra_inits)
    return _finish(G, obj, fs, inits, cfg, sense="min")


def maximize_entropy(
    G: Digraph,
    pi,
    config: OptimizerConfig | None = None,
) -> OptimizationResult:
    """Most unpredictable chain: maximize entropy rate at stationary ``pi``.

    The program is concave over a convex set, so a single start finds the
    global maximum; infeasible support/``pi`` combinations raise
    :class:`InfeasibleError` with the residual as certificate.
    """
    cfg = _resolve_config(config, starts=1)
    pi = _check_positive(pi, "stationary distribution")
    fs = FeasibleSet.from_graph(G, pi)
    obj = _NegEntropyObjective(pi)
    inits = _initial_points(G, fs, 1, cfg.seed, None)
    return _finish(G, obj, fs, inits, cfg, sense="max")


def minimize_kemeny(
    G: Digraph,
    pi,
    starts: int | None = None,
    config: OptimizerConfig | None = None,
    extra_inits=None,
) -> OptimizationResult:
    """Fastest chain: minimize the mean meeting time against a stationary
    evader sharing ``pi`` (the Kemeny constant at ``pi``)."""
    cfg = _resolve_config(config, starts)
    pi = _check_positive(pi, "stationary distribution")
    fs = FeasibleSet.from_graph(G, pi)
    obj = _KemenyObjective(G.n, pi)
    # the identity never hits anything, so it is no use as a warm start here
    inits = _initial_points(
        G, fs, cfg.starts, cfg.seed, extra_inits, include_identity=False
    )
    return _finish(G, obj, fs, inits, cfg, sense="min")


# ---------------------------------------------------------------------------
# gradient verification


@dataclass(frozen=True)
class GradientCheckReport:
    objective: str
    max_rel_error: float
    coords: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tol


def _objective_by_name(name, n, *, evader=None, pi=None, pi_p=None, pi_e=None):
    uniform = np.full(n, 1.0 / n)
    if name == "entropy":
        return _NegEntropyObjective(uniform if pi is None else np.asarray(pi, float))
    if name == "kemeny":
        return _KemenyObjective(n, uniform if pi is None else np.asarray(pi, float))
    if name == "mean_meeting":
        if evader is None:
            raise ValueError("mean_meeting check needs an evader chain")
        return _MeanMeetingObjective(
            as_matrix(evader),
            uniform if pi_p is None else np.asarray(pi_p, float),
            uniform if pi_e is None else np.asarray(pi_e, float),
        )
    raise ValueError(f"unknown objective {name!r}")


def gradient_check(
    objective: str,
    point,
    *,
    evader=None,
    pi=None,
    pi_p=None,
    pi_e=None,
    step: float = 1e-6,
    tol: float = 1e-5,
) -> GradientCheckReport:
    """Compare the adjoint gradient to central finite differences.

    Differences are taken coordinate-wise over the free (support) entries
    of a strictly feasible point; the reported error is the worst absolute
    deviation scaled by ``max(1, |grad|_inf)``.
    """
    P0 = as_matrix(point)
    n = P0.shape[0]
    if isinstance(point, StochasticMatrix):
        support = np.zeros((n, n), dtype=bool)
        for i, j in point.graph.edges:
            support[i, j] = True
    else:
        support = P0 > 0
    obj = _objective_by_name(
        objective, n, evader=evader, pi=pi, pi_p=pi_p, pi_e=pi_e
    )
    _, grad = obj.value_grad(P0)
    coords = np.argwhere(support)
    fd = np.zeros(len(coords))
    for k, (a, b) in enumerate(coords):
        hi = P0.copy()
        lo = P0.copy()
        hi[a, b] += step
        lo[a, b] -= step
        fd[k] = (obj.value(hi) - obj.value(lo)) / (2.0 * step)
    analytic = grad[coords[:, 0], coords[:, 1]]
    scale = max(1.0, float(np.max(np.abs(fd))))
    err = float(np.max(np.abs(analytic - fd))) / scale
    return GradientCheckReport(objective, err, len(coords), tol)
