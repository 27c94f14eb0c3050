"""Meeting times of two independent walkers via the product chain.

Two chains ``Pp`` (pursuer) and ``Pe`` (evader) on a common node set walk
simultaneously; the meeting time from start pair ``(i, j)`` is the first
step ``t >= 1`` at which both occupy one node.  Walking the pair is a
single chain on ``n^2`` product states with transition matrix
``kron(Pe, Pp)``, and the expected meeting times solve

    vec(M) = ones + kron(Pe, Pp) @ E @ vec(M)

where ``E`` zeroes the columns of the co-location states.  This module
computes ``M`` exactly, classifies which start pairs meet in finite
expected time, and recovers single-chain hitting times as the special case
of a stationary (identity-chain) evader.

Index convention, pinned by tests: product state ``s = j * n + i`` holds
pursuer node ``i`` and evader node ``j`` (0-based), so ``vec`` stacks
columns of ``M`` and ``vec(M)[s] == M[i, j]``.

Note the ``t >= 1`` convention: a pair starting co-located is *not* counted
as met at time 0, so the diagonal of ``M`` holds re-meeting times (they are
first-return times when the evader is the identity chain).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .chain import as_matrix, classify
from .errors import ReducibleChainError, ValidationError

DENSE_SIZE_LIMIT = 60  # above this n the n^2 system is solved iteratively
SOLVE_RESIDUAL_TOL = 1e-9
ITERATIVE_TOL = 1e-10
ITERATIVE_MAX_ITER = 10**6


def kron(A, B) -> np.ndarray:
    """Kronecker product with the standard block layout."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2:
        raise ValueError("kron expects two matrices")
    return np.kron(A, B)


def vec(C) -> np.ndarray:
    """Column-stacking vectorization."""
    C = np.asarray(C)
    if C.ndim != 2:
        raise ValueError("vec expects a matrix")
    return C.reshape(-1, order="F")


def unvec(v, n: int, m: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec` for an ``n x m`` matrix."""
    m = n if m is None else m
    v = np.asarray(v)
    if v.size != n * m:
        raise ValueError(f"cannot unvec length {v.size} into {n}x{m}")
    return v.reshape((n, m), order="F")


@dataclass(frozen=True)
class ProductChain:
    """The joint walk of (pursuer, evader) as one chain on ``n^2`` states."""

    Q: np.ndarray
    n: int

    def state(self, i: int, j: int) -> int:
        """Product state of pursuer node ``i`` and evader node ``j``."""
        return j * self.n + i

    def pair(self, s: int) -> tuple[int, int]:
        """(pursuer node, evader node) of product state ``s``."""
        return s % self.n, s // self.n

    def diagonal_states(self) -> np.ndarray:
        """States where the walkers are co-located."""
        return np.arange(self.n) * (self.n + 1)

    def killed(self) -> np.ndarray:
        """``Q @ E``: the chain with arcs into co-location states removed."""
        Qk = self.Q.copy()
        Qk[:, self.diagonal_states()] = 0.0
        return Qk


def product_chain(Pp, Pe) -> ProductChain:
    Ap, Ae = as_matrix(Pp), as_matrix(Pe)
    _check_same_nodes(Ap, Ae)
    return ProductChain(np.kron(Ae, Ap), Ap.shape[0])


def _check_same_nodes(Ap: np.ndarray, Ae: np.ndarray) -> int:
    if Ap.ndim != 2 or Ap.shape[0] != Ap.shape[1]:
        raise ValueError(f"pursuer matrix is not square: {Ap.shape}")
    if Ae.shape != Ap.shape:
        raise ValueError(
            f"chains live on different node sets: {Ap.shape} vs {Ae.shape}"
        )
    return Ap.shape[0]


# ---------------------------------------------------------------------------
# finiteness classification


@dataclass(frozen=True)
class FinitenessReport:
    """Which start pairs have finite expected meeting times.

    ``finite_pairs[i, j]`` refers to pursuer start ``i``, evader start
    ``j``.  For each infinite pair, ``witnesses`` holds a product pair
    ``(k, h)`` reachable from it out of which no walk leads back to any
    co-location state; replaying reachability on the support graphs
    verifies the claim.
    """

    finite_pairs: np.ndarray
    all_finite: bool
    witnesses: dict[tuple[int, int], tuple[int, int]]

    def to_dict(self) -> dict:
        return {
            "finite_pairs": self.finite_pairs.tolist(),
            "all_finite": bool(self.all_finite),
            "witnesses": {
                f"{i + 1},{j + 1}": [k + 1, h + 1]
                for (i, j), (k, h) in sorted(self.witnesses.items())
            },
        }


def _support_lists(A: np.ndarray, transpose: bool) -> list[np.ndarray]:
    M = A.T if transpose else A
    return [np.flatnonzero(M[i] > 0) for i in range(M.shape[0])]


def finiteness(Pp, Pe) -> FinitenessReport:
    """Classify all start pairs by finiteness of the meeting time.

    The dead set ``D`` holds product states with no walk to any
    co-location state (one reverse multi-source BFS over the product
    support).  A pair is infinite iff it lies in ``D`` or can reach ``D``
    before entering a co-location state; every other pair is absorbed into
    the co-location set almost surely, hence finite in expectation.
    """
    Ap, Ae = as_matrix(Pp), as_matrix(Pe)
    n = _check_same_nodes(Ap, Ae)
    n2 = n * n
    succ_p = _support_lists(Ap, transpose=False)
    succ_e = _support_lists(Ae, transpose=False)
    pred_p = _support_lists(Ap, transpose=True)
    pred_e = _support_lists(Ae, transpose=True)

    diag = [c * (n + 1) for c in range(n)]

    # D: complement of the set that reaches the diagonal in the full
    # product graph.  Predecessors of (k, h) are pred_p[k] x pred_e[h].
    reaches_diag = np.zeros(n2, dtype=bool)
    reaches_diag[diag] = True
    queue = deque(diag)
    while queue:
        t = queue.popleft()
        k, h = t % n, t // n
        for j in pred_e[h]:
            base = j * n
            for i in pred_p[k]:
                s = base + i
                if not reaches_diag[s]:
                    reaches_diag[s] = True
                    queue.append(s)

    if reaches_diag.all():
        finite = np.ones((n, n), dtype=bool)
        return FinitenessReport(finite, True, {})

    # Infinite states: D plus everything that reaches D in the killed
    # product graph (arcs into co-location states removed).  Co-location
    # states keep their outgoing arcs, so a co-located start is classified
    # through its successors, but nothing propagates *through* one.
    is_diag = np.zeros(n2, dtype=bool)
    is_diag[diag] = True
    infinite = ~reaches_diag
    witness = np.full(n2, -1, dtype=int)
    dead = np.flatnonzero(infinite)
    witness[dead] = dead
    queue = deque(dead.tolist())
    while queue:
        t = queue.popleft()
        if is_diag[t]:
            continue  # killed column: no arc enters t's role as intermediate
        k, h = t % n, t // n
        for j in pred_e[h]:
            base = j * n
            for i in pred_p[k]:
                s = base + i
                if not infinite[s]:
                    infinite[s] = True
                    witness[s] = witness[t]
                    queue.append(s)

    finite = ~infinite.reshape((n, n), order="F")
    witnesses = {}
    for s in np.flatnonzero(infinite):
        i, j = s % n, s // n
        w = witness[s]
        witnesses[(int(i), int(j))] = (int(w % n), int(w // n))
    return FinitenessReport(finite, False, witnesses)


def spectral_radius_lt_one(Q_killed, tol: float = 1e-12) -> bool:
    """Graph test for a row-substochastic matrix having spectral radius < 1.

    Holds iff every row summing to 1 has a walk (in the positive-support
    graph) to a row summing to less than 1.
    """
    Q = np.asarray(Q_killed, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {Q.shape}")
    m = Q.shape[0]
    sums = Q.sum(axis=1)
    if (sums > 1.0 + 1e-9).any():
        raise ValueError("matrix is not row-substochastic")
    deficient = sums < 1.0 - tol
    if deficient.all():
        return True
    pred = [np.flatnonzero(Q[:, t] > 0) for t in range(m)]
    reached = deficient.copy()
    queue = deque(np.flatnonzero(deficient).tolist())
    while queue:
        t = queue.popleft()
        for s in pred[t]:
            if not reached[s]:
                reached[s] = True
                queue.append(s)
    return bool(reached.all())


# ---------------------------------------------------------------------------
# meeting-time solves


def _killed_product(Ap: np.ndarray, Ae: np.ndarray) -> np.ndarray:
    n = Ap.shape[0]
    Q = np.kron(Ae, Ap)
    Q[:, np.arange(n) * (n + 1)] = 0.0
    return Q


def _solve_dense(Qk: np.ndarray) -> np.ndarray:
    m = Qk.shape[0]
    A = np.eye(m) - Qk
    x = scipy.linalg.solve(A, np.ones(m))
    residual = np.max(np.abs(A @ x - 1.0)) / max(np.max(np.abs(x)), 1.0)
    if residual > SOLVE_RESIDUAL_TOL:
        raise ValidationError(
            f"meeting-time solve residual {residual:.3e} exceeds "
            f"{SOLVE_RESIDUAL_TOL:g}"
        )
    return x


def _solve_iterative(
    Ap: np.ndarray,
    Ae: np.ndarray,
    finite: np.ndarray,
    tol: float,
    max_iter: int,
) -> np.ndarray:
    """Fixed point of M = 1 + Pp (M - diag M) Pe^T on the finite block.

    Works matrix-free through the product structure (never forms the
    n^2 x n^2 system), with geometric convergence because the killed chain
    restricted to the finite block is contractive.  Entries outside the
    block are pinned to zero during sweeps; their true value is infinite
    and no finite entry ever draws on them (the block is closed).
    """
    n = Ap.shape[0]
    M = np.where(finite, 1.0, 0.0)
    for _ in range(max_iter):
        M0 = M.copy()
        np.fill_diagonal(M0, 0.0)
        M_next = 1.0 + Ap @ M0 @ Ae.T
        M_next[~finite] = 0.0
        if np.max(np.abs((M_next - M)[finite])) <= tol:
            return M_next
        M = M_next
    raise ValidationError(
        f"value iteration did not reach {tol:g} within {max_iter} sweeps"
    )


def meeting_times(
    Pp,
    Pe,
    method: str = "auto",
    tol: float = ITERATIVE_TOL,
    max_iter: int = ITERATIVE_MAX_ITER,
) -> np.ndarray:
    """Expected meeting times for every start pair.

    Returns an ``n x n`` matrix with rows indexed by pursuer start and
    columns by evader start; entries are ``inf`` exactly for pairs whose
    meeting time is infinite, and the finite block is solved exactly (the
    restricted system is closed and nonsingular on that block).

    ``method`` is ``"dense"`` (LU), ``"iterative"`` (value iteration), or
    ``"auto"`` (dense up to ``DENSE_SIZE_LIMIT`` nodes).
    """
    Ap, Ae = as_matrix(Pp), as_matrix(Pe)
    n = _check_same_nodes(Ap, Ae)
    if method not in ("auto", "dense", "iterative"):
        raise ValueError(f"unknown method {method!r}")
    report = finiteness(Ap, Ae)
    use_dense = method == "dense" or (method == "auto" and n <= DENSE_SIZE_LIMIT)

    if use_dense:
        Qk = _killed_product(Ap, Ae)
        finite_states = vec(report.finite_pairs)
        if report.all_finite:
            sub = Qk
        else:
            idx = np.flatnonzero(finite_states)
            sub = Qk[np.ix_(idx, idx)]
        m = np.full(n * n, math.inf)
        m[finite_states] = _solve_dense(sub)
        return unvec(m, n)

    M = _solve_iterative(Ap, Ae, report.finite_pairs, tol, max_iter)
    M[~report.finite_pairs] = math.inf
    return M


def mean_meeting_time(M, pi_p, pi_e) -> float:
    """Stationary-weighted average of pairwise meeting times.

    ``inf`` whenever some infinite pair carries positive weight.
    """
    M = np.asarray(M, dtype=float)
    pi_p = np.asarray(pi_p, dtype=float)
    pi_e = np.asarray(pi_e, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or pi_p.shape != (n,) or pi_e.shape != (n,):
        raise ValueError("dimension mismatch between M and the distributions")
    w = np.outer(pi_p, pi_e)
    finite = np.isfinite(M)
    if (w[~finite] > 0).any():
        return math.inf
    return float(np.sum(w[finite] * M[finite]))


def hitting_times(Pp) -> np.ndarray:
    """Pairwise hitting times of an irreducible chain.

    A stationary evader is the identity chain, so ``meeting_times(Pp, I)``
    yields the expected travel time from ``i`` to ``j`` at entry ``(i, j)``;
    diagonal entries are first-return times ``1 / pi(i)``.
    """
    Ap = as_matrix(Pp)
    structure = classify(Ap)
    if not structure.is_irreducible():
        raise ReducibleChainError(
            f"hitting times need an irreducible chain; found "
            f"{len(structure.classes)} communicating classes"
        )
    return meeting_times(Ap, np.eye(Ap.shape[0]))


def mean_meeting_stationary(pi_e, Pp, pi_p) -> float:
    """Mean meeting time against a stationary evader with distribution ``pi_e``.

    Equals the Kemeny constant of ``Pp`` when ``pi_e == pi_p`` is the
    chain's stationary distribution.
    """
    H = hitting_times(Pp)
    return mean_meeting_time(H, pi_p, pi_e)


def jsonable_matrix(M) -> list:
    """Matrix as nested lists with ``inf`` rendered as the string "inf"."""
    out = []
    for row in np.asarray(M, dtype=float):
        out.append([x if math.isfinite(x) else "inf" for x in row.tolist()])
    return out


def meeting_report_dict(M, mean, finite_pairs) -> dict:
    """The JSON result schema shared by the library and the CLI."""
    return {
        "M": jsonable_matrix(M),
        "mean": mean if math.isfinite(mean) else "inf",
        "finite_pairs": np.asarray(finite_pairs, dtype=bool).tolist(),
    }
