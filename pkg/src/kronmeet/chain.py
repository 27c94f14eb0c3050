"""Row-stochastic transition matrices bound to a digraph support.

Covers validation, structural classification (communicating classes,
periods, irreducibility), stationary distributions, entropy rate, and the
equal-neighbour random walk.  All functions are pure and all returned
values immutable, so concurrent use is safe.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import NonUniqueStationaryError, ValidationError
from .graph import Digraph, strongly_connected_components

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-12
STATIONARY_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class StochasticMatrix:
    """A validated row-stochastic matrix with hard zeros off its support.

    Construct through :func:`validate`; the raw constructor performs no
    checks.  ``P`` is read-only.
    """

    P: np.ndarray
    graph: Digraph

    def __post_init__(self):
        arr = np.asarray(self.P, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "P", arr)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.P, dtype=dtype)

    def to_dict(self) -> dict:
        from .graph import graph_to_dict

        return {"graph": graph_to_dict(self.graph), "P": self.P.tolist()}


def chain_from_dict(doc: dict) -> StochasticMatrix:
    """Rebuild a validated chain from the JSON-object form."""
    from .graph import graph_from_dict

    if not isinstance(doc, dict) or "graph" not in doc or "P" not in doc:
        raise ValidationError('chain JSON needs keys "graph" and "P"')
    G = graph_from_dict(doc["graph"])
    return validate(doc["P"], G)


def validate(P, G: Digraph, tol: float = ROW_SUM_TOL) -> StochasticMatrix:
    """Check a raw matrix against a digraph support and wrap it.

    Rows whose sums are within ``tol`` of 1 are renormalized exactly (the
    adjustment is logged); larger deviations, negative entries, and
    positive entries off the support are rejected.
    """
    arr = np.array(P, dtype=float)
    if arr.ndim != 2 or arr.shape != (G.n, G.n):
        raise ValidationError(f"matrix shape {arr.shape} does not match n={G.n}")
    neg = arr < -tol
    if neg.any():
        i, j = map(int, np.argwhere(neg)[0])
        raise ValidationError(f"negative entry {arr[i, j]:.3e} at ({i}, {j})")
    arr[arr < 0] = 0.0

    support = np.zeros((G.n, G.n), dtype=bool)
    for i, j in G.edges:
        support[i, j] = True
    bad = (arr > 0) & ~support
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise ValidationError(
            f"entry ({i}, {j}) = {arr[i, j]:.3e} is positive but ({i}, {j}) "
            "is not an edge"
        )

    sums = arr.sum(axis=1)
    dev = np.abs(sums - 1.0)
    worst = int(np.argmax(dev))
    if dev[worst] > tol:
        raise ValidationError(
            f"row {worst} sums to {sums[worst]:.15f} "
            f"(deficit {1.0 - sums[worst]:+.3e}, tolerance {tol:g})"
        )
    if dev[worst] > 0:
        arr /= sums[:, None]
        logger.debug("renormalized rows, worst deviation %.3e", dev[worst])
    return StochasticMatrix(arr, G)


def as_matrix(P) -> np.ndarray:
    """Plain float ndarray view of a chain or array-like."""
    return np.asarray(getattr(P, "P", P), dtype=float)


# ---------------------------------------------------------------------------
# structural classification


@dataclass(frozen=True)
class ChainStructure:
    """Communicating classes with their kind and period.

    ``classes`` partitions ``0..n-1``; ``kinds[k]`` is ``"absorbing"`` or
    ``"transient"``; ``periods[k]`` is the gcd of closed-walk lengths in
    class ``k`` (1 for classes with no closed walk).
    """

    classes: tuple[tuple[int, ...], ...]
    kinds: tuple[str, ...]
    periods: tuple[int, ...]

    @property
    def absorbing_classes(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            c for c, k in zip(self.classes, self.kinds) if k == "absorbing"
        )

    def is_irreducible(self) -> bool:
        return len(self.classes) == 1 and self.kinds[0] == "absorbing"

    def is_ergodic(self) -> bool:
        return self.is_irreducible() and self.periods[0] == 1


def _class_period(adj, members) -> int:
    # gcd of (level[u] + 1 - level[v]) over arcs inside the class; BFS levels
    # from an arbitrary member give the same gcd as enumerating cycles.
    inside = set(members)
    level = {members[0]: 0}
    queue = deque([members[0]])
    order = [members[0]]
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v in inside and v not in level:
                level[v] = level[u] + 1
                order.append(v)
                queue.append(v)
    g = 0
    for u in order:
        for v in adj[u]:
            if v in inside:
                g = math.gcd(g, level[u] + 1 - level[v])
    return abs(g) if g != 0 else 1


def classify(P) -> ChainStructure:
    """Communicating-class decomposition of the positive-support graph."""
    arr = as_matrix(P)
    n = arr.shape[0]
    adj = [np.flatnonzero(arr[i] > 0).tolist() for i in range(n)]
    comps = strongly_connected_components(adj)
    comp_of = {}
    for k, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = k
    kinds = []
    periods = []
    for k, comp in enumerate(comps):
        escapes = any(comp_of[w] != k for v in comp for w in adj[v])
        kinds.append("transient" if escapes else "absorbing")
        periods.append(_class_period(adj, comp))
    return ChainStructure(
        tuple(tuple(c) for c in comps), tuple(kinds), tuple(periods)
    )


def stationary_distribution(P) -> np.ndarray:
    """Unique stationary vector of a single-absorbing chain.

    Solves the null-space system of ``P^T - I`` stacked with the
    normalization row by least squares, which is exact at these sizes and
    requires no aperiodicity.
    """
    arr = as_matrix(P)
    n = arr.shape[0]
    structure = classify(arr)
    absorbing = structure.absorbing_classes
    if len(absorbing) != 1:
        names = ", ".join("{" + ", ".join(map(str, c)) + "}" for c in absorbing)
        raise NonUniqueStationaryError(
            f"chain has {len(absorbing)} absorbing classes ({names}); "
            "pass an explicit distribution instead",
            classes=absorbing,
        )
    A = np.vstack([arr.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi[np.abs(pi) < 1e-15] = 0.0
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = np.max(np.abs(pi @ arr - pi))
    if residual > STATIONARY_RESIDUAL_TOL:
        raise ValidationError(
            f"stationary solve residual {residual:.3e} exceeds "
            f"{STATIONARY_RESIDUAL_TOL:g}"
        )
    return pi


def entropy_rate(P, pi) -> float:
    """Entropy rate in nats, with the 0 log 0 = 0 convention."""
    arr = as_matrix(P)
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (arr.shape[0],):
        raise ValidationError(
            f"distribution length {pi.shape} does not match n={arr.shape[0]}"
        )
    mask = arr > 0
    terms = np.zeros_like(arr)
    terms[mask] = arr[mask] * np.log(arr[mask])
    return float(-(pi @ terms.sum(axis=1)))


def equal_neighbor(G: Digraph) -> StochasticMatrix:
    """Equal-neighbour random walk: probability 1/out-degree per arc."""
    P = np.zeros((G.n, G.n))
    for i in range(G.n):
        succ = G.successors[i]
        if not succ:
            raise ValidationError(f"node {i} has no outgoing edges")
        P[i, list(succ)] = 1.0 / len(succ)
    return StochasticMatrix(P, G)


def uniform_distribution(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)
