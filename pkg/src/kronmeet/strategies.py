"""Named walker strategies: tours, staying put, random walk, and the two
optimized designs (maximum entropy rate, minimum Kemeny constant).

Hamiltonian tours are only constructed on graphs carrying the canonical
cycle ``0 -> 1 -> ... -> n-1 -> 0`` (rings and complete graphs as
generated); general Hamiltonian-cycle search is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import StochasticMatrix, equal_neighbor, uniform_distribution
from .errors import UnsupportedGraphError, ValidationError
from .graph import Digraph
from .optimize import (
    OptimizationResult,
    OptimizerConfig,
    maximize_entropy,
    minimize_kemeny,
)

KINDS = ("rw", "hamiltonian", "max_entropy", "min_kemeny", "stationary", "custom")


@dataclass(frozen=True)
class StrategySpec:
    """A parsed strategy request, as produced from CLI flags."""

    kind: str
    direction: str = "forward"
    target_pi: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.direction not in ("forward", "reverse"):
            raise ValueError(f"unknown tour direction {self.direction!r}")
        if self.kind in ("max_entropy", "min_kemeny") and self.target_pi is None:
            raise ValueError(f"{self.kind} needs a target stationary distribution")


def hamiltonian_tour(G: Digraph, direction: str = "forward") -> StochasticMatrix:
    """Permutation chain walking the canonical cycle; uniform stationary."""
    if direction not in ("forward", "reverse"):
        raise ValueError(f"unknown tour direction {direction!r}")
    shift = 1 if direction == "forward" else -1
    P = np.zeros((G.n, G.n))
    for i in range(G.n):
        j = (i + shift) % G.n
        if not G.has_edge(i, j):
            raise UnsupportedGraphError(
                f"graph has no arc ({i}, {j}); the canonical tour needs the "
                "full cycle (rings and complete graphs as generated carry it)"
            )
        P[i, j] = 1.0
    return StochasticMatrix(P, G)


def stationary_chain(G: Digraph) -> StochasticMatrix:
    """The identity chain: the walker never moves.

    Any distribution is stationary for it, which is what makes it a valid
    pursuit strategy at every target distribution.
    """
    missing = [i for i in range(G.n) if not G.has_edge(i, i)]
    if missing:
        raise ValidationError(
            f"staying put needs self-loops; missing at nodes {missing}"
        )
    return StochasticMatrix(np.eye(G.n), G)


def _tour_inits(G: Digraph):
    inits = []
    for direction in ("forward", "reverse"):
        try:
            inits.append(hamiltonian_tour(G, direction).P)
        except UnsupportedGraphError:
            pass
    return inits


def max_entropy_chain(
    G: Digraph, pi, config: OptimizerConfig | None = None
) -> OptimizationResult:
    """Most unpredictable chain with stationary distribution ``pi``."""
    return maximize_entropy(G, pi, config=config)


def min_kemeny_chain(
    G: Digraph,
    pi,
    starts: int = 20,
    config: OptimizerConfig | None = None,
) -> OptimizationResult:
    """Fastest chain at stationary ``pi`` (minimum Kemeny constant).

    Multi-start local search; canonical tours, when the graph carries
    them, join the deterministic warm starts.  ``starts_summary`` lists
    every local optimum found.
    """
    return minimize_kemeny(
        G, pi, starts=starts, config=config, extra_inits=_tour_inits(G)
    )


def build_strategy(
    spec: StrategySpec,
    G: Digraph,
    starts: int | None = None,
    config: OptimizerConfig | None = None,
):
    """Resolve a spec into ``(chain, info)``.

    ``info`` is ``None`` for closed-form strategies and the
    :class:`OptimizationResult` for the optimized ones.
    """
    if spec.kind == "rw":
        return equal_neighbor(G), None
    if spec.kind == "stationary":
        return stationary_chain(G), None
    if spec.kind == "hamiltonian":
        return hamiltonian_tour(G, spec.direction), None
    pi = spec.target_pi if spec.target_pi is not None else uniform_distribution(G.n)
    if spec.kind == "max_entropy":
        result = max_entropy_chain(G, pi, config=config)
        return result.chain, result
    if spec.kind == "min_kemeny":
        result = min_kemeny_chain(
            G, pi, starts=starts if starts is not None else 20, config=config
        )
        return result.chain, result
    raise ValueError(f"cannot build strategy of kind {spec.kind!r}")
