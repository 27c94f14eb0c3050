"""Meeting times of two Markov-chain walkers on digraphs.

Exact expected meeting times through the product-chain closed form,
finiteness classification of start pairs, hitting times and the Kemeny
constant as the stationary-evader special case, Monte Carlo validation,
and strategy design for both walkers by constrained optimization.
"""

from .errors import (
    InfeasibleError,
    InvalidSizeError,
    KronmeetError,
    NonUniqueStationaryError,
    ParseError,
    ReducibleChainError,
    UnsupportedGraphError,
    ValidationError,
)
from .graph import (
    Digraph,
    export_dot,
    is_strongly_connected,
    make_complete,
    make_grid,
    make_ring,
    parse_graph,
    serialize_graph,
    strongly_connected_components,
)
from .chain import (
    ChainStructure,
    StochasticMatrix,
    chain_from_dict,
    classify,
    entropy_rate,
    equal_neighbor,
    stationary_distribution,
    uniform_distribution,
    validate,
)
from .meeting import (
    FinitenessReport,
    ProductChain,
    finiteness,
    hitting_times,
    kron,
    mean_meeting_stationary,
    mean_meeting_time,
    meeting_times,
    product_chain,
    spectral_radius_lt_one,
    unvec,
    vec,
)
from .optimize import (
    FeasibleSet,
    GradientCheckReport,
    OptimizationResult,
    OptimizerConfig,
    gradient_check,
    maximize_entropy,
    minimize_kemeny,
    minimize_mean_meeting,
)
from .sim import TrialBatch, available_backends, default_backend, simulate_meeting
from .strategies import (
    StrategySpec,
    build_strategy,
    hamiltonian_tour,
    max_entropy_chain,
    min_kemeny_chain,
    stationary_chain,
)

__version__ = "0.1.0"

__all__ = [
    "ChainStructure",
    "Digraph",
    "FeasibleSet",
    "FinitenessReport",
    "GradientCheckReport",
    "InfeasibleError",
    "InvalidSizeError",
    "KronmeetError",
    "NonUniqueStationaryError",
    "OptimizationResult",
    "OptimizerConfig",
    "ParseError",
    "ProductChain",
    "ReducibleChainError",
    "StochasticMatrix",
    "StrategySpec",
    "TrialBatch",
    "UnsupportedGraphError",
    "ValidationError",
    "available_backends",
    "build_strategy",
    "chain_from_dict",
    "classify",
    "default_backend",
    "entropy_rate",
    "equal_neighbor",
    "export_dot",
    "finiteness",
    "gradient_check",
    "hamiltonian_tour",
    "hitting_times",
    "is_strongly_connected",
    "kron",
    "make_complete",
    "make_grid",
    "make_ring",
    "max_entropy_chain",
    "maximize_entropy",
    "mean_meeting_stationary",
    "mean_meeting_time",
    "meeting_times",
    "min_kemeny_chain",
    "minimize_kemeny",
    "minimize_mean_meeting",
    "parse_graph",
    "product_chain",
    "serialize_graph",
    "simulate_meeting",
    "spectral_radius_lt_one",
    "stationary_chain",
    "stationary_distribution",
    "strongly_connected_components",
    "uniform_distribution",
    "unvec",
    "validate",
    "vec",
]
