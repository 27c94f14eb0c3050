"""Command-line front end.

Subcommands compose through JSON on stdin/stdout so strategies pipe into
meeting-time computations without temp files, e.g.::

    kronmeet gen ring 5 | kronmeet evader kemeny | kronmeet pursue --starts 20

Node numbers in all documents and flags are 1-based.  Meeting times use
the convention that co-located walkers at time 0 are not "met"; the first
co-location at step >= 1 counts, so diagonal entries are re-meeting times.

Exit codes: 0 success, 1 domain errors (reported as a JSON ``error``
object on stdout), 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .chain import (
    StochasticMatrix,
    chain_from_dict,
    equal_neighbor,
    stationary_distribution,
    uniform_distribution,
)
from .errors import KronmeetError, ParseError
from .graph import Digraph, export_dot, graph_to_dict, parse_graph, serialize_graph
from .meeting import finiteness, hitting_times, mean_meeting_stationary, mean_meeting_time, meeting_times, meeting_report_dict, jsonable_matrix
from .optimize import OptimizerConfig, minimize_mean_meeting
from .sim import available_backends, simulate_all_pairs, simulate_meeting
from .strategies import StrategySpec, build_strategy, hamiltonian_tour, max_entropy_chain, min_kemeny_chain

STRATEGY_NAMES = ("rw", "stationary", "tour", "reverse-tour", "entropy", "kemeny")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else "inf"
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def _emit(doc) -> None:
    json.dump(_jsonable(doc), sys.stdout)
    sys.stdout.write("\n")


class _Stdin:
    """Reads stdin once; several flags may refer to it."""

    def __init__(self):
        self._text = None

    def read(self) -> str:
        if self._text is None:
            self._text = sys.stdin.read()
        return self._text


def _read_source(spec: str, stdin: _Stdin) -> str:
    if spec == "-":
        return stdin.read()
    with open(spec, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_graph(args, stdin: _Stdin) -> Digraph:
    source = getattr(args, "graph", None) or "-"
    return parse_graph(_read_source(source, stdin))


def _load_pi(spec: str | None, chain: StochasticMatrix, stdin: _Stdin) -> np.ndarray:
    """Distribution from a flag: 'stationary' (default), 'uniform', or a file."""
    n = chain.n
    if spec is None or spec == "stationary":
        return stationary_distribution(chain)
    if spec == "uniform":
        return uniform_distribution(n)
    doc = json.loads(_read_source(spec, stdin))
    pi = np.asarray(doc, dtype=float)
    if pi.shape != (n,):
        raise ParseError(f"distribution length {pi.size} does not match n={n}")
    return pi


def _load_chain(spec: str, args, stdin: _Stdin, cfg: OptimizerConfig) -> StochasticMatrix:
    """A chain from a strategy name (built on --graph/stdin) or a JSON file."""
    if spec in STRATEGY_NAMES:
        G = _load_graph(args, stdin)
        kind, direction = {
            "rw": ("rw", "forward"),
            "stationary": ("stationary", "forward"),
            "tour": ("hamiltonian", "forward"),
            "reverse-tour": ("hamiltonian", "reverse"),
            "entropy": ("max_entropy", "forward"),
            "kemeny": ("min_kemeny", "forward"),
        }[spec]
        pi = uniform_distribution(G.n)
        built, _ = build_strategy(
            StrategySpec(kind, direction, pi), G, starts=cfg.starts, config=cfg
        )
        return built
    return chain_from_dict(json.loads(_read_source(spec, stdin)))


def _optimizer_config(args) -> OptimizerConfig:
    cfg = (
        OptimizerConfig.from_file(args.config)
        if getattr(args, "config", None)
        else OptimizerConfig()
    )
    if getattr(args, "starts", None) is not None:
        cfg = cfg.__class__(**{**cfg.to_dict(), "starts": args.starts})
    if getattr(args, "seed", None) is not None:
        cfg = cfg.__class__(**{**cfg.to_dict(), "seed": args.seed})
    threads = getattr(args, "threads", None)
    if threads is None:
        threads = int(os.environ.get("KRONMEET_THREADS", "1"))
    cfg = cfg.__class__(**{**cfg.to_dict(), "threads": threads})
    return cfg


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen(args, stdin: _Stdin) -> int:
    from .graph import make_complete, make_grid, make_ring

    loops = not args.no_self_loops
    if args.family == "ring":
        if len(args.size) != 1:
            raise ParseError("gen ring takes one size")
        G = make_ring(args.size[0], loops)
    elif args.family == "complete":
        if len(args.size) != 1:
            raise ParseError("gen complete takes one size")
        G = make_complete(args.size[0], loops)
    elif args.family == "grid":
        if len(args.size) != 2:
            raise ParseError("gen grid takes rows and cols")
        G = make_grid(args.size[0], args.size[1], loops)
    else:  # pragma: no cover - argparse restricts choices
        raise ParseError(f"unknown family {args.family!r}")
    if args.format == "edgelist":
        sys.stdout.write(serialize_graph(G, "edgelist"))
    elif args.format == "dot":
        sys.stdout.write(export_dot(G))
    else:
        doc = graph_to_dict(G)
        doc["config"] = {
            "family": args.family,
            "size": args.size,
            "self_loops": loops,
        }
        _emit(doc)
    return 0


def _cmd_meet(args, stdin: _Stdin) -> int:
    cfg = _optimizer_config(args)
    Pp = _load_chain(args.pursuer, args, stdin, cfg)
    Pe = _load_chain(args.evader, args, stdin, cfg)
    pi_p = _load_pi(args.pi_p, Pp, stdin)
    pi_e = _load_pi(args.pi_e, Pe, stdin)
    M = meeting_times(Pp, Pe, method=args.method)
    mean = mean_meeting_time(M, pi_p, pi_e)
    report = finiteness(Pp, Pe)
    doc = meeting_report_dict(M, mean, report.finite_pairs)
    doc["pi_p"] = pi_p
    doc["pi_e"] = pi_e
    doc["config"] = {"method": args.method, **cfg.to_dict()}
    _emit(doc)
    return 0


def _cmd_finite(args, stdin: _Stdin) -> int:
    cfg = _optimizer_config(args)
    Pp = _load_chain(args.pursuer, args, stdin, cfg)
    Pe = _load_chain(args.evader, args, stdin, cfg)
    doc = finiteness(Pp, Pe).to_dict()
    doc["config"] = cfg.to_dict()
    _emit(doc)
    return 0


def _cmd_hit(args, stdin: _Stdin) -> int:
    cfg = _optimizer_config(args)
    P = _load_chain(args.chain, args, stdin, cfg)
    H = hitting_times(P)
    pi = stationary_distribution(P)
    doc = {
        "H": jsonable_matrix(H),
        "kemeny": mean_meeting_stationary(pi, P, pi),
        "pi": pi,
        "config": cfg.to_dict(),
    }
    _emit(doc)
    return 0


def _cmd_evader(args, stdin: _Stdin) -> int:
    cfg = _optimizer_config(args)
    G = _load_graph(args, stdin)
    pi_spec = args.pi or "uniform"
    if pi_spec == "uniform":
        pi = uniform_distribution(G.n)
    else:
        doc = json.loads(_read_source(pi_spec, stdin))
        pi = np.asarray(doc, dtype=float)
    kind, direction = {
        "rw": ("rw", "forward"),
        "stationary": ("stationary", "forward"),
        "tour": ("hamiltonian", "forward"),
        "reverse-tour": ("hamiltonian", "reverse"),
        "entropy": ("max_entropy", "forward"),
        "kemeny": ("min_kemeny", "forward"),
    }[args.kind]
    built, info = build_strategy(
        StrategySpec(kind, direction, pi), G, starts=cfg.starts, config=cfg
    )
    doc = built.to_dict()
    doc["kind"] = args.kind
    doc["pi"] = pi
    doc["config"] = cfg.to_dict()
    if info is not None:
        doc["objective"] = info.objective
        doc["converged"] = info.converged
        doc["kkt_residual"] = info.kkt_residual
    _emit(doc)
    return 0


def _cmd_pursue(args, stdin: _Stdin) -> int:
    cfg = _optimizer_config(args)
    source = args.evader or "-"
    evader_doc = json.loads(_read_source(source, stdin))
    Pe = chain_from_dict(evader_doc)
    if args.pi_e is not None:
        pi_e = _load_pi(args.pi_e, Pe, stdin)
    elif "pi" in evader_doc:
        pi_e = np.asarray(evader_doc["pi"], dtype=float)
    else:
        pi_e = stationary_distribution(Pe)
    pi_p = pi_e if args.pi_p is None else _load_pi(args.pi_p, Pe, stdin)
    result = minimize_mean_meeting(
        Pe.graph, Pe, pi_p=pi_p, pi_e=pi_e, config=cfg
    )
    doc = result.to_dict()
    doc["pi_p"] = pi_p
    doc["pi_e"] = pi_e
    _emit(doc)
    return 0


def _cmd_sim(args, stdin: _Stdin) -> int:
    cfg = _optimizer_config(args)
    Pp = _load_chain(args.pursuer, args, stdin, cfg)
    Pe = _load_chain(args.evader, args, stdin, cfg)
    kwargs = dict(
        trials=args.trials,
        max_steps=args.max_steps,
        seed=args.seed if args.seed is not None else 0,
        backend=args.backend,
    )
    if args.start is not None:
        i, j = args.start
        batches = [simulate_meeting(Pp, Pe, i - 1, j - 1, **kwargs)]
    else:
        batches = simulate_all_pairs(Pp, Pe, **kwargs)
    doc = {
        "pairs": [b.to_dict() for b in batches],
        "config": {
            **kwargs,
            "max_steps": batches[0].max_steps,
            "backend": batches[0].backend,
        },
    }
    _emit(doc)
    return 0


# ---------------------------------------------------------------------------
# experiment reproduction


def _pursue_objective(G, Pe, pi, cfg):
    return minimize_mean_meeting(G, Pe, pi_p=pi, pi_e=pi, config=cfg).objective


def _repro_table1(cfg: OptimizerConfig) -> dict:
    from .graph import make_ring

    rows = []
    for n in (5, 6):
        G = make_ring(n)
        uni = uniform_distribution(n)
        fast = min_kemeny_chain(G, uni, starts=cfg.starts, config=cfg)
        opt_fast = _pursue_objective(G, fast.chain, uni, cfg)
        ref_fast = (n + 1) / 2
        rw = equal_neighbor(G)
        opt_rw = _pursue_objective(G, rw, uni, cfg)
        ref_rw = mean_meeting_time(
            meeting_times(hamiltonian_tour(G), rw), uni, uni
        )
        rows.append(
            {
                "n": n,
                "evader": "fast",
                "evader_objective": fast.objective,
                "optimized": opt_fast,
                "reference": ref_fast,
                "best_response": "stationary or reverse tour" if n % 2 else "stationary",
                "discrepancy": abs(opt_fast - ref_fast),
                "flagged": abs(opt_fast - ref_fast) > 1e-6,
            }
        )
        rows.append(
            {
                # on rings the equal-neighbour walk is also the maximum
                # entropy chain, so one row covers both evader models
                "n": n,
                "evader": "rw/unpredictable",
                "optimized": opt_rw,
                "reference": ref_rw,
                "best_response": "hamiltonian tour",
                "discrepancy": abs(opt_rw - ref_rw),
                "flagged": opt_rw > ref_rw + 1e-6,
            }
        )
    return {"table": "ring best responses", "rows": rows}


def _repro_table2(cfg: OptimizerConfig) -> dict:
    from .graph import make_complete
    from .chain import validate

    rows = []
    for n in (5, 6):
        G = make_complete(n)
        uni = uniform_distribution(n)
        fast = min_kemeny_chain(G, uni, starts=cfg.starts, config=cfg)
        opt_fast = _pursue_objective(G, fast.chain, uni, cfg)
        ref_fast = (n + 1) / 2
        uniform_chain = validate(np.full((n, n), 1.0 / n), G)
        opt_u = _pursue_objective(G, uniform_chain, uni, cfg)
        rows.append(
            {
                "n": n,
                "evader": "fast",
                "evader_objective": fast.objective,
                "optimized": opt_fast,
                "reference": ref_fast,
                "best_response": "stationary or reverse tour" if n % 2 else "stationary",
                "discrepancy": abs(opt_fast - ref_fast),
                "flagged": abs(opt_fast - ref_fast) > 1e-6,
            }
        )
        rows.append(
            {
                "n": n,
                "evader": "rw/unpredictable",
                "optimized": opt_u,
                "reference": float(n),
                "best_response": "arbitrary (flat landscape)",
                "discrepancy": abs(opt_u - n),
                "flagged": abs(opt_u - n) > 1e-6,
            }
        )
    return {"table": "complete-graph best responses", "rows": rows}


def _repro_grid(cfg: OptimizerConfig, out_dir: str) -> dict:
    from .graph import make_grid

    os.makedirs(out_dir, exist_ok=True)
    G = make_grid(3, 3)
    uni = uniform_distribution(G.n)
    rw = equal_neighbor(G)
    pi_rw = stationary_distribution(rw)
    ent = max_entropy_chain(G, uni, config=cfg)
    kem = min_kemeny_chain(G, uni, starts=cfg.starts, config=cfg)
    cases = [
        ("rw", rw, pi_rw),
        ("entropy", ent.chain, uni),
        ("kemeny", kem.chain, uni),
    ]
    summary = []
    files = []
    for label, Pe, pi in cases:
        res = minimize_mean_meeting(G, Pe, pi_p=pi, pi_e=pi, config=cfg)
        for role, chain in (("evader", Pe), ("pursuer", res.chain)):
            path = os.path.join(out_dir, f"grid_{label}_{role}.dot")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(export_dot(G, chain=chain, pi=pi))
            files.append(path)
        summary.append(
            {
                "evader": label,
                "objective": res.objective,
                "converged": res.converged,
                "pursuer_self_transition_mass": float(np.mean(np.diag(res.chain.P))),
            }
        )
    return {"experiment": "grid 3x3 pursuit designs", "cases": summary, "dot_files": files}


def _cmd_repro(args, stdin: _Stdin) -> int:
    cfg = _optimizer_config(args)
    if args.target == "table1":
        doc = _repro_table1(cfg)
    elif args.target == "table2":
        doc = _repro_table2(cfg)
    else:
        doc = _repro_grid(cfg, args.out)
    doc["config"] = cfg.to_dict()
    _emit(doc)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kronmeet",
        description="Meeting times of two Markov-chain walkers on digraphs.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, graph=False, optimizer=False):
        if graph:
            p.add_argument("--graph", help="graph document (path, or '-' for stdin)")
        if optimizer:
            p.add_argument("--starts", type=int, help="number of optimizer starts")
            p.add_argument("--seed", type=int, help="root random seed")
            p.add_argument("--config", help="optimizer config file (JSON or TOML)")
        p.add_argument("--threads", type=int, help="worker cap (default $KRONMEET_THREADS or 1)")

    p = sub.add_parser("gen", help="generate a prototype graph")
    p.add_argument("family", choices=("ring", "complete", "grid"))
    p.add_argument("size", type=int, nargs="+")
    p.add_argument("--no-self-loops", action="store_true")
    p.add_argument("--format", choices=("json", "edgelist", "dot"), default="json")
    add_common(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("meet", help="exact meeting times of two chains")
    p.add_argument("--pursuer", required=True, help="chain file, '-', or strategy name")
    p.add_argument("--evader", required=True, help="chain file, '-', or strategy name")
    p.add_argument("--pi-p", dest="pi_p", help="'stationary' (default), 'uniform', or file")
    p.add_argument("--pi-e", dest="pi_e", help="'stationary' (default), 'uniform', or file")
    p.add_argument("--method", choices=("auto", "dense", "iterative"), default="auto")
    add_common(p, graph=True, optimizer=True)
    p.set_defaults(func=_cmd_meet)

    p = sub.add_parser("finite", help="classify start pairs by finiteness")
    p.add_argument("--pursuer", required=True)
    p.add_argument("--evader", required=True)
    add_common(p, graph=True, optimizer=True)
    p.set_defaults(func=_cmd_finite)

    p = sub.add_parser("hit", help="pairwise hitting times of one chain")
    p.add_argument("--chain", required=True, help="chain file, '-', or strategy name")
    add_common(p, graph=True, optimizer=True)
    p.set_defaults(func=_cmd_hit)

    p = sub.add_parser("evader", help="synthesize an evader strategy")
    p.add_argument("kind", choices=STRATEGY_NAMES)
    p.add_argument("--pi", help="'uniform' (default) or a distribution file")
    add_common(p, graph=True, optimizer=True)
    p.set_defaults(func=_cmd_evader)

    p = sub.add_parser("pursue", help="optimize the pursuer against an evader chain")
    p.add_argument("--evader", help="evader chain file (default stdin)")
    p.add_argument("--pi-p", dest="pi_p", help="'stationary', 'uniform', or file (default: evader's)")
    p.add_argument("--pi-e", dest="pi_e", help="override the evader distribution")
    add_common(p, optimizer=True)
    p.set_defaults(func=_cmd_pursue)

    p = sub.add_parser("sim", help="Monte Carlo meeting-time estimates")
    p.add_argument("--pursuer", required=True)
    p.add_argument("--evader", required=True)
    p.add_argument("--start", type=int, nargs=2, metavar=("I", "J"),
                   help="single 1-based start pair (default: all pairs)")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=available_backends())
    add_common(p, graph=True)
    p.set_defaults(func=_cmd_sim)

    p = sub.add_parser("repro", help="reproduce the reference experiments")
    p.add_argument("target", choices=("table1", "table2", "grid-figures"))
    p.add_argument("--out", default="repro-out", help="directory for DOT exports")
    add_common(p, optimizer=True)
    p.set_defaults(func=_cmd_repro)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    stdin = _Stdin()
    try:
        return args.func(args, stdin)
    except KronmeetError as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc)}})
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc)}})
        return 1


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    console_main()
