"""Directed graphs, prototype generators, and graph file formats.

Nodes are ``0..n-1`` inside the library.  All external documents (edge
lists, JSON, DOT) number nodes ``1..n``; the parser and serializer are the
only places that translate.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from .errors import InvalidSizeError, ParseError


@dataclass(frozen=True)
class Digraph:
    """Immutable digraph on nodes ``0..n-1`` with a set of ordered arcs.

    Self-loops are permitted; duplicate arcs cannot exist because ``edges``
    is a set.  Instances are safe to share between threads.
    """

    n: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"node count must be positive, got {self.n}")
        object.__setattr__(self, "edges", frozenset(map(tuple, self.edges)))
        for i, j in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        out = [[] for _ in range(self.n)]
        for i, j in self.edges:
            out[i].append(j)
        return tuple(tuple(sorted(js)) for js in out)

    @cached_property
    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        inc = [[] for _ in range(self.n)]
        for i, j in self.edges:
            inc[j].append(i)
        return tuple(tuple(sorted(js)) for js in inc)

    def out_degree(self, i: int) -> int:
        return len(self.successors[i])

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self.edges

    def has_all_self_loops(self) -> bool:
        return all((i, i) in self.edges for i in range(self.n))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def make_ring(n: int, with_self_loops: bool = True) -> Digraph:
    """Bidirectional ring on ``n >= 3`` nodes.

    Every node is joined to both cyclic neighbours; with
    ``with_self_loops`` each node also gets a loop (the default, since
    waiting in place is a legal move for the walkers studied here).
    """
    if n < 3:
        raise InvalidSizeError(f"ring needs at least 3 nodes, got {n}")
    edges = set()
    for i in range(n):
        edges.add((i, (i + 1) % n))
        edges.add((i, (i - 1) % n))
        if with_self_loops:
            edges.add((i, i))
    return Digraph(n, frozenset(edges))


def make_complete(n: int, with_self_loops: bool = True) -> Digraph:
    """Complete digraph on ``n >= 2`` nodes, optionally with loops."""
    if n < 2:
        raise InvalidSizeError(f"complete graph needs at least 2 nodes, got {n}")
    edges = {(i, j) for i in range(n) for j in range(n) if i != j}
    if with_self_loops:
        edges |= {(i, i) for i in range(n)}
    return Digraph(n, frozenset(edges))


def make_grid(rows: int, cols: int, with_self_loops: bool = True) -> Digraph:
    """4-neighbour lattice, row-major node numbering, bidirectional arcs.

    Node ``(r, c)`` maps to index ``r * cols + c``, so figures rendered from
    the same dimensions always agree on placement.
    """
    if rows < 2 or cols < 2:
        raise InvalidSizeError(f"grid needs rows, cols >= 2, got {rows}x{cols}")
    edges = set()
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if with_self_loops:
                edges.add((u, u))
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols:
                    edges.add((u, rr * cols + cc))
    return Digraph(rows * cols, frozenset(edges))


def _bfs_reach(adj, source: int, n: int) -> int:
    seen = [False] * n
    seen[source] = True
    queue = deque([source])
    count = 1
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count


def is_strongly_connected(G: Digraph) -> bool:
    """True iff every node reaches every other node."""
    if G.n == 1:
        return True
    if _bfs_reach(G.successors, 0, G.n) != G.n:
        return False
    return _bfs_reach(G.predecessors, 0, G.n) == G.n


def strongly_connected_components(graph_or_adj) -> list[list[int]]:
    """Strongly connected components, iterative Tarjan.

    Accepts a :class:`Digraph` or a plain adjacency list (sequence of
    integer sequences).  Components come out in reverse topological order
    of the condensation and each is sorted.
    """
    if isinstance(graph_or_adj, Digraph):
        adj = graph_or_adj.successors
    else:
        adj = graph_or_adj
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    onstack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, ptr = work[-1]
            if ptr == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                onstack[v] = True
            descended = False
            neighbors = adj[v]
            for k in range(ptr, len(neighbors)):
                w = neighbors[k]
                if index[w] == -1:
                    work[-1] = (v, k + 1)
                    work.append((w, 0))
                    descended = True
                    break
                if onstack[w]:
                    low[v] = min(low[v], index[w])
            if descended:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comps


# ---------------------------------------------------------------------------
# file formats


def parse_graph(text: str) -> Digraph:
    """Parse an edge-list or JSON graph document (1-based node numbers).

    Edge-list form: first non-blank line holds ``n``, each following line
    one ``i j`` pair.  JSON form: ``{"n": int, "edges": [[i, j], ...]}``.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _parse_json(text)
    return _parse_edgelist(text)


def _parse_json(text: str) -> Digraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return graph_from_dict(doc)


def graph_from_dict(doc) -> Digraph:
    """Build a digraph from the JSON-object form (1-based edges)."""
    if not isinstance(doc, dict) or "n" not in doc or "edges" not in doc:
        raise ParseError('graph JSON needs keys "n" and "edges"')
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise ParseError(f'"n" must be a positive integer, got {n!r}')
    edges = set()
    for pair in doc["edges"]:
        if len(pair) != 2:
            raise ParseError(f"edge {pair!r} is not a pair")
        i, j = pair
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(f"edge ({i}, {j}) out of range 1..{n}")
        edges.add((i - 1, j - 1))
    return Digraph(n, frozenset(edges))


def _parse_edgelist(text: str) -> Digraph:
    n = None
    edges = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 1:
                raise ParseError("first line must hold the node count", lineno)
            try:
                n = int(parts[0])
            except ValueError:
                raise ParseError(f"node count {parts[0]!r} is not an integer", lineno)
            if n < 1:
                raise ParseError(f"node count must be positive, got {n}", lineno)
            continue
        if len(parts) != 2:
            raise ParseError(f"expected 'i j', got {line!r}", lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer endpoint in {line!r}", lineno)
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(f"node out of range 1..{n} in {line!r}", lineno)
        edges.add((i - 1, j - 1))
    if n is None:
        raise ParseError("empty document")
    return Digraph(n, frozenset(edges))


def graph_to_dict(G: Digraph) -> dict:
    """JSON-object form with 1-based, lexicographically sorted edges."""
    return {"n": G.n, "edges": [[i + 1, j + 1] for i, j in G.sorted_edges()]}


def serialize_graph(G: Digraph, fmt: str = "edgelist") -> str:
    """Serialize to the canonical edge-list or JSON document.

    Edges are emitted sorted, so ``parse(serialize(G))`` reproduces ``G``
    and serializing twice yields byte-identical documents.
    """
    if fmt == "edgelist":
        lines = [str(G.n)]
        lines += [f"{i + 1} {j + 1}" for i, j in G.sorted_edges()]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        return json.dumps(graph_to_dict(G))
    raise ValueError(f"unknown graph format {fmt!r}")


def export_dot(G: Digraph, chain=None, pi=None, name: str = "G") -> str:
    """GraphViz DOT document for figure reproduction.

    When ``chain`` (a transition matrix or an object exposing one) is
    given, only its positive arcs are drawn and each arc's colour alpha
    channel encodes the transition probability; ``pi`` scales node size by
    stationary weight.
    """
    P = None
    if chain is not None:
        import numpy as np

        P = np.asarray(getattr(chain, "P", chain), dtype=float)
        if P.shape != (G.n, G.n):
            raise ValueError(f"chain shape {P.shape} does not match n={G.n}")
    lines = [f"digraph {name} {{"]
    for i in range(G.n):
        attrs = [f'label="{i + 1}"']
        if pi is not None:
            w = 0.25 + 1.25 * float(pi[i]) / max(float(max(pi)), 1e-300)
            attrs += [f'width="{w:.3f}"', 'shape="circle"', 'fixedsize="true"']
        lines.append(f"  {i + 1} [{', '.join(attrs)}];")
    for i, j in G.sorted_edges():
        if P is None:
            lines.append(f"  {i + 1} -> {j + 1};")
        else:
            p = float(P[i, j])
            if p <= 0.0:
                continue
            alpha = max(16, min(255, round(255 * p)))
            lines.append(
                f'  {i + 1} -> {j + 1} [color="#000000{alpha:02x}", '
                f'label="{p:.3f}"];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
