import json
from collections import deque

import pytest

from kronmeet import (
    Digraph,
    InvalidSizeError,
    ParseError,
    export_dot,
    is_strongly_connected,
    make_complete,
    make_grid,
    make_ring,
    parse_graph,
    serialize_graph,
    strongly_connected_components,
)


def bfs_reaches_all(G, source):
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in G.successors[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == G.n


def strongly_connected_oracle(G):
    # independent oracle: BFS from every node
    return all(bfs_reaches_all(G, s) for s in range(G.n))


class TestRing:
    def test_ring3_with_loops_edge_count(self):
        G = make_ring(3, True)
        assert G.n == 3
        assert len(G.edges) == 9
        assert sum(1 for i, j in G.edges if i == j) == 3

    def test_ring5_strongly_connected_scc_oracle(self):
        G = make_ring(5, True)
        assert len(G.edges) == 15
        comps = strongly_connected_components(G)
        assert len(comps) == 1 and len(comps[0]) == 5

    def test_ring_too_small(self):
        with pytest.raises(InvalidSizeError):
            make_ring(2, True)

    def test_ring_without_loops(self):
        G = make_ring(4, False)
        assert len(G.edges) == 8
        assert all(i != j for i, j in G.edges)


class TestComplete:
    def test_complete5_with_loops(self):
        assert len(make_complete(5, True).edges) == 25

    def test_complete2_no_loops(self):
        assert make_complete(2, False).edges == frozenset({(0, 1), (1, 0)})

    def test_complete6_scc_oracle(self):
        G = make_complete(6, True)
        assert len(G.edges) == 36
        comps = strongly_connected_components(G)
        assert len(comps) == 1 and len(comps[0]) == 6

    def test_complete_too_small(self):
        with pytest.raises(InvalidSizeError):
            make_complete(1, True)


class TestGrid:
    def test_grid33_counts_by_enumeration(self):
        G = make_grid(3, 3, True)
        assert G.n == 9
        # enumerate lattice arcs independently
        arcs = 0
        for r in range(3):
            for c in range(3):
                arcs += sum(
                    1
                    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1))
                    if 0 <= r + dr < 3 and 0 <= c + dc < 3
                )
        assert arcs == 24
        assert len(G.edges) == arcs + 9

    def test_grid22_no_loops(self):
        assert len(make_grid(2, 2, False).edges) == 8

    def test_corner_out_degree(self):
        G = make_grid(3, 3, False)
        assert G.out_degree(0) == 2

    def test_grid_too_small(self):
        with pytest.raises(InvalidSizeError):
            make_grid(1, 5, True)


class TestConnectivity:
    def test_two_cycle(self):
        assert is_strongly_connected(Digraph(2, {(0, 1), (1, 0)}))

    def test_single_arc(self):
        assert not is_strongly_connected(Digraph(2, {(0, 1)}))

    def test_grid_bfs_oracle(self):
        G = make_grid(3, 3, False)
        assert is_strongly_connected(G)
        assert strongly_connected_oracle(G)

    @pytest.mark.parametrize("n", range(3, 13))
    def test_generators_with_loops_strongly_connected(self, n):
        for G in (make_ring(n), make_complete(n)):
            assert is_strongly_connected(G)
            assert strongly_connected_oracle(G)

    @pytest.mark.parametrize("rows,cols", [(2, 2), (2, 3), (3, 3), (2, 5), (3, 4)])
    def test_grids_strongly_connected(self, rows, cols):
        G = make_grid(rows, cols)
        assert is_strongly_connected(G)
        assert strongly_connected_oracle(G)

    def test_scc_partition(self):
        # two 2-cycles joined by a one-way arc
        G = Digraph(4, {(0, 1), (1, 0), (1, 2), (2, 3), (3, 2)})
        comps = strongly_connected_components(G)
        assert sorted(map(tuple, comps)) == [(0, 1), (2, 3)]


class TestFormats:
    def test_parse_edgelist(self):
        G = parse_graph("3\n1 2\n2 3\n3 1\n")
        assert G.n == 3
        assert G.edges == frozenset({(0, 1), (1, 2), (2, 0)})

    def test_round_trip_edgelist(self):
        G = make_grid(2, 3)
        doc = serialize_graph(G)
        assert parse_graph(doc) == G
        assert serialize_graph(parse_graph(doc)) == doc

    def test_round_trip_json(self):
        G = make_ring(5)
        doc = serialize_graph(G, "json")
        assert parse_graph(doc) == G

    def test_serialized_edges_sorted(self):
        G = make_ring(4)
        body = serialize_graph(G).splitlines()[1:]
        pairs = [tuple(map(int, line.split())) for line in body]
        assert pairs == sorted(pairs)

    def test_out_of_range_node(self):
        with pytest.raises(ParseError, match="out of range"):
            parse_graph("2\n1 3\n")

    def test_malformed_line_number(self):
        with pytest.raises(ParseError, match="line 3"):
            parse_graph("3\n1 2\n1 2 3\n")

    def test_empty_document(self):
        with pytest.raises(ParseError):
            parse_graph("")

    def test_json_missing_keys(self):
        with pytest.raises(ParseError):
            parse_graph(json.dumps({"n": 3}))


class TestDot:
    def test_plain_export_lists_arcs(self):
        dot = export_dot(Digraph(2, {(0, 1), (1, 0)}))
        assert "1 -> 2" in dot and "2 -> 1" in dot

    def test_chain_opacity_encodes_probability(self):
        import numpy as np

        G = Digraph(2, {(0, 1), (1, 0), (0, 0), (1, 1)})
        P = np.array([[0.25, 0.75], [1.0, 0.0]])
        dot = export_dot(G, chain=P, pi=[0.5, 0.5])
        assert '1 -> 2 [color="#000000bf"' in dot  # 0.75 -> alpha 191
        assert "2 -> 2" not in dot  # zero-probability arc dropped
        assert 'label="0.250"' in dot
