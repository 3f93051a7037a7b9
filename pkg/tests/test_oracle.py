"""Exhaustive-enumeration reference implementations."""

from __future__ import annotations

import random

import pytest

from probflow import (
    OracleLimitError,
    OracleLimits,
    ProbabilisticGraph,
    exact_expected_flow,
    exact_reachability,
    exhaustive_maxflow,
    expected_flow_of_edges,
)
from util import random_connected_graph, random_tree


def path_graph(weights=(0.0, 1.0, 1.0)):
    return ProbabilisticGraph.build(
        3, [(0, 1, 0.5), (1, 2, 0.5)], weights=list(weights)
    )


def triangle_graph(weights=(0.0, 1.0, 1.0)):
    return ProbabilisticGraph.build(
        3, [(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.5)], weights=list(weights)
    )


class TestExactReachability:
    def test_single_edge(self):
        g = ProbabilisticGraph.build(2, [(0, 1, 0.5)])
        assert exact_reachability(g, 0, 1) == pytest.approx(0.5)

    def test_triangle(self):
        # Direct edge (mass 0.5) plus the no-direct-edge two-hop world (0.125).
        assert exact_reachability(triangle_graph(), 0, 1) == pytest.approx(0.625)

    def test_self(self):
        assert exact_reachability(triangle_graph(), 0, 0) == 1.0

    def test_certain_edges_not_enumerated(self):
        limits = OracleLimits(max_edges_enumeration=25)
        triples = [(i, i + 1, 1.0) for i in range(22)] + [(22, 23, 0.5)]
        g = ProbabilisticGraph.build(24, triples)
        assert exact_reachability(g, 0, 23, limits) == pytest.approx(0.5)

    def test_limit_enforced(self):
        rng = random.Random(1)
        g = random_connected_graph(rng, 12, 10)
        assert g.num_edges == 21
        with pytest.raises(OracleLimitError):
            exact_reachability(g, 0, 1)


class TestExactExpectedFlow:
    def test_path(self):
        assert exact_expected_flow(path_graph(), 0) == pytest.approx(0.75)

    def test_triangle(self):
        assert exact_expected_flow(triangle_graph(), 0) == pytest.approx(1.25)

    def test_edgeless(self):
        g = ProbabilisticGraph.build(3, [], weights=[4.0, 1.0, 1.0])
        assert exact_expected_flow(g, 0) == 4.0

    def test_query_weight_included(self):
        g = path_graph(weights=(2.0, 1.0, 1.0))
        assert exact_expected_flow(g, 0) == pytest.approx(2.75)

    def test_tree_flow_is_path_product_sum(self):
        # Unique paths: reachability must equal the product of edge
        # probabilities along the path, summed with weights.
        rng = random.Random(5)
        for _ in range(30):
            g = random_tree(rng, rng.randint(2, 10))
            expect = 0.0
            for v in range(g.num_vertices):
                r = 1.0
                x = v
                while x != 0:
                    # walk the unique path to the root of the construction
                    for (a, b), p in zip(g.edges, g.probabilities):
                        if b == x:
                            r *= p
                            x = a
                            break
                expect += r * g.weights[v]
            assert exact_expected_flow(g, 0) == pytest.approx(expect, abs=1e-12)

    def test_monotone_under_edge_addition(self):
        rng = random.Random(9)
        for _ in range(20):
            g = random_connected_graph(rng, rng.randint(3, 7), rng.randint(1, 4))
            edges = list(g.edges)
            dropped = rng.choice(edges)
            rest = [e for e in edges if e != dropped]
            assert (
                expected_flow_of_edges(g, 0, rest)
                <= expected_flow_of_edges(g, 0, edges) + 1e-12
            )


class TestExhaustiveMaxflow:
    def test_star_budget_two(self):
        g = ProbabilisticGraph.build(
            4,
            [(0, 1, 0.9), (0, 2, 0.5), (0, 3, 0.1)],
            weights=[0.0, 1.0, 1.0, 1.0],
        )
        edges, flow = exhaustive_maxflow(g, 0, 2)
        assert edges == ((0, 1), (0, 2))
        assert flow == pytest.approx(1.4)

    def test_zero_budget(self):
        g = triangle_graph(weights=(3.0, 1.0, 1.0))
        edges, flow = exhaustive_maxflow(g, 0, 0)
        assert edges == ()
        assert flow == 3.0

    def test_unconstrained_budget(self):
        g = triangle_graph()
        _, flow = exhaustive_maxflow(g, 0, g.num_edges + 5)
        assert flow == pytest.approx(exact_expected_flow(g, 0))

    def test_flow_non_decreasing_in_k(self):
        rng = random.Random(3)
        for _ in range(5):
            g = random_connected_graph(rng, 6, 3)
            flows = [exhaustive_maxflow(g, 0, k)[1] for k in range(5)]
            assert all(a <= b + 1e-12 for a, b in zip(flows, flows[1:]))

    def test_tie_breaks_lexicographically(self):
        g = ProbabilisticGraph.build(
            3, [(0, 1, 0.5), (0, 2, 0.5)], weights=[0.0, 1.0, 1.0]
        )
        edges, _ = exhaustive_maxflow(g, 0, 1)
        assert edges == ((0, 1),)

    def test_selection_limit(self):
        rng = random.Random(2)
        g = random_connected_graph(rng, 10, 6)
        assert g.num_edges == 15
        with pytest.raises(OracleLimitError):
            exhaustive_maxflow(g, 0, 2)
