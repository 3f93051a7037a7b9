"""Synthetic graph families and probability-assignment schemes.

Three topology generators (uniform random, ring-of-partitions with fixed
degree, geometric sensor field) plus the two probability assignments used
for real datasets: distance-decay for spatial networks and the
close-friends split for social networks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graphs import Edge, ProbabilisticGraph, canonical_edge

FAMILIES = ("erdos", "partitioned", "wsn")


@dataclass(frozen=True)
class GenSpec:
    """Parameters for one synthetic instance."""

    family: str
    n: int
    degree: int = 0
    epsilon: float = 0.0
    seed: int = 0
    wrap: bool = True
    unit_weights: bool = False

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be positive")


def generate(spec: GenSpec) -> ProbabilisticGraph:
    if spec.family == "erdos":
        return gen_erdos(spec.n, spec.degree, spec.seed, unit_weights=spec.unit_weights)
    if spec.family == "partitioned":
        return gen_partitioned(
            spec.n, spec.degree, spec.seed, wrap=spec.wrap, unit_weights=spec.unit_weights
        )
    return gen_wsn(spec.n, spec.epsilon, spec.seed, unit_weights=spec.unit_weights)


def _edge_probabilities(rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniform in the open interval (0,1); the measure-zero exact 0 is bumped."""
    p = rng.random(count)
    p[p == 0.0] = 0.5
    return p


def _vertex_weights(rng: np.random.Generator, n: int, unit: bool) -> np.ndarray:
    if unit:
        return np.ones(n)
    return rng.integers(0, 11, size=n).astype(float)


def _assemble(
    n: int,
    edges: list[Edge],
    rng: np.random.Generator,
    unit_weights: bool,
    coordinates: Optional[np.ndarray] = None,
) -> ProbabilisticGraph:
    edges = sorted(edges)
    probs = _edge_probabilities(rng, len(edges))
    weights = _vertex_weights(rng, n, unit_weights)
    return ProbabilisticGraph.build(
        num_vertices=n,
        edges=[(u, v, float(p)) for (u, v), p in zip(edges, probs)],
        weights=[float(w) for w in weights],
        coordinates=[(float(x), float(y)) for x, y in coordinates] if coordinates is not None else None,
    )


def gen_erdos(n: int, degree: int, seed: int, unit_weights: bool = False) -> ProbabilisticGraph:
    """n*degree/2 distinct edges placed uniformly over unordered pairs."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if degree < 1:
        raise ValueError("degree must be >= 1")
    target = n * degree // 2
    if target > n * (n - 1) // 2:
        raise ValueError("requested edges exceed the number of vertex pairs")
    rng = np.random.default_rng(seed)
    edges: set[Edge] = set()
    while len(edges) < target:
        u, v = int(rng.integers(0, n)), int(rng.integers(0, n))
        if u != v:
            edges.add(canonical_edge(u, v))
    return _assemble(n, list(edges), rng, unit_weights)


def gen_partitioned(
    n: int, degree: int, seed: int, wrap: bool = True, unit_weights: bool = False
) -> ProbabilisticGraph:
    """Ring of 2n/degree partitions of size degree/2; every vertex adjacent to
    all vertices in both neighboring partitions, so each has exactly the
    requested degree.  ``wrap=False`` leaves the ring open (a path), halving
    the degree at the two end partitions."""
    if degree < 2 or degree % 2 != 0:
        raise ValueError("degree must be a positive even number")
    if n % degree != 0 or n < 2 * degree:
        raise ValueError("degree must divide n and n must be at least 2*degree")
    size = degree // 2
    parts = 2 * n // degree
    rng = np.random.default_rng(seed)
    edges: list[Edge] = []
    for i in range(parts):
        j = (i + 1) % parts
        if j <= i and not wrap:
            continue
        for a in range(i * size, (i + 1) * size):
            for b in range(j * size, (j + 1) * size):
                edges.append(canonical_edge(a, b))
    return _assemble(n, edges, rng, unit_weights)


def gen_wsn(
    n: int, epsilon: float, seed: int, unit_weights: bool = False
) -> ProbabilisticGraph:
    """Uniform points in the unit square, connected within epsilon distance."""
    if not (0.0 < epsilon <= math.sqrt(2.0)):
        raise ValueError("epsilon must be in (0, sqrt(2)]")
    rng = np.random.default_rng(seed)
    coords = rng.random((n, 2))
    edges: list[Edge] = []
    eps2 = epsilon * epsilon
    for u in range(n):
        delta = coords[u + 1 :] - coords[u]
        close = np.nonzero((delta * delta).sum(axis=1) <= eps2)[0]
        edges.extend((u, u + 1 + int(v)) for v in close)
    return _assemble(n, edges, rng, unit_weights, coordinates=coords)


def assign_distance_decay(
    graph: ProbabilisticGraph, lam: float = 0.001, scale: float = 1.0
) -> ProbabilisticGraph:
    """Set every edge probability to exp(-lam * distance).

    ``lam`` is a per-meter rate; ``scale`` converts the stored coordinate
    units to meters (unit-square instances pass their world size here).
    """
    if graph.coordinates is None:
        raise ValueError("graph has no coordinates")
    triples = []
    for u, v in graph.edges:
        (x1, y1), (x2, y2) = graph.coordinates[u], graph.coordinates[v]
        dist = math.hypot(x2 - x1, y2 - y1) * scale
        triples.append((u, v, math.exp(-lam * dist)))
    return ProbabilisticGraph.build(
        graph.num_vertices,
        triples,
        weights=graph.weights,
        labels=graph.labels,
        coordinates=graph.coordinates,
    )


def assign_close_friends(
    graph: ProbabilisticGraph, f: int = 10, seed: int = 0
) -> ProbabilisticGraph:
    """Mark up to f random incident edges per vertex as close; close edges get
    probabilities in [0.5, 1.0], all others in (0, 0.5]."""
    if f < 0:
        raise ValueError("f must be non-negative")
    rng = np.random.default_rng(seed)
    close: set[Edge] = set()
    for v in range(graph.num_vertices):
        incident = sorted(graph.edges[i] for _, i in graph.adjacency[v])
        take = min(f, len(incident))
        if take == 0:
            continue
        picks = rng.choice(len(incident), size=take, replace=False)
        close.update(incident[int(i)] for i in picks)
    draws = rng.random(graph.num_edges)
    triples = []
    for e, r in zip(graph.edges, draws):
        p = 0.5 + 0.5 * r if e in close else 0.5 * (1.0 - r)
        triples.append((*e, p))
    return ProbabilisticGraph.build(
        graph.num_vertices,
        triples,
        weights=graph.weights,
        labels=graph.labels,
        coordinates=graph.coordinates,
    )
