"""Seeded Monte-Carlo estimation of reachability and expected flow.

All randomness flows from one master seed: every sampling task derives an
independent substream from a stable hash of its purpose and its subject's
canonical signature, so results depend only on the configuration, never on
scheduling or call order.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .graphs import DeterministicWorld, Edge, ProbabilisticGraph

# samples_used value reported for estimates with no sampling error at all
# (analytic flow on cycle-free trees, fully deterministic graphs).
EXACT_SAMPLES = 2**31 - 1

# Cap on random doubles drawn per vectorized chunk, keeps memory flat.
_CHUNK_BUDGET = 4_000_000


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs for Monte-Carlo estimation and interval-based pruning."""

    samples: int = 1000
    alpha: float = 0.01
    master_seed: int = 0
    min_samples_for_ci: int = 30
    ci_batch: int = 100

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must be in (0,1)")
        if self.min_samples_for_ci < 1:
            raise ValueError("min_samples_for_ci must be >= 1")
        if self.ci_batch < 1:
            raise ValueError("ci_batch must be >= 1")


@dataclass(frozen=True)
class FlowEstimate:
    """Expected-flow value with aggregated confidence bounds."""

    mean: float
    lb: float
    ub: float
    samples_used: int

    def __post_init__(self) -> None:
        if not (self.lb <= self.mean + 1e-12 and self.mean <= self.ub + 1e-12):
            raise ValueError(f"bounds must bracket the mean: {self.lb} {self.mean} {self.ub}")
        if self.samples_used < 1:
            raise ValueError("samples_used must be >= 1")

    @property
    def half_width(self) -> float:
        return (self.ub - self.lb) / 2.0

    @property
    def is_exact(self) -> bool:
        return self.samples_used >= EXACT_SAMPLES


@dataclass(frozen=True)
class ReachTable:
    """Estimated probability of each component vertex reaching the articulation vertex."""

    articulation: int
    probs: Mapping[int, float]
    sample_count: int
    alpha: float = 0.01

    def __post_init__(self) -> None:
        if self.articulation in self.probs:
            raise ValueError("articulation vertex must not appear in the table")
        for v, p in self.probs.items():
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"probability {p} for vertex {v} outside [0,1]")

    def bounds(self, v: int) -> tuple[float, float]:
        successes = round(self.probs[v] * self.sample_count)
        return confidence_interval(successes, self.sample_count, self.alpha)


def substream(master_seed: int, *key: object) -> np.random.Generator:
    """Derive an independent generator from the master seed and a task key.

    The key is hashed through blake2b so equal (seed, key) pairs always give
    the same stream and distinct tasks get unrelated streams.
    """
    text = "\x1f".join([str(master_seed), *map(str, key)])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=16).digest()
    return np.random.default_rng(int.from_bytes(digest, "big"))


def _present_matrix(rng: np.random.Generator, probs: np.ndarray, count: int) -> np.ndarray:
    """Sample ``count`` worlds of the given edges: bool matrix [count, E]."""
    if probs.size == 0:
        return np.zeros((count, 0), dtype=bool)
    return rng.random((count, probs.size)) < probs


def _propagate(present: np.ndarray, edges: Sequence[Edge], num_vertices: int, source: int) -> np.ndarray:
    """Connected-to-source indicator per (world, vertex) for a batch of worlds.

    Fixed-point frontier expansion; converges in at most diameter passes.
    """
    count = present.shape[0]
    reached = np.zeros((count, num_vertices), dtype=bool)
    reached[:, source] = True
    if not edges:
        return reached
    changed = True
    while changed:
        changed = False
        for i, (u, v) in enumerate(edges):
            live = present[:, i]
            ru = reached[:, u]
            rv = reached[:, v]
            grow_v = live & ru & ~rv
            if grow_v.any():
                reached[:, v] |= grow_v
                changed = True
            grow_u = live & rv & ~ru
            if grow_u.any():
                reached[:, u] |= grow_u
                changed = True
    return reached


def _success_counts(
    graph_edges: Sequence[Edge],
    probs: Sequence[float],
    num_vertices: int,
    source: int,
    samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-vertex counts of sampled worlds in which the vertex reaches the source."""
    parr = np.asarray(probs, dtype=float)
    counts = np.zeros(num_vertices, dtype=np.int64)
    chunk = max(1, _CHUNK_BUDGET // max(1, len(graph_edges)))
    done = 0
    while done < samples:
        batch = min(chunk, samples - done)
        present = _present_matrix(rng, parr, batch)
        reached = _propagate(present, graph_edges, num_vertices, source)
        counts += reached.sum(axis=0, dtype=np.int64)
        done += batch
    return counts


def sample_world(graph: ProbabilisticGraph, stream: np.random.Generator) -> DeterministicWorld:
    """Draw one world: each edge present independently with its probability."""
    draws = stream.random(graph.num_edges)
    present = frozenset(e for e, d, p in zip(graph.edges, draws, graph.probabilities) if d < p)
    return DeterministicWorld(parent=graph, present_edges=present)


def reachable_set(world: DeterministicWorld, source: int) -> set[int]:
    """Connected component of ``source`` in a deterministic world."""
    graph = world.parent
    if not (0 <= source < graph.num_vertices):
        raise ValueError(f"unknown vertex {source}")
    adj: dict[int, list[int]] = {}
    for u, v in world.present_edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    seen = {source}
    stack = [source]
    while stack:
        u = stack.pop()
        for w in adj.get(u, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def flow_of_world(world: DeterministicWorld, source: int) -> float:
    """Total vertex weight of the world's component containing ``source``."""
    return sum(world.parent.weights[v] for v in reachable_set(world, source))


def mc_expected_flow(graph: ProbabilisticGraph, q: int, cfg: SamplerConfig) -> FlowEstimate:
    """Whole-graph Monte-Carlo estimate of the expected flow into ``q``.

    The mean averages, over sampled worlds, the summed weight of vertices
    connected to q (q itself always counts).  Bounds aggregate per-vertex
    normal-approximation intervals, weighted and summed.
    """
    rng = substream(cfg.master_seed, "mc-flow", graph.signature(), q)
    counts = _success_counts(graph.edges, graph.probabilities, graph.num_vertices, q, cfg.samples, rng)
    weights = np.asarray(graph.weights, dtype=float)
    p_hat = counts / cfg.samples
    mean = float(weights @ p_hat)
    z = normal_quantile(1.0 - cfg.alpha / 2.0)
    half = z * np.sqrt(p_hat * (1.0 - p_hat) / cfg.samples)
    lb = float(weights @ np.clip(p_hat - half, 0.0, 1.0))
    ub = float(weights @ np.clip(p_hat + half, 0.0, 1.0))
    return FlowEstimate(mean=mean, lb=lb, ub=ub, samples_used=cfg.samples)


def mc_component_reach(
    graph: ProbabilisticGraph,
    articulation: int,
    cfg: SamplerConfig,
    stream_key: Optional[object] = None,
    samples: Optional[int] = None,
) -> ReachTable:
    """Estimate, by sampling the component subgraph, each vertex's probability
    of connecting to the articulation vertex.

    ``stream_key`` overrides the default substream identity (the subgraph's
    own signature); component owners pass their parent-graph signature so a
    component samples identically whether probed, committed, or re-created.
    """
    if not (0 <= articulation < graph.num_vertices):
        raise ValueError(f"articulation vertex {articulation} not in subgraph")
    if stream_key is None:
        stream_key = graph.signature() + f";av={articulation}"
    total = cfg.samples if samples is None else samples
    rng = substream(cfg.master_seed, "component", stream_key)
    counts = _success_counts(graph.edges, graph.probabilities, graph.num_vertices, articulation, total, rng)
    probs = {v: counts[v] / total for v in range(graph.num_vertices) if v != articulation}
    return ReachTable(articulation=articulation, probs=probs, sample_count=total, alpha=cfg.alpha)


def confidence_interval(successes: int, samples: int, alpha: float) -> tuple[float, float]:
    """Two-sided normal-approximation interval for a binomial proportion.

    Half-width is z * sqrt(p(1-p)/samples), clamped to [0,1].  Degenerate
    proportions (0 or 1) give a zero-width interval; callers guard pruning
    decisions with a minimum sample count instead.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not (0 <= successes <= samples):
        raise ValueError("successes must be within [0, samples]")
    p_hat = successes / samples
    half = normal_quantile(1.0 - alpha / 2.0) * math.sqrt(p_hat * (1.0 - p_hat) / samples)
    return (max(0.0, p_hat - half), min(1.0, p_hat + half))


# Acklam's rational approximation of the inverse standard-normal CDF,
# refined with one Halley step; keeps us free of a statistics dependency.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def normal_quantile(q: float) -> float:
    """Inverse standard-normal CDF, accurate well beyond 1e-8."""
    if not (0.0 < q < 1.0):
        raise ValueError("quantile argument must be in (0,1)")
    if q < _P_LOW:
        u = math.sqrt(-2.0 * math.log(q))
        x = (((((_C[0] * u + _C[1]) * u + _C[2]) * u + _C[3]) * u + _C[4]) * u + _C[5]) / \
            ((((_D[0] * u + _D[1]) * u + _D[2]) * u + _D[3]) * u + 1.0)
    elif q <= 1.0 - _P_LOW:
        u = q - 0.5
        r = u * u
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * u / \
            (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    else:
        u = math.sqrt(-2.0 * math.log(1.0 - q))
        x = -(((((_C[0] * u + _C[1]) * u + _C[2]) * u + _C[3]) * u + _C[4]) * u + _C[5]) / \
            ((((_D[0] * u + _D[1]) * u + _D[2]) * u + _D[3]) * u + 1.0)
    # Halley refinement against the exact CDF via erfc.
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - q
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    x -= err / (pdf + 0.5 * x * err)
    return x
