"""Budgeted edge selection strategies.

One greedy skeleton drives the component-tree variants (plain, memoized,
interval-pruned, delay-scheduled); the naive whole-graph sampler and the
probability-maximizing shortest-path tree serve as baselines.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .ftree import (
    BiComponent,
    FTree,
    IncrementalComponentSampler,
    InsertReport,
    MemoStore,
    new_ftree,
)
from .graphs import Edge, ProbabilisticGraph, induced_subgraph
from .sampling import EXACT_SAMPLES, FlowEstimate, SamplerConfig, mc_expected_flow

VARIANTS = ("naive", "dijkstra", "ft", "ft_m", "ft_m_ci", "ft_m_ds", "ft_m_ci_ds")


@dataclass(frozen=True)
class StrategyConfig:
    """Which selector to run and its budgets."""

    variant: str
    budget: int
    sampler: SamplerConfig = SamplerConfig()
    ds_c: float = 2.0

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.ds_c <= 1.0:
            raise ValueError("ds_c must be > 1")


@dataclass
class CandidateState:
    edge: Edge
    delay_remaining: int = 0
    last_estimate: Optional[FlowEstimate] = None


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    edge: Edge
    flow: FlowEstimate
    edges_sampled: int
    candidates_probed: int
    candidates_pruned: int
    candidates_delayed: int
    # wall time is diagnostics, never part of result identity
    elapsed_ms: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Solution:
    """Selected edges in commit order with the per-iteration trace."""

    selected: tuple[Edge, ...]
    trace: tuple[IterationRecord, ...]

    def __post_init__(self) -> None:
        if len(self.selected) != len(self.trace):
            raise ValueError("trace must have one record per selected edge")

    def final_flow(self, weight_at_query: float) -> float:
        return self.trace[-1].flow.mean if self.trace else weight_at_query


def candidate_edges(
    graph: ProbabilisticGraph, attached: set[int], selected: set[Edge]
) -> list[Edge]:
    """Unselected edges touching the connected subgraph, canonical order."""
    out = []
    for e in graph.edges:
        if e in selected:
            continue
        if e[0] in attached or e[1] in attached:
            out.append(e)
    return out


def ci_prune(
    candidates: Sequence[tuple[Edge, FlowEstimate]], min_samples: int = 30
) -> set[Edge]:
    """Candidates that survive interval dominance.

    A candidate is discarded only when another candidate's flow lower bound
    exceeds its upper bound and both carry at least ``min_samples`` sampled
    worlds (the normal approximation is meaningless below that).
    """
    best_lb = None
    for _, est in candidates:
        if est.samples_used >= min_samples:
            if best_lb is None or est.lb > best_lb:
                best_lb = est.lb
    survivors = set()
    for e, est in candidates:
        if best_lb is not None and est.samples_used >= min_samples and est.ub < best_lb:
            continue
        survivors.add(e)
    return survivors


def ds_delay(pot: float, cost: int, c: float) -> int:
    """Iterations to suspend a probed-but-unchosen candidate.

    floor(log_c(cost / pot)): expensive low-potential candidates wait longest.
    A free probe (no cycle formed, cost 0) is never delayed.
    """
    if pot <= 0.0:
        raise ValueError("pot must be positive")
    if c <= 1.0:
        raise ValueError("c must be > 1")
    if cost < 0:
        raise ValueError("cost must be non-negative")
    if cost == 0:
        return 0
    value = math.log(cost / pot) / math.log(c)
    return max(0, math.floor(value + 1e-12))


def run_strategy(graph: ProbabilisticGraph, q: int, cfg: StrategyConfig) -> Solution:
    """Dispatch a selection run by variant."""
    if cfg.variant == "naive":
        return naive_select(graph, q, cfg)
    if cfg.variant == "dijkstra":
        return dijkstra_select(graph, q, cfg.budget)
    return greedy_select(graph, q, cfg)


def greedy_select(graph: ProbabilisticGraph, q: int, cfg: StrategyConfig) -> Solution:
    """Component-tree greedy: probe every eligible candidate, commit the argmax.

    Variant flags: ``_m`` reuses sampled reach tables across probes keyed by
    component identity, ``_ci`` stops sampling candidates that are interval-
    dominated, ``_ds`` suspends low-potential expensive candidates.
    """
    if not (0 <= q < graph.num_vertices):
        raise ValueError(f"unknown vertex {q}")
    use_memo = cfg.variant != "ft"
    use_ci = "_ci" in cfg.variant
    use_ds = "_ds" in cfg.variant
    tree = new_ftree(q)
    memo = MemoStore() if use_memo else None
    states: dict[Edge, CandidateState] = {}
    selected: list[Edge] = []
    trace: list[IterationRecord] = []

    for iteration in range(1, cfg.budget + 1):
        tick = time.perf_counter()
        cands = candidate_edges(graph, tree.attached_vertices(), tree.selected_edges)
        if not cands:
            break
        for e in cands:
            states.setdefault(e, CandidateState(e))
        eligible = [e for e in cands if states[e].delay_remaining == 0]
        if use_ds and not eligible:
            # Everything is suspended: fast-forward the clock so the nearest
            # candidates wake up, keeping the budget fillable.
            shift = min(states[e].delay_remaining for e in cands)
            for e in cands:
                states[e].delay_remaining -= shift
            eligible = [e for e in cands if states[e].delay_remaining == 0]
        skipped = [e for e in cands if states[e].delay_remaining > 0]

        if use_ci:
            results, pruned = _probe_with_ci(tree, graph, eligible, cfg, memo)
        else:
            results = {}
            for e in eligible:
                results[e] = tree.probe_edge(graph, e, cfg.sampler, memo)
            pruned = set()
        for e, (est, _) in results.items():
            states[e].last_estimate = est

        survivors = [e for e in eligible if e not in pruned]
        best = min(survivors, key=lambda e: (-results[e][0].mean, e))
        best_est = results[best][0]
        report = tree.insert_edge(graph, best, cfg.sampler, memo)
        selected.append(best)
        trace.append(
            IterationRecord(
                iteration=iteration,
                edge=best,
                flow=best_est,
                edges_sampled=report.edges_sampled_count,
                candidates_probed=len(eligible),
                candidates_pruned=len(pruned),
                candidates_delayed=len(skipped),
                elapsed_ms=int((time.perf_counter() - tick) * 1000),
            )
        )
        if use_ds:
            denom = best_est.mean
            for e in eligible:
                if e == best:
                    continue
                est, rep = results[e]
                ratio = est.mean / denom if denom > 0 else 1.0
                pot = min(1.0, max(1e-9, ratio))
                states[e].delay_remaining = ds_delay(pot, rep.edges_sampled_count, cfg.ds_c)
        for e in skipped:
            states[e].delay_remaining = max(0, states[e].delay_remaining - 1)
        states.pop(best, None)
    return Solution(selected=tuple(selected), trace=tuple(trace))


def _probe_with_ci(
    tree: FTree,
    graph: ProbabilisticGraph,
    eligible: Sequence[Edge],
    cfg: StrategyConfig,
    memo: Optional[MemoStore],
) -> tuple[dict[Edge, tuple[FlowEstimate, InsertReport]], set[Edge]]:
    """Probe candidates sequentially, sampling in batches and abandoning any
    candidate whose upper bound falls below the best confirmed lower bound."""
    scfg = cfg.sampler
    min_s = scfg.min_samples_for_ci
    best_lb: Optional[float] = None
    results: dict[Edge, tuple[FlowEstimate, InsertReport]] = {}
    pruned: set[Edge] = set()

    for e in eligible:
        trial = tree.copy()
        report = trial.insert_edge(graph, e, scfg, memo=memo, defer_sampling=True)
        dirty = trial.dirty_components()
        samplers: dict[int, IncrementalComponentSampler] = {}
        for cid in dirty:
            comp = trial.components[cid]
            assert isinstance(comp, BiComponent)
            table = memo.lookup(comp.signature()) if memo is not None else None
            if table is not None and table.sample_count >= scfg.samples:
                comp.reach = table
                comp.dirty = False
            else:
                samplers[cid] = IncrementalComponentSampler(graph, comp, scfg)

        aborted = False
        while samplers and min(s.drawn for s in samplers.values()) < scfg.samples:
            for cid, sampler in samplers.items():
                step = min(scfg.ci_batch, scfg.samples - sampler.drawn)
                sampler.draw(step)
                comp = trial.components[cid]
                assert isinstance(comp, BiComponent)
                comp.reach = sampler.table()
                comp.dirty = False
            if best_lb is not None:
                est = trial.expected_flow(graph)
                if est.samples_used >= min_s and est.ub < best_lb:
                    results[e] = (est, report)
                    pruned.add(e)
                    aborted = True
                    break
        if aborted:
            continue
        for cid, sampler in samplers.items():
            if memo is not None:
                memo.store(sampler.signature, sampler.table())
        est = trial.expected_flow(graph)
        results[e] = (est, report)
        if est.samples_used >= min_s and (best_lb is None or est.lb > best_lb):
            best_lb = est.lb
    return results, pruned


def naive_select(graph: ProbabilisticGraph, q: int, cfg: StrategyConfig) -> Solution:
    """Greedy selection scored by whole-graph Monte-Carlo on the selected
    subgraph plus the candidate; no decomposition, no reuse."""
    if not (0 <= q < graph.num_vertices):
        raise ValueError(f"unknown vertex {q}")
    attached: set[int] = {q}
    chosen: list[Edge] = []
    chosen_set: set[Edge] = set()
    trace: list[IterationRecord] = []
    for iteration in range(1, cfg.budget + 1):
        tick = time.perf_counter()
        cands = candidate_edges(graph, attached, chosen_set)
        if not cands:
            break
        results: dict[Edge, FlowEstimate] = {}
        for e in cands:
            results[e] = _naive_probe(graph, q, chosen + [e], cfg.sampler)
        best = min(cands, key=lambda e: (-results[e].mean, e))
        chosen.append(best)
        chosen_set.add(best)
        attached.update(best)
        trace.append(
            IterationRecord(
                iteration=iteration,
                edge=best,
                flow=results[best],
                edges_sampled=len(chosen),
                candidates_probed=len(cands),
                candidates_pruned=0,
                candidates_delayed=0,
                elapsed_ms=int((time.perf_counter() - tick) * 1000),
            )
        )
    return Solution(selected=tuple(chosen), trace=tuple(trace))


def _naive_probe(
    graph: ProbabilisticGraph, q: int, edges: list[Edge], scfg: SamplerConfig
) -> FlowEstimate:
    """Whole-subgraph Monte-Carlo flow of the given edge set.

    Restricted to vertices the edges can reach (plus q); the rest of the
    graph cannot contribute flow and would only add sampling work.
    """
    verts = {q}
    for e in edges:
        verts.update(e)
    sub = induced_subgraph(graph, verts, edges)
    q_local = sub.label_index[graph.labels[q]]
    return mc_expected_flow(sub, q_local, scfg)


def dijkstra_select(graph: ProbabilisticGraph, q: int, k: int) -> Solution:
    """Maximum-probability spanning tree via shortest paths on -log P(e).

    Commits one tree edge per settled vertex, at most k edges; the result is
    cycle-free so the flow is an exact edge-product computation.
    """
    if not (0 <= q < graph.num_vertices):
        raise ValueError(f"unknown vertex {q}")
    if k < 1:
        raise ValueError("k must be >= 1")
    settled: set[int] = set()
    flow_acc = graph.weights[q]
    chosen: list[Edge] = []
    trace: list[IterationRecord] = []
    # heap entries: (distance, vertex, reach product, tree edge or None)
    heap: list[tuple[float, int, float, Optional[Edge]]] = [(0.0, q, 1.0, None)]
    tick = time.perf_counter()
    while heap and len(chosen) < k:
        dist, v, reach, tree_edge = heapq.heappop(heap)
        if v in settled:
            continue
        settled.add(v)
        if tree_edge is not None:
            chosen.append(tree_edge)
            flow_acc += reach * graph.weights[v]
            trace.append(
                IterationRecord(
                    iteration=len(chosen),
                    edge=tree_edge,
                    flow=FlowEstimate(flow_acc, flow_acc, flow_acc, EXACT_SAMPLES),
                    edges_sampled=0,
                    candidates_probed=0,
                    candidates_pruned=0,
                    candidates_delayed=0,
                    elapsed_ms=int((time.perf_counter() - tick) * 1000),
                )
            )
            tick = time.perf_counter()
        for nbr, eidx in graph.adjacency[v]:
            if nbr in settled:
                continue
            p = graph.probabilities[eidx]
            heapq.heappush(heap, (dist - math.log(p), nbr, reach * p, graph.edges[eidx]))
    return Solution(selected=tuple(chosen), trace=tuple(trace))
