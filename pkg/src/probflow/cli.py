"""Command-line front end: generate graphs, select edges, evaluate flows,
and sweep benchmark grids into CSV.

Every command is deterministic for a fixed seed; wall-clock columns stay 0
unless --timings is given so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import IO, Optional, Sequence

from .ftree import FTreeError, new_ftree
from .graphs import (
    Edge,
    GraphError,
    ProbabilisticGraph,
    canonical_edge,
    induced_subgraph,
    load_graph,
    save_graph,
)
from .netgen import (
    GenSpec,
    assign_close_friends,
    assign_distance_decay,
    generate,
)
from .oracle import OracleLimitError, expected_flow_of_edges
from .sampling import SamplerConfig, mc_expected_flow
from .selection import Solution, StrategyConfig, VARIANTS, candidate_edges, run_strategy

THREADS_ENV = "PROBFLOW_THREADS"


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _sampler_config(args: argparse.Namespace) -> SamplerConfig:
    return SamplerConfig(samples=args.samples, alpha=args.alpha, master_seed=args.seed)


def _add_sampler_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, default=1000, help="Monte-Carlo sample budget")
    p.add_argument("--alpha", type=float, default=0.01, help="confidence-interval significance")
    p.add_argument("--seed", type=int, default=0, help="master random seed")


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--edges", required=True, help="edge-list file")
    p.add_argument("--weights", help="vertex-weight file")
    p.add_argument("--coords", help="vertex-coordinate file")
    p.add_argument("--query", required=True, help="query vertex label")


def _load_inputs(args: argparse.Namespace) -> tuple[ProbabilisticGraph, int]:
    with open(args.edges, encoding="utf-8") as ef:
        wf = open(args.weights, encoding="utf-8") if args.weights else None
        cf = open(args.coords, encoding="utf-8") if getattr(args, "coords", None) else None
        try:
            graph = load_graph(ef, wf, cf)
        finally:
            if wf:
                wf.close()
            if cf:
                cf.close()
    q = graph.label_index.get(args.query)
    if q is None:
        raise GraphError(f"query vertex {args.query!r} not in graph")
    return graph, q


def _read_edge_set(path: str, graph: ProbabilisticGraph) -> list[Edge]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise GraphError(f"edge-set line {lineno}: expected '<u> <v>'")
            ids = []
            for lab in parts[:2]:
                vid = graph.label_index.get(lab)
                if vid is None:
                    raise GraphError(f"edge-set line {lineno}: unknown vertex {lab!r}")
                ids.append(vid)
            e = canonical_edge(*ids)
            if e not in graph.edge_index:
                raise GraphError(f"edge-set line {lineno}: no such edge {parts[0]} {parts[1]}")
            out.append(e)
    return out


# ----------------------------------------------------------------------
# generate
# ----------------------------------------------------------------------

def _cmd_generate(args: argparse.Namespace) -> int:
    spec = GenSpec(
        family=args.family,
        n=args.n,
        degree=args.deg,
        epsilon=args.eps,
        seed=args.seed,
        wrap=not args.no_wrap,
        unit_weights=args.unit_weights,
    )
    graph = generate(spec)
    if args.decay:
        graph = assign_distance_decay(graph, lam=args.decay_lambda, scale=args.world_size_m)
    if args.close_friends is not None:
        graph = assign_close_friends(graph, f=args.close_friends, seed=args.seed)
    prefix = Path(args.out)
    with open(f"{prefix}.edges", "w", encoding="utf-8") as ef, open(
        f"{prefix}.weights", "w", encoding="utf-8"
    ) as wf:
        if graph.coordinates is not None:
            with open(f"{prefix}.coords", "w", encoding="utf-8") as cf:
                save_graph(graph, ef, wf, cf)
        else:
            save_graph(graph, ef, wf)
    print(f"wrote {graph.num_vertices} vertices, {graph.num_edges} edges to {prefix}.*")
    return 0


# ----------------------------------------------------------------------
# maxflow
# ----------------------------------------------------------------------

MAXFLOW_HEADER = "iter,edge_u,edge_v,flow_mean,flow_lb,flow_ub,edges_sampled,probes,pruned,delayed,elapsed_ms"


def _write_solution_csv(
    out: IO[str], solution: Solution, graph: ProbabilisticGraph, timings: bool
) -> None:
    out.write(MAXFLOW_HEADER + "\n")
    for rec in solution.trace:
        u, v = rec.edge
        ms = rec.elapsed_ms if timings else 0
        out.write(
            ",".join(
                [
                    str(rec.iteration),
                    graph.labels[u],
                    graph.labels[v],
                    _fmt(rec.flow.mean),
                    _fmt(rec.flow.lb),
                    _fmt(rec.flow.ub),
                    str(rec.edges_sampled),
                    str(rec.candidates_probed),
                    str(rec.candidates_pruned),
                    str(rec.candidates_delayed),
                    str(ms),
                ]
            )
            + "\n"
        )


def _cmd_maxflow(args: argparse.Namespace) -> int:
    graph, q = _load_inputs(args)
    cfg = StrategyConfig(
        variant=args.variant,
        budget=args.k,
        sampler=_sampler_config(args),
        ds_c=args.ds_c,
    )
    solution = run_strategy(graph, q, cfg)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            _write_solution_csv(fh, solution, graph, args.timings)
    else:
        _write_solution_csv(sys.stdout, solution, graph, args.timings)
    final = solution.final_flow(graph.weights[q])
    print(
        f"selected {len(solution.selected)} edges; final flow {_fmt(final)} "
        f"(includes the query vertex's own weight {_fmt(graph.weights[q])})"
    )
    return 0


# ----------------------------------------------------------------------
# evaluate
# ----------------------------------------------------------------------

def _cmd_evaluate(args: argparse.Namespace) -> int:
    graph, q = _load_inputs(args)
    edges = _read_edge_set(args.edge_set, graph) if args.edge_set else []
    if args.mode == "exact":
        flow = expected_flow_of_edges(graph, q, edges)
        lb = ub = flow
        samples = "exact"
    else:
        verts = {q}
        for e in edges:
            verts.update(e)
        sub = induced_subgraph(graph, verts, edges)
        est = mc_expected_flow(sub, sub.label_index[graph.labels[q]], _sampler_config(args))
        flow, lb, ub = est.mean, est.lb, est.ub
        samples = str(est.samples_used)
    line = (
        f"mode={args.mode} flow={_fmt(flow)} lb={_fmt(lb)} ub={_fmt(ub)} samples={samples} "
        f"(includes the query vertex's own weight {_fmt(graph.weights[q])})"
    )
    print(line)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write("mode,flow_mean,flow_lb,flow_ub,samples\n")
            fh.write(f"{args.mode},{_fmt(flow)},{_fmt(lb)},{_fmt(ub)},{samples}\n")
    return 0


# ----------------------------------------------------------------------
# bench
# ----------------------------------------------------------------------

BENCH_HEADER = (
    "axis,value,variant,repeat,flow_ref,ref_lb,ref_ub,flow_self,selected,elapsed_ms,"
    "flow_ref_mean,flow_ref_var"
)


def _bench_point(
    instance: Optional[tuple[ProbabilisticGraph, int]],
    family: str,
    n: int,
    deg: int,
    eps: float,
    k: int,
    ds_c: float,
    variant: str,
    repeat: int,
    seed: int,
    samples: int,
    alpha: float,
    ref_samples: int,
    timings: bool,
    unit_weights: bool,
) -> list[str]:
    if instance is not None:
        graph, q = instance
    else:
        spec = GenSpec(
            family=family, n=n, degree=deg, epsilon=eps,
            seed=seed + 7919 * repeat, unit_weights=unit_weights,
        )
        graph = generate(spec)
        q = 0  # generated instances query the first vertex
    cfg = StrategyConfig(
        variant=variant,
        budget=k,
        sampler=SamplerConfig(samples=samples, alpha=alpha, master_seed=seed + repeat),
        ds_c=ds_c,
    )
    start = time.perf_counter()
    solution = run_strategy(graph, q, cfg)
    ms = int((time.perf_counter() - start) * 1000) if timings else 0
    # Reference evaluation: one sampler config shared by every variant at
    # this sweep point, so achieved flows are compared on equal footing.
    ref_cfg = SamplerConfig(samples=ref_samples, alpha=alpha, master_seed=seed + repeat)
    verts = {q}
    for e in solution.selected:
        verts.update(e)
    sub = induced_subgraph(graph, verts, solution.selected)
    ref = mc_expected_flow(sub, sub.label_index[graph.labels[q]], ref_cfg)
    self_flow = solution.final_flow(graph.weights[q])
    return [
        variant,
        str(repeat),
        _fmt(ref.mean),
        _fmt(ref.lb),
        _fmt(ref.ub),
        _fmt(self_flow),
        str(len(solution.selected)),
        str(ms),
    ]


def _cmd_bench(args: argparse.Namespace) -> int:
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    for v in variants:
        if v not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}")
    instance = None
    if args.edges:
        graph, q = _load_inputs(args)
        instance = (graph, q)
    axis = "k"
    values: list[float] = [args.k]
    if args.sweep:
        axis, _, raw = args.sweep.partition("=")
        axis = axis.strip()
        if axis not in ("n", "deg", "k", "eps", "c"):
            raise ValueError(f"unknown sweep axis {axis!r}")
        if instance is not None and axis in ("n", "deg", "eps"):
            raise ValueError(f"axis {axis!r} requires generated instances, not --edges input")
        values = [float(tok) for tok in raw.split(",") if tok.strip()]
        if not values:
            raise ValueError("empty sweep value list")

    tasks = []
    for value in values:
        n, deg, eps, k, ds_c = args.n, args.deg, args.eps, args.k, args.ds_c
        if axis == "n":
            n = int(value)
        elif axis == "deg":
            deg = int(value)
        elif axis == "k":
            k = int(value)
        elif axis == "eps":
            eps = value
        elif axis == "c":
            ds_c = value
        for variant in variants:
            for repeat in range(args.repeat):
                tasks.append((value, n, deg, eps, k, ds_c, variant, repeat))

    def run(task):
        value, n, deg, eps, k, ds_c, variant, repeat = task
        row = _bench_point(
            instance, args.family, n, deg, eps, k, ds_c, variant, repeat,
            args.seed, args.samples, args.alpha, args.ref_samples,
            args.timings, args.unit_weights,
        )
        return [axis, _fmt(value)] + row

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, tasks))
    else:
        rows = [run(t) for t in tasks]

    # Per (sweep point, variant) spread across the repeats, for variance studies.
    groups: dict[tuple[str, str], list[float]] = {}
    for row in rows:
        groups.setdefault((row[1], row[2]), []).append(float(row[4]))
    for row in rows:
        flows = groups[(row[1], row[2])]
        mean = sum(flows) / len(flows)
        var = (
            sum((f - mean) ** 2 for f in flows) / (len(flows) - 1)
            if len(flows) > 1
            else 0.0
        )
        row.extend([_fmt(mean), _fmt(var)])

    def emit(fh: IO[str]) -> None:
        fh.write(BENCH_HEADER + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            emit(fh)
    else:
        emit(sys.stdout)
    return 0


# ----------------------------------------------------------------------
# dump-ftree
# ----------------------------------------------------------------------

def _cmd_dump_ftree(args: argparse.Namespace) -> int:
    graph, q = _load_inputs(args)
    cfg = _sampler_config(args)
    tree = new_ftree(q)
    if args.insert:
        for e in _read_edge_set(args.insert, graph):
            tree.insert_edge(graph, e, cfg)
    else:
        while True:
            cands = candidate_edges(graph, tree.attached_vertices(), tree.selected_edges)
            if not cands:
                break
            tree.insert_edge(graph, cands[0], cfg)
    text = tree.dump(graph)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="probflow",
        description="Budgeted expected-information-flow maximization in probabilistic graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic instance to files")
    g.add_argument("family", choices=("erdos", "partitioned", "wsn"))
    g.add_argument("--n", type=int, required=True, help="vertex count")
    g.add_argument("--deg", type=int, default=0, help="vertex degree (erdos, partitioned)")
    g.add_argument("--eps", type=float, default=0.0, help="connection radius (wsn)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--no-wrap", action="store_true", help="open the partition ring into a path")
    g.add_argument("--unit-weights", action="store_true", help="weight 1.0 everywhere")
    g.add_argument("--decay", action="store_true", help="distance-decay edge probabilities")
    g.add_argument("--decay-lambda", type=float, default=0.001, help="decay rate per meter")
    g.add_argument("--world-size-m", type=float, default=10000.0,
                   help="meters per coordinate unit for --decay")
    g.add_argument("--close-friends", type=int, default=None, metavar="F",
                   help="close-friends probability split with F picks per vertex")
    g.add_argument("--out", default="graph", help="output file prefix")
    g.set_defaults(func=_cmd_generate)

    m = sub.add_parser("maxflow", help="run a selection strategy, write the iteration CSV")
    _add_input_flags(m)
    m.add_argument("--variant", choices=VARIANTS, default="ft_m")
    m.add_argument("--k", type=int, required=True, help="edge budget")
    m.add_argument("--ds-c", type=float, default=2.0, help="delay penalization base")
    _add_sampler_flags(m)
    m.add_argument("--timings", action="store_true", help="fill elapsed_ms (breaks byte-determinism)")
    m.add_argument("--out", help="CSV path (default stdout)")
    m.set_defaults(func=_cmd_maxflow)

    e = sub.add_parser("evaluate", help="flow of a given edge set, exact or sampled")
    _add_input_flags(e)
    e.add_argument("--edge-set", help="file of selected edges, '<u> <v>' per line")
    e.add_argument("--mode", choices=("exact", "mc"), default="exact")
    _add_sampler_flags(e)
    e.add_argument("--out", help="optional CSV path")
    e.set_defaults(func=_cmd_evaluate)

    b = sub.add_parser("bench", help="sweep variants over an axis, write a CSV matrix")
    b.add_argument("--edges", help="run on this edge-list file instead of generating")
    b.add_argument("--weights", help="vertex-weight file for --edges")
    b.add_argument("--coords", help="vertex-coordinate file for --edges")
    b.add_argument("--query", default="0", help="query vertex label")
    b.add_argument("--family", choices=("erdos", "partitioned", "wsn"), default="erdos")
    b.add_argument("--n", type=int, default=100)
    b.add_argument("--deg", type=int, default=6)
    b.add_argument("--eps", type=float, default=0.1)
    b.add_argument("--k", type=int, default=20)
    b.add_argument("--variants", default="ft,dijkstra,naive")
    b.add_argument("--ds-c", type=float, default=2.0, help="delay penalization base")
    b.add_argument("--sweep", help="axis=v1,v2,... with axis in {n,deg,k,eps,c}")
    b.add_argument("--repeat", type=int, default=1)
    b.add_argument("--ref-samples", type=int, default=100000,
                   help="reference evaluation sample budget")
    b.add_argument("--unit-weights", action="store_true")
    _add_sampler_flags(b)
    b.add_argument("--timings", action="store_true", help="fill elapsed_ms (breaks byte-determinism)")
    b.add_argument("--out", help="CSV path (default stdout)")
    b.set_defaults(func=_cmd_bench)

    d = sub.add_parser("dump-ftree", help="insert edges and print the component tree")
    _add_input_flags(d)
    d.add_argument("--insert", help="ordered edge file; default inserts all reachable edges")
    _add_sampler_flags(d)
    d.add_argument("--out", help="write the dump to a file")
    d.set_defaults(func=_cmd_dump_ftree)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OracleLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (GraphError, FTreeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
