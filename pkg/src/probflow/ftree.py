"""Component tree for incremental expected-flow computation.

The tree partitions the currently selected subgraph into mono-connected
components (unique paths, flow computed analytically as edge-probability
products) and bi-connected components (cycles, flow estimated by sampling
only the component's own edges).  Each component drains through a single
articulation vertex toward the query vertex at the root, so per-component
results multiply up the tree.
"""

from __future__ import annotations

import threading
from collections import OrderedDict, deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graphs import Edge, ProbabilisticGraph, canonical_edge
from .sampling import (
    EXACT_SAMPLES,
    FlowEstimate,
    ReachTable,
    SamplerConfig,
    _success_counts,
    substream,
)


class FTreeError(ValueError):
    """Structural misuse of the component tree."""


class DirtyComponentError(FTreeError):
    """An operation needed sampled reach tables but a component was stale."""


@dataclass
class MonoComponent:
    """Tree-shaped component: every member has a unique path to the articulation vertex."""

    members: set[int]
    articulation: int
    parent_edges: dict[int, tuple[int, float]]

    def path_to_articulation(self, v: int) -> list[int]:
        """Vertices from v up to and including the articulation vertex."""
        if v == self.articulation:
            return [v]
        if v not in self.members:
            raise FTreeError(f"vertex {v} not in component")
        path = [v]
        while path[-1] != self.articulation:
            path.append(self.parent_edges[path[-1]][0])
        return path

    def local_reach(self, v: int) -> float:
        """Probability of v reaching the articulation vertex (edge product)."""
        r = 1.0
        x = v
        while x != self.articulation:
            x, p = self.parent_edges[x][0], self.parent_edges[x][1]
            r *= p
        return r

    def edge_set(self) -> set[Edge]:
        return {canonical_edge(v, parent) for v, (parent, _) in self.parent_edges.items()}

    def copy(self) -> "MonoComponent":
        return MonoComponent(set(self.members), self.articulation, dict(self.parent_edges))


@dataclass
class BiComponent:
    """Cyclic component: reach probabilities toward the articulation vertex are sampled."""

    members: set[int]
    articulation: int
    internal_edges: set[Edge]
    reach: Optional[ReachTable] = None
    dirty: bool = True

    def signature(self) -> str:
        verts = ",".join(map(str, sorted(self.members)))
        edges = ",".join(f"{u}-{v}" for u, v in sorted(self.internal_edges))
        return f"av={self.articulation};v={verts};e={edges}"

    def copy(self) -> "BiComponent":
        return BiComponent(
            set(self.members), self.articulation, set(self.internal_edges), self.reach, self.dirty
        )


Component = MonoComponent | BiComponent


@dataclass(frozen=True)
class InsertReport:
    """What an insertion did and what it cost.

    ``edges_sampled_count`` is the structural sampling cost of the insertion:
    the number of edges in every component whose reach table had to be
    renewed, counted whether or not a memoized table made the actual work
    unnecessary, so the cost of an edge is a deterministic property of the
    tree shape.
    """

    case_taken: str
    components_resampled: tuple[int, ...]
    edges_sampled_count: int


class MemoStore:
    """Bounded LRU cache of component signature -> sampled reach table.

    Entries for equal signatures are interchangeable (sampling streams are
    derived from the signature), so concurrent last-writer-wins puts are
    safe.
    """

    def __init__(self, capacity: int = 4096):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._entries: OrderedDict[str, ReachTable] = OrderedDict()
        self._lock = threading.Lock()

    def lookup(self, signature: str) -> Optional[ReachTable]:
        with self._lock:
            table = self._entries.get(signature)
            if table is not None:
                self._entries.move_to_end(signature)
            return table

    def store(self, signature: str, table: ReachTable) -> None:
        with self._lock:
            self._entries[signature] = table
            self._entries.move_to_end(signature)
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)

    def __len__(self) -> int:
        return len(self._entries)


def _component_sampling_parts(graph: ProbabilisticGraph, comp: BiComponent):
    """Local vertex/edge arrays for sampling one component's subgraph."""
    verts = sorted(comp.members | {comp.articulation})
    local = {v: i for i, v in enumerate(verts)}
    edges = sorted(comp.internal_edges)
    local_edges = [(local[u], local[v]) for u, v in edges]
    probs = [graph.probabilities[graph.edge_index[e]] for e in edges]
    return verts, local, local_edges, probs


class IncrementalComponentSampler:
    """Samples one bi-component's reach table in resumable batches.

    Batches continue a single signature-derived stream, so drawing the full
    budget in any batch sizes yields the exact same table as one shot.
    """

    def __init__(self, graph: ProbabilisticGraph, comp: BiComponent, cfg: SamplerConfig):
        self.signature = comp.signature()
        self.articulation = comp.articulation
        self.alpha = cfg.alpha
        verts, local, self._edges, self._probs = _component_sampling_parts(graph, comp)
        self._verts = verts
        self._source = local[comp.articulation]
        self._rng = substream(cfg.master_seed, "component", self.signature)
        self._counts = np.zeros(len(verts), dtype=np.int64)
        self.drawn = 0

    def draw(self, batch: int) -> None:
        if batch <= 0:
            return
        self._counts += _success_counts(
            self._edges, self._probs, len(self._verts), self._source, batch, self._rng
        )
        self.drawn += batch

    def table(self) -> ReachTable:
        if self.drawn < 1:
            raise FTreeError("no samples drawn yet")
        probs = {
            v: self._counts[i] / self.drawn
            for i, v in enumerate(self._verts)
            if v != self.articulation
        }
        return ReachTable(
            articulation=self.articulation, probs=probs, sample_count=self.drawn, alpha=self.alpha
        )


def sample_component(graph: ProbabilisticGraph, comp: BiComponent, cfg: SamplerConfig) -> ReachTable:
    """Sample a component's reach table at the configured budget in one shot."""
    sampler = IncrementalComponentSampler(graph, comp, cfg)
    sampler.draw(cfg.samples)
    return sampler.table()


class FTree:
    """Mutable component tree rooted at the query vertex.

    One writer at a time; probes operate on copies.
    """

    def __init__(self, q: int):
        self.q = q
        root = MonoComponent(members=set(), articulation=q, parent_edges={})
        self._next_id = 0
        self.components: dict[int, Component] = {}
        self.root_id = self._add_component(root)
        self.parent: dict[int, Optional[int]] = {self.root_id: None}
        self.children: dict[int, list[int]] = {self.root_id: []}
        self.vertex_index: dict[int, int] = {}
        self.selected_edges: set[Edge] = set()

    # ------------------------------------------------------------------
    # bookkeeping
    # ------------------------------------------------------------------

    def _add_component(self, comp: Component) -> int:
        cid = self._next_id
        self._next_id += 1
        self.components[cid] = comp
        return cid

    def copy(self) -> "FTree":
        other = FTree.__new__(FTree)
        other.q = self.q
        other._next_id = self._next_id
        other.components = {cid: comp.copy() for cid, comp in self.components.items()}
        other.root_id = self.root_id
        other.parent = dict(self.parent)
        other.children = {cid: list(kids) for cid, kids in self.children.items()}
        other.vertex_index = dict(self.vertex_index)
        other.selected_edges = set(self.selected_edges)
        return other

    def is_attached(self, v: int) -> bool:
        return v == self.q or v in self.vertex_index

    def attached_vertices(self) -> set[int]:
        return set(self.vertex_index) | {self.q}

    def component_of_vertex(self, v: int) -> int:
        """Component owning v as a member; the root for the query vertex."""
        if v == self.q:
            return self.root_id
        try:
            return self.vertex_index[v]
        except KeyError:
            raise FTreeError(f"vertex {v} is not attached") from None

    def _rebuild_links(self) -> None:
        """Re-derive parent/child links: a component hangs off the component
        owning its articulation vertex (the root collects articulation-at-Q
        components)."""
        parent: dict[int, Optional[int]] = {}
        children: dict[int, list[int]] = {cid: [] for cid in self.components}
        for cid, comp in self.components.items():
            if cid == self.root_id:
                parent[cid] = None
                continue
            owner = self.vertex_index.get(comp.articulation)
            pid = owner if owner is not None else self.root_id
            parent[cid] = pid
            children[pid].append(cid)
        for kids in children.values():
            kids.sort()
        self.parent = parent
        self.children = children

    def dirty_components(self) -> list[int]:
        return sorted(
            cid
            for cid, comp in self.components.items()
            if isinstance(comp, BiComponent) and comp.dirty
        )

    def lowest_common_ancestor(self, c1: int, c2: int) -> int:
        """Deepest component that is an ancestor-or-self of both."""
        if c1 not in self.components or c2 not in self.components:
            raise FTreeError("component not in tree")
        seen = set()
        cur: Optional[int] = c1
        while cur is not None:
            seen.add(cur)
            cur = self.parent[cur]
        cur = c2
        while cur is not None:
            if cur in seen:
                return cur
            cur = self.parent[cur]
        raise FTreeError("components are not in the same tree")

    # ------------------------------------------------------------------
    # insertion
    # ------------------------------------------------------------------

    def insert_edge(
        self,
        graph: ProbabilisticGraph,
        edge: tuple[int, int],
        cfg: SamplerConfig,
        memo: Optional[MemoStore] = None,
        defer_sampling: bool = False,
    ) -> InsertReport:
        """Add one selected edge, dispatching the structural update cases.

        At least one endpoint must already be attached.  Unless
        ``defer_sampling`` is set, every component invalidated by the update
        is re-sampled (or fetched from ``memo``) before returning.
        """
        e = canonical_edge(*edge)
        if e not in graph.edge_index:
            raise FTreeError(f"edge {e} is not an edge of the graph")
        if e in self.selected_edges:
            raise FTreeError(f"edge {e} already selected")
        u, v = e
        prob = graph.probabilities[graph.edge_index[e]]
        att_u, att_v = self.is_attached(u), self.is_attached(v)
        if not att_u and not att_v:
            raise FTreeError(f"neither endpoint of {e} is attached")

        if att_u and att_v:
            shared = self._common_component(u, v)
            if shared is not None:
                comp = self.components[shared]
                if isinstance(comp, BiComponent):
                    case = "IIIa"
                    comp.internal_edges.add(e)
                    comp.dirty = True
                else:
                    case = "IIIb"
                    self.split_tree(shared, u, v, extra_edge=e)
            else:
                case = self._insert_linking_edge(u, v, e)
        else:
            attach, fresh = (u, v) if att_u else (v, u)
            cid = self.component_of_vertex(attach)
            comp = self.components[cid]
            if isinstance(comp, MonoComponent):
                case = "IIa"
                comp.members.add(fresh)
                comp.parent_edges[fresh] = (attach, prob)
                self.vertex_index[fresh] = cid
            else:
                case = "IIb"
                mono = MonoComponent({fresh}, attach, {fresh: (attach, prob)})
                nid = self._add_component(mono)
                self.vertex_index[fresh] = nid

        self.selected_edges.add(e)
        self._rebuild_links()
        pending = self.dirty_components()
        cost = sum(len(self.components[cid].internal_edges) for cid in pending)
        if not defer_sampling:
            self.refresh(graph, cfg, memo)
        return InsertReport(
            case_taken=case, components_resampled=tuple(pending), edges_sampled_count=cost
        )

    def _common_component(self, u: int, v: int) -> Optional[int]:
        """Component whose members + articulation vertex cover both endpoints."""
        candidates = []
        for w in (u, v):
            cid = self.root_id if w == self.q else self.vertex_index.get(w)
            if cid is not None:
                candidates.append(cid)
        for cid in candidates:
            comp = self.components[cid]
            closure_hit = 0
            for w in (u, v):
                if w in comp.members or w == comp.articulation:
                    closure_hit += 1
            if closure_hit == 2:
                return cid
        return None

    def split_tree(
        self,
        comp_id: int,
        v_src: int,
        v_dest: int,
        extra_edge: Optional[Edge] = None,
    ) -> int:
        """Split a mono component around the new cycle between v_src and v_dest.

        The first vertex common to both paths toward the articulation vertex
        anchors a new bi-component holding the cycle; members cut off from
        the articulation vertex regroup into new mono components hanging off
        the cycle vertex their old path crossed first.  Returns the new
        component's id; its reach table is left dirty.
        """
        comp = self.components[comp_id]
        if not isinstance(comp, MonoComponent):
            raise FTreeError("split_tree requires a mono component")
        path_src = comp.path_to_articulation(v_src)
        path_dest = comp.path_to_articulation(v_dest)
        dest_set = set(path_dest)
        wedge = next(x for x in path_src if x in dest_set)
        cycle = path_src[: path_src.index(wedge)] + path_dest[: path_dest.index(wedge)]
        cycle_set = set(cycle)
        bi_edges: set[Edge] = set()
        for x in cycle:
            parent, _ = comp.parent_edges[x]
            bi_edges.add(canonical_edge(x, parent))
        if extra_edge is not None:
            bi_edges.add(extra_edge)

        bi = BiComponent(members=cycle_set, articulation=wedge, internal_edges=bi_edges)
        bi_id = self._add_component(bi)
        orphan_groups = self._classify_orphans(comp, cycle_set, stop={wedge, comp.articulation})
        self._detach_members(comp, cycle_set, bi_id)
        for anchor in sorted(orphan_groups):
            group = orphan_groups[anchor]
            mono = MonoComponent(
                members=group,
                articulation=anchor,
                parent_edges={m: comp.parent_edges[m] for m in group},
            )
            mid = self._add_component(mono)
            self._detach_members(comp, group, mid)
        self._drop_if_empty(comp_id, replacement=bi_id)
        self._rebuild_links()
        return bi_id

    def _classify_orphans(
        self, comp: MonoComponent, removed: set[int], stop: set[int]
    ) -> dict[int, set[int]]:
        """Group remaining members by the first removed vertex on their old
        path toward the articulation vertex; members reaching a stop vertex
        first stay put."""
        STAY = -1
        status: dict[int, int] = {}

        def classify(m: int) -> int:
            trail = []
            x = m
            while True:
                if x in removed:
                    res = x
                    break
                if x in stop:
                    res = STAY
                    break
                if x in status:
                    res = status[x]
                    break
                trail.append(x)
                x = comp.parent_edges[x][0]
            for t in trail:
                status[t] = res
            return res

        groups: dict[int, set[int]] = {}
        for m in comp.members - removed:
            anchor = classify(m)
            if anchor != STAY:
                groups.setdefault(anchor, set()).add(m)
        return groups

    def _detach_members(self, comp: MonoComponent, moved: set[int], new_cid: int) -> None:
        comp.members -= moved
        for x in moved:
            comp.parent_edges.pop(x, None)
            self.vertex_index[x] = new_cid

    def _drop_if_empty(self, comp_id: int, replacement: int) -> None:
        comp = self.components[comp_id]
        if isinstance(comp, MonoComponent) and not comp.members:
            del self.components[comp_id]
            if comp_id == self.root_id:
                self.root_id = replacement

    def _insert_linking_edge(self, u: int, v: int, new_edge: Edge) -> str:
        """Both endpoints attached in different components: fold the implied
        component-tree cycle into one new bi-component."""
        cid_u = self.component_of_vertex(u)
        cid_v = self.component_of_vertex(v)
        anc = self.lowest_common_ancestor(cid_u, cid_v)
        ring_members: set[int] = set()
        ring_edges: set[Edge] = {new_edge}
        absorbed: list[int] = []
        pending_monos: list[tuple[int, set[int], dict[int, tuple[int, float]]]] = []
        sub_cases: set[str] = set()

        def climb(cid: int, entry: int) -> int:
            while cid != anc:
                comp = self.components[cid]
                nxt = self.parent[cid]
                if entry == comp.articulation:
                    # Cycle only passes through the shared articulation vertex.
                    pass
                elif isinstance(comp, BiComponent):
                    sub_cases.add("IVb")
                    ring_members.update(comp.members)
                    ring_edges.update(comp.internal_edges)
                    absorbed.append(cid)
                else:
                    sub_cases.add("IVc")
                    self._merge_mono_path(cid, entry, ring_members, ring_edges, pending_monos)
                entry = comp.articulation
                cid = nxt  # type: ignore[assignment]
            return entry

        entry_src = climb(cid_u, u)
        entry_dest = climb(cid_v, v)

        anc_comp = self.components[anc]
        anc_was_root = anc == self.root_id
        anc_deleted = False
        if entry_src == entry_dest:
            sub_cases.add("IVa")
            ring_av = entry_src
        elif isinstance(anc_comp, BiComponent):
            sub_cases.add("IVb")
            ring_members.update(anc_comp.members)
            ring_edges.update(anc_comp.internal_edges)
            absorbed.append(anc)
            ring_av = anc_comp.articulation
            anc_deleted = True
        else:
            # The cycle enters the ancestor at two vertices: split it there,
            # anchoring the ring at the first vertex their paths share.
            sub_cases.add("IVa")
            path_src = anc_comp.path_to_articulation(entry_src)
            path_dest = anc_comp.path_to_articulation(entry_dest)
            dest_set = set(path_dest)
            wedge = next(x for x in path_src if x in dest_set)
            cycle = path_src[: path_src.index(wedge)] + path_dest[: path_dest.index(wedge)]
            cycle_set = set(cycle)
            for x in cycle:
                parent, _ = anc_comp.parent_edges[x]
                ring_edges.add(canonical_edge(x, parent))
            groups = self._classify_orphans(
                anc_comp, cycle_set, stop={wedge, anc_comp.articulation}
            )
            for anchor in sorted(groups):
                group = groups[anchor]
                pending_monos.append(
                    (anchor, group, {m: anc_comp.parent_edges[m] for m in group})
                )
                anc_comp.members -= group
                for m in group:
                    anc_comp.parent_edges.pop(m, None)
            ring_members.update(cycle_set)
            anc_comp.members -= cycle_set
            for x in cycle_set:
                anc_comp.parent_edges.pop(x, None)
            ring_av = wedge
            if not anc_comp.members:
                del self.components[anc]
                anc_deleted = True

        ring = BiComponent(members=ring_members, articulation=ring_av, internal_edges=ring_edges)
        ring_id = self._add_component(ring)
        for cid in absorbed:
            del self.components[cid]
        for x in ring_members:
            self.vertex_index[x] = ring_id
        for anchor, group, edges in pending_monos:
            mono = MonoComponent(members=group, articulation=anchor, parent_edges=edges)
            mid = self._add_component(mono)
            for m in group:
                self.vertex_index[m] = mid
        if anc_was_root and anc_deleted:
            self.root_id = ring_id
        self._rebuild_links()

        if "IVc" in sub_cases:
            return "IVc-composite"
        if "IVb" in sub_cases:
            return "IVb"
        return "IVa"

    def _merge_mono_path(
        self,
        cid: int,
        entry: int,
        ring_members: set[int],
        ring_edges: set[Edge],
        pending_monos: list[tuple[int, set[int], dict[int, tuple[int, float]]]],
    ) -> None:
        """Move the entry-to-articulation path of a chain component into the
        ring and queue the split-off member groups."""
        comp = self.components[cid]
        assert isinstance(comp, MonoComponent)
        path = comp.path_to_articulation(entry)
        moved = set(path[:-1])  # articulation vertex stays outside the ring here
        for x in path[:-1]:
            parent, _ = comp.parent_edges[x]
            ring_edges.add(canonical_edge(x, parent))
        groups = self._classify_orphans(comp, moved, stop={comp.articulation})
        all_gone = set(moved)
        for anchor in sorted(groups):
            group = groups[anchor]
            pending_monos.append((anchor, group, {m: comp.parent_edges[m] for m in group}))
            all_gone |= group
        ring_members.update(moved)
        comp.members -= all_gone
        for x in all_gone:
            comp.parent_edges.pop(x, None)
        if not comp.members:
            del self.components[cid]

    # ------------------------------------------------------------------
    # sampling upkeep
    # ------------------------------------------------------------------

    def refresh(
        self,
        graph: ProbabilisticGraph,
        cfg: SamplerConfig,
        memo: Optional[MemoStore] = None,
    ) -> list[int]:
        """Renew every dirty component's reach table (memo-aware)."""
        renewed = []
        for cid in self.dirty_components():
            comp = self.components[cid]
            assert isinstance(comp, BiComponent)
            sig = comp.signature()
            table = memo.lookup(sig) if memo is not None else None
            if table is None or table.sample_count < cfg.samples:
                table = sample_component(graph, comp, cfg)
                if memo is not None:
                    memo.store(sig, table)
            comp.reach = table
            comp.dirty = False
            renewed.append(cid)
        return renewed

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------

    def reach_to_root(self, v: int) -> float:
        """Probability that v's information reaches the query vertex."""
        if v == self.q:
            return 1.0
        if v not in self.vertex_index:
            raise FTreeError(f"vertex {v} is not attached")
        r = 1.0
        while v != self.q:
            comp = self.components[self.vertex_index[v]]
            if isinstance(comp, MonoComponent):
                r *= comp.local_reach(v)
            else:
                if comp.dirty or comp.reach is None:
                    raise DirtyComponentError("component needs re-sampling")
                r *= comp.reach.probs[v]
            v = comp.articulation
        return r

    def _bfs_component_order(self) -> list[int]:
        order = []
        queue = deque([self.root_id])
        while queue:
            cid = queue.popleft()
            order.append(cid)
            queue.extend(self.children[cid])
        return order

    def expected_flow(self, graph: ProbabilisticGraph) -> FlowEstimate:
        """Flow into the query vertex with propagated confidence bounds.

        Analytic path factors are exact; sampled factors contribute their
        per-vertex intervals, multiplied lower-times-lower / upper-times-upper
        through nested components and summed with the vertex weights.
        """
        if self.dirty_components():
            raise DirtyComponentError("expected_flow called with stale components")
        triples: dict[int, tuple[float, float, float]] = {self.q: (1.0, 1.0, 1.0)}
        samples_used = EXACT_SAMPLES
        for cid in self._bfs_component_order():
            comp = self.components[cid]
            base = triples[comp.articulation]
            if isinstance(comp, MonoComponent):
                local: dict[int, float] = {comp.articulation: 1.0}

                def local_reach(x: int) -> float:
                    trail = []
                    while x not in local:
                        trail.append(x)
                        x = comp.parent_edges[x][0]
                    r = local[x]
                    for t in reversed(trail):
                        r *= comp.parent_edges[t][1]
                        local[t] = r
                    return local[trail[0]] if trail else r

                for m in comp.members:
                    f = local_reach(m)
                    triples[m] = (f * base[0], f * base[1], f * base[2])
            else:
                table = comp.reach
                assert table is not None
                samples_used = min(samples_used, table.sample_count)
                for m in comp.members:
                    p = table.probs[m]
                    lo, hi = table.bounds(m)
                    triples[m] = (p * base[0], lo * base[1], hi * base[2])
        mean = graph.weights[self.q]
        lb = ub = mean
        for v in self.vertex_index:
            w = graph.weights[v]
            t = triples[v]
            mean += t[0] * w
            lb += t[1] * w
            ub += t[2] * w
        return FlowEstimate(mean=mean, lb=lb, ub=ub, samples_used=samples_used)

    def probe_edge(
        self,
        graph: ProbabilisticGraph,
        edge: tuple[int, int],
        cfg: SamplerConfig,
        memo: Optional[MemoStore] = None,
    ) -> tuple[FlowEstimate, InsertReport]:
        """Flow after a hypothetical insertion, leaving this tree untouched."""
        trial = self.copy()
        report = trial.insert_edge(graph, edge, cfg, memo=memo)
        return trial.expected_flow(graph), report

    # ------------------------------------------------------------------
    # diagnostics
    # ------------------------------------------------------------------

    def dump(self, graph: Optional[ProbabilisticGraph] = None) -> str:
        """One line per component, pre-order, children sorted structurally."""

        def name(v: int) -> str:
            return graph.labels[v] if graph is not None else str(v)

        def sort_key(cid: int):
            comp = self.components[cid]
            return (comp.articulation, tuple(sorted(comp.members)))

        display: dict[int, int] = {}
        order: list[int] = []

        def walk(cid: int) -> None:
            display[cid] = len(display)
            order.append(cid)
            for kid in sorted(self.children[cid], key=sort_key):
                walk(kid)

        walk(self.root_id)
        lines = []
        for cid in order:
            comp = self.components[cid]
            kind = "MONO" if isinstance(comp, MonoComponent) else "BI"
            members = ",".join(name(v) for v in sorted(comp.members))
            kids = ",".join(
                str(display[k]) for k in sorted(self.children[cid], key=sort_key)
            )
            lines.append(
                f"{display[cid]} {kind} AV={name(comp.articulation)} V={{{members}}} children=[{kids}]"
            )
        return "\n".join(lines)

    def verify(self, graph: ProbabilisticGraph) -> None:
        """Check every structural invariant; raises FTreeError on violation."""
        if self.root_id not in self.components:
            raise FTreeError("root component missing")
        if self.components[self.root_id].articulation != self.q:
            raise FTreeError("root articulation vertex is not the query vertex")
        if self.q in self.vertex_index:
            raise FTreeError("query vertex must not be a member")

        seen_members: set[int] = set()
        for cid, comp in self.components.items():
            overlap = comp.members & seen_members
            if overlap:
                raise FTreeError(f"vertices {overlap} appear in more than one component")
            seen_members |= comp.members
            for v in comp.members:
                if self.vertex_index.get(v) != cid:
                    raise FTreeError(f"vertex index out of sync for {v}")
            if comp.articulation in comp.members:
                raise FTreeError("articulation vertex may not be a member of its component")
        if set(self.vertex_index) != seen_members:
            raise FTreeError("vertex index does not match component members")

        # Link shape: single root, every component reachable, acyclic.
        reached = set(self._bfs_component_order())
        if reached != set(self.components):
            raise FTreeError("component links do not form a single tree")
        for cid, pid in self.parent.items():
            if pid is None:
                if cid != self.root_id:
                    raise FTreeError("non-root component without parent")
                continue
            pc = self.components[pid]
            av = self.components[cid].articulation
            if av not in pc.members and av != pc.articulation:
                raise FTreeError("articulation vertex not anchored in the parent component")

        edge_count = 0
        all_edges: set[Edge] = set()
        for cid, comp in self.components.items():
            if isinstance(comp, MonoComponent):
                if set(comp.parent_edges) != comp.members:
                    raise FTreeError("parent edges must cover exactly the members")
                for v in comp.members:
                    path = comp.path_to_articulation(v)
                    if len(set(path)) != len(path):
                        raise FTreeError("cycle inside a mono component")
                    interior = path[:-1]
                    if any(x not in comp.members for x in interior):
                        raise FTreeError("mono path escapes the component")
                edges = comp.edge_set()
                if len(edges) != len(comp.members):
                    raise FTreeError("mono component is not a tree")
            else:
                closure = comp.members | {comp.articulation}
                if len(closure) < 3:
                    raise FTreeError("bi component smaller than three vertices")
                edges = set(comp.internal_edges)
                for u, v in edges:
                    if u not in closure or v not in closure:
                        raise FTreeError("internal edge escapes the component")
                if not _biconnected(closure, edges):
                    raise FTreeError("bi component has a cut vertex or is disconnected")
                if not comp.dirty:
                    if comp.reach is None or set(comp.reach.probs) != comp.members:
                        raise FTreeError("reach table does not cover the members")
                    if comp.reach.articulation != comp.articulation:
                        raise FTreeError("reach table articulation mismatch")
            for e in edges:
                if e not in graph.edge_index:
                    raise FTreeError(f"component edge {e} not in graph")
                if e in all_edges:
                    raise FTreeError(f"edge {e} owned by two components")
            all_edges |= edges
            edge_count += len(edges)
        if all_edges != self.selected_edges or edge_count != len(self.selected_edges):
            raise FTreeError("component edges do not partition the selected edges")


def _biconnected(vertices: set[int], edges: set[Edge]) -> bool:
    """Brute-force cut-vertex check: the graph stays connected after removing
    any single vertex (components here are small)."""
    if not _connected(vertices, edges):
        return False
    if len(vertices) <= 2:
        return True
    for cut in vertices:
        rest = vertices - {cut}
        kept = {e for e in edges if cut not in e}
        if not _connected(rest, kept):
            return False
    return True


def _connected(vertices: set[int], edges: set[Edge]) -> bool:
    if not vertices:
        return True
    adj: dict[int, list[int]] = {v: [] for v in vertices}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    start = next(iter(vertices))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen == vertices


def new_ftree(q: int) -> FTree:
    """Fresh tree holding only the query vertex."""
    return FTree(q)
