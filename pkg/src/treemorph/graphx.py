"""Exhaustive enumeration and exact transition-graph analytics.

Trees are handled as integer bitsets over the lexicographically ordered
index pairs of the point set; labelled trees add a tuple with the label
of each tree edge in increasing pair order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import struct
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations
from typing import Hashable, Iterable, Iterator, Sequence

from .geom import PointSet, Position
from .moves import (Kind, MoveError, _max_matching, _restricted_matching,
                    as_kind, check_packing, sim_pair_ok, triangle_of)
from .trace import Trace, Verdict, verify_trace
from .tree import (AnyTree, LabeledPlaneTree, PlaneTree, canonical_key,
                   components)

ENUM_CAP = 10**7
PAIR_CAP = 10**8


class CapExceeded(RuntimeError):
    def __init__(self, what: str, count: int, cap: int):
        super().__init__(f"{what}: {count} exceeds cap {cap}")
        self.count = count
        self.cap = cap


class Disconnected(RuntimeError):
    def __init__(self, sizes: list[int]):
        super().__init__(f"transition graph is disconnected: component "
                         f"sizes {sizes}")
        self.sizes = sizes


def threads() -> int:
    try:
        return max(1, int(os.environ.get("TREEMORPH_THREADS", "1")))
    except ValueError:
        return 1


def _bits(m: int) -> Iterator[int]:
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


class _Tables:
    """Per point set lookup tables for bitset moves."""

    def __init__(self, ps: PointSet):
        self.ps = ps
        self.n = ps.n
        self.pairs = ps.pairs
        self.cross = ps.cross_mask
        self.idx = ps.pair_index
        self.pair_bit = [1 << k for k in range(len(self.pairs))]
        self._tri: dict[tuple[int, int], int | None] = {}

    def tri_mask(self, e: int, f: int) -> int | None:
        """Blocking mask of the triangle spanned by pairs e and f (None if
        they share no endpoint)."""
        key = (e, f) if e < f else (f, e)
        if key not in self._tri:
            t = triangle_of(self.pairs[e], self.pairs[f])
            self._tri[key] = None if t is None else self.ps.triangle_mask(*t)
        return self._tri[key]

    def third(self, e: int, f: int) -> int:
        p, q, r = triangle_of(self.pairs[e], self.pairs[f])
        return self.idx[(q, r) if q < r else (r, q)]

    def neighbours(self, mask: int, kind: Kind) -> list[tuple[int, int]]:
        """(removed, inserted) pair indices of single moves at ``kind`` or
        stronger, in lexicographic order."""
        n = self.n
        pairs = self.pairs
        edges = list(_bits(mask))
        adj: list[list[int]] = [[] for _ in range(n)]
        for k in edges:
            a, b = pairs[k]
            adj[a].append(b)
            adj[b].append(a)
        out = []
        need_shared = kind.rank >= Kind.ROTATION.rank
        for e in edges:
            a, b = pairs[e]
            side = 1 << a
            stack = [a]
            while stack:
                v = stack.pop()
                for w in adj[v]:
                    if not side >> w & 1 and not (v == a and w == b):
                        side |= 1 << w
                        stack.append(w)
            rest = mask & ~self.pair_bit[e]
            ea, eb = pairs[e]
            for f, (c, d) in enumerate(pairs):
                if f == e or (side >> c & 1) == (side >> d & 1):
                    continue
                if self.cross[f] & rest:
                    continue
                if kind is Kind.EXCHANGE:
                    out.append((e, f))
                    continue
                if self.cross[f] >> e & 1:
                    continue
                if not need_shared:
                    out.append((e, f))
                    continue
                if c != ea and c != eb and d != ea and d != eb:
                    continue
                if kind is Kind.ROTATION:
                    out.append((e, f))
                    continue
                if self.tri_mask(e, f) & (mask | self.pair_bit[f]):
                    continue
                if kind is Kind.SLIDE and not mask >> self.third(e, f) & 1:
                    continue
                out.append((e, f))
        return out


def tables(ps: PointSet) -> _Tables:
    cache = ps.__dict__.setdefault("_graph_tables", None)
    if cache is None:
        cache = _Tables(ps)
        ps.__dict__["_graph_tables"] = cache
    return cache


# ------------------------------------------------------------ enumeration

State = Hashable  # int mask, or (mask, labels) for labelled trees


def _seed_mask(ps: PointSet) -> int:
    """Star at the lowest point (always plane)."""
    c = min(range(ps.n), key=lambda i: (ps[i].y, ps[i].x))
    idx = ps.pair_index
    m = 0
    for v in range(ps.n):
        if v != c:
            m |= 1 << idx[(min(c, v), max(c, v))]
    return m


def mask_to_tree(ps: PointSet, mask: int) -> PlaneTree:
    return PlaneTree(ps, frozenset(ps.pairs[k] for k in _bits(mask)))


def state_to_tree(ps: PointSet, s: State) -> AnyTree:
    if isinstance(s, tuple):
        mask, labels = s
        t = mask_to_tree(ps, mask)
        return LabeledPlaneTree.of(t, dict(zip(t.sorted_edges, labels)))
    return mask_to_tree(ps, s)


def tree_to_state(t: AnyTree) -> State:
    if isinstance(t, LabeledPlaneTree):
        return (t.tree.mask, tuple(t.label_map[e] for e in t.sorted_edges))
    return t.mask


def _relabel(tb: _Tables, mask: int, labels: tuple, e: int, f: int
             ) -> tuple[int, tuple]:
    edges = list(_bits(mask))
    lab = dict(zip(edges, labels))
    lab[f] = lab.pop(e)
    new = mask & ~tb.pair_bit[e] | tb.pair_bit[f]
    return new, tuple(lab[k] for k in _bits(new))


def enumerate_trees(ps: PointSet, labeled: bool = False,
                    cap: int = ENUM_CAP) -> list[State]:
    """All plane spanning trees, by BFS over the exchange graph from a
    star; labelled mode multiplies in every labelling."""
    if ps.position not in (Position.GENERAL, Position.CONVEX):
        raise ValueError("point set must be in general position")
    if ps.n == 1:
        return [0]
    tb = tables(ps)
    start = _seed_mask(ps)
    seen = {start}
    order = [start]
    q = deque([start])
    while q:
        m = q.popleft()
        for e, f in tb.neighbours(m, Kind.EXCHANGE):
            nm = m & ~tb.pair_bit[e] | tb.pair_bit[f]
            if nm not in seen:
                seen.add(nm)
                order.append(nm)
                q.append(nm)
                if len(seen) > cap:
                    raise CapExceeded("tree enumeration", len(seen), cap)
    order.sort()
    if not labeled:
        return order
    total = len(order) * math.factorial(ps.n - 1)
    if total > cap:
        raise CapExceeded("labelled enumeration", total, cap)
    return [(m, p) for m in order for p in permutations(range(1, ps.n))]


def convex_count(n: int) -> int:
    """Number of plane spanning trees on n points in convex position."""
    return math.comb(3 * n - 3, n - 1) // (2 * n - 1)


# ------------------------------------------------------- transition graphs

@dataclass
class TransitionGraph:
    ps: PointSet
    kind: Kind
    simultaneous: bool
    restricted: bool
    labeled: bool
    nodes: list[State]
    adj: list[list[int]]
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {s: i for i, s in enumerate(self.nodes)}

    def __len__(self) -> int:
        return len(self.nodes)

    def node_of(self, t: AnyTree | State) -> int:
        s = t if not isinstance(t, (PlaneTree, LabeledPlaneTree)) \
            else tree_to_state(t)
        return self.index[s]

    def tree(self, i: int) -> AnyTree:
        return state_to_tree(self.ps, self.nodes[i])

    def key(self, i: int) -> bytes:
        return canonical_key(self.tree(i))

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind.value, "simultaneous": self.simultaneous,
            "restricted": self.restricted, "labeled": self.labeled,
            "nodes": [self.key(i).hex() for i in range(len(self))],
            "adjacency": self.adj}, sort_keys=True)

    def to_csr(self) -> bytes:
        """Little-endian u32 node count, u32 offsets[n+1], u32 targets."""
        offs = [0]
        tgt: list[int] = []
        for a in self.adj:
            tgt.extend(a)
            offs.append(len(tgt))
        n = len(self.adj)
        return (struct.pack("<I", n) + struct.pack(f"<{n + 1}I", *offs)
                + struct.pack(f"<{len(tgt)}I", *tgt))


def _single_adjacency(ps: PointSet, nodes: list[State], index: dict,
                      kind: Kind, labeled: bool) -> list[list[int]]:
    tb = tables(ps)

    def row(i: int) -> list[int]:
        s = nodes[i]
        mask, labels = s if labeled else (s, None)
        out = []
        for e, f in tb.neighbours(mask, kind):
            if labeled:
                t = _relabel(tb, mask, labels, e, f)
            else:
                t = mask & ~tb.pair_bit[e] | tb.pair_bit[f]
            out.append(index[t])
        return sorted(set(out))

    w = threads()
    if w > 1:
        with ThreadPoolExecutor(w) as ex:
            return list(ex.map(row, range(len(nodes))))
    return [row(i) for i in range(len(nodes))]


def sim_step_exists(ps: PointSet, s1: State, s2: State, kind: Kind,
                    restricted: bool = False, labeled: bool = False) -> bool:
    """One simultaneous move from s1 to s2?  Labels force the bijection."""
    tb = tables(ps)
    if labeled:
        m1, l1 = s1
        m2, l2 = s2
        lab1 = dict(zip(_bits(m1), l1))
        lab2 = dict(zip(_bits(m2), l2))
        common = m1 & m2
        if any(lab1[k] != lab2[k] for k in _bits(common)):
            return False
    else:
        m1, m2 = s1, s2
    if m1 == m2:
        return True
    old = list(_bits(m1 & ~m2))
    new = list(_bits(m2 & ~m1))
    if kind.rank >= Kind.COMPATIBLE.rank:
        if any(tb.cross[f] & m1 for f in new):
            return False
    if kind is Kind.EXCHANGE and not labeled:
        return True
    pairs = tb.pairs
    e1 = frozenset(pairs[k] for k in _bits(m1))
    e2 = frozenset(pairs[k] for k in _bits(m2))

    def ok(e: int, f: int) -> bool:
        if kind.rank < Kind.ROTATION.rank:
            return True
        tm = tb.tri_mask(e, f)
        if tm is None:
            return False
        if kind is Kind.ROTATION:
            return True
        if tm & (m1 | m2):
            return False
        if kind is Kind.EMPTY_TRIANGLE:
            return True
        th = tb.third(e, f)
        return bool(m1 >> th & 1 and m2 >> th & 1)

    if labeled:
        by_label = {lab2[f]: f for f in new}
        return all(ok(e, by_label[lab1[e]]) for e in old)
    if restricted and kind is Kind.SLIDE:
        res = _restricted_matching(
            ps, [pairs[e] for e in old], [pairs[f] for f in new],
            lambda a, b: sim_pair_ok(ps, e1, e2, kind, a, b), 10**6)
        return res is not None
    return _max_matching(old, new, ok) is not None


def _sim_adjacency(ps, nodes, kind, restricted, labeled, pair_cap):
    n = len(nodes)
    if n * (n - 1) // 2 > pair_cap:
        raise CapExceeded("simultaneous pair checks", n * (n - 1) // 2,
                          pair_cap)
    adj: list[list[int]] = [[] for _ in range(n)]

    def row(i: int) -> list[int]:
        return [j for j in range(i + 1, n)
                if sim_step_exists(ps, nodes[i], nodes[j], kind, restricted,
                                   labeled)]

    w = threads()
    if w > 1:
        with ThreadPoolExecutor(w) as ex:
            rows = list(ex.map(row, range(n)))
    else:
        rows = [row(i) for i in range(n)]
    for i, r in enumerate(rows):
        for j in r:
            adj[i].append(j)
            adj[j].append(i)
    for a in adj:
        a.sort()
    return adj


def build_transition_graph(ps: PointSet, kind: Kind | str,
                           simultaneous: bool = False,
                           restricted: bool = False, labeled: bool = False,
                           cap: int = ENUM_CAP,
                           pair_cap: int = PAIR_CAP) -> TransitionGraph:
    kind = as_kind(kind)
    nodes = enumerate_trees(ps, labeled, cap)
    index = {s: i for i, s in enumerate(nodes)}
    if simultaneous:
        adj = _sim_adjacency(ps, nodes, kind, restricted, labeled, pair_cap)
    else:
        adj = _single_adjacency(ps, nodes, index, kind, labeled)
    return TransitionGraph(ps, kind, simultaneous, restricted, labeled,
                           nodes, adj, index)


# ---------------------------------------------------------------- distances

def bfs(g: TransitionGraph, src: int) -> list[int]:
    dist = [-1] * len(g)
    dist[src] = 0
    q = deque([src])
    adj = g.adj
    while q:
        v = q.popleft()
        d = dist[v] + 1
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = d
                q.append(w)
    return dist


class Unreachable(RuntimeError):
    pass


def distance(g: TransitionGraph, a, b) -> int:
    i = a if isinstance(a, int) else g.node_of(a)
    j = b if isinstance(b, int) else g.node_of(b)
    d = bfs(g, i)[j]
    if d < 0:
        raise Unreachable(f"node {j} is unreachable from node {i}")
    return d


def component_sizes(g: TransitionGraph) -> list[int]:
    seen = [False] * len(g)
    sizes = []
    for s in range(len(g)):
        if seen[s]:
            continue
        seen[s] = True
        stack = [s]
        c = 0
        while stack:
            v = stack.pop()
            c += 1
            for w in g.adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        sizes.append(c)
    return sorted(sizes, reverse=True)


def is_connected(g: TransitionGraph) -> bool:
    return len(component_sizes(g)) <= 1


@dataclass
class DiameterResult:
    diameter: int
    witness: tuple[int, int]
    exact: bool = True


def diameter(g: TransitionGraph, approximate: bool = False) -> DiameterResult:
    """Exact diameter by all-sources reachability over bitsets.

    reach[v] after k rounds is the ball of radius k around v; the diameter
    is the first k at which every ball is the whole graph.  With
    ``approximate`` a double BFS sweep gives a lower bound instead.
    """
    n = len(g)
    if n == 0:
        raise ValueError("empty graph")
    sizes = component_sizes(g)
    if len(sizes) > 1:
        raise Disconnected(sizes)
    if n == 1:
        return DiameterResult(0, (0, 0))
    if approximate:
        d0 = bfs(g, 0)
        far = max(range(n), key=lambda i: d0[i])
        d1 = bfs(g, far)
        other = max(range(n), key=lambda i: d1[i])
        return DiameterResult(d1[other], (far, other), exact=False)
    full = (1 << n) - 1
    reach = [1 << v for v in range(n)]
    adj = g.adj
    k = 0
    while True:
        if all(r == full for r in reach):
            break
        prev = reach
        reach = []
        for v in range(n):
            r = prev[v]
            for w in adj[v]:
                r |= prev[w]
            reach.append(r)
        k += 1
        if all(r == full for r in reach):
            # witness: a ball of radius k-1 that still misses a node
            for v in range(n):
                miss = full & ~prev[v]
                if miss:
                    w = (miss & -miss).bit_length() - 1
                    return DiameterResult(k, (v, w))
    return DiameterResult(k, (0, 0))


def eccentricity(g: TransitionGraph, v: int) -> int:
    return max(bfs(g, v))


def diameter_csv_row(g: TransitionGraph, res: DiameterResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    a, b = res.witness
    w.writerow([g.ps.n, g.ps.position.value, g.kind.value,
                int(g.simultaneous), int(g.labeled), len(g), res.diameter,
                g.key(a).hex(), g.key(b).hex()])
    return buf.getvalue()


CSV_HEADER = ("n,position,kind,sim,labeled,nodes,diameter,witness_a,"
              "witness_b\n")


def trace_at_least_distance(g: TransitionGraph, tr: Trace) -> bool:
    """A trace can never beat the exact transition-graph distance."""
    trees = tr.trees()
    return len(tr.steps) >= distance(g, trees[0], trees[-1])


__all__ = [
    "CapExceeded", "Disconnected", "TransitionGraph", "Unreachable",
    "DiameterResult", "enumerate_trees", "convex_count",
    "build_transition_graph", "distance", "diameter", "bfs",
    "component_sizes", "is_connected", "verify_trace", "Verdict",
    "sim_step_exists", "state_to_tree", "tree_to_state", "mask_to_tree",
    "diameter_csv_row", "CSV_HEADER", "trace_at_least_distance",
]
