"""Plane spanning trees, edge labels, canonical keys, cells and reduced
line graphs."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .geom import (PointSet, Position, convex_regular, delaunay_edges,
                   first_crossing, greedy_triangulation)

Edge = tuple[int, int]


def norm(e: Sequence[int]) -> Edge:
    a, b = int(e[0]), int(e[1])
    return (a, b) if a < b else (b, a)


class TreeError(ValueError):
    """Base class for rejected trees."""


class EdgeCountError(TreeError):
    def __init__(self, count: int, expected: int):
        super().__init__(f"tree needs {expected} distinct edges, got {count}")
        self.count = count
        self.expected = expected


class BadEdgeError(TreeError):
    def __init__(self, edge):
        super().__init__(f"edge {edge} is not a pair of distinct point indices")
        self.edge = edge


class DisconnectedError(TreeError):
    def __init__(self, components: list[list[int]]):
        super().__init__(f"graph is disconnected: components {components}")
        self.components = components


class CrossingError(TreeError):
    def __init__(self, e: Edge, f: Edge):
        super().__init__(f"edges {e} and {f} cross")
        self.pair = (e, f)


class LabelError(TreeError):
    def __init__(self, labels):
        super().__init__(f"labels {labels} are not a bijection onto 1..n-1")
        self.labels = labels


class PositionError(TreeError):
    pass


def components(n: int, edges: Iterable[Edge]) -> list[list[int]]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


@dataclass(frozen=True)
class PlaneTree:
    ps: PointSet
    edges: frozenset[Edge]

    @property
    def n(self) -> int:
        return self.ps.n

    @cached_property
    def sorted_edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def mask(self) -> int:
        pid = self.ps.pair_id
        m = 0
        for e in self.edges:
            m |= 1 << pid(e)
        return m

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.sorted_edges:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(x)) for x in adj)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def __contains__(self, e) -> bool:
        return norm(e) in self.edges

    def replace(self, removed: Edge, inserted: Edge) -> "PlaneTree":
        return PlaneTree(self.ps, (self.edges - {norm(removed)})
                         | {norm(inserted)})

    @property
    def unlabeled(self) -> "PlaneTree":
        return self

    def to_json(self) -> str:
        return json.dumps({"edges": [list(e) for e in self.sorted_edges]})


@dataclass(frozen=True)
class LabeledPlaneTree:
    tree: PlaneTree
    labels: tuple[tuple[Edge, int], ...] = field(default=())

    @classmethod
    def of(cls, tree: PlaneTree,
           labels: Mapping[Edge, int] | None = None) -> "LabeledPlaneTree":
        if labels is None:
            labels = {e: i + 1 for i, e in enumerate(tree.sorted_edges)}
        return cls(tree, tuple(sorted((norm(e), int(l))
                                      for e, l in labels.items())))

    @property
    def ps(self) -> PointSet:
        return self.tree.ps

    @property
    def n(self) -> int:
        return self.tree.n

    @property
    def edges(self) -> frozenset[Edge]:
        return self.tree.edges

    @property
    def sorted_edges(self) -> tuple[Edge, ...]:
        return self.tree.sorted_edges

    @property
    def unlabeled(self) -> PlaneTree:
        return self.tree

    @cached_property
    def label_map(self) -> dict[Edge, int]:
        return dict(self.labels)

    @cached_property
    def edge_of_label(self) -> dict[int, Edge]:
        return {l: e for e, l in self.labels}

    def label(self, e: Edge) -> int:
        return self.label_map[norm(e)]

    def __contains__(self, e) -> bool:
        return norm(e) in self.tree.edges

    def replace(self, removed: Edge, inserted: Edge) -> "LabeledPlaneTree":
        lm = dict(self.label_map)
        lab = lm.pop(norm(removed))
        lm[norm(inserted)] = lab
        return LabeledPlaneTree.of(self.tree.replace(removed, inserted), lm)

    def to_json(self) -> str:
        es = self.sorted_edges
        return json.dumps({"edges": [list(e) for e in es],
                           "labels": [self.label_map[e] for e in es]})


AnyTree = PlaneTree | LabeledPlaneTree


def validate_tree(ps: PointSet, edges: Iterable[Sequence[int]],
                  labels: Sequence[int] | Mapping | None = None) -> AnyTree:
    """Check an edge set (and optional labels aligned with it)."""
    if ps.position not in (Position.GENERAL, Position.CONVEX):
        raise PositionError(f"point set position is {ps.position.value}")
    raw = list(edges)
    n = ps.n
    for e in raw:
        if (len(e) != 2 or e[0] == e[1]
                or not all(0 <= int(v) < n for v in e)):
            raise BadEdgeError(tuple(e))
    es = [norm(e) for e in raw]
    uniq = set(es)
    if len(uniq) != n - 1 or len(es) != len(uniq):
        raise EdgeCountError(len(uniq), n - 1)
    comps = components(n, uniq)
    if len(comps) > 1:
        raise DisconnectedError(comps)
    bad = first_crossing(ps, uniq)
    if bad:
        raise CrossingError(*bad)
    t = PlaneTree(ps, frozenset(uniq))
    if labels is None:
        return t
    if isinstance(labels, Mapping):
        lm = {norm(e): int(l) for e, l in labels.items()}
    else:
        if len(labels) != len(es):
            raise LabelError(list(labels))
        lm = {e: int(l) for e, l in zip(es, labels)}
    if set(lm) != uniq or sorted(lm.values()) != list(range(1, n)):
        raise LabelError(sorted(lm.values()))
    return LabeledPlaneTree.of(t, lm)


def tree_from_json(ps: PointSet, text: str) -> AnyTree:
    doc = json.loads(text)
    return validate_tree(ps, doc["edges"], doc.get("labels"))


def canonical_key(t: AnyTree) -> bytes:
    """Bitset over lexicographically ordered pairs, then the label vector
    (one byte per edge in sorted edge order, two if n > 255)."""
    base = t.unlabeled
    m = base.mask
    npairs = base.n * (base.n - 1) // 2
    key = m.to_bytes((npairs + 7) // 8 or 1, "little")
    if isinstance(t, LabeledPlaneTree):
        width = 1 if t.n <= 256 else 2
        lm = t.label_map
        key += b"".join(lm[e].to_bytes(width, "little")
                        for e in t.sorted_edges)
    return key


# ------------------------------------------------------------- cell structure

@dataclass(frozen=True)
class Cell:
    boundary_vertices: tuple[int, ...]
    hull_edge: Edge
    parent_edge: Edge | None
    n_i: int

    @property
    def tree_edges(self) -> tuple[Edge, ...]:
        """Tree edges along the boundary, walking from the hull edge's
        head counterclockwise to its tail."""
        b = self.boundary_vertices
        return tuple(norm((b[i], b[i + 1])) for i in range(len(b) - 1))


@dataclass(frozen=True)
class DualTree:
    cells: tuple[Cell, ...]
    adjacency: tuple[tuple[int, int], ...]
    root: int
    parent: tuple[int | None, ...]

    def children(self, c: int) -> list[int]:
        return [i for i, p in enumerate(self.parent) if p == c]

    def depth(self, c: int) -> int:
        d = 0
        while self.parent[c] is not None:
            c = self.parent[c]
            d += 1
        return d


def hull_position(ps: PointSet) -> dict[int, int]:
    return {v: i for i, v in enumerate(ps.hull_order)}


def _require_convex(ps: PointSet) -> None:
    if ps.position != Position.CONVEX:
        raise PositionError("cells are defined for convex point sets only")


def cell_cycles(t: PlaneTree) -> list[tuple[tuple[int, ...], Edge]]:
    """Bounded faces of tree + hull edges, each as (CCW vertex cycle
    starting at the head of its hull edge, hull edge)."""
    ps = t.ps
    _require_convex(ps)
    n = ps.n
    order = ps.hull_order
    pos = hull_position(ps)
    hull_missing = []
    for i in range(n):
        a, b = order[i], order[(i + 1) % n]
        if norm((a, b)) not in t.edges:
            hull_missing.append((a, b))  # CCW direction a -> b
    adj = {v: set(t.adjacency[v]) for v in range(n)}
    for i in range(n):
        a, b = order[i], order[(i + 1) % n]
        adj[a].add(b)
        adj[b].add(a)
    out = []
    for a, b in hull_missing:
        # the cell lies left of a -> b; walk b -> ... -> a keeping the face
        # on the left: from v (arrived from u) take the neighbour w that is
        # the first one clockwise from u, i.e. the largest CCW offset below
        cyc = [b]
        u, v = a, b
        while v != a:
            du = (pos[u] - pos[v]) % n
            best = None
            for w in adj[v]:
                dw = (pos[w] - pos[v]) % n
                if dw < du and (best is None or dw > best[0]):
                    best = (dw, w)
            u, v = v, best[1]
            cyc.append(v)
        out.append((tuple(cyc), norm((a, b))))
    return out


def default_root_edge(t: PlaneTree) -> Edge:
    """Lowest-index hull edge not in the tree."""
    return min(e for e in t.ps.hull_edges if e not in t.edges)


def build_dual_tree(t: AnyTree, root_choice: Edge | None = None) -> DualTree:
    t = t.unlabeled
    _require_convex(t.ps)
    if root_choice is None:
        root_choice = default_root_edge(t)
    root_choice = norm(root_choice)
    if root_choice not in t.ps.hull_edges:
        raise TreeError(f"{root_choice} is not a hull edge")
    if root_choice in t.edges:
        raise TreeError(f"root edge {root_choice} is a tree edge")
    cycles = cell_cycles(t)
    owners: dict[Edge, list[int]] = {}
    for ci, (cyc, _) in enumerate(cycles):
        for i in range(len(cyc) - 1):
            owners.setdefault(norm((cyc[i], cyc[i + 1])), []).append(ci)
    adjacency = sorted(tuple(sorted(v)) for v in owners.values()
                       if len(v) == 2)
    shared = {tuple(sorted(v)): e for e, v in owners.items() if len(v) == 2}
    root = next(i for i, (_, h) in enumerate(cycles) if h == root_choice)
    parent: list[int | None] = [None] * len(cycles)
    pedge: list[Edge | None] = [None] * len(cycles)
    nbrs: dict[int, list[int]] = {i: [] for i in range(len(cycles))}
    for a, b in adjacency:
        nbrs[a].append(b)
        nbrs[b].append(a)
    seen = {root}
    stack = [root]
    while stack:
        c = stack.pop()
        for d in sorted(nbrs[c]):
            if d not in seen:
                seen.add(d)
                parent[d] = c
                pedge[d] = shared[tuple(sorted((c, d)))]
                stack.append(d)
    cells = tuple(Cell(cyc, h, pedge[i], len(cyc))
                  for i, (cyc, h) in enumerate(cycles))
    return DualTree(cells, tuple(adjacency), root, tuple(parent))


# ------------------------------------------------------ reduced line graphs

@dataclass(frozen=True)
class ReducedLineGraph:
    """Vertices are edge labels; tags[(v, w)] is the tag of the half-edge
    of v pointing at neighbour w."""
    vertices: tuple[int, ...]
    adjacency: frozenset[tuple[int, int]]
    tags: tuple[tuple[tuple[int, int], int], ...]

    @cached_property
    def tag_map(self) -> dict[tuple[int, int], int]:
        return dict(self.tags)

    def neighbours(self, v: int) -> list[int]:
        """Neighbours of v in tag order."""
        ws = [w for (u, w) in self.tag_map if u == v]
        return sorted(ws, key=lambda w: self.tag_map[(v, w)])

    def degree(self, v: int) -> int:
        return sum(1 for e in self.adjacency if v in e)

    def to_json(self) -> str:
        return json.dumps({
            "vertices": list(self.vertices),
            "adjacency": [list(e) for e in sorted(self.adjacency)],
            "tags": [[v, w, k] for (v, w), k in self.tags],
        })

    @classmethod
    def from_json(cls, text: str) -> "ReducedLineGraph":
        doc = json.loads(text)
        return cls(tuple(doc["vertices"]),
                   frozenset(tuple(sorted(e)) for e in doc["adjacency"]),
                   tuple(sorted(((v, w), k) for v, w, k in doc["tags"])))


def _rlg_cyclic(t: LabeledPlaneTree):
    """Adjacency and, per tree edge, the CCW cyclic neighbour sequence
    along C(e) with the chosen starting neighbour first."""
    ps = t.ps
    n = ps.n
    pos = hull_position(ps)
    cycles = cell_cycles(t.tree)
    # for each directed tree edge a->b with a cell on its left: the tree
    # edge following it and the one preceding it on that cell's boundary
    nxt: dict[tuple[int, int], Edge | None] = {}
    prv: dict[tuple[int, int], Edge | None] = {}
    adjacency: set[tuple[Edge, Edge]] = set()
    for cyc, _ in cycles:
        k = len(cyc)
        es = [(cyc[i], cyc[i + 1]) for i in range(k - 1)]
        for i, d in enumerate(es):
            nxt[d] = norm(es[i + 1]) if i + 1 < len(es) else None
            prv[d] = norm(es[i - 1]) if i > 0 else None
            if i + 1 < len(es):
                adjacency.add(tuple(sorted((norm(d), norm(es[i + 1])))))
    order: dict[Edge, list[Edge]] = {}
    for e in t.sorted_edges:
        a, b = e
        on_hull = e in ps.hull_edges
        if on_hull:
            # counterclockwise direction of the hull edge
            if (pos[b] - pos[a]) % n != 1:
                a, b = b, a
        # a -> b has a cell on its left; b -> a may too
        order[e] = [nxt.get((a, b)), prv.get((a, b)),
                    nxt.get((b, a)), prv.get((b, a))]
    return adjacency, order


def rlg_build(t: AnyTree, tags: str = "slot") -> ReducedLineGraph:
    """Tagged reduced line graph of a convex tree.

    ``tags="compact"`` numbers the neighbours of each edge 1..deg in
    counterclockwise order along the union of its cells.  ``tags="slot"``
    keeps the same order but records the fixed slot (1..4) each neighbour
    occupies: after the head on the left cell, before the tail on the left
    cell, then the same two on the right cell.
    """
    if isinstance(t, PlaneTree):
        t = LabeledPlaneTree.of(t)
    if tags not in ("compact", "slot"):
        raise ValueError(f"unknown tag mode {tags!r}")
    _require_convex(t.ps)
    adjacency, order = _rlg_cyclic(t)
    lab = t.label_map
    out = []
    for e, seq in order.items():
        if tags == "compact":
            seq = [f for f in seq if f is not None]
        for k, f in enumerate(seq, start=1):
            if f is not None:
                out.append(((lab[e], lab[f]), k))
    return ReducedLineGraph(
        tuple(sorted(lab.values())),
        frozenset(tuple(sorted((lab[e], lab[f]))) for e, f in adjacency),
        tuple(sorted(out)))


def _cyclic_signature(g: ReducedLineGraph, keep: frozenset[int]):
    """Per vertex, neighbour order restricted to keep, as a cyclic class."""
    sig = {}
    for v in keep:
        seq = [w for w in g.neighbours(v) if w in keep]
        sig[v] = _min_rotation(seq)
    return sig


def _min_rotation(seq: list[int]) -> tuple[int, ...]:
    if not seq:
        return ()
    return min(tuple(seq[i:] + seq[:i]) for i in range(len(seq)))


def _tree_signature(t: LabeledPlaneTree, keep: frozenset[int]):
    _, order = _rlg_cyclic(t)
    lab = t.label_map
    return {lab[e]: _min_rotation([lab[f] for f in seq if f is not None])
            for e, seq in order.items()}


def _dihedral_images(t: LabeledPlaneTree) -> list[LabeledPlaneTree]:
    """All rotations and reflections of a tree on a regular polygon whose
    hull order is 0..n-1."""
    n = t.n
    out = []
    for r in range(n):
        for flip in (False, True):
            f = (lambda v: (r - v) % n) if flip else (lambda v: (v + r) % n)
            lm = {norm((f(a), f(b))): l for (a, b), l in t.labels}
            out.append(LabeledPlaneTree.of(
                PlaneTree(t.ps, frozenset(lm)), lm))
    return out


def _rotation_class(t: LabeledPlaneTree) -> tuple:
    n = t.n
    return min(tuple(sorted((norm(((a + r) % n, (b + r) % n)), l)
                            for (a, b), l in t.labels))
               for r in range(n))


class ReconstructionError(TreeError):
    pass


def rlg_reconstruct(g: ReducedLineGraph, n: int,
                    tags: str = "slot") -> LabeledPlaneTree:
    """Rebuild a labelled tree on the regular n-gon from its tagged graph.

    The result's tagged graph equals ``g``.  With slot tags the tree is
    unique up to rotations and reflections; compact tags lose the
    information needed for that (see ``rlg_build``).
    """
    if len(g.vertices) != n - 1:
        raise ReconstructionError(
            f"graph has {len(g.vertices)} vertices, need {n - 1}")
    if tags == "slot":
        return _reconstruct_slots(g, n)
    return _reconstruct_peeling(g, n, tags)


def _reconstruct_slots(g: ReducedLineGraph, n: int) -> LabeledPlaneTree:
    """Glue cells back together.

    Slots 1, 2 hold the successor and predecessor of an edge on one of its
    cells, slots 3, 4 the same on the other cell.  Each edge gets two
    abstract endpoints; consecutive edges of a cell share one, and the
    cells' hull edges plus the tree edges lying on the hull give the
    cyclic order of the polygon.
    """
    tm = g.tag_map
    side: dict[tuple[int, int], tuple[int | None, int | None]] = {}
    for v in g.vertices:
        slots = {k: w for (u, w), k in tm.items() if u == v}
        side[(v, 0)] = (slots.get(1), slots.get(2))
        side[(v, 1)] = (slots.get(3), slots.get(4))

    # side 0 runs endpoint 0 -> 1, side 1 runs 1 -> 0
    def tail(v: int, s: int) -> tuple[int, int]:
        return (v, s)

    def head(v: int, s: int) -> tuple[int, int]:
        return (v, 1 - s)

    parent: dict[tuple[int, int], tuple[int, int]] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        parent[find(a)] = find(b)

    def side_with_prev(f: int, e: int) -> int:
        for s in (0, 1):
            if side[(f, s)][1] == e:
                return s
        raise ReconstructionError(f"tags of {f} do not point back to {e}")

    for v in g.vertices:
        for s in (0, 1):
            nxt = side[(v, s)][0]
            if nxt is not None:
                union(head(v, s), tail(nxt, side_with_prev(nxt, v)))
    succ: dict = {}
    for v in g.vertices:
        for s in (0, 1):
            nxt, prv = side[(v, s)]
            other = side[(v, 1 - s)]
            if prv is None and (nxt is not None or other != (None, None)):
                # first edge of a cell: walk to the last one
                w, ws, steps = v, s, 0
                while side[(w, ws)][0] is not None:
                    w2 = side[(w, ws)][0]
                    ws = side_with_prev(w2, w)
                    w = w2
                    steps += 1
                    if steps > n:
                        raise ReconstructionError("cell walk does not end")
                succ[find(head(w, ws))] = find(tail(v, s))
        if side[(v, 1)] == (None, None) and side[(v, 0)] != (None, None):
            succ[find(tail(v, 0))] = find(head(v, 0))
        elif side[(v, 0)] == (None, None) and side[(v, 1)] != (None, None):
            succ[find(tail(v, 1))] = find(head(v, 1))
    classes = {find((v, s)) for v in g.vertices for s in (0, 1)}
    if len(classes) != n:
        raise ReconstructionError(
            f"tags give {len(classes)} polygon vertices, need {n}")
    if n == 2:
        cyc = sorted(classes)
    else:
        start = min(classes)
        cyc = [start]
        while len(cyc) <= n:
            nxt_c = succ.get(cyc[-1])
            if nxt_c is None:
                raise ReconstructionError("hull order is broken")
            if nxt_c == start:
                break
            cyc.append(nxt_c)
        if len(cyc) != n:
            raise ReconstructionError("hull order is not a single cycle")
    index = {c: i for i, c in enumerate(cyc)}
    ps = convex_regular(n)
    lm = {norm((index[find((v, 0))], index[find((v, 1))])): v
          for v in g.vertices}
    if len(lm) != n - 1:
        raise ReconstructionError("tags produce repeated edges")
    base = LabeledPlaneTree.of(PlaneTree(ps, frozenset(lm)), lm)
    for t in _dihedral_images(base):
        if rlg_build(t, "slot") == g:
            return t
    raise ReconstructionError("graph is not realisable on the regular n-gon")


def _reconstruct_peeling(g: ReducedLineGraph, n: int,
                         tags: str) -> LabeledPlaneTree:
    """Search version for compact tags.

    Peels vertices of degree at most one (edges with a leaf endpoint on
    the hull), rebuilds the smaller instance, and re-attaches the leaf at
    each hull slot next to an endpoint of its neighbour, keeping the
    candidates whose neighbour orders agree.
    """
    polys = {m: convex_regular(m) for m in range(2, n + 1)}
    memo: dict[frozenset[int], list[LabeledPlaneTree]] = {}

    def solve(keep: frozenset[int]) -> list[LabeledPlaneTree]:
        if keep in memo:
            return memo[keep]
        m = len(keep) + 1
        target = _cyclic_signature(g, keep)
        found: dict[bytes, LabeledPlaneTree] = {}
        if m == 2:
            (l,) = keep
            ps = polys[2]
            t = LabeledPlaneTree.of(PlaneTree(ps, frozenset({(0, 1)})),
                                    {(0, 1): l})
            found[canonical_key(t)] = t
        else:
            for x in sorted(keep):
                nb = [w for w in g.neighbours(x) if w in keep]
                if len(nb) > 1:
                    continue
                rest = keep - {x}
                for small in solve(rest):
                    for t in _extend(small, x, nb, polys[m]):
                        k = _rotation_class(t)
                        if k not in found and \
                                _tree_signature(t, keep) == target:
                            found[k] = t
        memo[keep] = list(found.values())
        return memo[keep]

    # candidates are kept once per rotation class; the exact tags pick the
    # member of the dihedral orbit
    for rep in solve(frozenset(g.vertices)):
        for t in _dihedral_images(rep):
            if rlg_build(t, tags) == g:
                return t
    raise ReconstructionError("graph is not realisable on the regular n-gon")


def _extend(small: LabeledPlaneTree, x: int, nb: list[int],
            ps: PointSet) -> list[LabeledPlaneTree]:
    """Insert a new hull vertex carrying leaf edge label x."""
    m = small.n
    if nb:
        f = small.edge_of_label[nb[0]]
        anchors = set(f)
    else:
        anchors = set(range(m))
    out = []
    for q in sorted(anchors):
        # new vertex sits right after position q or right before it
        for slot in (q + 1, q):
            def shift(v: int, s=slot) -> int:
                return v if v < s else v + 1
            newq = shift(q)
            p = slot if slot <= m else m
            lm = {norm((shift(a), shift(b))): l for (a, b), l in small.labels}
            lm[norm((p, newq))] = x
            edges = frozenset(lm)
            if len(edges) != m:
                continue
            t = PlaneTree(ps, edges)
            if _crosses(t):
                continue
            out.append(LabeledPlaneTree.of(t, lm))
    return out


def _crosses(t: PlaneTree) -> bool:
    idx = t.ps.pair_index
    cm = t.ps.cross_mask
    m = t.mask
    return any(cm[idx[e]] & m for e in t.edges)


def random_tree(ps: PointSet, seed: int = 0) -> PlaneTree:
    """Random plane spanning tree: Kruskal with random weights over a
    triangulation (exact greedy one for small sets, Delaunay otherwise)."""
    rng = random.Random(seed)
    if ps.n <= 40:
        cand = sorted(greedy_triangulation(ps))
    else:
        cand = sorted(delaunay_edges(ps))
        if first_crossing(ps, cand) is not None:
            cand = sorted(greedy_triangulation(ps))
    rng.shuffle(cand)
    root = list(range(ps.n))

    def find(x: int) -> int:
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    chosen = []
    for a, b in cand:
        ra, rb = find(a), find(b)
        if ra != rb:
            root[ra] = rb
            chosen.append((a, b))
    return validate_tree(ps, chosen)
