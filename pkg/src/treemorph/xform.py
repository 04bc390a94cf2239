"""Constructive transformations between plane spanning trees.

Every public algorithm returns a :class:`Trace` that has already been
replayed by :func:`verify_trace`, including the step bound it promises.
"""

from __future__ import annotations

import heapq
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, cmp_to_key
from itertools import combinations

from .geom import PointSet, Position, _det, proper_cross
from .moves import Kind, Move, SimMove, apply_sim, sim_move_valid
from .trace import Trace, verify_trace
from .tree import (AnyTree, Edge, PlaneTree, TreeError, build_dual_tree,
                   norm, validate_tree)

log = logging.getLogger(__name__)

# assertion-heavy internal checks are skipped above this size
CHECK_LIMIT = 128


class TransformError(RuntimeError):
    """A construction step failed a guarantee it relies on."""


class BoundExceeded(TransformError):
    pass


def ceil_log2(n: int) -> int:
    return max(0, (n - 1).bit_length())


def star(ps: PointSet, p: int) -> PlaneTree:
    return PlaneTree(ps, frozenset(norm((p, v)) for v in range(ps.n) if v != p))


def is_star(t: AnyTree, p: int) -> bool:
    return t.unlabeled.degree(p) == t.n - 1


def _require_extreme(ps: PointSet, p: int) -> None:
    if not 0 <= p < ps.n:
        raise ValueError(f"no point {p}")
    if ps.n > 2 and p not in ps.hull_order:
        raise ValueError(f"point {p} is not extreme")


def _require_convex(ps: PointSet) -> None:
    if ps.position is not Position.CONVEX:
        raise ValueError("point set is not in convex position")


def finish(initial: AnyTree, steps: list, bound: int, tag: str,
           target: AnyTree | None = None) -> Trace:
    """Wrap steps in a trace and replay it; any failure raises."""
    tr = Trace(initial, list(steps), bound, tag)
    v = verify_trace(tr, target)
    if not v:
        cls = BoundExceeded if "exceed" in v.reason else TransformError
        raise cls(f"{tag}: step {v.index}: {v.reason}")
    return tr


def reverse_steps(steps: list) -> list:
    """Steps that undo ``steps`` in reverse order."""
    out = []
    for s in reversed(steps):
        if isinstance(s, Move):
            out.append(Move(s.inserted, s.removed, s.kind))
        else:
            out.append(SimMove(tuple((b, a) for a, b in s.pairs), s.kind,
                               s.restricted))
    return out


def parents(t: AnyTree, root: int) -> list[int | None]:
    """Parent of every vertex when the tree hangs from ``root``."""
    adj = t.unlabeled.adjacency
    par: list[int | None] = [None] * t.n
    seen = [False] * t.n
    seen[root] = True
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                par[w] = v
                queue.append(w)
    return par


# ------------------------------------------------------------ rotations

def star_by_rotations(t: AnyTree, p: int) -> Trace:
    """Rotate edges onto p one at a time; deg(p) grows with every step.

    A vertex u that sees p and is not yet adjacent to it is joined to p by
    rotating the first edge of its path to p around u.
    """
    ps = t.ps
    _require_extreme(ps, p)
    cur = t.unlabeled
    pts = ps.points
    P = pts[p]
    steps: list[Move] = []
    while cur.degree(p) < cur.n - 1:
        par = parents(cur, p)
        near = set(cur.adjacency[p])
        cands = sorted((v for v in range(cur.n) if v != p and v not in near),
                       key=lambda v: ((pts[v].x - P.x) ** 2
                                      + (pts[v].y - P.y) ** 2, v))
        for u in cands:
            e = norm((u, par[u]))
            f = norm((p, u))
            sf = ps.segment(f)
            if not any(g != e and proper_cross(sf, ps.segment(g))
                       for g in cur.edges):
                break
        else:
            raise TransformError("no degree-increasing rotation exists")
        steps.append(Move(e, f, Kind.ROTATION))
        cur = cur.replace(e, f)
    return finish(t.unlabeled, steps, max(0, t.n - 2), "star_by_rotations",
                  star(ps, p))


# ------------------------------------------------------------- starify

@dataclass
class StarifyState:
    """Combinatorics of one starify step around the extreme point ``root``.

    Points other than the root are ranked by angle around it; in the frame
    where the root sits at y = -inf this is the left-to-right order and the
    segment from s to the root is the downward ray from s.
    """

    tree: PlaneTree
    root: int
    order: tuple[int, ...]
    rank: dict[int, int]
    out: dict[int, Edge]
    hit: dict[int, Edge]
    groups: dict[Edge, tuple[int, ...]]
    chains: dict[Edge, tuple[int, ...]]
    cut: dict[Edge, Edge]
    target: dict[int, Edge]
    reaches: frozenset[int] = field(default_factory=frozenset)

    def width(self, e: Edge) -> int:
        """Points in the left-closed right-open slab spanned by e."""
        if self.root in e:
            return 0
        return abs(self.rank[e[0]] - self.rank[e[1]])

    def left(self, e: Edge) -> tuple[int, int]:
        a, b = e
        return (a, b) if self.rank[a] < self.rank[b] else (b, a)

    @cached_property
    def result(self) -> PlaneTree:
        return PlaneTree(self.tree.ps, frozenset(self.target.values()))

    def below(self, e: Edge, f: Edge) -> bool | None:
        """True when e lies below f over their common slab, None when the
        open slabs are disjoint."""
        ps = self.tree.ps
        ea, eb = self.left(e)
        fa, fb = self.left(f)
        lo = max(self.rank[ea], self.rank[fa])
        hi = min(self.rank[eb], self.rank[fb])
        if lo >= hi:
            return None
        # an endpoint of one edge lies strictly inside the other's slab
        for s, other, mine in ((ea, f, e), (eb, f, e), (fa, e, f),
                               (fb, e, f)):
            oa, ob = self.left(other)
            if self.rank[oa] < self.rank[s] < self.rank[ob]:
                # other is lower iff it meets the segment from s to the root
                lower_is_other = _ray_param(ps, self.root, s, other)[0] > 0
                return lower_is_other if mine == f else not lower_is_other
        return None

    def below_order(self) -> list[Edge]:
        """Linear extension of the below-relation on edges not touching the
        root; the lowest available edge (then the smallest pair) first."""
        es = sorted(e for e in self.tree.edges if self.root not in e)
        succ: dict[Edge, list[Edge]] = {e: [] for e in es}
        indeg = {e: 0 for e in es}
        for e, f in combinations(es, 2):
            b = self.below(e, f)
            if b is None:
                continue
            lo, hi = (e, f) if b else (f, e)
            succ[lo].append(hi)
            indeg[hi] += 1
        ready = [e for e in es if indeg[e] == 0]
        heapq.heapify(ready)
        out = []
        while ready:
            e = heapq.heappop(ready)
            out.append(e)
            for f in succ[e]:
                indeg[f] -= 1
                if indeg[f] == 0:
                    heapq.heappush(ready, f)
        if len(out) != len(es):
            raise TransformError("below-relation has a cycle")
        return out


def _ray_param(ps: PointSet, p: int, s: int, e: Edge) -> tuple[int, int]:
    """Where the segment from s towards p meets the line of e, as a
    fraction (num, den) with den > 0 of the way from s to p."""
    S, P, A, B = ps[s], ps[p], ps[e[0]], ps[e[1]]
    bx, by = B.x - A.x, B.y - A.y
    num = (A.x - S.x) * by - (A.y - S.y) * bx
    den = (P.x - S.x) * by - (P.y - S.y) * bx
    if den < 0:
        num, den = -num, -den
    return num, den


def angular_order(ps: PointSet, p: int) -> list[int]:
    P = ps[p]

    def cmp(a: int, b: int) -> int:
        d = _det(P, ps[a], ps[b])
        return -1 if d > 0 else (1 if d < 0 else 0)

    return sorted((v for v in range(ps.n) if v != p), key=cmp_to_key(cmp))


def starify_state(t: AnyTree, p: int) -> StarifyState:
    base = t.unlabeled
    ps = base.ps
    _require_extreme(ps, p)
    order = angular_order(ps, p)
    rank = {v: i for i, v in enumerate(order)}
    par = parents(base, p)
    out = {s: norm((s, par[s])) for s in range(ps.n) if s != p}
    best: dict[int, tuple[tuple[int, int], Edge]] = {}
    for e in base.sorted_edges:
        if p in e:
            continue
        lo, hi = sorted((rank[e[0]], rank[e[1]]))
        for s in order[lo + 1:hi]:
            num, den = _ray_param(ps, p, s, e)
            if num <= 0:
                continue
            cur = best.get(s)
            if cur is None or num * cur[0][1] < cur[0][0] * den:
                best[s] = ((num, den), e)
    hit = {s: e for s, (_, e) in best.items()}
    groups: dict[Edge, list[int]] = {}
    for s, e in hit.items():
        groups.setdefault(e, []).append(s)
    target: dict[int, Edge] = {}
    reaches = frozenset(s for s in order if s not in hit)
    for s in reaches:
        target[s] = norm((s, p))
    chains: dict[Edge, tuple[int, ...]] = {}
    cut: dict[Edge, Edge] = {}
    for e, members in groups.items():
        members.sort(key=rank.__getitem__)
        u, v = (e[0], e[1]) if rank[e[0]] < rank[e[1]] else (e[1], e[0])
        chain = (u, *members, v)
        widths = [abs(rank[chain[i]] - rank[chain[i + 1]])
                  for i in range(len(chain) - 1)]
        i = widths.index(max(widths))   # leftmost on ties
        for j in range(1, i + 1):
            target[chain[j]] = norm((chain[j], chain[j - 1]))
        for j in range(i + 1, len(chain) - 1):
            target[chain[j]] = norm((chain[j], chain[j + 1]))
        chains[e] = chain
        cut[e] = norm((chain[i], chain[i + 1]))
    return StarifyState(base, p, tuple(order), rank, out, hit,
                        {e: tuple(m) for e, m in groups.items()}, chains,
                        cut, target, reaches)


def _check_polygons(st: StarifyState) -> None:
    """No input edge meets the interior of any polygon P_e."""
    from .geom import segment_meets_open_triangle
    ps = st.tree.ps
    for e, chain in st.chains.items():
        tris, diags = triangulate_chain(ps, st.root, chain)
        for f in st.tree.edges:
            if f in diags:
                raise TransformError(f"edge {f} is a diagonal of P_{e}")
            a, b = ps.segment(f)
            for tri in tris:
                if f[0] in tri and f[1] in tri:
                    continue
                if segment_meets_open_triangle(*(ps[i] for i in tri), a, b):
                    raise TransformError(f"edge {f} enters P_{e}")


def _check_widths(st: StarifyState) -> None:
    for e, members in st.groups.items():
        we = st.width(e)
        for s in members:
            f = st.target[s]
            if st.root not in f and we < 2 * st.width(f):
                raise TransformError(
                    f"width({e})={we} < 2*width({f})={2 * st.width(f)}")
        assert we <= st.tree.n - 2


def _sim(old: PlaneTree, new: PlaneTree, kind: Kind) -> SimMove:
    a = sorted(old.edges - new.edges)
    b = sorted(new.edges - old.edges)
    return SimMove(tuple(zip(a, b)), kind)


def starify_step(t: AnyTree, p: int, check: bool | None = None
                 ) -> tuple[PlaneTree, SimMove]:
    """One simultaneous compatible exchange that halves every edge width."""
    st = starify_state(t, p)
    if check is None:
        check = t.n <= CHECK_LIMIT
    _check_widths(st)
    if check:
        _check_polygons(st)
    new = st.result
    sim = _sim(st.tree, new, Kind.COMPATIBLE)
    if sim.pairs and not sim_move_valid(st.tree, sim):
        raise TransformError("starify output is not a compatible exchange")
    return new, sim


def star_by_sim_compatible(t: AnyTree, p: int) -> Trace:
    """Iterate starify; at most ceil(log2 n) simultaneous exchanges."""
    cur = t.unlabeled
    steps = []
    while not is_star(cur, p):
        cur, sim = starify_step(cur, p)
        steps.append(sim)
        if len(steps) > ceil_log2(t.n):
            break
    return finish(t.unlabeled, steps, ceil_log2(t.n), "star_by_sim_compatible",
                  star(t.ps, p))


# ----------------------------------------- starify by four sim rotations

def triangulate_chain(ps: PointSet, p: int, chain: tuple[int, ...]
                      ) -> tuple[list[tuple[int, int, int]], set[Edge]]:
    """Triangulate the polygon bounded by ``chain`` (angularly sorted about
    p, every interior vertex beyond the segment chain[0]chain[-1] as seen
    from p).  Returns the triangles and the diagonals."""
    P = ps[p]
    stack = [chain[0]]
    tris = []
    for w in chain[1:]:
        W = ps[w]
        while len(stack) >= 2:
            a, b = ps[stack[-2]], ps[stack[-1]]
            # stack top is a convex corner iff it lies on the far side of
            # the chord from p
            if _det(a, W, b) * _det(a, W, P) >= 0:
                break
            tris.append((stack[-2], stack[-1], w))
            stack.pop()
        stack.append(w)
    if stack != [chain[0], chain[-1]]:
        raise TransformError(f"chain {chain} is not monotone about {p}")
    boundary = {norm((chain[i], chain[i + 1])) for i in range(len(chain) - 1)}
    boundary.add(norm((chain[0], chain[-1])))
    diags = {norm(x) for tri in tris for x in combinations(tri, 2)} - boundary
    return tris, diags


@dataclass
class _Poly:
    edge: Edge
    members: tuple[int, ...]
    tris: list[tuple[int, int, int]]
    diags: set[Edge]
    own: dict[int, tuple[int, int, int]]
    peaks: frozenset[int]

    def A(self, s: int) -> list[Edge]:
        return sorted(norm((s, x)) for x in self.own[s] if x != s)

    def b(self, s: int) -> Edge:
        return norm(tuple(x for x in self.own[s] if x != s))


def _poly(ps: PointSet, st: StarifyState, e: Edge) -> _Poly:
    chain = st.chains[e]
    tris, diags = triangulate_chain(ps, st.root, chain)
    u, v = chain[0], chain[-1]
    by_edge: dict[Edge, list[int]] = {}
    for i, tri in enumerate(tris):
        for x in combinations(tri, 2):
            by_edge.setdefault(norm(x), []).append(i)
    first = by_edge[norm((u, v))][0]
    own: dict[int, tuple[int, int, int]] = {}
    seen = {first}
    queue = deque([(first, {u, v})])
    while queue:
        i, known = queue.popleft()
        tri = tris[i]
        (s,) = set(tri) - known
        own[s] = tri
        for x in combinations(tri, 2):
            for j in by_edge[norm(x)]:
                if j not in seen:
                    seen.add(j)
                    queue.append((j, set(x)))
    count: dict[int, int] = {}
    for tri in tris:
        for x in tri:
            count[x] = count.get(x, 0) + 1
    members = chain[1:-1]
    assert set(own) == set(members)
    peaks = frozenset(s for s in members if count[s] == 1)
    return _Poly(e, members, tris, diags, own, peaks)


def starify_as_sim_rotations(t: AnyTree, p: int, check: bool | None = None
                             ) -> list[SimMove]:
    """The starify step as at most four simultaneous rotations.

    1. vertices that see p rotate onto p; in every polygon, a peak whose
       two triangle edges both point at it frees one of them by rotating
       its neighbour's edge onto the opposite side;
    2. every polygon vertex rotates into its own triangle (a diagonal for
       non-peaks, a free side for peaks);
    3. peaks rotate to their final edge;
    4. the remaining vertices rotate to their final edge.
    """
    base = t.unlabeled
    ps = base.ps
    if check is None:
        check = t.n <= CHECK_LIMIT
    st = starify_state(base, p)
    _check_widths(st)
    if check:
        _check_polygons(st)
    polys = [_poly(ps, st, e) for e in sorted(st.chains)]
    out = dict(st.out)
    cur = base
    moves: list[SimMove] = []

    def commit(change: dict[int, Edge]) -> None:
        nonlocal cur
        pairs = [(out[s], f) for s, f in sorted(change.items())
                 if out[s] != f]
        if not pairs:
            return
        sim = SimMove(tuple(pairs), Kind.ROTATION)
        if check and not sim_move_valid(cur, sim):
            raise TransformError(f"simulation step {len(moves) + 1} invalid: "
                                 f"{sim.pairs}")
        cur = apply_sim(cur, sim)
        out.update(change)
        moves.append(sim)

    change = {s: norm((s, p)) for s in st.reaches}
    for poly in polys:
        for s in sorted(poly.peaks):
            a, b = (x for x in poly.own[s] if x != s)
            if out.get(a) == norm((a, s)) and out.get(b) == norm((b, s)):
                bs = poly.b(s)
                for x in (a, b):
                    if x in poly.own and bs in poly.A(x):
                        change[x] = bs
                        break
                else:
                    raise TransformError(f"peak {s} has no partner")
    commit(change)

    change = {}
    for poly in polys:
        for s in poly.members:
            A = poly.A(s)
            if s in poly.peaks:
                good = A
            else:
                good = [f for f in A if f in poly.diags]
            if out[s] in good:
                continue
            free = [f for f in good if f not in cur.edges]
            change[s] = (free or good)[0]
    commit(change)

    commit({s: st.target[s] for poly in polys for s in poly.peaks})
    commit({s: st.target[s] for poly in polys for s in poly.members
            if s not in poly.peaks})
    if cur.edges != st.result.edges:
        raise TransformError("simulated starify differs from starify")
    return moves


def star_by_sim_rotations(t: AnyTree, p: int) -> Trace:
    """At most 4*ceil(log2 n) simultaneous rotations to the star at p."""
    cur = t.unlabeled
    steps: list[SimMove] = []
    rounds = 0
    while not is_star(cur, p) and rounds <= ceil_log2(t.n):
        for sim in starify_as_sim_rotations(cur, p):
            cur = apply_sim(cur, sim)
            steps.append(sim)
        rounds += 1
    return finish(t.unlabeled, steps, 4 * ceil_log2(t.n),
                  "star_by_sim_rotations", star(t.ps, p))


# ---------------------------------------------- empty-triangle rotations

def _sub_triangulation(ps: PointSet, verts: list[int],
                       forced: set[Edge]) -> dict[int, set[int]]:
    """Greedy lexicographic triangulation of ``verts`` keeping ``forced``;
    returned as adjacency sets."""
    edges = set(forced)
    segs = [ps.segment(e) for e in edges]
    for e in combinations(sorted(verts), 2):
        if e in edges:
            continue
        s = ps.segment(e)
        if any(proper_cross(s, g) for g in segs):
            continue
        edges.add(e)
        segs.append(s)
    adj: dict[int, set[int]] = {v: set() for v in verts}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def _face_apex(ps: PointSet, adj: dict[int, set[int]], x: int, y: int,
               toward: int) -> int:
    """Third vertex of the triangulation face on edge xy on the side of
    point ``toward``."""
    X, Y, T = ps[x], ps[y], ps[toward]
    side = _det(X, Y, T)
    cand = [r for r in adj[x] if r != y and _det(X, Y, ps[r]) * side > 0]
    if not cand:
        raise TransformError(f"no face beside {(x, y)}")
    best = cand[0]
    for r in cand[1:]:
        # r comes first when sweeping from xy towards the chosen side
        if _det(X, ps[best], ps[r]) * side < 0:
            best = r
    if best not in adj[y]:
        raise TransformError(f"face beside {(x, y)} is not a triangle")
    return best


def _component(edges: set[Edge], start: int, skip: Edge) -> set[int]:
    adj: dict[int, list[int]] = {}
    for a, b in edges:
        if (a, b) == skip:
            continue
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


@dataclass
class _Wedge:
    """A subproblem: points of an angular range about p plus p itself,
    spanned by the tree edges among them."""

    members: list[int]
    edges: set[Edge]
    moves: list[Move] = field(default_factory=list)
    children: list["_Wedge"] = field(default_factory=list)


def _retract(ps: PointSet, p: int, w: _Wedge) -> None:
    """Clear the median ray of tree edges, then split into two wedges."""
    m = len(w.members)
    if m <= 1:
        return
    h = m // 2
    left, right = set(w.members[:h]), set(w.members[h:])
    P = ps[p]
    A, B = ps[w.members[h - 1]], ps[w.members[h]]
    d = (A.x + B.x - 2 * P.x, A.y + B.y - 2 * P.y)
    adj = None
    while True:
        best = None
        for e in sorted(w.edges):
            a, b = e
            if not ((a in left and b in right) or (a in right and b in left)):
                continue
            X, Y = ps[a], ps[b]
            ex, ey = Y.x - X.x, Y.y - X.y
            num = (X.x - P.x) * ey - (X.y - P.y) * ex
            den = d[0] * ey - d[1] * ex
            if den < 0:
                num, den = -num, -den
            if best is None or num * best[1] > best[0] * den:
                best = (num, den, e)
        if best is None:
            break
        if adj is None:
            adj = _sub_triangulation(ps, [p, *w.members], w.edges)
        x, y = best[2]
        r = _face_apex(ps, adj, x, y, p)
        side = _component(w.edges, x, (x, y))
        f = norm((r, y)) if r in side else norm((x, r))
        w.moves.append(Move((x, y), f, Kind.EMPTY_TRIANGLE))
        w.edges.discard((x, y))
        w.edges.add(f)
    for part in (w.members[:h], w.members[h:]):
        keep = set(part) | {p}
        w.children.append(_Wedge(part, {e for e in w.edges
                                        if e[0] in keep and e[1] in keep}))
    for c in w.children:
        _retract(ps, p, c)


def _wedge_tree(t: AnyTree, p: int) -> _Wedge:
    ps = t.ps
    _require_extreme(ps, p)
    root = _Wedge(angular_order(ps, p), set(t.unlabeled.edges))
    _retract(ps, p, root)
    return root


def star_by_empty_tri(t: AnyTree, p: int) -> Trace:
    """Empty-triangle rotations to the star at p, halving wedges about p."""
    root = _wedge_tree(t, p)
    steps: list[Move] = []

    def walk(w: _Wedge) -> None:
        steps.extend(w.moves)
        for c in w.children:
            walk(c)

    walk(root)
    n = t.n
    bound = math.floor(4 * n * math.log2(n)) if n > 1 else 0
    return finish(t.unlabeled, steps, bound, "star_by_empty_tri",
                  star(t.ps, p))


def star_by_sim_empty_tri(t: AnyTree, p: int) -> Trace:
    """Same recursion, sibling wedges working in parallel; fewer than 4n
    simultaneous empty-triangle rotations."""
    root = _wedge_tree(t, p)
    rounds: list[list[Move]] = []

    def walk(w: _Wedge, start: int) -> None:
        for i, mv in enumerate(w.moves):
            while len(rounds) <= start + i:
                rounds.append([])
            rounds[start + i].append(mv)
        for c in w.children:
            walk(c, start + len(w.moves))

    walk(root, 0)
    steps = [SimMove(tuple(m.pairs[0] for m in r), Kind.EMPTY_TRIANGLE)
             for r in rounds]
    return finish(t.unlabeled, steps, max(0, 4 * t.n - 1),
                  "star_by_sim_empty_tri", star(t.ps, p))


# ------------------------------------------------------ convex position

def hull_path(ps: PointSet, missing: Edge) -> PlaneTree:
    """All hull edges but ``missing``."""
    missing = norm(missing)
    if missing not in ps.hull_edges:
        raise ValueError(f"{missing} is not a hull edge")
    return PlaneTree(ps, ps.hull_edges - {missing})


def _lowest_absent_hull_edge(t: AnyTree) -> Edge:
    return min(t.ps.hull_edges - t.unlabeled.edges)


def _route_cell(b: tuple[int, ...], j: int) -> list[tuple[Edge, Edge]]:
    """Rotations carrying the cell edge (b[j], b[j+1]) onto the cell's
    hull edge (b[-1], b[0]); one step if they share a vertex, else two."""
    k = len(b)
    e = norm((b[j], b[j + 1]))
    h = norm((b[-1], b[0]))
    if j == 0 or j + 1 == k - 1:
        return [(e, h)]
    mid = norm((b[j], b[-1]))
    return [(e, mid), (mid, h)]


def convex_hull_path_by_sim_empty_tri(t: AnyTree, avoid: Edge | None = None
                                      ) -> Trace:
    """At most two simultaneous empty-triangle rotations to the hull path
    without ``avoid``: every cell hands its parent edge to its hull edge."""
    base = t.unlabeled
    ps = base.ps
    _require_convex(ps)
    if avoid is None:
        avoid = min(ps.hull_edges)
    avoid = norm(avoid)
    target = hull_path(ps, avoid)
    rounds: list[list[tuple[Edge, Edge]]] = [[], []]
    if base.edges != target.edges:
        if avoid in base.edges:
            # the cell bounded by ``avoid`` is the root
            owner = next(c for c in build_dual_tree(base).cells
                         if avoid in c.tree_edges)
            dual = build_dual_tree(base, owner.hull_edge)
            jobs = [(dual.cells[dual.root], avoid)]
        else:
            dual = build_dual_tree(base, avoid)
            jobs = []
        jobs += [(c, c.parent_edge) for c in dual.cells
                 if c.parent_edge is not None]
        for c, e in jobs:
            j = c.tree_edges.index(e)
            for r, pair in enumerate(_route_cell(c.boundary_vertices, j)):
                rounds[r].append(pair)
    steps = [SimMove(tuple(r), Kind.EMPTY_TRIANGLE) for r in rounds if r]
    return finish(base, steps, 2, "convex_hull_path_by_sim_empty_tri", target)


def convex_transform_by_sim_empty_tri(t1: AnyTree, t2: AnyTree) -> Trace:
    """Both trees to a common hull path; at most four steps in total."""
    avoid = min(t1.ps.hull_edges)
    a = convex_hull_path_by_sim_empty_tri(t1, avoid)
    b = convex_hull_path_by_sim_empty_tri(t2, avoid)
    return finish(t1.unlabeled, a.steps + reverse_steps(b.steps), 4,
                  "convex_transform_by_sim_empty_tri", t2.unlabeled)


def _path_slides(cycle: list[int], m1: Edge, m2: Edge) -> list[Move]:
    """Slides turning the path cycle - m1 into cycle - m2, where ``cycle``
    lists convex-position points in boundary order."""
    m1, m2 = norm(m1), norm(m2)
    if m1 == m2:
        return []
    n = len(cycle)
    # v_1 v_n = m2 (in the first path only); v_k v_{k+1} = m1
    i = cycle.index(m2[0])
    start = i + 1 if norm((cycle[i], cycle[(i + 1) % n])) == m2 else i
    v = [cycle[(start + s) % n] for s in range(n)]
    v = [None] + v        # 1-based
    k = next(s for s in range(1, n) if norm((v[s], v[s + 1])) == m1)
    out = []
    for s in range(2, k + 1):
        out.append(Move((v[s - 1], v[n]), (v[s], v[n]), Kind.SLIDE))
    for j in range(n - 1, k, -1):
        out.append(Move((v[k], v[j + 1]), (v[k], v[j]), Kind.SLIDE))
    return out


def _hull_missing(t: AnyTree) -> Edge:
    base = t.unlabeled
    miss = base.ps.hull_edges - base.edges
    if len(miss) != 1 or not base.edges <= base.ps.hull_edges:
        raise ValueError("tree is not a path of hull edges")
    return next(iter(miss))


def path_to_path_slides(p1: AnyTree, p2: AnyTree) -> Trace:
    """Exactly n-2 slides between distinct hull paths (0 if equal)."""
    ps = p1.ps
    _require_convex(ps)
    steps = _path_slides(list(ps.hull_order), _hull_missing(p1),
                         _hull_missing(p2))
    return finish(p1.unlabeled, steps, max(0, ps.n - 2),
                  "path_to_path_slides", p2.unlabeled)


def _merge_cells(t: PlaneTree, root_edge: Edge) -> list[Move]:
    """Slides merging every cell into the root cell (hull edge
    ``root_edge``); n - n_0 slides in total."""
    dual = build_dual_tree(t, root_edge)
    order = [dual.root]
    for c in order:
        order.extend(sorted(dual.children(c)))
    steps: list[Move] = []
    for i in order[1:]:
        c = dual.cells[i]
        steps.extend(_path_slides(list(c.boundary_vertices), c.hull_edge,
                                  c.parent_edge))
    return steps


def _away_from(t: PlaneTree, e: Edge) -> Move:
    """A slide moving the hull edge e of t to a chord of its cell."""
    other = min(t.ps.hull_edges - t.edges)
    dual = build_dual_tree(t, other)
    c = next(c for c in dual.cells if e in c.tree_edges)
    b = c.boundary_vertices
    j = c.tree_edges.index(e)
    if j + 2 < len(b):
        return Move(e, (b[j], b[j + 2]), Kind.SLIDE)
    return Move(e, (b[j - 1], b[j + 1]), Kind.SLIDE)


def slide_routes(t1: AnyTree, t2: AnyTree, meet_on_path: bool = False
                 ) -> tuple[list[Move], list[Move]]:
    """Slides carrying t1 and t2 to one common tree; at most 2n-5 in
    total.  That tree is a hull path avoiding the root cell's hull edge of
    t1, unless the trees already coincide and ``meet_on_path`` is off."""
    a, b = t1.unlabeled, t2.unlabeled
    _require_convex(a.ps)
    if a.edges == b.edges and (not meet_on_path
                               or a.edges <= a.ps.hull_edges):
        return [], []
    e0 = _lowest_absent_hull_edge(a)
    first = _merge_cells(a, e0)
    second: list[Move] = []
    cur = b
    if e0 in b.edges:
        mv = _away_from(b, e0)
        second.append(mv)
        cur = b.replace(mv.removed, mv.inserted)
    second.extend(_merge_cells(cur, e0))
    return first, second


def convex_transform_by_slides(t1: AnyTree, t2: AnyTree) -> Trace:
    """At most 2n-5 slides through the hull path that avoids the root
    cell's hull edge of t1."""
    first, second = slide_routes(t1, t2)
    n = t1.n
    return finish(t1.unlabeled, first + reverse_steps(second),
                  max(0, 2 * n - 5), "convex_transform_by_slides",
                  t2.unlabeled)


# ------------------------------------------------------ special pairs

def disjoint_compatible_pair(ps: PointSet) -> tuple[PlaneTree, PlaneTree]:
    """Two compatible trees sharing no edge (one edge if convex)."""
    n = ps.n
    if n < 2:
        raise ValueError("need at least two points")
    if n == 2:
        t = validate_tree(ps, [(0, 1)])
        return t, t
    hull = list(ps.hull_order)
    if ps.position is Position.CONVEX:
        path = [(hull[i], hull[i + 1]) for i in range(n - 1)]
        st = [(hull[0], v) for v in hull[1:]]
        return validate_tree(ps, path), validate_tree(ps, st)
    if ps.position is not Position.GENERAL:
        raise ValueError(f"point set is {ps.position.value}")
    v1 = min(set(range(n)) - set(hull))
    P = ps[v1]

    # exact radial order about the interior point: split by half-plane,
    # then compare by orientation
    def half(v: int) -> int:
        q = ps[v]
        dx, dy = q.x - P.x, q.y - P.y
        return 0 if dy > 0 or (dy == 0 and dx > 0) else 1

    def cmp(a: int, b: int) -> int:
        ha, hb = half(a), half(b)
        if ha != hb:
            return ha - hb
        d = _det(P, ps[a], ps[b])
        return -1 if d > 0 else 1

    rest = sorted((v for v in range(n) if v != v1), key=cmp_to_key(cmp))
    v = [None, v1, *rest]           # 1-based
    ta = [(v1, x) for x in rest if x != v[2]] + [(v[2], v[3])]
    cyc = [(v[i], v[i + 1]) for i in range(2, n)] + [(v[n], v[2])]
    tb = [e for e in cyc if norm(e) != norm((v[2], v[3]))] + [(v1, v[2])]
    return validate_tree(ps, ta), validate_tree(ps, tb)


def sim_rotation_lb_pair(ps: PointSet | None = None
                         ) -> tuple[PlaneTree, PlaneTree]:
    """A hexagon pair at simultaneous-rotation distance at least 3.

    Searched over the first tree containing the short diagonal from the
    first point to the fourth, lexicographically first witness kept."""
    from .geom import sim_rotation_lb
    from .graphx import bfs, build_transition_graph
    ps = ps or sim_rotation_lb()
    g = build_transition_graph(ps, Kind.ROTATION, simultaneous=True)
    ad = norm((0, 3))
    for i, key in enumerate(g.nodes):
        t1 = g.tree(i)
        if ad not in t1.edges:
            continue
        dist = bfs(g, i)
        far = [j for j, d in enumerate(dist) if d >= 3]
        if far:
            return t1, g.tree(far[0])
    raise TransformError("no pair at simultaneous-rotation distance 3")


# ------------------------------------- simultaneous slides, convex position

@dataclass
class _Cell:
    boundary: tuple[int, ...]          # global ids, hull edge (last, first)
    hull: Edge
    parent_edge: Edge | None
    parent: int | None
    children: list[int]

    @property
    def size(self) -> int:
        return len(self.boundary)

    def index(self, e: Edge) -> int:
        b = self.boundary
        return next(i for i in range(len(b) - 1)
                    if norm((b[i], b[i + 1])) == e)


def _cells(ps: PointSet, verts: list[int], edges: set[Edge],
           root_hull: Edge | None = None) -> tuple[list[_Cell], int]:
    """Cells of the subtree on ``verts`` (convex position) in global ids."""
    verts = sorted(verts)
    loc = {v: i for i, v in enumerate(verts)}
    sub = PointSet(tuple(ps[v] for v in verts), Position.CONVEX)
    t = PlaneTree(sub, frozenset(norm((loc[a], loc[b])) for a, b in edges))
    rc = None if root_hull is None else norm((loc[root_hull[0]],
                                              loc[root_hull[1]]))
    dual = build_dual_tree(t, rc)
    g = lambda e: None if e is None else norm((verts[e[0]], verts[e[1]]))
    cells = [_Cell(tuple(verts[v] for v in c.boundary_vertices),
                   g(c.hull_edge), g(c.parent_edge), dual.parent[i], [])
             for i, c in enumerate(dual.cells)]
    for i, c in enumerate(cells):
        if c.parent is not None:
            cells[c.parent].children.append(i)
    return cells, dual.root


def _sub_hull_edges(ps: PointSet, verts: list[int]) -> set[Edge]:
    """Hull edges of a subset of a convex set: cyclically consecutive
    survivors in hull order."""
    keep = set(verts)
    ring = [v for v in ps.hull_order if v in keep]
    if len(ring) < 2:
        return set()
    if len(ring) == 2:
        return {norm(tuple(ring))}
    return {norm((ring[i], ring[(i + 1) % len(ring)]))
            for i in range(len(ring))}


def _halve(path: list[int]) -> list[tuple[Edge, Edge]]:
    """Slide every other edge of a convex path along its predecessor."""
    return [((path[i + 1], path[i + 2]), (path[i], path[i + 2]))
            for i in range(0, len(path) - 2, 2)]


def _halving_round(cells: list[_Cell], root: int) -> list[tuple[Edge, Edge]]:
    pairs = []
    for i, c in enumerate(cells):
        b = list(c.boundary)
        if c.parent_edge is None:
            if len(b) > 3:
                pairs += _halve(b)
        else:
            j = c.index(c.parent_edge)
            pairs += _halve(b[:j + 1])
            pairs += _halve(b[j + 1:])
    return pairs


@dataclass
class SlideReport:
    """Step counts per phase of the simultaneous-slide star transform."""

    phase1: int = 0
    phase2: int = 0
    phase3: int = 0
    rounds: int = 0
    layers: list[list[int]] = field(default_factory=list)


class _Slider:
    """Applies rounds of simultaneous slides to the full tree."""

    def __init__(self, t: PlaneTree):
        self.ps = t.ps
        self.edges = set(t.edges)
        self.steps: list[SimMove] = []

    def run(self, pairs: list[tuple[Edge, Edge]]) -> int:
        pairs = [(norm(a), norm(b)) for a, b in pairs if norm(a) != norm(b)]
        if not pairs:
            return 0
        from .moves import triangle_of, triangles_share_more_than_a_point
        tris = [triangle_of(a, b) for a, b in pairs]
        restricted = not any(
            triangles_share_more_than_a_point(self.ps, x, y)
            for x, y in combinations(tris, 2))
        sim = SimMove(tuple(pairs), Kind.SLIDE, restricted)
        for a, b in pairs:
            self.edges.discard(a)
        for a, b in pairs:
            self.edges.add(b)
        self.steps.append(sim)
        return 1

    def run_sequences(self, seqs: list[list[Move]]) -> int:
        """Run independent slide sequences in lockstep."""
        used = 0
        for r in range(max((len(s) for s in seqs), default=0)):
            used += self.run([s[r].pairs[0] for s in seqs if r < len(s)])
        return used


def _shrink_cells(sl: _Slider, verts: list[int]) -> int:
    """Halve convex paths until every cell has at most six vertices."""
    used = 0
    while True:
        sub = {e for e in sl.edges if e[0] in verts and e[1] in verts}
        if len(verts) < 3:
            return used
        cells, root = _cells(sl.ps, verts, sub)
        if max(c.size for c in cells) <= 6:
            return used
        used += sl.run(_halving_round(cells, root))


def _merge_slide(c: _Cell, d: _Cell) -> tuple[Edge, Edge]:
    """Slide the edge shared with child triangle d onto the hull edge of
    triangle c."""
    uv = d.parent_edge
    return uv, c.hull


def _cleanup(sl: _Slider, verts: set[int], klass: set[Edge]) -> int:
    sub = {e for e in sl.edges if e[0] in verts and e[1] in verts}
    cells, root = _cells(sl.ps, sorted(verts), sub)
    pairs = []
    for c in cells:
        if c.hull in klass and len(c.children) == 1:
            d = cells[c.children[0]]
            if c.size + d.size - 2 <= 4:
                pairs.append(_merge_slide(c, d))
    return sl.run(pairs)


def _single_child_pairs(cells: list[_Cell], root: int) -> list[tuple[int, int]]:
    """Greedy maximum matching on the maximal paths of single-child cells
    (top-down along each path)."""
    single = {i for i, c in enumerate(cells) if len(c.children) == 1}
    pairs = []
    for i in sorted(single):
        par = cells[i].parent
        if par is not None and par in single:
            continue            # not the top of its path
        path = [i]
        while cells[path[-1]].children[0] in single:
            path.append(cells[path[-1]].children[0])
        pairs += [(path[k], path[k + 1]) for k in range(0, len(path) - 1, 2)]
    return pairs


def _good_leaf_merge(ps: PointSet, cells: list[_Cell], a: int, b: int
                     ) -> list[Move]:
    """Slides moving the edge between cells a and b (b the only child of a,
    with an only child of its own) onto a hull edge so that the merged
    cell's remaining hull edge has a good leaf."""
    ca, cb = cells[a], cells[b]
    cc = cells[cb.children[0]]
    shared = cb.parent_edge
    # boundary of the union, walked as a cycle
    ring = _union_ring(ca, cb)
    cuts = [e for e in (ca.parent_edge, cc.parent_edge) if e is not None]
    paths = _split_ring(ring, cuts)
    hulls = {ca.hull, cb.hull}

    def hull_in(path):
        es = {norm((path[i], path[i + 1])) for i in range(len(path) - 1)}
        return es & hulls

    both = [q for q in paths if hull_in(q) == hulls]
    if both:
        dest = ca.hull
    else:
        p1 = next(q for q in paths if hull_in(q) and len(q) >= 3)
        (dest,) = hulls - hull_in(p1)
    cell = ca if dest == ca.hull else cb
    return _path_slides(list(cell.boundary), cell.hull, shared)


def _union_ring(ca: _Cell, cb: _Cell) -> list[int]:
    """Boundary cycle of two cells glued along cb's parent edge."""
    x, y = cb.parent_edge
    ra, rb = list(ca.boundary), list(cb.boundary)

    # walk a from y around to x (avoiding the shared edge), then b back
    a_cyc = _cycle_from(ra, y, x)
    b_cyc = _cycle_from(rb, x, y)
    return a_cyc + b_cyc[1:-1]


def _cycle_from(r: list[int], s: int, t: int) -> list[int]:
    """The arc of cycle ``r`` from s to t that does not use edge st."""
    n = len(r)
    i = r.index(s)
    fwd = [r[(i + k) % n] for k in range(n)]
    if fwd[1] == t:
        fwd = [fwd[0]] + fwd[1:][::-1]
    return fwd[:fwd.index(t) + 1]


def _split_ring(ring: list[int], cuts: list[Edge]) -> list[list[int]]:
    """Paths of the cycle ``ring`` after deleting the ``cuts`` edges."""
    n = len(ring)
    cutset = set(cuts)
    idx = [i for i in range(n) if norm((ring[i], ring[(i + 1) % n])) in cutset]
    if not idx:
        return [ring + [ring[0]]]
    paths = []
    for k, i in enumerate(idx):
        j = idx[(k + 1) % len(idx)]
        start = (i + 1) % n
        length = (j - i) % n or n
        paths.append([ring[(start + s) % n] for s in range(length)])
    return paths


def _good_leaves(ps: PointSet, verts: set[int], edges: set[Edge],
                 p: int) -> list[int]:
    hull = _sub_hull_edges(ps, sorted(verts))
    deg: dict[int, list[Edge]] = {v: [] for v in verts}
    for e in edges:
        deg[e[0]].append(e)
        deg[e[1]].append(e)
    return sorted(v for v in verts if v != p and len(deg[v]) == 1
                  and deg[v][0] in hull)


def convex_star_by_sim_slides(t: AnyTree, p: int,
                              report: SlideReport | None = None) -> Trace:
    """O(log n) simultaneous slides to the star at p (convex position).

    Phase 1 halves convex cell paths until cells have at most six
    vertices.  Phase 2 repeatedly merges thin cells to expose good leaves
    and peels them off in layers.  Phase 3 re-inserts the layers onto p,
    two simultaneous slides per layer.
    """
    base = t.unlabeled
    ps = base.ps
    _require_convex(ps)
    _require_extreme(ps, p)
    n = ps.n
    rep = report if report is not None else SlideReport()
    if is_star(base, p):
        return finish(base, [], math.floor(120 * (math.log2(n) + 1)),
                      "convex_star_by_sim_slides", base)
    sl = _Slider(base)
    verts = set(range(n))

    if n >= 3:
        rep.phase1 = _shrink_cells(sl, sorted(verts))
        cells, _ = _cells(ps, sorted(verts), sl.edges)
        assert max(c.size for c in cells) <= 6
        assert len(cells) >= (n - 2) / 4, "too few cells after phase 1"

    layers: list[list[tuple[int, Edge]]] = []
    while len(verts) > 1:
        m = len(verts)
        sub = lambda: {e for e in sl.edges
                       if e[0] in verts and e[1] in verts}
        if m >= 3:
            rep.phase2 += _shrink_cells(sl, sorted(verts))
            cells, root = _cells(ps, sorted(verts), sub())
            depth = {root: 0}
            for i in _bfs_cells(cells, root):
                if cells[i].parent is not None:
                    depth[i] = depth[cells[i].parent] + 1
            c0 = {c.hull for i, c in enumerate(cells)
                  if len(c.children) == 1 and depth[i] % 2 == 0}
            c1 = {c.hull for i, c in enumerate(cells)
                  if len(c.children) == 1 and depth[i] % 2 == 1}
            rep.phase2 += _cleanup(sl, verts, c0)
            rep.phase2 += _cleanup(sl, verts, c1)
            cells, root = _cells(ps, sorted(verts), sub())
            seqs = [_good_leaf_merge(ps, cells, a, b)
                    for a, b in _single_child_pairs(cells, root)]
            rep.phase2 += sl.run_sequences(seqs)
        leaves = _good_leaves(ps, verts, sub(), p)
        assert len(leaves) >= (m - 2) / 24, (
            f"{len(leaves)} good leaves among {m} vertices")
        if not leaves:
            raise TransformError(f"no good leaf among {m} vertices")
        cur = sub()
        layers.append([(x, next(e for e in cur if x in e)) for x in leaves])
        verts -= set(leaves)
        rep.rounds += 1

    for layer in reversed(layers):
        # attach each leaf of this layer to p through its neighbour
        nb = {}
        for x, e in layer:
            y = e[0] if e[1] == x else e[1]
            if y != p:
                nb.setdefault(y, []).append((e, norm((x, p))))
        for r in range(2):
            rep.phase3 += sl.run([v[r] for y, v in sorted(nb.items())
                                  if len(v) > r])
    rep.layers = [[x for x, _ in layer] for layer in layers]
    steps = sl.steps
    bound = math.floor(120 * (math.log2(n) + 1)) if n > 1 else 0
    return finish(base, steps, bound, "convex_star_by_sim_slides",
                  star(ps, p))


def _bfs_cells(cells: list[_Cell], root: int) -> list[int]:
    order = [root]
    for i in order:
        order.extend(cells[i].children)
    return order
