"""Edge-labelled transformations.

Unlabelled routes from :mod:`treemorph.xform` carry both trees to a common
shape; the labels are then permuted on that shape with small swap gadgets.
Every public function returns a replay-verified :class:`Trace` whose final
tree equals the second input, labels included.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import permutations

from .geom import PointSet, Position, _det
from .moves import (Kind, Move, SimMove, _max_matching, _union_noncrossing,
                    triangle_interiors_overlap)
from .trace import Trace
from .tree import (AnyTree, Edge, LabeledPlaneTree, PlaneTree,
                   canonical_key, norm, validate_tree)
from .xform import (TransformError, angular_order, ceil_log2,
                    convex_hull_path_by_sim_empty_tri,
                    convex_star_by_sim_slides, convex_transform_by_slides,
                    disjoint_compatible_pair, finish, hull_path,
                    reverse_steps, slide_routes, star, star_by_rotations,
                    star_by_sim_compatible, star_by_sim_empty_tri)

log = logging.getLogger(__name__)

C_SIM = 120


class GadgetError(ValueError):
    """The edges handed to a swap gadget do not meet its geometry."""


# ------------------------------------------------------------ helpers

def _labeled(t: AnyTree) -> LabeledPlaneTree:
    if not isinstance(t, LabeledPlaneTree):
        raise TypeError("a labelled tree is required")
    return t


def _replay(t: LabeledPlaneTree, steps: list) -> LabeledPlaneTree:
    return Trace(t, list(steps)).final


def _same(t1: AnyTree, t2: AnyTree) -> bool:
    return canonical_key(t1) == canonical_key(t2)


def _extreme(ps: PointSet) -> int:
    return ps.hull_order[0]


def _swapped(t: LabeledPlaneTree, e: Edge, f: Edge) -> LabeledPlaneTree:
    lm = dict(t.label_map)
    lm[e], lm[f] = lm[f], lm[e]
    return LabeledPlaneTree.of(t.tree, lm)


@dataclass
class LabelPermutation:
    """Labels read along a fixed sequence of host edges."""

    positions: tuple[Edge, ...]
    labels: list[int]

    @classmethod
    def read(cls, t: LabeledPlaneTree, positions) -> "LabelPermutation":
        positions = tuple(norm(e) for e in positions)
        if set(positions) != set(t.edges):
            raise ValueError("positions must be exactly the tree edges")
        return cls(positions, [t.label(e) for e in positions])

    def swap(self, i: int, j: int) -> None:
        self.labels[i], self.labels[j] = self.labels[j], self.labels[i]

    def transpositions_to(self, target: "LabelPermutation"
                          ) -> list[tuple[int, int]]:
        """At most len-1 swaps that turn these labels into ``target``."""
        if sorted(self.labels) != sorted(target.labels):
            raise ValueError("label sets differ")
        cur = list(self.labels)
        where = {l: i for i, l in enumerate(cur)}
        out = []
        for i, want in enumerate(target.labels):
            j = where[want]
            if j != i:
                out.append((i, j))
                where[cur[i]], where[cur[j]] = j, i
                cur[i], cur[j] = cur[j], cur[i]
        return out


# ------------------------------------------------------------ gadgets

def _adjacent3(p: int, u: int, v: int, kind: Kind = Kind.SLIDE
               ) -> list[Move]:
    """Swap the labels of up and vp: up -> uv, vp -> up, uv -> vp."""
    return [Move((u, p), (u, v), kind), Move((v, p), (u, p), kind),
            Move((u, v), (v, p), kind)]


def _quad4(u: int, v: int, u2: int, v2: int) -> list[Move]:
    """Swap the labels of uv and u2v2, where the tree path between them
    runs from v to u2."""
    k = Kind.EMPTY_TRIANGLE
    return [Move((u, v), (u, u2), k), Move((u2, v2), (u, v2), k),
            Move((u, u2), (u2, v2), k), Move((u, v2), (u, v), k)]


def _path7(P: list[int], i: int, j: int) -> list[Move]:
    """Swap the labels of p_i p_(i+1) and p_j p_(j+1) on the radial path
    P = (p_1, ..., p_n); indices are 1-based with i < j."""
    p = lambda k: P[k - 1]
    r = Kind.ROTATION
    pre = []
    if i > 1:
        pre.append(Move((p(i), p(i + 1)), (p(1), p(i + 1)), r))
    if j > i + 1:
        pre.append(Move((p(1), p(i + 1)), (p(1), p(j)), r))
    mid = _adjacent3(p(j), p(1), p(j + 1), r)
    return pre + mid + reverse_steps(pre)


def _tree_path(t: PlaneTree, a: int, b: int) -> list[int]:
    par = {a: None}
    todo = [a]
    for x in todo:
        for y in t.adjacency[x]:
            if y not in par:
                par[y] = x
                todo.append(y)
    out = [b]
    while out[-1] != a:
        out.append(par[out[-1]])
    return out[::-1]


def _orient(t: PlaneTree, e: Edge, f: Edge) -> tuple[int, int, int, int]:
    """(u, v, u2, v2) with e = uv, f = u2v2 and the tree path from e to f
    leaving e at v and entering f at u2 (v == u2 if they touch)."""
    best = None
    for v in e:
        for u2 in f:
            path = _tree_path(t, v, u2)
            if all(x not in path[1:] for x in e if x != v) and \
                    all(x not in path[:-1] for x in f if x != u2):
                best = (v, u2)
    if best is None:
        raise GadgetError("edges are not joined by a tree path")
    v, u2 = best
    u = e[0] if e[1] == v else e[1]
    v2 = f[0] if f[1] == u2 else f[1]
    return u, v, u2, v2


def _radial_path(t: PlaneTree, p: int | None) -> list[int]:
    """The vertex order of t if t is the radial path around an extreme
    point (p, or either end of the path)."""
    ps = t.ps
    ends = [v for v in range(t.n) if t.degree(v) == 1]
    for q in ([p] if p is not None else ends):
        if q not in ps.hull_order:
            continue
        P = [q, *angular_order(ps, q)]
        if t.edges == {norm((P[k], P[k + 1])) for k in range(len(P) - 1)}:
            return P
    raise GadgetError("tree is not a radial path around an extreme point")


def _check_consecutive(t: PlaneTree, p: int, u: int, v: int) -> None:
    ps = t.ps
    P, U, V = ps[p], ps[u], ps[v]
    s = _det(P, U, V)
    if s == 0:
        raise GadgetError("edges are collinear")
    for w in t.adjacency[p]:
        if w in (u, v):
            continue
        W = ps[w]
        if _det(P, U, W) * s > 0 and _det(P, W, V) * s > 0:
            raise GadgetError(f"edge {p}-{w} lies between the two edges")


def swap_gadget(t: LabeledPlaneTree, kind: str, edges: tuple[Edge, Edge],
                p: int | None = None) -> Trace:
    """Swap the labels of two edges and restore the edge set.

    ``adjacent3slides``: e = up and f = vp consecutive around p, 3 slides.
    ``quad4rotations``: two hull edges, at most 4 empty-triangle rotations.
    ``path7rotations``: two edges of the radial path around an extreme
    point, at most 7 rotations.
    """
    t = _labeled(t)
    base = t.tree
    e, f = norm(edges[0]), norm(edges[1])
    if e == f or e not in base.edges or f not in base.edges:
        raise GadgetError("need two distinct tree edges")
    target = _swapped(t, e, f)
    if kind == "adjacent3slides":
        (c,) = set(e) & set(f) or (None,)
        if c is None:
            raise GadgetError("edges do not share a vertex")
        u = e[0] if e[1] == c else e[1]
        v = f[0] if f[1] == c else f[1]
        _check_consecutive(base, c, u, v)
        steps, bound = _adjacent3(c, u, v), 3
    elif kind == "quad4rotations":
        if not {e, f} <= t.ps.hull_edges:
            raise GadgetError("both edges must be hull edges")
        u, v, u2, v2 = _orient(base, e, f)
        if v == u2:
            steps = _adjacent3(v, u, v2)
        else:
            steps = _quad4(u, v, u2, v2)
        bound = 4
    elif kind == "path7rotations":
        P = _radial_path(base, p)
        pos = {norm((P[k], P[k + 1])): k + 1 for k in range(len(P) - 1)}
        i, j = sorted((pos[e], pos[f]))
        steps, bound = _path7(P, i, j), 7
    else:
        raise ValueError(f"unknown gadget {kind!r}")
    try:
        return finish(t, steps, bound, f"swap_gadget:{kind}", target)
    except TransformError as exc:
        raise GadgetError(str(exc)) from exc


# ------------------------------------------------------------ rotations

def _star_to_radial_path(P: list[int]) -> list[Move]:
    p = P[0]
    return [Move((p, P[k]), (P[k - 1], P[k]), Kind.ROTATION)
            for k in range(2, len(P))]


def labeled_transform_rotations(t1: LabeledPlaneTree, t2: LabeledPlaneTree
                                ) -> Trace:
    """At most 11(n-2) rotations through the radial path around an extreme
    point, transposing labels with the seven-rotation gadget."""
    t1, t2 = _labeled(t1), _labeled(t2)
    ps = t1.ps
    n = ps.n
    bound = max(0, 11 * (n - 2))
    if _same(t1, t2):
        return finish(t1, [], bound, "labeled_transform_rotations", t2)
    p = _extreme(ps)
    P = [p, *angular_order(ps, p)]
    path = {norm((P[k], P[k + 1])) for k in range(n - 1)}

    def to_path(t: LabeledPlaneTree) -> list:
        if t.edges == path:
            return []
        return star_by_rotations(t, p).steps + _star_to_radial_path(P)

    a, b = to_path(t1), to_path(t2)
    positions = [(P[k], P[k + 1]) for k in range(n - 1)]
    cur = LabelPermutation.read(_replay(t1, a), positions)
    want = LabelPermutation.read(_replay(t2, b), positions)
    swaps: list[Move] = []
    for i, j in cur.transpositions_to(want):
        i, j = sorted((i, j))
        swaps += _path7(P, i + 1, j + 1)
    return finish(t1, a + swaps + reverse_steps(b), bound,
                  "labeled_transform_rotations", t2)


# ------------------------------------------- simultaneous exchanges

Allowed = dict[Edge, set[int]]


def _allowed(t: LabeledPlaneTree, T: PlaneTree,
             via: PlaneTree | None = None) -> Allowed:
    """Labels each edge of T can carry after routing t to T by one
    simultaneous exchange, or by two through ``via``."""
    lm, E = t.label_map, t.edges
    if via is None:
        free = {lm[e] for e in E - T.edges}
        return {e: ({lm[e]} if e in E else set(free)) for e in T.edges}
    V = via.edges
    s1 = {lm[e] for e in E - V}
    s2 = s1 | {lm[e] for e in (E & V) - T.edges}
    return {e: (({lm[e]} if e in E else set(s1)) if e in V else set(s2))
            for e in T.edges}


def _complete(side: Allowed, edges: list[Edge], labels: list[int]
              ) -> dict[Edge, int] | None:
    return _max_matching(edges, labels, lambda e, l: l in side[e])


def _joint_labels(A: Allowed, B: Allowed, budget: int = 10_000
                  ) -> tuple[dict[Edge, int], dict[Edge, int]] | None:
    """Labelings of both trees within the allowed sets that agree on
    shared edges."""
    labels = set().union(*A.values(), *B.values())
    common = sorted(set(A) & set(B), key=lambda e: (len(A[e] & B[e]), e))
    a_only = sorted(set(A) - set(B))
    b_only = sorted(set(B) - set(A))
    chosen: dict[Edge, int] = {}
    nodes = 0

    def rec(k: int):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            return None
        if k == len(common):
            rest = sorted(labels - set(chosen.values()))
            ma = _complete(A, a_only, rest)
            mb = _complete(B, b_only, rest)
            if ma is None or mb is None:
                return None
            return {**chosen, **ma}, {**chosen, **mb}
        e = common[k]
        used = set(chosen.values())
        for l in sorted((A[e] & B[e]) - used):
            chosen[e] = l
            got = rec(k + 1)
            if got:
                return got
            del chosen[e]
        return None

    return rec(0)


def _relabel_step(t: LabeledPlaneTree, T: PlaneTree, sigma: dict[Edge, int],
                  kind: Kind) -> SimMove | None:
    inv = t.edge_of_label
    for e in T.edges & t.edges:
        assert sigma[e] == t.label(e), "fixed edge would change label"
    pairs = tuple((inv[sigma[f]], f) for f in sorted(T.edges - t.edges))
    return SimMove(pairs, kind) if pairs else None


def _route(t: LabeledPlaneTree, T: PlaneTree, via: PlaneTree | None,
           sigma: dict[Edge, int], kind: Kind) -> list[SimMove]:
    stages = [T] if via is None else [via, T]
    out = []
    cur = t
    for k, S in enumerate(stages):
        if k + 1 < len(stages):
            # first of two stages: pin the labels the second stage keeps
            lm = cur.label_map
            s1 = sorted(lm[e] for e in cur.edges - S.edges)
            sig = {}
            for e in S.edges:
                if e in cur.edges:
                    sig[e] = lm[e]
                elif e in T.edges:
                    sig[e] = sigma[e]
            left = iter(sorted(set(s1) - set(sig.values())))
            for e in sorted(S.edges - set(sig)):
                sig[e] = next(left)
        else:
            sig = sigma
        step = _relabel_step(cur, S, sig, kind)
        if step is not None:
            out.append(step)
            cur = _replay(cur, [step])
    return out


def _bridge(t1: LabeledPlaneTree, t2: LabeledPlaneTree, TA: PlaneTree,
            TB: PlaneTree, via1: PlaneTree | None, via2: PlaneTree | None,
            kind: Kind) -> list[SimMove] | None:
    """t1 -> TA -> TB <- t2 with labels that agree across the middle."""
    got = _joint_labels(_allowed(t1, TA, via1), _allowed(t2, TB, via2))
    if got is None:
        return None
    sa, sb = got
    a = _route(t1, TA, via1, sa, kind)
    b = _route(t2, TB, via2, sb, kind)
    la = _replay(t1, a)
    mid = _relabel_step(la, TB, sb, kind)
    return a + ([mid] if mid else []) + reverse_steps(b)


def _sim_exchange_bfs(t1: LabeledPlaneTree, t2: LabeledPlaneTree,
                      kind: Kind, depth: int) -> list[SimMove] | None:
    """Shortest simultaneous-exchange sequence by brute force (tiny n)."""
    from collections import deque
    from .graphx import enumerate_trees, mask_to_tree
    ps = t1.ps
    shapes = [mask_to_tree(ps, m) for m in enumerate_trees(ps)] \
        if ps.n > 1 else [t1.tree]
    start, goal = canonical_key(t1), canonical_key(t2)
    prev = {start: None}
    q = deque([(t1, 0)])
    while q:
        cur, d = q.popleft()
        if canonical_key(cur) == goal:
            out = []
            k = goal
            while prev[k] is not None:
                k, step = prev[k]
                out.append(step)
            return out[::-1]
        if d == depth:
            continue
        for S in shapes:
            gone = sorted(cur.edges - S.edges)
            new = sorted(S.edges - cur.edges)
            if kind is Kind.COMPATIBLE and not _union_noncrossing(
                    ps, cur.edges, new):
                continue
            for perm in permutations(new):
                step = SimMove(tuple(zip(gone, perm)), kind)
                nxt = _replay(cur, [step]) if gone else cur
                k = canonical_key(nxt)
                if k not in prev:
                    prev[k] = (canonical_key(cur), step)
                    q.append((nxt, d + 1))
    return None


def _convex_candidates(t1: LabeledPlaneTree, t2: LabeledPlaneTree,
                       compatible: bool):
    """(TA, TB, via1, via2) in the order of the three-case argument, then
    every hull path / star combination as a fallback."""
    ps = t1.ps
    n = ps.n
    H = list(ps.hull_order)
    hull = ps.hull_edges

    def path_from(a: int, b: int) -> PlaneTree:
        """Hull path starting a, b, ... (misses a's other hull edge)."""
        i = H.index(a)
        other = H[(i - 1) % n] if H[(i + 1) % n] == b else H[(i + 1) % n]
        return hull_path(ps, (a, other))

    l1, l2 = t1.label_map, t2.label_map
    shared = [e for e in sorted(hull & t1.edges & t2.edges)
              if l1[e] == l2[e]]
    # case 1: a hull edge with the same label in both
    for u, v in shared:
        for a, b in ((u, v), (v, u)):
            TA = path_from(a, b)
            yield "shared", TA, star(ps, a), None, (TA if compatible else None)
    t1_path = t1.edges <= hull
    t2_path = t2.edges <= hull
    # case 2: both are hull paths
    if not shared and t1_path and t2_path:
        yield from _case2(t1, t2)
    # case 3: some interior edge
    if not shared:
        for first, second, flip in ((t1, t2, False), (t2, t1, True)):
            if first.edges <= hull:
                continue
            for a, b in sorted(hull - second.edges):
                for v1, v2 in ((a, b), (b, a)):
                    TA = path_from(v1, v2)
                    TB = star(ps, v1)
                    via = TA if compatible else None
                    yield ("interior", TB, TA, via, None) if flip else \
                        ("interior", TA, TB, None, via)
    # fallback
    paths = [hull_path(ps, h) for h in sorted(hull)]
    stars = [star(ps, v) for v in range(n)]
    for P in paths:
        for S in stars:
            for V in ([None] if not compatible else paths):
                yield "fallback", P, S, None, V
                yield "fallback", S, P, V, None


def _case2(t1: LabeledPlaneTree, t2: LabeledPlaneTree):
    ps = t1.ps
    n = ps.n
    deg = [v for v in range(n) if t1.tree.degree(v) == 1]
    for start in deg:
        seq = _tree_path(t1.tree, start, next(d for d in deg if d != start))
        v = [None, *seq]                        # 1-based
        ell = t1.label((v[1], v[2]))
        e = t2.edge_of_label[ell]
        pos = {norm((v[k], v[k + 1])): k for k in range(1, n)}
        i = pos.get(e)
        if i is None or not 2 <= i <= n - 1:
            continue
        TA = star(ps, v[1])
        es = set(TA.edges)
        es.add(norm((v[i], v[i + 1])))
        es.discard(norm((v[1], v[2])))
        if i > 2:
            es.discard(norm((v[1], v[i + 1])))
            es.add(norm((v[2], v[3])))
        yield "paths", TA, PlaneTree(ps, frozenset(es)), None, None


def labeled_sim_exchange_transform(t1: LabeledPlaneTree,
                                   t2: LabeledPlaneTree,
                                   compatible: bool = False) -> Trace:
    """Simultaneous (compatible) exchanges between labelled trees.

    Without an interior point the trees meet on a hull path and a star
    (three steps, four if every step must be compatible).  With one, they
    meet on an edge-disjoint compatible pair.
    """
    t1, t2 = _labeled(t1), _labeled(t2)
    ps = t1.ps
    n = ps.n
    kind = Kind.COMPATIBLE if compatible else Kind.EXCHANGE
    tag = "labeled_sim_exchange_transform"
    convex = ps.position is Position.CONVEX or n <= 3
    if convex:
        bound = 4 if compatible else 3
    else:
        bound = 3 if not compatible else max(3, 8 * ceil_log2(n))
    if _same(t1, t2):
        return finish(t1, [], bound, tag, t2)
    if n <= 3:
        # a label swap on a triangle needs all three steps
        steps = _sim_exchange_bfs(t1, t2, kind, 3)
        if steps is None:
            raise TransformError("no three-step route on three points")
        return finish(t1, steps, bound, tag, t2)
    if convex:
        for case, TA, TB, v1, v2 in _convex_candidates(t1, t2, compatible):
            steps = _bridge(t1, t2, TA, TB, v1, v2, kind)
            if steps is None:
                continue
            try:
                tr = finish(t1, steps, bound, tag, t2)
            except TransformError:
                continue
            log.debug("convex sim exchange: %s case", case)
            return tr
        raise TransformError("no hull-path/star bridge found")
    if ps.position is not Position.GENERAL:
        raise ValueError(f"point set is {ps.position.value}")
    TA, TB = disjoint_compatible_pair(ps)
    if not compatible:
        steps = _bridge(t1, t2, TA, TB, None, None, kind)
        assert steps is not None, "edge-disjoint bridge must exist"
        return finish(t1, steps, bound, tag, t2)
    # compatible routing through the star at an extreme point
    p = _extreme(ps)
    a = (star_by_sim_compatible(t1, p).steps
         + reverse_steps(star_by_sim_compatible(TA, p).steps))
    b = (star_by_sim_compatible(t2, p).steps
         + reverse_steps(star_by_sim_compatible(TB, p).steps))
    la, lb = _replay(t1, a), _replay(t2, b)
    mid = _relabel_step(la, TB, lb.label_map, Kind.COMPATIBLE)
    steps = a + ([mid] if mid else []) + reverse_steps(b)
    return finish(t1, steps, bound, tag, t2)


@dataclass
class SimExchangeCertificate:
    """Outcome of the exhaustive search for short simultaneous-exchange
    routes between two labelled trees."""

    distance_at_least: int
    intermediates_checked: int
    witness: LabeledPlaneTree | None = None


def _one_step(a: LabeledPlaneTree, b: LabeledPlaneTree) -> bool:
    return all(a.label(e) == b.label(e) for e in a.edges & b.edges)


def labeled_sim_lower_check(t1: LabeledPlaneTree, t2: LabeledPlaneTree
                            ) -> SimExchangeCertificate:
    """Certify that two stars with a common centre and no shared label are
    at least three simultaneous exchanges apart.

    Every unlabelled intermediate is tried; an intermediate must keep t1's
    labels on edges it shares with t1 and t2's on edges shared with t2.
    """
    from .graphx import enumerate_trees, mask_to_tree
    t1, t2 = _labeled(t1), _labeled(t2)
    ps = t1.ps
    n = ps.n
    if _same(t1, t2):
        return SimExchangeCertificate(0, 0)
    centres = [v for v in range(n) if t1.tree.degree(v) == n - 1
               and t2.tree.degree(v) == n - 1]
    if n < 3 or not centres:
        raise ValueError("inputs must be spanning stars with one centre")
    if any(t1.label(e) == t2.label(e) for e in t1.edges):
        raise ValueError("some edge keeps its label")
    if _one_step(t1, t2):
        return SimExchangeCertificate(1, 0, t1)
    l1, l2 = t1.label_map, t2.label_map
    checked = 0
    for m in enumerate_trees(ps):
        T = mask_to_tree(ps, m)
        checked += 1
        forced: dict[Edge, int] = {}
        ok = True
        for e in T.edges:
            want = {l1[e]} if e in l1 else set()
            if e in l2:
                want.add(l2[e])
            if len(want) > 1:
                ok = False
                break
            if want:
                forced[e] = want.pop()
        if not ok:
            continue
        movable = {l1[e] for e in t1.edges - T.edges}
        vals = list(forced.values())
        if len(set(vals)) != len(vals):
            continue
        if any(e not in l1 and l not in movable for e, l in forced.items()):
            continue
        rest = iter(sorted(movable - set(vals)))
        lab = {e: forced.get(e) or next(rest) for e in sorted(T.edges)}
        return SimExchangeCertificate(2, checked, LabeledPlaneTree.of(T, lab))
    return SimExchangeCertificate(3, checked)


# --------------------------------------------------- star label sorting

def _star_sort(ps: PointSet, p: int, cur: LabeledPlaneTree,
               want: LabeledPlaneTree) -> list[SimMove]:
    """Odd-even transposition sort of the labels around the star at p;
    each round is three simultaneous slides on triangles meeting at p."""
    order = angular_order(ps, p)
    m = len(order)
    pos = {want.label((p, x)): k for k, x in enumerate(order)}
    key = [pos[cur.label((p, x))] for x in order]
    steps: list[SimMove] = []
    for r in range(m):
        if key == sorted(key):
            break
        swaps = [k for k in range(r % 2, m - 1, 2) if key[k] > key[k + 1]]
        if not swaps:
            continue
        gadgets = [_adjacent3(p, order[k], order[k + 1]) for k in swaps]
        for s in range(3):
            steps.append(SimMove(tuple(g[s].pairs[0] for g in gadgets),
                                 Kind.SLIDE, True))
        for k in swaps:
            key[k], key[k + 1] = key[k + 1], key[k]
    assert key == sorted(key), "odd-even transposition sort did not finish"
    return steps


def labeled_sim_empty_tri_transform(t1: LabeledPlaneTree,
                                    t2: LabeledPlaneTree) -> Trace:
    """Both trees to the star at an extreme point by simultaneous
    empty-triangle rotations, then sort the labels around it."""
    t1, t2 = _labeled(t1), _labeled(t2)
    ps = t1.ps
    n = ps.n
    tag = "labeled_sim_empty_tri_transform"
    if _same(t1, t2) or n < 3:
        return finish(t1, [], 12 * n, tag, t2)
    p = _extreme(ps)
    a = star_by_sim_empty_tri(t1, p).steps
    b = star_by_sim_empty_tri(t2, p).steps
    mid = _star_sort(ps, p, _replay(t1, a), _replay(t2, b))
    return finish(t1, a + mid + reverse_steps(b), 12 * n, tag, t2)


# ---------------------------------------------------- convex position

def _path_order(t: PlaneTree) -> list[int]:
    ends = sorted(v for v in range(t.n) if t.degree(v) == 1)
    return _tree_path(t, ends[0], ends[1])


def _pair_gadget(seq: list[int], a: int, b: int) -> list[Move]:
    """Swap gadget for path positions a < b (edge k = seq[k] seq[k+1])."""
    if b == a + 1:
        return _adjacent3(seq[a + 1], seq[a], seq[a + 2])
    return _quad4(seq[a], seq[a + 1], seq[b], seq[b + 1])


def _hull_interiors_overlap(ps: PointSet, A: list[int], B: list[int]
                            ) -> bool:
    def tris(vs):
        vs = sorted(set(vs), key=ps.hull_order.index)
        return [(vs[0], vs[k], vs[k + 1]) for k in range(1, len(vs) - 1)]
    return any(triangle_interiors_overlap(ps, x, y)
               for x in tris(A) for y in tris(B))


def labeled_cx_empty_tri_transform(t1: LabeledPlaneTree,
                                   t2: LabeledPlaneTree,
                                   simultaneous: bool = False) -> Trace:
    """Labelled empty-triangle rotations in convex position.

    Both trees go to one hull path; its labels are then permuted with
    quadrilateral swaps, either one transposition at a time or in
    recursive halving waves of interior-disjoint swaps.
    """
    t1, t2 = _labeled(t1), _labeled(t2)
    ps = t1.ps
    if ps.position is not Position.CONVEX:
        raise ValueError("point set is not in convex position")
    n = ps.n
    if n < 3:
        raise ValueError("need at least three points")
    if simultaneous:
        bound = 8 + 4 * ceil_log2(n) * 4
        tag = "labeled_cx_empty_tri_transform:sim"
    else:
        bound = 6 * n - 13
        tag = "labeled_cx_empty_tri_transform"
    if _same(t1, t2):
        return finish(t1, [], bound, tag, t2)
    if simultaneous:
        avoid = min(ps.hull_edges)
        a = convex_hull_path_by_sim_empty_tri(t1, avoid).steps
        b = convex_hull_path_by_sim_empty_tri(t2, avoid).steps
    else:
        a, b = slide_routes(t1, t2, meet_on_path=True)
    l1, l2 = _replay(t1, a), _replay(t2, b)
    seq = _path_order(l1.tree)
    positions = [(seq[k], seq[k + 1]) for k in range(n - 1)]
    cur = LabelPermutation.read(l1, positions)
    want = LabelPermutation.read(l2, positions)
    if not simultaneous:
        mid: list = []
        for i, j in cur.transpositions_to(want):
            mid += _pair_gadget(seq, *sorted((i, j)))
        return finish(t1, a + mid + reverse_steps(b), bound, tag, t2)
    mid = _halving_waves(ps, seq, cur, want)
    return finish(t1, a + mid + reverse_steps(b), bound, tag, t2)


def _halving_waves(ps: PointSet, seq: list[int], cur: LabelPermutation,
                   want: LabelPermutation) -> list[SimMove]:
    target = {l: k for k, l in enumerate(want.labels)}
    steps: list[SimMove] = []
    spans = [(0, len(cur.labels))]
    while spans:
        pairs = []
        nxt = []
        for lo, hi in spans:
            if hi - lo < 2:
                continue
            mid = lo + (hi - lo) // 2
            m1 = [k for k in range(lo, mid) if target[cur.labels[k]] >= mid]
            m2 = [k for k in range(hi - 1, mid - 1, -1)
                  if target[cur.labels[k]] < mid]
            assert len(m1) == len(m2)
            pairs += list(zip(m1, m2))
            nxt += [(lo, mid), (mid, hi)]
        spans = nxt
        if not pairs:
            continue
        hulls = [[seq[a], seq[a + 1], seq[b], seq[b + 1]] for a, b in pairs]
        for x in range(len(hulls)):
            for y in range(x + 1, len(hulls)):
                assert not _hull_interiors_overlap(ps, hulls[x], hulls[y]), \
                    "swap quadrilaterals overlap"
        gadgets = [_pair_gadget(seq, a, b) for a, b in pairs]
        for s in range(4):
            pr = tuple(g[s].pairs[0] for g in gadgets if s < len(g))
            if pr:
                steps.append(SimMove(pr, Kind.EMPTY_TRIANGLE))
        for a, b in pairs:
            cur.swap(a, b)
    assert cur.labels == want.labels
    return steps


# ------------------------------------------------ canonical balanced tree

@dataclass(frozen=True)
class CanonicalBalancedTree:
    root: int
    tree: PlaneTree
    parent: dict[int, int]
    depth: int


def balanced_tree(ps: PointSet, r: int | None = None
                  ) -> CanonicalBalancedTree:
    if ps.position is not Position.CONVEX:
        raise ValueError("point set is not in convex position")
    r = ps.hull_order[0] if r is None else r
    parent: dict[int, int] = {}
    level = {r: 0}
    todo = [(r, angular_order(ps, r))]
    while todo:
        root, pts = todo.pop()
        if not pts:
            continue
        c = (len(pts) + 1) // 2
        m = pts[c - 1]
        parent[m] = root
        level[m] = level[root] + 1
        todo += [(m, pts[:c - 1]), (m, pts[c:])]
    tree = validate_tree(ps, sorted(norm((v, u)) for v, u in parent.items()))
    return CanonicalBalancedTree(r, tree, parent, max(level.values()))


def canonical_balanced_tree(ps: PointSet, r: int | None = None) -> PlaneTree:
    """Binary tree rooted at hull vertex r, built by joining the root to
    the radial median and recursing on both sides with the median as
    root."""
    return balanced_tree(ps, r).tree


def _bubble_path(parent: dict[int, int], y: int, x: int) -> list[int]:
    """Vertices whose parent edges lead from edge(y) to edge(x); at a
    fork the common vertex's own parent edge is used as the turn."""
    def up(v):
        out = [v]
        while out[-1] in parent:
            out.append(parent[out[-1]])
        return out
    uy, ux = up(y), up(x)
    sx = set(ux)
    lca = next(v for v in uy if v in sx)
    left = uy[:uy.index(lca)]
    right = ux[:ux.index(lca)]
    if not left or not right:
        # one edge is above the other
        return (left + [lca] + right[::-1]) if left else \
            ([lca] + right[::-1])
    assert lca in parent, "the root has a single child"
    return left + [lca] + right[::-1]


def labeled_cx_slides_transform(t1: LabeledPlaneTree, t2: LabeledPlaneTree,
                                simultaneous: bool = False) -> Trace:
    """Labelled edge slides in convex position.

    Single mode meets on the canonical balanced tree and places labels
    bottom-up, bubbling each along the tree with three-slide swaps.
    Simultaneous mode meets on a star and sorts the labels around it.
    """
    t1, t2 = _labeled(t1), _labeled(t2)
    ps = t1.ps
    if ps.position is not Position.CONVEX:
        raise ValueError("point set is not in convex position")
    n = ps.n
    if n < 3:
        raise ValueError("need at least three points")
    lg = math.log2(n)
    if simultaneous:
        bound = math.floor(2 * C_SIM * (lg + 1)) + 3 * (n - 1)
        tag = "labeled_cx_slides_transform:sim"
    else:
        bound = 2 * (2 * n - 5) + 6 * (n - 2) * (ceil_log2(n) + 1)
        tag = "labeled_cx_slides_transform"
    if _same(t1, t2):
        return finish(t1, [], bound, tag, t2)
    if simultaneous:
        p = _extreme(ps)
        a = convex_star_by_sim_slides(t1, p).steps
        b = convex_star_by_sim_slides(t2, p).steps
        mid = _star_sort(ps, p, _replay(t1, a), _replay(t2, b))
        return finish(t1, a + mid + reverse_steps(b), bound, tag, t2)
    cb = balanced_tree(ps)
    a = convex_transform_by_slides(t1, cb.tree).steps
    b = convex_transform_by_slides(t2, cb.tree).steps
    l1, l2 = _replay(t1, a), _replay(t2, b)
    par = cb.parent
    edge = lambda v: norm((v, par[v]))
    lab = {v: l1.label(edge(v)) for v in par}
    want = {v: l2.label(edge(v)) for v in par}
    where = {l: v for v, l in lab.items()}
    done: set[int] = set()
    mid: list[Move] = []
    for x in _post_order(cb)[:-1]:
        y = where[want[x]]
        route = _bubble_path(par, y, x)
        assert not done & set(route), "route crosses a placed label"
        for s, t in zip(route, route[1:]):
            c = s if par.get(s) == t else t
            mid += _adjacent3(par[c], c, par[par[c]])
            lab[s], lab[t] = lab[t], lab[s]
            where[lab[s]], where[lab[t]] = s, t
        done.add(x)
    return finish(t1, a + mid + reverse_steps(b), bound, tag, t2)


def _post_order(cb: CanonicalBalancedTree) -> list[int]:
    kids: dict[int, list[int]] = {}
    for v, u in sorted(cb.parent.items()):
        kids.setdefault(u, []).append(v)
    out: list[int] = []
    stack = [(cb.root, False)]
    while stack:
        v, seen = stack.pop()
        if seen:
            if v != cb.root:
                out.append(v)
            continue
        stack.append((v, True))
        stack += [(c, False) for c in kids.get(v, [])]
    return out
