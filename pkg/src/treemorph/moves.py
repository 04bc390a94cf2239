"""The five elementary operations, their simultaneous versions, and the
matching search that decides whether two trees are one simultaneous step
apart."""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .geom import (MASK_LIMIT, PointSet, Position, _det, _strictly_inside,
                   chords_cross, first_crossing, proper_cross,
                   segment_meets_open_triangle)
from .tree import (AnyTree, CrossingError, DisconnectedError, Edge,
                   EdgeCountError, LabeledPlaneTree, PlaneTree, components,
                   norm, validate_tree)

log = logging.getLogger(__name__)



class Kind(str, enum.Enum):
    EXCHANGE = "exchange"
    COMPATIBLE = "compatible"
    ROTATION = "rotation"
    EMPTY_TRIANGLE = "empty_triangle"
    SLIDE = "slide"

    @property
    def rank(self) -> int:
        return _RANK[self]


_RANK = {k: i for i, k in enumerate(Kind)}


def as_kind(k: Kind | str) -> Kind:
    return k if isinstance(k, Kind) else Kind(str(k))


class MoveError(ValueError):
    pass


class MoveKindError(MoveError):
    """The move is weaker than claimed; ``strongest`` is what it achieves
    (None when the result is not a plane tree)."""

    def __init__(self, claimed: Kind, strongest: Kind | None):
        got = strongest.value if strongest else "invalid"
        super().__init__(f"move claimed {claimed.value}, strongest is {got}")
        self.claimed = claimed
        self.strongest = strongest


class UndecidedError(RuntimeError):
    """The restricted-slide search ran out of budget."""


@dataclass(frozen=True)
class Move:
    removed: Edge
    inserted: Edge
    kind: Kind = Kind.EXCHANGE

    def __post_init__(self):
        object.__setattr__(self, "removed", norm(self.removed))
        object.__setattr__(self, "inserted", norm(self.inserted))
        object.__setattr__(self, "kind", as_kind(self.kind))
        if self.removed == self.inserted:
            raise MoveError("removed and inserted edge coincide")

    @property
    def pairs(self) -> tuple[tuple[Edge, Edge], ...]:
        return ((self.removed, self.inserted),)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value,
                "pairs": [[list(self.removed), list(self.inserted)]],
                "restricted": False}


@dataclass(frozen=True)
class SimMove:
    pairs: tuple[tuple[Edge, Edge], ...]
    kind: Kind = Kind.EXCHANGE
    restricted: bool = False

    def __post_init__(self):
        ps = tuple(sorted((norm(a), norm(b)) for a, b in self.pairs))
        object.__setattr__(self, "pairs", ps)
        object.__setattr__(self, "kind", as_kind(self.kind))
        old = [a for a, _ in ps]
        new = [b for _, b in ps]
        if len(set(old)) != len(old) or len(set(new)) != len(new):
            raise MoveError("repeated edge in simultaneous move")
        if set(old) & set(new):
            raise MoveError("edge appears on both sides")

    @property
    def removed(self) -> list[Edge]:
        return [a for a, _ in self.pairs]

    @property
    def inserted(self) -> list[Edge]:
        return [b for _, b in self.pairs]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value,
                "pairs": [[list(a), list(b)] for a, b in self.pairs],
                "restricted": self.restricted}


AnyMove = Move | SimMove


def move_from_dict(doc: dict) -> AnyMove:
    pairs = [(tuple(a), tuple(b)) for a, b in doc["pairs"]]
    if doc.get("sim", len(pairs) != 1):
        return SimMove(tuple(pairs), doc["kind"], bool(doc.get("restricted")))
    return Move(pairs[0][0], pairs[0][1], doc["kind"])


def move_to_json(m: AnyMove) -> str:
    d = m.to_dict()
    if isinstance(m, SimMove):
        d["sim"] = True
    return json.dumps(d)


# ------------------------------------------------------------ geometry

def _edge_crosses_any(ps: PointSet, f: Edge, edges: Iterable[Edge]) -> bool:
    sf = ps.segment(f)
    return any(proper_cross(sf, ps.segment(e)) for e in edges)


def _common(e: Edge, f: Edge) -> int | None:
    s = set(e) & set(f)
    return s.pop() if len(s) == 1 else None


def triangle_of(e: Edge, f: Edge) -> tuple[int, int, int] | None:
    """(p, q, r) for e = pq and f = pr sharing p; None otherwise."""
    p = _common(e, f)
    if p is None:
        return None
    q = e[0] if e[1] == p else e[1]
    r = f[0] if f[1] == p else f[1]
    return p, q, r


def _tri_blocked(ps: PointSet, tri: tuple[int, int, int],
                 edges: Iterable[Edge]) -> bool:
    p, q, r = (ps[i] for i in tri)
    if ps.n <= MASK_LIMIT:
        m = ps.triangle_mask(*tri)
        idx = ps.pair_index
        return any(m >> idx[e] & 1 for e in edges)
    if ps.position is Position.CONVEX:
        # no point lies inside; only a chord through a side can block
        sides = [norm(tri[:2]), norm(tri[1:]), norm((tri[0], tri[2]))]
        return any(chords_cross(ps, e, s) for e in edges
                   if not (e[0] in tri and e[1] in tri) for s in sides)
    fast = ps.position.value in ("general", "convex")
    x0, x1 = min(p.x, q.x, r.x), max(p.x, q.x, r.x)
    y0, y1 = min(p.y, q.y, r.y), max(p.y, q.y, r.y)
    for e in edges:
        if e[0] in tri and e[1] in tri:
            continue
        u, v = ps.segment(e)
        # a segment whose box misses the triangle's box cannot touch it
        if (max(u.x, v.x) < x0 or min(u.x, v.x) > x1
                or max(u.y, v.y) < y0 or min(u.y, v.y) > y1):
            continue
        if fast:
            if (_strictly_inside(p, q, r, u) or _strictly_inside(p, q, r, v)
                    or proper_cross((u, v), (p, q))
                    or proper_cross((u, v), (q, r))
                    or proper_cross((u, v), (r, p))):
                return True
        elif segment_meets_open_triangle(p, q, r, u, v):
            return True
    return False


def _split(t: PlaneTree, removed: Edge) -> set[int]:
    """Vertices on the side of removed[0] after deleting removed."""
    adj = t.adjacency
    a, b = removed
    seen = {a}
    stack = [a]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen and not (v == a and w == b):
                seen.add(w)
                stack.append(w)
    return seen


def pair_kind(ps: PointSet, old_edges: frozenset[Edge],
              new_edges: frozenset[Edge], e: Edge, f: Edge) -> Kind:
    """Strongest kind met by the pair (e -> f) with respect to the two
    trees, assuming the exchange itself is legal."""
    if proper_cross(ps.segment(e), ps.segment(f)):
        return Kind.EXCHANGE
    tri = triangle_of(e, f)
    if tri is None:
        return Kind.COMPATIBLE
    if _tri_blocked(ps, tri, old_edges | new_edges):
        return Kind.ROTATION
    p, q, r = tri
    qr = norm((q, r))
    if qr in old_edges and qr in new_edges:
        return Kind.SLIDE
    return Kind.EMPTY_TRIANGLE


def classify_move(t: AnyTree, removed: Edge, inserted: Edge) -> Kind | None:
    """Strongest operation that performs the exchange, or None when the
    result is not a plane spanning tree."""
    base = t.unlabeled
    e, f = norm(removed), norm(inserted)
    if e not in base.edges:
        raise MoveError(f"{e} is not a tree edge")
    if f in base.edges:
        raise MoveError(f"{f} is already a tree edge")
    side = _split(base, e)
    if (f[0] in side) == (f[1] in side):
        return None
    rest = base.edges - {e}
    if _edge_crosses_any(base.ps, f, rest):
        return None
    return pair_kind(base.ps, base.edges, rest | {f}, e, f)


def apply_move(t: AnyTree, m: Move) -> AnyTree:
    k = classify_move(t, m.removed, m.inserted)
    if k is None or k.rank < m.kind.rank:
        raise MoveKindError(m.kind, k)
    return t.replace(m.removed, m.inserted)


def enumerate_neighbors(t: AnyTree, kind: Kind | str) -> list[Move]:
    """Moves valid at ``kind`` or stronger, ordered by (removed, inserted);
    each Move carries its strongest kind."""
    kind = as_kind(kind)
    base = t.unlabeled
    ps = base.ps
    out: list[Move] = []
    small = ps.n <= MASK_LIMIT
    if small:
        cm = ps.cross_mask
        idx = ps.pair_index
        tmask = base.mask
    for e in base.sorted_edges:
        side = _split(base, e)
        rest = base.edges - {e}
        if small:
            rest_mask = tmask & ~(1 << idx[e])
        for f in ps.pairs:
            if (f[0] in side) == (f[1] in side) or f == e:
                continue
            if small:
                if cm[idx[f]] & rest_mask:
                    continue
            elif _edge_crosses_any(ps, f, rest):
                continue
            if kind.rank >= Kind.ROTATION.rank and _common(e, f) is None:
                continue
            k = pair_kind(ps, base.edges, rest | {f}, e, f)
            if k.rank >= kind.rank:
                out.append(Move(e, f, k))
    return out


# ------------------------------------------------------ simultaneous moves

def _max_matching(left: Sequence, right: Sequence, ok) -> dict | None:
    """Perfect matching left -> right under predicate ok, or None.

    Augmenting paths from each left vertex (Kuhn's algorithm)."""
    adj = {a: [b for b in right if ok(a, b)] for a in left}
    match_r: dict = {}

    def augment(a, seen: set) -> bool:
        for b in adj[a]:
            if b in seen:
                continue
            seen.add(b)
            if b not in match_r or augment(match_r[b], seen):
                match_r[b] = a
                return True
        return False

    for a in left:
        if not augment(a, set()):
            return None
    return {a: b for b, a in match_r.items()}


def _boxes_apart(P, Q) -> bool:
    return (max(a.x for a in P) < min(b.x for b in Q)
            or max(b.x for b in Q) < min(a.x for a in P)
            or max(a.y for a in P) < min(b.y for b in Q)
            or max(b.y for b in Q) < min(a.y for a in P))


def _convex_sides_interleave(rank, t1, t2) -> bool:
    """Whether a side of t1 crosses a side of t2, for triangles on a convex
    set; with at most one shared corner this is exactly interior overlap."""
    a = sorted(rank[v] for v in t1)
    b = sorted(rank[v] for v in t2)
    for lo, hi in ((a[0], a[1]), (a[1], a[2]), (a[0], a[2])):
        for x, y in ((b[0], b[1]), (b[1], b[2]), (b[0], b[2])):
            if x in (lo, hi) or y in (lo, hi):
                continue
            if (lo < x < hi) != (lo < y < hi):
                return True
    return False


def triangles_share_more_than_a_point(ps: PointSet, t1, t2) -> bool:
    common = set(t1) & set(t2)
    if len(common) >= 2:
        return True
    if ps.position is Position.CONVEX:
        return _convex_sides_interleave(ps.hull_rank, t1, t2)
    P = [ps[i] for i in t1]
    Q = [ps[i] for i in t2]
    if _boxes_apart(P, Q):
        return False
    for i in range(3):
        for j in range(3):
            if proper_cross((P[i], P[(i + 1) % 3]), (Q[j], Q[(j + 1) % 3])):
                return True
    if any(v not in common and _strictly_inside(*(ps[i] for i in t1), ps[v])
           for v in t2):
        return True
    if any(v not in common and _strictly_inside(*(ps[i] for i in t2), ps[v])
           for v in t1):
        return True
    return False


def triangle_interiors_overlap(ps: PointSet, t1, t2) -> bool:
    if set(t1) == set(t2):
        return True
    P = [ps[i] for i in t1]
    Q = [ps[i] for i in t2]
    for i in range(3):
        for j in range(3):
            if {t1[i], t1[(i + 1) % 3]} == {t2[j], t2[(j + 1) % 3]}:
                continue        # a shared side separates nothing
            if proper_cross((P[i], P[(i + 1) % 3]), (Q[j], Q[(j + 1) % 3])):
                return True
    if any(_strictly_inside(*P, ps[v]) for v in t2 if v not in t1):
        return True
    if any(_strictly_inside(*Q, ps[v]) for v in t1 if v not in t2):
        return True
    return False


def max_sim_slide_pairs(n: int) -> int:
    # the closed form is 0 at n = 3, where one slide is clearly possible
    return max(2 * ((n - 1) // 3), 1 if n >= 3 else 0)


def check_packing(sim: SimMove, n: int) -> None:
    """A simultaneous slide moves at most 2 floor((n-1)/3) edges."""
    if sim.kind is Kind.SLIDE:
        assert len(sim.pairs) <= max_sim_slide_pairs(n), (
            f"{len(sim.pairs)} simultaneous slides on {n} points")


def check_triangle_disjointness(ps: PointSet, sim: SimMove) -> bool:
    """Log (without rejecting) overlapping triangles of a simultaneous
    empty-triangle move; returns whether they are interior-disjoint."""
    if sim.kind.rank < Kind.EMPTY_TRIANGLE.rank:
        return True
    tris = [triangle_of(a, b) for a, b in sim.pairs]
    for t1, t2 in combinations(tris, 2):
        if triangle_interiors_overlap(ps, t1, t2):
            log.warning("simultaneous move with overlapping triangles %s %s",
                        t1, t2)
            return False
    return True


def _union_noncrossing(ps: PointSet, old: Iterable[Edge],
                       new: Iterable[Edge]) -> bool:
    """No new edge crosses an old edge (both trees are plane already)."""
    old = list(old)
    if ps.n <= MASK_LIMIT:
        cm = ps.cross_mask
        idx = ps.pair_index
        om = 0
        for e in old:
            om |= 1 << idx[e]
        return not any(cm[idx[f]] & om for f in new)
    new = set(new)
    return first_crossing(ps, new.union(old), focus=new) is None


def sim_pair_ok(ps: PointSet, e1: frozenset[Edge], e2: frozenset[Edge],
                kind: Kind, e: Edge, f: Edge) -> bool:
    """Per-pair condition of a simultaneous move evaluated on the first
    tree (triangle emptiness against both trees)."""
    if kind is Kind.EXCHANGE or kind is Kind.COMPATIBLE:
        return True
    tri = triangle_of(e, f)
    if tri is None:
        return False
    if kind is Kind.ROTATION:
        return True
    if _tri_blocked(ps, tri, e1 | e2):
        return False
    if kind is Kind.EMPTY_TRIANGLE:
        return True
    qr = norm(tri[1:])
    return qr in e1 and qr in e2


def validate_simultaneous(t1: AnyTree, t2: AnyTree, kind: Kind | str,
                          restricted: bool = False,
                          budget: int = 10**6) -> SimMove | None:
    kind = as_kind(kind)
    a, b = t1.unlabeled, t2.unlabeled
    if a.ps is not b.ps and a.ps != b.ps:
        raise MoveError("trees live on different point sets")
    ps = a.ps
    old = sorted(a.edges - b.edges)
    new = sorted(b.edges - a.edges)
    if not old:
        return SimMove((), kind, restricted)
    if kind.rank >= Kind.COMPATIBLE.rank and not _union_noncrossing(
            ps, a.edges, new):
        return None
    e1, e2 = a.edges, b.edges

    def ok(e, f):
        return sim_pair_ok(ps, e1, e2, kind, e, f)

    if restricted and kind is Kind.SLIDE:
        pairs = _restricted_matching(ps, old, new, ok, budget)
    else:
        m = _max_matching(old, new, ok)
        pairs = None if m is None else sorted(m.items())
    if pairs is None:
        return None
    sim = SimMove(tuple(pairs), kind, restricted)
    check_packing(sim, ps.n)
    if kind is Kind.EMPTY_TRIANGLE or kind is Kind.SLIDE:
        check_triangle_disjointness(ps, sim)
    return sim


def _restricted_matching(ps, old, new, ok, budget):
    """Perfect matching whose slide triangles pairwise meet in at most a
    point; backtracking with a node budget."""
    options = {e: [f for f in new if ok(e, f)] for e in old}
    order = sorted(old, key=lambda e: len(options[e]))
    chosen: list[tuple[Edge, Edge]] = []
    used: set[Edge] = set()
    nodes = 0

    def rec(i: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise UndecidedError("restricted slide search exceeded budget")
        if i == len(order):
            return True
        e = order[i]
        for f in options[e]:
            if f in used:
                continue
            tri = triangle_of(e, f)
            if any(triangles_share_more_than_a_point(ps, tri, triangle_of(a, b))
                   for a, b in chosen):
                continue
            used.add(f)
            chosen.append((e, f))
            if rec(i + 1):
                return True
            chosen.pop()
            used.discard(f)
        return False

    if any(not options[e] for e in old):
        return None
    return sorted(chosen) if rec(0) else None


def apply_sim(t: AnyTree, sim: SimMove) -> AnyTree:
    """Apply all pairs at once; labels travel along the bijection."""
    base = t.unlabeled
    edges = set(base.edges)
    for a, b in sim.pairs:
        if a not in edges:
            raise MoveError(f"{a} is not a tree edge")
        edges.discard(a)
    for a, b in sim.pairs:
        if b in edges:
            raise MoveError(f"{b} is already a tree edge")
        edges.add(b)
    new = _rebuild(base, edges, sim.inserted)
    if isinstance(t, LabeledPlaneTree):
        lm = dict(t.label_map)
        moved = {b: lm.pop(a) for a, b in sim.pairs}
        lm.update(moved)
        return LabeledPlaneTree.of(new, lm)
    return new


def _rebuild(base: PlaneTree, edges: set[Edge],
             inserted: list[Edge]) -> PlaneTree:
    """Validate the edited edge set of a plane tree.  Only inserted edges
    can introduce crossings, so large sets skip the all-pairs scan."""
    ps = base.ps
    if ps.n <= MASK_LIMIT:
        return validate_tree(ps, sorted(edges))
    if len(edges) != ps.n - 1:
        raise EdgeCountError(len(edges), ps.n - 1)
    comps = components(ps.n, edges)
    if len(comps) > 1:
        raise DisconnectedError(comps)
    bad = first_crossing(ps, edges, focus=set(inserted))
    if bad:
        raise CrossingError(*bad)
    return PlaneTree(ps, frozenset(edges))


def sim_move_valid(t: AnyTree, sim: SimMove) -> bool:
    """Check a given bijection (not just existence) on t."""
    base = t.unlabeled
    ps = base.ps
    try:
        t2 = apply_sim(base, sim)
    except (MoveError, ValueError):
        return False
    e1, e2 = base.edges, t2.edges
    old = set(e1 - e2)
    if old != set(sim.removed):
        return False
    if sim.kind.rank >= Kind.COMPATIBLE.rank and not _union_noncrossing(
            ps, e1, sim.inserted):
        return False
    if not all(sim_pair_ok(ps, e1, e2, sim.kind, a, b) for a, b in sim.pairs):
        return False
    if sim.restricted and sim.kind is Kind.SLIDE:
        tris = [triangle_of(a, b) for a, b in sim.pairs]
        if any(triangles_share_more_than_a_point(ps, x, y)
               for x, y in combinations(tris, 2)):
            return False
    return True


def sequentialize_sim_slides(t1: AnyTree, sim: SimMove,
                             order: Sequence[int] | None = None
                             ) -> list[AnyTree]:
    """Perform the pairs of a simultaneous slide one by one.

    Every prefix must be a plane tree reached by a single slide; a failure
    is an AssertionError: every order is supposed to work.
    """
    if sim.kind is not Kind.SLIDE:
        raise MoveError("only simultaneous slides can be sequentialized")
    if order is None:
        order = range(len(sim.pairs))
    out = []
    cur = t1
    for i in order:
        e, f = sim.pairs[i]
        k = classify_move(cur, e, f)
        assert k is not None and k.rank >= Kind.SLIDE.rank, (
            f"step {e}->{f} is {k} on an intermediate tree")
        cur = cur.replace(e, f)
        out.append(cur)
    return out
