"""Exact planar predicates and point-set generators.

Everything here works on Python integers, so no predicate ever rounds.
"""

from __future__ import annotations

import enum
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence


class GeometryError(ValueError):
    """Raised for degenerate input to a predicate or a failed generator."""


class Orientation(enum.IntEnum):
    CW = -1
    COLLINEAR = 0
    CCW = 1


class Point(NamedTuple):
    x: int
    y: int


Segment = tuple[Point, Point]


def _det(a: Point, b: Point, c: Point) -> int:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def orientation(a: Point, b: Point, c: Point) -> Orientation:
    d = _det(a, b, c)
    if d > 0:
        return Orientation.CCW
    if d < 0:
        return Orientation.CW
    return Orientation.COLLINEAR


def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


def _collinear_overlap(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Collinear segments ab, cd: do they overlap in more than a point?"""
    key = (lambda p: p[0]) if a[0] != b[0] else (lambda p: p[1])
    lo1, hi1 = sorted((key(a), key(b)))
    lo2, hi2 = sorted((key(c), key(d)))
    return max(lo1, lo2) < min(hi1, hi2)


def proper_cross(s1: Segment, s2: Segment) -> bool:
    """True iff the open segments share a point.

    Segments meeting only at a common endpoint do not cross.
    """
    a, b = s1
    c, d = s2
    d1 = _sign(_det(a, b, c))
    d2 = _sign(_det(a, b, d))
    if d1 == 0 and d2 == 0:
        return _collinear_overlap(a, b, c, d)
    d3 = _sign(_det(c, d, a))
    d4 = _sign(_det(c, d, b))
    return d1 * d2 < 0 and d3 * d4 < 0


def _strictly_inside(p: Point, q: Point, r: Point, s: Point) -> bool:
    o = _sign(_det(p, q, r))
    return (_sign(_det(p, q, s)) == o and _sign(_det(q, r, s)) == o
            and _sign(_det(r, p, s)) == o)


def segment_meets_open_triangle(p: Point, q: Point, r: Point,
                                a: Point, b: Point) -> bool:
    """Clip segment ab against the three open half-planes of pqr.

    Works on the segment parameter t in [0, 1] with exact fractions.
    """
    o = _sign(_det(p, q, r))
    lo, lo_open = Fraction(0), False
    hi, hi_open = Fraction(1), False
    for u, v in ((p, q), (q, r), (r, p)):
        fa = o * _det(u, v, a)
        fb = o * _det(u, v, b)
        if fa == fb:
            if fa <= 0:
                return False
            continue
        t = Fraction(fa, fa - fb)  # root of fa + t (fb - fa)
        if fb > fa:
            if t > lo or (t == lo and not lo_open):
                lo, lo_open = t, True
        else:
            if t < hi or (t == hi and not hi_open):
                hi, hi_open = t, True
    return lo < hi


def triangle_blocked(p: Point, q: Point, r: Point,
                     edges: Iterable[Segment]) -> bool:
    """Does any segment meet the open interior of triangle pqr?"""
    if _det(p, q, r) == 0:
        raise GeometryError(f"degenerate triangle {p}, {q}, {r}")
    return any(segment_meets_open_triangle(p, q, r, a, b) for a, b in edges)


class Position(str, enum.Enum):
    GENERAL = "general"
    CONVEX = "convex"
    DEGENERATE = "degenerate"
    UNCHECKED = "unchecked"


def _hull_vertex_count(pts: Sequence[Point]) -> int:
    """Size of the strict convex hull (monotone chain, collinear dropped)."""
    s = sorted(set(pts))
    if len(s) <= 2:
        return len(s)

    def half(seq):
        out: list[Point] = []
        for p in seq:
            while len(out) >= 2 and _det(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(s)
    upper = half(reversed(s))
    return len(lower) + len(upper) - 2


def classify_points(pts: Sequence[Point]) -> Position:
    if len(set(pts)) != len(pts):
        return Position.DEGENERATE
    # collinear triples show up as repeated reduced directions from a point
    for i, a in enumerate(pts):
        seen = set()
        for b in pts[i + 1:]:
            dx, dy = b.x - a.x, b.y - a.y
            g = math.gcd(dx, dy)
            dx, dy = dx // g, dy // g
            if dx < 0 or (dx == 0 and dy < 0):
                dx, dy = -dx, -dy
            if (dx, dy) in seen:
                return Position.DEGENERATE
            seen.add((dx, dy))
    if _hull_vertex_count(pts) == len(pts):
        return Position.CONVEX
    return Position.GENERAL


# pairwise bitset tables are only built for point sets this small
MASK_LIMIT = 24


@dataclass(frozen=True)
class PointSet:
    points: tuple[Point, ...]
    position: Position = Position.UNCHECKED
    names: tuple[str, ...] | None = field(default=None, compare=False)

    @classmethod
    def of(cls, coords: Iterable[Sequence[int]], *, check: bool = True,
           names: Sequence[str] | None = None) -> "PointSet":
        pts = tuple(Point(int(x), int(y)) for x, y in coords)
        pos = classify_points(pts) if check else Position.UNCHECKED
        return cls(pts, pos, tuple(names) if names else None)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i: int) -> Point:
        return self.points[i]

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def is_convex(self) -> bool:
        return self.position == Position.CONVEX

    def segment(self, e: tuple[int, int]) -> Segment:
        return self.points[e[0]], self.points[e[1]]

    @cached_property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        """All index pairs (i, j), i < j, in lexicographic order."""
        return tuple(combinations(range(self.n), 2))

    def pair_id(self, e: tuple[int, int]) -> int:
        """Position of (i, j), i < j, in ``pairs`` without building it."""
        i, j = e
        return i * (2 * self.n - i - 1) // 2 + j - i - 1

    @cached_property
    def pair_index(self) -> dict[tuple[int, int], int]:
        return {e: k for k, e in enumerate(self.pairs)}

    @cached_property
    def cross_mask(self) -> tuple[int, ...]:
        """cross_mask[k] has bit m set iff pair k and pair m cross."""
        segs = [self.segment(e) for e in self.pairs]
        masks = [0] * len(segs)
        for a in range(len(segs)):
            for b in range(a + 1, len(segs)):
                if proper_cross(segs[a], segs[b]):
                    masks[a] |= 1 << b
                    masks[b] |= 1 << a
        return tuple(masks)

    @cached_property
    def _tri_cache(self) -> dict[tuple[int, int, int], int]:
        return {}

    def triangle_mask(self, a: int, b: int, c: int) -> int:
        """Bitset of index pairs whose segment meets the open interior of
        triangle abc."""
        key = tuple(sorted((a, b, c)))
        cache = self._tri_cache
        m = cache.get(key)
        if m is None:
            p, q, r = (self.points[i] for i in key)
            if _det(p, q, r) == 0:
                raise GeometryError(f"degenerate triangle {key}")
            fast = self.position in (Position.GENERAL, Position.CONVEX)
            m = 0
            for k, (i, j) in enumerate(self.pairs):
                if i in key and j in key:
                    continue  # a side of the triangle
                u, v = self.points[i], self.points[j]
                if fast:
                    hit = (_strictly_inside(p, q, r, u)
                           or _strictly_inside(p, q, r, v)
                           or proper_cross((u, v), (p, q))
                           or proper_cross((u, v), (q, r))
                           or proper_cross((u, v), (r, p)))
                else:
                    hit = segment_meets_open_triangle(p, q, r, u, v)
                if hit:
                    m |= 1 << k
            cache[key] = m
        return m

    @cached_property
    def hull_order(self) -> tuple[int, ...]:
        """Counterclockwise order of hull vertices, starting at index 0
        when it is on the hull (always for convex sets)."""
        idx = sorted(range(self.n), key=lambda i: self.points[i])
        if self.n <= 2:
            return tuple(idx)

        def half(seq):
            out: list[int] = []
            for i in seq:
                while (len(out) >= 2 and _det(self.points[out[-2]],
                                             self.points[out[-1]],
                                             self.points[i]) <= 0):
                    out.pop()
                out.append(i)
            return out

        lower = half(idx)
        upper = half(reversed(idx))
        ring = lower[:-1] + upper[:-1]
        if 0 in ring:
            k = ring.index(0)
            ring = ring[k:] + ring[:k]
        return tuple(ring)

    @cached_property
    def hull_rank(self) -> tuple[int, ...]:
        """Position of every point in ``hull_order`` (convex sets only)."""
        rank = [0] * self.n
        for k, i in enumerate(self.hull_order):
            rank[i] = k
        return tuple(rank)

    @cached_property
    def hull_edges(self) -> frozenset[tuple[int, int]]:
        h = self.hull_order
        return frozenset(tuple(sorted((h[i], h[(i + 1) % len(h)])))
                         for i in range(len(h)))

    def to_json(self) -> str:
        doc: dict = {"points": [[str(p.x), str(p.y)] for p in self.points]}
        if self.names:
            doc["names"] = list(self.names)
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "PointSet":
        doc = json.loads(text)
        return cls.of(((int(x), int(y)) for x, y in doc["points"]),
                      names=doc.get("names"))


def chords_cross(ps: PointSet, e: tuple[int, int],
                 f: tuple[int, int]) -> bool:
    """proper_cross on index pairs; in convex position two chords cross
    exactly when their endpoints interleave along the hull."""
    if ps.position is Position.CONVEX:
        if e[0] in f or e[1] in f:
            return set(e) == set(f)     # a chord overlaps itself
        r = ps.hull_rank
        a, b = sorted((r[e[0]], r[e[1]]))
        return (a < r[f[0]] < b) != (a < r[f[1]] < b)
    return proper_cross(ps.segment(e), ps.segment(f))


def first_crossing(ps: PointSet, edges: Iterable[tuple[int, int]],
                   focus: set | frozenset | None = None
                   ) -> tuple[tuple[int, int], tuple[int, int]] | None:
    """Some crossing pair among ``edges`` (lexicographically first for small
    sets), or None.  With ``focus``, only pairs touching it are examined.
    Large sets use an x-sorted sweep with box pruning."""
    es = sorted(edges)
    if ps.n <= MASK_LIMIT and focus is None:
        idx = ps.pair_index
        cm = ps.cross_mask
        mask = 0
        for e in es:
            mask |= 1 << idx[e]
        for e in es:
            hit = cm[idx[e]] & mask
            if hit:
                f = ps.pairs[(hit & -hit).bit_length() - 1]
                return (e, f) if e < f else (f, e)
        return None
    pts = ps.points
    boxes = []
    for e in es:
        a, b = pts[e[0]], pts[e[1]]
        boxes.append((min(a.x, b.x), max(a.x, b.x), min(a.y, b.y),
                      max(a.y, b.y), e))
    boxes.sort()
    active: list = []
    for box in boxes:
        x0, x1, y0, y1, e = box
        active = [b for b in active if b[1] >= x0]
        se = ps.segment(e)
        mine = focus is None or e in focus
        for b in active:
            if b[3] < y0 or b[2] > y1 or not (mine or b[4] in focus):
                continue
            if chords_cross(ps, e, b[4]):
                return tuple(sorted((e, b[4])))
        active.append(box)
    return None


def check_position(ps: PointSet) -> Position:
    return classify_points(ps.points)


# ---------------------------------------------------------------- generators

def convex_regular(n: int, radius: int = 10**6) -> PointSet:
    if n < 1:
        raise GeometryError("n must be positive")
    while True:
        coords = [(round(radius * math.cos(2 * math.pi * i / n)),
                   round(radius * math.sin(2 * math.pi * i / n)))
                  for i in range(n)]
        ps = PointSet.of(coords)
        if ps.position == Position.CONVEX:
            return ps
        radius *= 10
        if radius > 10**60:
            raise GeometryError("could not place a convex regular polygon")


def random_general(n: int, seed: int = 0, box: int | None = None,
                   budget: int = 10_000) -> PointSet:
    if n < 1:
        raise GeometryError("n must be positive")
    rng = random.Random(seed)
    box = box or max(16, 4 * n * n)
    for _ in range(budget):
        coords = [(rng.randrange(box), rng.randrange(box)) for _ in range(n)]
        ps = PointSet.of(coords)
        if ps.position in (Position.GENERAL, Position.CONVEX):
            return ps
    raise GeometryError("rejection budget exhausted")


def random_convex(n: int, seed: int = 0) -> PointSet:
    """Seeded convex set: random angles on a large circle."""
    rng = random.Random(seed)
    for _ in range(1000):
        angles = sorted(rng.random() * 2 * math.pi for _ in range(n))
        r = max(10**6, 64 * n**4)   # rounding must not flatten close angles
        coords = [(round(r * math.cos(a)), round(r * math.sin(a)))
                  for a in angles]
        ps = PointSet.of(coords)
        if ps.position == Position.CONVEX:
            return ps
    raise GeometryError("rejection budget exhausted")


def _lowest_bit(x: int) -> int:
    return (x & -x).bit_length() - 1


def tower_height(x: int, k: int) -> int:
    """Unperturbed height φ(x) of the binary tower on 2**k + 1 points."""
    n = 2**k + 1
    if x == 0 or x == n - 1:
        return 1
    return n ** (2 * (k - _lowest_bit(x)))


def binary_tower_raw(k: int) -> list[Point]:
    n = 2**k + 1
    return [Point(x, tower_height(x, k)) for x in range(n)]


def tower_levels(k: int) -> list[int]:
    """Level of each point: least i with φ(x) <= n**(2i)."""
    n = 2**k + 1
    out = []
    for x in range(n):
        h = tower_height(x, k)
        i = 0
        while h > n ** (2 * i):
            i += 1
        out.append(i)
    return out


def empty_triangles(ps: PointSet):
    """Yield index triples whose open triangle holds no point of ps."""
    pts = ps.points
    for a, b, c in combinations(range(ps.n), 3):
        if all(not _strictly_inside(pts[a], pts[b], pts[c], pts[m])
               for m in range(ps.n) if m not in (a, b, c)):
            yield a, b, c


def check_tower_levels(ps: PointSet, k: int) -> list[tuple[int, int, int]]:
    """Empty triangles violating the level property; empty list if it holds.

    For every empty triangle with two corners in S_i (level <= i) the third
    corner must be in S_{i+1}.
    """
    lev = tower_levels(k)
    bad = []
    for tri in empty_triangles(ps):
        ls = sorted(lev[v] for v in tri)
        # the two lowest levels fix the smallest i that applies
        if ls[2] > ls[1] + 1:
            bad.append(tri)
    return bad


def binary_tower(k: int) -> PointSet:
    if k < 1:
        raise GeometryError("k must be positive")
    n = 2**k + 1
    big = n**4
    coords = [(x, big * tower_height(x, k) + x * x) for x in range(n)]
    ps = PointSet.of(coords)
    if ps.position not in (Position.GENERAL, Position.CONVEX):
        raise GeometryError("perturbed tower is degenerate")
    bad = check_tower_levels(ps, k)
    if bad:
        raise GeometryError(f"tower level property fails on {bad[0]}")
    return ps


def sim_rotation_lb() -> PointSet:
    """Regular hexagon with vertices named a..f counterclockwise."""
    base = convex_regular(6)
    return PointSet(base.points, base.position, tuple("abcdef"))


def generate(kind: str, params: dict | None = None,
             seed: int = 0) -> PointSet:
    params = dict(params or {})
    if kind == "convex_regular":
        return convex_regular(int(params["n"]))
    if kind == "random_general":
        return random_general(int(params["n"]), seed)
    if kind == "random_convex":
        return random_convex(int(params["n"]), seed)
    if kind == "binary_tower":
        return binary_tower(int(params["k"]))
    if kind == "sim_rotation_lb":
        return sim_rotation_lb()
    raise GeometryError(f"unknown generator kind {kind!r}")


def greedy_triangulation(ps: PointSet,
                         forced: Iterable[tuple[int, int]] = ()
                         ) -> set[tuple[int, int]]:
    """Edge-maximal plane graph containing ``forced``: candidate pairs are
    added in lexicographic order whenever they cross nothing so far."""
    edges = set(forced)
    segs = [ps.segment(e) for e in edges]
    for e in combinations(range(ps.n), 2):
        if e in edges:
            continue
        s = ps.segment(e)
        if any(proper_cross(s, g) for g in segs):
            continue
        edges.add(e)
        segs.append(s)
    return edges


def delaunay_edges(ps: PointSet) -> set[tuple[int, int]]:
    """Edges of a floating-point Delaunay triangulation, filtered to a
    plane set; callers must not rely on maximality."""
    from scipy.spatial import Delaunay
    import numpy as np
    xy = np.array([(float(p.x), float(p.y)) for p in ps.points])
    tri = Delaunay(xy)
    out = set()
    for a, b, c in tri.simplices:
        for u, v in ((a, b), (b, c), (a, c)):
            out.add((int(min(u, v)), int(max(u, v))))
    return out
