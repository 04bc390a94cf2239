import itertools
import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import shuffled_labels, trees_of
from treemorph import geom, labeled
from treemorph.labeled import (GadgetError, LabelPermutation, balanced_tree,
                               canonical_balanced_tree,
                               labeled_cx_empty_tri_transform,
                               labeled_cx_slides_transform,
                               labeled_sim_empty_tri_transform,
                               labeled_sim_exchange_transform,
                               labeled_sim_lower_check,
                               labeled_transform_rotations, swap_gadget)
from treemorph.moves import Kind, SimMove, validate_simultaneous
from treemorph.trace import verify_trace
from treemorph.tree import (LabeledPlaneTree, norm, random_tree,
                            validate_tree)
from treemorph.xform import angular_order, ceil_log2, hull_path, star


def relabel(t, labels):
    return LabeledPlaneTree.of(t, dict(zip(t.sorted_edges, labels)))


def radial_path(ps, q):
    P = [q, *angular_order(ps, q)]
    return validate_tree(ps, [(P[k], P[k + 1]) for k in range(len(P) - 1)]), P


def shifted_stars(n):
    ps = geom.convex_regular(n)
    s = star(ps, 0)
    a = relabel(s, range(1, n))
    b = relabel(s, [(l % (n - 1)) + 1 for l in range(1, n)])
    return a, b


def assert_swap(t, tr, e, f):
    before, after = t.label_map, tr.final.label_map
    assert tr.final.edges == t.edges
    assert after[e] == before[f] and after[f] == before[e]
    assert all(after[g] == before[g] for g in t.edges - {e, f})


class TestLabelPermutation:
    @given(st.permutations(range(1, 9)), st.permutations(range(1, 9)))
    def test_transpositions_sort(self, a, b):
        ps = geom.convex_regular(9)
        t = hull_path(ps, (0, 8))
        pos = t.sorted_edges
        cur = LabelPermutation(pos, list(a))
        want = LabelPermutation(pos, list(b))
        swaps = cur.transpositions_to(want)
        assert len(swaps) <= 7
        for i, j in swaps:
            cur.swap(i, j)
        assert cur.labels == want.labels

    def test_positions_must_be_tree_edges(self):
        t = LabeledPlaneTree.of(star(geom.convex_regular(5), 0))
        with pytest.raises(ValueError):
            LabelPermutation.read(t, [(0, 1), (1, 2)])


class TestGadgets:
    def test_adjacent_three_on_star(self):
        ps = geom.convex_regular(6)
        t = relabel(star(ps, 0), [5, 4, 3, 2, 1])
        tr = swap_gadget(t, "adjacent3slides", ((0, 2), (0, 3)))
        assert len(tr) == 3 and all(s.kind is Kind.SLIDE for s in tr.steps)
        assert_swap(t, tr, (0, 2), (0, 3))

    def test_adjacent_requires_consecutive(self):
        t = LabeledPlaneTree.of(star(geom.convex_regular(6), 0))
        with pytest.raises(GadgetError):
            swap_gadget(t, "adjacent3slides", ((0, 1), (0, 3)))
        with pytest.raises(GadgetError):
            swap_gadget(t, "adjacent3slides", ((0, 1), (0, 1)))

    def test_quad_on_adjacent_hull_edges_is_a_triangle(self):
        ps = geom.convex_regular(7)
        t = LabeledPlaneTree.of(hull_path(ps, (0, 6)))
        tr = swap_gadget(t, "quad4rotations", ((1, 2), (2, 3)))
        assert len(tr) == 3
        assert_swap(t, tr, (1, 2), (2, 3))

    def test_quad_far_apart(self):
        ps = geom.convex_regular(7)
        t = LabeledPlaneTree.of(hull_path(ps, (0, 6)))
        tr = swap_gadget(t, "quad4rotations", ((0, 1), (4, 5)))
        assert len(tr) == 4
        assert all(s.kind.rank >= Kind.EMPTY_TRIANGLE.rank for s in tr.steps)
        assert_swap(t, tr, (0, 1), (4, 5))

    def test_quad_needs_hull_edges(self):
        t = LabeledPlaneTree.of(star(geom.convex_regular(6), 0))
        with pytest.raises(GadgetError):
            swap_gadget(t, "quad4rotations", ((0, 1), (0, 3)))

    def test_path_first_two(self):
        ps = geom.random_general(9, 4)
        q = ps.hull_order[0]
        path, P = radial_path(ps, q)
        t = LabeledPlaneTree.of(path)
        e, f = norm((P[0], P[1])), norm((P[1], P[2]))
        tr = swap_gadget(t, "path7rotations", (e, f), q)
        assert len(tr) <= 3
        assert_swap(t, tr, e, f)

    @pytest.mark.parametrize("seed", range(4))
    def test_path_all_pairs(self, seed):
        ps = geom.random_general(8, seed)
        q = ps.hull_order[0]
        path, P = radial_path(ps, q)
        t = relabel(path, random.Random(seed).sample(range(1, 8), 7))
        es = [norm((P[k], P[k + 1])) for k in range(7)]
        for e, f in itertools.combinations(es, 2):
            tr = swap_gadget(t, "path7rotations", (e, f), q)
            assert len(tr) <= 7
            assert all(s.kind.rank >= Kind.ROTATION.rank for s in tr.steps)
            assert_swap(t, tr, e, f)

    def test_path_requires_radial_path(self):
        t = LabeledPlaneTree.of(star(geom.convex_regular(6), 0))
        with pytest.raises(GadgetError):
            swap_gadget(t, "path7rotations", ((0, 1), (0, 2)))

    def test_unknown_kind(self):
        t = LabeledPlaneTree.of(star(geom.convex_regular(5), 0))
        with pytest.raises(ValueError):
            swap_gadget(t, "nope", ((0, 1), (0, 2)))


class TestRotations:
    def test_equal(self):
        t = shuffled_labels(random_tree(geom.random_general(8, 1), 1),
                            random.Random(1))
        assert len(labeled_transform_rotations(t, t)) == 0

    @pytest.mark.parametrize("seed", range(10))
    def test_five_points(self, seed):
        rng = random.Random(seed)
        ps = geom.random_general(5, seed)
        a = shuffled_labels(random_tree(ps, seed), rng)
        b = shuffled_labels(random_tree(ps, seed + 50), rng)
        tr = labeled_transform_rotations(a, b)
        assert len(tr) <= 33 and verify_trace(tr, b)

    @pytest.mark.parametrize("n", [4, 7, 12])
    def test_shifted_labels_on_radial_path(self, n):
        ps = geom.random_general(n, n)
        path, _ = radial_path(ps, ps.hull_order[0])
        a = relabel(path, range(1, n))
        b = relabel(path, [(l % (n - 1)) + 1 for l in range(1, n)])
        tr = labeled_transform_rotations(a, b)
        assert len(tr) <= 7 * (n - 2) and verify_trace(tr, b)

    @given(st.integers(2, 25), st.integers(0, 10**6))
    def test_bound(self, n, seed):
        rng = random.Random(seed)
        ps = geom.random_general(n, seed % 997)
        a = shuffled_labels(random_tree(ps, seed), rng)
        b = shuffled_labels(random_tree(ps, seed + 1), rng)
        tr = labeled_transform_rotations(a, b)
        assert len(tr) <= 11 * max(n - 2, 0) and verify_trace(tr, b)


class TestSimExchange:
    @pytest.mark.parametrize("compatible", [False, True])
    def test_triangle_swap_takes_three(self, compatible):
        # the shared edge cannot change label in place, so one side must
        # be parked on the free hull edge first
        s = star(geom.convex_regular(3), 0)
        a, b = relabel(s, [1, 2]), relabel(s, [2, 1])
        tr = labeled_sim_exchange_transform(a, b, compatible)
        assert len(tr) == 3 and verify_trace(tr, b)

    def test_equal(self):
        a, _ = shifted_stars(5)
        assert len(labeled_sim_exchange_transform(a, a)) == 0

    @pytest.mark.parametrize("n", [4, 5])
    def test_shifted_stars_exactly_three(self, n):
        a, b = shifted_stars(n)
        cert = labeled_sim_lower_check(a, b)
        assert cert.distance_at_least >= 3 and cert.witness is None
        tr = labeled_sim_exchange_transform(a, b)
        assert len(tr) == 3 and verify_trace(tr, b)

    def test_lower_check_needs_stars(self):
        ps = geom.convex_regular(5)
        a = LabeledPlaneTree.of(star(ps, 0))
        b = relabel(hull_path(ps, (0, 4)), [1, 2, 3, 4])
        with pytest.raises(ValueError):
            labeled_sim_lower_check(a, b)

    def test_both_hull_paths_three_compatible(self):
        # hull paths on the hexagon sharing no labelled hull edge
        ps = geom.convex_regular(6)
        a = relabel(hull_path(ps, (0, 5)), [1, 2, 3, 4, 5])
        for miss in sorted(ps.hull_edges):
            for perm in itertools.permutations(range(1, 6)):
                b = relabel(hull_path(ps, miss), perm)
                if set(a.label_map.items()) & set(b.label_map.items()):
                    continue
                tr = labeled_sim_exchange_transform(a, b, compatible=True)
                assert len(tr) <= 3 and verify_trace(tr, b)
                assert all(s.kind.rank >= Kind.COMPATIBLE.rank
                           for s in tr.steps)

    @pytest.mark.parametrize("compatible", [False, True])
    def test_convex_exhaustive_four(self, compatible):
        ps = geom.convex_regular(4)
        lts = [relabel(t, p) for t in trees_of(ps)
               for p in itertools.permutations(range(1, 4))]
        rng = random.Random(0)
        for a, b in rng.sample(list(itertools.product(lts, lts)), 600):
            tr = labeled_sim_exchange_transform(a, b, compatible)
            assert len(tr) <= (4 if compatible else 3)
            assert verify_trace(tr, b)

    @given(st.integers(4, 12), st.integers(0, 10**6), st.booleans())
    def test_general_position(self, n, seed, compatible):
        rng = random.Random(seed)
        ps = geom.random_general(n, seed % 991)
        a = shuffled_labels(random_tree(ps, seed), rng)
        b = shuffled_labels(random_tree(ps, seed + 1), rng)
        tr = labeled_sim_exchange_transform(a, b, compatible)
        if ps.position is geom.Position.CONVEX:
            bound = 4 if compatible else 3
        else:
            bound = max(3, 8 * ceil_log2(n)) if compatible else 3
        assert len(tr) <= bound and verify_trace(tr, b)
        want = Kind.COMPATIBLE if compatible else Kind.EXCHANGE
        for cur, s in zip(tr.trees(), tr.steps):
            assert s.kind.rank >= want.rank


class TestSimEmptyTriangle:
    def test_equal(self):
        a, _ = shifted_stars(6)
        assert len(labeled_sim_empty_tri_transform(a, a)) == 0

    @pytest.mark.parametrize("n", [4, 9, 16])
    def test_reversed_star_is_sorting_only(self, n):
        ps = geom.random_general(n, 3)
        p = ps.hull_order[0]
        s = star(ps, p)
        a = relabel(s, range(1, n))
        b = relabel(s, range(n - 1, 0, -1))
        tr = labeled_sim_empty_tri_transform(a, b)
        assert len(tr) <= 3 * (n - 1) and verify_trace(tr, b)

    def test_forty(self):
        rng = random.Random(40)
        ps = geom.random_general(40, 40)
        a = shuffled_labels(random_tree(ps, 1), rng)
        b = shuffled_labels(random_tree(ps, 2), rng)
        tr = labeled_sim_empty_tri_transform(a, b)
        assert len(tr) <= 12 * 40 and verify_trace(tr, b)

    def test_sort_rounds_use_disjoint_slides(self):
        ps = geom.random_general(10, 1)
        s = star(ps, ps.hull_order[0])
        tr = labeled_sim_empty_tri_transform(relabel(s, range(1, 10)),
                                             relabel(s, range(9, 0, -1)))
        for cur, step in zip(tr.trees(), tr.steps):
            assert step.kind is Kind.SLIDE and step.restricted


class TestConvexEmptyTriangle:
    def test_equal(self):
        a, _ = shifted_stars(6)
        assert len(labeled_cx_empty_tri_transform(a, a)) == 0
        assert len(labeled_cx_empty_tri_transform(a, a, True)) == 0

    def test_reversed_hull_path(self):
        ps = geom.convex_regular(8)
        p = hull_path(ps, (0, 7))
        a, b = relabel(p, range(1, 8)), relabel(p, range(7, 0, -1))
        tr = labeled_cx_empty_tri_transform(a, b)
        assert len(tr) <= 35 and verify_trace(tr, b)

    def test_simultaneous_sixty_four(self):
        rng = random.Random(64)
        ps = geom.random_convex(64, 1)
        a = shuffled_labels(random_tree(ps, 1), rng)
        b = shuffled_labels(random_tree(ps, 2), rng)
        tr = labeled_cx_empty_tri_transform(a, b, simultaneous=True)
        assert len(tr) <= 8 + 16 * 6 and verify_trace(tr, b)

    def test_non_convex(self):
        ps = geom.PointSet.of([(0, 0), (10, 0), (4, 9), (4, 3)])
        a = LabeledPlaneTree.of(star(ps, 3))
        with pytest.raises(ValueError):
            labeled_cx_empty_tri_transform(a, a)

    @given(st.integers(3, 30), st.integers(0, 10**6), st.booleans())
    def test_bounds(self, n, seed, sim):
        rng = random.Random(seed)
        ps = geom.random_convex(n, seed % 997)
        a = shuffled_labels(random_tree(ps, seed), rng)
        b = shuffled_labels(random_tree(ps, seed + 1), rng)
        tr = labeled_cx_empty_tri_transform(a, b, sim)
        bound = 8 + 16 * ceil_log2(n) if sim else 6 * n - 13
        assert len(tr) <= bound and verify_trace(tr, b)


class TestBalancedTree:
    def test_three(self):
        t = canonical_balanced_tree(geom.convex_regular(3), 0)
        assert sorted(t.degree(v) for v in range(3)) == [1, 1, 2]

    def test_seven(self):
        ps = geom.convex_regular(7)
        b = balanced_tree(ps, 0)
        order = angular_order(ps, 0)
        assert b.parent[order[2]] == 0
        assert sorted(b.tree.edges) == [(0, 3), (1, 2), (1, 3), (3, 5),
                                        (4, 5), (5, 6)]

    @pytest.mark.parametrize("n", [3, 8, 33, 64, 100])
    def test_depth_children_and_empty_triangles(self, n):
        ps = geom.random_convex(n, n)
        b = balanced_tree(ps, ps.hull_order[0])
        assert b.depth <= ceil_log2(n) + 1
        kids = {}
        for v, u in b.parent.items():
            kids.setdefault(u, []).append(v)
        assert all(len(c) <= 2 for c in kids.values())
        segs = [ps.segment(e) for e in b.tree.edges]
        for v, u in b.parent.items():
            g = b.parent.get(u)
            if g is None:
                continue
            assert not geom.triangle_blocked(ps[v], ps[u], ps[g], segs)

    def test_non_convex(self):
        with pytest.raises(ValueError):
            canonical_balanced_tree(geom.PointSet.of(
                [(0, 0), (10, 0), (4, 9), (4, 3)]))


class TestConvexSlides:
    def test_equal(self):
        a, _ = shifted_stars(7)
        assert len(labeled_cx_slides_transform(a, a)) == 0

    def test_two_labels_swapped_on_path(self):
        ps = geom.convex_regular(8)
        p = hull_path(ps, (0, 7))
        a = relabel(p, range(1, 8))
        b = relabel(p, [1, 2, 5, 4, 3, 6, 7])
        tr = labeled_cx_slides_transform(a, b)
        assert verify_trace(tr, b)
        assert all(s.kind is Kind.SLIDE for s in tr.steps)

    def test_thirty_two_simultaneous(self):
        rng = random.Random(32)
        ps = geom.random_convex(32, 32)
        a = shuffled_labels(random_tree(ps, 1), rng)
        b = shuffled_labels(random_tree(ps, 2), rng)
        tr = labeled_cx_slides_transform(a, b, simultaneous=True)
        bound = math.floor(240 * (math.log2(32) + 1)) + 3 * 31
        assert len(tr) <= bound and verify_trace(tr, b)

    @given(st.integers(3, 24), st.integers(0, 10**6), st.booleans())
    def test_bounds(self, n, seed, sim):
        rng = random.Random(seed)
        ps = geom.random_convex(n, seed % 997)
        a = shuffled_labels(random_tree(ps, seed), rng)
        b = shuffled_labels(random_tree(ps, seed + 1), rng)
        tr = labeled_cx_slides_transform(a, b, sim)
        if sim:
            bound = math.floor(240 * (math.log2(n) + 1)) + 3 * (n - 1)
        else:
            bound = 2 * (2 * n - 5) + 6 * (n - 2) * (ceil_log2(n) + 1)
        assert len(tr) <= bound and verify_trace(tr, b)
