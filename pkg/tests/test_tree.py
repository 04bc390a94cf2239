import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from treemorph import geom, graphx
from treemorph.tree import (BadEdgeError, CrossingError, DisconnectedError,
                            EdgeCountError, LabeledPlaneTree, LabelError,
                            PlaneTree, PositionError, ReconstructionError,
                            TreeError, build_dual_tree, canonical_key,
                            random_tree, rlg_build, rlg_reconstruct,
                            tree_from_json, validate_tree)
from treemorph.xform import hull_path, star

SQ = geom.PointSet.of([(0, 0), (1, 0), (1, 1), (0, 1)])


def all_trees(n):
    ps = geom.convex_regular(n)
    return ps, [graphx.mask_to_tree(ps, m) for m in graphx.enumerate_trees(ps)]


def dihedral(t, n):
    """Every rotation/reflection image of t's labelled edge map on the
    regular n-gon, whose hull order is 0..n-1."""
    lm = t.label_map
    out = set()
    for k in range(n):
        for refl in (False, True):
            f = (lambda v: (k - v) % n) if refl else (lambda v: (v + k) % n)
            out.add(frozenset((tuple(sorted((f(a), f(b)))), l)
                              for (a, b), l in lm.items()))
    return out


def as_set(t):
    return frozenset(t.label_map.items())


class TestValidate:
    def test_path(self):
        t = validate_tree(SQ, [(0, 1), (1, 2), (2, 3)])
        assert isinstance(t, PlaneTree) and t.n == 4

    def test_crossing_names_offenders(self):
        with pytest.raises(CrossingError) as ei:
            validate_tree(SQ, [(0, 2), (1, 3), (0, 1)])
        assert set(ei.value.pair) == {(0, 2), (1, 3)}

    def test_count(self):
        with pytest.raises(EdgeCountError):
            validate_tree(SQ, [(0, 1), (1, 2), (0, 1)])
        with pytest.raises(EdgeCountError):
            validate_tree(SQ, [(0, 1), (1, 2)])

    def test_disconnected(self):
        ps = geom.convex_regular(5)
        with pytest.raises(DisconnectedError):
            validate_tree(ps, [(0, 1), (1, 2), (0, 2), (3, 4)])

    def test_bad_edges(self):
        with pytest.raises(BadEdgeError):
            validate_tree(SQ, [(0, 0), (1, 2), (2, 3)])
        with pytest.raises(BadEdgeError):
            validate_tree(SQ, [(0, 9), (1, 2), (2, 3)])

    def test_labels(self):
        t = validate_tree(SQ, [(0, 1), (1, 2), (2, 3)], [3, 1, 2])
        assert t.label((0, 1)) == 3
        with pytest.raises(LabelError):
            validate_tree(SQ, [(0, 1), (1, 2), (2, 3)], [1, 1, 2])

    def test_degenerate_set_rejected(self):
        ps = geom.PointSet.of([(0, 0), (1, 1), (2, 2)])
        with pytest.raises(PositionError):
            validate_tree(ps, [(0, 1), (1, 2)])

    def test_json_labels_stay_aligned(self):
        t = validate_tree(SQ, [(2, 3), (0, 1), (1, 2)], [1, 2, 3])
        again = tree_from_json(SQ, t.to_json())
        assert again == t and again.label((2, 3)) == 1


class TestCanonicalKey:
    def test_examples(self):
        a = validate_tree(SQ, [(0, 1), (1, 2), (2, 3)])
        b = validate_tree(SQ, [(2, 3), (1, 2), (0, 1)])
        s = validate_tree(SQ, [(0, 1), (0, 2), (0, 3)])
        assert canonical_key(a) == canonical_key(b) != canonical_key(s)
        la = LabeledPlaneTree.of(a, {(0, 1): 1, (1, 2): 2, (2, 3): 3})
        lb = LabeledPlaneTree.of(a, {(0, 1): 2, (1, 2): 1, (2, 3): 3})
        assert canonical_key(la) != canonical_key(lb)

    def test_bit_order_is_lexicographic(self):
        t = validate_tree(SQ, [(0, 1), (0, 2), (0, 3)])
        # pairs 01,02,03,12,13,23 -> bits 0,1,2
        assert canonical_key(t) == bytes([0b111])

    @pytest.mark.parametrize("n", [5, 6, 7])
    def test_injective(self, n):
        _, ts = all_trees(n)
        assert len({canonical_key(t) for t in ts}) == len(ts)


class TestDualTree:
    def test_hull_path_is_one_cell(self):
        ps = geom.convex_regular(6)
        d = build_dual_tree(hull_path(ps, (0, 5)), (0, 5))
        assert len(d.cells) == 1 and d.cells[0].n_i == 6

    def test_star_on_hexagon(self):
        ps = geom.convex_regular(6)
        d = build_dual_tree(star(ps, 0))
        assert len(d.cells) == 4
        assert all(c.n_i == 3 for c in d.cells)

    def test_root_must_be_missing_hull_edge(self):
        ps = geom.convex_regular(6)
        t = hull_path(ps, (0, 5))
        with pytest.raises(TreeError):
            build_dual_tree(t, (0, 1))
        with pytest.raises(TreeError):
            build_dual_tree(t, (0, 3))

    def test_non_convex_rejected(self):
        ps = geom.PointSet.of([(0, 0), (4, 0), (0, 4), (1, 1)])
        t = validate_tree(ps, [(0, 3), (1, 3), (2, 3)])
        with pytest.raises(PositionError):
            build_dual_tree(t)

    @pytest.mark.parametrize("n", range(3, 9))
    def test_cell_identity_and_structure(self, n):
        ps, ts = all_trees(n)
        hull = ps.hull_edges
        for t in ts:
            d = build_dual_tree(t)
            assert sum(c.n_i - 2 for c in d.cells) == n - 2
            assert len(d.cells) == len(hull - t.edges)
            assert len(d.adjacency) == len(d.cells) - 1
            for i, c in enumerate(d.cells):
                assert c.hull_edge in hull and c.hull_edge not in t.edges
                assert set(c.tree_edges) <= t.edges
                assert (c.parent_edge is None) == (i == d.root)

    def test_fourteen_points_seven_cells(self):
        # seven hull edges kept out of the tree give seven cells
        ps = geom.convex_regular(14)
        edges = [(0, 1), (0, 2), (2, 3), (2, 4), (4, 5), (4, 6), (6, 7),
                 (0, 8), (8, 9), (8, 10), (10, 11), (10, 12), (12, 13)]
        t = validate_tree(ps, edges)
        assert len(build_dual_tree(t).cells) == 7


class TestReducedLineGraph:
    def test_hull_path_is_a_path(self):
        ps = geom.convex_regular(7)
        g = rlg_build(LabeledPlaneTree.of(hull_path(ps, (0, 6))))
        degs = sorted(g.degree(v) for v in g.vertices)
        assert degs == [1, 1] + [2] * 4
        assert len(g.adjacency) == 5

    @pytest.mark.parametrize("n", range(3, 9))
    def test_shape_on_all_trees(self, n):
        ps, ts = all_trees(n)
        for t in ts:
            g = rlg_build(LabeledPlaneTree.of(t))
            assert len(g.vertices) == n - 1 and len(g.adjacency) == n - 2
            for v in g.vertices:
                tags = [k for (u, _), k in g.tags if u == v]
                assert len(set(tags)) == len(tags) == g.degree(v) <= 4
                assert set(tags) <= {1, 2, 3, 4}

    def test_compact_tags_are_one_to_deg(self):
        ps, ts = all_trees(6)
        for t in ts:
            g = rlg_build(LabeledPlaneTree.of(t), tags="compact")
            for v in g.vertices:
                tags = sorted(k for (u, _), k in g.tags if u == v)
                assert tags == list(range(1, g.degree(v) + 1))

    @pytest.mark.parametrize("n", [5, 6])
    def test_star_and_path_roundtrip(self, n):
        ps = geom.convex_regular(n)
        for t in (star(ps, 0), hull_path(ps, (0, n - 1))):
            lt = LabeledPlaneTree.of(t)
            back = rlg_reconstruct(rlg_build(lt), n)
            assert as_set(back) in dihedral(lt, n)

    @pytest.mark.parametrize("n", range(3, 8))
    def test_roundtrip_all_trees_identity_labels(self, n):
        ps, ts = all_trees(n)
        for t in ts:
            lt = LabeledPlaneTree.of(t)
            back = rlg_reconstruct(rlg_build(lt), n)
            assert as_set(back) in dihedral(lt, n)

    @given(st.integers(4, 8), st.integers(0, 10**6))
    def test_roundtrip_random_labels(self, n, seed):
        rng = random.Random(seed)
        ps = geom.convex_regular(n)
        t = random_tree(ps, seed)
        labels = list(range(1, n))
        rng.shuffle(labels)
        lt = LabeledPlaneTree.of(t, dict(zip(t.sorted_edges, labels)))
        back = rlg_reconstruct(rlg_build(lt), n)
        assert as_set(back) in dihedral(lt, n)
        assert rlg_build(back) == rlg_build(lt)

    def test_wrong_size_rejected(self):
        ps = geom.convex_regular(5)
        g = rlg_build(LabeledPlaneTree.of(star(ps, 0)))
        with pytest.raises(ReconstructionError):
            rlg_reconstruct(g, 6)


@given(st.integers(3, 40), st.integers(0, 10**6))
def test_random_tree_is_plane(n, seed):
    ps = geom.random_general(n, seed % 50)
    t = random_tree(ps, seed)
    assert validate_tree(ps, t.edges) == t
