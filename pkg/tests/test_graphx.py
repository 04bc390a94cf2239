import itertools
import json
import math
import struct

import pytest

from helpers import invariant_violations, trees_of
from treemorph import geom, graphx
from treemorph.moves import Kind
from treemorph.trace import Trace
from treemorph.tree import validate_tree
from treemorph.xform import (convex_transform_by_slides, hull_path,
                             sim_rotation_lb_pair, star)


def cayley_plane_count(ps):
    """Brute force: all (n-1)-subsets of pairs that form a plane tree."""
    count = 0
    for es in itertools.combinations(ps.pairs, ps.n - 1):
        try:
            validate_tree(ps, es)
        except ValueError:
            continue
        count += 1
    return count


class TestEnumeration:
    @pytest.mark.parametrize("n,want", [(3, 3), (4, 12), (5, 55), (6, 273),
                                        (7, 1428), (8, 7752)])
    def test_convex_counts(self, n, want):
        assert graphx.convex_count(n) == want
        assert len(graphx.enumerate_trees(geom.convex_regular(n))) == want

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_brute_force(self, n):
        ps = geom.convex_regular(n)
        assert cayley_plane_count(ps) == len(graphx.enumerate_trees(ps))

    @pytest.mark.parametrize("seed", range(3))
    def test_brute_force_general(self, seed):
        ps = geom.random_general(5, seed)
        assert cayley_plane_count(ps) == len(graphx.enumerate_trees(ps))

    def test_labeled_multiplies(self):
        ps = geom.convex_regular(4)
        assert len(graphx.enumerate_trees(ps, labeled=True)) == 12 * 6

    def test_cap(self):
        with pytest.raises(graphx.CapExceeded) as ei:
            graphx.enumerate_trees(geom.convex_regular(7), cap=100)
        assert ei.value.count > 100
        with pytest.raises(graphx.CapExceeded):
            graphx.enumerate_trees(geom.convex_regular(6), labeled=True,
                                   cap=10**4)

    def test_keys_unique(self):
        ps = geom.random_general(6, 1)
        g = graphx.build_transition_graph(ps, Kind.EXCHANGE)
        assert len({g.key(i) for i in range(len(g))}) == len(g)


class TestGraphs:
    def test_sim_exchange_complete(self):
        ps = geom.random_general(5, 2)
        g = graphx.build_transition_graph(ps, Kind.EXCHANGE,
                                          simultaneous=True)
        assert all(len(a) == len(g) - 1 for a in g.adj)

    @pytest.mark.parametrize("n", [5, 6, 7])
    def test_slide_degree_uniform(self, n):
        g = graphx.build_transition_graph(geom.convex_regular(n), Kind.SLIDE)
        assert {len(a) for a in g.adj} == {2 * (n - 2)}

    def test_hierarchy(self):
        ps = geom.random_general(6, 0)
        kinds = list(Kind)
        gs = [graphx.build_transition_graph(ps, k) for k in kinds]
        for a, b in zip(gs, gs[1:]):
            assert all(set(rb) <= set(ra) for ra, rb in zip(a.adj, b.adj))

    def test_distance_zero_and_unreachable(self):
        ps = geom.convex_regular(5)
        g = graphx.build_transition_graph(ps, Kind.SLIDE)
        assert graphx.distance(g, 3, 3) == 0
        cut = graphx.TransitionGraph(ps, Kind.SLIDE, False, False, False,
                                     g.nodes, [[] for _ in g.nodes])
        with pytest.raises(graphx.Unreachable):
            graphx.distance(cut, 0, 1)
        with pytest.raises(graphx.Disconnected):
            graphx.diameter(cut)

    def test_hexagon_pair_distances(self):
        t1, t2 = sim_rotation_lb_pair()
        g = graphx.build_transition_graph(t1.ps, Kind.ROTATION,
                                          simultaneous=True)
        assert graphx.distance(g, t1, t2) >= 3

    def test_sim_empty_triangle_hexagon(self):
        ps = geom.convex_regular(6)
        g = graphx.build_transition_graph(ps, Kind.EMPTY_TRIANGLE,
                                          simultaneous=True)
        assert graphx.diameter(g).diameter in (3, 4)

    def test_slide_diameter_five(self):
        g = graphx.build_transition_graph(geom.convex_regular(5), Kind.SLIDE)
        res = graphx.diameter(g)
        assert 2 <= res.diameter <= 5
        a, b = res.witness
        assert graphx.distance(g, a, b) == res.diameter
        approx = graphx.diameter(g, approximate=True)
        assert not approx.exact and approx.diameter <= res.diameter

    def test_csv_and_exports(self):
        g = graphx.build_transition_graph(geom.convex_regular(5), Kind.SLIDE)
        row = graphx.diameter_csv_row(g, graphx.diameter(g))
        fields = row.strip().split(",")
        assert fields[:6] == ["5", "convex", "slide", "0", "0", "55"]
        assert graphx.CSV_HEADER.count(",") == row.count(",")
        doc = json.loads(g.to_json())
        assert len(doc["nodes"]) == 55
        blob = g.to_csr()
        (n,) = struct.unpack_from("<I", blob)
        offs = struct.unpack_from(f"<{n + 1}I", blob, 4)
        assert n == 55 and offs[-1] == 2 * g.edge_count

    def test_threads_env(self, monkeypatch):
        ps = geom.convex_regular(6)
        base = graphx.build_transition_graph(ps, Kind.ROTATION).adj
        monkeypatch.setenv("TREEMORPH_THREADS", "4")
        assert graphx.threads() == 4
        assert graphx.build_transition_graph(ps, Kind.ROTATION).adj == base
        monkeypatch.setenv("TREEMORPH_THREADS", "junk")
        assert graphx.threads() == 1

    def test_trace_never_beats_bfs(self):
        ps = geom.convex_regular(7)
        g = graphx.build_transition_graph(ps, Kind.SLIDE)
        tr = convex_transform_by_slides(star(ps, 0), hull_path(ps, (3, 4)))
        assert graphx.trace_at_least_distance(g, tr)


@pytest.mark.parametrize("n", range(3, 7))
def test_invariants_convex(n):
    assert invariant_violations(geom.convex_regular(n)) == []


@pytest.mark.parametrize("n,seed", [(4, 0), (5, 1), (6, 2)])
def test_invariants_general(n, seed):
    assert invariant_violations(geom.random_general(n, seed)) == []
