"""Shared instance builders for the test-suite."""

import itertools
import random

from treemorph import geom, graphx
from treemorph.moves import Kind, SimMove, enumerate_neighbors, sim_move_valid
from treemorph.tree import LabeledPlaneTree, PlaneTree, random_tree


def trees_of(ps):
    return [graphx.mask_to_tree(ps, m) for m in graphx.enumerate_trees(ps)]


def shuffled_labels(t: PlaneTree, rng: random.Random) -> LabeledPlaneTree:
    labels = list(range(1, t.n))
    rng.shuffle(labels)
    return LabeledPlaneTree.of(t, dict(zip(t.sorted_edges, labels)))


def random_sim_slide(t: PlaneTree, k: int, rng: random.Random,
                     tries: int = 200) -> SimMove | None:
    """Combine k single slides of t into one valid simultaneous slide."""
    singles = enumerate_neighbors(t, Kind.SLIDE)
    if len(singles) < k:
        return None
    for _ in range(tries):
        pick = rng.sample(singles, k)
        old = [m.removed for m in pick]
        new = [m.inserted for m in pick]
        if len(set(old)) < k or len(set(new)) < k or set(old) & set(new):
            continue
        try:
            sim = SimMove(tuple((m.removed, m.inserted) for m in pick),
                          Kind.SLIDE)
        except ValueError:
            continue
        if sim_move_valid(t, sim):
            return sim
    return None


def sim_slide_instances(count: int, seed: int, max_pairs: int = 5):
    """Seeded stream of (tree, simultaneous slide) pairs with 2..max_pairs
    pairs, mixing convex and general position."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(6, 16)
        kind = rng.choice(["random_convex", "random_general"])
        ps = geom.generate(kind, {"n": n}, rng.randrange(10**6))
        t = random_tree(ps, rng.randrange(10**6))
        k = rng.randint(2, max_pairs)
        sim = random_sim_slide(t, k, rng)
        if sim is not None:
            out.append((t, sim))
    return out


SIM_NODE_CAP = 1500
LABELED_MAX_N = 5


def invariant_violations(ps, sim_cap: int = SIM_NODE_CAP,
                         labeled_max_n: int = LABELED_MAX_N,
                         samples: int = 20) -> list[str]:
    """Check the transition-graph invariants on one point set; returns a
    description of every violation."""
    from treemorph import xform
    from treemorph.trace import verify_trace

    bad = []
    kinds = list(Kind)
    single = {k: graphx.build_transition_graph(ps, k) for k in kinds}
    diam = {}
    for k, g in single.items():
        if not graphx.is_connected(g):
            bad.append(f"{k.value}: disconnected {graphx.component_sizes(g)}")
            continue
        diam[k] = graphx.diameter(g).diameter
    for a, b in zip(kinds, kinds[1:]):
        ea = {(i, j) for i, r in enumerate(single[a].adj) for j in r}
        eb = {(i, j) for i, r in enumerate(single[b].adj) for j in r}
        if not eb <= ea:
            bad.append(f"{b.value} edges not inside {a.value}")
        if a in diam and b in diam and diam[a] > diam[b]:
            bad.append(f"diam {a.value}={diam[a]} > {b.value}={diam[b]}")
    n_nodes = len(single[Kind.EXCHANGE])
    if n_nodes <= sim_cap:
        for k in kinds:
            g = graphx.build_transition_graph(ps, k, simultaneous=True)
            d = graphx.diameter(g).diameter
            if k in diam and d > diam[k]:
                bad.append(f"sim {k.value} diam {d} > single {diam[k]}")
            if k is Kind.EXCHANGE and n_nodes > 1 and d != 1:
                bad.append(f"sim exchange diam {d} != 1")
    if ps.n <= labeled_max_n:
        for k in kinds:
            g = graphx.build_transition_graph(ps, k, labeled=True)
            d = graphx.diameter(g).diameter
            if k in diam and d < diam[k]:
                bad.append(f"labeled {k.value} diam {d} < {diam[k]}")
    rng = random.Random(ps.n)
    ids = list(range(n_nodes))
    p = ps.hull_order[0]
    rot = single[Kind.ROTATION]
    target = rot.node_of(xform.star(ps, p))
    dist = graphx.bfs(rot, target)
    for i in rng.sample(ids, min(samples, n_nodes)):
        tr = xform.star_by_rotations(rot.tree(i), p)
        if not verify_trace(tr) or len(tr) < dist[i]:
            bad.append(f"rotation trace from node {i} beats BFS")
    if ps.position is geom.Position.CONVEX and ps.n >= 3:
        sl = single[Kind.SLIDE]
        for i, j in [(rng.choice(ids), rng.choice(ids))
                     for _ in range(samples)]:
            tr = xform.convex_transform_by_slides(sl.tree(i), sl.tree(j))
            if len(tr) < graphx.distance(sl, i, j):
                bad.append(f"slide trace {i}->{j} beats BFS")
    return bad


# criterion number -> PASS/FAIL line, printed by the conftest summary hook
ACCEPTANCE: dict[int, str] = {}
