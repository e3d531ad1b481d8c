import math
import random

import pytest

from lclavg import decomp as dc
from lclavg import tree as tr


def test_layer_order_paper_cases():
    assert dc.layer_less_than(dc.rake_layer(1, 2), dc.rake_layer(1, 3))
    assert dc.layer_less_than(dc.promoted_layer(2), dc.compress_layer(2))
    assert dc.layer_less_than(dc.compress_layer(1), dc.rake_layer(2, 1))
    assert dc.layer_less_than(dc.rake_layer(1, 3), dc.promoted_layer(1))
    assert not dc.layer_less_than(dc.rake_layer(2, 1), dc.compress_layer(1))
    with pytest.raises(ValueError):
        dc.layer_less_than(None, dc.rake_layer(1, 1))


def fresh_state(t, seed=0):
    return dc.DecompositionState(t, tr.assign_ids(t.node_count, seed).ids)


def test_rake_star():
    star = tr.tree_from_edges(4, [(0, 1), (0, 2), (0, 3)])
    state = fresh_state(star)
    dc.orienting_rake(state, 1, 1)
    for leaf in (1, 2, 3):
        assert state.layer[leaf] == dc.rake_layer(1, 1)
        assert state.parent_of(leaf) == 0
    assert state.is_free(0)


def test_rake_adjacent_degree_one_pair():
    t = tr.generate_path(2)
    state = fresh_state(t)
    dc.orienting_rake(state, 1, 1)
    smaller = min((0, 1), key=lambda v: state.ids[v])
    other = 1 - smaller
    assert state.layer[smaller] == dc.rake_layer(1, 1)
    assert state.is_free(other)
    # next wave the survivor rakes as an isolated node
    dc.orienting_rake(state, 1, 2)
    assert state.layer[other] == dc.rake_layer(1, 1)


def test_rake_empty_free_set_noop():
    t = tr.generate_path(3)
    state = fresh_state(t)
    dc.orienting_rake(state, 1, 5)
    free_before = state.free_count
    assert free_before == 0
    dc.orienting_rake(state, 2, 5)
    assert state.free_count == 0


def _all_free_path_state(n, seed=0):
    t = tr.generate_path(n)
    return t, fresh_state(t, seed)


def test_compress_below_threshold_untouched():
    ell = 2
    # degree-2 run of 4*ell+8 free nodes: two ends on top -> 4*ell+10 total
    t, state = _all_free_path_state(4 * ell + 10)
    dc.compress_with_slack(state, 1, ell)
    assert state.free_count == t.node_count


def test_compress_17_nodes_ell2():
    # an all-free path of 19 nodes has a 17-node run of free-degree-2 nodes
    # (the two path ends have free degree 1 and are not part of P)
    ell = 2
    t, state = _all_free_path_state(19)
    dc.compress_with_slack(state, 1, ell)
    # P = nodes 1..17; slack: 5 nodes each side stay free; inner 7 processed
    inner = list(range(6, 13))
    assert all(state.is_free(v) for v in range(6))
    assert all(state.is_free(v) for v in range(13, 19))
    assigned = [v for v in inner if not state.is_free(v)]
    assert assigned == inner
    # segments between Z nodes have 2..4 nodes
    z = [v for v in inner if state.layer[v] == dc.rake_layer(2, 1)]
    segs = []
    run = 0
    for v in inner:
        if v in z:
            if run:
                segs.append(run)
            run = 0
        else:
            assert state.layer[v] == dc.compress_layer(1)
            run += 1
    if run:
        segs.append(run)
    assert all(ell <= s <= 2 * ell for s in segs)


def test_compress_no_long_path_noop():
    t = tr.generate_complete_tree(2, 5)
    state = fresh_state(t)
    dc.orienting_rake(state, 1, 1)
    before = state.free_count
    dc.compress_with_slack(state, 1, 2)
    assert state.free_count == before


def test_quality_cases():
    star = tr.tree_from_edges(4, [(0, 1), (0, 2), (0, 3)])
    state = fresh_state(star)
    assert state.quality(0) == 0  # isolated free node: nothing assigned below
    dc.orienting_rake(state, 1, 1)
    assert state.quality(0) == 3  # free root with 3 raked leaves
    # assign the root: it becomes a local maximum -> quality 0
    state.assign(0, dc.rake_layer(1, 2))
    assert state.is_local_maximum(0)
    assert state.quality(0) == 0
    for leaf in (1, 2, 3):
        assert state.quality(leaf) == 0  # descendants of a local maximum


def test_promote_creates_local_maximum():
    # a long path: after initial rakes with small gamma, promote from free r
    ell = 1
    b, gamma = ell + 2, ell + 3
    t = tr.generate_path(30)
    state = fresh_state(t, seed=3)
    dc.orienting_rake(state, 1, gamma)
    free_before = [v for v in range(30) if state.is_free(v)]
    dc.promote_if_possible(state, 1, b)
    promoted = [v for v in range(30) if state.promoted[v]]
    if promoted:  # raked ends deep enough
        for v in promoted:
            assert state.layer[v] == dc.rake_layer(2, 1)
            assert state.is_local_maximum(v)
            assert state.marked[v]
        interiors = [
            v for v in range(30) if state.layer[v] == dc.promoted_layer(1)
        ]
        # interior count per promotion is b-1 = ell+1 nodes
        assert len(interiors) == (ell + 1) * len(promoted)
        verdict = dc.validate_partial_decomposition(t, state, gamma, ell)
        assert verdict, verdict


def test_promote_skips_shallow_roots():
    star = tr.tree_from_edges(4, [(0, 1), (0, 2), (0, 3)])
    state = fresh_state(star)
    dc.orienting_rake(state, 1, 1)
    dc.promote_if_possible(state, 1, 3)
    assert not any(state.promoted)


def test_promote_guard_compress_label():
    # build a hand state where the path to the best candidate crosses a
    # compress layer: guard must refuse
    t = tr.generate_path(6)
    state = fresh_state(t, seed=1)
    # orient a chain 0<-1<-2<-3 hanging under free node 4 ... assign layers
    state.assign(0, dc.rake_layer(1, 1))
    state.orient(1, 0)
    state.assign(1, dc.compress_layer(1))
    state.orient(2, 1)
    state.assign(2, dc.rake_layer(2, 2))
    state.orient(3, 2)
    state.assign(3, dc.rake_layer(2, 3))
    state.orient(4, 3)
    dc.promote_if_possible(state, 2, 3)
    assert not any(state.promoted)


def test_single_node_decomposition():
    t = tr.generate_path(1)
    state, trace = dc.compute_decomposition(t, ell=2)
    assert state.layer[0] == dc.rake_layer(1, 1)
    assert len(trace) == 1


def sweep_instances():
    yield tr.generate_path(300), 2
    yield tr.generate_complete_tree(2, 8), 2
    yield tr.generate_random_tree(400, 4, seed=2), 2
    yield tr.generate_random_tree(300, 3, seed=5), 1
    yield tr.generate_hierarchical_worst_case(2, 15).tree, 2


@pytest.mark.parametrize("idx", range(5))
def test_validator_accepts_after_every_subroutine(idx):
    t, ell = list(sweep_instances())[idx]
    gamma = ell + 3
    failures = []

    def hooks(stage, it, state):
        verdict = dc.validate_partial_decomposition(t, state, gamma, ell)
        if not verdict:
            failures.append((stage, it, verdict))

    state, trace = dc.compute_decomposition(t, ell, hooks=hooks)
    assert not failures, failures[0]
    assert state.free_count == 0


def test_validator_rejects_adjacent_same_sublayer():
    t = tr.generate_path(3)
    state = fresh_state(t)
    state.assign(0, dc.rake_layer(1, 1))
    state.assign(1, dc.rake_layer(1, 1))
    verdict = dc.validate_partial_decomposition(t, state, 5, 2)
    assert not verdict and verdict.property_violated == 3


def test_validator_rejects_long_compress_component():
    ell = 2
    t = tr.generate_path(2 * ell + 3)
    state = fresh_state(t)
    for v in range(2 * ell + 1):
        state.assign(v, dc.compress_layer(1))
    state.assign(2 * ell + 1, dc.rake_layer(2, 1))
    verdict = dc.validate_partial_decomposition(t, state, 5, ell)
    assert not verdict and verdict.property_violated == 1


def test_validator_accepts_all_free():
    t = tr.generate_path(10)
    state = fresh_state(t)
    assert dc.validate_partial_decomposition(t, state, 5, 2)


def test_free_decay_on_path():
    n = 10_000
    t = tr.generate_path(n)
    state, trace = dc.compute_decomposition(t, ell=2)
    by_iter = {tt.iteration: tt.free_count for tt in trace}
    for it in sorted(by_iter):
        m = it // 5
        if m >= 1 and it % 5 == 0:
            assert by_iter[it] <= n / 2**m, (it, by_iter[it])


def test_iterations_logarithmic():
    for n in (1000, 10_000):
        t = tr.generate_path(n)
        _, trace = dc.compute_decomposition(t, ell=2)
        assert trace[-1].iteration <= 10 * math.log2(n) + 10


def test_quality_incremental_matches_oracle():
    rng = random.Random(9)
    for seed in range(4):
        t = tr.generate_random_tree(150, 4, seed=seed)
        mismatches = []

        def hooks(stage, it, state):
            for v in rng.sample(range(t.node_count), 40):
                if state.quality_fast(v) != state.quality(v):
                    mismatches.append((stage, it, v))

        dc.compute_decomposition(t, 2, hooks=hooks)
        assert not mismatches, mismatches[:5]


def test_orientation_write_once_and_single_parent():
    t = tr.generate_random_tree(200, 4, seed=7)
    state, _ = dc.compute_decomposition(t, 2)
    # every node has at most one parent; parents index valid edges
    for v in range(t.node_count):
        p = state.parent_of(v)
        if p is not None:
            assert v in state.children[p]
    with pytest.raises(dc.DecompositionError):
        # re-orienting any already-parented node must fail
        v = next(v for v in range(t.node_count) if state.parent_of(v) is not None)
        state.orient(t.adjacency[v][0], v)


def test_promoted_nodes_are_local_maxima_at_promotion():
    seen = []

    def hooks(stage, it, state):
        if stage == "promote":
            for v in range(state.tree.node_count):
                if state.promoted[v] and v not in seen:
                    seen.append(v)
                    assert state.is_local_maximum(v)

    t = tr.generate_complete_tree(2, 12)
    dc.compute_decomposition(t, 2, hooks=hooks)
    assert seen  # binary trees must promote


def test_compress_nodes_deep_after_rake():
    """After compress + the following rake, free nodes are >= gamma away
    from the fresh compress layer."""
    ell = 2
    gamma = ell + 3
    t = tr.generate_path(200)
    state = fresh_state(t)
    dc.orienting_rake(state, 1, gamma)
    dc.compress_with_slack(state, 1, ell)
    dc.orienting_rake(state, 2, gamma)
    compress_nodes = [
        v for v in range(t.node_count) if state.layer[v] == dc.compress_layer(1)
    ]
    free_nodes = [v for v in range(t.node_count) if state.is_free(v)]
    if compress_nodes and free_nodes:
        dist = {v: 0 for v in compress_nodes}
        frontier = compress_nodes
        d = 0
        while frontier and d < gamma:
            nxt = []
            for u in frontier:
                for w in t.adjacency[u]:
                    if w not in dist:
                        dist[w] = d + 1
                        nxt.append(w)
            frontier = nxt
            d += 1
        assert not any(v in dist and dist[v] < gamma for v in free_nodes)


def test_trace_csv_and_dump():
    t = tr.generate_path(40)
    state, trace = dc.compute_decomposition(t, 2)
    csv = dc.dump_trace_csv(trace)
    assert csv.startswith("iteration,free_count")
    dump = dc.dump_state(state)
    assert len(dump.strip().splitlines()) == 40
