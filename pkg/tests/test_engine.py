from fractions import Fraction

import pytest

from lclavg import engine as eng
from lclavg import tree as tr


class OutputIdAtInit:
    def init(self, ctx):
        return (None, ctx.id, ctx.id, None)

    def step(self, ctx, state, rnd, nbr_publics):
        raise AssertionError("should never step")


class EndpointWave:
    """Terminate once an endpoint of the path is visible: node publishes
    whether it knows an endpoint; output = round at which it learned."""

    def init(self, ctx):
        knows = ctx.degree <= 1
        return (knows, knows, 0 if knows else None, None)

    def step(self, ctx, state, rnd, nbr_publics):
        knows = state or any(nbr_publics)
        return (knows, knows, rnd if knows else None, None)


class NeverChanges:
    """A node that waits for a neighbor signal that never comes."""

    def init(self, ctx):
        return (None, 0, None, None)

    def step(self, ctx, state, rnd, nbr_publics):
        return (None, 0, None, None)


def ids_for(t, seed=0):
    return tr.assign_ids(t.node_count, seed).ids


def test_output_at_init():
    t = tr.generate_path(6)
    res = eng.run_simulation(t, ids_for(t), OutputIdAtInit())
    assert res.termination_round == [0] * 6
    assert res.rounds_total == 0
    assert eng.node_averaged_complexity(res) == 0


def test_endpoint_wave_hand_simulation():
    t = tr.generate_path(5)
    res = eng.run_simulation(t, ids_for(t), EndpointWave())
    assert res.termination_round == [0, 1, 2, 1, 0]


def test_determinism_same_seed():
    t = tr.generate_random_tree(60, 3, seed=1)
    ids = ids_for(t, 2)
    r1 = eng.run_simulation(t, ids, EndpointWave(), seed=5)
    r2 = eng.run_simulation(t, ids, EndpointWave(), seed=5)
    assert r1.termination_round == r2.termination_round
    assert r1.outputs == r2.outputs


def test_event_mode_matches_full_mode():
    t = tr.generate_random_tree(80, 4, seed=3)
    ids = ids_for(t, 1)
    r1 = eng.run_simulation(t, ids, EndpointWave(), mode="event")
    r2 = eng.run_simulation(t, ids, EndpointWave(), mode="full")
    assert r1.termination_round == r2.termination_round
    assert r1.outputs == r2.outputs


def test_round_limit_exceeded():
    t = tr.generate_path(4)
    with pytest.raises(eng.SimulationError):
        eng.run_simulation(t, ids_for(t), NeverChanges(), round_limit=10, mode="full")


def test_deadlock_detected_in_event_mode():
    t = tr.generate_path(4)
    with pytest.raises(eng.SimulationError):
        eng.run_simulation(t, ids_for(t), NeverChanges(), round_limit=10**6)


def test_node_averaged_examples():
    res = eng.RunResult([3, 1, 2], [None] * 3, 3)
    assert eng.node_averaged_complexity(res) == 2
    res = eng.RunResult([7] * 5, [None] * 5, 7)
    assert eng.node_averaged_complexity(res) == 7
    res = eng.RunResult([0, 0, 0, 4], [None] * 4, 4)
    assert eng.node_averaged_complexity(res) == 1
    res = eng.RunResult([1, 0], [None] * 2, 1)
    assert eng.node_averaged_complexity(res) == Fraction(1, 2)


def test_duplicate_ids_rejected():
    t = tr.generate_path(3)
    with pytest.raises(eng.SimulationError):
        eng.run_simulation(t, (1, 1, 2), OutputIdAtInit())


def test_coloring_single_node():
    t = tr.generate_path(1)
    col, rounds = eng.compute_distance_coloring(t, (5,), 2)
    assert col.colors == (0,) and rounds == [0]


@pytest.mark.parametrize("n,s", [(50, 1), (50, 2), (200, 2), (120, 3)])
def test_coloring_valid_paths(n, s):
    t = tr.generate_path(n)
    col, rounds = eng.compute_distance_coloring(t, ids_for(t, n), s)
    assert eng.validate_distance_coloring(t, col)
    assert max(col.colors) < col.palette_size
    assert col.palette_size == eng.power_degree_bound(2, s) + 1


@pytest.mark.parametrize("seed", [0, 1])
def test_coloring_valid_trees(seed):
    t = tr.generate_random_tree(300, 3, seed=seed)
    col, rounds = eng.compute_distance_coloring(t, ids_for(t, seed), 2)
    assert eng.validate_distance_coloring(t, col)


def test_coloring_rounds_constant_in_n():
    r_by_n = {}
    for n in (2**8, 2**10):
        t = tr.generate_path(n)
        _, rounds = eng.compute_distance_coloring(t, ids_for(t, n), 2)
        r_by_n[n] = max(rounds)
    assert abs(r_by_n[2**10] - r_by_n[2**8]) <= 2


def test_coloring_event_matches_full():
    t = tr.generate_path(40)
    ids = ids_for(t, 4)
    c1, r1 = eng.compute_distance_coloring(t, ids, 2, mode="event")
    c2, r2 = eng.compute_distance_coloring(t, ids, 2, mode="full")
    assert c1.colors == c2.colors
    assert r1 == r2


def test_locality_law_coloring():
    """A node's color depends only on its radius-T neighborhood: rebuild the
    world outside radius T of a sampled node and compare its output."""
    t = tr.generate_path(60)
    ids = list(ids_for(t, 7))
    col, rounds = eng.compute_distance_coloring(t, tuple(ids), 2)
    v = 30
    radius = rounds[v]
    # change all ids strictly outside the radius
    ids2 = list(ids)
    for u in range(t.node_count):
        if abs(u - v) > radius:
            ids2[u] = ids[u] ^ (1 << 40)
    if len(set(ids2)) == len(ids2):
        col2, _ = eng.compute_distance_coloring(t, tuple(ids2), 2)
        assert col2.colors[v] == col.colors[v]
