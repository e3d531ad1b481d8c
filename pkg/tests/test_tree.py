import pytest

from lclavg import tree as tr


def test_path_degenerate():
    t = tr.generate_path(1)
    assert t.node_count == 1 and t.edge_count == 0
    t2 = tr.generate_path(2)
    assert t2.edges() == [(0, 1)]


def test_path_degrees():
    t = tr.generate_path(5)
    assert [t.degree(v) for v in range(5)] == [1, 2, 2, 2, 1]


def test_complete_tree_counts():
    assert tr.generate_complete_tree(2, 0).node_count == 1
    assert tr.generate_complete_tree(2, 3).node_count == 15
    assert tr.generate_complete_tree(3, 2).node_count == 13
    t = tr.generate_complete_tree(2, 4)
    assert t.max_degree == 3


def test_random_tree_invariants():
    t = tr.generate_random_tree(1000, 4, seed=7)
    t.validate()
    assert t.max_degree <= 4
    assert t.edge_count == 999
    t2 = tr.generate_random_tree(1000, 4, seed=7)
    assert t.adjacency == t2.adjacency
    t3 = tr.generate_random_tree(1000, 4, seed=8)
    assert t.adjacency != t3.adjacency
    assert tr.generate_random_tree(1, 4, seed=0).node_count == 1


@pytest.mark.parametrize("n", [1, 2, 5, 17, 40])
def test_generators_validate(n):
    tr.generate_path(n).validate()
    tr.generate_random_tree(n, 3, seed=n).validate()


def test_subdivide_single_edge():
    bt = tr.subdivide_edges(tr.generate_path(2))
    assert bt.node_count == 3
    assert bt.is_black(2) and not bt.is_black(0)
    assert bt.tree.degree(2) == 2


def test_subdivide_path_count():
    for n in (2, 5, 9):
        bt = tr.subdivide_edges(tr.generate_path(n))
        assert bt.node_count == 2 * n - 1


def test_subdivide_star():
    star = tr.tree_from_edges(4, [(0, 1), (0, 2), (0, 3)])
    bt = tr.subdivide_edges(star)
    assert bt.node_count == 7
    for b in range(4, 7):
        assert bt.tree.degree(b) == 2


def test_subdivide_doubles_distances():
    t = tr.generate_random_tree(60, 4, seed=3)
    bt = tr.subdivide_edges(t)
    for src in (0, 10, 30):
        d1 = tr.tree_distances_from(t, src)
        d2 = tr.tree_distances_from(bt.tree, src)
        for v in range(t.node_count):
            assert d2[v] == 2 * d1[v]


def test_ids_distinct_and_deterministic():
    ids = tr.assign_ids(500, seed=1)
    assert len(set(ids.ids)) == 500
    assert tr.assign_ids(500, seed=1).ids == ids.ids
    assert tr.assign_ids(500, seed=2).ids != ids.ids


def test_read_write_roundtrip():
    t = tr.read_tree("2\n0 1\n")
    assert t.node_count == 2
    for gen in (tr.generate_path(7), tr.generate_random_tree(50, 3, seed=5)):
        text = tr.write_tree(gen)
        assert tr.write_tree(tr.read_tree(text)) == text


def test_read_errors():
    with pytest.raises(tr.CycleError):
        tr.read_tree("3\n0 1\n0 2\n1 2\n")
    with pytest.raises(tr.MalformedLineError):
        tr.read_tree("3\n0 1 2\n")
    with pytest.raises(tr.MalformedLineError):
        tr.read_tree("x\n")
    with pytest.raises(tr.DuplicateEdgeError):
        tr.read_tree("3\n0 1\n0 1\n")
    with pytest.raises(tr.DisconnectedError):
        tr.read_tree("4\n0 1\n2 3\n0 2\n".replace("0 2\n", ""))


def peeling_levels(t: tr.Tree, k: int) -> list[int]:
    """Independent sequential peeling oracle: level i = degree <= 2 in the
    graph remaining at stage i; survivors after k stages get level k+1."""
    alive = [True] * t.node_count
    deg = [t.degree(v) for v in range(t.node_count)]
    level = [k + 1] * t.node_count
    for i in range(1, k + 1):
        peel = [v for v in range(t.node_count) if alive[v] and deg[v] <= 2]
        for v in peel:
            level[v] = i
            alive[v] = False
        for v in peel:
            for u in t.adjacency[v]:
                if alive[u]:
                    deg[u] -= 1
    return level


def test_hierarchical_k1_is_path():
    inst = tr.generate_hierarchical_worst_case(1, 10)
    assert inst.tree.node_count == 10
    assert sorted(inst.tree.degree(v) for v in range(10))[-1] == 2


def test_hierarchical_k2_count():
    inst = tr.generate_hierarchical_worst_case(2, 100)
    assert inst.tree.node_count == 100 + 100 * 100


@pytest.mark.parametrize("k,s", [(2, 5), (2, 20), (2, 50), (3, 5), (3, 12)])
def test_hierarchical_levels_match_peeling(k, s):
    inst = tr.generate_hierarchical_worst_case(k, s)
    inst.tree.validate()
    oracle = peeling_levels(inst.tree, k)
    assert oracle == inst.construction_level


def test_hierarchical_k2_levels_small():
    inst = tr.generate_hierarchical_worst_case(2, 100)
    oracle = peeling_levels(inst.tree, 2)
    assert oracle == inst.construction_level
    spine = [v for v, l in enumerate(inst.construction_level) if l == 2]
    assert len(spine) == 100
