"""Tree structures, instance generators, and tree file I/O.

All experiments run on bounded-degree trees.  A ``Tree`` is an immutable
adjacency structure over nodes ``0..n-1`` with deterministic port order
(neighbors listed ascending).  ``BipartiteTree`` is the edge-subdivided
variant used by the labeling machinery: original nodes stay white, one
black node is inserted in the middle of every original edge.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field


class TreeError(ValueError):
    """Base class for tree construction/parsing failures."""


class MalformedLineError(TreeError):
    pass


class DuplicateEdgeError(TreeError):
    pass


class CycleError(TreeError):
    pass


class DisconnectedError(TreeError):
    pass


@dataclass(frozen=True)
class Tree:
    """Connected acyclic graph with ports ordered by ascending neighbor index."""

    node_count: int
    adjacency: tuple[tuple[int, ...], ...]

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int]]:
        """All edges as (u, v) with u < v, sorted."""
        out = []
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    out.append((u, v))
        return out

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def validate(self) -> None:
        """Check the Tree invariants; raises TreeError on violation."""
        n = self.node_count
        if n <= 0:
            raise TreeError("node_count must be positive")
        if len(self.adjacency) != n:
            raise TreeError("adjacency length != node_count")
        for u, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise TreeError(f"ports of node {u} not ascending/unique")
            for v in nbrs:
                if not 0 <= v < n or v == u:
                    raise TreeError(f"bad neighbor {v} of node {u}")
                if u not in self.adjacency[v]:
                    raise TreeError(f"asymmetric edge {u}-{v}")
        if self.edge_count != n - 1:
            raise CycleError(f"{self.edge_count} edges on {n} nodes")
        # single component
        seen = bytearray(n)
        stack = [0]
        seen[0] = 1
        count = 0
        while stack:
            u = stack.pop()
            count += 1
            for v in self.adjacency[u]:
                if not seen[v]:
                    seen[v] = 1
                    stack.append(v)
        if count != n:
            raise DisconnectedError(f"only {count} of {n} nodes reachable")


def tree_from_edges(n: int, edges: list[tuple[int, int]]) -> Tree:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    t = Tree(n, tuple(tuple(sorted(a)) for a in adj))
    t.validate()
    return t


@dataclass(frozen=True)
class BipartiteTree:
    """Edge-subdivided tree: white nodes 0..n-1 are the originals, black
    nodes n..2n-2 sit in the middle of the original edges.

    ``black_edge[b - original_n]`` is the original edge (u, v) that black
    node ``b`` subdivides.
    """

    tree: Tree
    original_n: int
    black_edge: tuple[tuple[int, int], ...]

    @property
    def node_count(self) -> int:
        return self.tree.node_count

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self.tree.adjacency

    def is_black(self, v: int) -> bool:
        return v >= self.original_n

    def validate(self) -> None:
        self.tree.validate()
        n = self.original_n
        if self.tree.node_count != 2 * n - 1 and n > 1:
            raise TreeError("subdivided tree must have 2n-1 nodes")
        for b in range(n, self.tree.node_count):
            if self.tree.degree(b) != 2:
                raise TreeError(f"black node {b} has degree {self.tree.degree(b)}")
            u, v = self.tree.adjacency[b]
            if self.black_edge[b - n] != (min(u, v), max(u, v)):
                raise TreeError(f"black node {b} maps to wrong edge")
        for u, v in self.tree.edges():
            if self.is_black(u) == self.is_black(v):
                raise TreeError(f"edge {u}-{v} not properly 2-colored")


def subdivide_edges(t: Tree) -> BipartiteTree:
    """Insert one black node in the middle of every edge of ``t``."""
    n = t.node_count
    orig_edges = t.edges()
    adj: list[list[int]] = [[] for _ in range(n + len(orig_edges))]
    black_edge = []
    for i, (u, v) in enumerate(orig_edges):
        b = n + i
        adj[u].append(b)
        adj[v].append(b)
        adj[b].append(u)
        adj[b].append(v)
        black_edge.append((u, v))
    bt = BipartiteTree(
        Tree(n + len(orig_edges), tuple(tuple(sorted(a)) for a in adj)),
        n,
        tuple(black_edge),
    )
    bt.validate()
    return bt


@dataclass(frozen=True)
class IdAssignment:
    """Distinct pseudorandom 63-bit identifiers, deterministic per seed."""

    ids: tuple[int, ...]

    def __getitem__(self, v: int) -> int:
        return self.ids[v]

    def __len__(self) -> int:
        return len(self.ids)


def assign_ids(n: int, seed: int) -> IdAssignment:
    rng = random.Random(f"ids:{seed}")
    seen: set[int] = set()
    ids = []
    while len(ids) < n:
        x = rng.getrandbits(63)
        if x not in seen:
            seen.add(x)
            ids.append(x)
    return IdAssignment(tuple(ids))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def generate_path(n: int) -> Tree:
    """Path on n nodes, node i adjacent to i-1 and i+1."""
    if n < 1:
        raise TreeError("n must be >= 1")
    return tree_from_edges(n, [(i, i + 1) for i in range(n - 1)])


def generate_complete_tree(arity: int, depth: int) -> Tree:
    """Perfect arity-ary rooted tree of the given depth (root = node 0)."""
    if arity < 2:
        raise TreeError("arity must be >= 2")
    if depth < 0:
        raise TreeError("depth must be >= 0")
    edges = []
    next_id = 1
    frontier = [0]
    for _ in range(depth):
        new_frontier = []
        for u in frontier:
            for _ in range(arity):
                edges.append((u, next_id))
                new_frontier.append(next_id)
                next_id += 1
        frontier = new_frontier
    return tree_from_edges(next_id, edges)


def generate_random_tree(n: int, max_degree: int, seed: int) -> Tree:
    """Random tree via sequential random attachment with a degree cap.

    Node i attaches to a uniformly random earlier node that still has
    spare degree.  Deterministic per seed.
    """
    if n < 1:
        raise TreeError("n must be >= 1")
    if n > 1 and max_degree < 2:
        raise TreeError("max_degree must be >= 2")
    rng = random.Random(f"rtree:{seed}")
    deg = [0] * n
    edges = []
    eligible = [0]  # nodes with deg < max_degree
    for v in range(1, n):
        # pick among nodes with remaining capacity
        while True:
            u = eligible[rng.randrange(len(eligible))]
            if deg[u] < max_degree:
                break
            # lazily drop saturated entries
            eligible.remove(u)
        edges.append((u, v))
        deg[u] += 1
        deg[v] += 1
        if deg[u] >= max_degree:
            eligible.remove(u)
        if deg[v] < max_degree:
            eligible.append(v)
    return tree_from_edges(n, edges)


@dataclass
class HierarchicalInstance:
    """Worst-case family for the level-structured coloring problems.

    ``construction_level[v]`` records the level the construction intends
    for node v (checkable against the degree-peeling procedure).
    """

    tree: Tree
    k: int
    s: int
    construction_level: list[int] = field(default_factory=list)


def generate_hierarchical_worst_case(k: int, s: int) -> HierarchicalInstance:
    """Spine of s nodes at level k; every spine node carries pendant
    level-(k-1) structures, recursively.

    Spine endpoints carry two half-size pendants instead of one full one so
    that every spine node keeps degree >= 3 until its own peeling round;
    this makes the construction levels coincide exactly with the
    degree-at-most-2 peeling levels.  For k=2 the node count is s + s^2.
    """
    if k < 1:
        raise TreeError("k must be >= 1")
    if s < 1 or (k >= 2 and s < 2):
        raise TreeError("s must be >= 2 for k >= 2")
    edges: list[tuple[int, int]] = []
    levels: list[int] = []

    def new_node(level: int) -> int:
        levels.append(level)
        return len(levels) - 1

    def build(level: int, length: int, parent: int | None) -> None:
        """Attach a level-`level` structure of spine length `length`."""
        if length <= 0:
            return
        spine = [new_node(level) for _ in range(length)]
        for a, b in zip(spine, spine[1:]):
            edges.append((a, b))
        if parent is not None:
            edges.append((parent, spine[0]))
        if level == 1:
            return
        # interior (and attach-point) spine nodes carry one full pendant;
        # the far end carries two halves. With no parent, both ends do.
        far_ends = {spine[-1]}
        if parent is None:
            far_ends.add(spine[0])
        for v in spine:
            if v in far_ends:
                build(level - 1, (s + 1) // 2, v)
                build(level - 1, s // 2, v)
            else:
                build(level - 1, s, v)

    build(k, s, None)
    t = tree_from_edges(len(levels), edges)
    return HierarchicalInstance(t, k, s, levels)


# ---------------------------------------------------------------------------
# File format: line 1 = n; then n-1 lines "u v" with 0 <= u < v < n.
# ---------------------------------------------------------------------------


def write_tree(t: Tree) -> str:
    lines = [str(t.node_count)]
    lines.extend(f"{u} {v}" for u, v in t.edges())
    return "\n".join(lines) + "\n"


def read_tree(text: str) -> Tree:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedLineError("empty input")
    try:
        n = int(lines[0])
    except ValueError:
        raise MalformedLineError(f"bad node count line: {lines[0]!r}") from None
    if n < 1:
        raise MalformedLineError("node count must be positive")
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise MalformedLineError(f"bad edge line: {ln!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedLineError(f"bad edge line: {ln!r}") from None
        if not (0 <= u < v < n):
            raise MalformedLineError(f"edge {u} {v} out of range or unordered")
        if (u, v) in seen:
            raise DuplicateEdgeError(f"duplicate edge {u} {v}")
        seen.add((u, v))
        edges.append((u, v))
    if len(edges) != n - 1:
        if len(edges) > n - 1:
            raise CycleError(f"{len(edges)} edges on {n} nodes")
        raise DisconnectedError(f"{len(edges)} edges on {n} nodes")
    return tree_from_edges(n, edges)


def tree_distances_from(t: Tree, src: int) -> list[int]:
    """BFS distances from src (helper for validators and tests)."""
    dist = [-1] * t.node_count
    dist[src] = 0
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for v in t.adjacency[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist
