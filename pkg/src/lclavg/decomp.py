"""Modified rake-and-compress decomposition with orientation, quality, and
promotion of local maxima.

This is the sequential (centralized) state machine; the distributed solvers
re-run the same steps on the simulator.  Layers are encoded as tuples
comparable under the decomposition's total order:

    Rake(i, j)            -> (i, 0, j)
    PromotedCompress(i)   -> (i, 1, 0)
    Compress(i)           -> (i, 2, 0)

so plain tuple comparison realizes V^R_{i,j} < V^C_{i,p} < V^C_i < V^R_{i+1,1}.
Free nodes carry layer None; they sort above assigned layers for scheduling
purposes only and are rejected by layer_less_than.

Path lengths throughout are node counts: a compress component is a path of
[ell, 2*ell] nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .tree import Tree

RAKE, PROMOTED, COMPRESS = 0, 1, 2

Layer = tuple[int, int, int]


def rake_layer(i: int, j: int) -> Layer:
    return (i, RAKE, j)


def promoted_layer(i: int) -> Layer:
    return (i, PROMOTED, 0)


def compress_layer(i: int) -> Layer:
    return (i, COMPRESS, 0)


def layer_less_than(a: Layer, b: Layer) -> bool:
    """The decomposition's total layer order; free nodes are not comparable."""
    if a is None or b is None:
        raise ValueError("layer comparison involving a free node")
    return a < b


def layer_name(layer: Layer | None) -> str:
    if layer is None:
        return "free"
    i, kind, j = layer
    return {RAKE: f"R({i},{j})", PROMOTED: f"Cp({i})", COMPRESS: f"C({i})"}[kind]


class DecompositionError(AssertionError):
    pass


@dataclass
class DecompositionState:
    """Mutable decomposition bookkeeping over a fixed tree."""

    tree: Tree
    ids: tuple[int, ...]
    layer: list[Layer | None] = field(init=False)
    parent_port: list[int] = field(init=False)  # port of edge oriented toward v
    children: list[list[int]] = field(init=False)
    promoted: list[bool] = field(init=False)
    marked: list[bool] = field(init=False)
    n_set: set[int] = field(default_factory=set)
    free_count: int = field(init=False)
    subtree_unmarked: list[int] = field(init=False)

    def __post_init__(self):
        n = self.tree.node_count
        self.layer = [None] * n
        self.parent_port = [-1] * n
        self.children = [[] for _ in range(n)]
        self.promoted = [False] * n
        self.marked = [False] * n
        self.free_count = n
        self.subtree_unmarked = [1] * n

    # -- orientation --------------------------------------------------------

    def orient(self, parent: int, child: int) -> None:
        """Orient the edge parent->child.  Write-once, <=1 incoming per node."""
        if self.parent_port[child] != -1:
            raise DecompositionError(f"node {child} already has a parent edge")
        self.parent_port[child] = self.tree.adjacency[child].index(parent)
        self.children[parent].append(child)
        self._recount_from(child)

    def parent_of(self, v: int) -> int | None:
        p = self.parent_port[v]
        return None if p < 0 else self.tree.adjacency[v][p]

    # -- layers ---------------------------------------------------------------

    def assign(self, v: int, layer: Layer) -> None:
        old = self.layer[v]
        if old is None:
            self.free_count -= 1
        elif not layer_less_than(old, layer):
            raise DecompositionError(f"reassignment of {v} must increase its layer")
        self.layer[v] = layer

    def is_free(self, v: int) -> bool:
        return self.layer[v] is None

    def free_degree(self, v: int) -> int:
        return sum(1 for u in self.tree.adjacency[v] if self.layer[u] is None)

    # -- local maxima, marks, quality ----------------------------------------

    def is_local_maximum(self, v: int) -> bool:
        if self.layer[v] is None:
            return False
        return all(
            self.layer[u] is not None and self.layer[u] < self.layer[v]
            for u in self.tree.adjacency[v]
        )

    def mark_subtree(self, root: int) -> int:
        """Mark root and its oriented descendants; maintains unmarked counts."""
        count = 0
        stack = [root]
        while stack:
            v = stack.pop()
            if self.marked[v]:
                continue
            self.marked[v] = True
            self.subtree_unmarked[v] = 0
            count += 1
            stack.extend(self.children[v])
        if count:
            self._recount_from(root)
        return count

    def _recount_from(self, v: int | None) -> None:
        """Recompute subtree_unmarked along the ancestor chain of v."""
        while v is not None:
            if self.marked[v]:
                self.subtree_unmarked[v] = 0
            else:
                self.subtree_unmarked[v] = 1 + sum(
                    self.subtree_unmarked[c] for c in self.children[v]
                )
            v = self.parent_of(v)

    def quality(self, v: int) -> int:
        """|H(v)| straight from the definition: nodes reachable from v over
        oriented edges through assigned nodes with nonincreasing layers; 0 for
        local maxima and their descendants.  This is the from-scratch oracle.
        """
        u = v
        while u is not None:
            if self.layer[u] is not None and self.is_local_maximum(u):
                return 0
            u = self.parent_of(u)
        count = 0
        stack = [v]
        while stack:
            u = stack.pop()
            for c in self.children[u]:
                if self.layer[c] is None:
                    continue
                if self.layer[u] is not None and self.layer[c] > self.layer[u]:
                    continue
                count += 1
                stack.append(c)
        return count

    def quality_fast(self, v: int) -> int:
        """Incremental quality via maintained unmarked-subtree counts; equals
        quality() under the runtime invariants (oracle-checked in tests)."""
        if self.marked[v]:
            return 0
        if self.layer[v] is not None and self.is_local_maximum(v):
            return 0
        total = 0
        for c in self.children[v]:
            if self.layer[c] is None:
                continue
            if self.layer[v] is not None and self.layer[c] > self.layer[v]:
                continue
            total += self.subtree_unmarked[c]
        return total

    def note_local_maximum(self, v: int) -> None:
        if self.is_local_maximum(v):
            self.mark_subtree(v)


# ---------------------------------------------------------------------------
# Subroutines
# ---------------------------------------------------------------------------


def orienting_rake(state: DecompositionState, i: int, gamma: int) -> None:
    """gamma waves of degree-<=1 removal into sublayers (i, 1..gamma).  Each
    removed node's edge to its surviving free neighbor is oriented toward the
    removed node; adjacent degree-1 pairs: the smaller unique id rakes."""
    t = state.tree
    frontier = {v for v in range(t.node_count) if state.is_free(v)}
    for j in range(1, gamma + 1):
        raking: list[tuple[int, int | None]] = []
        for v in frontier:
            if not state.is_free(v):
                continue
            free_nbrs = [u for u in t.adjacency[v] if state.is_free(u)]
            if len(free_nbrs) > 1:
                continue
            if free_nbrs:
                u = free_nbrs[0]
                if state.free_degree(u) <= 1 and state.ids[v] > state.ids[u]:
                    continue  # u (smaller id) rakes this wave instead
                raking.append((v, u))
            else:
                raking.append((v, None))
        if not raking:
            break
        frontier = set()
        for v, u in raking:
            state.assign(v, rake_layer(i, j))
            if u is not None:
                state.orient(u, v)
                frontier.add(u)
            else:
                state._recount_from(v)
        for v, _ in raking:
            state.note_local_maximum(v)


def _free_paths(state: DecompositionState) -> list[list[int]]:
    """Maximal runs of free nodes whose free degree is exactly 2, as ordered
    node lists."""
    t = state.tree
    n = t.node_count
    on_path = [state.is_free(v) and state.free_degree(v) == 2 for v in range(n)]
    seen = [False] * n
    paths = []
    for v in range(n):
        if not on_path[v] or seen[v]:
            continue
        # walk from v to one end of its run
        end, prev = v, None
        while True:
            nxt = [u for u in t.adjacency[end] if u != prev and on_path[u]]
            if not nxt:
                break
            prev, end = end, nxt[0]
        # collect the run from that end
        path, prev, cur = [end], None, end
        seen[end] = True
        while True:
            nxt = [u for u in t.adjacency[cur] if u != prev and on_path[u]]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            seen[cur] = True
            path.append(cur)
        paths.append(path)
    return paths


def select_ruling_positions(m: int, ell: int, colors: list[int]) -> list[int]:
    """Greedy ruling set on path positions 0..m-1 by iterating the classes of
    a distance-ell coloring: a position joins unless it is within ell of a
    chosen one or would cut off a boundary segment shorter than ell.  The
    result leaves maximal gaps of [ell, 2*ell] positions."""
    z: list[int] = []
    in_z = [False] * m
    for c in range(max(colors) + 1 if colors else 0):
        for p in range(1, m - 1):
            if colors[p] != c or in_z[p]:
                continue
            if any(in_z[q] for q in range(max(0, p - ell), min(m, p + ell + 1))):
                continue
            left = next((p - q - 1 for q in range(p - 1, -1, -1) if in_z[q]), p)
            right = next((q - p - 1 for q in range(p + 1, m) if in_z[q]), m - 1 - p)
            if left < ell or right < ell:
                continue
            in_z[p] = True
            z.append(p)
    return sorted(z)


def compress_with_slack(state: DecompositionState, i: int, ell: int) -> None:
    """Compress every maximal free degree-2 path of >= 4*ell+9 nodes: leave
    ell+3 slack nodes at each end, split the inner path by a ruling set Z into
    segments of [ell, 2*ell] nodes, assign segments to Compress(i) and Z to
    Rake(i+1, 1), and orient the pre-/post-Z stretches inward."""
    slack = ell + 3
    for path in _free_paths(state):
        if len(path) < 4 * ell + 9:
            continue
        inner = path[slack:-slack]
        m = len(inner)
        colors = [p % (ell + 1) for p in range(m)]
        z_pos = select_ruling_positions(m, ell, colors)
        zset = set(z_pos)
        for p, v in enumerate(inner):
            if p in zset:
                state.assign(v, rake_layer(i + 1, 1))
            else:
                state.assign(v, compress_layer(i))
        first_z, last_z = z_pos[0], z_pos[-1]
        for p in range(0, first_z - 1):
            state.orient(inner[p], inner[p + 1])
        for p in range(m - 1, last_z + 1, -1):
            state.orient(inner[p], inner[p - 1])
        state.n_set.update(inner[first_z : last_z + 1])
        # Z nodes are local maxima; the enclosed segments terminate with them
        for p in range(first_z, last_z + 1):
            state.mark_subtree(inner[p])


def promote_if_possible(state: DecompositionState, i: int, b: int) -> None:
    """For each free node r (ascending unique id): promote the best node at
    oriented distance b below r, unless the r->v* path touches a
    compress-form layer.  Interior path nodes move to PromotedCompress(i),
    v* to Rake(i+1, 1) and becomes a local maximum."""
    t = state.tree
    order = sorted(
        (v for v in range(t.node_count) if state.is_free(v)),
        key=lambda v: state.ids[v],
    )
    for r in order:
        frontier = [(c, [r, c]) for c in state.children[r]]
        depth = 1
        while frontier and depth < b:
            frontier = [
                (c, path + [c]) for v, path in frontier for c in state.children[v]
            ]
            depth += 1
        if not frontier:
            continue
        best = None
        for v, path in frontier:
            key = (state.quality_fast(v), -state.ids[v])
            if best is None or key > best[0]:
                best = (key, v, path)
        _, vstar, path = best
        if any(
            state.layer[u] is not None and state.layer[u][1] in (PROMOTED, COMPRESS)
            for u in path[1:]
        ):
            continue
        for u in path[1:-1]:
            state.assign(u, promoted_layer(i))
        state.assign(vstar, rake_layer(i + 1, 1))
        state.promoted[vstar] = True
        state.note_local_maximum(vstar)


# ---------------------------------------------------------------------------
# Full driver
# ---------------------------------------------------------------------------


@dataclass
class IterationTrace:
    iteration: int
    free_count: int
    marked_count: int
    promoted_count: int


def compute_decomposition(
    tree: Tree,
    ell: int,
    ids: tuple[int, ...] | None = None,
    hooks=None,
) -> tuple[DecompositionState, list[IterationTrace]]:
    """b = ell+2, gamma = ell+3; initial rake, then iterate {compress, rake,
    promote} until every node is assigned.  ``hooks(stage, iteration, state)``
    is called after every subroutine."""
    if ids is None:
        ids = tuple(range(tree.node_count))
    b, gamma = ell + 2, ell + 3
    state = DecompositionState(tree, ids)
    trace: list[IterationTrace] = []

    def record(it):
        trace.append(
            IterationTrace(it, state.free_count, sum(state.marked), sum(state.promoted))
        )

    def hook(stage, it):
        if hooks is not None:
            hooks(stage, it, state)

    orienting_rake(state, 1, gamma)
    hook("rake", 1)
    record(1)
    cap = int(10 * math.log2(max(2, tree.node_count))) + 10
    i = 2
    while state.free_count > 0:
        if i > cap:
            raise DecompositionError(f"iteration cap {cap} exceeded")
        compress_with_slack(state, i - 1, ell)
        hook("compress", i)
        orienting_rake(state, i, gamma)
        hook("rake", i)
        promote_if_possible(state, i, b)
        hook("promote", i)
        record(i)
        i += 1
    return state, trace


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecompVerdict:
    ok: bool
    property_violated: int = 0
    witness: tuple[int, ...] = ()
    reason: str = ""

    def __bool__(self):
        return self.ok


def _components(tree: Tree, members: set[int]):
    seen: set[int] = set()
    for v in members:
        if v in seen:
            continue
        comp = [v]
        seen.add(v)
        stack = [v]
        while stack:
            u = stack.pop()
            for w in tree.adjacency[u]:
                if w in members and w not in seen:
                    seen.add(w)
                    comp.append(w)
                    stack.append(w)
        yield comp


def _component_diameter(tree: Tree, comp: set[int], start: int) -> int:
    def bfs(s):
        dist = {s: 0}
        frontier, far = [s], s
        while frontier:
            nxt = []
            for u in frontier:
                for w in tree.adjacency[u]:
                    if w in comp and w not in dist:
                        dist[w] = dist[u] + 1
                        far = w
                        nxt.append(w)
            frontier = nxt
        return far, dist

    far, _ = bfs(start)
    far2, dist = bfs(far)
    return dist[far2]


def validate_partial_decomposition(
    tree: Tree, state: DecompositionState, gamma: int, ell: int
) -> DecompVerdict:
    """Check the three partial-decomposition properties.

    1. Compress-form layers split into paths of [ell, 2*ell] nodes; endpoints
       have exactly one higher-or-free neighbor, interior nodes none.
    2. Rake-layer components have diameter <= 2*gamma and at most one node
       with a higher-or-free neighbor.
    3. Rake sublayers are independent sets whose nodes have at most one
       higher-or-free neighbor.
    """
    n = tree.node_count
    layer = state.layer

    # property 1: compress-form layers, grouped per exact layer
    comp_groups: dict[Layer, set[int]] = {}
    for v in range(n):
        l = layer[v]
        if l is not None and l[1] in (PROMOTED, COMPRESS):
            comp_groups.setdefault(l, set()).add(v)
    for l, members in comp_groups.items():
        for comp in _components(tree, members):
            if not ell <= len(comp) <= 2 * ell:
                return DecompVerdict(
                    False, 1, tuple(comp),
                    f"compress component size {len(comp)} outside [{ell},{2 * ell}]",
                )
            degs = {u: sum(1 for w in tree.adjacency[u] if w in members) for u in comp}
            if any(d > 2 for d in degs.values()):
                return DecompVerdict(False, 1, tuple(comp), "compress component not a path")
            for u in comp:
                ups = sum(
                    1
                    for w in tree.adjacency[u]
                    if layer[w] is None or layer[w] > l
                )
                if len(comp) == 1:
                    if not 1 <= ups <= 2:
                        return DecompVerdict(
                            False, 1, (u,), f"singleton component with {ups} higher/free neighbors"
                        )
                elif degs[u] <= 1:
                    if ups != 1:
                        return DecompVerdict(
                            False, 1, (u,), f"endpoint with {ups} higher/free neighbors"
                        )
                elif ups != 0:
                    return DecompVerdict(
                        False, 1, (u,), "interior node with a higher/free neighbor"
                    )

    # properties 2 and 3: rake layers
    rake_groups: dict[int, set[int]] = {}
    for v in range(n):
        l = layer[v]
        if l is not None and l[1] == RAKE:
            rake_groups.setdefault(l[0], set()).add(v)
    for i, members in rake_groups.items():
        top = (i, RAKE, 10**9)
        for v in members:
            ups = 0
            for w in tree.adjacency[v]:
                if layer[w] == layer[v]:
                    return DecompVerdict(
                        False, 3, (v, w), "adjacent nodes in the same rake sublayer"
                    )
                if layer[w] is None or layer[w] > layer[v]:
                    ups += 1
            if ups > 1:
                return DecompVerdict(
                    False, 3, (v,), f"sublayer node with {ups} higher/free neighbors"
                )
        for comp in _components(tree, members):
            upward = [
                u
                for u in comp
                if any(layer[w] is None or layer[w] > top for w in tree.adjacency[u])
            ]
            if len(upward) > 1:
                return DecompVerdict(
                    False, 2, tuple(upward), "rake component with several upward nodes"
                )
            if len(comp) > 2 * gamma + 1:
                dia = _component_diameter(tree, set(comp), comp[0])
                if dia > 2 * gamma:
                    return DecompVerdict(
                        False, 2, tuple(comp[:4]), f"rake component diameter {dia}"
                    )
    return DecompVerdict(True)


def dump_trace_csv(trace: list[IterationTrace]) -> str:
    lines = ["iteration,free_count,marked_count,promoted_count"]
    lines += [
        f"{t.iteration},{t.free_count},{t.marked_count},{t.promoted_count}"
        for t in trace
    ]
    return "\n".join(lines) + "\n"


def dump_state(state: DecompositionState) -> str:
    return (
        "\n".join(
            f"{v} {layer_name(state.layer[v])}"
            for v in range(state.tree.node_count)
        )
        + "\n"
    )
