"""LCL specifications in the black-white formalism and the label-set machinery.

Labels are strings.  A constraint is a set of multisets of (input, output)
pairs; multisets are canonicalized as sorted tuples.  Label sets are frozensets
of output labels; the solver layer packs them as bitmasks over the output
alphabet, and this module provides the shared path-DP over "pair masks" that
both the explicit class operations and the solvers use.

Unsolvability is a value (``Unsolvable``), not an exception: the diameter
solver reports it exactly when some peeled node's label set comes up empty.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .tree import BipartiteTree, Tree

Multiset = tuple[tuple[str, str], ...]  # sorted ((input, output), ...)


def _canon(ms) -> Multiset:
    return tuple(sorted(tuple(p) for p in ms))


class LclError(ValueError):
    pass


class FeasibleFunctionError(LclError):
    """A feasible function could not honor its contract for this input."""


@dataclass(frozen=True)
class LclSpec:
    """An LCL in the black-white formalism."""

    input_alphabet: tuple[str, ...]
    output_alphabet: tuple[str, ...]
    white_constraint: frozenset[Multiset]
    black_constraint: frozenset[Multiset]

    def __post_init__(self):
        if not self.input_alphabet or not self.output_alphabet:
            raise LclError("alphabets must be nonempty")
        pairs = set(itertools.product(self.input_alphabet, self.output_alphabet))
        for cons in (self.white_constraint, self.black_constraint):
            for ms in cons:
                for p in ms:
                    if p not in pairs:
                        raise LclError(f"constraint pair {p} outside alphabets")

    def constraint(self, black: bool) -> frozenset[Multiset]:
        return self.black_constraint if black else self.white_constraint

    def default_input(self) -> str:
        return self.input_alphabet[0]

    def label_index(self, label: str) -> int:
        return self.output_alphabet.index(label)


@dataclass(frozen=True)
class NodeEdgeSpec:
    """An LCL in the node-edge formalism: C_E multisets have size exactly 2."""

    input_alphabet: tuple[str, ...]
    output_alphabet: tuple[str, ...]
    node_constraint: frozenset[Multiset]
    edge_constraint: frozenset[Multiset]

    def __post_init__(self):
        for ms in self.edge_constraint:
            if len(ms) != 2:
                raise LclError(f"edge constraint multiset {ms} must have size 2")


def convert_node_edge_to_black_white(spec: NodeEdgeSpec) -> LclSpec:
    """White constraint = node constraint, black = edge constraint; intended
    to be solved on the edge-subdivided tree."""
    return LclSpec(
        spec.input_alphabet,
        spec.output_alphabet,
        frozenset(spec.node_constraint),
        frozenset(spec.edge_constraint),
    )


def three_coloring_node_edge(max_degree: int = 8) -> NodeEdgeSpec:
    """Proper 3-coloring of nodes: every node-edge pair carries the node's
    color, adjacent nodes differ.  Node multisets listed up to max_degree."""
    colors = ("1", "2", "3")
    node_cons = set()
    for c in colors:
        for d in range(0, max_degree + 1):
            node_cons.add(_canon((("-", c),) * d))
    edge_cons = {
        _canon((("-", a), ("-", b))) for a in colors for b in colors if a != b
    }
    return NodeEdgeSpec(("-",), colors, frozenset(node_cons), frozenset(edge_cons))


def three_coloring_black_white(max_degree: int = 8) -> LclSpec:
    return convert_node_edge_to_black_white(three_coloring_node_edge(max_degree))


# ---------------------------------------------------------------------------
# Solution checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    ok: bool
    witness: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_solution(
    spec: LclSpec,
    bt: BipartiteTree,
    edge_outputs: dict[tuple[int, int], str],
    edge_inputs: dict[tuple[int, int], str] | None = None,
) -> Verdict:
    """Accept iff every white node's incident (input, output) multiset is in
    C_W and every black node's is in C_B."""
    default_in = spec.default_input()
    for v in range(bt.node_count):
        ms = []
        for u in bt.adjacency[v]:
            e = (min(u, v), max(u, v))
            if e not in edge_outputs:
                raise LclError(f"edge {e} has no output label")
            i = edge_inputs.get(e, default_in) if edge_inputs else default_in
            ms.append((i, edge_outputs[e]))
        if _canon(ms) not in spec.constraint(bt.is_black(v)):
            return Verdict(False, v, "constraint violated")
    return Verdict(True)


def node_edge_check(
    spec: NodeEdgeSpec,
    t: Tree,
    outputs: dict[tuple[int, int], str],
) -> Verdict:
    """Check a node-edge solution where both endpoints of an edge carry the
    same output label (the form our solvers produce for 3-coloring-style
    problems after mapping back from the subdivided tree)."""
    default_in = spec.input_alphabet[0]
    for v in range(t.node_count):
        ms = []
        for u in t.adjacency[v]:
            e = (min(u, v), max(u, v))
            ms.append((default_in, outputs[e]))
        if _canon(ms) not in spec.node_constraint:
            return Verdict(False, v, "node constraint violated")
    for u, v in t.edges():
        e = (u, v)
        ms = _canon(((default_in, outputs[e]), (default_in, outputs[e])))
        if ms not in spec.edge_constraint:
            return Verdict(False, u, "edge constraint violated")
    return Verdict(True)


# ---------------------------------------------------------------------------
# Single-node label-set computation (Def. 2, single-node case)
# ---------------------------------------------------------------------------


def _node_satisfied(
    spec: LclSpec, black: bool, labels: list[str], inputs: list[str] | None = None
) -> bool:
    ins = inputs if inputs is not None else [spec.default_input()] * len(labels)
    return _canon(zip(ins, labels)) in spec.constraint(black)


def maximal_label_set_single_node(
    spec: LclSpec,
    black: bool,
    incoming_label_sets: list[frozenset[str]],
) -> frozenset[str]:
    """The set of outgoing labels for which some choice from every incoming
    label set satisfies the node constraint.  Exhaustive over the (constant)
    alphabet and degree."""
    result = set()
    for out in spec.output_alphabet:
        for choice in itertools.product(*incoming_label_sets):
            if _node_satisfied(spec, black, list(choice) + [out]):
                result.add(out)
                break
    return frozenset(result)


def choose_labels_single_node(
    spec: LclSpec,
    black: bool,
    incoming_label_sets: list[frozenset[str]],
    fixed_outgoing: str | None,
) -> tuple[str, ...]:
    """Pick labels for the incoming edges compatible with the fixed outgoing
    label (or with no outgoing edge at all).  Deterministic: lexicographically
    smallest in alphabet order."""
    order = {l: i for i, l in enumerate(spec.output_alphabet)}
    choices = [sorted(s, key=order.get) for s in incoming_label_sets]
    for choice in itertools.product(*choices):
        labels = list(choice) + ([fixed_outgoing] if fixed_outgoing is not None else [])
        if _node_satisfied(spec, black, labels):
            return tuple(choice)
    raise LclError("no compatible incoming labels; label-set invariant broken")


# ---------------------------------------------------------------------------
# Pair masks and the path DP
# ---------------------------------------------------------------------------


def pair_allowed_table(
    spec: LclSpec, black: bool, incoming_label_sets: list[frozenset[str]]
) -> set[tuple[str, str]]:
    """Feasible (left-edge, right-edge) label pairs of a degree-2-on-the-path
    node, given label sets on its remaining (incoming) edges."""
    table = set()
    for a in spec.output_alphabet:
        for b in spec.output_alphabet:
            for choice in itertools.product(*incoming_label_sets):
                if _node_satisfied(spec, black, list(choice) + [a, b]):
                    table.add((a, b))
                    break
    return table


def path_completable_pairs(
    pair_tables: list[set[tuple[str, str]]], alphabet: tuple[str, ...]
) -> set[tuple[str, str]]:
    """(outer-left, outer-right) edge label pairs completable through a path.

    ``pair_tables[i]`` constrains (edge i, edge i+1) around path node i; edge
    0 is the left outgoing edge, edge len(pair_tables) the right one.
    """
    result = set()
    for a in alphabet:
        reach = {a}
        for table in pair_tables:
            reach = {y for (x, y) in table if x in reach}
            if not reach:
                break
        for b in reach:
            result.add((a, b))
    return result


def path_complete_labeling(
    pair_tables: list[set[tuple[str, str]]],
    alphabet: tuple[str, ...],
    a: str,
    b: str,
) -> list[str] | None:
    """Lexicographically smallest edge labeling of the path with outer edge
    labels fixed to (a, b); None if impossible."""
    m = len(pair_tables)
    # reach[i] = labels feasible for edge i coming from the right end
    reach = [set() for _ in range(m + 1)]
    reach[m] = {b}
    for i in range(m - 1, -1, -1):
        reach[i] = {x for (x, y) in pair_tables[i] if y in reach[i + 1]}
    if a not in reach[0]:
        return None
    labels = [a]
    for i in range(m):
        for y in alphabet:
            if (labels[-1], y) in pair_tables[i] and y in reach[i + 1]:
                labels.append(y)
                break
    return labels


# ---------------------------------------------------------------------------
# Explicit path classes (Def. 1) and independence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathNode:
    """One node of a path fragment H: its side and incoming label sets."""

    black: bool
    incoming: tuple[frozenset[str], ...] = ()


@dataclass
class PathClass:
    """Explicit set of feasible labelings of a path fragment.

    Members are (outgoing, incoming, internal) label tuples: ``outgoing`` has
    one entry per outgoing edge (left, right), ``incoming`` concatenates the
    incoming-edge choices node by node, ``internal`` covers the path edges.
    """

    nodes: tuple[PathNode, ...]
    members: list[tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]] = field(
        default_factory=list
    )

    def outgoing_pairs(self) -> set[tuple[str, ...]]:
        return {m[0] for m in self.members}

    def label_set(self, side: int) -> frozenset[str]:
        """side 0 = left outgoing edge, 1 = right."""
        return frozenset(m[0][side] for m in self.members)


def path_maximal_class(spec: LclSpec, nodes: list[PathNode]) -> PathClass:
    """The full maximal class of a path with outgoing edges at both ends,
    by exhaustive enumeration (alphabets and lengths are constants)."""
    k = len(nodes)
    members = []
    incoming_choices = [list(itertools.product(*nd.incoming)) for nd in nodes]
    for edges in itertools.product(spec.output_alphabet, repeat=k + 1):
        # edges[0] = left outgoing, edges[i] between node i-1 and i, edges[k] = right outgoing
        for choices in itertools.product(*incoming_choices):
            ok = True
            for i, nd in enumerate(nodes):
                labels = list(choices[i]) + [edges[i], edges[i + 1]]
                if not _node_satisfied(spec, nd.black, labels):
                    ok = False
                    break
            if ok:
                members.append(
                    (
                        (edges[0], edges[k]),
                        tuple(itertools.chain.from_iterable(choices)),
                        tuple(edges[1:k]),
                    )
                )
    return PathClass(tuple(nodes), members)


def verify_independent_class(
    spec: LclSpec, candidate: PathClass, maximal: PathClass | None = None
) -> bool:
    """Def. 1 independence for two outgoing edges: every mix of two members'
    outgoing labels must have a completion inside the class."""
    if maximal is not None:
        maxset = set(map(tuple, maximal.members))
        for m in candidate.members:
            if tuple(m) not in maxset:
                raise LclError("candidate class not within the maximal class")
    pairs = candidate.outgoing_pairs()
    for m1 in pairs:
        for m2 in pairs:
            for mix in itertools.product(*zip(m1, m2)):
                if mix not in pairs:
                    return False
    return True


def restrict_to_rectangle(
    cls: PathClass, left: frozenset[str], right: frozenset[str]
) -> PathClass:
    members = [
        m for m in cls.members if m[0][0] in left and m[0][1] in right
    ]
    return PathClass(cls.nodes, members)


def best_independent_rectangle(
    completable: set[tuple[str, str]], alphabet: tuple[str, ...]
) -> tuple[frozenset[str], frozenset[str]]:
    """Largest S_l x S_r fully inside the completable pair set; ties broken
    toward balanced sides, then lexicographically.  Raises if empty."""
    best = None
    labels = list(alphabet)
    for lsize in range(len(labels), 0, -1):
        for rsize in range(len(labels), 0, -1):
            for sl in itertools.combinations(labels, lsize):
                for sr in itertools.combinations(labels, rsize):
                    if all((a, b) in completable for a in sl for b in sr):
                        key = (min(lsize, rsize), lsize + rsize)
                        if best is None or key > best[0]:
                            best = (key, frozenset(sl), frozenset(sr))
    if best is None:
        raise FeasibleFunctionError("path has no completable outgoing pair")
    return best[1], best[2]


def feasible_function_3coloring(
    spec: LclSpec, nodes: list[PathNode]
) -> PathClass:
    """Feasible function for 3-coloring path fragments: prefer the full
    maximal class when it is already independent (it is, for every fragment
    shape the solvers produce with the shipped parameters), otherwise the
    largest independent rectangle with both endpoint label sets of size >= 2.
    """
    for nd in nodes:
        if not nd.black:
            avail = set(spec.output_alphabet)
            for s in nd.incoming:
                avail &= s
            if len(avail) < 2:
                raise FeasibleFunctionError(
                    "internal node has fewer than 2 available colors"
                )
    cls = path_maximal_class(spec, nodes)
    if cls.members and verify_independent_class(spec, cls):
        return cls
    left, right = best_independent_rectangle(
        cls.outgoing_pairs(), spec.output_alphabet
    )
    if len(left) < 2 or len(right) < 2:
        raise FeasibleFunctionError("no rectangle with both endpoint sets >= 2")
    return restrict_to_rectangle(cls, left, right)


def generic_feasible_function(spec: LclSpec, nodes: list[PathNode]) -> PathClass:
    """Problem-agnostic fallback: maximal class if independent, else the best
    available rectangle (which is always independent)."""
    cls = path_maximal_class(spec, nodes)
    if not cls.members:
        raise FeasibleFunctionError("empty maximal class")
    if verify_independent_class(spec, cls):
        return cls
    left, right = best_independent_rectangle(
        cls.outgoing_pairs(), spec.output_alphabet
    )
    return restrict_to_rectangle(cls, left, right)


# ---------------------------------------------------------------------------
# O(diameter) oracle solver (sequential leaf peeling)
# ---------------------------------------------------------------------------


class Unsolvable:
    """Sentinel: some peeled node's label set came up empty."""

    def __init__(self, witness: int):
        self.witness = witness

    def __repr__(self):
        return f"Unsolvable(witness={self.witness})"


def solve_diameter(
    spec: LclSpec, bt: BipartiteTree
) -> dict[tuple[int, int], str] | Unsolvable:
    """Peel leaves inward, computing each node's label set toward the rest of
    the tree; then assign labels in reverse order.  Unsolvable exactly when
    some label set is empty."""
    t = bt.tree
    n = t.node_count
    if n == 1:
        if _node_satisfied(spec, bt.is_black(0), []):
            return {}
        return Unsolvable(0)
    deg = [t.degree(v) for v in range(n)]
    removed = [False] * n
    # label set each removed node computed for its edge toward the survivor
    upset: dict[int, frozenset[str]] = {}
    parent: list[int | None] = [None] * n
    order: list[int] = []
    frontier = [v for v in range(n) if deg[v] == 1]
    while frontier:
        nxt = []
        for v in frontier:
            if removed[v] or deg[v] == 0:
                continue
            survivors = [u for u in t.adjacency[v] if not removed[u]]
            if len(survivors) != 1:
                continue
            u = survivors[0]
            incoming = [upset[w] for w in t.adjacency[v] if w != u]
            s = maximal_label_set_single_node(spec, bt.is_black(v), incoming)
            if not s:
                return Unsolvable(v)
            upset[v] = s
            parent[v] = u
            removed[v] = True
            order.append(v)
            deg[u] -= 1
            deg[v] = 0
            if deg[u] == 1:
                nxt.append(u)
        frontier = nxt
    roots = [v for v in range(n) if not removed[v]]
    outputs: dict[tuple[int, int], str] = {}

    def edge(u, v):
        return (min(u, v), max(u, v))

    # root (one or two adjacent nodes may remain)
    if len(roots) == 1:
        r = roots[0]
        incoming = [upset[w] for w in t.adjacency[r]]
        try:
            choice = choose_labels_single_node(spec, bt.is_black(r), incoming, None)
        except LclError:
            return Unsolvable(r)
        for w, l in zip(t.adjacency[r], choice):
            outputs[edge(r, w)] = l
    elif len(roots) == 2:
        r1, r2 = roots
        # choose the shared edge label from both sides' perspectives
        inc1 = [upset[w] for w in t.adjacency[r1] if w != r2]
        inc2 = [upset[w] for w in t.adjacency[r2] if w != r1]
        s1 = maximal_label_set_single_node(spec, bt.is_black(r1), inc1)
        s2 = maximal_label_set_single_node(spec, bt.is_black(r2), inc2)
        both = sorted(s1 & s2, key=spec.output_alphabet.index)
        if not both:
            return Unsolvable(r1)
        l = both[0]
        outputs[edge(r1, r2)] = l
        for r, other in ((r1, r2), (r2, r1)):
            below = [w for w in t.adjacency[r] if w != other]
            incoming = [upset[w] for w in below]
            choice = choose_labels_single_node(spec, bt.is_black(r), incoming, l)
            for w, lab in zip(below, choice):
                outputs[edge(r, w)] = lab
    else:
        raise AssertionError("tree peeling left an unexpected core")

    # put back in reverse order
    for v in reversed(order):
        u = parent[v]
        l = outputs[edge(v, u)]
        below = [w for w in t.adjacency[v] if w != u]
        incoming = [upset[w] for w in below]
        choice = choose_labels_single_node(spec, bt.is_black(v), incoming, l)
        for w, lab in zip(below, choice):
            outputs[edge(v, w)] = lab
    return outputs


def exhaustive_solvable(spec: LclSpec, bt: BipartiteTree) -> bool:
    """Brute-force solvability oracle for tiny instances."""
    t = bt.tree
    edges = t.edges()
    if not edges:
        return _node_satisfied(spec, bt.is_black(0), [])
    for assignment in itertools.product(spec.output_alphabet, repeat=len(edges)):
        outputs = {e: l for e, l in zip(edges, assignment)}
        if check_solution(spec, bt, outputs):
            return True
    return False


# ---------------------------------------------------------------------------
# Spec text format
# ---------------------------------------------------------------------------


def write_spec(spec: LclSpec) -> str:
    lines = [
        "inputs: " + " ".join(spec.input_alphabet),
        "outputs: " + " ".join(spec.output_alphabet),
    ]
    for ms in sorted(spec.white_constraint):
        lines.append("W: " + " ".join(f"({i},{o})" for i, o in ms))
    for ms in sorted(spec.black_constraint):
        lines.append("B: " + " ".join(f"({i},{o})" for i, o in ms))
    return "\n".join(lines) + "\n"


def read_spec(text: str) -> LclSpec:
    inputs: tuple[str, ...] | None = None
    outputs: tuple[str, ...] | None = None
    white: set[Multiset] = set()
    black: set[Multiset] = set()
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if ln.startswith("inputs:"):
            inputs = tuple(ln.split(":", 1)[1].split())
        elif ln.startswith("outputs:"):
            outputs = tuple(ln.split(":", 1)[1].split())
        elif ln.startswith(("W:", "B:")):
            kind, rest = ln.split(":", 1)
            pairs = []
            for tok in rest.split():
                if not (tok.startswith("(") and tok.endswith(")")):
                    raise LclError(f"bad pair token {tok!r}")
                i, o = tok[1:-1].split(",")
                pairs.append((i, o))
            (white if kind == "W" else black).add(_canon(pairs))
        else:
            raise LclError(f"bad spec line {ln!r}")
    if inputs is None or outputs is None:
        raise LclError("spec must declare inputs and outputs")
    return LclSpec(inputs, outputs, frozenset(white), frozenset(black))
