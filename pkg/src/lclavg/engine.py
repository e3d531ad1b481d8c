"""Synchronous LOCAL-model simulator with per-node termination accounting.

A round is modeled as "read all neighbors' public states": messages are
unbounded in LOCAL, so state exchange is equivalent and simpler.  Round 0 is
the init round (knowledge of own id, degree, inputs); a node that emits its
final output during init has termination round 0.  Once a node terminates its
public state is frozen (it remains readable by neighbors, which is how
top-down label propagation reads terminated parents).

Node programs implement::

    init(ctx) -> (state, public, output_or_None, wake)
    step(ctx, state, round, nbr_publics) -> (state, public, output_or_None, wake)

``wake`` is the next round at which the node wants to be stepped even if no
neighbor's public state changed (None = only on changes).  The event-driven
scheduler requires programs to be stable: stepping with unchanged inputs must
not change the public state.  ``mode="full"`` steps every live node every
round and is used to cross-check that equivalence in tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .tree import Tree


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class NodeContext:
    node: int
    id: int
    degree: int
    neighbors: tuple[int, ...]
    neighbor_ids: tuple[int, ...]
    back_ports: tuple[int, ...]  # my port index within each neighbor's list
    inputs: tuple
    rng_seed: str

    def rng(self) -> random.Random:
        return random.Random(self.rng_seed)


@dataclass
class RunResult:
    termination_round: list[int]
    outputs: list
    rounds_total: int
    info: dict = field(default_factory=dict)

    def node_averaged(self) -> Fraction:
        return node_averaged_complexity(self)


def node_averaged_complexity(result: RunResult) -> Fraction:
    """Exact rational (sum of termination rounds) / n."""
    n = len(result.termination_round)
    return Fraction(sum(result.termination_round), n)


def build_contexts(
    tree: Tree, ids, seed: int, inputs_per_node=None
) -> list[NodeContext]:
    back = []
    for v in range(tree.node_count):
        back.append(
            tuple(tree.adjacency[u].index(v) for u in tree.adjacency[v])
        )
    ctxs = []
    for v in range(tree.node_count):
        ctxs.append(
            NodeContext(
                node=v,
                id=ids[v],
                degree=tree.degree(v),
                neighbors=tree.adjacency[v],
                neighbor_ids=tuple(ids[u] for u in tree.adjacency[v]),
                back_ports=back[v],
                inputs=tuple(inputs_per_node[v]) if inputs_per_node else (),
                rng_seed=f"{seed}:{ids[v]}",
            )
        )
    return ctxs


def run_simulation(
    tree: Tree,
    ids,
    algorithm,
    seed: int = 0,
    round_limit: int | None = None,
    mode: str = "event",
    check_invariants: bool = False,
    inputs_per_node=None,
) -> RunResult:
    """Run a node program to completion; deterministic given (tree, ids, seed).

    Raises SimulationError if the round limit is exceeded or a node emits an
    output twice.
    """
    n = tree.node_count
    if len(set(ids)) != n:
        raise SimulationError("node identifiers must be distinct")
    if round_limit is None:
        round_limit = max(4 * n, 64)
    ctxs = build_contexts(tree, ids, seed, inputs_per_node)
    states = [None] * n
    publics = [None] * n
    outputs = [None] * n
    term_round = [-1] * n
    live = n

    wake_buckets: dict[int, list[int]] = {}
    wake_at: list[int | None] = [None] * n

    def schedule(v, wake, rnd):
        if wake is not None:
            if wake <= rnd:
                raise SimulationError(f"node {v} scheduled a non-future wake")
            wake_at[v] = wake
            wake_buckets.setdefault(wake, []).append(v)
        else:
            wake_at[v] = None

    dirty_next: set[int] = set()

    def apply(v, result, rnd):
        nonlocal live
        state, public, output, wake = result
        states[v] = state
        changed = publics[v] != public
        publics[v] = public
        if output is not None:
            if term_round[v] >= 0:
                raise SimulationError(f"node {v} emitted output twice")
            outputs[v] = output
            term_round[v] = rnd
            live -= 1
            wake_at[v] = None
        else:
            schedule(v, wake, rnd)
        if changed:
            for u in ctxs[v].neighbors:
                if term_round[u] < 0:
                    dirty_next.add(u)

    # round 0: init
    for v in range(n):
        apply(v, algorithm.init(ctxs[v]), 0)

    frozen_snapshot = list(publics) if check_invariants else None

    rnd = 0
    while live > 0:
        rnd += 1
        if rnd > round_limit:
            raise SimulationError(
                f"round limit {round_limit} exceeded with {live} live nodes"
            )
        if mode == "full":
            active = [v for v in range(n) if term_round[v] < 0]
            dirty_next.clear()
        else:
            active_set = dirty_next
            dirty_next = set()
            for v in wake_buckets.pop(rnd, ()):
                if term_round[v] < 0 and wake_at[v] == rnd:
                    active_set.add(v)
            active = sorted(active_set)
            if not active:
                # nothing can ever change again
                future = [w for w in wake_buckets if w > rnd]
                if not future:
                    raise SimulationError(
                        f"deadlock at round {rnd}: {live} nodes never terminate"
                    )
                continue
        # synchronous semantics: all reads happen before any write
        results = []
        for v in active:
            if term_round[v] >= 0:
                continue
            nbr_publics = [publics[u] for u in ctxs[v].neighbors]
            results.append((v, algorithm.step(ctxs[v], states[v], rnd, nbr_publics)))
        for v, result in results:
            apply(v, result, rnd)
        if check_invariants:
            for v in range(n):
                if term_round[v] >= 0 and term_round[v] < rnd:
                    if publics[v] is not frozen_snapshot[v] and publics[v] != frozen_snapshot[v]:
                        raise SimulationError(f"frozen public of {v} changed")
                frozen_snapshot[v] = publics[v]

    return RunResult(term_round, outputs, max(term_round), {})


# ---------------------------------------------------------------------------
# Distance-s coloring
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Coloring:
    colors: tuple[int, ...]
    s: int
    palette_size: int


def power_degree_bound(max_degree: int, s: int) -> int:
    """Upper bound on the max degree of G^s: nodes within distance <= s."""
    if max_degree <= 1:
        return max_degree
    if max_degree == 2:
        return 2 * s
    total = 0
    layer = max_degree
    for _ in range(s):
        total += layer
        layer *= max_degree - 1
    return total


def _is_prime(x: int) -> bool:
    if x < 2:
        return False
    d = 2
    while d * d <= x:
        if x % d == 0:
            return False
        d += 1
    return True


def _next_prime(x: int) -> int:
    while not _is_prime(x):
        x += 1
    return x


def _linial_param(m: int, delta_s: int) -> tuple[int, int] | None:
    """Smallest-result (q, k) with prime q > delta_s * k and q^(k+1) >= m;
    None if no step shrinks the palette."""
    best = None
    for k in range(1, 80):
        q = max(delta_s * k + 1, _iroot_ceil(m, k + 1))
        q = _next_prime(q)
        if q * q < m and (best is None or q * q < best[0] * best[0]):
            best = (q, k)
    return best


def _iroot_ceil(m: int, r: int) -> int:
    x = int(round(m ** (1.0 / r)))
    while x**r >= m:
        x -= 1
    while x**r < m:
        x += 1
    return x


def reduction_schedule(id_space: int, delta_s: int) -> list[tuple]:
    """The fixed step table shared by all nodes: Linial reductions to the
    plateau, then Kuhn-Wattenhofer halvings (tau class steps + remap each)
    down to palette delta_s + 1."""
    steps: list[tuple] = []
    m = id_space
    while True:
        p = _linial_param(m, delta_s)
        if p is None:
            break
        q, k = p
        steps.append(("linial", q, k, m))
        m = q * q
    tau = delta_s + 1
    while m > tau:
        for off in range(tau, 2 * tau):
            steps.append(("kw", off, tau, m))
        steps.append(("remap", tau, m))
        m = ((m + 2 * tau - 1) // (2 * tau)) * tau if m > 2 * tau else tau
    steps.append(("done", m))
    return steps


def _poly_eval(coeffs: list[int], x: int, q: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def _digits(c: int, q: int, k: int) -> list[int]:
    out = []
    for _ in range(k + 1):
        out.append(c % q)
        c //= q
    return out


def apply_reduction_step(step: tuple, color: int, nbr_colors) -> int:
    """One scheduled palette-reduction step for one node."""
    kind = step[0]
    if kind == "linial":
        _, q, k, _m = step
        mine = _digits(color, q, k)
        others = [_digits(c, q, k) for c in nbr_colors if c != color]
        for x in range(q):
            mx = _poly_eval(mine, x, q)
            if all(_poly_eval(o, x, q) != mx for o in others):
                return x * q + mx
        raise AssertionError("cover-free selection failed")
    if kind == "kw":
        _, off, tau, _m = step
        if color % (2 * tau) != off:
            return color
        base = (color // (2 * tau)) * (2 * tau)
        used = set(nbr_colors)
        for c in range(base, base + tau):
            if c not in used:
                return c
        raise AssertionError("no free color in KW block")
    if kind == "remap":
        _, tau, _m = step
        return (color // (2 * tau)) * tau + (color % (2 * tau))
    raise AssertionError(f"bad step {step}")


class DistanceColoringAlgorithm:
    """Distributed distance-s coloring: Linial-style reduction on the implicit
    power graph, then block-parallel one-class-at-a-time reduction down to a
    palette of power_degree_bound(Delta, s) + 1 colors.

    Publics carry (color, cmap) where cmap lists (id, color, dist) for nodes
    within distance s-1; steps are spaced s+1 rounds apart so every node sees
    fresh power-neighborhood colors at each step.
    """

    def __init__(self, s: int, max_degree: int, id_bits: int = 63):
        self.s = s
        self.delta_s = power_degree_bound(max_degree, s)
        self.schedule = reduction_schedule(2**id_bits, self.delta_s)
        self.spacing = s + 1

    def palette_size(self) -> int:
        return self.schedule[-1][1]

    def _round_of_step(self, idx: int) -> int:
        return (idx + 1) * self.spacing

    def init(self, ctx):
        color = ctx.id
        cmap = ((ctx.id, color, 0),)
        return ((0, color), (color, cmap), None, 1)

    def step(self, ctx, state, rnd, nbr_publics):
        step_idx, color = state
        # refresh the color map from neighbors every round
        known = {ctx.id: (0, color)}
        for pub in nbr_publics:
            if pub is None:
                continue
            for nid, ncol, nd in pub[1]:
                d = nd + 1
                if d <= self.s and (nid not in known or known[nid][0] > d):
                    known[nid] = (d, ncol)
        due = self._round_of_step(step_idx)
        if rnd >= due and step_idx < len(self.schedule):
            step = self.schedule[step_idx]
            if step[0] == "done":
                cmap = self._cmap(known)
                return (state, (color, cmap), color, None)
            nbr_colors = [c for nid, (d, c) in known.items() if 0 < d <= self.s]
            color = apply_reduction_step(step, color, nbr_colors)
            known[ctx.id] = (0, color)
            step_idx += 1
        cmap = self._cmap(known)
        wake = self._round_of_step(step_idx) if step_idx < len(self.schedule) else None
        return ((step_idx, color), (color, cmap), None, wake)

    def _cmap(self, known):
        return tuple(
            sorted((nid, c, d) for nid, (d, c) in known.items() if d <= self.s - 1)
        )


def compute_distance_coloring(
    tree: Tree, ids, s: int, seed: int = 0, mode: str = "event"
) -> tuple[Coloring, list[int]]:
    """Valid distance-s coloring with a palette depending only on (Delta, s);
    per-node rounds used are bounded independently of n (the schedule length
    is a function of the 63-bit id space and Delta, s only)."""
    if tree.node_count == 1:
        return Coloring((0,), s, 1), [0]
    algo = DistanceColoringAlgorithm(s, tree.max_degree)
    limit = (len(algo.schedule) + 2) * algo.spacing + 8
    result = run_simulation(
        tree, ids, algo, seed=seed, round_limit=max(limit, 4 * tree.node_count), mode=mode
    )
    colors = tuple(result.outputs)
    return Coloring(colors, s, algo.palette_size()), result.termination_round


def validate_distance_coloring(tree: Tree, coloring: Coloring) -> bool:
    """Brute-force sweep: BFS to depth s from every node."""
    s = coloring.s
    for v in range(tree.node_count):
        dist = {v: 0}
        frontier = [v]
        for _ in range(s):
            nxt = []
            for u in frontier:
                for w in tree.adjacency[u]:
                    if w not in dist:
                        dist[w] = dist[u] + 1
                        nxt.append(w)
            frontier = nxt
        for u, d in dist.items():
            if u != v and coloring.colors[u] == coloring.colors[v]:
                return False
    return True
