"""Distributed node-averaged LCL solver as a simulator node program.

The global round schedule interleaves the layer decomposition with label
propagation.  Block 1 is the initial rake; every later block i runs

  cut      -- free degree-2 runs of >= 4*ell+9 nodes split into
              P_side | seed | interior | seed | P_side: the P sides become
              compress components of layer C(i-1) at once (so label sets
              keep flowing and the loop never waits), the seeds join rake
              sublayer (i,1), and the interior is sealed as an in-flight
              compress problem;
  rake     -- gamma two-round (candidate, commit) waves of degree-<=1
              removal, smaller-id tie-break;
  promote  -- frozen quality replies climb from depth b to every free root,
              which re-layers the winning path into a promoted compress
              component with a new local maximum on top.

In-flight interiors pick a ruling set Z with gaps of [ell, 2*ell] nodes:
deterministically via Linial/Kuhn-Wattenhofer coloring along the path and
color-class sweeps, or by repeated randomized candidate elections.  Z nodes
join rake sublayer (i,1); enclosed runs become compress components of layer
C(i-1).

Label sets move bottom-up as bitmasks, labels top-down; local maxima fix all
their edges as soon as every incident edge has a label set; compress
components compute a feasible rectangle over their pair-mask DP and complete
canonically once both boundary labels arrive.  A node terminates the round
all its incident edges carry labels.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from . import lcl
from .engine import apply_reduction_step, reduction_schedule

FREE, INFLIGHT, RAKE, SEG, DONE = "F", "I", "R", "S", "T"

UNDECIDED, ZNODE, SEGED = 0, 1, 2

# public tuple slots
P_ROLE, P_LAYER, P_ORIENT, P_EXT, P_CAND, P_Q, P_GUP, P_LAB = range(8)
P_DEPTH, P_REPLY, P_COMMIT, P_ZREL, P_SEG, P_FAIL = range(8, 14)


@dataclass(frozen=True)
class Schedule:
    """Global round schedule; a pure function of ell."""

    ell: int

    @property
    def b(self):
        return self.ell + 2

    @property
    def gamma(self):
        return self.ell + 3

    @property
    def cap(self):
        return 4 * self.ell + 9

    @property
    def extent_cap(self):
        return 5 * self.ell + 10

    @property
    def relay_w(self):
        return 2 * self.ell + 2

    @property
    def cut_w(self):
        return 2

    @property
    def max_promote_depth(self) -> int:
        # any target depth in [ell+1, 2*ell+1] yields a promoted compress
        # component of [ell, 2*ell] interior nodes
        return 2 * self.ell + 1

    @property
    def t_iter(self):
        promote_len = 2 * self.max_promote_depth + 4  # depth ripple + ladder + wave
        return self.cut_w + 2 * self.gamma + max(self.extent_cap, promote_len)

    def block_start(self, i: int) -> int:
        # the extent gap lets path extents stabilize before the first cut
        return 1 + 2 * self.gamma + self.extent_cap + (i - 2) * self.t_iter

    def block_of(self, rnd: int) -> int:
        if rnd < self.block_start(2):
            return 1
        return 2 + (rnd - self.block_start(2)) // self.t_iter

    def cut_round(self, i: int) -> int:
        return self.block_start(i)

    def rake_first_round(self, i: int) -> int:
        return 1 if i == 1 else self.block_start(i) + self.cut_w

    def promote_p0(self, i: int) -> int:
        return self.block_start(i) + self.cut_w + 2 * self.gamma + self.max_promote_depth + 2

    def reply_round(self, i: int, depth: int) -> int:
        return self.promote_p0(i) + (self.max_promote_depth - depth)

    def commit_round(self, i: int) -> int:
        return self.promote_p0(i) + self.max_promote_depth

    def next_free_event(self, rnd: int) -> int:
        events = []
        for blk in (self.block_of(rnd), self.block_of(rnd) + 1):
            if blk >= 2:
                events.append(self.cut_round(blk))
                events.append(self.commit_round(blk))
            first = self.rake_first_round(blk)
            events.extend(first + o for o in range(2 * self.gamma))
        return min(e for e in events if e > rnd)

    def inflight_step_round(self, cut: int, idx: int) -> int:
        return cut + (idx + 1) * (self.ell + 2)

    def elect_period(self) -> int:
        return 6 * self.ell


class NodeState:
    __slots__ = (
        "role", "layer", "orient_in", "promoted", "zflag",
        "cut_round", "cut_iter", "color", "cstep", "cand_exec",
        "path_ports", "winner_port", "promote_blk", "frozen_reply",
        "commit_out", "commit_blk", "fail", "labels", "gup", "fclass_gups",
    )

    def __init__(self, degree):
        self.role = FREE
        self.layer = None
        self.orient_in = -1
        self.promoted = False
        self.zflag = False
        self.cut_round = -1
        self.cut_iter = -1
        self.color = -1
        self.cstep = 0
        self.cand_exec = -1
        self.path_ports = None
        self.winner_port = -1
        self.promote_blk = -1
        self.frozen_reply = None
        self.commit_out = None
        self.commit_blk = -1
        self.fail = False
        self.labels = [None] * degree
        self.gup = [None] * degree
        self.fclass_gups = None


class AveragedSolver:
    """Deterministic (mode='det') or randomized (mode='rand') node-averaged
    solver for a black-white LCL; ctx.inputs = (is_black,)."""

    def __init__(self, spec: lcl.LclSpec, ell: int, n: int, mode: str = "det",
                 c_fail: int = 2):
        self.spec = spec
        self.alpha = spec.output_alphabet
        self.k = len(self.alpha)
        self.sched = Schedule(ell)
        self.randomized = mode == "rand"
        self.n = n
        self.r_max = max(4, math.ceil(8 * ell * c_fail * math.log(max(2, n))))
        self.csched = [] if self.randomized else reduction_schedule(2**63, 2 * ell)
        self.z_palette = 2 * ell + 1
        self._memo: dict = {}

    # ---- memoized label machinery over bitmasks ---------------------------

    def mask_set(self, mask: int) -> frozenset[str]:
        return frozenset(self.alpha[i] for i in range(self.k) if mask >> i & 1)

    def gup_mask(self, black: bool, below: tuple[int, ...]) -> int:
        key = ("g", black, tuple(sorted(below)))
        if key not in self._memo:
            s = lcl.maximal_label_set_single_node(
                self.spec, black, [self.mask_set(m) for m in key[2]]
            )
            self._memo[key] = sum(1 << self.alpha.index(l) for l in s)
        return self._memo[key]

    def pair_mask(self, black: bool, below: tuple[int, ...]) -> int:
        key = ("p", black, tuple(sorted(below)))
        if key not in self._memo:
            table = lcl.pair_allowed_table(
                self.spec, black, [self.mask_set(m) for m in key[2]]
            )
            self._memo[key] = sum(
                1 << (self.alpha.index(a) * self.k + self.alpha.index(c))
                for a, c in table
            )
        return self._memo[key]

    def choose_fixed(self, black: bool, free_masks: tuple[int, ...],
                     fixed: tuple[int, ...]) -> tuple[int, ...]:
        """Labels for the free-mask edges, jointly valid with the fixed
        labels; lexicographically smallest in alphabet order."""
        key = ("c", black, free_masks, fixed)
        if key not in self._memo:
            fixed_sets = [frozenset((self.alpha[i],)) for i in fixed]
            sets = [self.mask_set(m) for m in free_masks] + fixed_sets
            chosen = lcl.choose_labels_single_node(self.spec, black, sets, None)
            self._memo[key] = tuple(
                self.alpha.index(l) for l in chosen[: len(free_masks)]
            )
        return self._memo[key]

    def pair_tables(self, pairmasks):
        return [
            {
                (self.alpha[x // self.k], self.alpha[x % self.k])
                for x in range(self.k * self.k)
                if pm >> x & 1
            }
            for pm in pairmasks
        ]

    def f_rectangle(self, pairmasks: tuple[int, ...]) -> tuple[int, int]:
        key = ("f", pairmasks)
        if key not in self._memo:
            pairs = lcl.path_completable_pairs(self.pair_tables(pairmasks), self.alpha)
            left, right = lcl.best_independent_rectangle(pairs, self.alpha)
            self._memo[key] = (
                sum(1 << self.alpha.index(l) for l in left),
                sum(1 << self.alpha.index(l) for l in right),
            )
        return self._memo[key]

    def complete_path(self, pairmasks: tuple[int, ...], a: int, b: int):
        key = ("x", pairmasks, a, b)
        if key not in self._memo:
            labels = lcl.path_complete_labeling(
                self.pair_tables(pairmasks), self.alpha, self.alpha[a], self.alpha[b]
            )
            if labels is None:
                raise lcl.LclError("boundary labels not completable")
            self._memo[key] = tuple(self.alpha.index(l) for l in labels)
        return self._memo[key]

    # ---- node program -------------------------------------------------------

    def init(self, ctx):
        st = NodeState(ctx.degree)
        black = ctx.inputs[0]
        if ctx.degree == 0:
            if not lcl._node_satisfied(self.spec, black, []):
                raise lcl.LclError("unsolvable single-node instance")
            st.role = DONE
            st.layer = (1, 0, 1)
            pub = self.publish(ctx, st, None, False, 0, None, None, None, None)
            return (st, pub, ((), st.layer, -1, False), None)
        return (st, self.publish(ctx, st, None, False, 0, None, None, None, None), None, 1)

    def publish(self, ctx, st, ext, cand, q, depth, reply, zrel, seg):
        return (
            st.role, st.layer, st.orient_in, ext, cand, q,
            tuple(st.gup), tuple(st.labels), depth, reply,
            st.commit_out, zrel, seg, st.fail,
        )

    def step(self, ctx, st: NodeState, rnd, nbrs):
        sched = self.sched
        blk = sched.block_of(rnd)
        wake = None
        if st.promote_blk != blk:
            st.promote_blk = blk
            st.frozen_reply = None
            st.winner_port = -1
            st.commit_out = None

        if st.role == FREE:
            wake = self.step_free(ctx, st, rnd, blk, nbrs)

        if st.role == INFLIGHT:
            wake = self.step_inflight(ctx, st, rnd, nbrs)
        # nodes that ever belonged to an in-flight path keep relaying the
        # ruling-set window: enclosure and spacing decisions of nodes farther
        # along the path depend on entries passing through decided ones
        zrel = None
        if st.path_ports is not None and (st.cut_round >= 0 or st.zflag):
            zrel = self.merge_zrel(ctx, st, nbrs)

        if st.role in (RAKE, SEG):
            self.run_label_machinery(ctx, st, nbrs)

        ext = self.calc_extents(ctx, st, nbrs)
        cand = self.calc_rakecand(ctx, st, rnd, blk, nbrs)
        q = self.calc_qcount(ctx, st, nbrs)
        depth = self.calc_pdepth(ctx, st, nbrs)
        reply = self.calc_reply(ctx, st, rnd, blk, nbrs, depth, q)
        self.handle_commits(ctx, st, rnd, blk, nbrs, depth)
        seg = self.merge_seg(ctx, st, nbrs) if st.role == SEG else None
        if st.role == SEG and seg is not None:
            self.run_seg_machinery(ctx, st, nbrs, seg)

        if st.role != DONE and ctx.degree > 0 and all(l is not None for l in st.labels):
            st.role = DONE
            pub = self.publish(ctx, st, None, False, 0, None, None, zrel, seg)
            out = (tuple(st.labels), st.layer, st.orient_in, st.fail)
            return (st, pub, out, None)

        pub = self.publish(ctx, st, ext, cand, q, depth, reply, zrel, seg)

        if wake is None and st.role in (RAKE, SEG) and depth is not None and depth <= sched.b:
            nxt = sched.reply_round(blk, depth)
            wake = nxt if nxt > rnd else sched.reply_round(blk + 1, depth)
        return (st, pub, None, wake)

    # ---- free nodes ---------------------------------------------------------

    def step_free(self, ctx, st, rnd, blk, nbrs):
        sched = self.sched
        if blk >= 2 and rnd == sched.cut_round(blk):
            self.try_cut(ctx, st, rnd, blk, nbrs)
            if st.role != FREE:
                return None
        first = sched.rake_first_round(blk)
        off = rnd - first
        if 0 <= off < 2 * sched.gamma and off % 2 == 1:
            self.try_rake(ctx, st, blk, off // 2 + 1, nbrs)
            if st.role != FREE:
                return None
        return sched.next_free_event(rnd)

    def free_ports(self, nbrs):
        return [p for p, pub in enumerate(nbrs) if pub is not None and pub[P_ROLE] == FREE]

    def calc_extents(self, ctx, st, nbrs):
        if st.role != FREE:
            return None
        fp = self.free_ports(nbrs)
        if len(fp) != 2:
            return None
        cap = self.sched.extent_cap
        vals = []
        for p in fp:
            nx = nbrs[p][P_EXT]
            if nx is None:
                vals.append(0)
            else:
                away = nx[1] if nx[2] == ctx.back_ports[p] else nx[0]
                vals.append(min(cap, away + 1))
        return (vals[0], vals[1], fp[0], fp[1])

    def calc_rakecand(self, ctx, st, rnd, blk, nbrs):
        if st.role != FREE:
            return False
        first = self.sched.rake_first_round(blk)
        off = rnd - first
        if not (0 <= off < 2 * self.sched.gamma and off % 2 == 0):
            return False
        return len(self.free_ports(nbrs)) <= 1

    def try_rake(self, ctx, st, blk, wave, nbrs):
        fp = self.free_ports(nbrs)
        if len(fp) > 1:
            return
        if fp:
            p = fp[0]
            if nbrs[p][P_CAND] and ctx.id > ctx.neighbor_ids[p]:
                return  # adjacent candidate with smaller id rakes instead
            st.orient_in = p
        st.role = RAKE
        st.layer = (blk, 0, wave)

    # ---- the cut -------------------------------------------------------------

    def try_cut(self, ctx, st, rnd, blk, nbrs):
        ext = self.calc_extents(ctx, st, nbrs)
        if ext is None:
            return
        dl, dr, pl, pr = ext
        sched = self.sched
        ell = sched.ell
        if dl + dr + 1 < sched.cap or min(dl, dr) <= ell + 2:
            return
        pos_l, pos_r = dl - (ell + 3), dr - (ell + 3)
        m = dl + dr + 1 - 2 * (ell + 3)
        exact = dl < sched.extent_cap and dr < sched.extent_cap
        if exact and m <= 3 * ell + 3:
            # single-interior split: P_left | seed | P_right
            pos_n = m // 2
            if pos_l == pos_n:
                self.become_seed(ctx, st, blk, (pl, pr))
            else:
                inner = pr if pos_l < pos_n else pl
                self.become_p_side(ctx, st, blk, (pl, pr), inner)
        else:
            if pos_l <= ell:
                self.become_p_side(ctx, st, blk, (pl, pr), pr)
            elif pos_r <= ell:
                self.become_p_side(ctx, st, blk, (pl, pr), pl)
            elif pos_l == ell + 1 or pos_r == ell + 1:
                self.become_seed(ctx, st, blk, (pl, pr))
            else:
                st.role = INFLIGHT
                st.cut_round = rnd
                st.cut_iter = blk
                st.color = ctx.id
                st.cstep = 0
                st.path_ports = (pl, pr)

    def become_seed(self, ctx, st, blk, ports):
        st.role = RAKE
        st.layer = (blk, 0, 1)
        st.zflag = True
        st.cut_iter = blk
        st.cut_round = -2  # marks ruling-set participation without schedules
        st.path_ports = ports

    def become_p_side(self, ctx, st, blk, ports, inner_port):
        st.role = SEG
        st.layer = (blk - 1, 2, 0)
        st.orient_in = inner_port  # the chain hangs below the seed side
        st.path_ports = ports

    # ---- in-flight Z selection -------------------------------------------------

    def step_inflight(self, ctx, st, rnd, nbrs):
        if self.randomized:
            wake = self.rand_inflight(ctx, st, rnd, nbrs)
        else:
            wake = self.det_inflight(ctx, st, rnd, nbrs)
        if st.role == INFLIGHT:
            self.try_enclose(ctx, st, nbrs)
            if st.role != INFLIGHT:
                return None
        return wake

    def det_inflight(self, ctx, st, rnd, nbrs):
        sched = self.sched
        total = len(self.csched) + self.z_palette
        if st.cstep < total and rnd >= sched.inflight_step_round(st.cut_round, st.cstep):
            idx = st.cstep
            rel = self.merge_zrel(ctx, st, nbrs)
            if idx < len(self.csched):
                step = self.csched[idx]
                if step[0] != "done":
                    nbr_colors = [
                        e[2] for e in rel
                        if e[0] != 0 and abs(e[0]) <= sched.ell and e[2] >= 0
                    ]
                    st.color = apply_reduction_step(step, st.color, nbr_colors)
            else:
                cls = idx - len(self.csched)
                if st.color == cls and self.z_join_ok(rel):
                    self.join_z(ctx, st)
            st.cstep = idx + 1
        if st.role != INFLIGHT or st.cstep >= total:
            return None
        return sched.inflight_step_round(st.cut_round, st.cstep)

    def rand_inflight(self, ctx, st, rnd, nbrs):
        sched = self.sched
        period = sched.elect_period()
        e, off = divmod(rnd - st.cut_round, period)
        join_off = sched.ell + 1
        rel = self.merge_zrel(ctx, st, nbrs)
        if off == 0:
            st.cand_exec = -1
            if self.no_z_within(rel, sched.ell):
                rng = random.Random(f"{ctx.rng_seed}:elect:{e}")
                if rng.random() < 1.0 / (2 * sched.ell):
                    st.cand_exec = e
            if e > self.r_max:
                st.fail = True
        elif off == join_off and st.cand_exec == e:
            others = any(
                en[0] != 0 and abs(en[0]) <= sched.ell
                and en[4] == e and en[3] == UNDECIDED
                for en in rel
            )
            if not others and self.z_join_ok(rel):
                self.join_z(ctx, st)
        if st.role != INFLIGHT:
            return None
        nxt = st.cut_round + e * period + (join_off if off < join_off else period)
        return max(nxt, rnd + 1)

    def join_z(self, ctx, st):
        st.role = RAKE
        st.layer = (st.cut_iter, 0, 1)
        st.zflag = True

    def merge_zrel(self, ctx, st, nbrs):
        """My window of (pos, id, color, zstate, cand_exec) path entries;
        positive positions toward path_ports[1].  A neighbor's entries on its
        far side (opposite the side where it lists me) sit at |pos|+1 from
        me; if it does not list me yet, all its entries are far-side."""
        w = self.sched.relay_w
        if st.zflag:
            mystate = ZNODE
        elif st.role == INFLIGHT:
            mystate = UNDECIDED
        else:
            mystate = SEGED
        entries = {0: (0, ctx.id, st.color, mystate, st.cand_exec)}
        for sign, p in ((-1, st.path_ports[0]), (1, st.path_ports[1])):
            pub = nbrs[p]
            rel = pub[P_ZREL] if pub is not None else None
            if rel is None:
                continue
            my_sign = 0
            for pos, nid, *_ in rel:
                if nid == ctx.id:
                    my_sign = 1 if pos > 0 else -1
                    break
            for pos, nid, col, zst, ce in rel:
                if nid == ctx.id or (my_sign and pos * my_sign > 0):
                    continue
                np = sign * (abs(pos) + 1)
                if abs(np) <= w:
                    entries.setdefault(np, (np, nid, col, zst, ce))
        return tuple(entries[k] for k in sorted(entries))

    def nearest_z(self, rel):
        near_l = near_r = None
        for pos, nid, col, zst, ce in rel:
            if zst == ZNODE:
                if pos < 0 and (near_l is None or -pos < near_l):
                    near_l = -pos
                if pos > 0 and (near_r is None or pos < near_r):
                    near_r = pos
        return near_l, near_r

    def no_z_within(self, rel, radius):
        nl, nr = self.nearest_z(rel)
        return not (
            (nl is not None and nl <= radius) or (nr is not None and nr <= radius)
        )

    def z_join_ok(self, rel):
        """Joining keeps every gap to the nearest ruling-set node >= ell."""
        ell = self.sched.ell
        nl, nr = self.nearest_z(rel)
        return all(d is None or d >= ell + 1 for d in (nl, nr))

    def try_enclose(self, ctx, st, nbrs):
        rel = self.merge_zrel(ctx, st, nbrs)
        nl, nr = self.nearest_z(rel)
        if nl is not None and nr is not None and nl + nr <= 2 * self.sched.ell + 1:
            st.role = SEG
            st.layer = (st.cut_iter - 1, 2, 0)

    # ---- promotion -------------------------------------------------------------

    def children_ports(self, ctx, nbrs):
        return [
            p for p, pub in enumerate(nbrs)
            if pub is not None and pub[P_ORIENT] == ctx.back_ports[p]
        ]

    def calc_qcount(self, ctx, st, nbrs):
        if st.role == DONE or all(l is not None for l in st.labels) and ctx.degree:
            return 0
        total = 1 if st.role in (RAKE, SEG) else 0
        for p in self.children_ports(ctx, nbrs):
            pub = nbrs[p]
            if st.layer is not None and pub[P_LAYER] is not None and pub[P_LAYER] > st.layer:
                continue
            total += pub[P_Q]
        return total

    def calc_pdepth(self, ctx, st, nbrs):
        if st.role not in (RAKE, SEG) or st.orient_in < 0:
            return None
        pub = nbrs[st.orient_in]
        if pub is None:
            return None
        if pub[P_ROLE] == FREE:
            return 1
        pd = pub[P_DEPTH]
        return None if pd is None else min(pd + 1, self.sched.max_promote_depth + 1)

    def calc_reply(self, ctx, st, rnd, blk, nbrs, depth, q):
        """Frozen per block: the best promotion candidate in my oriented
        subtree, as (quality, id, guard).  Candidates sit at depth in
        [ell+1, max_promote_depth]; the guard accumulates compress-form
        layers along the winning chain (including the candidate)."""
        md = self.sched.max_promote_depth
        if st.role not in (RAKE, SEG) or depth is None or depth > md:
            return st.frozen_reply
        if st.frozen_reply is None and rnd >= self.sched.reply_round(blk, depth):
            my_form = st.layer is not None and st.layer[1] in (1, 2)
            best, bp = None, -1
            if self.sched.ell + 1 <= depth <= md and not my_form and q > 0:
                best = (q, ctx.id, False)
            for p in self.children_ports(ctx, nbrs):
                r = nbrs[p][P_REPLY]
                if r is None:
                    continue
                if best is None or (r[0], -r[1]) > (best[0], -best[1]):
                    best, bp = r, p
            if best is not None:
                st.frozen_reply = (best[0], best[1], best[2] or my_form)
                st.winner_port = bp
        return st.frozen_reply

    def handle_commits(self, ctx, st, rnd, blk, nbrs, depth):
        sched = self.sched
        if st.role == FREE and rnd == sched.commit_round(blk) and st.commit_out is None:
            # promote independently along every assigned child direction
            grants = []
            for p in self.children_ports(ctx, nbrs):
                r = nbrs[p][P_REPLY]
                if r is not None and r[0] > 0 and not r[2]:
                    grants.append((ctx.neighbor_ids[p], r[1]))
            if grants:
                st.commit_out = (blk, tuple(grants))
        if (
            st.role in (RAKE, SEG)
            and st.commit_blk < blk
            and depth is not None
            and depth <= sched.max_promote_depth
            and st.orient_in >= 0
        ):
            par = nbrs[st.orient_in]
            com = par[P_COMMIT] if par is not None else None
            if com is not None and com[0] == blk:
                target = None
                for hop, tgt in com[1]:
                    if hop == ctx.id:
                        target = tgt
                        break
                if target is not None:
                    st.commit_blk = blk
                    if target == ctx.id:
                        st.layer = (blk + 1, 0, 1)
                        st.promoted = True
                    else:
                        st.layer = (blk, 1, 0)
                        st.role = SEG
                        st.path_ports = (st.orient_in, st.winner_port)
                        st.commit_out = (
                            blk,
                            ((ctx.neighbor_ids[st.winner_port], target),),
                        )

    # ---- label machinery: rake nodes ---------------------------------------

    def port_class(self, ctx, st, p, pub):
        """'below', 'up', or 'pending' relative to my layer."""
        if pub is None:
            return "pending"
        role, layer = pub[P_ROLE], pub[P_LAYER]
        if role == FREE:
            return "up"
        if role == INFLIGHT or layer is None:
            return "pending"
        if layer < st.layer:
            return "below"
        if layer > st.layer:
            return "up"
        return "equal"

    def below_gup(self, ctx, nbrs, p):
        pub = nbrs[p]
        return pub[P_GUP][ctx.back_ports[p]] if pub is not None else None

    def run_label_machinery(self, ctx, st, nbrs):
        if st.role != RAKE:
            return
        classes = [self.port_class(ctx, st, p, nbrs[p]) for p in range(ctx.degree)]
        if "pending" in classes or "equal" in classes:
            return
        below = [p for p, c in enumerate(classes) if c == "below"]
        ups = [p for p, c in enumerate(classes) if c == "up"]
        masks = [self.below_gup(ctx, nbrs, p) for p in below]
        if any(m is None for m in masks):
            return
        black = ctx.inputs[0]
        if len(ups) == 1:
            up = ups[0]
            if st.gup[up] is None:
                st.gup[up] = self.gup_mask(black, tuple(masks))
                if st.gup[up] == 0:
                    raise lcl.LclError(f"empty label set at node {ctx.node}")
            up_pub = nbrs[up]
            lab = up_pub[P_LAB][ctx.back_ports[up]] if up_pub is not None else None
            if lab is not None and st.labels[up] is None:
                chosen = self.choose_fixed(black, tuple(masks), (lab,))
                st.labels[up] = lab
                for p, l in zip(below, chosen):
                    st.labels[p] = l
        elif len(ups) == 0:
            # local maximum: fix every incident edge at once
            if any(st.labels[p] is None for p in range(ctx.degree)):
                chosen = self.choose_fixed(black, tuple(masks), ())
                for p, l in zip(below, chosen):
                    st.labels[p] = l

    # ---- label machinery: compress components --------------------------------

    def seg_port_sides(self, ctx, st, nbrs):
        """(member_ports, boundary_ports, unknown) among my path ports."""
        members, bounds, unknown = [], [], []
        for p in st.path_ports:
            if p < 0:
                continue
            pub = nbrs[p]
            if pub is None:
                unknown.append(p)
            elif pub[P_ROLE] in (SEG, DONE) and pub[P_LAYER] == st.layer:
                members.append(p)
            elif pub[P_ROLE] == INFLIGHT:
                unknown.append(p)
            else:
                bounds.append(p)
        return members, bounds, unknown

    def my_pairmask(self, ctx, st, nbrs):
        below = [
            p for p in range(ctx.degree)
            if p not in st.path_ports
        ]
        masks = [self.below_gup(ctx, nbrs, p) for p in below]
        if any(m is None for m in masks):
            return None, None
        return self.pair_mask(ctx.inputs[0], tuple(masks)), tuple(masks)

    def merge_seg(self, ctx, st, nbrs):
        pm, _ = self.my_pairmask(ctx, st, nbrs)
        mine = ("N", ctx.id, pm)
        members, bounds, unknown = self.seg_port_sides(ctx, st, nbrs)
        parts = []
        for p in st.path_ports:
            if p < 0:
                continue
            if p in bounds:
                pub = nbrs[p]
                lab = pub[P_LAB][ctx.back_ports[p]] if pub is not None else None
                parts.append((("B", lab),))
            elif p in members:
                s = nbrs[p][P_SEG]
                if s is None:
                    parts.append(None)
                else:
                    parts.append(self.orient_part(s, ctx.id, ctx.neighbor_ids[p]))
            else:
                parts.append(None)
        left = parts[0] if parts else None
        right = parts[1] if len(parts) > 1 else None
        seg = (left or ()) + (mine,) + tuple(reversed(right or ()))
        return seg

    @staticmethod
    def orient_part(s, my_id, nbr_id):
        """The neighbor's seg, truncated and ordered to end at the neighbor
        (so it can be glued on one side of my own entry)."""
        ids = [e[1] if e[0] == "N" else None for e in s]
        if my_id in ids:
            i = ids.index(my_id)
            j = i - 1 if i > 0 and ids[i - 1] == nbr_id else i + 1
            if j < i:
                return tuple(s[:i])
            return tuple(reversed(s[i + 1 :]))
        if nbr_id in ids:
            j = ids.index(nbr_id)
            # keep the side of the neighbor's view away from me: unknown side;
            # safe choice: the prefix ending at the neighbor in either order
            if j == len(s) - 1:
                return tuple(s)
            if j == 0:
                return tuple(reversed(s))
        return None

    def run_seg_machinery(self, ctx, st, nbrs, seg):
        if seg is None or len(seg) < 3:
            return
        if seg[0][0] != "B" or seg[-1][0] != "B":
            return
        inner = seg[1:-1]
        if any(e[0] != "N" or e[2] is None for e in inner):
            return
        ids = [e[1] for e in inner]
        rids = list(reversed(ids))
        flipped = rids < ids
        canon = tuple(reversed(seg)) if flipped else seg
        pairmasks = tuple(e[2] for e in canon[1:-1])
        gl, gr = self.f_rectangle(pairmasks)
        cid = [e[1] for e in canon[1:-1]]
        t = cid.index(ctx.id)
        # endpoint members publish the rectangle masks on the boundary edge
        members, bounds, unknown = self.seg_port_sides(ctx, st, nbrs)
        if t == 0 and bounds:
            bp = self.boundary_port_for(ctx, st, nbrs, cid, t)
            if bp is not None and st.gup[bp] is None:
                st.gup[bp] = gl
        if t == len(cid) - 1 and bounds:
            bp = self.boundary_port_for(ctx, st, nbrs, cid, t)
            if bp is not None and st.gup[bp] is None:
                st.gup[bp] = gr
        la, lb = canon[0][1], canon[-1][1]
        if la is None or lb is None:
            return
        if any(l is None for l in st.labels):
            edge_labels = self.complete_path(pairmasks, la, lb)
            # my path edges: (t, t+1) in canonical edge indexing
            left_lab, right_lab = edge_labels[t], edge_labels[t + 1]
            lp, rp = self.my_canonical_ports(ctx, st, nbrs, cid, t)
            fixed_ports, fixed_vals = [], []
            if lp is not None:
                st.labels[lp] = left_lab
                fixed_ports.append(lp)
                fixed_vals.append(left_lab)
            if rp is not None:
                st.labels[rp] = right_lab
                fixed_ports.append(rp)
                fixed_vals.append(right_lab)
            below = [p for p in range(ctx.degree) if p not in st.path_ports]
            masks = tuple(self.below_gup(ctx, nbrs, p) for p in below)
            if any(m is None for m in masks):
                return
            chosen = self.choose_fixed(ctx.inputs[0], masks, tuple(fixed_vals))
            for p, l in zip(below, chosen):
                st.labels[p] = l

    def boundary_port_for(self, ctx, st, nbrs, cid, t):
        members, bounds, unknown = self.seg_port_sides(ctx, st, nbrs)
        if len(bounds) == 1:
            return bounds[0]
        if len(bounds) == 2:
            # single-member component: left boundary is the canonical left
            return bounds[0] if t == 0 else bounds[1]
        return None

    def my_canonical_ports(self, ctx, st, nbrs, cid, t):
        """(port toward canonical-left neighbor-or-boundary, port toward
        canonical-right)."""
        members, bounds, unknown = self.seg_port_sides(ctx, st, nbrs)
        left_id = cid[t - 1] if t > 0 else None
        right_id = cid[t + 1] if t + 1 < len(cid) else None
        lp = rp = None
        for p in members:
            nid = ctx.neighbor_ids[p]
            if nid == left_id:
                lp = p
            elif nid == right_id:
                rp = p
        remaining = [p for p in bounds if p not in (lp, rp)]
        if left_id is None and remaining:
            lp = remaining[0]
            remaining = remaining[1:]
        if right_id is None and remaining:
            rp = remaining[0]
        return lp, rp
