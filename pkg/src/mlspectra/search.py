"""Branch-and-bound search over bi-infinite windows.

The engine grows a contiguous window of letters around position 0 and prunes
branches whose lambda enclosures provably contradict the target condition
m(theta) = lambda_0(theta) with lambda_0 inside a prescribed band around a
Markov value.  All pruning tests are interval tests with exact rational
endpoints (kept as raw integer pairs in the hot paths), so a pruned branch
admits no completion satisfying the condition; survivors are compared against
forced letter patterns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .cf_core import (
    AlgebraicValue,
    QuadraticSurd,
    Word,
    sign_two_term,
    tail_interval,
)

_TAIL_CACHE: dict[tuple[int, int], tuple[int, int, int, int]] = {}


def _free_tail(max_letter: int, bits: int) -> tuple[int, int, int, int]:
    """(lo_n, lo_d, hi_n, hi_d) enclosing all tail values [0; c_1, c_2, ...]."""
    key = (max_letter, bits)
    if key not in _TAIL_CACHE:
        iv = tail_interval(Word(()), max_letter, bits)
        _TAIL_CACHE[key] = (
            iv.lo.numerator,
            iv.lo.denominator,
            iv.hi.numerator,
            iv.hi.denominator,
        )
    return _TAIL_CACHE[key]


def _cmp_pair_surd(n: int, d: int, s: QuadraticSurd) -> int:
    """Exact sign of n/d - s for d > 0."""
    return sign_two_term(n * s.c - s.a * d, -s.b * d, s.D)


class _Side:
    """Letters of one ray from the center with incremental continuants."""

    __slots__ = ("letters", "p", "q", "pp", "qq")

    def __init__(self):
        self.letters: list[int] = []
        self.p = [0]
        self.q = [1]
        self.pp = [1]
        self.qq = [0]

    def push(self, a: int):
        self.letters.append(a)
        self.p.append(a * self.p[-1] + self.pp[-1])
        self.pp.append(self.p[-2])
        self.q.append(a * self.q[-1] + self.qq[-1])
        self.qq.append(self.q[-2])

    def pop(self):
        self.letters.pop()
        self.p.pop()
        self.q.pop()
        self.pp.pop()
        self.qq.pop()

    def __len__(self):
        return len(self.letters)

    def value_pair(self, t: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
        """Enclosure of [0; letters, completion] as (lo_n, lo_d, hi_n, hi_d)."""
        tn1, td1, tn2, td2 = t
        if not self.letters:
            return t
        p, q, pp, qq = self.p[-1], self.q[-1], self.pp[-1], self.qq[-1]
        an, ad = p * td1 + pp * tn1, q * td1 + qq * tn1
        bn, bd = p * td2 + pp * tn2, q * td2 + qq * tn2
        if an * bd <= bn * ad:
            return an, ad, bn, bd
        return bn, bd, an, ad


@dataclass
class SearchOutcome:
    verdict: str  # "certified" | "counterexample" | "inconclusive"
    witness: Optional[dict[int, int]]
    survivors: int
    nodes: int
    pruned: int
    frontier: list[dict[int, int]] = field(default_factory=list)
    survivor_windows: Optional[list[dict[int, int]]] = None


class _Stop(Exception):
    pass


def _as_surd(x) -> QuadraticSurd:
    if isinstance(x, QuadraticSurd):
        return x
    if isinstance(x, AlgebraicValue):
        return x.as_surd()
    return QuadraticSurd.from_rational(Fraction(x))


class WindowEngine:
    """Interval branch-and-bound around position 0.

    ``band_lo``/``band_hi`` are exact endpoints of the open lambda_0 band
    (band_lo None gives the one-sided hypothesis m(theta) < band_hi).
    ``seed`` letters are forced by the hypothesis and must form a contiguous
    window around 0.  Survivors are matched against ``forced`` (or any of
    ``forced_alternates``); the first mismatching survivor in the
    deterministic visit order becomes the counterexample witness.

    A subtree is settled early once the window covers every forced/seeded
    position and the lambda_0 enclosure lies strictly inside the band: all
    hypothesis-satisfying completions of such a window share one agreement
    status, so it stands for a whole class of leaves.
    """

    def __init__(
        self,
        band_lo,
        band_hi,
        radius: int,
        *,
        seed: Optional[dict[int, int]] = None,
        forced: Optional[dict[int, int]] = None,
        max_letter: int = 2,
        budget_nodes: int = 10_000_000,
        letter_order: tuple[int, ...] = (1, 2),
        prefer_right: bool = True,
        context: int = 48,
        sweep_every: int = 8,
        collect_survivors: bool = False,
        forced_alternates: Optional[list[dict[int, int]]] = None,
        settle_margin: int = 2,
    ):
        self.band_lo = _as_surd(band_lo) if band_lo is not None else None
        self.band_hi = _as_surd(band_hi)
        self.radius = radius
        self.seed = dict(seed or {})
        self.forced = dict(forced or {})
        self.forced_alternates = [dict(f) for f in (forced_alternates or [])]
        self.max_letter = max_letter
        self.budget_nodes = budget_nodes
        self.letter_order = letter_order
        self.prefer_right = prefer_right
        self.context = context
        self.sweep_every = sweep_every
        self.collect_survivors = collect_survivors
        self.t_full = _free_tail(max_letter, 128)
        self.t_ctx = _free_tail(max_letter, 64)
        if any(abs(j) > radius for j in self.seed):
            raise ValueError("seed outside radius")
        if self.seed:
            js = sorted(self.seed)
            if js != list(range(js[0], js[-1] + 1)) or not (js[0] <= 0 <= js[-1]):
                raise ValueError("seed must be a contiguous window containing 0")
        relevant = set(self.forced) | set(self.seed) | {0}
        for alt in self.forced_alternates:
            relevant |= set(alt)
        # settle only a margin beyond the forced span, so deviations at the
        # pattern boundary are decided with real context
        self._need_right = min(
            radius, max(max((j for j in relevant if j > 0), default=0), 1) + settle_margin
        )
        self._need_left = min(
            radius, max(max((-j for j in relevant if j < 0), default=0), 1) + settle_margin
        )

    # -- enclosures ----------------------------------------------------------

    def _lambda0_pair(self, center, right: _Side, left: _Side):
        rn1, rd1, rn2, rd2 = right.value_pair(self.t_full)
        ln1, ld1, ln2, ld2 = left.value_pair(self.t_full)
        lo_n = center * rd1 * ld1 + rn1 * ld1 + ln1 * rd1
        lo_d = rd1 * ld1
        hi_n = center * rd2 * ld2 + rn2 * ld2 + ln2 * rd2
        hi_d = rd2 * ld2
        return lo_n, lo_d, hi_n, hi_d

    def _letter_at(self, j: int, center, right: _Side, left: _Side) -> Optional[int]:
        if j == 0:
            return center
        if j > 0:
            return right.letters[j - 1] if j - 1 < len(right.letters) else None
        return left.letters[-j - 1] if -j - 1 < len(left.letters) else None

    def _ray_pair_ctx(self, start, step, center, right, left, depth):
        letters = []
        j = start
        for _ in range(depth):
            a = self._letter_at(j, center, right, left)
            if a is None:
                break
            letters.append(a)
            j += step
        lo_n, lo_d, hi_n, hi_d = self.t_ctx
        for a in reversed(letters):
            # 1/(a + hi) .. 1/(a + lo)
            lo_n, lo_d, hi_n, hi_d = hi_d, a * hi_d + hi_n, lo_d, a * lo_d + lo_n
        return lo_n, lo_d, hi_n, hi_d

    def _lambda_pair_at(self, i, center, right, left, depth=None):
        d = depth if depth is not None else self.context
        a_i = self._letter_at(i, center, right, left)
        rn1, rd1, rn2, rd2 = self._ray_pair_ctx(i + 1, +1, center, right, left, d)
        ln1, ld1, ln2, ld2 = self._ray_pair_ctx(i - 1, -1, center, right, left, d)
        lo_n = a_i * rd1 * ld1 + rn1 * ld1 + ln1 * rd1
        lo_d = rd1 * ld1
        hi_n = a_i * rd2 * ld2 + rn2 * ld2 + ln2 * rd2
        hi_d = rd2 * ld2
        return lo_n, lo_d, hi_n, hi_d

    def _band_prune(self, lam0) -> bool:
        lo_n, lo_d, hi_n, hi_d = lam0
        if self.band_lo is not None and _cmp_pair_surd(hi_n, hi_d, self.band_lo) <= 0:
            return True
        return _cmp_pair_surd(lo_n, lo_d, self.band_hi) >= 0

    # -- search --------------------------------------------------------------

    def run(self, enumerate_all: bool = False) -> SearchOutcome:
        R = self.radius
        self._nodes = 0
        self._pruned = 0
        self._survivors = 0
        self._witness: Optional[dict[int, int]] = None
        self._survivor_windows: list[dict[int, int]] = []
        self._frontier: list[dict[int, int]] = []
        self._enumerate = enumerate_all
        self._out_of_budget = False
        self._trail: list[tuple[dict[int, int], int]] = []

        center_letters = (
            [self.seed[0]] if 0 in self.seed else list(self.letter_order)
        )
        try:
            for center in center_letters:
                self._run_center(center, R)
        except _Stop:
            pass

        if self._out_of_budget:
            return SearchOutcome(
                "inconclusive",
                None,
                self._survivors,
                self._nodes,
                self._pruned,
                frontier=self._frontier,
            )
        verdict = "certified" if self._witness is None else "counterexample"
        return SearchOutcome(
            verdict,
            self._witness,
            self._survivors,
            self._nodes,
            self._pruned,
            survivor_windows=(
                self._survivor_windows if self.collect_survivors else None
            ),
        )

    def _run_center(self, center: int, R: int):
        right = _Side()
        left = _Side()
        active: list[int] = [0] if center == 2 else []
        resolved: set[int] = set()
        res_trail: list[int] = []

        def window_dict() -> dict[int, int]:
            d = {0: center}
            for k, a in enumerate(right.letters):
                d[k + 1] = a
            for k, a in enumerate(left.letters):
                d[-k - 1] = a
            return d

        def undo_resolved(upto: int):
            while len(res_trail) > upto:
                resolved.discard(res_trail.pop())

        def position_check(i, lam0, depth=None) -> bool:
            """True if position i proves a contradiction; may mark resolution."""
            lo_n, lo_d, hi_n, hi_d = self._lambda_pair_at(
                i, center, right, left, depth
            )
            l0lo_n, l0lo_d, l0hi_n, l0hi_d = lam0
            if lo_n * l0hi_d > l0hi_n * lo_d:  # lambda_i must exceed lambda_0
                return True
            if _cmp_pair_surd(lo_n, lo_d, self.band_hi) >= 0:
                return True
            if hi_n * l0lo_d < l0lo_n * hi_d:  # permanently below lambda_0
                resolved.add(i)
                res_trail.append(i)
            return False

        def sweep(lam0, depth=None) -> bool:
            for i in list(active):
                if i in resolved:
                    continue
                if position_check(i, lam0, depth):
                    return True
            return False

        def capture_frontier():
            self._frontier.append(window_dict())
            for base, _ in self._trail:
                self._frontier.append(base)

        def dfs(steps_since_sweep: int):
            self._nodes += 1
            if self._nodes > self.budget_nodes:
                self._out_of_budget = True
                capture_frontier()
                raise _Stop()
            lam0 = self._lambda0_pair(center, right, left)
            if self._band_prune(lam0):
                self._pruned += 1
                return
            at_radius = len(right) >= R and len(left) >= R
            settled = False
            if (
                not at_radius
                and len(right) >= self._need_right
                and len(left) >= self._need_left
            ):
                lo_n, lo_d, hi_n, hi_d = lam0
                inside_hi = _cmp_pair_surd(hi_n, hi_d, self.band_hi) < 0
                inside_lo = self.band_lo is None or (
                    _cmp_pair_surd(lo_n, lo_d, self.band_lo) > 0
                )
                settled = inside_hi and inside_lo
            if at_radius or settled:
                res_mark = len(res_trail)
                contradiction = sweep(lam0, depth=len(right) + len(left) + 1)
                undo_resolved(res_mark)
                if contradiction:
                    self._pruned += 1
                    return
                wd = window_dict()
                self._survivors += 1
                if self.collect_survivors:
                    self._survivor_windows.append(wd)
                agrees = all(
                    wd[j] == a for j, a in self.forced.items() if j in wd
                ) or any(
                    all(wd[j] == a for j, a in alt.items() if j in wd)
                    for alt in self.forced_alternates
                )
                if not agrees and self._witness is None:
                    self._witness = wd
                    if not self._enumerate:
                        raise _Stop()
                return
            r_pair = right.value_pair(self.t_full) if len(right) < R else None
            l_pair = left.value_pair(self.t_full) if len(left) < R else None
            if r_pair is None:
                side = left
            elif l_pair is None:
                side = right
            else:
                rn1, rd1, rn2, rd2 = r_pair
                ln1, ld1, ln2, ld2 = l_pair
                # compare widths (rn2/rd2 - rn1/rd1) vs (ln2/ld2 - ln1/ld1)
                rw = (rn2 * rd1 - rn1 * rd2) * ld1 * ld2
                lw = (ln2 * ld1 - ln1 * ld2) * rd1 * rd2
                if rw > lw:
                    side = right
                elif lw > rw:
                    side = left
                else:
                    side = right if self.prefer_right else left
            pos_new = len(right) + 1 if side is right else -(len(left) + 1)
            seeded = self.seed.get(pos_new)
            letters = [seeded] if seeded is not None else list(self.letter_order)
            sweep_now = steps_since_sweep + 1 >= self.sweep_every
            base = window_dict() if len(letters) > 1 else None
            for idx, a in enumerate(letters):
                has_alt = idx + 1 < len(letters)
                if has_alt:
                    alt = dict(base)
                    alt[pos_new] = letters[idx + 1]
                    self._trail.append((alt, pos_new))
                side.push(a)
                if a == 2:
                    active.append(pos_new)
                res_mark = len(res_trail)
                lam = self._lambda0_pair(center, right, left)
                ok = not self._band_prune(lam)
                if ok and a == 2 and position_check(pos_new, lam):
                    ok = False
                if ok and sweep_now and sweep(lam):
                    ok = False
                if ok:
                    dfs(0 if sweep_now else steps_since_sweep + 1)
                else:
                    self._pruned += 1
                undo_resolved(res_mark)
                side.pop()
                if a == 2:
                    active.pop()
                if has_alt:
                    self._trail.pop()

        for j in sorted((j for j in self.seed if j != 0), key=abs):
            sd = right if j > 0 else left
            sd.push(self.seed[j])
            if self.seed[j] == 2:
                active.append(j)
        lam0 = self._lambda0_pair(center, right, left)
        if self._band_prune(lam0):
            self._pruned += 1
            return
        if sweep(lam0):
            self._pruned += 1
            return
        dfs(0)
