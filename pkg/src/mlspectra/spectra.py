"""Markov and Lagrange values of eventually periodic bi-infinite sequences,
window enclosures for search, the cut-comparison lemma, and the Sigma(t, n)
deepening enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Union

from .cf_core import (
    AlgebraicValue,
    EmptyWordError,
    ExactValue,
    IntervalBound,
    QuadraticSurd,
    Word,
    concat_words,
    eval_periodic,
    exact_compare,
    extreme_tail_values,
    run,
    tail_interval,
    transpose,
    word,
)


@dataclass(frozen=True)
class BiInfiniteSpec:
    """Eventually periodic bi-infinite sequence.

    ``left_transient`` and ``left_period`` are stored in outward reading
    order: the left tail value at the center is exactly
    ``[0; left_transient, left_period, left_period, ...]``.  The right side
    is stored in natural reading order.
    """

    left_period: Word
    left_transient: Word
    center: int
    right_transient: Word
    right_period: Word

    def __post_init__(self):
        if len(self.left_period) == 0 or len(self.right_period) == 0:
            raise ValueError("periods must be nonempty")
        if self.center < 1:
            raise ValueError("letters must be positive")

    def letter(self, j: int) -> int:
        if j == 0:
            return self.center
        if j > 0:
            m = j - 1
            rt = self.right_transient.letters
            if m < len(rt):
                return rt[m]
            per = self.right_period.letters
            return per[(m - len(rt)) % len(per)]
        m = -j - 1
        lt = self.left_transient.letters
        if m < len(lt):
            return lt[m]
        per = self.left_period.letters
        return per[(m - len(lt)) % len(per)]

    def right_ray(self, j: int) -> tuple[Word, Word]:
        """(transient, period) of the ray a_j, a_{j+1}, ... reading rightward."""
        rt = self.right_transient.letters
        per = self.right_period.letters
        if j >= 1:
            m = j - 1
            if m < len(rt):
                return Word(rt[m:]), self.right_period
            off = (m - len(rt)) % len(per)
            return Word(()), Word(per[off:] + per[:off])
        head = tuple(self.letter(t) for t in range(j, 1))
        return Word(head + rt), self.right_period

    def left_ray(self, j: int) -> tuple[Word, Word]:
        """(transient, period) of the ray a_j, a_{j-1}, ... reading leftward."""
        lt = self.left_transient.letters
        per = self.left_period.letters
        if j <= -1:
            m = -j - 1
            if m < len(lt):
                return Word(lt[m:]), self.left_period
            off = (m - len(lt)) % len(per)
            return Word(()), Word(per[off:] + per[:off])
        head = tuple(self.letter(t) for t in range(j, -1, -1))
        return Word(head + lt), self.left_period

    @staticmethod
    def purely_periodic(period: Word) -> "BiInfiniteSpec":
        """The periodic sequence ... w w | w w ... with a_0 the first letter."""
        p = period.unmarked().letters
        return BiInfiniteSpec(
            left_period=Word(tuple(reversed(p))),
            left_transient=Word(()),
            center=p[0],
            right_transient=Word(p[1:]),
            right_period=Word(p),
        )


SpectrumValue = Union[QuadraticSurd, AlgebraicValue]


def _collapse(v: AlgebraicValue) -> SpectrumValue:
    try:
        return v.as_surd()
    except ValueError:
        return v


def lambda_at(spec: BiInfiniteSpec, i: int) -> SpectrumValue:
    """Exact lambda_i = a_i + [0; a_{i+1}, ...] + [0; a_{i-1}, ...]."""
    a_i = spec.letter(i)
    r_tr, r_per = spec.right_ray(i + 1)
    l_tr, l_per = spec.left_ray(i - 1)
    right = eval_periodic(r_tr, r_per)
    left = eval_periodic(l_tr, l_per)
    return _collapse(AlgebraicValue.of(right) + left + Fraction(a_i))


def markov_value_periodic(period: Word) -> tuple[QuadraticSurd, int]:
    """Exact sup of lambda_i over the periodic word, with the smallest
    attaining index in [0, |period|)."""
    if len(period) == 0:
        raise EmptyWordError("empty-word")
    p = period.unmarked().letters
    L = len(p)
    best: Optional[QuadraticSurd] = None
    best_i = 0
    for i in range(L):
        rot_right = p[(i + 1) % L:] + p[: (i + 1) % L]
        rot_left = tuple(p[(i - 1 - t) % L] for t in range(L))
        lam = AlgebraicValue.of(eval_periodic(Word(()), Word(rot_right)))
        lam = lam + eval_periodic(Word(()), Word(rot_left)) + Fraction(p[i])
        lam_s = lam.as_surd()
        if best is None or lam_s.compare(best) > 0:
            best, best_i = lam_s, i
    assert best is not None
    return best, best_i


def lagrange_value(spec: BiInfiniteSpec) -> QuadraticSurd:
    """limsup of lambda_n as n -> +inf: the Markov value of the right period."""
    return markov_value_periodic(spec.right_period)[0]


# ---------------------------------------------------------------------------
# Window constraints and sound lambda enclosures
# ---------------------------------------------------------------------------


@dataclass
class WindowConstraint:
    """Finite partial assignment offset -> letter of a bi-infinite window."""

    offsets: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for j, a in self.offsets.items():
            if a < 1:
                raise ValueError("letters must be positive")

    def with_letter(self, j: int, a: int) -> "WindowConstraint":
        d = dict(self.offsets)
        d[j] = a
        return WindowConstraint(d)

    def span(self) -> tuple[int, int]:
        if not self.offsets:
            return (0, -1)
        return min(self.offsets), max(self.offsets)


def _interval_reciprocal_step(
    a: Optional[int], v: tuple[Fraction, Fraction], max_letter: int
) -> tuple[Fraction, Fraction]:
    """Enclosure of 1/(a + v) when a is fixed, or over a in {1..max_letter}."""
    lo, hi = v
    if a is not None:
        return (Fraction(1, 1) / (a + hi), Fraction(1, 1) / (a + lo))
    return (Fraction(1, 1) / (max_letter + hi), Fraction(1, 1) / (1 + lo))


def _ray_interval(
    wc: WindowConstraint, start: int, step: int, max_letter: int
) -> tuple[Fraction, Fraction]:
    """Enclosure of [0; a_start, a_{start+step}, ...] over all completions."""
    ti = tail_interval(Word(()), max_letter)
    offsets = [j for j in wc.offsets if (j - start) * step >= 0]
    if not offsets:
        return (ti.lo, ti.hi)
    far = max(offsets, key=lambda j: (j - start) * step)
    v = (ti.lo, ti.hi)
    j = far
    while (j - start) * step >= 0:
        v = _interval_reciprocal_step(wc.offsets.get(j), v, max_letter)
        j -= step
    return v


def lambda_bounds(wc: WindowConstraint, i: int, max_letter: int) -> IntervalBound:
    """Sound rational enclosure of lambda_i over every bi-infinite completion
    of the window with letters in {1..max_letter}.

    Monotone: adding constraints never widens the interval.
    """
    if i not in wc.offsets:
        raise ValueError("offset i must be constrained")
    a_i = wc.offsets[i]
    r_lo, r_hi = _ray_interval(wc, i + 1, +1, max_letter)
    l_lo, l_hi = _ray_interval(wc, i - 1, -1, max_letter)
    return IntervalBound(a_i + r_lo + l_lo, a_i + r_hi + l_hi)


# ---------------------------------------------------------------------------
# Cut comparison (the four-cuts lemma)
# ---------------------------------------------------------------------------


class HypothesesNotMet(ValueError):
    pass


@dataclass(frozen=True)
class CutValue:
    name: str
    index: int
    value: SpectrumValue


def cut_comparison(
    k_minus: int,
    k0: int,
    k1: int,
    left_tail: Word,
    right_tail: Word,
) -> list[CutValue]:
    """Exact ordering of the four cut positions of ...1^{k-}221^{k0}221^{k1}...

    ``left_tail`` and ``right_tail`` are the periodic completions, both given
    in natural reading order.  Hypotheses: k0 odd, k_minus, k1 > k0 >= 3, and
    the parity combination covered by the lemma; otherwise HypothesesNotMet.
    Returns the cuts sorted by decreasing lambda; the lemma's assertions are
    verified exactly and an AssertionError would flag a violation.
    """
    if k0 % 2 == 0 or k0 < 3 or k_minus <= k0 or k1 <= k0:
        raise HypothesesNotMet("hypotheses-not-met: need odd k0 >= 3 and k-1,k1 > k0")
    case_a = (k_minus % 2 == 0 and k1 % 2 == 1) or (
        k_minus % 2 == 1 and k1 % 2 == 1 and k_minus > k1
    )
    case_b = k_minus % 2 == 0 and k1 % 2 == 0 and k_minus > k1
    if not (case_a or case_b):
        raise HypothesesNotMet("hypotheses-not-met: parity combination not covered")
    if len(left_tail) == 0 or len(right_tail) == 0:
        raise ValueError("tails must be nonempty")
    # center at the first 2 of the middle 22 block
    spec = BiInfiniteSpec(
        left_period=transpose(left_tail),
        left_transient=run(1, k0) + word(2, 2) + run(1, k_minus),
        center=2,
        right_transient=word(2) + run(1, k1),
        right_period=right_tail,
    )
    p2 = 0  # ...1^{k0} | 2 2 1^{k1}...
    p1 = -(k0 + 1)  # ...1^{k-} 2 2 | 1^{k0}...
    p0 = -(k0 + 2)  # ...1^{k-} | 2 2 1^{k0}...
    p3 = 1  # ...1^{k0} 2 2 | 1^{k1}...
    cuts = {
        "22|1^k0": lambda_at(spec, p1),
        "1^k0|22": lambda_at(spec, p2),
        "1^k0 22|1^k1": lambda_at(spec, p3),
        "1^k-|22 1^k0": lambda_at(spec, p0),
    }
    lam1, lam2 = cuts["22|1^k0"], cuts["1^k0|22"]
    three = Fraction(3)
    if case_a:
        assert exact_compare(lam1, lam2) > 0 and exact_compare(lam2, three) > 0
    else:
        assert exact_compare(lam2, lam1) > 0 and exact_compare(lam1, three) > 0
    assert exact_compare(lam2, cuts["1^k0 22|1^k1"]) > 0
    assert exact_compare(lam1, cuts["1^k-|22 1^k0"]) > 0
    indexed = {
        "22|1^k0": p1,
        "1^k0|22": p2,
        "1^k0 22|1^k1": p3,
        "1^k-|22 1^k0": p0,
    }
    ordered = sorted(
        (CutValue(name, indexed[name], val) for name, val in cuts.items()),
        key=lambda cv: cv.value.to_mpf(60),
        reverse=True,
    )
    # confirm the float ordering exactly
    for a, b in zip(ordered, ordered[1:]):
        assert exact_compare(a.value, b.value) >= 0
    return ordered


# ---------------------------------------------------------------------------
# Sigma(t, n) deepening enumeration
# ---------------------------------------------------------------------------


def _window_ok(wc: WindowConstraint, t, max_letter: int, positions: Iterable[int]) -> bool:
    for i in positions:
        lb = lambda_bounds(wc, i, max_letter)
        if exact_compare(lb.lo, t) > 0:
            return False
    return True


def enumerate_sigma(t, n: int, deepen: int, max_letter: int = 2) -> list[Word]:
    """Certified superset of Sigma(t, n): length-n words that survive pruning.

    A word w is kept iff it extends to a window of radius n+deepen in which
    every position's lambda lower bound stays <= t.  The output shrinks as
    ``deepen`` grows and is a superset of the true Sigma(t, n) for every
    deepen (membership of the limit requires an infinite completion, which no
    finite procedure decides; see the stabilization caveat in the CLI docs).
    """
    if n < 1 or deepen < 0:
        raise ValueError("n >= 1 and deepen >= 0 required")
    ext_positions = []
    for d in range(1, deepen + 1):
        ext_positions.append(n - 1 + d)
        ext_positions.append(-d)

    def survives(base: dict[int, int]) -> bool:
        def dfs(k: int, wc: WindowConstraint) -> bool:
            if k == len(ext_positions):
                return True
            pos = ext_positions[k]
            for a in range(1, max_letter + 1):
                nxt = wc.with_letter(pos, a)
                if _window_ok(nxt, t, max_letter, [pos]) and _window_ok(
                    nxt, t, max_letter, [j for j in nxt.offsets if abs(j - pos) <= 2]
                ):
                    if dfs(k + 1, nxt):
                        return True
            return False

        wc = WindowConstraint(dict(base))
        if not _window_ok(wc, t, max_letter, list(base)):
            return False
        return dfs(0, wc)

    out: list[Word] = []

    def gen(prefix: tuple[int, ...]):
        if len(prefix) == n:
            base = {j: a for j, a in enumerate(prefix)}
            if survives(base):
                out.append(Word(prefix))
            return
        for a in range(1, max_letter + 1):
            cand = prefix + (a,)
            wc = WindowConstraint({j: x for j, x in enumerate(cand)})
            if _window_ok(wc, t, max_letter, range(len(cand))):
                gen(cand)

    gen(())
    return out
