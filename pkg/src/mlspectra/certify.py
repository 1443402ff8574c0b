"""Certification engine: rectangle schedules, the exact desk-scale separation
oracles, Baker-bound evaluation, and the branch-and-bound certifiers for
local uniqueness, self-replication, isolation, and the difference-Cantor
attachment.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Optional, Sequence

import mpmath

from .cf_core import (
    PHI,
    AlgebraicValue,
    QuadraticSurd,
    Word,
    concat_words,
    continuants,
    eval_periodic,
    exact_compare,
    run,
    sizes,
    transpose,
    word,
    word_to_text,
)
from .cantor import CONSTANTS, GaussCantorSpec, family
from .search import SearchOutcome, WindowEngine
from .spectra import BiInfiniteSpec, lambda_at, markov_value_periodic
from .words import CandidateWord

TOOL_VERSION = "mlspectra 0.1.0"


# ---------------------------------------------------------------------------
# Heights and the Baker-Wuestholz bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeightedAlgebraic:
    """A surd with its minimal primitive polynomial and logarithmic height."""

    surd: QuadraticSurd
    degree: int
    poly: tuple[int, ...]  # coefficients, leading first
    height: mpmath.mpf

    def conjugates(self) -> list[mpmath.mpf]:
        x = self.surd
        if self.degree == 1:
            return [x.to_mpf()]
        conj = QuadraticSurd.make(x.a, -x.b, x.c, x.D)
        return [x.to_mpf(), conj.to_mpf()]


def height(x: QuadraticSurd) -> HeightedAlgebraic:
    """Absolute logarithmic height from the minimal primitive polynomial."""
    if x.sign() == 0:
        raise ValueError("height of zero is undefined")
    if x.is_rational:
        f = x.as_fraction()
        poly = (f.denominator, -f.numerator)
        h = mpmath.log(max(abs(f.numerator), f.denominator))
        return HeightedAlgebraic(surd=x, degree=1, poly=poly, height=h)
    # (c z - a)^2 = b^2 D  ->  c^2 z^2 - 2 a c z + a^2 - b^2 D = 0
    a, b, c, D = x.a, x.b, x.c, x.D
    coeffs = [c * c, -2 * a * c, a * a - b * b * D]
    g = math.gcd(math.gcd(abs(coeffs[0]), abs(coeffs[1])), abs(coeffs[2]))
    coeffs = [v // g for v in coeffs]
    if coeffs[0] < 0:
        coeffs = [-v for v in coeffs]
    with mpmath.workdps(40):
        conj = QuadraticSurd.make(a, -b, c, D)
        h = (
            mpmath.log(coeffs[0])
            + mpmath.log(max(abs(x.to_mpf()), mpmath.mpf(1)))
            + mpmath.log(max(abs(conj.to_mpf()), mpmath.mpf(1)))
        ) / 2
    return HeightedAlgebraic(surd=x, degree=2, poly=tuple(coeffs), height=h)


def baker_C(n: int, d: int) -> mpmath.mpf:
    """The explicit constant 18 (n+1)! n^{n+1} (32 d)^{n+2} log(2 n d)."""
    return (
        18
        * mpmath.factorial(n + 1)
        * mpmath.mpf(n) ** (n + 1)
        * mpmath.mpf(32 * d) ** (n + 2)
        * mpmath.log(2 * n * d)
    )


def baker_bound(gammas: Sequence[HeightedAlgebraic], B) -> mpmath.mpf:
    """Lower bound exp(-C(n,d) A_1...A_n log B) for |gamma_1^{b_1}...gamma_n^{b_n} - 1|.

    d is the degree of the compositum; for surds it is 2 as soon as one input
    is irrational (all irrational inputs here live in one quadratic field).
    """
    n = len(gammas)
    if n == 0:
        raise ValueError("need at least one gamma")
    for g in gammas:
        if g.surd.sign() == 0 or g.surd == Fraction(1):
            raise ValueError("gammas must be nonzero and different from 1")
    d = 2 if any(g.degree == 2 for g in gammas) else 1
    B = mpmath.mpf(B)
    if B < mpmath.exp(mpmath.mpf(1) / d):
        raise ValueError("B must be >= e^{1/d} and >= max |b_i|")
    with mpmath.workdps(40):
        C = baker_C(n, d)
        As = []
        for g in gammas:
            As.append(
                max(g.height, abs(mpmath.log(abs(g.surd.to_mpf()))) / d, mpmath.mpf(1) / d)
            )
        expo = -C * mpmath.fprod(As) * mpmath.log(B)
        return mpmath.exp(expo)


# ---------------------------------------------------------------------------
# Rectangle schedule
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RectangleStep:
    left_word: Word
    right_word: Word
    mu: Fraction  # exact |I(left)| / |I(right)|
    mu_log: float  # log mu / log phi
    classification: Literal["typical", "exceptional"]
    distorted: bool
    side: Literal["both", "left-only", "right-only"]


class ScheduleError(ValueError):
    pass


def rectangle_schedule(cand: CandidateWord) -> list[RectangleStep]:
    """The product-cylinder subdivision sequence implied by the exponents.

    Rectangles are I(eta_h^T ... ) x I(11 eta_{h-1}^T ...).  A typical
    rectangle refines both sides, an exceptional one only its larger side;
    a step outside both bands raises ScheduleError.  The alternation rule
    (an exceptional step is preceded and followed by typical ones) is
    verified.
    """
    n = 2 * cand.k - 1
    with mpmath.workdps(40):
        log_phi = mpmath.log(PHI.to_mpf())
        typ_band = n + 2 * n / math.sqrt(math.log(n))
        exc_band = n + 5 * n / math.sqrt(math.log(n))
        dis_band = math.log(math.log(n)) ** 4

        right_blocks = [transpose(cand.block(1))] + [
            transpose(cand.block(i)) for i in range(2, cand.N + 1)
        ]
        left_blocks = [transpose(cand.block(-i)) for i in range(1, cand.M + 1)]
        steps: list[RectangleStep] = []
        i_r, i_l = 1, 1
        while True:
            rw = concat_words(right_blocks[:i_r])
            lw = word(1, 1) + concat_words(left_blocks[:i_l])
            mu = sizes(lw) / sizes(rw)
            mu_log = float(
                (mpmath.log(mpmath.mpf(mu.numerator)) - mpmath.log(mpmath.mpf(mu.denominator)))
                / log_phi
            )
            if abs(mu_log) < typ_band:
                classification = "typical"
            elif abs(mu_log) < exc_band:
                classification = "exceptional"
            else:
                raise ScheduleError(
                    f"step ({i_r},{i_l}) violates the mu band: |log mu/log phi| = {abs(mu_log):.2f}"
                )
            distorted = dis_band < abs(mu_log)
            can_r = i_r < len(right_blocks)
            can_l = i_l < len(left_blocks)
            if not can_r and not can_l:
                side = "both"
            elif classification == "typical":
                side = "both" if (can_r and can_l) else ("right-only" if can_r else "left-only")
            else:
                side = "left-only" if mu > 1 else "right-only"
                if side == "left-only" and not can_l:
                    side = "right-only"
                if side == "right-only" and not can_r:
                    side = "left-only"
            steps.append(
                RectangleStep(
                    left_word=lw,
                    right_word=rw,
                    mu=mu,
                    mu_log=mu_log,
                    classification=classification,
                    distorted=distorted,
                    side=side,
                )
            )
            if not can_r and not can_l:
                break
            if side in ("both", "right-only") and can_r:
                i_r += 1
            if side in ("both", "left-only") and can_l:
                i_l += 1
        for a, b in zip(steps, steps[1:]):
            if a.classification == "exceptional" and b.classification == "exceptional":
                raise ScheduleError("two consecutive exceptional rectangles")
        return steps


# ---------------------------------------------------------------------------
# Exact desk-scale oracles
# ---------------------------------------------------------------------------


PROP31_CONSTANT = (2 * (3 * PHI - 4)) / (3 * PHI ** 7)


@dataclass
class OracleReport:
    kind: str
    params: dict
    tuples_checked: int
    violations: list[dict]
    min_ratio: Optional[float] = None  # smallest certified |U-V| / threshold

    @property
    def ok(self) -> bool:
        return not self.violations


_X_IV_CACHE: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}


def _x_interval_depth2(g1: int, g2: int) -> tuple[Fraction, Fraction]:
    """Enclosure of [0; 1^{g1}, 2, 2, 1^{g2}, 2, 2, anything over {1,2}]."""
    from .cf_core import tail_interval

    key = (g1, g2)
    if key not in _X_IV_CACHE:
        w = run(1, g1) + word(2, 2) + run(1, g2) + word(2, 2)
        iv = tail_interval(w, 2)
        _X_IV_CACHE[key] = (iv.lo, iv.hi)
    return _X_IV_CACHE[key]


def prop31_oracle(
    n: int,
    e_range: Optional[tuple[int, int]] = None,
    f_range: Optional[tuple[int, int]] = None,
    tail_depth: int = 2,
    threshold_scale: Fraction = Fraction(1),
) -> OracleReport:
    """Desk-scale sanity check of the first-step separation proposition.

    For exponent pairs (e1, e-1) from ``e_range`` and (f1, f-1) from
    ``f_range`` with e1 != e-1, f1 != f-1 and both differences certifiably
    positive, verifies |U - V| >= threshold whenever (e1,e-1) != (f1,f-1),
    where U, V are enclosed over all depth-``tail_depth`` continuations and
    threshold = (2(3phi-4)/(3phi^7)) phi^{-2 max(e1,e-1)} * threshold_scale.
    Results are labelled desk-scale sanity: the proposition assumes n large.
    """
    if tail_depth != 2:
        raise NotImplementedError("tail depth 2 is the supported desk scale")
    if e_range is None:
        e_range = (n, n + math.floor(n / math.sqrt(math.log(n))))
    if f_range is None:
        f_range = (max(1, n - math.floor(128 * math.log(n) ** 2)), e_range[1])

    def hull(g1: int, lo_g: int, hi_g: int) -> tuple[Fraction, Fraction]:
        los, his = [], []
        for g2 in range(lo_g, hi_g + 1):
            lo, hi = _x_interval_depth2(g1, g2)
            los.append(lo)
            his.append(hi)
        return min(los), max(his)

    def pair_hulls(rng: tuple[int, int]) -> dict[int, tuple[Fraction, Fraction]]:
        return {g1: hull(g1, rng[0], rng[1]) for g1 in range(rng[0], rng[1] + 1)}

    e_h = pair_hulls(e_range)
    f_h = pair_hulls(f_range)

    def diff_hull(h, g1, gm1):
        x_lo, x_hi = h[g1]
        y_lo, y_hi = h[gm1]
        return x_lo - y_hi, x_hi - y_lo

    def positive_pairs(h, rng):
        out = {}
        for g1 in range(rng[0], rng[1] + 1):
            for gm1 in range(rng[0], rng[1] + 1):
                if g1 == gm1:
                    continue
                lo, hi = diff_hull(h, g1, gm1)
                if hi > 0:  # possibly positive; certified positive if lo > 0
                    out[(g1, gm1)] = (lo, hi)
        return out

    e_pairs = positive_pairs(e_h, e_range)
    f_pairs = positive_pairs(f_h, f_range)

    def refine_pair(e1, em1, f1, fm1, thr) -> Optional[Fraction]:
        """Smallest certified |U-V| over explicit second exponents, or None
        if some tuple combination cannot be separated from the threshold."""
        best: Optional[Fraction] = None
        e_ivs = []
        for e2 in range(e_range[0], e_range[1] + 1):
            for em2 in range(e_range[0], e_range[1] + 1):
                x_lo, x_hi = _x_interval_depth2(e1, e2)
                y_lo, y_hi = _x_interval_depth2(em1, em2)
                e_ivs.append((x_lo - y_hi, x_hi - y_lo))
        f_ivs = []
        for f2 in range(f_range[0], f_range[1] + 1):
            for fm2 in range(f_range[0], f_range[1] + 1):
                x_lo, x_hi = _x_interval_depth2(f1, f2)
                y_lo, y_hi = _x_interval_depth2(fm1, fm2)
                f_ivs.append((x_lo - y_hi, x_hi - y_lo))
        for u_lo, u_hi in e_ivs:
            if u_hi <= 0:
                continue  # U > 0 unsatisfiable here
            for v_lo, v_hi in f_ivs:
                if v_hi <= 0:
                    continue
                gap = max(u_lo - v_hi, v_lo - u_hi)
                if gap <= 0 or exact_compare(gap, thr) < 0:
                    return None
                if best is None or gap < best:
                    best = gap
        return best

    violations = []
    min_ratio = None
    checked = 0
    with mpmath.workdps(40):
        for (e1, em1), (u_lo, u_hi) in e_pairs.items():
            thr = PROP31_CONSTANT * (PHI ** (-2 * max(e1, em1))) * threshold_scale
            thr_f = thr.to_mpf()
            for (f1, fm1), (v_lo, v_hi) in f_pairs.items():
                if (e1, em1) == (f1, fm1):
                    continue
                checked += 1
                gap = max(u_lo - v_hi, v_lo - u_hi)  # certified |U-V| lower bound
                if gap <= 0 or exact_compare(Fraction(gap), thr) < 0:
                    gap = refine_pair(e1, em1, f1, fm1, thr)
                    if gap is None:
                        violations.append(
                            {
                                "e": [e1, em1],
                                "f": [f1, fm1],
                                "threshold": float(thr_f),
                            }
                        )
                        continue
                ratio = float(mpmath.mpf(gap.numerator) / gap.denominator / thr_f)
                if min_ratio is None or ratio < min_ratio:
                    min_ratio = ratio
    return OracleReport(
        kind="prop31 (desk-scale sanity)",
        params={
            "n": n,
            "e_range": list(e_range),
            "f_range": list(f_range),
            "tail_depth": tail_depth,
            "threshold_scale": str(threshold_scale),
        },
        tuples_checked=checked,
        violations=violations,
        min_ratio=min_ratio,
    )


NEG_PHI2 = -(PHI ** 2)


def _phi_pow_table(lo: int, hi: int) -> dict[int, QuadraticSurd]:
    return {m: NEG_PHI2 ** m for m in range(lo, hi + 1)}


def exp_dioph_oracle(
    n: int,
    variant: Literal["general", "special"],
    s_range: Optional[tuple[int, int]] = None,
    uv_range: Optional[tuple[int, int]] = None,
    l_max: int = 10,
    c_max: int = 2,
    d_max: int = 2,
    threshold_scale: Fraction = Fraction(1),
    enforce_distortion: bool = True,
) -> OracleReport:
    """Exhaustive exact search of the exponential Diophantine equations.

    special : LHS = (-phi^2)^{-s} - (-phi^2)^{-u} - ((-phi^2)^{-s-2} - (-phi^2)^{-v-l});
              survivors of |LHS| < thr(s) must satisfy s = u and s + 2 = v + l.
    general : LHS = (-phi^2)^{-s} - (-phi^2)^{-u} - (-1)^c mu ((-phi^2)^{-t} - (-phi^2)^{-v})
              with mu = phi^{2c} (3 phi^3 / sqrt5)^d over |c| <= c_max,
              |d| <= d_max; under the distortion hypothesis survivors must
              satisfy s = u and t = v.

    The paper's right-hand sides are O(...) with n large; the committed desk
    thresholds are fixed phi-powers scaled so that identity solutions (exact
    zeros) are separated from everything else; ``threshold_scale`` is the
    negative-control knob.  All arithmetic is exact in Q(sqrt 5).
    """
    if s_range is None:
        s_range = (n, n + math.floor(n / math.sqrt(math.log(n))))
    if uv_range is None:
        uv_range = (max(1, n - 8), s_range[1])
    s_lo, s_hi = s_range
    u_lo, u_hi = uv_range
    pow_lo = -(s_hi + l_max + 8)
    T = _phi_pow_table(pow_lo, 4)
    violations: list[dict] = []
    checked = 0

    if variant == "special":
        thr_unit = ((PHI ** -4) - (PHI ** -8)) * Fraction(2, 3)
        for s in range(s_lo, s_hi + 1):
            thr = thr_unit * (PHI ** (-2 * s)) * threshold_scale
            base = T[-s] - T[-s - 2]
            for u in range(u_lo, u_hi + 1):
                part = base - T[-u]
                for v in range(u_lo, u_hi + 1):
                    for l in range(0, l_max + 1):
                        checked += 1
                        lhs = part + T[-v - l]
                        small = abs_lt(lhs, thr)
                        identity = s == u and s + 2 == v + l
                        if small and not identity:
                            violations.append(
                                {"s": s, "u": u, "v": v, "l": l, "lhs": float(lhs.to_mpf())}
                            )
        return OracleReport(
            kind="exp-dioph special (desk-scale sanity)",
            params={
                "n": n,
                "s_range": list(s_range),
                "uv_range": list(uv_range),
                "l_max": l_max,
                "threshold_scale": str(threshold_scale),
            },
            tuples_checked=checked,
            violations=violations,
        )

    # general variant
    sqrt5 = QuadraticSurd.sqrt_int(5)
    mu_base = (3 * (PHI ** 3)) / sqrt5
    dis_cut = math.log(math.log(n)) ** 4 / 2
    with mpmath.workdps(40):
        log_phi = float(mpmath.log(PHI.to_mpf()))
        log_mu_base = float(mpmath.log(mu_base.to_mpf()))
    thr = (PHI ** (-2 * s_hi - 8)) * threshold_scale
    mus = {}
    for c in range(-c_max, c_max + 1):
        for d in range(-d_max, d_max + 1):
            mus[(c, d)] = (PHI ** (2 * c)) * (mu_base ** d)
    for s in range(s_lo, s_hi + 1):
        for t in range(s_lo, s_hi + 1):
            for (c, d), mu in mus.items():
                if enforce_distortion:
                    log_ratio = (
                        -2 * s * log_phi - (2 * c * log_phi + d * log_mu_base - 2 * t * log_phi)
                    )
                    if abs(log_ratio) <= dis_cut:
                        continue
                sign_c = -1 if c % 2 else 1
                mu_signed = mu if sign_c == 1 else -mu
                for u in range(u_lo, u_hi + 1):
                    lead = T[-s] - T[-u]
                    for v in range(u_lo, u_hi + 1):
                        checked += 1
                        lhs = lead - mu_signed * (T[-t] - T[-v])
                        thr_here = thr * max(Fraction(1), _mu_mag(mu))
                        if abs_lt(lhs, thr_here) and not (s == u and t == v):
                            violations.append(
                                {
                                    "s": s,
                                    "t": t,
                                    "u": u,
                                    "v": v,
                                    "c": c,
                                    "d": d,
                                    "lhs": float(lhs.to_mpf()),
                                }
                            )
    return OracleReport(
        kind="exp-dioph general (desk-scale sanity)",
        params={
            "n": n,
            "s_range": list(s_range),
            "uv_range": list(uv_range),
            "c_max": c_max,
            "d_max": d_max,
            "enforce_distortion": enforce_distortion,
            "threshold_scale": str(threshold_scale),
        },
        tuples_checked=checked,
        violations=violations,
    )


_MU_MAG_CACHE: dict[tuple, Fraction] = {}


def _mu_mag(mu: QuadraticSurd) -> Fraction:
    key = (mu.a, mu.b, mu.c, mu.D)
    if key not in _MU_MAG_CACHE:
        lo, hi = mu.enclosure(64)
        _MU_MAG_CACHE[key] = max(abs(lo), abs(hi))
    return _MU_MAG_CACHE[key]


def abs_lt(x: QuadraticSurd, bound) -> bool:
    """Exact |x| < bound."""
    return exact_compare(x, bound) < 0 and exact_compare(-x, bound) < 0


# ---------------------------------------------------------------------------
# Epsilon estimates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EpsilonEstimates:
    eps1: Fraction
    eps2: Fraction
    eps3: Fraction


def _blocks_range(cand: CandidateWord, indices) -> Word:
    return concat_words([cand.block(i) for i in indices])


def epsilon_estimates(cand: CandidateWord) -> EpsilonEstimates:
    """The three exact sizes-based radii from the theorems' proofs.

    eps1 = s((eta_h ... eta_l eta_1 ... eta_{h-1})^T) + s(eta_h ... eta_{h-1} 22)
    eps2 = min(s(1^{s_2+1} 22...1^{s_N} w w_L 2), s(w_R w 22 1^{s_-M}...1^{s_-2+1}))/12
    eps3 = min(s(w_R w w_L 1), s(1 w_R w w_L 2))/12
    """
    if cand.M < 2 or cand.N < 2:
        raise ValueError("epsilon estimates need M, N >= 2")
    w = cand.word.unmarked()
    w_L = cand.left_word()
    w_R = cand.right_word()
    rot = _blocks_range(cand, list(range(1, cand.N + 1)) + list(range(-cand.M, 0)))
    eps1 = sizes(transpose(rot)) + sizes(rot + word(2, 2))
    a_word = (
        run(1, cand.exponent(2) + 1)
        + _blocks_range(cand, range(3, cand.N + 1))
        + w
        + w_L
        + word(2)
    )
    b_word = (
        w_R
        + w
        + _blocks_range(cand, range(-cand.M, -2))
        + word(2, 2)
        + run(1, cand.exponent(-2) + 1)
    )
    eps2 = min(sizes(a_word), sizes(b_word)) / 12
    c_word = w_R + w + w_L + word(1)
    d_word = word(1) + w_R + w + w_L + word(2)
    eps3 = min(sizes(c_word), sizes(d_word)) / 12
    return EpsilonEstimates(eps1=eps1, eps2=eps2, eps3=eps3)


def attach_sup_bound_word(cand: CandidateWord) -> Word:
    """w_R w 22 1^{s_-M} ... 22 1^{s_-2} 22 1^{s_-1 - 2}."""
    return (
        cand.right_word()
        + cand.word.unmarked()
        + _blocks_range(cand, range(-cand.M, -1))
        + word(2, 2)
        + run(1, cand.exponent(-1) - 2)
    )


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


@dataclass
class Certificate:
    kind: str  # LocalUniqueness | SelfReplication | Isolated | DifferenceCantor
    cand: CandidateWord
    epsilon: Fraction
    radius: int
    verdict: str  # certified | counterexample | inconclusive
    forced_window: dict[int, int]
    branch_stats: dict
    witness: Optional[dict] = None
    extra: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        def window_segments(wd: dict[int, int]) -> list[dict]:
            if not wd:
                return []
            segs = []
            keys = sorted(wd)
            start = prev = keys[0]
            letters = [wd[start]]
            for j in keys[1:]:
                if j == prev + 1:
                    letters.append(wd[j])
                else:
                    segs.append({"start": start, "letters": "".join(map(str, letters))})
                    start = j
                    letters = [wd[j]]
                prev = j
            segs.append({"start": start, "letters": "".join(map(str, letters))})
            return segs

        doc = {
            "kind": self.kind,
            "word": word_to_text(self.cand.word),
            "k": self.cand.k,
            "exponents": {str(i): v for i, v in sorted(self.cand.exponents.items())},
            "epsilon": {
                "num": self.epsilon.numerator,
                "den": self.epsilon.denominator,
            },
            "radius": self.radius,
            "verdict": self.verdict,
            "forcedWindow": window_segments(self.forced_window),
            "branchStats": self.branch_stats,
            "toolVersion": TOOL_VERSION,
        }
        if self.witness is not None:
            doc["witness"] = self.witness
        if self.extra:
            doc.update(self.extra)
        blob = json.dumps(doc, sort_keys=True, default=str).encode()
        doc["replayHash"] = hashlib.sha256(blob).hexdigest()
        return doc


def forced_local_window(cand: CandidateWord) -> dict[int, int]:
    """The theorem's forced pattern 22 w_R  w^*  w_L 22 around the mark.

    Position 0 is a_0 = the second 2 of the central block, so w occupies
    [-|w_L|-1, |w_R|].
    """
    w = cand.word.unmarked().letters
    w_R = cand.right_word().letters
    p_star = cand.mark_position
    F: dict[int, int] = {}
    for k, a in enumerate(w):
        F[k - p_star] = a
    left_ext = (2, 2) + w_R
    for k, a in enumerate(left_ext):
        F[k - p_star - len(left_ext)] = a
    right_ext = cand.left_word().letters + (2, 2)
    for k, a in enumerate(right_ext):
        F[len(w_R) + 1 + k] = a
    return F


def forced_replication_window(cand: CandidateWord) -> dict[int, int]:
    """22 w_R  w w^* w  22 1^{s_-M} ... 1^{s_-2} 22 1^{2k} around the mark."""
    w = cand.word.unmarked().letters
    w_R = cand.right_word().letters
    p_star = cand.mark_position
    F: dict[int, int] = {}
    for k, a in enumerate(w):
        F[k - p_star] = a
    for k, a in enumerate(w):  # left copy of w
        F[k - p_star - len(w)] = a
    left_ext = (2, 2) + w_R
    for k, a in enumerate(left_ext):
        F[k - p_star - len(w) - len(left_ext)] = a
    # right copy of w followed by 22 1^{s_-M} ... 1^{s_-2} 22 1^{2k}
    right_ext = (
        w
        + _blocks_range(cand, range(-cand.M, -1)).letters
        + (2, 2)
        + (1,) * (2 * cand.k)
    )
    for k, a in enumerate(right_ext):
        F[len(w_R) + 1 + k] = a
    return F


def forced_periodic_window(cand: CandidateWord, radius: int) -> dict[int, int]:
    """The periodic pattern of w-bar with the mark at 0, over |j| <= radius."""
    w = cand.word.unmarked().letters
    off = cand.mark_position
    return {j: w[(j + off) % len(w)] for j in range(-radius, radius + 1)}


def forced_isolated_window(cand: CandidateWord) -> dict[int, int]:
    """The isolation theorem's span: w-bar over ... 22 w_R w w^* w w_L 22 ...

    Positions beyond this span are outside the theorem's single-step claim
    (they follow by induction for bi-infinite sequences, not for a finite
    window), so the certificate pins exactly this block of w-bar.
    """
    w_len = len(cand.word)
    w_R = len(cand.right_word())
    w_L = len(cand.left_word())
    left_edge = -(cand.mark_position + w_len + w_R + 2)
    right_edge = w_R + w_len + w_L + 2
    F = forced_periodic_window(cand, max(-left_edge, right_edge))
    return {j: a for j, a in F.items() if left_edge <= j <= right_edge}


def _seed_from_forced(F: dict[int, int]) -> dict[int, int]:
    lo, hi = min(F), max(F)
    assert sorted(F) == list(range(lo, hi + 1))
    return dict(F)


def markov_value_of(cand: CandidateWord) -> QuadraticSurd:
    return markov_value_periodic(cand.word)[0]


@dataclass
class _EngineSettings:
    budget_nodes: int = 10_000_000
    letter_order: tuple[int, ...] = (1, 2)
    prefer_right: bool = True
    context: int = 64
    sweep_every: int = 2


def default_settings(cand: CandidateWord, budget: int) -> _EngineSettings:
    # sweeps must see across a whole exponent block plus its neighbors,
    # otherwise off-by-two exponent deviations survive far too long
    ctx = 2 * max(cand.exponents.values()) + 24
    return _EngineSettings(budget_nodes=budget, context=max(64, ctx))


def _run_engine(
    band_lo,
    band_hi,
    radius: int,
    seed: Optional[dict[int, int]],
    forced: dict[int, int],
    settings: _EngineSettings,
    enumerate_all: bool = False,
    collect: bool = False,
    forced_alternates: Optional[list[dict[int, int]]] = None,
) -> SearchOutcome:
    sys.setrecursionlimit(max(10000, 8 * radius + 1000))
    eng = WindowEngine(
        band_lo,
        band_hi,
        radius,
        seed=seed,
        forced=forced,
        budget_nodes=settings.budget_nodes,
        letter_order=settings.letter_order,
        prefer_right=settings.prefer_right,
        context=settings.context,
        sweep_every=settings.sweep_every,
        collect_survivors=collect,
        forced_alternates=forced_alternates,
    )
    return eng.run(enumerate_all=enumerate_all)


def mirror_window(F: dict[int, int]) -> dict[int, int]:
    """The reflection j -> -j of a window pattern.

    Reversal preserves every lambda value, so a non-semisymmetric word and
    its transpose share one Markov value; the projection argument cannot
    distinguish a sequence from its mirror, and forced patterns are only
    determined up to this reflection.
    """
    return {-j: a for j, a in F.items()}


def verify_witness(
    cand: CandidateWord,
    witness: dict[int, int],
    band_lo,
    band_hi,
    radius: int,
) -> Optional[dict]:
    """Complete a witness window into an eventually periodic sequence and
    verify exactly: lambda_0 in the band and lambda_0 >= lambda_i for
    |i| <= radius.  Returns the verified completion data, or None."""
    lo, hi = min(witness), max(witness)
    letters_right = tuple(witness[j] for j in range(1, hi + 1))
    letters_left = tuple(witness[-j] for j in range(1, -lo + 1))  # outward
    w = cand.word.unmarked().letters
    p_star = cand.mark_position
    L = len(w)
    kmod = (1,) * (2 * cand.k) + (2, 2)
    kmod2 = (1,) * (2 * cand.k + 2) + (2, 2)
    # periods phase-aligned with the w-bar pattern at the window edges
    wbar_left = tuple(w[(lo - 1 - t + p_star) % L] for t in range(L))
    wbar_right = tuple(w[(hi + 1 + t + p_star) % L] for t in range(L))
    left_options = {
        "wbar": Word(wbar_left),
        "ones": Word((1,)),
        "kmod": Word(tuple(reversed(kmod))),
        "kmod+": Word(tuple(reversed(kmod2))),
    }
    right_options = {
        "wbar": Word(wbar_right),
        "ones": Word((1,)),
        "kmod": Word(kmod),
        "kmod+": Word(kmod2),
    }
    for lname, left_per in left_options.items():
        for rname, right_per in right_options.items():
            spec = BiInfiniteSpec(
                left_period=left_per,
                left_transient=Word(letters_left),
                center=witness[0],
                right_transient=Word(letters_right),
                right_period=right_per,
            )
            lam0 = AlgebraicValue.of(lambda_at(spec, 0))
            if band_lo is not None and lam0.compare(band_lo) <= 0:
                continue
            if lam0.compare(band_hi) >= 0:
                continue
            if _dominates(spec, lam0, radius, 64):
                return {
                    "completion": f"left:{lname} right:{rname}",
                    "lambda0": lam0.decimal(40),
                    "lambda0_minus_3": (lam0 - Fraction(3)).decimal(20),
                }
    return None


def check_local_uniqueness(
    cand: CandidateWord,
    epsilon: Fraction,
    radius: Optional[int] = None,
    budget: int = 10_000_000,
    settings: Optional[_EngineSettings] = None,
) -> Certificate:
    """Certify that every window with m = lambda_0 within epsilon of m(w-bar)
    agrees with the forced pattern 22 w_R w^* w_L 22."""
    w_len = len(cand.word)
    if radius is None:
        radius = 3 * w_len
    if radius < w_len + w_len // 2:
        raise ValueError("radius must be at least |w| + |w|/2")
    settings = settings or default_settings(cand, budget)
    settings.budget_nodes = budget
    m = markov_value_of(cand)
    band_lo = m - epsilon
    band_hi = m + epsilon
    forced = forced_local_window(cand)
    out = _run_engine(
        band_lo,
        band_hi,
        radius,
        None,
        forced,
        settings,
        forced_alternates=[mirror_window(forced)],
    )
    witness_doc = None
    if out.verdict == "counterexample":
        data = verify_witness(cand, out.witness, band_lo, band_hi, radius)
        witness_doc = {
            "window": {str(j): a for j, a in sorted(out.witness.items())},
            "verified": data,
        }
    return Certificate(
        kind="LocalUniqueness",
        cand=cand,
        epsilon=epsilon,
        radius=radius,
        verdict=out.verdict,
        forced_window=forced,
        branch_stats={"nodes": out.nodes, "pruned": out.pruned, "survivors": out.survivors},
        witness=witness_doc,
        extra={"frontier": out.frontier} if out.verdict == "inconclusive" else {},
    )


def check_self_replication(
    cand: CandidateWord,
    epsilon: Fraction,
    direction: Literal["left", "right"] = "left",
    radius: Optional[int] = None,
    budget: int = 10_000_000,
    settings: Optional[_EngineSettings] = None,
) -> Certificate:
    """Certify the one-sided forcing: a window containing 22 w_R w^* w_L 22
    with m = lambda_0 < m(w-bar) + epsilon extends as
    22 w_R w w^* w 22 1^{s_-M} ... 1^{s_-2} 22 1^{2k} on the checked side."""
    w_len = len(cand.word)
    if radius is None:
        radius = 3 * w_len
    settings = settings or default_settings(cand, budget)
    settings.budget_nodes = budget
    m = markov_value_of(cand)
    band_hi = m + epsilon
    seed = forced_local_window(cand)
    full = forced_replication_window(cand)
    if direction == "left":
        forced = {j: a for j, a in full.items() if j < -cand.mark_position}
    else:
        forced = {j: a for j, a in full.items() if j > len(cand.right_word())}
    out = _run_engine(None, band_hi, radius, seed, forced, settings)
    witness_doc = None
    if out.verdict == "counterexample":
        data = verify_witness(cand, out.witness, None, band_hi, radius)
        witness_doc = {
            "window": {str(j): a for j, a in sorted(out.witness.items())},
            "verified": data,
        }
    return Certificate(
        kind="SelfReplication",
        cand=cand,
        epsilon=epsilon,
        radius=radius,
        verdict=out.verdict,
        forced_window=forced,
        branch_stats={"nodes": out.nodes, "pruned": out.pruned, "survivors": out.survivors},
        witness=witness_doc,
        extra={"direction": direction}
        | ({"frontier": out.frontier} if out.verdict == "inconclusive" else {}),
    )


def check_isolated(
    cand: CandidateWord,
    radius: Optional[int] = None,
    budget: int = 10_000_000,
    settings: Optional[_EngineSettings] = None,
    epsilon: Optional[Fraction] = None,
) -> Certificate:
    """Certify that within (m - eps3, m + eps3) the only admissible window is
    w-bar itself (at the checked radius)."""
    w_len = len(cand.word)
    if radius is None:
        radius = 3 * w_len
    settings = settings or default_settings(cand, budget)
    settings.budget_nodes = budget
    eps = epsilon if epsilon is not None else epsilon_estimates(cand).eps3
    m = markov_value_of(cand)
    seed = forced_local_window(cand)
    forced = forced_isolated_window(cand)
    out = _run_engine(m - eps, m + eps, radius, seed, forced, settings)
    witness_doc = None
    if out.verdict == "counterexample":
        data = verify_witness(cand, out.witness, m - eps, m + eps, radius)
        witness_doc = {
            "window": {str(j): a for j, a in sorted(out.witness.items())},
            "verified": data,
        }
    return Certificate(
        kind="Isolated",
        cand=cand,
        epsilon=eps,
        radius=radius,
        verdict=out.verdict,
        forced_window=forced,
        branch_stats={"nodes": out.nodes, "pruned": out.pruned, "survivors": out.survivors},
        witness=witness_doc,
        extra={"frontier": out.frontier} if out.verdict == "inconclusive" else {},
    )


# ---------------------------------------------------------------------------
# Difference-Cantor attachment
# ---------------------------------------------------------------------------


def _kmod_sample(cand: CandidateWord, rng) -> tuple[Word, Word]:
    """A random eventually periodic member of K_mod: exponents >= 2k."""
    k2 = 2 * cand.k
    blocks = rng.randrange(0, 3)
    transient_parts = []
    for _ in range(blocks):
        transient_parts.append(run(1, k2 + rng.randrange(0, 6)) + word(2, 2))
    period = run(1, k2 + rng.randrange(0, 6)) + word(2, 2)
    transient = concat_words(transient_parts) if transient_parts else Word(())
    return transient, period


def attach_cantor(
    cand: CandidateWord,
    samples: int = 50,
    radius: Optional[int] = None,
    seed: int = 0,
    context: int = 64,
) -> tuple[Certificate, list[AlgebraicValue]]:
    """Evaluate lambda_0 of w-bar w^* w 22 1^{s_-M} ... 1^{s_-2} 22 1^{s_-1 - 1} 22 gamma
    for eventually periodic members gamma of K_mod, and certify that each
    value lies in (m, m + eps) with eps = min(eps1, eps2), below the sup
    bound, and dominates every lambda_i within the radius."""
    import random

    w_len = len(cand.word)
    if radius is None:
        radius = 3 * w_len
    eps = min(epsilon_estimates(cand).eps1, epsilon_estimates(cand).eps2)
    m = markov_value_of(cand)
    sup_word = attach_sup_bound_word(cand)
    sup_bound = AlgebraicValue.of(m) + sizes(sup_word)
    w = cand.word.unmarked()
    w_L = cand.left_word()
    w_R = cand.right_word()
    # a_0 is the second 2 of the marked block: rightward comes w_R directly,
    # leftward comes the first 2 then w_L read outward, then w-bar
    connector = (
        w_R
        + w
        + _blocks_range(cand, range(-cand.M, -1))
        + word(2, 2)
        + run(1, cand.exponent(-1) - 1)
        + word(2, 2)
    )
    rng = random.Random(seed)
    values: list[AlgebraicValue] = []
    witness = None
    for idx in range(samples):
        gamma_tr, gamma_per = _kmod_sample(cand, rng)
        spec = BiInfiniteSpec(
            left_period=transpose(w),
            left_transient=word(2) + transpose(w_L),
            center=2,
            right_transient=connector + gamma_tr,
            right_period=gamma_per,
        )
        lam0 = AlgebraicValue.of(lambda_at(spec, 0))
        in_band = lam0.compare(m) > 0 and lam0.compare(AlgebraicValue.of(m) + eps) < 0
        below_sup = lam0.compare(sup_bound) < 0
        dominant = _dominates(spec, lam0, radius, context)
        if not (in_band and below_sup and dominant):
            witness = {
                "sample": idx,
                "gamma_transient": word_to_text(gamma_tr) if len(gamma_tr) else "",
                "gamma_period": word_to_text(gamma_per),
                "in_band": in_band,
                "below_sup": below_sup,
                "dominant": dominant,
                "lambda0": lam0.decimal(40),
            }
            break
        values.append(lam0)
    cert = Certificate(
        kind="DifferenceCantor",
        cand=cand,
        epsilon=eps,
        radius=radius,
        verdict="certified" if witness is None else "counterexample",
        forced_window={},
        branch_stats={"samples": len(values)},
        witness=witness,
        extra={"sup_bound_word": word_to_text(sup_word)},
    )
    return cert, values


def _dominates(
    spec: BiInfiniteSpec, lam0: AlgebraicValue, radius: int, context: int
) -> bool:
    """lambda_0 >= lambda_i for |i| <= radius, by cheap enclosures with exact
    fallback on straddlers."""
    from .spectra import WindowConstraint, lambda_bounds

    letters = {j: spec.letter(j) for j in range(-radius - context, radius + context + 1)}
    for i in range(-radius, radius + 1):
        if i == 0:
            continue
        if letters[i] == 1:
            continue  # lambda_i < 2.47 < 3 < lambda_0
        ctx = {
            j: letters[j]
            for j in range(i - context, i + context + 1)
            if j in letters
        }
        lb = lambda_bounds(WindowConstraint(ctx), i, 2)
        if Fraction(lb.hi) < Fraction(29, 10):
            continue
        if lam0.compare(lb.hi) >= 0:
            continue
        # straddler: exact evaluation
        if AlgebraicValue.of(lambda_at(spec, i)).compare(lam0) > 0:
            return False
    return True
