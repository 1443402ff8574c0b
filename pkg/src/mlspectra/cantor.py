"""Gauss-Cantor sets: Markov-partition data, bounded-distortion constants,
Palis-Takens dimension brackets, Lambert-W closed forms, the big/small/mod
set families, and the truncated-spectrum dimension asymptotics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, Optional, Sequence, Union

import mpmath

from .cf_core import (
    ContinuantPair,
    QuadraticSurd,
    Word,
    concat_words,
    continuants,
    cylinder_interval,
    eval_periodic,
    exact_compare,
    run,
    sizes,
    word,
)

mp = mpmath.mp


@dataclass(frozen=True)
class Constants:
    """Named constants of the dimension asymptotics."""

    phi: QuadraticSurd = QuadraticSurd.make(1, 1, 2, 5)

    @property
    def c1(self) -> mpmath.mpf:
        # log(phi^2) = 0.9624...
        return 2 * mpmath.log(self.phi.to_mpf())

    @property
    def c0(self) -> mpmath.mpf:
        # -log log((3+sqrt(5))/2) = -log c1 = 0.0383...
        return -mpmath.log(self.c1)


CONSTANTS = Constants()


def lambert_w(x, tol: float = 1e-12) -> mpmath.mpf:
    """Principal-branch Lambert W by damped Halley iteration.

    Domain x >= -1/e; the result w satisfies |w e^w - x| <= tol * max(|x|, 1).
    """
    x = mpmath.mpf(x)
    if x < -mpmath.exp(-1):
        raise ValueError("lambert_w domain is [-1/e, inf)")
    if x == 0:
        return mpmath.mpf(0)
    if x > mpmath.e:
        w = mpmath.log(x) - mpmath.log(mpmath.log(x))
    elif x > 0:
        w = x / (1 + x)
    else:
        # series start near the branch point
        p = mpmath.sqrt(2 * (mpmath.e * x + 1))
        w = -1 + p - p * p / 3
    for _ in range(200):
        ew = mpmath.exp(w)
        f = w * ew - x
        if abs(f) <= tol * max(abs(x), 1):
            return w
        wp1 = w + 1
        denom = ew * wp1 - (w + 2) * f / (2 * wp1)
        step = f / denom
        # damping keeps the iterate above the branch point
        while w - step <= -1:
            step /= 2
        w = w - step
    raise ArithmeticError("lambert_w did not converge")


# ---------------------------------------------------------------------------
# Gauss-Cantor specifications
# ---------------------------------------------------------------------------


class NotPrimitiveError(ValueError):
    pass


class DegenerateAlphabetError(ValueError):
    pass


class UnboundedBranchError(ValueError):
    pass


@dataclass(frozen=True)
class Branch:
    """Per-branch Markov data for one alphabet word beta_j."""

    beta: Word
    length: int
    q: int
    q_prev: int
    crude_lo: int  # q^2
    crude_hi: int  # (2q)^2
    sharp_lo: QuadraticSurd  # (q + q' min K)^2
    sharp_hi: QuadraticSurd  # (q + q' max K)^2


@dataclass(frozen=True)
class GaussCantorSpec:
    """Alphabet B with derived Markov-partition data and exact hull."""

    alphabet: tuple[Word, ...]
    branches: tuple[Branch, ...]
    hull_min: QuadraticSurd
    hull_max: QuadraticSurd
    prefix: Optional[Word] = None
    clipped: bool = False

    def diam(self) -> QuadraticSurd:
        return self.hull_max - self.hull_min

    def prefixed_hull(self) -> tuple[QuadraticSurd, QuadraticSurd]:
        """Hull of {[0; prefix, gamma...]}; equals the bare hull if no prefix."""
        if self.prefix is None or len(self.prefix) == 0:
            return self.hull_min, self.hull_max
        cp = continuants(self.prefix)
        a = (self.hull_min * cp.p_prev + cp.p) / (self.hull_min * cp.q_prev + cp.q)
        b = (self.hull_max * cp.p_prev + cp.p) / (self.hull_max * cp.q_prev + cp.q)
        return (a, b) if a.compare(b) <= 0 else (b, a)

    def member_value(self, blocks: Sequence[Word], tail_blocks: Sequence[Word]) -> QuadraticSurd:
        """Exact K(B) point [0; blocks..., overline(tail_blocks)]."""
        pre = concat_words(blocks) if blocks else Word(())
        per = concat_words(tail_blocks)
        return eval_periodic(pre, per)


def _extreme_sequence(alphabet: Sequence[Word], want_max: bool) -> QuadraticSurd:
    """Exact extreme of K(B) via the parity-aware greedy block choice."""
    mids = []
    for b in alphabet:
        lo, hi = cylinder_interval(b)
        mids.append((lo + hi) / 2)
    order = sorted(range(len(alphabet)), key=lambda j: mids[j])
    leftmost, rightmost = order[0], order[-1]

    def choice(parity: int) -> int:
        # Moebius maps of even-length prefixes preserve orientation
        if want_max:
            return rightmost if parity == 0 else leftmost
        return leftmost if parity == 0 else rightmost

    seen: dict[int, int] = {}
    seq: list[int] = []
    parity = 0
    while parity not in seen:
        seen[parity] = len(seq)
        j = choice(parity)
        seq.append(j)
        parity = (parity + len(alphabet[j])) % 2
    start = seen[parity]
    pre = concat_words([alphabet[j] for j in seq[:start]]) if start else Word(())
    per = concat_words([alphabet[j] for j in seq[start:]])
    return eval_periodic(pre, per)


def build_cantor(alphabet: Sequence[Word], prefix: Optional[Word] = None,
                 clipped: bool = False) -> GaussCantorSpec:
    """Validate an alphabet and derive branch bounds and exact hull endpoints."""
    alphabet = tuple(w.unmarked() for w in alphabet)
    if len(alphabet) < 2:
        raise DegenerateAlphabetError("degenerate: need at least 2 words")
    for i, a in enumerate(alphabet):
        if len(a) == 0:
            raise DegenerateAlphabetError("degenerate: empty word in alphabet")
        for j, b in enumerate(alphabet):
            if i != j and a.letters == b.letters[: len(a)]:
                raise NotPrimitiveError(
                    f"not-primitive: word {i} is a prefix of word {j}"
                )
    hull_min = _extreme_sequence(alphabet, want_max=False)
    hull_max = _extreme_sequence(alphabet, want_max=True)
    branches = []
    for b in alphabet:
        cp = continuants(b)
        sharp_lo = (hull_min * cp.q_prev + cp.q) * (hull_min * cp.q_prev + cp.q)
        sharp_hi = (hull_max * cp.q_prev + cp.q) * (hull_max * cp.q_prev + cp.q)
        if sharp_lo.compare(sharp_hi) > 0:
            sharp_lo, sharp_hi = sharp_hi, sharp_lo
        branches.append(
            Branch(
                beta=b,
                length=len(b),
                q=cp.q,
                q_prev=cp.q_prev,
                crude_lo=cp.q * cp.q,
                crude_hi=4 * cp.q * cp.q,
                sharp_lo=sharp_lo,
                sharp_hi=sharp_hi,
            )
        )
    return GaussCantorSpec(
        alphabet=alphabet,
        branches=tuple(branches),
        hull_min=hull_min,
        hull_max=hull_max,
        prefix=prefix,
        clipped=clipped,
    )


# ---------------------------------------------------------------------------
# Dimension brackets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DimensionBounds:
    d1: mpmath.mpf
    d2: mpmath.mpf
    method: str
    tolerance: float

    def width(self) -> mpmath.mpf:
        return self.d2 - self.d1


def _bisect_power_sum(values: list[mpmath.mpf], tol: float) -> mpmath.mpf:
    """Root of sum(values**-d) = 1 for values > 1, by bisection on [0, d_hi]."""

    def f(d):
        return mpmath.fsum(mpmath.power(v, -d) for v in values) - 1

    lo, hi = mpmath.mpf(0), mpmath.mpf(1)
    while f(hi) > 0:
        hi *= 2
        if hi > 64:
            raise ArithmeticError("power-sum root out of range")
    for _ in range(int(math.log2(float(hi) / tol)) + 8):
        mid = (lo + hi) / 2
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol / 4:
            break
    return (lo + hi) / 2


def palis_takens(
    spec: GaussCantorSpec,
    method: Literal["crude", "sharp"] = "crude",
    tolerance: float = 1e-12,
) -> DimensionBounds:
    """Palis-Takens bracket d1 <= dim_H K(B) <= d2.

    d2 solves sum(lambda_j^-d) = 1 on the branch infima, d1 solves
    sum(Lambda_j^-d) = 1 on the suprema.  The crude bounds are the continuant
    squares (q^2, (2q)^2); the sharp bounds evaluate |psi'| at the exact hull
    endpoints.  Falls back to sharp when a crude infimum is <= 1; reports
    "unbounded-branch" when even the sharp infimum is.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    with mpmath.workdps(max(30, int(-math.log10(tolerance)) + 25)):
        if method == "crude" and any(b.crude_lo <= 1 for b in spec.branches):
            method = "sharp"
        if method == "crude":
            los = [mpmath.mpf(b.crude_lo) for b in spec.branches]
            his = [mpmath.mpf(b.crude_hi) for b in spec.branches]
        else:
            if any(b.sharp_lo.compare(Fraction(1)) <= 0 for b in spec.branches):
                raise UnboundedBranchError("unbounded-branch")
            los = [b.sharp_lo.to_mpf() for b in spec.branches]
            his = [b.sharp_hi.to_mpf() for b in spec.branches]
        d2 = _bisect_power_sum(los, tolerance)
        d1 = _bisect_power_sum(his, tolerance)
        if d1 > d2:
            d1, d2 = d2, d1
        return DimensionBounds(d1=d1, d2=d2, method=method, tolerance=tolerance)


def power_sum_residual(spec: GaussCantorSpec, d, side: Literal["lo", "hi"],
                       method: str = "crude") -> mpmath.mpf:
    """|sum(bound^-d) - 1| at d, for certifying the bisection result."""
    if method == "crude":
        vals = [b.crude_lo if side == "lo" else b.crude_hi for b in spec.branches]
        vals = [mpmath.mpf(v) for v in vals]
    else:
        vals = [
            (b.sharp_lo if side == "lo" else b.sharp_hi).to_mpf()
            for b in spec.branches
        ]
    return abs(mpmath.fsum(mpmath.power(v, -d) for v in vals) - 1)


def refinement_inequality_check(
    spec: GaussCantorSpec, prefix_blocks: Sequence[Word], d1, dps: int = 60
) -> bool:
    """Check sum_i |I(prefix . beta_i)|^d1 >= |I(prefix)|^d1.

    Interval sizes are exact rationals; the powers are evaluated at ``dps``
    working digits with a small relative guard.
    """
    with mpmath.workdps(dps):
        d1 = mpmath.mpf(d1)
        pre = concat_words(prefix_blocks) if prefix_blocks else Word(())
        if len(pre) == 0:
            rhs = mpmath.mpf(1)
        else:
            s = sizes(pre)
            rhs = mpmath.power(mpmath.mpf(s.numerator) / s.denominator, d1)
        lhs = mpmath.mpf(0)
        for b in spec.alphabet:
            s = sizes(pre + b) if len(pre) else sizes(b)
            lhs += mpmath.power(mpmath.mpf(s.numerator) / s.denominator, d1)
        guard = mpmath.mpf(10) ** (-(dps - 10))
        return lhs >= rhs * (1 - guard)


def bounded_distortion_constant(spec: GaussCantorSpec, delta) -> mpmath.mpf:
    """C(K, delta) = C(B) * delta with C(B) = (2/min K) * max K^2/(1 - max K^2).

    This is the Gauss-Cantor specialization of the bounded-distortion lemma
    with Hoelder exponent 1; it tends to 0 with delta.  The exponent of the
    distortion inequality over a cylinder is C(K, diam K(B)).
    """
    if spec.hull_max.compare(Fraction(1)) >= 0:
        raise ValueError("invalid-hull: max K(B) must be < 1")
    mn = spec.hull_min.to_mpf()
    mx = spec.hull_max.to_mpf()
    return (2 / mn) * (mx * mx / (1 - mx * mx)) * mpmath.mpf(delta)


# ---------------------------------------------------------------------------
# Closed forms and asymptotics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DimEstimate:
    main: mpmath.mpf
    error_order: mpmath.mpf


def dim_closed_form(r: int, s: Union[int, float, None] = None) -> DimEstimate:
    """Main term W(r) e^{c0} / r of the block-of-ones dimension lemma.

    ``s`` is the spread of the alphabet {1^r 22 ... 1^{r+s} 22} (None or inf
    for the unbounded family); the reported error term is the paper's order
    bound (1/r)(log r / r)^{min(1, s/r)}, not added to the main term.
    """
    if r < 2:
        raise ValueError("r >= 2 required")
    w = lambert_w(r)
    main = w * mpmath.exp(CONSTANTS.c0) / r
    if s is None or s == mpmath.inf or (isinstance(s, float) and math.isinf(s)):
        expo = 1.0
    else:
        expo = min(1.0, float(s) / r)
    err = (mpmath.log(r) / r) ** expo / r
    return DimEstimate(main=main, error_order=err)


def d_truncated_asymptotic(epsilon) -> tuple[mpmath.mpf, mpmath.mpf]:
    """(main term of d(3+eps), main term of the difference-set lower bound).

    d(3+eps) ~ 2 W(e^{c0} |log eps|)/|log eps|; the M\\L bound is exactly half
    the first term.
    """
    eps = mpmath.mpf(epsilon)
    if not 0 < eps < mpmath.exp(-1):
        raise ValueError("need 0 < epsilon < 1/e")
    L = abs(mpmath.log(eps))
    w = lambert_w(mpmath.exp(CONSTANTS.c0) * L)
    d_main = 2 * w / L
    return d_main, d_main / 2


def f1(x) -> mpmath.mpf:
    """F_1(x) = W(e^{c0} x)/x."""
    x = mpmath.mpf(x)
    return lambert_w(mpmath.exp(CONSTANTS.c0) * x) / x


def f2(x) -> mpmath.mpf:
    """F_2(x) = log(x)/x."""
    x = mpmath.mpf(x)
    return mpmath.log(x) / x


def exponential_sum_root(r: int, s: int, L: int, tol: float = 1e-12) -> mpmath.mpf:
    """Root d of sum_{j=0}^{s-1} (phi^{2(r+j+L)})^{-d} = 1."""
    if s < 1 or r < 1 or L < 0:
        raise ValueError("need r, s >= 1 and L >= 0")
    with mpmath.workdps(40):
        phi = CONSTANTS.phi.to_mpf()
        vals = [phi ** (2 * (r + j + L)) for j in range(s)]
        if s == 1:
            # single term: exact closed form d = 0 never reaches 1 unless ...
            return mpmath.mpf(0) if vals[0] <= 1 else _bisect_power_sum(vals, tol)
        return _bisect_power_sum(vals, tol)


# ---------------------------------------------------------------------------
# The big / small / mod families
# ---------------------------------------------------------------------------


def family(n: int, kind: Literal["big", "small", "mod"]) -> GaussCantorSpec:
    """The three Gauss-Cantor families used near 3.

    big : prefix 1^m and alphabet {2 2 1^m, 1} with m = n - floor(128 (log n)^2)
          (clipped at 1 with a flag when the subtraction goes nonpositive);
    small: alphabet {1^j 2 2 : n <= j <= n + floor(n/sqrt(log n))};
    mod : prefix 1^{n+1} and alphabet {2 2 1^{n+1}, 1}.
    """
    if n < 10:
        raise ValueError("n >= 10 required at desk scale")
    if kind == "big":
        m = n - math.floor(128 * math.log(n) ** 2)
        clipped = m < 1
        m = max(1, m)
        alphabet = [word(2, 2) + run(1, m), word(1)]
        return build_cantor(alphabet, prefix=run(1, m), clipped=clipped)
    if kind == "small":
        top = n + math.floor(n / math.sqrt(math.log(n)))
        alphabet = [run(1, j) + word(2, 2) for j in range(n, top + 1)]
        return build_cantor(alphabet)
    if kind == "mod":
        alphabet = [word(2, 2) + run(1, n + 1), word(1)]
        return build_cantor(alphabet, prefix=run(1, n + 1))
    raise ValueError(f"unknown family kind {kind!r}")


# ---------------------------------------------------------------------------
# Continuant product estimates
# ---------------------------------------------------------------------------


def _q_of_exponents(exponents: Sequence[int], last_minus_one: bool = False) -> int:
    parts = []
    for i, r in enumerate(exponents):
        rr = r - 1 if (last_minus_one and i == len(exponents) - 1) else r
        parts.append(run(1, rr) if rr > 0 else Word(()))
        if i < len(exponents) - 1:
            parts.append(word(2, 2))
    w = concat_words(parts)
    return continuants(w).q if len(w) else 1


def q_product_estimate(exponents: Sequence[int], dps: int = 60):
    """Exact continuant of 1^{r_1} 22 ... 22 1^{r_k} against the golden-mean
    product form, solving for the per-block correction factors.

    Returns (estimate, corrections) where estimate is the main term
    (phi/sqrt5) phi^{sum r} (3 phi^3/sqrt5)^{k-1} and corrections is the list
    [E_1, ..., E_{k-1}, E'_k] of the factored form
    q = estimate * prod (1+E_i/phi^{2 r_i})^2 * (1+E'_k/phi^{2 r_k}).
    """
    k = len(exponents)
    if k < 2 or any(r < 2 for r in exponents):
        raise ValueError("need k >= 2 and all r_i >= 2")
    with mpmath.workdps(dps + 10 * k):
        phi = CONSTANTS.phi.to_mpf()
        sqrt5 = mpmath.sqrt(5)
        # exact continuants Q_j and the reduced-last-run R_j
        Q = [mpmath.mpf(_q_of_exponents(exponents[: j + 1])) for j in range(k)]
        R = [
            mpmath.mpf(_q_of_exponents(exponents[: j + 1], last_minus_one=True))
            for j in range(k)
        ]
        e_prime = [None] * k  # E'_j, factor at phi^{2 r_j}
        e_dprime = [None] * k  # E''_j, factor at phi^{2 r_{j-1}}
        e_prime[0] = (-1) ** exponents[0] * phi ** -2
        for j in range(1, k):
            x1 = 5 * Q[j - 1] + 2 * R[j - 1]
            x0 = 2 * Q[j - 1] + R[j - 1]
            A = (x0 / phi + x1) / sqrt5
            B = (x0 * phi - x1) / sqrt5
            e_dprime[j] = (A * sqrt5 / (3 * phi**2 * Q[j - 1]) - 1) * phi ** (
                2 * exponents[j - 1]
            )
            e_prime[j] = (-1) ** (exponents[j] + 1) * (B / A) * phi ** -2
        corrections = []
        for i in range(k - 1):
            prod = (1 + e_prime[i] * phi ** (-2 * exponents[i])) * (
                1 + e_dprime[i + 1] * phi ** (-2 * exponents[i])
            )
            corrections.append((mpmath.sqrt(prod) - 1) * phi ** (2 * exponents[i]))
        corrections.append(e_prime[k - 1])
        estimate = (
            phi / sqrt5 * phi ** sum(exponents) * (3 * phi**3 / sqrt5) ** (k - 1)
        )
        return estimate, corrections


def base_case_value(n: int) -> QuadraticSurd:
    """Exact [0; 1^n, 2, 2, 1bar]."""
    return eval_periodic(run(1, n) + word(2, 2), word(1))


def base_case_main_term(n: int, dps: int = 50) -> mpmath.mpf:
    """1/phi + (-1)^{n+1} (2(3 phi - 4)/(3 phi^4)) phi^{-(2n-2)}."""
    with mpmath.workdps(dps):
        phi = CONSTANTS.phi.to_mpf()
        c = 2 * (3 * phi - 4) / (3 * phi**4)
        return 1 / phi + (-1) ** (n + 1) * c * phi ** (-(2 * n - 2))
