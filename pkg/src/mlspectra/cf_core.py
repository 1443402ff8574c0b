"""Exact continued-fraction arithmetic.

Continuants, finite and periodic evaluation, cylinder intervals with their
size/scale functions, and elementary gap/enclosure estimates.  Everything in
this module is exact: rationals are ``fractions.Fraction``, irrational values
are quadratic surds (a + b*sqrt(D))/c with integer fields, and order
comparisons are decided by integer arithmetic alone (no floating point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Union

import mpmath

Rational = Fraction

_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]


class EmptyWordError(ValueError):
    """Raised when an operation requires a nonempty word."""


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Word:
    """A finite string of positive integer letters with an optional mark.

    The mark is an index into ``letters`` (the starred position used for
    centered words such as ``2 2 1^5 | 2 2``).  Equality is letter-wise and
    includes the mark.
    """

    letters: tuple[int, ...]
    mark: Optional[int] = None

    def __post_init__(self):
        if any(a < 1 for a in self.letters):
            raise ValueError("letters must be positive integers")
        if self.mark is not None and not (0 <= self.mark < len(self.letters)):
            raise ValueError("mark out of range")

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def unmarked(self) -> "Word":
        return Word(self.letters) if self.mark is not None else self

    def with_mark(self, mark: int) -> "Word":
        return Word(self.letters, mark)

    def concat(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __add__(self, other: "Word") -> "Word":
        return self.concat(other)

    def __repr__(self) -> str:
        return f"Word({word_to_text(self)!r})"


def word(*letters: int, mark: Optional[int] = None) -> Word:
    return Word(tuple(letters), mark)


def run(letter: int, count: int) -> Word:
    return Word((letter,) * count)


def concat_words(parts: Iterable[Word]) -> Word:
    out: list[int] = []
    for p in parts:
        out.extend(p.letters)
    return Word(tuple(out))


def parse_word(text: str) -> Word:
    """Parse the word grammar shared by all CLI commands.

    Letters ``1``/``2`` as bare digits, or comma-separated integers for
    general alphabets; runs ``L^k``; a mark written either as ``*``
    immediately after the marked letter or as ``|`` before position 0.
    Whitespace is ignored.  Example: ``2 2 1^5 | 2 2 1^3``.
    """
    comma_mode = "," in text
    letters: list[int] = []
    mark: Optional[int] = None
    i = 0
    n = len(text)

    def fail(pos: int, msg: str):
        raise ValueError(f"word parse error at position {pos}: {msg}")

    def skip_ws(j: int) -> int:
        while j < n and text[j].isspace():
            j += 1
        return j

    def read_number(j: int, multi: bool) -> tuple[int, int]:
        # numbers never cross whitespace, so runs like "2^2 1^5" stay unambiguous
        start = j
        if j >= n or not text[j].isdigit():
            fail(j, "expected digit")
        if multi:
            while j < n and text[j].isdigit():
                j += 1
        else:
            j += 1
        return int(text[start:j]), j

    while True:
        i = skip_ws(i)
        if i >= n:
            break
        ch = text[i]
        if ch == ",":
            i += 1
            continue
        if ch == "|":
            if mark is not None:
                fail(i, "duplicate mark")
            mark = len(letters)
            i += 1
            continue
        if not ch.isdigit():
            fail(i, f"unexpected character {ch!r}")
        value, i = read_number(i, comma_mode)
        count = 1
        if i < n and text[i] == "^":
            count, i = read_number(i + 1, True)
            if count < 1:
                fail(i, "run length must be >= 1")
        starred = False
        if i < n and text[i] == "*":
            starred = True
            i += 1
        if value < 1:
            fail(i, "letters must be >= 1")
        letters.extend([value] * count)
        if starred:
            if mark is not None:
                fail(i, "duplicate mark")
            mark = len(letters) - 1
    if mark is not None and mark == len(letters):
        raise ValueError("mark must precede a letter")
    return Word(tuple(letters), mark)


def word_to_text(w: Word) -> str:
    """Run-length text for a word, with ``|`` before the marked position."""
    parts: list[str] = []
    general = any(a > 9 for a in w.letters)
    i = 0
    n = len(w.letters)
    while i < n:
        if w.mark == i:
            parts.append("|")
        j = i
        while (
            j + 1 < n
            and w.letters[j + 1] == w.letters[i]
            and (w.mark is None or w.mark != j + 1)
        ):
            j += 1
        count = j - i + 1
        tok = str(w.letters[i]) + (f"^{count}" if count > 1 else "")
        parts.append(tok)
        i = j + 1
    sep = "," if general else " "
    return sep.join(parts).replace(f"{sep}|{sep}", " | ").replace(f"|{sep}", "| ")


# ---------------------------------------------------------------------------
# Integer helpers
# ---------------------------------------------------------------------------


def _isqrt_floor(n: int) -> int:
    return math.isqrt(n)


def is_perfect_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def extract_square(D: int) -> tuple[int, int]:
    """Best-effort split D = s^2 * D' with D' square-reduced.

    Trial division over small primes plus a perfect-square check.  Complete
    square-free reduction would need integer factorization, which is not
    feasible for the discriminants of long periodic words; comparisons never
    rely on it (they use exact sign computations instead).
    """
    if D == 0:
        return 1, 0
    s = 1
    for p in _SMALL_PRIMES:
        p2 = p * p
        while D % p2 == 0:
            D //= p2
            s *= p
    if is_perfect_square(D):
        s *= math.isqrt(D)
        D = 1
    return s, D


def _sign(n) -> int:
    return (n > 0) - (n < 0)


def sign_two_term(a: int, b: int, D: int) -> int:
    """Exact sign of a + b*sqrt(D) for integers a, b and D >= 0."""
    if D == 0 or b == 0:
        return _sign(a)
    if a == 0:
        return _sign(b)
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    # opposite signs: compare a^2 with b^2 D
    cmp = _sign(a * a - b * b * D)
    if cmp == 0:
        return 0
    return cmp if a > 0 else -cmp


def _sign_linear_combo(a: Fraction, b: Fraction, D: int) -> int:
    """Sign of a + b*sqrt(D) with Fraction coefficients."""
    m = a.denominator * b.denominator
    return sign_two_term(int(a * m), int(b * m), D)


# ---------------------------------------------------------------------------
# Quadratic surds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticSurd:
    """Exact real number (a + b*sqrt(D))/c in canonical form.

    c > 0, gcd(a, b, c) = 1, D >= 0 with square factors removed as far as
    trial division reaches, and D = 0 with b = 0 for rationals.  Equality and
    order are exact; cross-discriminant comparisons go through integer sign
    computations, so they remain correct even if a huge D retains a square
    factor beyond the trial-division bound.
    """

    a: int
    b: int
    c: int
    D: int

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("denominator must be positive")
        if self.D < 0:
            raise ValueError("D must be non-negative")

    # -- construction -----------------------------------------------------

    @staticmethod
    def make(a: int, b: int, c: int, D: int) -> "QuadraticSurd":
        if c == 0:
            raise ZeroDivisionError("surd with zero denominator")
        if c < 0:
            a, b, c = -a, -b, -c
        s, D2 = extract_square(D)
        b *= s
        D = D2
        if D in (0, 1):
            a, b, D = a + b * (1 if D == 1 else 0), 0, 0
        if b == 0:
            D = 0
        g = math.gcd(math.gcd(abs(a), abs(b)), c)
        if g > 1:
            a, b, c = a // g, b // g, c // g
        return QuadraticSurd(a, b, c, D)

    @staticmethod
    def from_rational(q: Union[int, Fraction]) -> "QuadraticSurd":
        q = Fraction(q)
        return QuadraticSurd.make(q.numerator, 0, q.denominator, 0)

    @staticmethod
    def sqrt_int(D: int) -> "QuadraticSurd":
        return QuadraticSurd.make(0, 1, 1, D)

    # -- predicates --------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("not a rational value")
        return Fraction(self.a, self.c)

    # -- arithmetic (within one radical class, or rational mixing) ---------

    def _coerce(self, other) -> "QuadraticSurd":
        if isinstance(other, QuadraticSurd):
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticSurd.from_rational(other)
        return NotImplemented

    def _common_class(self, other: "QuadraticSurd") -> tuple[int, int, int]:
        """Return (D, s_self, s_other) with sqrt(D_self) = s_self*sqrt(D)."""
        if self.D == 0 or other.D == 0:
            return max(self.D, other.D), 1, 1
        if self.D == other.D:
            return self.D, 1, 1
        prod = self.D * other.D
        if is_perfect_square(prod):
            # sqrt(other.D) = sqrt(prod)/sqrt(self.D) = (isqrt(prod)/self.D)*sqrt(self.D)
            r = math.isqrt(prod)
            if r % self.D == 0:
                return self.D, 1, r // self.D
            if r % other.D == 0:
                return other.D, r // other.D, 1
            # fall through: express both over D = prod reduced; should not happen
        raise ValueError(
            f"surds from incompatible radical classes D={self.D}, D={other.D}"
        )

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        D, s1, s2 = self._common_class(other)
        a = self.a * other.c + other.a * self.c
        b = self.b * s1 * other.c + other.b * s2 * self.c
        return QuadraticSurd.make(a, b, self.c * other.c, D)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.a, -self.b, self.c, self.D)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.b == 0 or other.b == 0:
            D = max(self.D, other.D)
            a = self.a * other.a
            b = self.a * other.b + self.b * other.a
            return QuadraticSurd.make(a, b, self.c * other.c, D)
        D, s1, s2 = self._common_class(other)
        b1, b2 = self.b * s1, other.b * s2
        a = self.a * other.a + b1 * b2 * D
        b = self.a * b2 + b1 * other.a
        return QuadraticSurd.make(a, b, self.c * other.c, D)

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticSurd":
        # 1/((a+b sqrt(D))/c) = c(a - b sqrt(D))/(a^2 - b^2 D)
        norm = self.a * self.a - self.b * self.b * self.D
        if norm == 0:
            raise ZeroDivisionError("inverse of zero surd")
        return QuadraticSurd.make(self.c * self.a, -self.c * self.b, norm, self.D)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, n: int) -> "QuadraticSurd":
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadraticSurd.from_rational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __rtruediv__(self, other):
        return self.inverse() * other

    # -- order -------------------------------------------------------------

    def sign(self) -> int:
        return sign_two_term(self.a, self.b, self.D)

    def compare(self, other) -> int:
        other = self._coerce(other)
        if isinstance(other, QuadraticSurd) and (
            self.D == other.D or self.b == 0 or other.b == 0
        ):
            diff_a = self.a * other.c - other.a * self.c
            diff_b = self.b * other.c - other.b * self.c
            return sign_two_term(diff_a, diff_b, max(self.D, other.D))
        # distinct radical classes: sign of A + B sqrt(D1) + C sqrt(D2)
        A = Fraction(self.a, self.c) - Fraction(other.a, other.c)
        B = Fraction(self.b, self.c)
        C = Fraction(-other.b, other.c)
        return _sign_three_term(A, B, self.D, C, other.D)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QuadraticSurd)):
            return self.compare(other) == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.D))

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    # -- conversions --------------------------------------------------------

    def enclosure(self, bits: int = 128) -> tuple[Fraction, Fraction]:
        """Outward rational bounds with denominator 2^bits."""
        scale = 1 << bits
        lo = _floor_surd_scaled(self.a, self.b, self.c, self.D, scale)
        return Fraction(lo, scale), Fraction(lo + 1, scale)

    def to_mpf(self, dps: Optional[int] = None) -> mpmath.mpf:
        with mpmath.workdps(dps or mpmath.mp.dps):
            return (self.a + self.b * mpmath.sqrt(self.D)) / self.c

    def __float__(self) -> float:
        return float(self.to_mpf(40))

    def decimal(self, digits: int = 40) -> str:
        with mpmath.workdps(digits + 10):
            return mpmath.nstr(self.to_mpf(), digits, strip_zeros=False)

    def __repr__(self):
        if self.is_rational:
            return f"QuadraticSurd({self.a}/{self.c})"
        return f"QuadraticSurd(({self.a}+{self.b}*sqrt({self.D}))/{self.c})"


def _floor_surd_scaled(a: int, b: int, c: int, D: int, scale: int) -> int:
    """floor(scale * (a + b sqrt(D)) / c) exactly."""
    A = a * scale
    B = b * scale
    if B == 0:
        return A // c
    t = B * B * D
    r = math.isqrt(t)
    if B > 0:
        lo_num = A + r  # floor(B sqrt(D)) = r (since B>0, isqrt floors)
    else:
        exact = r * r == t
        lo_num = A - r - (0 if exact else 1)
    q = lo_num // c
    # adjust: want largest q with q*c <= A + B*sqrt(D):  compare q*c - A vs B sqrt(D)
    while sign_two_term(q * c + c - A, -B, D) <= 0:
        q += 1
    while sign_two_term(q * c - A, -B, D) > 0:
        q -= 1
    return q


def _sign_three_term(A: Fraction, B: Fraction, D1: int, C: Fraction, D2: int) -> int:
    """Exact sign of A + B sqrt(D1) + C sqrt(D2) (possibly equal classes)."""
    if B == 0 or D1 == 0:
        return _sign_linear_combo(A, C, D2)
    if C == 0 or D2 == 0:
        return _sign_linear_combo(A, B, D1)
    if D1 == D2:
        return _sign_linear_combo(A, B + C, D1)
    prod = D1 * D2
    if is_perfect_square(prod):
        r = math.isqrt(prod)
        # sqrt(D2) = r / D1 * sqrt(D1) ... only valid when r divisible by D1
        return _sign_linear_combo(A, B + C * Fraction(r, D1), D1)
    # X + C sqrt(D2), X = A + B sqrt(D1)
    sX = _sign_linear_combo(A, B, D1)
    sY = _sign(C)
    if sX == 0:
        return sY
    if sY == 0:
        return sX
    if sX == sY:
        return sX
    # compare X^2 vs C^2 D2 inside Q(sqrt(D1))
    X2a = A * A + B * B * D1 - C * C * D2
    X2b = 2 * A * B
    s = _sign_linear_combo(X2a, X2b, D1)
    return sX if s > 0 else (-sX if s < 0 else 0)


# ---------------------------------------------------------------------------
# Algebraic values of radical rank <= 2 (sums of tails from two periods)
# ---------------------------------------------------------------------------


class AlgebraicValue:
    """Exact value q0 + sum_i coef_i * sqrt(D_i) with at most two radical classes.

    Spectrum quantities lambda_i = a_i + right-tail + left-tail live here when
    the two tails come from different quadratic fields.  Supports exact
    addition/subtraction and exact sign/comparison (rank <= 2), which is all
    the toolkit needs; values collapse back to QuadraticSurd when the classes
    merge.
    """

    __slots__ = ("q0", "terms")

    def __init__(self, q0: Fraction = Fraction(0), terms: Optional[dict[int, Fraction]] = None):
        self.q0 = Fraction(q0)
        self.terms: dict[int, Fraction] = {}
        if terms:
            for D, coef in terms.items():
                self._add_term(coef, D)

    @staticmethod
    def of(x) -> "AlgebraicValue":
        if isinstance(x, AlgebraicValue):
            return x
        v = AlgebraicValue()
        if isinstance(x, QuadraticSurd):
            v.q0 = Fraction(x.a, x.c)
            v._add_term(Fraction(x.b, x.c), x.D)
            return v
        v.q0 = Fraction(x)
        return v

    def _add_term(self, coef: Fraction, D: int):
        if coef == 0 or D == 0:
            return
        s, D2 = extract_square(D)
        coef, D = coef * s, D2
        if D == 1:
            self.q0 += coef
            return
        for D0 in list(self.terms):
            if D0 == D:
                self.terms[D0] += coef
                if self.terms[D0] == 0:
                    del self.terms[D0]
                return
            prod = D0 * D
            if is_perfect_square(prod):
                r = math.isqrt(prod)
                # sqrt(D) = (r / D0) sqrt(D0)
                self.terms[D0] += coef * Fraction(r, D0)
                if self.terms[D0] == 0:
                    del self.terms[D0]
                return
        self.terms[D] = coef

    def __add__(self, other):
        other = AlgebraicValue.of(other)
        out = AlgebraicValue(self.q0 + other.q0, dict(self.terms))
        for D, coef in other.terms.items():
            out._add_term(coef, D)
        return out

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicValue(-self.q0, {D: -c for D, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-AlgebraicValue.of(other))

    def __rsub__(self, other):
        return (-self) + other

    def sign(self) -> int:
        items = sorted(self.terms.items())
        if not items:
            return _sign(self.q0)
        if len(items) == 1:
            (D, coef), = items
            return _sign_linear_combo(self.q0, coef, D)
        if len(items) == 2:
            (D1, c1), (D2, c2) = items
            return _sign_three_term(self.q0, c1, D1, c2, D2)
        raise NotImplementedError(
            "exact sign beyond two radical classes is not supported"
        )

    def compare(self, other) -> int:
        return (self - other).sign()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QuadraticSurd, AlgebraicValue)):
            return self.compare(other) == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.q0, tuple(sorted(self.terms.items()))))

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def rank(self) -> int:
        return len(self.terms)

    def as_surd(self) -> QuadraticSurd:
        if not self.terms:
            return QuadraticSurd.from_rational(self.q0)
        if len(self.terms) > 1:
            raise ValueError("value spans two radical classes; not a quadratic surd")
        (D, coef), = self.terms.items()
        den = self.q0.denominator * coef.denominator
        a = int(self.q0 * den)
        b = int(coef * den)
        return QuadraticSurd.make(a, b, den, D)

    def to_mpf(self, dps: Optional[int] = None) -> mpmath.mpf:
        with mpmath.workdps(dps or mpmath.mp.dps):
            total = mpmath.mpf(self.q0.numerator) / self.q0.denominator
            for D, coef in self.terms.items():
                total += mpmath.mpf(coef.numerator) / coef.denominator * mpmath.sqrt(D)
            return total

    def __float__(self):
        return float(self.to_mpf(40))

    def decimal(self, digits: int = 40) -> str:
        with mpmath.workdps(digits + 10):
            return mpmath.nstr(self.to_mpf(), digits, strip_zeros=False)

    def __repr__(self):
        parts = [str(self.q0)]
        for D, c in sorted(self.terms.items()):
            parts.append(f"{c}*sqrt({D})")
        return "AlgebraicValue(" + " + ".join(parts) + ")"


ExactValue = Union[Fraction, QuadraticSurd, AlgebraicValue]


def exact_sign(x) -> int:
    """Sign of any exact value (Fraction/int/QuadraticSurd/AlgebraicValue)."""
    if isinstance(x, (int, Fraction)):
        return _sign(x)
    return x.sign()


def exact_compare(x, y) -> int:
    """Exact three-way comparison between any two exact values."""
    return (AlgebraicValue.of(x) - AlgebraicValue.of(y)).sign()


# ---------------------------------------------------------------------------
# Continuants and evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuantPair:
    """(p_n, q_n, p_{n-1}, q_{n-1}) for [0; a_1, ..., a_n].

    Satisfies p_n q_{n-1} - p_{n-1} q_n = (-1)^(n-1) and q_n >= q_{n-1} >= 0.
    """

    p: int
    q: int
    p_prev: int
    q_prev: int

    def det(self) -> int:
        return self.p * self.q_prev - self.p_prev * self.q


def continuants(w: Word) -> ContinuantPair:
    """Continuant pair of [0; w] by the standard recurrence (Euler's rule)."""
    if len(w) == 0:
        raise EmptyWordError("empty-word")
    p_prev, q_prev = 1, 0  # formal (p_{-1}, q_{-1})
    p, q = 0, 1  # (p_0, q_0) for the empty prefix
    for a in w.letters:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
    return ContinuantPair(p, q, p_prev, q_prev)


def continuant_q(w: Word) -> int:
    """Denominator q(w) of [0; w]; q(empty) = 1."""
    if len(w) == 0:
        return 1
    return continuants(w).q


def eval_finite(w: Word, a0: int = 0) -> Fraction:
    """Exact value of a0 + [0; w]."""
    if len(w) == 0:
        raise EmptyWordError("empty-word")
    cp = continuants(w)
    return a0 + Fraction(cp.p, cp.q)


def eval_with_tail(w: Word, tail: ExactValue) -> AlgebraicValue:
    """Exact value of [0; w, (tail)] where tail is the value [0; c_1, c_2...]."""
    t = AlgebraicValue.of(tail)
    if len(w) == 0:
        return t
    cp = continuants(w)
    if isinstance(tail, QuadraticSurd):
        num = tail * cp.p_prev + cp.p
        den = tail * cp.q_prev + cp.q
        return AlgebraicValue.of(num / den)
    if isinstance(tail, AlgebraicValue):
        return eval_with_tail(w, tail.as_surd())
    tf = Fraction(tail)
    return AlgebraicValue.of(
        (cp.p + cp.p_prev * tf) / (cp.q + cp.q_prev * tf)
    )


def eval_periodic(preperiod: Word, period: Word) -> QuadraticSurd:
    """Exact value of [0; preperiod, period, period, ...].

    The purely periodic part is the positive root of the Moebius fixed-point
    quadratic; the preperiod is then applied as a Moebius map in the field of
    that root.
    """
    if len(period) == 0:
        raise EmptyWordError("empty-word")
    cp = continuants(period)
    # beta = (p + p_prev*beta)/(q + q_prev*beta)
    A = cp.q_prev
    B = cp.q - cp.p_prev
    C = -cp.p
    if A == 0:  # single-letter |period| with q_prev = 0 cannot happen (q_prev>=... )
        beta = QuadraticSurd.from_rational(Fraction(-C, B))
    else:
        disc = B * B - 4 * A * C
        beta = QuadraticSurd.make(-B, 1, 2 * A, disc)
    if len(preperiod) == 0:
        return beta
    pp = continuants(preperiod)
    num = beta * pp.p_prev + pp.p
    den = beta * pp.q_prev + pp.q
    return num / den


def surd_compare(x: QuadraticSurd, y: QuadraticSurd) -> int:
    """Exact three-way comparison of two surds (any radical classes)."""
    return x.compare(y)


# ---------------------------------------------------------------------------
# Cylinders, sizes, scales
# ---------------------------------------------------------------------------


def cylinder_interval(w: Word) -> tuple[Fraction, Fraction]:
    """Endpoints of I(w) = {x in [0,1] : cf of x starts with w}, lo <= hi."""
    if len(w) == 0:
        raise EmptyWordError("empty-word")
    cp = continuants(w)
    e1 = Fraction(cp.p, cp.q)
    e2 = Fraction(cp.p + cp.p_prev, cp.q + cp.q_prev)
    return (e1, e2) if e1 <= e2 else (e2, e1)


def sizes(w: Word) -> Fraction:
    """Length of the cylinder I(w): 1/(q_n (q_n + q_{n-1}))."""
    if len(w) == 0:
        raise EmptyWordError("empty-word")
    cp = continuants(w)
    return Fraction(1, cp.q * (cp.q + cp.q_prev))


def floor_log_fraction(x: Fraction) -> int:
    """floor(log x) for a positive rational, exact.

    Computed by interval evaluation of log at doubling precision; e^k is
    irrational for integer k != 0, so the floor is always determinable.
    """
    if x <= 0:
        raise ValueError("positive rational required")
    if x == 1:
        return 0
    prec = 64
    while True:
        with mpmath.workprec(prec):
            lo = mpmath.log(mpmath.mpf(x.numerator)) - mpmath.log(mpmath.mpf(x.denominator))
            err = mpmath.ldexp(1, -(prec // 2))
            f_lo = mpmath.floor(lo - err)
            f_hi = mpmath.floor(lo + err)
            if f_lo == f_hi:
                return int(f_lo)
        prec *= 2


def sizer(w: Word) -> int:
    """Scale r(w) = floor(log(1/sizes(w)))."""
    return floor_log_fraction(1 / sizes(w))


def q_r_partition(r: int, max_letter: int) -> list[Word]:
    """The prefix-free set Q_r over the alphabet {1..max_letter}.

    All words w with sizer(w) >= r whose parent (w minus its last letter) has
    sizer < r, generated by depth-first extension.
    """
    if r < 1 or max_letter < 1:
        raise ValueError("r >= 1 and max_letter >= 1 required")
    out: list[Word] = []

    def extend(letters: tuple[int, ...]):
        for a in range(1, max_letter + 1):
            cand = Word(letters + (a,))
            if sizer(cand) >= r:
                out.append(cand)
            else:
                extend(cand.letters)

    extend(())
    return out


def gap_lower_bound(prefix: Word, T: int) -> Fraction:
    """Lower bound 1/((T+1)(T+2) q(prefix)^2) for a first-letter-of-suffix gap.

    Applies to x = [0; prefix, ...] versus any x~ = [0; prefix[:-1], b, ...]
    whose expansion first differs from prefix at its last letter, all letters
    <= T.  (The continuant in the bound is the one of the word including the
    differing letter, matching the classical gap lemma.)
    """
    if len(prefix) == 0:
        raise EmptyWordError("empty-word")
    if any(a > T for a in prefix.letters):
        raise ValueError("all prefix letters must be <= T")
    q = continuants(prefix).q
    return Fraction(1, (T + 1) * (T + 2) * q * q)


@dataclass(frozen=True)
class IntervalBound:
    """Closed rational interval [lo, hi] enclosing an exact value or a set."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("lo must be <= hi")

    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains_value(self, x) -> bool:
        return exact_compare(self.lo, x) <= 0 and exact_compare(x, self.hi) <= 0

    def intersects(self, other: "IntervalBound") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


def extreme_tail_values(max_letter: int) -> tuple[QuadraticSurd, QuadraticSurd]:
    """Exact min/max of [0; c_1, c_2, ...] over letters in {1..max_letter}."""
    if max_letter == 1:
        v = eval_periodic(Word(()), Word((1,)))
        return v, v
    lo = eval_periodic(Word(()), Word((max_letter, 1)))
    hi = eval_periodic(Word(()), Word((1, max_letter)))
    return lo, hi


def _outward(lo_s: QuadraticSurd, hi_s: QuadraticSurd, bits: int) -> IntervalBound:
    lo_f, _ = lo_s.enclosure(bits)
    _, hi_f = hi_s.enclosure(bits)
    return IntervalBound(lo_f, hi_f)


def tail_interval(prefix: Word, max_letter: int, bits: int = 128) -> IntervalBound:
    """Rational enclosure of {[0; prefix, c_1, c_2, ...] : c_i <= max_letter}.

    Endpoints come from the two parity-extreme eventually periodic tails,
    computed exactly and rounded outward to denominator 2^bits.
    """
    if max_letter < 1:
        raise ValueError("max_letter >= 1 required")
    t_lo, t_hi = extreme_tail_values(max_letter)
    if len(prefix) == 0:
        return _outward(t_lo, t_hi, bits)
    cp = continuants(prefix)
    # value = (p + p_prev t)/(q + q_prev t); monotone in t, direction by parity
    v1 = (t_lo * cp.p_prev + cp.p) / (t_lo * cp.q_prev + cp.q)
    v2 = (t_hi * cp.p_prev + cp.p) / (t_hi * cp.q_prev + cp.q)
    if v1.compare(v2) <= 0:
        return _outward(v1, v2, bits)
    return _outward(v2, v1, bits)


# ---------------------------------------------------------------------------
# Misc word helpers shared across modules
# ---------------------------------------------------------------------------


def transpose(w: Word) -> Word:
    """Letter reversal w^T (drops the mark; marks do not transpose)."""
    return Word(tuple(reversed(w.letters)))


PHI = QuadraticSurd.make(1, 1, 2, 5)  # golden ratio (1+sqrt(5))/2
SQRT5 = QuadraticSurd.sqrt_int(5)
