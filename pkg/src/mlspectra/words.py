"""Word combinatorics: semisymmetry, the tree of alphabets, weak
renormalization parsing, the below-3 period characterization, and the
candidate-word constructor used by the certification engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .cf_core import Word, concat_words, run, transpose, word

A_ROOT = word(2, 2)
B_ROOT = word(1, 1)


class NoParseError(ValueError):
    """Raised when a word admits no weak renormalization in an alphabet."""

    def __init__(self, message: str, position: Optional[int] = None):
        super().__init__(message)
        self.position = position


def is_semisymmetric(w: Word) -> bool:
    """True iff w is a palindrome or a concatenation of two palindromes.

    All |w|+1 split points are checked; empty parts count as palindromes, so
    plain palindromes are included.
    """
    if len(w) == 0:
        raise ValueError("empty word")
    s = w.letters

    def pal(t: tuple[int, ...]) -> bool:
        return t == t[::-1]

    return any(pal(s[:i]) and pal(s[i:]) for i in range(len(s) + 1))


# ---------------------------------------------------------------------------
# Tree of alphabets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlphabetPair:
    """A node (alpha, beta) of the tree of alphabets rooted at (22, 11).

    ``path`` records the branch choices from the root: 'U' for
    (u,v) -> (uv, v) and 'V' for (u,v) -> (u, uv).
    """

    alpha: Word
    beta: Word
    path: tuple[str, ...] = ()

    def child_u(self) -> "AlphabetPair":
        return AlphabetPair(self.alpha + self.beta, self.beta, self.path + ("U",))

    def child_v(self) -> "AlphabetPair":
        return AlphabetPair(self.alpha, self.alpha + self.beta, self.path + ("V",))

    def product(self) -> Word:
        return self.alpha + self.beta

    @property
    def depth(self) -> int:
        return len(self.path)

    def parent_parts(self) -> Optional[tuple[Word, Word, str]]:
        """(u, v, kind) with kind 'U' if this pair is (uv, v), 'V' if (u, uv)."""
        if not self.path:
            return None
        kind = self.path[-1]
        if kind == "U":
            u = Word(self.alpha.letters[: len(self.alpha) - len(self.beta)])
            return u, self.beta, "U"
        v = Word(self.beta.letters[len(self.alpha):])
        return self.alpha, v, "V"

    def label(self) -> str:
        from .cf_core import word_to_text

        return f"({word_to_text(self.alpha)}, {word_to_text(self.beta)})"


ROOT_PAIR = AlphabetPair(A_ROOT, B_ROOT)


def alphabet_tree(depth: int) -> list[AlphabetPair]:
    """All 2^depth alphabet pairs at exactly ``depth`` steps from (22, 11)."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    level = [ROOT_PAIR]
    for _ in range(depth):
        level = [c for p in level for c in (p.child_u(), p.child_v())]
    return level


def substitute(symbols: Iterable[str], alphabet: AlphabetPair) -> Word:
    """Expand a kernel written over {A, B} into letters via the alphabet."""
    parts = []
    for s in symbols:
        if s == "A":
            parts.append(alphabet.alpha)
        elif s == "B":
            parts.append(alphabet.beta)
        else:
            raise ValueError(f"kernel symbols must be 'A' or 'B', got {s!r}")
    return concat_words(parts) if parts else Word(())


# ---------------------------------------------------------------------------
# Weak renormalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Renormalization:
    """A decomposition w = prefix . expand(kernel) . suffix in an alphabet.

    The kernel is a nonempty word over {A, B}; prefix is a suffix of
    alpha*beta, suffix is a prefix of alpha*beta, both shorter than
    max(|alpha|, |beta|), and the two boundary restrictions of the
    definition hold.
    """

    alphabet: AlphabetPair
    kernel: tuple[str, ...]
    prefix: Word
    suffix: Word

    def expand(self) -> Word:
        return self.prefix + substitute(self.kernel, self.alphabet) + self.suffix


def _is_suffix(part: tuple[int, ...], whole: tuple[int, ...]) -> bool:
    return len(part) <= len(whole) and whole[len(whole) - len(part):] == part


def _is_prefix(part: tuple[int, ...], whole: tuple[int, ...]) -> bool:
    return whole[: len(part)] == part


def _check_boundary_restrictions(
    alphabet: AlphabetPair, kernel: tuple[str, ...], w1: Word, w2: Word
) -> bool:
    parts = alphabet.parent_parts()
    if parts is None:
        return True
    u, v, kind = parts
    if kind == "V" and kernel[-1] == "A" and len(v) > len(w2):
        return False
    if kind == "U" and kernel[0] == "B" and len(u) > len(w1):
        return False
    return True


def weakly_renormalize(w: Word, alphabet: AlphabetPair) -> Renormalization:
    """Parse w as w1 . kernel . w2 in the given alphabet, or raise NoParseError.

    Candidate prefixes are tried shortest first (longest kernel wins among
    valid splits); tokenization prefers the longer token and backtracks, so
    the unique factorization over {alpha, beta} is found when one exists.
    """
    if len(w) == 0:
        raise NoParseError("empty word")
    letters = w.unmarked().letters
    alpha, beta = alphabet.alpha.letters, alphabet.beta.letters
    ab = alpha + beta
    limit = max(len(alpha), len(beta))
    tokens = sorted(
        (("A", alpha), ("B", beta)), key=lambda t: len(t[1]), reverse=True
    )
    best_positions: list[int] = [0]

    def parse_from(w1_len: int) -> Optional[tuple[tuple[str, ...], Word]]:
        # DFS over token choices; stopping is allowed once the remainder is a
        # short prefix of alpha*beta.
        results: list[tuple[tuple[str, ...], Word]] = []
        w1 = Word(letters[:w1_len])

        def dfs(pos: int, kernel: tuple[str, ...]):
            best_positions[0] = max(best_positions[0], pos)
            for name, tok in tokens:
                if letters[pos: pos + len(tok)] == tok:
                    dfs(pos + len(tok), kernel + (name,))
            rest = letters[pos:]
            if kernel and len(rest) < limit and _is_prefix(rest, ab):
                w2 = Word(rest)
                if _check_boundary_restrictions(alphabet, kernel, w1, w2):
                    results.append((kernel, w2))

        dfs(w1_len, ())
        if not results:
            return None
        # prefer the longest kernel (smallest suffix) among valid parses
        results.sort(key=lambda r: len(r[1]))
        return results[0]

    for w1_len in range(0, min(limit, len(letters) + 1)):
        w1 = letters[:w1_len]
        if not _is_suffix(w1, ab):
            continue
        got = parse_from(w1_len)
        if got is not None:
            kernel, w2 = got
            return Renormalization(alphabet, kernel, Word(w1), w2)
    raise NoParseError(
        f"no-parse in alphabet {alphabet.label()}", position=best_positions[0]
    )


def _chain_from(
    w: Word, pair: AlphabetPair, renorm: Renormalization
) -> list[tuple[AlphabetPair, Renormalization]]:
    best = [(pair, renorm)]
    for child in (pair.child_u(), pair.child_v()):
        try:
            r = weakly_renormalize(w, child)
        except NoParseError:
            continue
        if len(r.kernel) < 2:
            # a single-token kernel cannot renormalize further; the chain
            # stops at the alphabet whose kernel still mixes alpha and beta
            continue
        cand = [(pair, renorm)] + _chain_from(w, child, r)
        if len(cand) > len(best):
            best = cand
    return best


def renormalization_chain(w: Word) -> list[tuple[AlphabetPair, Renormalization]]:
    """Maximal chain of weak renormalizations starting at the root (22, 11).

    Each successive alphabet is a child of the previous one and carries a
    valid renormalization of w; among the valid branches the longest chain is
    returned (ties prefer the U-child).  Children whose kernel degenerates to
    a single token are not descended into.
    """
    try:
        r0 = weakly_renormalize(w, ROOT_PAIR)
    except NoParseError:
        return []
    return _chain_from(w, ROOT_PAIR, r0)


def _primitive_root(letters: tuple[int, ...]) -> tuple[int, ...]:
    n = len(letters)
    for p in range(1, n + 1):
        if n % p == 0 and letters == letters[p % n:] + letters[: p % n]:
            return letters[:p]
    return letters


def _rotations(letters: tuple[int, ...]) -> list[tuple[int, ...]]:
    return [letters[i:] + letters[:i] for i in range(len(letters))]


def below3_period_check(period: Word) -> bool:
    """True iff the periodic word has Markov value below 3.

    Characterization: the (primitive) period must be cyclically equal to 1, 2
    or alpha*beta for an admissible alphabet; the alphabet is searched for by
    running the renormalization chain on a doubled rotation of the period.
    """
    if len(period) == 0:
        raise ValueError("empty period")
    prim = _primitive_root(period.unmarked().letters)
    if prim in ((1,), (2,)):
        return True
    if len(prim) % 2:
        return False
    for rot in _rotations(prim):
        doubled = Word(rot + rot)
        for pair, _ in renormalization_chain(doubled):
            if pair.product().letters == rot:
                return True
    return False


# ---------------------------------------------------------------------------
# Candidate words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CandidateWord:
    """A centered word 221^{s_-M} ... 221^{s_-1} 22* 1^{2k-1} 221^{s_2} ... 221^{s_N}.

    Exponents are indexed by i in {-M..-1, 1..N}; s_1 = 2k-1 is implied.  The
    derived word carries its mark on the first letter of the central 22.
    """

    k: int
    exponents: dict[int, int] = field(hash=False)
    word: Word = field(hash=False)

    @property
    def M(self) -> int:
        return -min(self.exponents)

    @property
    def N(self) -> int:
        return max(self.exponents)

    def exponent(self, i: int) -> int:
        return self.exponents[i]

    def block(self, i: int) -> Word:
        return word(2, 2) + run(1, self.exponents[i])

    def left_word(self) -> Word:
        """w_L = 221^{s_-M} ... 221^{s_-1} (blocks left of the marked 22)."""
        return concat_words(self.block(i) for i in range(-self.M, 0))

    def right_word(self) -> Word:
        """w_R = 1^{2k-1} 221^{s_2} ... 221^{s_N} (everything right of it)."""
        parts = [run(1, self.exponents[1])]
        parts.extend(self.block(i) for i in range(2, self.N + 1))
        return concat_words(parts)

    def blocks(self) -> list[Word]:
        """eta_1 ... eta_ell, each 221^{s_i}, in word order."""
        idx = list(range(-self.M, 0)) + list(range(1, self.N + 1))
        return [self.block(i) for i in idx]

    @property
    def mark_position(self) -> int:
        """Index of a_0 = the second 2 of the central block."""
        return len(self.left_word()) + 1


def s_minus_one_rule(k: int) -> int:
    """Smallest odd integer >= 2k + (log log 2k)^4.

    The construction additionally needs this to be >= 2k+3 so that an odd
    s_2 with s_{-1} > s_2 >= 2k+1 exists; callers treat smaller values as
    infeasible.
    """
    if k < 2:
        raise ValueError("k too small")
    bound = 2 * k + math.log(math.log(2 * k)) ** 4
    s = math.ceil(bound)
    if s < bound:  # guard against float edge
        s += 1
    if s % 2 == 0:
        s += 1
    return s


class InconsistentParameters(ValueError):
    pass


def construct_candidate(
    k: int,
    M: int,
    N: int,
    tail_exponents: Optional[dict[int, int]] = None,
) -> CandidateWord:
    """Build the candidate word for parameters (k, M, N) and tail exponents.

    Enforced shape: s_1 = 2k-1; s_{-1} fixed by ``s_minus_one_rule`` and
    required to be >= 2k+3; s_2 odd with s_{-1} > s_2 >= 2k+1; every other
    supplied s_i >= 2k; total length odd (the parity the self-replication
    mechanism relies on); result not semisymmetric.

    ``tail_exponents`` maps indices in {-M..-2, 2..N} to values; missing
    entries default to s_2 = 2k+1 and s_i = 2k (adjusted by one where needed
    to keep the total length odd).
    """
    if M < 1 or N < 1:
        raise InconsistentParameters("M, N >= 1 required")
    if k < 2:
        raise InconsistentParameters("k too small")
    s1 = 2 * k - 1
    s_minus_1 = s_minus_one_rule(k)
    if s_minus_1 < 2 * k + 3:
        raise InconsistentParameters(
            "inconsistent-parameters: s_{-1} rule lands below 2k+3, "
            "no odd s_2 with s_{-1} > s_2 >= 2k+1 exists"
        )
    exps: dict[int, int] = {1: s1, -1: s_minus_1}
    supplied = dict(tail_exponents or {})
    if N >= 2:
        s2 = supplied.pop(2, 2 * k + 1)
        if s2 % 2 == 0 or not (2 * k + 1 <= s2 < s_minus_1):
            raise InconsistentParameters(
                f"inconsistent-parameters: need odd s_2 with "
                f"{2*k+1} <= s_2 < {s_minus_1}, got {s2}"
            )
        exps[2] = s2
    indices = [i for i in range(-M, 0) if i != -1] + [
        i for i in range(2, N + 1) if i != 2
    ]
    for i in indices:
        v = supplied.pop(i, 2 * k)
        if v < 2 * k:
            raise InconsistentParameters(
                f"inconsistent-parameters: s_{i} = {v} below 2k = {2*k}"
            )
        exps[i] = v
    if supplied:
        raise InconsistentParameters(
            f"inconsistent-parameters: unused tail exponents {sorted(supplied)}"
        )
    total = sum(exps.values()) + 2 * len(exps)
    if total % 2 == 0:
        # a fill exponent can absorb the parity when the caller left it default
        fixable = [
            i for i in indices if (tail_exponents or {}).get(i) is None
        ]
        if fixable:
            exps[fixable[0]] += 1
            total += 1
        else:
            raise InconsistentParameters(
                "inconsistent-parameters: total length even; the parity "
                "mechanism needs |w| odd"
            )
    parts = []
    for i in list(range(-M, 0)) + list(range(1, N + 1)):
        parts.append(word(2, 2) + run(1, exps[i]))
    letters = concat_words(parts).letters
    # a_0 is the second 2 of the central block (the paper's 22* notation)
    mark = sum(exps[i] + 2 for i in range(-M, 0)) + 1
    w = Word(letters, mark)
    cand = CandidateWord(k=k, exponents=exps, word=w)
    if is_semisymmetric(w.unmarked()):
        raise InconsistentParameters(
            "inconsistent-parameters: candidate came out semisymmetric"
        )
    return cand
