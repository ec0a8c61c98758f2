"""Symbolic words over a generator set.

A Word is a sequence of 0-based generator indices; its symbolic length is
the sequence length.  Evaluation follows the walk composition order: the
product of the word (w_1, ..., w_n) is M(w_n) *** M(w_1), i.e. the last
letter is the leftmost matrix factor.  Traces and norms do not depend on
this choice, but fixing it keeps everything reproducible.

The uniform samplers use the canonical free-group alphabet convention of
the built-in groups: 2*rank letters with inverse_of(i) = (i + rank) mod 2*rank.
"""

from __future__ import annotations

import itertools
from typing import Iterator, NamedTuple, Optional

from .errors import NoInverse, ParseError, TooLarge, ValidationError
from .groups import GeneratorSet
from .rng import SplitMix64
from .sl2 import Mat2, ScaledMat, canonical_key, det, from_mat2, identity, mat_mul, mul

_ENUM_GUARD = 10 ** 8
_BFS_GUARD = 10 ** 7
_BFS_MAX_RADIUS = 12


class Word(NamedTuple):
    letters: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.letters)


def parse(text: str, gens: GeneratorSet) -> Word:
    """Parse whitespace-separated tokens: a name, optionally ^nonzero-integer.

    Negative exponents expand through the inverse pairing, preserving order:
    "X^-2 Y" becomes X^-1 X^-1 Y.
    """
    index = {name: i for i, name in enumerate(gens.names)}
    letters: list[int] = []
    for token in text.split():
        if token in index:
            letters.append(index[token])
            continue
        name, sep, exp_text = token.rpartition("^")
        if not sep or name not in index:
            raise ParseError(f"unknown generator token {token!r}")
        try:
            exp = int(exp_text)
        except ValueError:
            raise ParseError(f"malformed exponent in token {token!r}") from None
        if exp == 0:
            raise ParseError(f"zero exponent in token {token!r}")
        i = index[name]
        if exp < 0:
            i = gens.inverse_of(i)  # NoInverse when unpaired
            exp = -exp
        letters.extend([i] * exp)
    return Word(tuple(letters))


def format_word(w: Word, gens: GeneratorSet) -> str:
    """Space-joined generator names; inverse of parse on canonical words."""
    k = gens.k
    for i in w.letters:
        if not 0 <= i < k:
            raise ValidationError(f"letter {i} out of range for k={k}")
    return " ".join(gens.names[i] for i in w.letters)


def evaluate(w: Word, gens: GeneratorSet) -> ScaledMat:
    """Product of the word's matrices, last letter leftmost."""
    k = gens.k
    acc = identity()
    for i in w.letters:
        if not 0 <= i < k:
            raise ValidationError(f"letter {i} out of range for k={k}")
        acc = mul(from_mat2(gens.mats[i]), acc)
    return acc


def _inverse_table(gens: GeneratorSet) -> list[int]:
    if gens.inverse_pairing is None:
        raise NoInverse("word reduction needs a fully paired generator set")
    table = []
    for i in range(gens.k):
        if i not in gens.inverse_pairing:
            raise NoInverse(f"generator {gens.names[i]!r} has no paired inverse")
        table.append(gens.inverse_pairing[i])
    return table


def free_reduce(w: Word, gens: GeneratorSet) -> Word:
    """Delete adjacent inverse pairs until none remain (order-independent)."""
    inv = _inverse_table(gens)
    stack: list[int] = []
    for i in w.letters:
        if stack and stack[-1] == inv[i]:
            stack.pop()
        else:
            stack.append(i)
    return Word(tuple(stack))


def cyclic_reduce(w: Word, gens: GeneratorSet) -> Word:
    """Free-reduce, then strip matching first/last inverse pairs."""
    inv = _inverse_table(gens)
    letters = list(free_reduce(w, gens).letters)
    while len(letters) >= 2 and letters[0] == inv[letters[-1]]:
        letters = letters[1:-1]
    return Word(tuple(letters))


def count_reduced(rank: int, n: int) -> int:
    """Number of reduced words of length n in the free group of given rank."""
    if rank < 1 or n < 1:
        raise ValueError("rank and n must be positive")
    return 2 * rank * (2 * rank - 1) ** (n - 1)


def sample_reduced(rank: int, n: int, rng: SplitMix64) -> Word:
    """Exactly uniform reduced word: first letter uniform over 2r, each next
    uniform over the 2r-1 letters that do not cancel the previous one."""
    if rank < 1 or n < 1:
        raise ValueError("rank and n must be positive")
    k = 2 * rank
    letters = [rng.randbelow(k)]
    for _ in range(n - 1):
        forbidden = (letters[-1] + rank) % k
        j = rng.randbelow(k - 1)
        if j >= forbidden:
            j += 1
        letters.append(j)
    return Word(tuple(letters))


def sample_cyclic_reduced(rank: int, n: int, rng: SplitMix64) -> Word:
    """Uniform cyclically reduced word via rejection on the endpoints."""
    if rank < 1 or n < 1:
        raise ValueError("rank and n must be positive")
    k = 2 * rank
    while True:
        w = sample_reduced(rank, n, rng)
        if n == 1 or w.letters[0] != (w.letters[-1] + rank) % k:
            return w


def enumerate_words(k: int, n: int) -> Iterator[Word]:
    """All k^n words of length n in lexicographic order."""
    if k < 1 or n < 0:
        raise ValueError("need k >= 1 and n >= 0")
    if k ** n > _ENUM_GUARD:
        raise TooLarge(f"{k}^{n} words exceed the enumeration guard")
    return (Word(t) for t in itertools.product(range(k), repeat=n))


def algebraic_length(g: Mat2, gens: GeneratorSet, max_radius: int = 12) -> Optional[int]:
    """Least number of generators multiplying to +-g, by breadth-first search.

    Elements are deduplicated projectively on a 1e-9 grid, which is sound for
    generators whose products keep entries well separated (integer-ish
    matrices); near-coincident entries at large radius can alias.  Returns
    None when no product within max_radius matches.
    """
    if not 1 <= max_radius <= _BFS_MAX_RADIUS:
        raise ValueError(f"max_radius must be in [1, {_BFS_MAX_RADIUS}]")
    if abs(det(g) - 1.0) > 1e-9:
        raise ValidationError("target matrix must have det 1")
    target = canonical_key(g)
    ident = Mat2(1.0, 0.0, 0.0, 1.0)
    if canonical_key(ident) == target:
        return 0
    visited = {canonical_key(ident)}
    frontier = [ident]
    for depth in range(1, max_radius + 1):
        next_frontier: list[Mat2] = []
        for m in frontier:
            for z in gens.mats:
                p = mat_mul(z, m)
                key = canonical_key(p)
                if key == target:
                    return depth
                if key not in visited:
                    visited.add(key)
                    next_frontier.append(p)
                    if len(visited) > _BFS_GUARD:
                        raise TooLarge("BFS frontier exceeded the element guard")
        frontier = next_frontier
        if not frontier:
            return None
    return None
