"""Free group words and the triangular relator support.

Letters are encoded as nonzero signed integers: ``+k`` is the k-th generator
(1-based), ``-k`` its inverse.  Words are tuples of such codes; most functions
here work directly on the tuples, with :class:`Letter` / :class:`SignedWord`
as the structured views.  A *triangle word* over rank ``m`` is a cyclically
reduced word of length three; these are exactly the possible relators, and
there are ``(2m-1)**3 + 1`` of them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator, Sequence

Word = tuple[int, ...]

# Exhaustive length-3 enumeration is kept to small rank by default; the
# support grows like 8*m**3 and callers wanting more must say so.
ENUMERATION_RANK_CAP = 6


@dataclass(frozen=True)
class Letter:
    """A generator or its inverse: ``generator_index >= 0``, ``sign`` +-1."""

    generator_index: int
    sign: int

    def __post_init__(self) -> None:
        if self.generator_index < 0:
            raise ValueError("generator_index must be >= 0")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def inverse(self) -> "Letter":
        return Letter(self.generator_index, -self.sign)

    def encode(self) -> int:
        return self.sign * (self.generator_index + 1)

    @staticmethod
    def decode(code: int) -> "Letter":
        if code == 0:
            raise ValueError("letter code must be nonzero")
        return Letter(abs(code) - 1, 1 if code > 0 else -1)


@dataclass(frozen=True)
class SignedWord:
    """A word over ``rank`` generators, stored as signed letter codes.

    >>> w = SignedWord.from_str("aBc", rank=3)
    >>> w.codes
    (1, -2, 3)
    >>> str(w.inverse())
    'CbA'
    """

    codes: Word
    rank: int

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        for c in self.codes:
            if c == 0 or abs(c) > self.rank:
                raise ValueError(f"letter code {c} out of range for rank {self.rank}")

    def __len__(self) -> int:
        return len(self.codes)

    def __str__(self) -> str:
        return word_to_str(self.codes)

    @property
    def letters(self) -> tuple[Letter, ...]:
        return tuple(Letter.decode(c) for c in self.codes)

    def inverse(self) -> "SignedWord":
        return SignedWord(invert_word(self.codes), self.rank)

    @staticmethod
    def from_str(text: str, rank: int) -> "SignedWord":
        return SignedWord(word_from_str(text), rank)


def invert_word(codes: Sequence[int]) -> Word:
    return tuple(-c for c in reversed(codes))


def free_reduce(codes: Sequence[int]) -> Word:
    """Delete adjacent inverse pairs until none remain.

    >>> free_reduce((1, 2, -2, -1, 3))
    (3,)
    """
    out: list[int] = []
    for c in codes:
        if out and out[-1] == -c:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


def cyclic_reduce(codes: Sequence[int]) -> Word:
    """Freely reduce, then strip mutually inverse first/last letters.

    The result has minimal length among all cyclic conjugates of the input.

    >>> cyclic_reduce((1, 2, 3, -2, -1))
    (3,)
    """
    w = list(free_reduce(codes))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def is_cyclically_reduced(codes: Sequence[int]) -> bool:
    w = tuple(codes)
    if free_reduce(w) != w:
        return False
    return not (len(w) >= 2 and w[0] == -w[-1])


def triangle_word_count(m: int) -> int:
    """Number of cyclically reduced length-3 words over rank ``m``.

    Splitting on whether the word starts with a repeated letter gives
    ``2m*(2m-1) + 2m*(2m-2)**2``, which simplifies to:

    >>> [triangle_word_count(m) for m in (1, 2, 3)]
    [2, 28, 126]
    """
    if m < 1:
        raise ValueError("rank must be >= 1")
    return (2 * m - 1) ** 3 + 1


def _letter_key(code: int) -> tuple[int, int]:
    # a < a^-1 < b < b^-1 < ...
    return (abs(code), 0 if code > 0 else 1)


def word_sort_key(codes: Sequence[int]) -> tuple[tuple[int, int], ...]:
    """Lexicographic key under the letter order a < A < b < B < ..."""
    return tuple(_letter_key(c) for c in codes)


def all_letters(m: int) -> list[int]:
    """All 2m letter codes in canonical order."""
    out: list[int] = []
    for g in range(1, m + 1):
        out.extend((g, -g))
    return out


def enumerate_triangle_words(m: int, rank_cap: int = ENUMERATION_RANK_CAP) -> list[Word]:
    """All cyclically reduced length-3 words, lexicographically ordered.

    Complete and duplicate-free; ``len(...) == triangle_word_count(m)``.
    """
    if m > rank_cap:
        raise ValueError(
            f"rank {m} exceeds enumeration cap {rank_cap}; pass rank_cap explicitly to override"
        )
    letters = all_letters(m)
    out = []
    for a in letters:
        for b in letters:
            if b == -a:
                continue
            for c in letters:
                if c == -b or c == -a:
                    continue
                out.append((a, b, c))
    out.sort(key=word_sort_key)
    return out


def sample_triangle_word(m: int, rng: random.Random) -> Word:
    """One uniform draw from the triangle-word support.

    Rejection from the uniform distribution on all (2m)**3 length-3 words;
    acceptance probability is at least 1/4, so the loop is short.
    """
    n = 2 * m
    while True:
        w = []
        for _ in range(3):
            i = rng.randrange(n)
            code = i // 2 + 1
            w.append(code if i % 2 == 0 else -code)
        if w[1] != -w[0] and w[2] != -w[1] and w[0] != -w[2]:
            return tuple(w)


def word_to_str(codes: Sequence[int]) -> str:
    """Serialize with a..z for generators, A..Z for inverses (rank <= 26)."""
    chars = []
    for c in codes:
        idx = abs(c) - 1
        if idx >= 26:
            raise ValueError("string form only supports rank <= 26")
        chars.append(chr((ord("a") if c > 0 else ord("A")) + idx))
    return "".join(chars)


def word_from_str(text: str) -> Word:
    codes = []
    for ch in text:
        if "a" <= ch <= "z":
            codes.append(ord(ch) - ord("a") + 1)
        elif "A" <= ch <= "Z":
            codes.append(-(ord(ch) - ord("A") + 1))
        else:
            raise ValueError(f"bad letter {ch!r}")
    return tuple(codes)


def word_to_json(codes: Sequence[int], m: int) -> object:
    """Strings for rank <= 26, signed-integer arrays beyond."""
    if m <= 26:
        return word_to_str(codes)
    return list(codes)


def word_from_json(obj: object) -> Word:
    if isinstance(obj, str):
        return word_from_str(obj)
    if isinstance(obj, list):
        return tuple(int(c) for c in obj)
    raise ValueError(f"bad word serialization: {obj!r}")


def rotations(codes: Word) -> Iterator[Word]:
    for k in range(len(codes)):
        yield codes[k:] + codes[:k]
