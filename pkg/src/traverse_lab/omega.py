"""Multiplicity words of trajectory divisors.

A word lists the tangency multiplicities of the boundary points met by one
trajectory, in flow order.  ``(1, 1)`` is a transversal chord, ``(2,)`` a
boundary singleton, ``(1, 2, 1)`` a chord touching the boundary once in its
interior.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


@dataclass(frozen=True, order=False)
class OmegaWord:
    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(e < 1 for e in entries):
            raise ValueError(f"multiplicities must be >= 1, got {entries}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def parse(cls, text: str) -> "OmegaWord":
        text = text.strip().strip("()")
        if "," in text:
            return cls(tuple(int(t) for t in text.split(",") if t.strip()))
        return cls(tuple(int(c) for c in text if not c.isspace()))

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __str__(self) -> str:
        if all(e <= 9 for e in self.entries):
            return "".join(str(e) for e in self.entries)
        return ",".join(str(e) for e in self.entries)

    def __repr__(self) -> str:
        return f"OmegaWord({str(self)!r})"

    def sort_key(self) -> tuple:
        return (len(self.entries), self.entries)

    def __lt__(self, other: "OmegaWord") -> bool:
        return self.sort_key() < other.sort_key()

    @property
    def support(self) -> range:
        return range(len(self.entries))


def as_word(w: OmegaWord | Sequence[int] | str) -> OmegaWord:
    if isinstance(w, OmegaWord):
        return w
    if isinstance(w, str):
        return OmegaWord.parse(w)
    return OmegaWord(tuple(w))


def norm(w) -> int:
    return sum(as_word(w).entries)


def reduced_norm(w) -> int:
    return sum(e - 1 for e in as_word(w).entries)


def is_admissible(w) -> bool:
    """Odd ends with even interior, or a single even entry."""
    e = as_word(w).entries
    if len(e) == 0:
        return False
    if len(e) == 1:
        return e[0] % 2 == 0
    return e[0] % 2 == 1 and e[-1] % 2 == 1 and all(x % 2 == 0 for x in e[1:-1])


def mirror(w) -> OmegaWord:
    return OmegaWord(tuple(reversed(as_word(w).entries)))


def _group_sizes(w: OmegaWord) -> list[int]:
    return [e - 1 for e in w.entries]


def group_reversal_parity(sizes: Sequence[int]) -> int:
    # reversing blocks of sizes g_1..g_q moves every element of block i past
    # every element of block j > i, hence sum_{i<j} g_i g_j inversions
    total = 0
    running = 0
    for g in sizes:
        total += running * g
        running += g
    return total % 2


def flip_sign_exponent(w) -> int:
    """Exponent mod 2 of the sign change of the versal orientation under v -> -v.

    Parity of the permutation reversing the groups of lengths ``w[i] - 1``,
    plus ``ceil((w[i] - 2) / 2)`` summed over entries with ``w[i] >= 2``.
    """
    w = as_word(w)
    sign = group_reversal_parity(_group_sizes(w))
    terms = sum(-(-(e - 2) // 2) for e in w.entries if e >= 2)
    return (sign + terms) % 2


def chain_bound(m: int) -> int:
    """Longest run of causality arrows near a boundary point of multiplicity m."""
    if m < 1:
        raise ValueError("multiplicity must be >= 1")
    return m // 2


def _words_of_length(q: int, budget: int) -> Iterable[tuple[int, ...]]:
    # entries are 1 + excess, total excess bounded by budget
    if q == 0:
        yield ()
        return
    for x in range(budget + 1):
        for rest in _words_of_length(q - 1, budget - x):
            yield (1 + x, *rest)


def enumerate_admissible(max_reduced_norm: int, max_support: int) -> list[OmegaWord]:
    if max_reduced_norm < 0 or max_support < 0:
        raise ValueError("bounds must be nonnegative")
    found = set()
    for q in range(1, max_support + 1):
        for entries in _words_of_length(q, max_reduced_norm):
            if is_admissible(entries):
                found.add(OmegaWord(entries))
    return sorted(found, key=OmegaWord.sort_key)


def enumerate_by_norm(max_norm: int) -> list[OmegaWord]:
    """All admissible words with ``norm(w) <= max_norm``."""
    found = set()
    for q in range(1, max_norm + 1):
        for entries in _words_of_length(q, max_norm - q):
            if is_admissible(entries):
                found.add(OmegaWord(entries))
    return sorted(found, key=OmegaWord.sort_key)
