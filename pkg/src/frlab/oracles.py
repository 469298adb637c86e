"""Brute-force oracles, kept independent from the engines they check.

Everything here works from explicit group element lists and evaluates
definitions literally over the full subset lattice.  Only small domains
(at most 7 points) are intended.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .groups import naive_elements


class RankOracle:
    """Literal evaluation of "rank(a, B) <= alpha" without any quotienting."""

    def __init__(self, P, with_krk: bool):
        self.n = P.degree
        self.elements = list(naive_elements(P))
        self.with_krk = with_krk
        self._stab: dict[frozenset, list] = {}
        self.le = lru_cache(maxsize=None)(self._le)

    def stab(self, B: frozenset) -> list:
        if B not in self._stab:
            self._stab[B] = [g for g in self.elements if all(g[b] == b for b in B)]
        return self._stab[B]

    def conj(self, x: int, B: frozenset) -> set[int]:
        return {g[x] for g in self.stab(B)}

    def lt(self, a, B, alpha) -> bool:
        return any(self.le(a, B, beta) for beta in range(alpha))

    def _le(self, a: int, B: frozenset, alpha: int) -> bool:
        if alpha == 0:
            return all(g[a] == a for g in self.stab(B))
        for c in range(self.n):
            if all(self.lt(a, B | {c2}, alpha) for c2 in self.conj(c, B)):
                return True
        if self.with_krk:
            if all(self.lt(a, B | {a2}, alpha) or self.lt(a2, B | {a}, alpha) for a2 in self.conj(a, B)):
                return True
        return False

    def value(self, a: int, B) -> int | None:
        """Least alpha with rank <= alpha, or None (infinite) past the domain size."""
        B = frozenset(B)
        for alpha in range(self.n + 2):
            if self.le(a, B, alpha):
                return alpha
        return None


def all_values(P, with_krk: bool) -> dict[tuple[int, frozenset], int | None]:
    o = RankOracle(P, with_krk)
    out = {}
    for k in range(P.degree + 1):
        for B in itertools.combinations(range(P.degree), k):
            for a in range(P.degree):
                out[(a, frozenset(B))] = o.value(a, B)
    return out


def brute_force_orbit(P, a: int, B) -> set[int]:
    B = set(B)
    return {g[a] for g in naive_elements(P) if all(g[b] == b for b in B)}
