"""Action instances: a fixed permutation group, or a growing approximation of a Fraïssé limit."""

from __future__ import annotations

import hashlib
import itertools
from typing import Iterable

from .fraisse import (
    FraisseClassSpec,
    build_limit,
    extension_types,
    realizations,
    realize,
    type_key,
)
from .groups import PermGroup, automorphism_group, find_set_mapping, set_orbit
from .structures import FinStructure, is_partial_isomorphism
from .verdict import BudgetExhausted

DEFAULT_BUDGET = 64


class FixedInstance:
    """The natural action of a permutation group on ``range(degree)``."""

    kind = "fixed"

    def __init__(self, group: PermGroup, structure: FinStructure | None = None, name: str = ""):
        if structure is not None and structure.size != group.degree:
            raise ValueError("structure size must match group degree")
        self.group = group
        self.structure = structure
        self.name = name or f"perm-group-{group.degree}"

    @classmethod
    def of_structure(cls, M: FinStructure, name: str = "") -> "FixedInstance":
        return cls(automorphism_group(M), M, name)

    @property
    def size(self) -> int:
        return self.group.degree

    @property
    def universe(self) -> range:
        return range(self.group.degree)

    def orbit_over(self, a: int, B: Iterable[int]) -> frozenset:
        B = frozenset(B)
        if a in B:
            return frozenset([a])
        return frozenset(self.group.pointwise_stabilizer(sorted(B)).orbit(a))

    def set_orbit_over(self, A: Iterable[int], C: Iterable[int]) -> list[frozenset]:
        """All sets A' with A' congruent to A over C."""
        stab = self.group.pointwise_stabilizer(sorted(set(C)))
        return sorted(set_orbit(stab.generators, frozenset(A)), key=lambda s: (len(s), sorted(s)))

    def set_congruent(self, A, B, C):
        return find_set_mapping(self.group, frozenset(A), frozenset(B), frozenset(C))

    def generators(self):
        return self.group.generators

    def fingerprint(self) -> str:
        doc = repr((self.kind, self.group.degree, sorted(self.group.generators)))
        return hashlib.sha256(doc.encode()).hexdigest()[:16]

    def __repr__(self):
        return f"FixedInstance({self.name}, degree={self.size}, order={self.group.order()})"


class ExtendableInstance:
    """A finite approximation of the limit of a Fraïssé class that grows on demand.

    Congruence over a finite set is decided by equality of one-point types,
    which is sound because the approximation embeds in the ultrahomogeneous
    limit.  Growth realizes a requested type as a new element while the
    universe stays below ``growth_budget``.
    """

    kind = "extendable"

    def __init__(
        self,
        spec: FraisseClassSpec,
        current: FinStructure | None = None,
        growth_budget: int = DEFAULT_BUDGET,
        depth: int = 4,
        name: str = "",
    ):
        self.spec = spec
        self.current = current if current is not None else build_limit(spec, 0, 0).structure
        self.growth_budget = growth_budget
        self.depth = depth
        self.name = name or f"{spec.label}-limit"
        self.grown = 0

    @classmethod
    def seeded(cls, spec, n_initial: int = 8, ext_depth: int = 2, growth_budget: int = DEFAULT_BUDGET, depth: int = 4, name: str = ""):
        start = build_limit(spec, n_initial, ext_depth).structure
        return cls(spec, start, growth_budget, depth, name)

    @property
    def structure(self) -> FinStructure:
        return self.current

    @property
    def size(self) -> int:
        return self.current.size

    @property
    def universe(self) -> range:
        return self.current.universe

    def fork(self, current: FinStructure | None = None, growth_budget: int | None = None) -> "ExtendableInstance":
        return ExtendableInstance(
            self.spec,
            self.current if current is None else current,
            self.growth_budget if growth_budget is None else growth_budget,
            self.depth,
            self.name,
        )

    # -- congruence ----------------------------------------------------------

    def orbit_over(self, a: int, B: Iterable[int]) -> frozenset:
        B = frozenset(B)
        if a in B:
            return frozenset([a])
        return frozenset(realizations(self.current, B, type_key(self.current, B, a)))

    def set_congruent(self, A, B, C):
        """A partial isomorphism fixing C and carrying A onto B, or None."""
        A, B, C = frozenset(A), frozenset(B), frozenset(C)
        if len(A) != len(B) or (A & C) != (B & C):
            return None
        src = sorted(A - C)
        fixed = {c: c for c in C}
        for img in itertools.permutations(sorted(B - C)):
            f = dict(fixed)
            f.update(zip(src, img))
            if is_partial_isomorphism(self.current, f):
                return f
        return None

    def set_orbit_over(self, A, C) -> list[frozenset]:
        """Sets of the current approximation congruent to A over C."""
        A, C = frozenset(A), frozenset(C)
        rest = [x for x in self.universe if x not in C]
        k = len(A - C)
        out = []
        for S in itertools.combinations(rest, k):
            cand = frozenset(S) | (A & C)
            if self.set_congruent(A, cand, C) is not None:
                out.append(cand)
        return out

    # -- growth --------------------------------------------------------------

    def can_grow(self) -> bool:
        return self.current.size < self.growth_budget

    def realize_key(self, base, key) -> int | None:
        """Append a new element of the given type over base; None when the class forbids it."""
        if not self.can_grow():
            raise BudgetExhausted(f"growth budget {self.growth_budget} reached")
        nxt = realize(self.spec, self.current, base, key)
        if nxt is None:
            return None
        self.current = nxt
        self.grown += 1
        return nxt.size - 1

    def realize_fresh(self, a: int, B: Iterable[int]) -> int | None:
        """A new element congruent to a over B (growing the approximation)."""
        B = frozenset(B)
        if a in B:
            return None
        return self.realize_key(B, type_key(self.current, B, a))

    def copy_over(self, A: Iterable[int], C: Iterable[int]) -> dict[int, int] | None:
        """Realize a fresh copy of A over C, element by element."""
        C = frozenset(C)
        src = sorted(set(A) - C)
        image: dict[int, int] = {c: c for c in C}
        for i, a in enumerate(src):
            base = C | set(src[:i])
            key = type_key(self.current, base, a)
            key = frozenset((nm, tuple(image.get(e, e) for e in row)) for nm, row in key)
            x = self.realize_key(C | {image[s] for s in src[:i]}, key)
            if x is None:
                return None
            image[a] = x
        return image

    def extension_keys(self, base) -> list:
        return [k for k, _ in extension_types(self.spec, self.current, sorted(base))]

    def snapshot(self) -> FixedInstance:
        return FixedInstance(automorphism_group(self.current), self.current, self.name + "-snapshot")

    def fingerprint(self) -> str:
        doc = repr((self.kind, self.spec.to_json(), self.current.key(), self.growth_budget, self.depth))
        return hashlib.sha256(doc.encode()).hexdigest()[:16]

    def __repr__(self):
        return f"ExtendableInstance({self.name}, size={self.size}, budget={self.growth_budget})"


ActionInstance = FixedInstance | ExtendableInstance
