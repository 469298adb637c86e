"""Finite relational structures, embeddings and quantifier-free types.

Universes are always ``range(size)``.  Relation tables are frozensets of
tuples, so structures hash and compare by value.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

ARITY_CAP = 4


class StructureError(ValueError):
    pass


class SignatureMismatch(StructureError):
    pass


@dataclass(frozen=True)
class Signature:
    relations: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        names = [n for n, _ in self.relations]
        if len(set(names)) != len(names):
            raise StructureError(f"duplicate relation names in {names}")
        for name, arity in self.relations:
            if not isinstance(arity, int) or arity < 1:
                raise StructureError(f"relation {name!r} has invalid arity {arity!r}")
            if arity > ARITY_CAP:
                raise StructureError(f"relation {name!r} exceeds arity cap {ARITY_CAP}")

    @classmethod
    def of(cls, **arities: int) -> "Signature":
        return cls(tuple(sorted(arities.items())))

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.relations]

    def arity(self, name: str) -> int:
        for n, a in self.relations:
            if n == name:
                return a
        raise KeyError(name)


EMPTY_SIGNATURE = Signature()


@dataclass(frozen=True)
class FinStructure:
    signature: Signature
    size: int
    tables: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        tables = {}
        for name, arity in self.signature.relations:
            rows = frozenset(tuple(r) for r in self.tables.get(name, ()))
            for row in rows:
                if len(row) != arity:
                    raise StructureError(f"{name}{row}: expected arity {arity}")
                if any(not (0 <= x < self.size) for x in row):
                    raise StructureError(f"{name}{row}: entry outside universe of size {self.size}")
            tables[name] = rows
        extra = set(self.tables) - set(tables)
        if extra:
            raise StructureError(f"tables for undeclared relations: {sorted(extra)}")
        object.__setattr__(self, "tables", _FrozenDict(tables))

    @property
    def universe(self) -> range:
        return range(self.size)

    def holds(self, name: str, row: Sequence[int]) -> bool:
        return tuple(row) in self.tables[name]

    def key(self) -> tuple:
        """Canonical hashable encoding (labelled, not up to isomorphism)."""
        return (
            self.signature.relations,
            self.size,
            tuple((n, tuple(sorted(self.tables[n]))) for n in self.signature.names),
        )

    def __hash__(self):
        return hash(self.key())

    def __eq__(self, other):
        return isinstance(other, FinStructure) and self.key() == other.key()

    def __repr__(self):
        rels = ", ".join(f"{n}:{len(self.tables[n])}" for n in self.signature.names)
        return f"FinStructure(size={self.size}, {rels})"

    def relabel(self, perm: Sequence[int]) -> "FinStructure":
        """Image of the structure under the bijection ``i -> perm[i]``."""
        return FinStructure(
            self.signature,
            self.size,
            {n: frozenset(tuple(perm[x] for x in r) for r in rows) for n, rows in self.tables.items()},
        )

    def add_point(self, rows: Mapping[str, Iterable[Sequence[int]]] = ()) -> "FinStructure":
        """Append one element (numbered ``size``) together with extra tuples."""
        rows = dict(rows)
        tables = {n: set(self.tables[n]) | {tuple(r) for r in rows.get(n, ())} for n in self.signature.names}
        return FinStructure(self.signature, self.size + 1, tables)

    # -- serialization -------------------------------------------------

    def to_json(self) -> dict:
        return {
            "signature": [{"name": n, "arity": a} for n, a in self.signature.relations],
            "size": self.size,
            "tables": {n: [list(r) for r in sorted(self.tables[n])] for n in self.signature.names},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FinStructure":
        try:
            sig = Signature(tuple((r["name"], int(r["arity"])) for r in doc["signature"]))
            return cls(sig, int(doc["size"]), {k: frozenset(tuple(r) for r in v) for k, v in doc["tables"].items()})
        except (KeyError, TypeError) as exc:
            raise StructureError(f"malformed structure document: {exc!r}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


class _FrozenDict(dict):
    def __hash__(self):
        return hash(tuple(sorted(self.items())))

    def _ro(self, *a, **k):
        raise TypeError("structure tables are immutable")

    __setitem__ = __delitem__ = update = pop = popitem = clear = setdefault = _ro


def empty_structure(signature: Signature = EMPTY_SIGNATURE, size: int = 0) -> FinStructure:
    return FinStructure(signature, size, {})


# -- catalog constructors ----------------------------------------------

GRAPH_SIG = Signature.of(E=2)
ORDER_SIG = Signature.of(lt=2)


def graph(n: int, edges: Iterable[tuple[int, int]]) -> FinStructure:
    rows = set()
    for a, b in edges:
        rows.add((a, b))
        rows.add((b, a))
    return FinStructure(GRAPH_SIG, n, {"E": frozenset(rows)})


def cycle_graph(n: int) -> FinStructure:
    return graph(n, [(i, (i + 1) % n) for i in range(n)])


def linear_order(n: int) -> FinStructure:
    return FinStructure(ORDER_SIG, n, {"lt": frozenset((i, j) for i in range(n) for j in range(n) if i < j)})


def paired_equivalence(n_pairs: int) -> FinStructure:
    """E2(2k): classes {0,1}, {2,3}, ...; ``E`` holds between distinct class-mates."""
    edges = [(2 * i, 2 * i + 1) for i in range(n_pairs)]
    return graph(2 * n_pairs, edges)


# -- maps and types --------------------------------------------------------


def _check_same_signature(A: FinStructure, B: FinStructure):
    if A.signature != B.signature:
        raise SignatureMismatch(f"{A.signature.relations} vs {B.signature.relations}")


def is_embedding(f: Mapping[int, int], A: FinStructure, B: FinStructure) -> bool:
    """True iff ``f`` is injective and preserves and reflects every relation."""
    _check_same_signature(A, B)
    if set(f) != set(A.universe):
        raise StructureError("map must be total on the source universe")
    if len(set(f.values())) != len(f) or any(not (0 <= y < B.size) for y in f.values()):
        return False
    for name, arity in A.signature.relations:
        src = A.tables[name]
        dst = B.tables[name]
        for row in itertools.product(A.universe, repeat=arity):
            if (row in src) != (tuple(f[x] for x in row) in dst):
                return False
    return True


def is_partial_isomorphism(M: FinStructure, f: Mapping[int, int]) -> bool:
    """True iff ``f`` (a partial map of M into itself) preserves qf-types."""
    dom = list(f)
    if len(set(f.values())) != len(dom):
        return False
    return qf_type(M, dom) == qf_type(M, [f[x] for x in dom])


def induced_substructure(B: FinStructure, S: Iterable[int]) -> tuple[FinStructure, dict[int, int]]:
    """Restriction of B to S, re-indexed in increasing order.

    Returns the substructure and the map old element -> new element.
    """
    elems = sorted(set(S))
    if any(not (0 <= x < B.size) for x in elems):
        raise StructureError("subset not contained in the universe")
    index = {x: i for i, x in enumerate(elems)}
    tables = {}
    for name in B.signature.names:
        tables[name] = frozenset(
            tuple(index[x] for x in row) for row in B.tables[name] if all(x in index for x in row)
        )
    return FinStructure(B.signature, len(elems), tables), index


@dataclass(frozen=True)
class QfType:
    arity: int
    pattern: tuple[int, ...]
    atoms: frozenset

    def __repr__(self):
        return f"QfType(arity={self.arity}, pattern={self.pattern}, atoms={sorted(self.atoms)})"


def equality_pattern(tup: Sequence) -> tuple[int, ...]:
    first: dict = {}
    return tuple(first.setdefault(x, i) for i, x in enumerate(tup))


def qf_type(A: FinStructure, tup: Sequence[int]) -> QfType:
    """Atomic diagram of ``tup`` over positions, with its equality pattern.

    Index tuples are normalised to first-occurrence positions so the atom set
    is closed under the equality pattern.
    """
    tup = tuple(tup)
    pattern = equality_pattern(tup)
    reps = sorted(set(pattern))
    atoms = set()
    for name, arity in A.signature.relations:
        table = A.tables[name]
        if len(table) == 0:
            continue
        for idx in itertools.product(reps, repeat=arity):
            if tuple(tup[i] for i in idx) in table:
                atoms.add((name, idx))
    return QfType(len(tup), pattern, frozenset(atoms))


def point_type_over(A: FinStructure, base: Sequence[int], x: int) -> QfType:
    """qf-type of ``base + (x,)``: the one-point type of x over an enumerated base."""
    return qf_type(A, tuple(base) + (x,))


# -- orbit structures -------------------------------------------------------


def _orbit_relation_name(rep: tuple[int, ...]) -> str:
    return "R_" + "_".join(map(str, rep))


def structure_from_action(P, arity_cap: int = 2) -> FinStructure:
    """Canonical orbit structure of a permutation group.

    One relation per orbit of tuples of length 1..arity_cap, named by the
    lexicographically least tuple in the orbit.
    """
    from .groups import tuple_orbits

    if arity_cap < 1:
        raise StructureError("arity_cap must be >= 1")
    if arity_cap > ARITY_CAP:
        raise StructureError(f"arity_cap {arity_cap} exceeds global cap {ARITY_CAP}")
    relations = []
    tables = {}
    for k in range(1, arity_cap + 1):
        for orbit in tuple_orbits(P, k):
            rep = min(orbit)
            name = _orbit_relation_name(rep)
            relations.append((name, k))
            tables[name] = frozenset(orbit)
    return FinStructure(Signature(tuple(relations)), P.degree, tables)


def ultrahomogenize(M: FinStructure, arity_cap: int = 2) -> FinStructure:
    """Expand M by its automorphism-orbit relations on tuples up to ``arity_cap``."""
    from .groups import automorphism_group

    if arity_cap < 1 or arity_cap > ARITY_CAP:
        raise StructureError(f"arity_cap must lie in 1..{ARITY_CAP}")
    orbit = structure_from_action(automorphism_group(M), arity_cap)
    taken = set(M.signature.names)
    relations = list(M.signature.relations)
    tables = dict(M.tables)
    for name, arity in orbit.signature.relations:
        new = name
        while new in taken:
            new = "_" + new
        taken.add(new)
        relations.append((new, arity))
        tables[new] = orbit.tables[name]
    return FinStructure(Signature(tuple(relations)), M.size, tables)
