"""Fraïssé classes: membership, ages, amalgamation and finite limit approximations."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .structures import (
    EMPTY_SIGNATURE,
    GRAPH_SIG,
    ORDER_SIG,
    FinStructure,
    Signature,
    SignatureMismatch,
    StructureError,
    empty_structure,
    induced_substructure,
    is_embedding,
)
from .groups import _refine

BUILTINS = ("graphs", "linear_orders", "pairs", "sets")
EXT_BITS_CAP = 20


class RequirementStarved(RuntimeError):
    def __init__(self, unmet: int, build: "LimitBuild"):
        super().__init__(f"element budget exhausted with {unmet} unmet extension requirements")
        self.unmet = unmet
        self.build = build


@dataclass(frozen=True)
class FraisseClassSpec:
    kind: str
    name: str = ""
    configs: tuple[FinStructure, ...] = ()
    reference: FinStructure | None = None
    strong_sub: str = "induced"

    def __post_init__(self):
        if self.kind not in ("builtin", "forbidden", "age"):
            raise StructureError(f"unknown class kind {self.kind!r}")
        if self.kind == "builtin" and self.name not in BUILTINS:
            raise StructureError(f"unknown builtin class {self.name!r}")
        if self.kind == "age" and self.reference is None:
            raise StructureError("age_of class needs a reference structure")
        if self.strong_sub != "induced":
            raise StructureError("only induced strong substructure is supported")

    @classmethod
    def builtin(cls, name: str) -> "FraisseClassSpec":
        return cls("builtin", name)

    @classmethod
    def forbidden(cls, configs: Iterable[FinStructure]) -> "FraisseClassSpec":
        configs = tuple(configs)
        if len({c.signature for c in configs}) > 1:
            raise SignatureMismatch("forbidden configurations must share a signature")
        return cls("forbidden", "forbidden", configs)

    @classmethod
    def age_of(cls, M: FinStructure) -> "FraisseClassSpec":
        return cls("age", "age", reference=M)

    @property
    def signature(self) -> Signature:
        if self.kind == "builtin":
            return {"graphs": GRAPH_SIG, "pairs": GRAPH_SIG, "linear_orders": ORDER_SIG, "sets": EMPTY_SIGNATURE}[self.name]
        if self.kind == "forbidden":
            return self.configs[0].signature if self.configs else EMPTY_SIGNATURE
        return self.reference.signature

    @property
    def label(self) -> str:
        return self.name if self.kind == "builtin" else self.kind

    def to_json(self) -> dict:
        if self.kind == "builtin":
            return {"kind": "builtin", "name": self.name}
        if self.kind == "forbidden":
            return {"kind": "forbidden", "configs": [c.to_json() for c in self.configs]}
        return {"kind": "age", "reference": self.reference.to_json()}

    @classmethod
    def from_json(cls, doc: dict) -> "FraisseClassSpec":
        kind = doc.get("kind")
        if kind == "builtin":
            return cls.builtin(doc["name"])
        if kind == "forbidden":
            return cls.forbidden(FinStructure.from_json(c) for c in doc["configs"])
        if kind == "age":
            return cls.age_of(FinStructure.from_json(doc["reference"]))
        raise StructureError(f"unknown class kind {kind!r}")


# -- membership ---------------------------------------------------------------------


def _symmetric_irreflexive(rows) -> bool:
    return all(a != b and (b, a) in rows for a, b in rows)


def _builtin_member(name: str, A: FinStructure) -> bool:
    if name == "sets":
        return True
    if name == "graphs":
        return _symmetric_irreflexive(A.tables["E"])
    if name == "pairs":
        rows = A.tables["E"]
        if not _symmetric_irreflexive(rows):
            return False
        deg = [0] * A.size
        for a, _ in rows:
            deg[a] += 1
        return all(d <= 1 for d in deg)
    if name == "linear_orders":
        rows = A.tables["lt"]
        n = A.size
        for a in range(n):
            if (a, a) in rows:
                return False
            for b in range(a + 1, n):
                if ((a, b) in rows) == ((b, a) in rows):
                    return False
        return all((a, c) in rows for a, b in rows for b2, c in rows if b == b2)
    raise StructureError(name)


def embeddings(A: FinStructure, B: FinStructure) -> Iterator[dict[int, int]]:
    """All embeddings A -> B, by backtracking."""
    if A.signature != B.signature:
        raise SignatureMismatch("signature mismatch")
    n = A.size
    f: dict[int, int] = {}
    used: set[int] = set()
    rels = [(nm, ar) for nm, ar in A.signature.relations]

    def ok(x):
        dom = list(f)
        for nm, ar in rels:
            ta, tb = A.tables[nm], B.tables[nm]
            for row in itertools.product(dom, repeat=ar):
                if x not in row:
                    continue
                if (row in ta) != (tuple(f[z] for z in row) in tb):
                    return False
        return True

    def rec(i):
        if i == n:
            yield dict(f)
            return
        for y in range(B.size):
            if y in used:
                continue
            f[i] = y
            if ok(i):
                used.add(y)
                yield from rec(i + 1)
                used.discard(y)
            del f[i]

    yield from rec(0)


def embeds(A: FinStructure, B: FinStructure) -> bool:
    return next(embeddings(A, B), None) is not None


def in_class(spec: FraisseClassSpec, A: FinStructure) -> bool:
    if A.signature != spec.signature:
        raise SignatureMismatch(f"class signature {spec.signature.relations} vs {A.signature.relations}")
    if A.size == 0:
        return True
    if spec.kind == "builtin":
        return _builtin_member(spec.name, A)
    if spec.kind == "forbidden":
        return not any(embeds(F, A) for F in spec.configs)
    return embeds(A, spec.reference)


# -- canonical forms ----------------------------------------------------------------------


def canonical_code(A: FinStructure) -> tuple:
    """Isomorphism-invariant code: least relabelled encoding over colour-respecting orders."""
    n = A.size
    if n == 0:
        return (A.signature.relations, 0, ())
    colors = _refine(A, [0] * n)
    blocks = [sorted(v for v in range(n) if colors[v] == c) for c in sorted(set(colors))]
    best = None
    for choice in itertools.product(*(itertools.permutations(b) for b in blocks)):
        order = [v for blk in choice for v in blk]
        perm = [0] * n
        for pos, v in enumerate(order):
            perm[v] = pos
        code = A.relabel(perm).key()
        if best is None or code < best:
            best = code
    return best


def is_isomorphic(A: FinStructure, B: FinStructure) -> bool:
    return A.size == B.size and canonical_code(A) == canonical_code(B)


# -- one-point extensions ------------------------------------------------------------------


def _new_tuples(sig: Signature, n: int) -> list[tuple[str, tuple[int, ...]]]:
    """Tuples over range(n+1) mentioning the new point n."""
    out = []
    for name, arity in sig.relations:
        for row in itertools.product(range(n + 1), repeat=arity):
            if n in row:
                out.append((name, row))
    return out


def one_point_extensions(spec: FraisseClassSpec, A: FinStructure) -> list[FinStructure]:
    """Class members on ``A.size + 1`` points restricting to A on ``range(A.size)``."""
    return list(_one_point_extensions(spec, A))


@lru_cache(maxsize=None)
def _one_point_extensions(spec: FraisseClassSpec, A: FinStructure) -> tuple[FinStructure, ...]:
    cands = _new_tuples(A.signature, A.size)
    if len(cands) > EXT_BITS_CAP:
        raise StructureError(f"{len(cands)} free atoms exceed the extension enumeration cap")
    out = []
    for bits in range(1 << len(cands)):
        extra: dict[str, set] = {nm: set() for nm in A.signature.names}
        for i, (nm, row) in enumerate(cands):
            if bits >> i & 1:
                extra[nm].add(row)
        B = A.add_point(extra)
        if in_class(spec, B):
            out.append(B)
    return tuple(out)


def members(spec: FraisseClassSpec, n: int) -> list[FinStructure]:
    """Class members of size n up to isomorphism (hereditary classes), canonically ordered."""
    level = {canonical_code(empty_structure(spec.signature)): empty_structure(spec.signature)}
    for _ in range(n):
        nxt = {}
        for A in level.values():
            for B in one_point_extensions(spec, A):
                nxt.setdefault(canonical_code(B), B)
        level = nxt
    return [level[k] for k in sorted(level)]


# -- types of points over finite sets (inside a fixed structure) ---------------------------------

PLACEHOLDER = -1


def type_key(M: FinStructure, base: Iterable[int], x: int) -> frozenset:
    """Atoms of M on base + {x} that mention x, with x written as PLACEHOLDER."""
    base = frozenset(base) | {x}
    out = set()
    for name in M.signature.names:
        for row in M.tables[name]:
            if x in row and all(e in base for e in row):
                out.add((name, tuple(PLACEHOLDER if e == x else e for e in row)))
    return frozenset(out)


def realizations(M: FinStructure, base: Iterable[int], key: frozenset) -> list[int]:
    base = frozenset(base)
    return [x for x in M.universe if x not in base and type_key(M, base, x) == key]


def extension_types(spec: FraisseClassSpec, M: FinStructure, base: Sequence[int]) -> list[tuple[frozenset, FinStructure]]:
    """One-point extension types over ``base`` admitted by the class, with their local structures."""
    base = sorted(base)
    sub, index = induced_substructure(M, base)
    inv = {i: x for x, i in index.items()}
    out = []
    for B in one_point_extensions(spec, sub):
        key = set()
        for name in B.signature.names:
            for row in B.tables[name]:
                if sub.size in row:
                    key.add((name, tuple(PLACEHOLDER if e == sub.size else inv[e] for e in row)))
        out.append((frozenset(key), B))
    return out


def realize(spec: FraisseClassSpec, M: FinStructure, base: Iterable[int], key: frozenset) -> FinStructure | None:
    """Extend M by one point of type ``key`` over ``base``, or None if no strategy is admissible.

    Strategies, in order: the free extension (no atoms beyond the type), then
    a twin of an existing element y copying y's atoms outside base.
    """
    base = frozenset(base)
    x = M.size
    own = {nm: set() for nm in M.signature.names}
    for nm, row in key:
        own[nm].add(tuple(x if e == PLACEHOLDER else e for e in row))
    cand = M.add_point(own)
    if in_class(spec, cand):
        return cand
    for y in M.universe:
        if y in base:
            continue
        twin = {nm: set(rows) for nm, rows in own.items()}
        for nm in M.signature.names:
            for row in M.tables[nm]:
                if y in row and not any(e in base for e in row):
                    new = tuple(x if e == y else e for e in row)
                    twin[nm].add(new)
        pair_rows = [
            (nm, row)
            for nm, ar in M.signature.relations
            for row in itertools.product((x, y), repeat=ar)
            if x in row and y in row
        ]
        for bits in range(1 << len(pair_rows)):
            rows = {nm: set(r) for nm, r in twin.items()}
            for i, (nm, row) in enumerate(pair_rows):
                if bits >> i & 1:
                    rows[nm].add(row)
            # the twin's own rows over {x, y} are replaced by the chosen pattern
            for nm in rows:
                rows[nm] = {r for r in rows[nm] if not (set(r) <= {x, y} and x in r and y in r)} | {
                    r for j, (n2, r) in enumerate(pair_rows) if n2 == nm and bits >> j & 1
                }
            cand = M.add_point(rows)
            if in_class(spec, cand) and type_key(cand, base, x) == key:
                return cand
    return None


# -- amalgamation --------------------------------------------------------------------


@dataclass
class AmalgamVerdict:
    status: str  # holds_up_to | counterexample | amalgam
    bound: int | None = None
    A: FinStructure | None = None
    B: FinStructure | None = None
    C: FinStructure | None = None
    f: dict | None = None
    g: dict | None = None
    D: FinStructure | None = None
    embed_B: dict | None = None
    embed_C: dict | None = None
    slack: int = 0
    flavor: str = "plain"
    checked: int = 0

    @property
    def ok(self) -> bool:
        return self.status != "counterexample"

    def to_json(self) -> dict:
        doc = {"status": self.status, "flavor": self.flavor, "slack": self.slack, "checked": self.checked}
        if self.bound is not None:
            doc["bound"] = self.bound
        for k in ("A", "B", "C", "D"):
            v = getattr(self, k)
            if v is not None:
                doc[k] = v.to_json()
        for k in ("f", "g", "embed_B", "embed_C"):
            v = getattr(self, k)
            if v is not None:
                doc[k] = [[a, b] for a, b in sorted(v.items())]
        return doc


def _amalgam_candidates(A, B, C, f, g, flavor, slack):
    """Yield (D_size, h, fixed_rows, free_rows) for every identification pattern."""
    gA = {g[a] for a in A.universe}
    c_rest = [c for c in C.universe if c not in gA]
    b_rest = [b for b in B.universe if b not in set(f.values())]
    options = [None] + (b_rest if flavor == "plain" else [])
    patterns = []
    for choice in itertools.product(options, repeat=len(c_rest)):
        ident = [b for b in choice if b is not None]
        if len(set(ident)) != len(ident):
            continue
        patterns.append(choice)
    patterns.sort(key=lambda ch: sum(b is not None for b in ch))
    for choice in patterns:
        h = {g[a]: f[a] for a in A.universe}
        nxt = B.size
        for c, b in zip(c_rest, choice):
            if b is None:
                h[c] = nxt
                nxt += 1
            else:
                h[c] = b
        size = nxt + slack
        yield size, h


def _subsets_by_size(n: int, cap: int | None = None):
    """Index subsets of range(n), smallest first (lazily)."""
    top = n if cap is None else min(n, cap)
    for k in range(top + 1):
        yield from itertools.combinations(range(n), k)


def _try_amalgam(spec, B, C, h, size):
    sig = B.signature
    fixed = {nm: set(B.tables[nm]) for nm in sig.names}
    img_C = set(h.values())
    inv_h = {v: k for k, v in h.items()}
    for nm, ar in sig.relations:
        for row in itertools.product(sorted(img_C), repeat=ar):
            in_c = tuple(inv_h[e] for e in row) in C.tables[nm]
            if all(e < B.size for e in row):
                if (row in B.tables[nm]) != in_c:
                    return None
            elif in_c:
                fixed[nm].add(row)
    Bset = set(range(B.size))
    free = []
    for nm, ar in sig.relations:
        for row in itertools.product(range(size), repeat=ar):
            if set(row) <= Bset or set(row) <= img_C:
                continue
            free.append((nm, row))
    for chosen in _subsets_by_size(len(free), None if len(free) <= EXT_BITS_CAP else 0):
        rows = {nm: set(r) for nm, r in fixed.items()}
        for i in chosen:
            nm, row = free[i]
            rows[nm].add(row)
        D = FinStructure(sig, size, rows)
        if in_class(spec, D):
            return D
    return None


def amalgamate(
    spec: FraisseClassSpec,
    A: FinStructure,
    B: FinStructure,
    C: FinStructure,
    f: Mapping[int, int],
    g: Mapping[int, int],
    flavor: str = "plain",
    slack: int = 0,
    candidates=None,
) -> AmalgamVerdict:
    """Search an amalgam D of B and C over A (B embeds identically into D)."""
    if flavor not in ("plain", "disjoint"):
        raise ValueError(f"unknown flavor {flavor!r}")
    if not (is_embedding(dict(f), A, B) and is_embedding(dict(g), A, C)):
        raise StructureError("amalgamation inputs must come with valid embeddings")
    n = 0
    for size, h in (candidates or _amalgam_candidates)(A, B, C, f, g, flavor, slack):
        n += 1
        D = _try_amalgam(spec, B, C, h, size)
        if D is not None:
            return AmalgamVerdict(
                "amalgam", None, A, B, C, dict(f), dict(g), D, {b: b for b in B.universe}, h, slack, flavor, n
            )
    return AmalgamVerdict("counterexample", None, A, B, C, dict(f), dict(g), slack=slack, flavor=flavor, checked=n)


def _image_sets(A, B):
    """One embedding A -> B per image set."""
    seen = {}
    for e in embeddings(A, B):
        key = frozenset(e.values())
        seen.setdefault(key, e)
    return [seen[k] for k in sorted(seen, key=sorted)]


def has_amalgamation(spec: FraisseClassSpec, size_bound: int, flavor: str = "plain", slack: int = 0) -> AmalgamVerdict:
    """Exhaust triples A <= B, A <= C with |B|, |C| <= size_bound; first failure wins."""
    by_size = [members(spec, k) for k in range(size_bound + 1)]
    checked = 0
    for nb in range(size_bound + 1):
        for nc in range(nb, size_bound + 1):
            for B in by_size[nb]:
                for C in by_size[nc]:
                    for na in range(min(nb, nc) + 1):
                        for A in by_size[na]:
                            fs = _image_sets(A, B)
                            if not fs:
                                continue
                            gs = list(embeddings(A, C))
                            for f in fs:
                                for g in gs:
                                    checked += 1
                                    v = amalgamate(spec, A, B, C, f, g, flavor, slack)
                                    if v.status == "counterexample":
                                        v.bound = size_bound
                                        v.checked = checked
                                        return v
    return AmalgamVerdict("holds_up_to", size_bound, slack=slack, flavor=flavor, checked=checked)


# -- ages -----------------------------------------------------------------------------------


def age(M: FinStructure, size_bound: int) -> list[FinStructure]:
    """Induced substructures of M up to size_bound, one per isomorphism class."""
    found = {}
    for k in range(min(size_bound, M.size) + 1):
        for S in itertools.combinations(M.universe, k):
            sub, _ = induced_substructure(M, S)
            found.setdefault((k, canonical_code(sub)), sub)
    return [found[key] for key in sorted(found)]


# -- limit approximations ------------------------------------------------------------------


@dataclass
class LimitBuild:
    structure: FinStructure
    core: list[int]
    stages: int
    unmet: int
    depth: int
    seed: int
    spec: FraisseClassSpec = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {
            "structure": self.structure.to_json(),
            "core": self.core,
            "stages": self.stages,
            "unmet": self.unmet,
            "depth": self.depth,
            "seed": self.seed,
        }


def _stage_requirements(spec, M, k, depth, rng):
    """Requirements over subsets of range(k) that contain k - 1 (stage 0: the empty set)."""
    reqs = []
    for size in range(min(depth, k) + 1):
        for A in itertools.combinations(range(k), size):
            if k and k - 1 not in A:
                continue
            sub, _ = induced_substructure(M, A)
            code_a = canonical_code(sub)
            for key, local in extension_types(spec, M, A):
                reqs.append(((size, code_a, canonical_code(local)), rng.random(), A, key))
    reqs.sort(key=lambda r: (r[0], r[1]))
    return [(A, key) for _, _, A, key in reqs]


HORIZON = 24


def _restrict(key: frozenset, S) -> frozenset:
    S = frozenset(S)
    return frozenset((nm, row) for nm, row in key if all(e == PLACEHOLDER or e in S for e in row))


class _Coverage:
    """Open one-point requirements over small subsets of a horizon, updated as M grows.

    Witness atoms are chosen one horizon element at a time, each choice
    maximizing the number of open requirements it realizes (the density
    heuristic for covering arrays).  Ties go to the option with fewest atoms,
    so the seed only reorders requirements and the served core comes out the
    same up to isomorphism.  Only binary signatures are handled; otherwise
    the plain strategy of ``realize`` is used.
    """

    def __init__(self, spec, depth: int):
        self.spec, self.depth = spec, depth
        self.open: dict[tuple, set] = {}

    def _track(self, M, S):
        if S not in self.open:
            keys = {k for k, _ in extension_types(self.spec, M, S)}
            self.open[S] = keys - {type_key(M, S, y) for y in M.universe if y not in S}
        return self.open[S]

    def added(self, M, x):
        for S, still in self.open.items():
            if x not in S and still:
                still.discard(type_key(M, S, x))

    def _admissible(self, M, base, t) -> bool:
        sub, index = induced_substructure(M, base)
        x = sub.size
        rows = {nm: set() for nm in M.signature.names}
        for nm, row in t:
            rows[nm].add(tuple(x if e == PLACEHOLDER else index[e] for e in row))
        return in_class(self.spec, sub.add_point(rows))

    def choose(self, M, A, key):
        binary = [nm for nm, ar in M.signature.relations if ar == 2]
        if any(ar > 2 for _, ar in M.signature.relations):
            return A, key
        t, base = set(key), list(A)
        for h in range(min(M.size, HORIZON)):
            if h in A:
                continue
            best, best_score = [], -1
            for bits in range(1 << (2 * len(binary))):
                rows = set()
                for i, nm in enumerate(binary):
                    if bits >> (2 * i) & 1:
                        rows.add((nm, (PLACEHOLDER, h)))
                    if bits >> (2 * i + 1) & 1:
                        rows.add((nm, (h, PLACEHOLDER)))
                cand = frozenset(t | rows)
                if not self._admissible(M, base + [h], cand):
                    continue
                score = 0
                for size in range(min(self.depth - 1, len(base)) + 1):
                    for rest in itertools.combinations(sorted(base), size):
                        S = tuple(sorted(rest + (h,)))
                        if _restrict(cand, S) in self._track(M, S):
                            score += 1
                if score > best_score:
                    best, best_score = [rows], score
                elif score == best_score:
                    best.append(rows)
            if not best:
                return A, key
            t |= best[0]
            base.append(h)
        return tuple(sorted(base)), frozenset(t)


def build_limit(
    spec: FraisseClassSpec,
    n_elements: int,
    ext_depth: int,
    seed: int = 0,
    strict: bool = False,
) -> LimitBuild:
    """Finite approximation of the limit, built by a prefix round-robin.

    Stage k serves every one-point extension requirement over a subset A of
    the prefix ``range(k)`` with ``k - 1`` in A and ``|A| <= ext_depth``,
    in order (|A|, code of A, code of B) with seeded tie-breaks.  Each
    unrealized requirement appends one element, whose atoms towards a small
    horizon beyond A are chosen greedily to realize as many other open
    requirements as possible (the density heuristic for covering arrays).  The core is the longest
    prefix whose stage finished; every requirement over a core subset is
    realized.  With ``strict`` an unfinished stage raises RequirementStarved.
    """
    rng = random.Random(seed)
    M = empty_structure(spec.signature)
    cover = _Coverage(spec, ext_depth)
    k = 0
    unmet = 0
    while n_elements > 0 and M.size >= k:
        unmet = 0
        for A, key in _stage_requirements(spec, M, k, ext_depth, rng):
            if realizations(M, A, key):
                continue
            nxt = None
            if M.size < n_elements:
                H, t = cover.choose(M, A, key)
                nxt = realize(spec, M, H, t) if H != A else None
                if nxt is None:
                    nxt = realize(spec, M, A, key)
            if nxt is None:
                unmet += 1
                continue
            M = nxt
            cover.added(M, M.size - 1)
        if unmet:
            break
        k += 1
        if k > n_elements:
            break
    # stages 0..k-1 finished, so every requirement over range(k - 1) is met
    core = list(range(min(max(k - 1, 0), M.size)))
    while M.size < n_elements:
        types = extension_types(spec, M, [])
        nxt = realize(spec, M, [], types[0][0]) if types else None
        if nxt is None:
            break
        M = nxt
    build = LimitBuild(M, core, k, unmet, ext_depth, seed, spec)
    if strict and unmet:
        raise RequirementStarved(unmet, build)
    return build


@dataclass
class LimitReport:
    depth: int
    clause1_rate: float
    clause2_rate: float
    clause3_rate: float
    clause2_missing: int
    clause2_total: int
    clause3_total: int
    within: list[int] | None = None

    def to_json(self) -> dict:
        return dict(self.__dict__)


def extension_rate(spec, M: FinStructure, depth: int, within: Iterable[int] | None = None) -> tuple[int, int]:
    """(realized, total) one-point extension requirements over subsets of ``within``."""
    pool = sorted(within) if within is not None else list(M.universe)
    total = hit = 0
    for k in range(min(depth, len(pool)) + 1):
        for A in itertools.combinations(pool, k):
            for key, _ in extension_types(spec, M, A):
                total += 1
                if realizations(M, A, key):
                    hit += 1
    return hit, total


def check_limit_properties(M: FinStructure, spec: FraisseClassSpec, depth: int, within: Iterable[int] | None = None) -> LimitReport:
    from .groups import automorphism_group

    pool = sorted(within) if within is not None else list(M.universe)
    if M.size == 0:
        # nothing to check on an empty approximation
        return LimitReport(depth, 1.0, 1.0, 1.0, 0, 0, 0, [] if within is not None else None)
    c1_total = c1_hit = 0
    for k in range(min(depth, len(pool)) + 1):
        for S in itertools.combinations(pool, k):
            c1_total += 1
            c1_hit += in_class(spec, induced_substructure(M, S)[0])
    hit, total = extension_rate(spec, M, depth, pool)
    c3_total = c3_hit = 0
    if depth >= 1 and M.size:
        G = automorphism_group(M)
        for k in range(min(depth - 1, len(pool)) + 1):
            for A in itertools.combinations(pool, k):
                stab = G.pointwise_stabilizer(A)
                rest = [x for x in pool if x not in A]
                for b, b2 in itertools.combinations(rest, 2):
                    if type_key(M, A, b) != type_key(M, A, b2):
                        continue
                    c3_total += 1
                    c3_hit += b2 in stab.orbit(b)
    rate = lambda h, t: 1.0 if t == 0 else h / t
    return LimitReport(
        depth,
        rate(c1_hit, c1_total),
        rate(hit, total),
        rate(c3_hit, c3_total),
        total - hit,
        total,
        c3_total,
        list(pool) if within is not None else None,
    )
