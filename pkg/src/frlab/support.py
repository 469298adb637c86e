"""Support functions, the permutation decomposition, and token-scale reductions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .closure import all_subsets
from .rank import krk
from .verdict import BudgetExhausted, Verdict, fails, holds, unresolved

Token = Hashable


class DomainTooSmall(ValueError):
    pass


class WindowMismatch(ValueError):
    pass


# -- support functions -----------------------------------------------------------------


class SupportFunction:
    def __init__(self, name: str, carrier, rule: Callable[[object, frozenset], Iterable[int]], grow=None):
        self.name = name
        self.carrier = carrier
        self.rule = rule
        # optional hook grow(supp, inst, target) -> bool used by axiom (3) on extendable carriers
        self.grow = grow

    def __call__(self, A: Iterable[int]) -> frozenset:
        return frozenset(self.rule(self.carrier, frozenset(A)))

    def on(self, carrier) -> "SupportFunction":
        return SupportFunction(self.name, carrier, self.rule, self.grow)

    def __repr__(self):
        return f"SupportFunction({self.name})"


def constant_empty(inst) -> SupportFunction:
    return SupportFunction("constant-empty", inst, lambda _i, _A: ())


def constant_zero(inst) -> SupportFunction:
    """{0} on every nonempty set."""
    return SupportFunction("constant-zero", inst, lambda _i, A: (0,) if A else ())


def class_index(M, relation: str = "E") -> dict[int, int]:
    """Ordinal of each element's class (itself plus partners), classes ordered by least member.

    Indices are stable under growth: new classes start at new, larger elements.
    """
    rows = M.tables[relation]
    least = {x: x for x in M.universe}
    for x, y in rows:
        least[x] = min(least[x], y)
        least[y] = min(least[y], x)
    reps = sorted(set(least.values()))
    pos = {r: i for i, r in enumerate(reps)}
    return {x: pos[least[x]] for x in M.universe}


def pair_index(inst, relation: str = "E") -> SupportFunction:
    def rule(i, A):
        idx = class_index(i.structure, relation)
        return {idx[a] for a in A}

    return SupportFunction("pair-index", inst, rule, _grow_partner)


def from_table(inst, table: Mapping, name: str = "table") -> SupportFunction:
    frozen = {frozenset(k): frozenset(v) for k, v in table.items()}
    return SupportFunction(name, inst, lambda _i, A: frozen[A])


# -- axioms ---------------------------------------------------------------------------


def _pairs_sample(inst, set_size: int):
    for B in all_subsets(inst.universe, set_size):
        for A in all_subsets(sorted(B)):
            yield A, B


def _index_window(supp: SupportFunction) -> list[int]:
    seen = set()
    for x in supp.carrier.universe:
        seen |= supp({x})
    return sorted(seen)


def _find_support_copy(supp, inst, A, B, target) -> frozenset | None:
    """B' congruent to B over A with supp(B') = target, drawn from elements whose support lies in target."""
    pool = [x for x in inst.universe if x not in A and supp({x}) <= target]
    k = len(B - A)
    for extra in itertools.combinations(pool, k):
        cand = A | frozenset(extra)
        if supp(cand) == target and inst.set_congruent(B, cand, A) is not None:
            return cand
    return None


def _grow_partner(supp, inst, target, rel: str = "E") -> bool:
    """Make progress towards classes with the target indices: open a new class, or partner a singleton."""
    from .fraisse import PLACEHOLDER

    idx_of = {x: min(supp({x})) for x in inst.universe if supp({x})}
    present = set(idx_of.values())
    if any(i not in present for i in target):
        return inst.realize_key(frozenset(), frozenset()) is not None
    partnered = {x for x, _ in inst.structure.tables[rel]}
    for x in sorted(idx_of):
        if idx_of[x] in target and x not in partnered:
            key = frozenset({(rel, (x, PLACEHOLDER)), (rel, (PLACEHOLDER, x))})
            if inst.realize_key(frozenset([x]), key) is not None:
                return True
    return False


def check_support_axioms(supp: SupportFunction, which: int, set_size: int = 3, budget: int = 24) -> Verdict:
    """Axiom (1) monotone, (2) nontrivial, (3) indiscernible, on the bounded window.

    Axiom (3) ranges over v' containing u with |v' - u| = |v - u| inside the
    window made of the indices carried by current elements plus set_size
    fresh ones.  Witnesses are searched
    in the current approximation, growing extendable carriers up to budget.
    """
    inst = supp.carrier
    if which == 1:
        n = 0
        for A, B in _pairs_sample(inst, set_size):
            n += 1
            if not supp(A) <= supp(B):
                return fails({"axiom": 1, "A": A, "B": B, "supp(A)": supp(A), "supp(B)": supp(B)}, n)
        return holds(n, inst.kind == "extendable")
    if which == 2:
        n = 0
        for A in all_subsets(inst.universe, set_size):
            n += 1
            if supp(A):
                return Verdict("holds", {"A": A, "supp(A)": supp(A)}, n)
        return fails({"axiom": 2, "explanation": f"every set of size <= {set_size} has empty support"}, n, bounded=inst.kind == "extendable")
    if which != 3:
        raise ValueError("axiom must be 1, 2 or 3")
    work = inst.fork(growth_budget=budget) if inst.kind == "extendable" else inst
    wsupp = supp.on(work)
    window = _index_window(wsupp)
    top = max(window, default=-1)
    window += list(range(top + 1, top + 1 + set_size))
    samples = list(_pairs_sample(inst, set_size))
    n = 0
    pending = None
    for A, B in samples:
        u, v = wsupp(A), wsupp(B)
        free = [i for i in window if i not in u]
        for extra in itertools.combinations(free, len(v - u)):
            n += 1
            target = u | frozenset(extra)
            found = _find_support_copy(wsupp, work, A, B, target)
            while found is None and work.kind == "extendable" and wsupp.grow is not None:
                try:
                    if not wsupp.grow(wsupp, work, target):
                        break
                except BudgetExhausted:
                    break
                found = _find_support_copy(wsupp, work, A, B, target)
            if found is None:
                wit = {"axiom": 3, "A": A, "B": B, "u": u, "v": v, "v'": target}
                if work.kind == "fixed":
                    return fails(wit, n, "no congruent copy of B over A has support v'")
                if pending is None:
                    pending = wit
    if pending is not None:
        return unresolved(pending, n, "no witness within the growth budget")
    return holds(n, inst.kind == "extendable", set_size=set_size, budget=budget)


def check_support_rank_compat(supp: SupportFunction, inst=None, depth: int = 3, set_size: int = 2) -> dict:
    """For every sampled (a, B) with Krk(a, B) certified finite, compare supp(aB) with supp(B)."""
    inst = inst or supp.carrier
    checked = finite = 0
    violations = []
    for B in all_subsets(inst.universe, set_size):
        for a in inst.universe:
            checked += 1
            if not krk(inst, a, B, depth).is_finite:
                continue
            finite += 1
            if supp(B | {a}) != supp(B):
                violations.append({"a": a, "B": sorted(B), "supp(aB)": sorted(supp(B | {a})), "supp(B)": sorted(supp(B))})
    return {"checked": checked, "finite_rank": finite, "violations": violations, "ok": not violations}


# -- permutation decomposition -----------------------------------------------------------------


def decompose_permutation(pi: Sequence[int], u: Iterable[int], v: Iterable[int], W: Iterable[int]):
    """Write pi = pi2 . pi1 . pi0 with pi0 = pi2 = sigma fixing v and pi1 fixing u.

    sigma is the involution pairing sorted(u - v) with the least points of T
    outside W.  pi must fix u & v pointwise, and W must contain the support
    of pi together with u and v.
    """
    pi = tuple(pi)
    n = len(pi)
    u, v, W = frozenset(u), frozenset(v), frozenset(W)
    moved = {a for a in range(n) if pi[a] != a}
    if not (moved | u | v) <= W:
        raise ValueError("W must contain the support of pi, u and v")
    if any(pi[a] != a for a in u & v):
        raise ValueError("pi must fix u & v pointwise")
    uv = sorted(u - v)
    outside = [t for t in range(n) if t not in W]
    if len(outside) < len(uv):
        raise DomainTooSmall(f"need {len(uv)} points outside W, T has {len(outside)}")
    sigma = list(range(n))
    for x, y in zip(uv, outside):
        sigma[x], sigma[y] = y, x
    sigma = tuple(sigma)
    moved_uv = {sigma[x] for x in uv}
    uv_set = set(uv)

    def p1(a):
        if a in moved_uv:
            img = pi[sigma[a]]
            return sigma[img] if img in uv_set else img
        if a not in uv_set and pi[a] in uv_set:
            return sigma[pi[a]]
        if a in u:
            return a
        return pi[a]

    pi1 = tuple(p1(a) for a in range(n))
    if sorted(pi1) != list(range(n)):
        raise AssertionError("case formula did not produce a permutation")
    recomposed = tuple(sigma[pi1[sigma[a]]] for a in range(n))
    if recomposed != pi:
        raise AssertionError("decomposition identity failed")
    return sigma, pi1, sigma


def in_setwise_stabilizer(p: Sequence[int], S: Iterable[int]) -> bool:
    S = frozenset(S)
    return frozenset(p[s] for s in S) == S


# -- token sequences and =+ --------------------------------------------------------------


@dataclass(frozen=True)
class TokenSeq:
    support: tuple[tuple[int, Token], ...]
    default: Token

    @classmethod
    def make(cls, support: Mapping[int, Token], default: Token) -> "TokenSeq":
        return cls(tuple(sorted(support.items())), default)

    def __getitem__(self, n: int) -> Token:
        return dict(self.support).get(n, self.default)

    @property
    def extent(self) -> int:
        return 1 + max((n for n, _ in self.support), default=-1)

    def range(self) -> frozenset:
        return frozenset(t for _, t in self.support) | {self.default}

    def to_json(self) -> dict:
        return {"support": {str(n): _tok_json(t) for n, t in self.support}, "default": _tok_json(self.default)}

    @classmethod
    def from_json(cls, doc: dict) -> "TokenSeq":
        return cls.make({int(k): _tok_load(v) for k, v in doc["support"].items()}, _tok_load(doc["default"]))


def _tok_json(t):
    return [_tok_json(x) for x in t] if isinstance(t, tuple) else t


def _tok_load(t):
    return tuple(_tok_load(x) for x in t) if isinstance(t, list) else t


def eplus_equiv(p: TokenSeq, q: TokenSeq) -> bool:
    return p.range() == q.range()


@dataclass(frozen=True)
class QPoint:
    """An injection from the window Delta x T (|Delta| = delta, |T| = width) into tokens."""

    delta: int
    width: int
    values: tuple[Token, ...] = field(repr=False)  # index t * delta + d

    def __post_init__(self):
        if len(self.values) != self.delta * self.width:
            raise ValueError("value count must be delta * width")
        if len(set(self.values)) != len(self.values):
            raise ValueError("a QPoint must be injective on its window")

    def at(self, d: int, t: int) -> Token:
        return self.values[t * self.delta + d % self.delta]

    def orbit(self, t: int) -> tuple:
        return tuple(self.at(d, t) for d in range(self.delta))

    def act(self, sigma: Sequence[int], shifts: Sequence[int]) -> "QPoint":
        """Image under the equivariant map (d, t) -> (d + shifts[t], sigma[t])."""
        vals = [None] * len(self.values)
        for t in range(self.width):
            for d in range(self.delta):
                nd = (d + shifts[t]) % self.delta
                vals[sigma[t] * self.delta + nd] = self.at(d, t)
        return QPoint(self.delta, self.width, tuple(vals))

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "width": self.width,
            "values": {f"{d},{t}": _tok_json(self.at(d, t)) for t in range(self.width) for d in range(self.delta)},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "QPoint":
        d, w = int(doc["delta"]), int(doc["width"])
        vals = [None] * (d * w)
        for key, tok in doc["values"].items():
            di, ti = map(int, key.split(","))
            vals[ti * d + di] = _tok_load(tok)
        return cls(d, w, tuple(vals))


def _min_rotation(tup: tuple) -> tuple:
    return min((tup[i:] + tup[:i] for i in range(len(tup))), key=repr)


def orbit_patterns(y: QPoint) -> list:
    return sorted((_min_rotation(y.orbit(t)) for t in range(y.width)), key=repr)


def EQY_equiv(y1: QPoint, y2: QPoint) -> bool:
    """Same multiset of per-orbit token tuples up to rotation (injective points)."""
    if (y1.delta, y1.width) != (y2.delta, y2.width):
        raise WindowMismatch(f"windows {(y1.delta, y1.width)} and {(y2.delta, y2.width)} differ")
    return orbit_patterns(y1) == orbit_patterns(y2)


def EQY_witness(y1: QPoint, y2: QPoint):
    """(sigma, shifts) carrying y1 to y2, or None."""
    if not EQY_equiv(y1, y2):
        return None
    where = {}
    for t in range(y2.width):
        where[y2.at(0, t)] = (0, t)
    sigma, shifts = [0] * y1.width, [0] * y1.width
    for t in range(y1.width):
        for d in range(y1.delta):
            hit = where.get(y1.at(d, t))
            if hit is not None:
                sigma[t] = hit[1]
                shifts[t] = (-d) % y1.delta
                break
    return tuple(sigma), tuple(shifts)


def reduce_eplus_to_EQY(p: TokenSeq, delta: int, width: int) -> QPoint:
    """Orbit m carries the tagged tokens (g, x_m, n) for the m-th distinct range token x_m.

    Distinct range values get one orbit each so the point stays injective;
    the remaining orbits carry padding tokens that depend only on position.
    """
    rng = sorted(p.range(), key=repr)
    if width < len(rng):
        raise ValueError(f"window width {width} is smaller than the range size {len(rng)}")
    vals = []
    for m in range(width):
        for n in range(delta):
            vals.append(("g", rng[m], n) if m < len(rng) else ("pad", m, n))
    return QPoint(delta, width, tuple(vals))


VOID = ("void",)


def reduce_EQY_to_eplus(y: QPoint) -> TokenSeq:
    """p_y(n) is the orbit tuple of y read from x_n, where J is enumerated as t * delta + d."""
    support = {}
    for t in range(y.width):
        for d in range(y.delta):
            support[t * y.delta + d] = tuple(y.at(d + k, t) for k in range(y.delta))
    return TokenSeq.make(support, VOID)
