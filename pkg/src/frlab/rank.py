"""Deissler rank and disjointifying rank by memoized well-founded recursion.

Fixed instances are evaluated exactly, memoized on canonical (a, B)
representatives under the group.  Extendable instances are evaluated on
configurations (the structure induced on B plus a) with a cap on |B|, in
interval arithmetic: a value is an interval [lo, hi] with hi = None meaning
no upper bound was established.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .closure import ClosureOperator, is_disjointifying, is_invariant
from .fraisse import one_point_extensions, type_key
from .structures import FinStructure, induced_substructure
from .verdict import Verdict

DEFAULT_DEPTH = 4


@dataclass(frozen=True)
class RankValue:
    tag: str  # finite | infinite | unresolved
    value: int = 0  # the rank when finite, the lower bound when unresolved

    @classmethod
    def finite(cls, n: int) -> "RankValue":
        return cls("finite", n)

    @classmethod
    def unresolved(cls, lower_bound: int) -> "RankValue":
        return cls("unresolved", lower_bound)

    @property
    def is_finite(self) -> bool:
        return self.tag == "finite"

    def __str__(self):
        if self.tag == "finite":
            return str(self.value)
        if self.tag == "infinite":
            return "inf"
        return f"unresolved(>={self.value})"

    def to_json(self):
        if self.tag == "finite":
            return self.value
        if self.tag == "infinite":
            return "inf"
        return {"unresolved": True, "lower_bound": self.value}


INFINITE = RankValue("infinite")


class CertificateFailed(RuntimeError):
    def __init__(self, clause: str, certificate: "Certificate"):
        super().__init__(f"certificate failed at clause ({clause})")
        self.clause = clause
        self.certificate = certificate


# -- fixed instances ---------------------------------------------------------------------


class FixedRankEngine:
    """Exact Drk/Krk on a fixed instance; ``with_krk`` toggles the second clause."""

    def __init__(self, inst, with_krk: bool):
        self.inst = inst
        self.with_krk = with_krk
        self.gens = inst.group.generators
        self.memo: dict[tuple, int] = {}
        self.canon: dict[tuple, tuple] = {}

    def canonical(self, a: int, B: frozenset) -> tuple:
        key = (a, B)
        rep = self.canon.get(key)
        if rep is not None:
            return rep
        seen = {key}
        queue = deque([key])
        while queue:
            x, S = queue.popleft()
            for g in self.gens:
                y = (g[x], frozenset(g[s] for s in S))
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        rep = min((tuple(sorted(S)), x) for x, S in seen)
        for k in seen:
            self.canon[k] = rep
        return rep

    def orbit(self, a, B):
        return self.inst.orbit_over(a, B)

    def value(self, a: int, B: frozenset) -> int:
        B = frozenset(B)
        rep = self.canonical(a, B)
        hit = self.memo.get(rep)
        if hit is not None:
            return hit
        orb = self.orbit(a, B)
        if len(orb) == 1:
            val = 0
        else:
            seen: set[int] = set()
            best = None
            for c in self.inst.universe:
                if c in B or c in seen:
                    continue
                corb = self.orbit(c, B)
                seen |= corb
                worst = max(self.value(a, B | {c2}) for c2 in corb)
                if best is None or worst < best:
                    best = worst
            val = 1 + best
            if self.with_krk:
                second = 1 + max(
                    0 if a2 == a else min(self.value(a, B | {a2}), self.value(a2, B | {a})) for a2 in orb
                )
                val = min(val, second)
        self.memo[rep] = val
        return val


def _engine(inst, with_krk: bool) -> FixedRankEngine:
    cache = inst.__dict__.setdefault("_rank_engines", {})
    if with_krk not in cache:
        cache[with_krk] = FixedRankEngine(inst, with_krk)
    return cache[with_krk]


# -- extendable instances --------------------------------------------------------------------


def _config(L: FinStructure, a: int, B: Iterable[int]) -> tuple[FinStructure, int, tuple]:
    """Restrict L to B + {a} and relabel so that a is 0 and B is 1..k."""
    B = sorted(set(B) - {a})
    order = [a] + B
    sub, index = induced_substructure(L, order)
    perm = [0] * len(order)
    for pos, x in enumerate(order):
        perm[index[x]] = pos
    return sub.relabel(perm), 0, tuple(range(1, len(order)))


def _canonical_config(S: FinStructure) -> tuple:
    k = S.size - 1
    best = None
    for p in itertools.permutations(range(1, k + 1)):
        perm = [0] + list(p)
        code = S.relabel(perm).key()
        if best is None or code < best:
            best = code
    return best


class ExtendableRankEngine:
    def __init__(self, spec, depth: int, with_krk: bool):
        self.spec = spec
        self.depth = depth
        self.with_krk = with_krk
        self.memo: dict[tuple, tuple] = {}
        self.states = 0

    def _extensions(self, S: FinStructure):
        """One-point extensions of S, each with the new point's type over B."""
        B = range(1, S.size)
        out = []
        for E in one_point_extensions(self.spec, S):
            x = S.size
            out.append((E, x, type_key(E, B, x)))
        return out

    def value(self, S: FinStructure) -> tuple[int, int | None]:
        """Interval for the rank of 0 over 1..k in configuration S."""
        code = _canonical_config(S)
        hit = self.memo.get(code)
        if hit is not None:
            return hit
        self.states += 1
        k = S.size - 1
        B = list(range(1, k + 1))
        tp_a = type_key(S, B, 0)
        exts = self._extensions(S)
        twins = [(E, x) for E, x, t in exts if t == tp_a]
        if not twins:
            res = (0, 0)
        elif k >= self.depth:
            res = (1, None)
        else:
            # group candidate c by its type over B; a itself is one realization
            by_type: dict = {}
            for E, x, t in exts:
                by_type.setdefault(t, []).append((E, x))
            best = None
            for t, reals in sorted(by_type.items(), key=lambda kv: sorted(kv[0])):
                parts = [self.value(_config(E, 0, B + [x])[0]) for E, x in reals]
                if t == tp_a:
                    parts.append((0, 0))
                worst = _imax(parts)
                best = worst if best is None else _imin([best, worst])
            res = _iadd(best)
            if self.with_krk:
                parts = [(0, 0)]
                for E, x in twins:
                    left = self.value(_config(E, 0, B + [x])[0])
                    right = self.value(_config(E, x, B + [0])[0])
                    parts.append(_imin([left, right]))
                res = _imin([res, _iadd(_imax(parts))])
        self.memo[code] = res
        return res


def _imax(items):
    lo = max(i[0] for i in items)
    hi = None if any(i[1] is None for i in items) else max(i[1] for i in items)
    return lo, hi


def _imin(items):
    lo = min(i[0] for i in items)
    his = [i[1] for i in items if i[1] is not None]
    return lo, (min(his) if his else None)


def _iadd(iv):
    lo, hi = iv
    return lo + 1, (None if hi is None else hi + 1)


def _ext_engine(inst, depth: int, with_krk: bool) -> ExtendableRankEngine:
    cache = inst.__dict__.setdefault("_rank_engines", {})
    key = (depth, with_krk)
    if key not in cache:
        cache[key] = ExtendableRankEngine(inst.spec, depth, with_krk)
    return cache[key]


def _to_value(iv) -> RankValue:
    lo, hi = iv
    if hi is not None and lo == hi:
        return RankValue.finite(lo)
    return RankValue.unresolved(lo)


# -- public operations --------------------------------------------------------------------


def _rank(inst, a: int, B: Iterable[int], depth: int, with_krk: bool) -> RankValue:
    B = frozenset(B)
    if a in B:
        return RankValue.finite(0)
    if inst.kind == "fixed":
        return RankValue.finite(_engine(inst, with_krk).value(a, B))
    S, _, _ = _config(inst.current, a, B)
    return _to_value(_ext_engine(inst, depth, with_krk).value(S))


def deissler_rank(inst, a: int, B: Iterable[int] = (), depth: int = DEFAULT_DEPTH) -> RankValue:
    return _rank(inst, a, B, depth, False)


def krk(inst, a: int, B: Iterable[int] = (), depth: int = DEFAULT_DEPTH) -> RankValue:
    return _rank(inst, a, B, depth, True)


def dcl(inst, B: Iterable[int], depth: int = DEFAULT_DEPTH) -> frozenset:
    """Elements whose Deissler rank over B is certified finite.

    Subsets of B need not be searched: Krk and Drk only drop as the base
    grows, so finiteness over some B0 inside B implies finiteness over B.
    """
    B = frozenset(B)
    return frozenset(a for a in inst.universe if deissler_rank(inst, a, B, depth).is_finite)


def dcl_diagnostic(inst, B: Iterable[int], depth: int = DEFAULT_DEPTH) -> list[dict]:
    """For each a outside dcl(B): a conjugate a' != a over B, one step away from a."""
    B = frozenset(B)
    inside = dcl(inst, B, depth)
    out = []
    for a in inst.universe:
        if a in inside:
            continue
        others = sorted(inst.orbit_over(a, B) - {a})
        entry = {"a": a, "B": sorted(B), "rank": str(deissler_rank(inst, a, B, depth))}
        if others:
            entry["conjugate"] = others[0]
        else:
            entry["conjugate_type"] = sorted(map(list, type_key(inst.current, B, a))) if inst.kind == "extendable" else None
            entry["note"] = "conjugate exists only after growth"
        out.append(entry)
    return out


def dcl_operator(inst, depth: int = DEFAULT_DEPTH) -> ClosureOperator:
    return ClosureOperator("dcl-rank", inst, lambda i, S: dcl(i, S, depth), {"depth": depth})


def clmin(inst, depth: int = DEFAULT_DEPTH) -> ClosureOperator:
    """B -> {a : Krk(a, B) certified finite}."""

    def rule(i, S):
        return {a for a in i.universe if krk(i, a, S, depth).is_finite}

    return ClosureOperator("clmin", inst, rule, {"depth": depth})


# -- tables --------------------------------------------------------------------------


@dataclass
class RankTable:
    fingerprint: str
    rows: list[tuple[int, frozenset, RankValue, RankValue]] = field(default_factory=list)

    def to_tsv(self) -> str:
        lines = ["a\tB\tDrk\tKrk"]
        for a, B, d, k in self.rows:
            lines.append(f"{a}\t{fmt_set(B)}\t{d}\t{k}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "rows": [{"a": a, "B": sorted(B), "Drk": d.to_json(), "Krk": k.to_json()} for a, B, d, k in self.rows],
        }


def fmt_set(S) -> str:
    return "{" + ",".join(map(str, sorted(S))) + "}"


def rank_table(inst, bases: Iterable[Iterable[int]] | None = None, depth: int = DEFAULT_DEPTH) -> RankTable:
    """Drk and Krk for every a and every base B (all subsets by default)."""
    from .closure import all_subsets

    if bases is None:
        bases = all_subsets(inst.universe, None if inst.kind == "fixed" else min(depth, 2))
    table = RankTable(inst.fingerprint())
    for B in bases:
        B = frozenset(B)
        for a in inst.universe:
            table.rows.append((a, B, deissler_rank(inst, a, B, depth), krk(inst, a, B, depth)))
    return table


# -- certificates ----------------------------------------------------------------------


@dataclass
class Certificate:
    a: int
    B: list[int]
    closure: str
    invariant: Verdict
    disjointifying: Verdict
    outside: bool
    bounded: bool

    @property
    def ok(self) -> bool:
        return self.invariant.holds and self.disjointifying.holds and self.outside

    def to_json(self) -> dict:
        return {
            "claim": "Krk(a,B) = inf",
            "a": self.a,
            "B": self.B,
            "closure": self.closure,
            "bound_limited": self.bounded,
            "invariant": self.invariant.to_json(),
            "disjointifying_form4": self.disjointifying.to_json(),
            "a_outside_cl_B": self.outside,
        }


def certify_infinite_rank(inst, a: int, B: Iterable[int], cl: ClosureOperator, set_size: int = 3, witness_search: int = 24) -> Certificate:
    """Certificate that Krk(a, B) is infinite: cl invariant, disjointifying, and a outside cl(B).

    Raises CertificateFailed naming the first clause that does not hold.
    """
    B = frozenset(B)
    inv = is_invariant(cl)
    # fixed carriers are scanned exhaustively: a bounded pass there would certify a false claim
    disj = is_disjointifying(cl, 4, None if inst.kind == "fixed" else set_size, witness_search)
    outside = a not in cl(B)
    cert = Certificate(a, sorted(B), cl.name, inv, disj, outside, inv.bounded or disj.bounded or inst.kind == "extendable")
    if not inv.holds:
        raise CertificateFailed("i", cert)
    if not disj.holds:
        raise CertificateFailed("ii", cert)
    if not outside:
        raise CertificateFailed("iii", cert)
    return cert
