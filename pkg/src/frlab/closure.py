"""Invariant closure operators, derived independence, and the disjointifying property."""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Iterator, Sequence

from .fraisse import members, realize, type_key
from .groups import PermGroup, fmt_cycles, image_set, set_orbit
from .instance import ExtendableInstance, FixedInstance
from .verdict import BudgetExhausted, Verdict, fails, holds, unresolved

Rule = Callable[[object, frozenset], Iterable[int]]

FORMS = (1, 2, 3, 4)


class DomainTooLarge(ValueError):
    pass


class ClosureOperator:
    """A set map on an instance's universe given by a rule ``rule(inst, S)``.

    Results are memoized for fixed instances only; extendable universes grow,
    so their closures are recomputed against the current approximation.
    """

    def __init__(self, name: str, carrier, rule: Rule, params: dict | None = None):
        self.name = name
        self.carrier = carrier
        self.rule = rule
        self.params = params or {}
        self._memo: dict[frozenset, frozenset] = {}

    def __call__(self, S: Iterable[int]) -> frozenset:
        S = frozenset(S)
        if self.carrier.kind == "fixed":
            hit = self._memo.get(S)
            if hit is None:
                hit = self._memo[S] = frozenset(self.rule(self.carrier, S))
            return hit
        return frozenset(self.rule(self.carrier, S))

    def on(self, carrier) -> "ClosureOperator":
        """The same rule on another carrier."""
        return ClosureOperator(self.name, carrier, self.rule, self.params)

    def table(self, universe: Iterable[int] | None = None) -> dict[frozenset, frozenset]:
        elems = list(self.carrier.universe if universe is None else universe)
        return {S: self(S) for S in all_subsets(elems)}

    def to_json(self) -> dict:
        doc = {"name": self.name}
        if self.params:
            doc["params"] = self.params
        return doc

    def __repr__(self):
        return f"ClosureOperator({self.name})"


def all_subsets(elems: Sequence[int], max_size: int | None = None) -> list[frozenset]:
    elems = list(elems)
    top = len(elems) if max_size is None else min(max_size, len(elems))
    return [frozenset(c) for k in range(top + 1) for c in itertools.combinations(elems, k)]


# -- catalog ------------------------------------------------------------------------


def identity_closure(inst) -> ClosureOperator:
    return ClosureOperator("identity", inst, lambda _i, S: S)


def constant_full(inst) -> ClosureOperator:
    return ClosureOperator("constant-full", inst, lambda i, _S: i.universe)


def _partner_rule(relation: str):
    def rule(inst, S):
        rows = inst.structure.tables[relation]
        return set(S) | {y for x, y in rows if x in S}

    return rule


def add_partners(inst, relation: str = "E") -> ClosureOperator:
    """S together with every element related to some member of S (pairs structures)."""
    if inst.structure is None or relation not in inst.structure.signature.names:
        raise ValueError(f"add-partners needs a structure with relation {relation!r}")
    return ClosureOperator("add-partners", inst, _partner_rule(relation), {"relation": relation})


def _dcl_rule(inst, S):
    if inst.kind == "fixed":
        stab = inst.group.pointwise_stabilizer(sorted(S))
        return {x for x in inst.universe if len(stab.orbit(x)) == 1}
    M = inst.current
    out = set(S)
    for x in inst.universe:
        if x not in S and realize(inst.spec, M, S, type_key(M, S, x)) is None:
            out.add(x)
    return out


def definable_closure(inst) -> ClosureOperator:
    """Points fixed by the pointwise stabilizer (extendable: types with no fresh realization)."""
    return ClosureOperator("definable-closure", inst, _dcl_rule)


def from_table(inst, table: dict, name: str = "table") -> ClosureOperator:
    frozen = {frozenset(k): frozenset(v) for k, v in table.items()}

    def rule(_i, S):
        if S not in frozen:
            raise KeyError(f"closure table has no entry for {sorted(S)}")
        return frozen[S]

    return ClosureOperator(name, inst, rule)


def from_function(inst, fn: Callable[[frozenset], Iterable[int]], name: str) -> ClosureOperator:
    return ClosureOperator(name, inst, lambda _i, S: fn(S))


def from_family(inst, family: Iterable[frozenset], name: str = "moore") -> ClosureOperator:
    """Closure whose closed sets are ``family`` (must contain the universe)."""
    fam = [frozenset(F) for F in family]
    full = frozenset(inst.universe)

    def rule(_i, S):
        out = full
        for F in fam:
            if S <= F:
                out &= F
        return out

    return ClosureOperator(name, inst, rule, {"closed_sets": sorted(sorted(F) for F in fam)})


CATALOG = {
    "identity": identity_closure,
    "constant-full": constant_full,
    "definable-closure": definable_closure,
    "add-partners": add_partners,
}


def catalog_closure(name: str, inst) -> ClosureOperator:
    if name in ("dcl-rank", "clmin"):
        from . import rank

        return rank.dcl_operator(inst) if name == "dcl-rank" else rank.clmin(inst)
    if name not in CATALOG:
        raise KeyError(f"unknown closure operator {name!r}; choose from {sorted(CATALOG)}")
    return CATALOG[name](inst)


# -- axioms and invariance --------------------------------------------------------------


def default_sample(inst, max_size: int = 3) -> list[frozenset]:
    if inst.kind == "fixed" and inst.size <= 10:
        return all_subsets(inst.universe)
    return all_subsets(inst.universe, max_size)


def validate_closure(cl: ClosureOperator, sample: Iterable[Iterable[int]] | None = None) -> Verdict:
    """Extensive, idempotent and monotone on the sampled subsets."""
    sample = [frozenset(S) for S in (sample if sample is not None else default_sample(cl.carrier))]
    bounded = cl.carrier.kind == "extendable"
    n = 0
    for S in sample:
        n += 1
        c = cl(S)
        if not S <= c:
            return fails({"axiom": "extensive", "A": S, "cl(A)": c}, n, "A is not contained in its closure")
        if cl(c) != c:
            return fails({"axiom": "idempotent", "A": S, "cl(A)": c, "cl(cl(A))": cl(c)}, n)
    for S, T in itertools.product(sample, repeat=2):
        if S < T:
            n += 1
            if not cl(S) <= cl(T):
                return fails({"axiom": "monotone", "A": S, "B": T, "cl(A)": cl(S), "cl(B)": cl(T)}, n)
    return holds(n, bounded)


def _generators(inst) -> list:
    if inst.kind == "fixed":
        return list(inst.group.generators)
    return list(inst.snapshot().group.generators)


def is_invariant(cl: ClosureOperator, sample: Iterable[Iterable[int]] | None = None) -> Verdict:
    """g[cl(A)] = cl(g[A]) for every generator g and sampled A."""
    inst = cl.carrier
    sample = [frozenset(S) for S in (sample if sample is not None else default_sample(inst))]
    n = 0
    for g in _generators(inst):
        for S in sample:
            n += 1
            lhs = image_set(g, cl(S))
            rhs = cl(image_set(g, S))
            if lhs != rhs:
                return fails(
                    {"generator": fmt_cycles(g), "A": S, "g[cl(A)]": lhs, "cl(g[A])": rhs},
                    n,
                    "closure does not commute with the generator",
                )
    return holds(n, inst.kind == "extendable")


# -- independence ------------------------------------------------------------------------


def indep(cl: ClosureOperator, A: Iterable[int], B: Iterable[int], C: Iterable[int]) -> bool:
    """A independent from B over C: A meets cl(BC) and B meets cl(AC) only inside cl(C)."""
    A, B, C = frozenset(A), frozenset(B), frozenset(C)
    base = cl(C)
    return (A & cl(B | C)) <= base and (B & cl(A | C)) <= base


def minimal_elements(cl: ClosureOperator, B: Iterable[int], C: Iterable[int]) -> frozenset:
    """b in B outside cl(C) lying in cl(b'C) for every b' of B in cl(bC) outside cl(C)."""
    B, C = frozenset(B), frozenset(C)
    base = cl(C)
    out = set()
    for b in B - base:
        below = (B & cl(C | {b})) - base
        if all(b in cl(C | {b2}) for b2 in below):
            out.add(b)
    return frozenset(out)


# -- disjointifying forms ---------------------------------------------------------------


def _witness(form, C, **kw) -> dict:
    doc = {"form": form, "C": sorted(C)}
    for k, v in kw.items():
        doc[k] = sorted(v) if isinstance(v, (set, frozenset)) else v
    return doc


def _fixed_queries(inst, form: int, set_size: int):
    U = list(inst.universe)
    for C in all_subsets(U, set_size):
        rest = [x for x in U if x not in C]
        if form == 1:
            for extra_a in all_subsets(rest, set_size - len(C)):
                for extra_b in all_subsets(rest, set_size - len(C)):
                    yield C, C | extra_a, C | extra_b
        elif form == 2:
            for extra_b in all_subsets(rest, set_size - len(C)):
                for a in U:
                    yield C, a, C | extra_b
        else:
            for a in U:
                for b in U:
                    yield C, a, b


def _check_fixed(cl, form, set_size):
    inst = cl.carrier
    n = 0
    for q in _fixed_queries(inst, form, set_size):
        n += 1
        C = q[0]
        if form == 1:
            _, A, B = q
            if not any(indep(cl, A2, B, C) for A2 in inst.set_orbit_over(A, C)):
                return fails(_witness(1, C, A=A, B=B, explanation="no A' congruent to A over C is independent from B"), n)
        elif form in (2, 3):
            _, a, B = q
            Bset = B if form == 2 else frozenset([B])
            if not any(indep(cl, {a2}, Bset, C) for a2 in inst.orbit_over(a, C)):
                key = {"B": Bset} if form == 2 else {"b": B}
                return fails(_witness(form, C, a=a, **key, explanation="no a' congruent to a over C is independent"), n)
        else:
            _, a, b = q
            if a in cl(C):
                continue
            orbit = inst.orbit_over(a, C)
            if not any(indep(cl, {a2}, {a}, C) for a2 in orbit):
                return fails(_witness(4, C, a=a, b=b, clause="a", explanation="every a' congruent to a over C depends on a"), n)
            if all(a2 in cl(C | {b}) for a2 in orbit):
                return fails(_witness(4, C, a=a, b=b, clause="b", explanation="every a' congruent to a over C lies in cl(bC)"), n)
    return holds(n)


def _extendable_configs(inst: ExtendableInstance, form: int, set_size: int):
    """Configurations up to isomorphism: a class member D with roles for C and a, b (or A, B)."""
    for size in range(set_size + 1):
        for D in members(inst.spec, size):
            U = list(D.universe)
            for C in all_subsets(U):
                rest = [x for x in U if x not in C]
                if form == 1:
                    for ea in all_subsets(rest):
                        for eb in all_subsets(rest):
                            if C | ea | eb == frozenset(U):
                                yield D, C, C | ea, C | eb
                elif form == 2:
                    for a in U:
                        B = frozenset(U) - {a} if a not in C else frozenset(U)
                        if C <= B:
                            yield D, C, a, B
                else:
                    for a in U:
                        for b in U:
                            if C | {a, b} == frozenset(U):
                                yield D, C, a, b


def _search_extendable(local: ExtendableInstance, cl: ClosureOperator, ok, seed_elems, C, make_fresh):
    """Look for an admissible witness among current candidates, then fresh realizations.

    Returns "found", "none" (the class admits no fresh realization) or "budget".
    """
    for cand in seed_elems():
        if ok(cand):
            return "found"
    while True:
        try:
            fresh = make_fresh()
        except BudgetExhausted:
            return "budget"
        if fresh is None:
            return "none"
        if ok(fresh):
            return "found"


def _check_extendable(cl, form, set_size, witness_search):
    inst: ExtendableInstance = cl.carrier
    n = 0
    budget_hit = None
    for cfg in _extendable_configs(inst, form, set_size):
        n += 1
        D, C = cfg[0], cfg[1]
        local = inst.fork(current=D, growth_budget=witness_search)
        lcl = cl.on(local)
        if form == 1:
            _, _, A, B = cfg
            status = _search_extendable(
                local,
                lcl,
                lambda img: indep(lcl, set(img.values()) if isinstance(img, dict) else img, B, C),
                lambda: local.set_orbit_over(A, C),
                C,
                lambda: local.copy_over(A, C),
            )
            wit = _witness(1, C, A=A, B=B, structure=D.to_json())
        elif form in (2, 3):
            _, _, a, b = cfg
            Bset = b if form == 2 else frozenset([b])
            status = _search_extendable(
                local,
                lcl,
                lambda a2: indep(lcl, {a2}, Bset, C),
                lambda: sorted(local.orbit_over(a, C)),
                C,
                lambda: local.realize_fresh(a, C),
            )
            key = {"B": Bset} if form == 2 else {"b": b}
            wit = _witness(form, C, a=a, **key, structure=D.to_json())
        else:
            _, _, a, b = cfg
            if a in lcl(C):
                continue
            for clause, ok in (
                ("a", lambda a2: indep(lcl, {a2}, {a}, C)),
                ("b", lambda a2: a2 not in lcl(C | {b})),
            ):
                status = _search_extendable(
                    local, lcl, ok, lambda: sorted(local.orbit_over(a, C)), C, lambda: local.realize_fresh(a, C)
                )
                if status != "found":
                    break
            wit = _witness(4, C, a=a, b=b, clause=clause, structure=D.to_json())
        if status == "none":
            wit["explanation"] = "no candidate is admissible and the class allows no further realization"
            return fails(wit, n, bounded=True)
        if status == "budget" and budget_hit is None:
            wit["explanation"] = f"no witness within {witness_search} elements"
            budget_hit = wit
    if budget_hit is not None:
        return unresolved(budget_hit, n, "witness search exhausted its budget")
    return holds(n, bounded=True, set_size=set_size, witness_search=witness_search)


def form4_at(cl: ClosureOperator, a: int, C: Iterable[int]) -> Verdict:
    """Form 4 at a single (a, C) on a fixed carrier, scanning every b."""
    inst = cl.carrier
    C = frozenset(C)
    if a in cl(C):
        return holds(0)
    orbit = inst.orbit_over(a, C)
    if not any(indep(cl, {a2}, {a}, C) for a2 in orbit):
        return fails(_witness(4, C, a=a, clause="a", explanation="every a' congruent to a over C depends on a"), 1)
    for n, b in enumerate(inst.universe, start=1):
        if all(a2 in cl(C | {b}) for a2 in orbit):
            return fails(_witness(4, C, a=a, b=b, clause="b", explanation="every a' congruent to a over C lies in cl(bC)"), n)
    return holds(inst.size)


def is_disjointifying(cl: ClosureOperator, form: int = 4, set_size: int | None = None, witness_search: int = 24) -> Verdict:
    """Check one of the four equivalent forms of the disjointifying property.

    Fixed instances are scanned exhaustively over sets of size <= set_size
    (default: the whole domain) and the verdict is exact there.  Extendable
    instances are scanned over configurations of size <= set_size, each
    searched for witnesses while growing up to ``witness_search`` elements.
    """
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    inst = cl.carrier
    if inst.kind == "fixed":
        v = _check_fixed(cl, form, inst.size if set_size is None else set_size)
        if set_size is not None and set_size < inst.size:
            v.bounded = True
        return v
    return _check_extendable(cl, form, 3 if set_size is None else set_size, witness_search)


# -- enumeration -------------------------------------------------------------------------


def enumerate_invariant_closures(P: PermGroup, max_domain: int = 4, structure=None) -> Iterator[ClosureOperator]:
    """Every P-invariant closure operator on range(P.degree), as Moore families.

    A closure operator is determined by its closed sets: a family containing
    the universe and closed under intersection.  Invariance means the family
    is a union of orbits of P on subsets.
    """
    n = P.degree
    if n > max_domain:
        raise DomainTooLarge(f"domain {n} exceeds enumeration cap {max_domain}")
    inst = FixedInstance(P, structure)
    full = (1 << n) - 1
    to_set = lambda m: frozenset(i for i in range(n) if m >> i & 1)
    to_mask = lambda S: sum(1 << i for i in S)
    seen, orbits = set(), []
    for m in range(full):
        if m in seen:
            continue
        orb = {m}
        stack = [m]
        while stack:
            x = stack.pop()
            for g in P.generators:
                y = to_mask(image_set(g, to_set(x)))
                if y not in orb:
                    orb.add(y)
                    stack.append(y)
        seen |= orb
        orbits.append(sorted(orb))
    count = 0
    for choice in range(1 << len(orbits)):
        fam = [full]
        for i, orb in enumerate(orbits):
            if choice >> i & 1:
                fam.extend(orb)
        fam_set = set(fam)
        if any((x & y) not in fam_set for x, y in itertools.combinations(fam, 2)):
            continue
        count += 1
        yield from_family(inst, [to_set(m) for m in sorted(fam)], f"moore-{choice}")


def _set_orbits(gens, n: int) -> list[list[frozenset]]:
    seen, out = set(), []
    for S in all_subsets(range(n)):
        if S in seen or len(S) == n:
            continue
        orb = set_orbit(gens, S)
        seen |= orb
        out.append(sorted(orb, key=sorted))
    return out


def random_invariant_closure(inst: FixedInstance, rng, density: float = 0.3) -> ClosureOperator:
    """A random invariant closure: a random union of set-orbits, closed under intersection."""
    n = inst.size
    fam = {frozenset(range(n))}
    for orb in _set_orbits(inst.group.generators, n):
        if rng.random() < density:
            fam.update(orb)
    changed = True
    while changed:
        changed = False
        for X, Y in itertools.combinations(list(fam), 2):
            if X & Y not in fam:
                fam.add(X & Y)
                changed = True
    return from_family(inst, sorted(fam, key=lambda F: (len(F), sorted(F))), "random-moore")


def brute_force_closures(n: int, gens: Sequence) -> list[dict]:
    """Oracle: all maps on the subset lattice that are extensive, monotone, idempotent and invariant."""
    subsets = [frozenset(c) for k in range(n + 1) for c in itertools.combinations(range(n), k)]
    supersets = {S: [T for T in subsets if S <= T] for S in subsets}
    out = []

    def rec(i, table):
        if i == len(subsets):
            for S in subsets:
                if table[table[S]] != table[S]:
                    return
                for g in gens:
                    if image_set(g, table[S]) != table[image_set(g, S)]:
                        return
            out.append(dict(table))
            return
        S = subsets[i]
        for T in supersets[S]:
            if all(table[R] <= T for R in subsets[:i] if R <= S):
                table[S] = T
                rec(i + 1, table)
                del table[S]

    rec(0, {})
    return out
