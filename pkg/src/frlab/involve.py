"""Colored structures and the back-and-forth construction realizing a color permutation.

A run keeps a finite colored approximation of the limit and builds partial
isomorphisms g_n between closed sets A_n and B_n with c(g(a)) = sigma(c(a)).
Odd stages swallow the next enumerated element on the A side and transport
it through g; even stages do the same on the B side through g^-1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .fraisse import (
    FraisseClassSpec,
    _amalgam_candidates,
    build_limit,
    in_class,
    realize,
    type_key,
)
from .structures import FinStructure, induced_substructure, is_embedding, is_partial_isomorphism
from .verdict import BudgetExhausted

NULL = None
DEFAULT_PALETTE = 8

StructClosure = Callable[[FinStructure, frozenset], frozenset]


class ColoringClash(RuntimeError):
    pass


class BaseAmalgamFailed(RuntimeError):
    pass


class ConditionViolation(RuntimeError):
    def __init__(self, condition: int, detail: str):
        super().__init__(f"condition ({condition}) violated: {detail}")
        self.condition = condition
        self.detail = detail


class NotEquivariant(ValueError):
    pass


# -- closures on bare structures -------------------------------------------------------


def _identity(_M, S):
    return frozenset(S)


def _partners(M, S, rel="E"):
    return frozenset(S) | {y for x, y in M.tables[rel] if x in S}


def _full(M, _S):
    return frozenset(M.universe)


STRUCTURE_CLOSURES: dict[str, StructClosure] = {
    "identity": _identity,
    "add-partners": _partners,
    "constant-full": _full,
}


def structure_closure(name: str) -> StructClosure:
    try:
        return STRUCTURE_CLOSURES[name]
    except KeyError:
        raise KeyError(f"no structure-level closure named {name!r}; choose from {sorted(STRUCTURE_CLOSURES)}") from None


# -- colored structures ------------------------------------------------------------------


@dataclass(frozen=True)
class ColoredStructure:
    base: FinStructure
    colors: tuple  # color per element, None for null

    def __post_init__(self):
        if len(self.colors) != self.base.size:
            raise ValueError("one color per element is required")

    def color(self, x: int):
        return self.colors[x]

    def valid(self, cl: StructClosure) -> bool:
        return all(self.colors[x] is NULL for x in cl(self.base, frozenset()))

    def restrict(self, S: Iterable[int]) -> tuple["ColoredStructure", dict]:
        sub, index = induced_substructure(self.base, S)
        colors = [None] * sub.size
        for x, i in index.items():
            colors[i] = self.colors[x]
        return ColoredStructure(sub, tuple(colors)), index

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "colors": list(self.colors)}


def colored_strong_sub(cl: StructClosure, X: ColoredStructure, Y: ColoredStructure, embed: Mapping[int, int] | None = None) -> bool:
    """(a) X embeds as an induced substructure, (b) colors agree, (c) new points of cl_Y(X) are null."""
    f = dict(embed) if embed is not None else {x: x for x in X.base.universe}
    if not is_embedding(f, X.base, Y.base):
        return False
    if any(X.colors[x] != Y.colors[f[x]] for x in X.base.universe):
        return False
    image = frozenset(f.values())
    return all(Y.colors[y] is NULL for y in cl(Y.base, image) - image)


def _independent_in(cl, D: FinStructure, Bset: frozenset, Cset: frozenset, Aset: frozenset) -> bool:
    base = cl(D, Aset)
    return (cl(D, Bset) & Cset) <= base and (cl(D, Cset) & Bset) <= base


@dataclass
class ColoredAmalgam:
    D: ColoredStructure
    embed_C: dict
    identified: list


def amalgamate_colored(
    cl: StructClosure,
    spec: FraisseClassSpec,
    A: ColoredStructure,
    B: ColoredStructure,
    C: ColoredStructure,
    base: Mapping[int, int] | None = None,
) -> ColoredAmalgam:
    """Amalgamate B and C over A (A sits on the first |A| points of both).

    Without ``base``, searches class members D (fewest identifications first)
    where cl_D(B) meets C and cl_D(C) meets B only inside cl_D(A), then colors
    D by c_B on B and c_C on C.  ``base`` forces the placement of C in D
    (an injective map C -> D universe positions), skipping the independence
    search; a forced degenerate base surfaces as ColoringClash.
    """
    f = {a: a for a in A.base.universe}
    if not (colored_strong_sub(cl, A, B) and colored_strong_sub(cl, A, C)):
        raise ValueError("A must be a strong colored substructure of both B and C")
    Aset = frozenset(A.base.universe)
    candidates = []
    if base is not None:
        h = dict(base)
        size = max(max(h.values(), default=-1) + 1, B.base.size)
        candidates.append((size, h, False))
    else:
        for size, h in _amalgam_candidates(A.base, B.base, C.base, f, f, "plain", 0):
            candidates.append((size, h, True))
    from .fraisse import _try_amalgam

    for size, h, need_indep in candidates:
        D = _try_amalgam(spec, B.base, C.base, h, size)
        if D is None:
            continue
        Bset = frozenset(B.base.universe)
        Cset = frozenset(h.values())
        if need_indep and not _independent_in(cl, D, Bset, Cset, Aset):
            continue
        colors = [NULL] * D.size
        clash = []
        for b in B.base.universe:
            colors[b] = B.colors[b]
        for c, d in h.items():
            if d in Bset and colors[d] != C.colors[c]:
                clash.append({"element": d, "from_B": colors[d], "from_C": C.colors[c]})
            elif d not in Bset:
                colors[d] = C.colors[c]
        if clash:
            raise ColoringClash(f"B and C disagree on shared elements {clash}")
        Dc = ColoredStructure(D, tuple(colors))
        if not (colored_strong_sub(cl, B, Dc) and colored_strong_sub(cl, C, Dc, h)):
            if need_indep:
                continue
            raise ColoringClash("the forced base makes a non-null point of one side lie in the closure of the other")
        shared = sorted(d for d in Cset & Bset if d not in Aset)
        return ColoredAmalgam(Dc, h, shared)
    raise BaseAmalgamFailed("no base amalgam with the independence guarantee was found")


# -- back and forth --------------------------------------------------------------------


@dataclass
class ColoredLimit:
    """A growing colored approximation of the limit."""

    spec: FraisseClassSpec
    cl: StructClosure
    M: FinStructure
    colors: list
    budget: int

    def closure(self, S) -> frozenset:
        return self.cl(self.M, frozenset(S))

    def add_copy(self, base: frozenset, keys_and_colors) -> list[int]:
        """Append elements realizing the given types over a growing base, with colors."""
        added = []
        for key, color in keys_and_colors:
            if self.M.size >= self.budget:
                raise BudgetExhausted(f"colored limit reached {self.budget} elements")
            key = frozenset((nm, tuple(added[-e - 2] if isinstance(e, int) and e <= -2 else e for e in row)) for nm, row in key)
            nxt = realize(self.spec, self.M, base | set(added), key)
            if nxt is None:
                raise BudgetExhausted("the class admits no realization of a required type")
            self.M = nxt
            self.colors.append(color)
            added.append(nxt.size - 1)
        return added


def seed_colored_limit(spec, cl: StructClosure, n_initial: int, palette: int, budget: int, ext_depth: int = 2) -> ColoredLimit:
    M = build_limit(spec, n_initial, ext_depth).structure
    forced = cl(M, frozenset())
    colors = [NULL if x in forced else x % palette for x in M.universe]
    return ColoredLimit(spec, cl, M, colors, budget)


@dataclass
class StageRecord:
    stage: int
    A: list
    B: list
    g: dict
    enumerated: int | None
    checks: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "A": self.A,
            "B": self.B,
            "g": [[a, b] for a, b in sorted(self.g.items())],
            "enumerated": self.enumerated,
            "checks": self.checks,
        }


@dataclass
class BackAndForthState:
    stage: int
    A: frozenset
    B: frozenset
    g: dict
    sigma: dict  # color -> color, finite support; missing colors are fixed
    limit: ColoredLimit
    history: list = field(default_factory=list)
    enumerated: list = field(default_factory=list)
    lead: str = "A"  # side that swallows c_n first

    def sig(self, color):
        return NULL if color is NULL else self.sigma.get(color, color)

    def sig_inv(self, color):
        if color is NULL:
            return NULL
        for k, v in self.sigma.items():
            if v == color:
                return k
        return color


def _fresh_state(limit: ColoredLimit, sigma: Mapping, lead: str = "A") -> BackAndForthState:
    sigma = dict(sigma)
    if sorted(sigma) != sorted(sigma.values()):
        raise ValueError("sigma must be a bijection on its support")
    if lead not in ("A", "B"):
        raise ValueError("lead must be 'A' or 'B'")
    st = BackAndForthState(0, frozenset(), frozenset(), {}, sigma, limit, lead=lead)
    st.history.append(StageRecord(0, [], [], {}, None))
    return st


def _find_copy(limit: ColoredLimit, fixed: Mapping[int, int], new_src: list[int], target_color) -> dict | None:
    """Least injective extension of ``fixed`` over new_src into the limit that is a partial isomorphism,
    matches colors and lands on a closed set."""
    M = limit.M
    used = set(fixed.values())
    order = list(new_src)
    out = dict(fixed)

    def rec(i):
        if i == len(order):
            image = frozenset(out.values())
            return limit.closure(image) == image
        x = order[i]
        want = target_color(x)
        for y in M.universe:
            if y in used or limit.colors[y] != want:
                continue
            out[x] = y
            if is_partial_isomorphism(M, out):
                used.add(y)
                if rec(i + 1):
                    return True
                used.discard(y)
            del out[x]
        return False

    return dict(out) if rec(0) else None


def _transport(state: BackAndForthState, forward: bool, target: int) -> BackAndForthState:
    """One stage: enlarge the source side to the closure of itself plus ``target``, then match."""
    lim = state.limit
    src, dst = (state.A, state.B) if forward else (state.B, state.A)
    g = dict(state.g) if forward else {b: a for a, b in state.g.items()}
    recolor = state.sig if forward else state.sig_inv
    new_src_set = lim.closure(src | {target})
    new_src = sorted(new_src_set - src)
    if new_src:
        match = _find_copy(lim, g, new_src, lambda x: recolor(lim.colors[x]))
        if match is None:
            # grow the limit by a copy of the new points over the current image
            keys = []
            placed = {}
            for i, x in enumerate(new_src):
                base = src | set(new_src[:i])
                key = type_key(lim.M, base, x)
                # rows mention src points (mapped through g) and earlier new points (placeholders -2, -3, ...)
                mapped = set()
                for nm, row in key:
                    mapped.add((nm, tuple(g[e] if e in g else (-2 - new_src.index(e) if e in new_src else e) for e in row)))
                keys.append((frozenset(mapped), recolor(lim.colors[x])))
            added = lim.add_copy(frozenset(dst), keys)
            match = dict(g)
            match.update(zip(new_src, added))
            if not is_partial_isomorphism(lim.M, match):
                raise ConditionViolation(4, "grown copy is not a partial isomorphism")
            image = frozenset(match.values())
            if lim.closure(image) != image:
                raise ConditionViolation(2, "grown copy is not closed in the limit")
        g = match
    new_state = BackAndForthState(
        state.stage + 1,
        frozenset(g) if forward else frozenset(g.values()),
        frozenset(g.values()) if forward else frozenset(g),
        g if forward else {b: a for a, b in g.items()},
        state.sigma,
        lim,
        state.history,
        state.enumerated,
        state.lead,
    )
    return new_state


def involvement_step(state: BackAndForthState) -> BackAndForthState:
    """Advance one stage and re-verify all six conditions on the whole history."""
    n, odd = divmod(state.stage, 2)
    lim = state.limit
    first = state.lead == "A"
    lead_side, other_side = (state.A, state.B) if first else (state.B, state.A)
    if odd == 0:
        # c_n is the least element outside the leading side
        c = next((x for x in lim.M.universe if x not in lead_side), None)
        if c is None:
            c = lim.add_copy(frozenset(), [(frozenset(), 0)])[0]
        state.enumerated.append(c)
        new = _transport(state, first, c)
    else:
        c = state.enumerated[n]
        target = c if c not in other_side else next((x for x in lim.M.universe if x not in other_side), c)
        new = _transport(state, not first, target)
    enum = c
    rec = StageRecord(new.stage, sorted(new.A), sorted(new.B), dict(new.g), enum)
    new.history.append(rec)
    rec.checks = verify_conditions(new)
    return new


def verify_conditions(state: BackAndForthState) -> dict:
    """Check conditions (1)-(6) over every recorded stage; raise ConditionViolation on failure."""
    lim = state.limit
    hist = state.history
    colored = lambda S: ColoredStructure(induced_substructure(lim.M, S)[0], tuple(lim.colors[x] for x in sorted(S)))

    def sub_embed(S, T):
        _, idx = induced_substructure(lim.M, T)
        return {i: idx[x] for i, x in enumerate(sorted(S))}

    counts = {k: 0 for k in range(1, 7)}
    for prev, cur in zip(hist, hist[1:]):
        for side in ("A", "B"):
            S, T = set(getattr(prev, side)), set(getattr(cur, side))
            if not S <= T:
                raise ConditionViolation(1, f"{side} shrank at stage {cur.stage}")
            counts[1] += 1
            if not colored_strong_sub(lim.cl, colored(S), colored(T), sub_embed(S, T)):
                raise ConditionViolation(2, f"{side}_{prev.stage} is not strong in {side}_{cur.stage}")
            counts[2] += 1
        if any(prev.g.get(a) != cur.g[a] for a in prev.g):
            raise ConditionViolation(6, f"g_{cur.stage} does not extend g_{prev.stage}")
        counts[6] += 1
    for rec in hist:
        if set(rec.g) != set(rec.A) or set(rec.g.values()) != set(rec.B):
            raise ConditionViolation(4, f"g_{rec.stage} does not map A onto B")
        if not is_partial_isomorphism(lim.M, rec.g):
            raise ConditionViolation(4, f"g_{rec.stage} is not a partial isomorphism")
        counts[4] += 1
        for a, b in rec.g.items():
            if lim.colors[b] != state.sig(lim.colors[a]):
                raise ConditionViolation(5, f"color of g({a}) = {b} is not sigma(c({a}))")
            counts[5] += 1
    one, two = ("A", "B") if state.lead == "A" else ("B", "A")
    for n, c in enumerate(state.enumerated):
        for k, side in ((2 * n + 1, one), (2 * n + 2, two)):
            if k < len(hist):
                if c not in getattr(hist[k], side):
                    raise ConditionViolation(3, f"c_{n} = {c} missing from {side}_{k}")
                counts[3] += 1
    return {f"({k})": v for k, v in counts.items()}


@dataclass
class InvolvementReport:
    spec: str
    closure: str
    sigma: dict
    stages: int
    g: dict
    history: list
    color_checks: int
    color_ok: bool
    limit_size: int
    conditions: dict = field(default_factory=dict)  # per-condition check counts over the whole history

    @property
    def ok(self) -> bool:
        return self.color_ok and self.stages == len(self.history) - 1

    def to_json(self) -> dict:
        return {
            "spec": self.spec,
            "closure": self.closure,
            "sigma": [[k, v] for k, v in sorted(self.sigma.items())],
            "stages": self.stages,
            "domain_size": len(self.g),
            "g": [[a, b] for a, b in sorted(self.g.items())],
            "color_checks": self.color_checks,
            "color_ok": self.color_ok,
            "limit_size": self.limit_size,
            "conditions": self.conditions,
            "trace": [r.to_json() for r in self.history],
        }


def run_involvement(
    spec: FraisseClassSpec,
    cl_name: str,
    sigma: Mapping,
    n_stages: int,
    budget: int = 64,
    palette: int = DEFAULT_PALETTE,
    n_initial: int = 12,
    lead: str = "A",
) -> InvolvementReport:
    """Run ``n_stages`` stages.  With lead="B" the enumeration is swallowed on the
    image side first, so a sigma^-1 run led from B mirrors a sigma run led from A."""
    cl = structure_closure(cl_name)
    for k, v in sigma.items():
        if not (0 <= k < palette and 0 <= v < palette):
            raise ValueError("sigma must act on the palette")
    limit = seed_colored_limit(spec, cl, n_initial, palette, budget)
    state = _fresh_state(limit, sigma, lead)
    for _ in range(n_stages):
        state = involvement_step(state)
    ok = all(limit.colors[b] == state.sig(limit.colors[a]) for a, b in state.g.items())
    conditions = state.history[-1].checks if len(state.history) > 1 else {}
    return InvolvementReport(spec.label, cl_name, dict(sigma), state.stage, dict(state.g), state.history, len(state.g), ok, limit.M.size, conditions)


# -- transversal quotient ------------------------------------------------------------------


def delta_generator(delta_order: int, n_orbits: int) -> tuple:
    """The generator of Delta: point t*d + e goes to t*d + (e+1) mod d."""
    d = delta_order
    return tuple(t * d + (e + 1) % d for t in range(n_orbits) for e in range(d))


def transversal_quotient(delta_order: int, n_orbits: int, pi: Sequence[int]) -> tuple:
    """The permutation sigma of orbit indices with pi(t*d) in the orbit of sigma(t)*d."""
    d, m = delta_order, n_orbits
    pi = tuple(pi)
    if sorted(pi) != list(range(d * m)):
        raise ValueError("pi must be a permutation of the d*m points")
    gen = delta_generator(d, m)
    for x in range(d * m):
        if pi[gen[x]] != gen[pi[x]]:
            raise NotEquivariant(f"pi does not commute with Delta at point {x}")
    return tuple(pi[t * d] // d for t in range(m))


def quotient_preimage(delta_order: int, sigma: Sequence[int], shifts: Sequence[int] | None = None) -> tuple:
    """An equivariant permutation mapping orbit t to orbit sigma(t), rotated by shifts[t]."""
    d, m = delta_order, len(sigma)
    shifts = shifts or [0] * m
    return tuple(sigma[t] * d + (e + shifts[t]) % d for t in range(m) for e in range(d))
