"""Permutation groups on ``range(n)``.

Permutations are tuples of images.  ``compose(p, q)`` is ``p`` after ``q``.
Groups carry a Schreier-Sims stabilizer chain, built lazily and cached per
base prefix, which the rank engine leans on for pointwise stabilizers.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Iterable, Iterator, Sequence

Perm = tuple[int, ...]


class GroupError(ValueError):
    pass


def identity(n: int) -> Perm:
    return tuple(range(n))


def compose(p: Perm, q: Perm) -> Perm:
    return tuple(p[i] for i in q)


def inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def is_identity(p: Perm) -> bool:
    return all(i == x for i, x in enumerate(p))


def check_perm(p: Sequence[int], n: int | None = None) -> Perm:
    p = tuple(p)
    if n is not None and len(p) != n:
        raise GroupError(f"permutation {list(p)} has length {len(p)}, expected {n}")
    if sorted(p) != list(range(len(p))):
        raise GroupError(f"{list(p)} is not a bijection of range({len(p)})")
    return p


def cycle_perm(n: int, *cycles: Sequence[int]) -> Perm:
    img = list(range(n))
    for cyc in cycles:
        for i, x in enumerate(cyc):
            img[x] = cyc[(i + 1) % len(cyc)]
    return check_perm(img)


def fmt_cycles(p: Perm | dict) -> str:
    """Cycle notation; partial maps (dicts) print their open paths in brackets."""
    if isinstance(p, dict):
        return _fmt_partial(p)
    seen = set()
    out = []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        cyc = [i]
        seen.add(i)
        j = p[i]
        while j != i:
            seen.add(j)
            cyc.append(j)
            j = p[j]
        out.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(out) or "()"


def _fmt_partial(f: dict) -> str:
    out = []
    seen = set()
    starts = [x for x in sorted(f) if x not in set(f.values())]
    for s in starts + sorted(f):
        if s in seen:
            continue
        path = [s]
        seen.add(s)
        x = s
        closed = False
        while x in f:
            y = f[x]
            if y == s:
                closed = True
                break
            if y in seen:
                break
            path.append(y)
            seen.add(y)
            x = y
        if len(path) == 1 and not closed and s not in f:
            continue
        if closed:
            if len(path) > 1:
                out.append("(" + " ".join(map(str, path)) + ")")
        else:
            out.append("[" + " ".join(map(str, path)) + "]")
    return "".join(out) or "()"


def image_set(p: Perm, S: Iterable[int]) -> frozenset:
    return frozenset(p[x] for x in S)


# -- stabilizer chains ------------------------------------------------------


@dataclass
class StabChain:
    degree: int
    base: list[int]
    strong: list[Perm]
    transversals: list[dict[int, Perm]]

    def order(self) -> int:
        return reduce(lambda a, t: a * len(t), self.transversals, 1)

    def sift(self, g: Perm, start: int = 0) -> tuple[Perm, int]:
        for lvl in range(start, len(self.base)):
            x = g[self.base[lvl]]
            u = self.transversals[lvl].get(x)
            if u is None:
                return g, lvl
            g = compose(inverse(u), g)
        return g, len(self.base)

    def contains(self, g: Perm) -> bool:
        h, lvl = self.sift(g)
        return lvl == len(self.base) and is_identity(h)

    def level_gens(self, lvl: int) -> list[Perm]:
        fixed = self.base[:lvl]
        return [s for s in self.strong if all(s[b] == b for b in fixed)]

    def elements(self) -> Iterator[Perm]:
        levels = [sorted(t.items()) for t in self.transversals]

        def rec(lvl, g):
            if lvl == len(levels):
                yield g
                return
            for _, u in levels[lvl]:
                yield from rec(lvl + 1, compose(g, u))

        yield from rec(0, identity(self.degree))


def _transversal(n: int, b: int, gens: list[Perm]) -> dict[int, Perm]:
    trans = {b: identity(n)}
    queue = deque([b])
    while queue:
        x = queue.popleft()
        ux = trans[x]
        for s in gens:
            y = s[x]
            if y not in trans:
                trans[y] = compose(s, ux)
                queue.append(y)
    return trans


def schreier_sims(n: int, gens: Sequence[Perm], base_prefix: Sequence[int] = ()) -> StabChain:
    """Deterministic Schreier-Sims producing a base beginning with ``base_prefix``."""
    strong = [g for g in gens if not is_identity(g)]
    base = list(dict.fromkeys(base_prefix))
    for g in strong:
        if all(g[b] == b for b in base):
            base.append(next(i for i in range(n) if g[i] != i))
    chain = StabChain(n, base, strong, [])
    chain.transversals = [_transversal(n, b, chain.level_gens(i)) for i, b in enumerate(base)]

    lvl = len(base) - 1
    while lvl >= 0:
        restarted = False
        gens_l = chain.level_gens(lvl)
        trans = chain.transversals[lvl]
        for p, up in list(trans.items()):
            for s in gens_l:
                sp = s[p]
                sch = compose(inverse(trans[sp]), compose(s, up))
                h, j = chain.sift(sch, lvl + 1)
                if j < len(chain.base) or not is_identity(h):
                    if j == len(chain.base):
                        chain.base.append(next(i for i in range(n) if h[i] != i))
                        chain.transversals.append({})
                    chain.strong.append(h)
                    for m in range(lvl + 1, j + 1):
                        chain.transversals[m] = _transversal(n, chain.base[m], chain.level_gens(m))
                    lvl = j
                    restarted = True
                    break
            if restarted:
                break
        if not restarted:
            lvl -= 1
    return chain


# -- groups -------------------------------------------------------------------


@dataclass(eq=False)
class PermGroup:
    degree: int
    generators: tuple[Perm, ...] = ()
    _chains: dict = field(default_factory=dict, repr=False)
    _pstab: dict = field(default_factory=dict, repr=False)
    _orbits: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.generators = tuple(check_perm(g, self.degree) for g in self.generators)

    @classmethod
    def symmetric(cls, n: int) -> "PermGroup":
        gens = []
        if n >= 2:
            gens.append(cycle_perm(n, (0, 1)))
        if n >= 3:
            gens.append(cycle_perm(n, tuple(range(n))))
        return cls(n, tuple(gens))

    @classmethod
    def cyclic(cls, n: int) -> "PermGroup":
        return cls(n, (cycle_perm(n, tuple(range(n))),) if n >= 2 else ())

    @classmethod
    def trivial(cls, n: int) -> "PermGroup":
        return cls(n, ())

    def chain(self, base_prefix: Sequence[int] = ()) -> StabChain:
        key = tuple(base_prefix)
        if key not in self._chains:
            self._chains[key] = schreier_sims(self.degree, self.generators, key)
        return self._chains[key]

    def order(self) -> int:
        return self.chain().order()

    def __contains__(self, g) -> bool:
        return self.chain().contains(tuple(g))

    def elements(self) -> Iterator[Perm]:
        return self.chain().elements()

    def pointwise_stabilizer(self, B: Iterable[int]) -> "PermGroup":
        key = frozenset(B)
        if key not in self._pstab:
            if not key:
                self._pstab[key] = self
            else:
                ch = self.chain(sorted(key))
                gens = tuple(s for s in ch.strong if all(s[b] == b for b in key))
                sub = PermGroup(self.degree, gens)
                # the chain below the prefix is a valid chain for the stabilizer
                k = len(key)
                sub._chains[()] = StabChain(self.degree, ch.base[k:], list(gens), ch.transversals[k:])
                self._pstab[key] = sub
        return self._pstab[key]

    def orbit_partition(self) -> dict[int, frozenset]:
        """Map each point to its orbit."""
        if "all" not in self._orbits:
            parent = list(range(self.degree))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for g in self.generators:
                for i, x in enumerate(g):
                    ri, rx = find(i), find(x)
                    if ri != rx:
                        parent[max(ri, rx)] = min(ri, rx)
            classes: dict[int, set] = {}
            for i in range(self.degree):
                classes.setdefault(find(i), set()).add(i)
            frozen = {r: frozenset(c) for r, c in classes.items()}
            self._orbits["all"] = {i: frozen[find(i)] for i in range(self.degree)}
        return self._orbits["all"]

    def orbit(self, x: int) -> frozenset:
        return self.orbit_partition()[x]

    def to_json(self) -> dict:
        return {"domain_size": self.degree, "generators": [list(g) for g in self.generators]}

    @classmethod
    def from_json(cls, doc: dict) -> "PermGroup":
        try:
            n = int(doc["domain_size"])
            gens = tuple(tuple(int(x) for x in g) for g in doc["generators"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GroupError(f"malformed group document: {exc!r}") from exc
        return cls(n, gens)

    def __repr__(self):
        return f"PermGroup(degree={self.degree}, gens=[{', '.join(fmt_cycles(g) for g in self.generators)}])"


def naive_elements(P: PermGroup) -> set[Perm]:
    """Closure of the generators by breadth-first multiplication (test oracle)."""
    e = identity(P.degree)
    seen = {e}
    queue = deque([e])
    while queue:
        g = queue.popleft()
        for s in P.generators:
            h = compose(s, g)
            if h not in seen:
                seen.add(h)
                queue.append(h)
    return seen


def set_orbit(gens: Sequence[Perm], S: Iterable[int]) -> set[frozenset]:
    start = frozenset(S)
    seen = {start}
    queue = deque([start])
    while queue:
        X = queue.popleft()
        for g in gens:
            Y = image_set(g, X)
            if Y not in seen:
                seen.add(Y)
                queue.append(Y)
    return seen


def tuple_orbits(P: PermGroup, k: int) -> list[frozenset]:
    """Orbits of P on ``range(n)**k``, ordered by least element."""
    n = P.degree
    seen = set()
    orbits = []
    for t in itertools.product(range(n), repeat=k):
        if t in seen:
            continue
        orb = {t}
        queue = deque([t])
        while queue:
            u = queue.popleft()
            for g in P.generators:
                v = tuple(g[x] for x in u)
                if v not in orb:
                    orb.add(v)
                    queue.append(v)
        seen |= orb
        orbits.append(frozenset(orb))
    return orbits


# -- backtrack search ----------------------------------------------------------


def search(
    P: PermGroup,
    base_prefix: Sequence[int],
    prune: Callable[[int, int], bool],
    accept: Callable[[Perm], bool] = lambda g: True,
) -> Iterator[Perm]:
    """Enumerate elements g of P, pruning on base-point images.

    ``prune(b, x)`` returns False when no wanted element maps base point b
    to x; images of earlier base points are fixed by later levels, so the
    test is exact at every node.
    """
    ch = P.chain(base_prefix)
    levels = [sorted(t.items()) for t in ch.transversals]
    base = ch.base

    def rec(lvl, g):
        if lvl == len(levels):
            if accept(g):
                yield g
            return
        b = base[lvl]
        for _, u in levels[lvl]:
            h = compose(g, u)
            if prune(b, h[b]):
                yield from rec(lvl + 1, h)

    yield from rec(0, identity(P.degree))


def _generated_subgroup(n: int, elements: Iterable[Perm]) -> PermGroup:
    gens: list[Perm] = []
    chain = schreier_sims(n, [])
    for g in elements:
        if not chain.contains(g):
            gens.append(g)
            chain = schreier_sims(n, gens)
    G = PermGroup(n, tuple(gens))
    G._chains[()] = chain
    return G


def setwise_stabilizer(P: PermGroup, B: Iterable[int]) -> PermGroup:
    S = frozenset(B)
    prefix = sorted(S)
    found = search(
        P,
        prefix,
        prune=lambda b, x: (x in S) == (b in S),
        accept=lambda g: image_set(g, S) == S,
    )
    return _generated_subgroup(P.degree, found)


def stabilizer(P: PermGroup, B: Iterable[int], mode: str = "pointwise") -> PermGroup:
    if any(not (0 <= b < P.degree) for b in B):
        raise GroupError("stabilized set must lie in the domain")
    if mode == "pointwise":
        return P.pointwise_stabilizer(B)
    if mode == "setwise":
        return setwise_stabilizer(P, B)
    raise GroupError(f"unknown stabilizer mode {mode!r}")


def find_set_mapping(P: PermGroup, A: Iterable[int], B: Iterable[int], C: Iterable[int] = ()) -> Perm | None:
    """Some g in P with g[A] = B and g fixing C pointwise, or None."""
    A, B, C = frozenset(A), frozenset(B), frozenset(C)
    if len(A) != len(B):
        return None
    if (A & C) != (B & C):
        return None
    G = P.pointwise_stabilizer(C)
    prefix = sorted(A - C)
    moved = A - C
    for g in search(
        G,
        prefix,
        prune=lambda b, x: (b not in moved) or x in B,
        accept=lambda g: image_set(g, A) == B,
    ):
        return g
    return None


# -- automorphism search ---------------------------------------------------------


def _refine(M, colors: list) -> list[int]:
    """Colour refinement over all relations; returns canonical integer colours."""
    n = M.size
    incid: list[list] = [[] for _ in range(n)]
    for name in M.signature.names:
        for row in M.tables[name]:
            for pos, x in enumerate(row):
                incid[x].append((name, pos, row))
    cur = list(colors)
    while True:
        sigs = []
        for v in range(n):
            ms = sorted((name, pos, tuple(cur[y] for y in row)) for name, pos, row in incid[v])
            sigs.append((cur[v], tuple(ms)))
        palette = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [palette[s] for s in sigs]
        if len(set(new)) == len(set(cur)):
            return new
        cur = new


def _consistent(M, f: dict, x: int, y: int) -> bool:
    """Can x -> y be added to partial isomorphism f?"""
    dom = list(f) + [x]
    g = dict(f)
    g[x] = y
    for name, arity in M.signature.relations:
        table = M.tables[name]
        if not table:
            continue
        for row in itertools.product(dom, repeat=arity):
            if x not in row:
                continue
            if (row in table) != (tuple(g[z] for z in row) in table):
                return False
    return True


def _extend_to_automorphism(M, f: dict, colors_src: list, colors_dst: list) -> Perm | None:
    n = M.size
    order = [v for v in range(n) if v not in f]
    used = set(f.values())

    def rec(i):
        if i == len(order):
            return tuple(f[v] for v in range(n))
        x = order[i]
        for y in range(n):
            if y in used or colors_dst[y] != colors_src[x]:
                continue
            if _consistent(M, f, x, y):
                f[x] = y
                used.add(y)
                res = rec(i + 1)
                if res is not None:
                    return res
                del f[x]
                used.discard(y)
        return None

    return rec(0)


def automorphism_group(M) -> PermGroup:
    """Aut(M) by individualisation/refinement backtracking.

    Works level by level down the base 0, 1, ..., n-1: at level i it looks
    for automorphisms fixing 0..i-1 and sending i to each colour-compatible
    point not already in the orbit of i, which yields a strong generating set.
    """
    n = M.size
    base_colors = _refine(M, [0] * n)
    gens: list[Perm] = []
    for i in reversed(range(n)):
        level_gens = [g for g in gens if all(g[j] == j for j in range(i))]
        orbit = _orbit_of(i, level_gens)
        for w in range(n):
            if w in orbit or base_colors[w] != base_colors[i] or w < i:
                continue
            fixed = {j: j for j in range(i)}
            src = list(base_colors)
            dst = list(base_colors)
            for j in range(i):
                src[j] = dst[j] = n + 1 + j
            src[i] = dst[w] = 2 * n + 2
            src_c = _refine(M, src)
            dst_c = _refine(M, dst)
            if sorted(src_c) != sorted(dst_c):
                continue
            if not _consistent(M, fixed, i, w):
                continue
            f = dict(fixed)
            f[i] = w
            g = _extend_to_automorphism(M, f, src_c, dst_c)
            if g is not None:
                gens.append(g)
                level_gens.append(g)
                orbit = _orbit_of(i, level_gens)
    return PermGroup(n, tuple(gens))


def _orbit_of(x: int, gens: Sequence[Perm]) -> set[int]:
    orb = {x}
    queue = deque([x])
    while queue:
        y = queue.popleft()
        for g in gens:
            z = g[y]
            if z not in orb:
                orb.add(z)
                queue.append(z)
    return orb


def brute_force_automorphisms(M) -> list[Perm]:
    """Every permutation preserving all relations (oracle; n <= 8)."""
    out = []
    for p in itertools.permutations(range(M.size)):
        if all(frozenset(tuple(p[x] for x in r) for r in M.tables[nm]) == M.tables[nm] for nm in M.signature.names):
            out.append(p)
    return out


# -- instance-level congruences (delegating to ActionInstance) --------------------------


def orbit_over(inst, a: int, B: Iterable[int]) -> frozenset:
    """{a' : a' is congruent to a over B} in the instance."""
    return inst.orbit_over(a, frozenset(B))


def set_congruent(inst, A: Iterable[int], B: Iterable[int], C: Iterable[int]):
    """Witness (permutation or partial map) that A is congruent to B over C, else None."""
    return inst.set_congruent(frozenset(A), frozenset(B), frozenset(C))
