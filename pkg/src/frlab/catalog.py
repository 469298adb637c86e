"""Named instances and seeded random instance generators."""

from __future__ import annotations

import random
import re

from .fraisse import FraisseClassSpec
from .groups import PermGroup, automorphism_group
from .instance import ExtendableInstance, FixedInstance
from .structures import cycle_graph, graph, paired_equivalence


class UnknownBuiltin(KeyError):
    pass


def delta_group(k: int, m: int) -> PermGroup:
    """Permutations of k*m points commuting with the free Z/k action t*k + e -> t*k + (e+1) mod k."""
    n = k * m
    gens = []
    if k > 1:
        rot = list(range(n))
        for e in range(k):
            rot[e] = (e + 1) % k
        gens.append(tuple(rot))
    if m > 1:
        swap = list(range(n))
        for e in range(k):
            swap[e], swap[k + e] = k + e, e
        gens.append(tuple(swap))
        cyc = tuple(((t + 1) % m) * k + e for t in range(m) for e in range(k))
        gens.append(cyc)
    return PermGroup(n, tuple(gens)) if gens else PermGroup.trivial(n)


_LIMITS = {"graphs-limit": "graphs", "dlo-limit": "linear_orders", "pairs-limit": "pairs", "sets-limit": "sets"}

BUILTIN_NAMES = (
    [f"s{n}" for n in range(1, 8)]
    + [f"c{n}" for n in range(3, 7)]
    + ["e2-4", "e2-6", "cycle4", "cycle5"]
    + list(_LIMITS)
    + ["delta-act(k,m)"]
)


def builtin_instance(name: str, n_initial: int = 8, ext_depth: int = 2, growth_budget: int = 64, depth: int = 4):
    """Resolve a builtin instance name such as ``s4``, ``e2-6``, ``pairs-limit`` or ``delta-act(2,3)``."""
    key = name.strip().lower()
    if m := re.fullmatch(r"s(\d+)", key):
        return FixedInstance(PermGroup.symmetric(int(m[1])), name=key)
    if m := re.fullmatch(r"c(\d+)", key):
        return FixedInstance(PermGroup.cyclic(int(m[1])), cycle_graph(int(m[1])) if int(m[1]) > 2 else None, name=key)
    if m := re.fullmatch(r"e2-(\d+)", key):
        n = int(m[1])
        if n % 2:
            raise UnknownBuiltin(f"{name}: paired equivalence needs an even number of points")
        return FixedInstance.of_structure(paired_equivalence(n // 2), name=key)
    if m := re.fullmatch(r"cycle(\d+)", key):
        return FixedInstance.of_structure(cycle_graph(int(m[1])), name=key)
    if m := re.fullmatch(r"delta-act\((\d+),\s*(\d+)\)", key):
        return FixedInstance(delta_group(int(m[1]), int(m[2])), name=key)
    if key in _LIMITS:
        spec = FraisseClassSpec.builtin(_LIMITS[key])
        return ExtendableInstance.seeded(spec, n_initial, ext_depth, growth_budget, depth, name=key)
    raise UnknownBuiltin(f"unknown builtin instance {name!r}; known: {', '.join(BUILTIN_NAMES)}")


def random_graph_instance(rng: random.Random, n: int, p: float = 0.5) -> FixedInstance:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    M = graph(n, edges)
    return FixedInstance(automorphism_group(M), M, name=f"aut(G{n}:{sorted(edges)})")


def seeded_fixed_instances(seed: int, count: int, max_domain: int = 7) -> list[FixedInstance]:
    """Catalog groups first, then automorphism groups of seeded random graphs, up to ``count``."""
    rng = random.Random(seed)
    named = [f"s{n}" for n in range(1, max_domain + 1)] + [f"c{n}" for n in range(3, min(6, max_domain) + 1)]
    named += [n for n in ("e2-4", "e2-6", "cycle5", "delta-act(2,2)", "delta-act(2,3)", "delta-act(3,2)") if _fits(n, max_domain)]
    out = [builtin_instance(n) for n in named][:count]
    while len(out) < count:
        out.append(random_graph_instance(rng, rng.randint(1, max_domain), rng.choice((0.3, 0.5, 0.7))))
    return out


def _fits(name: str, max_domain: int) -> bool:
    return builtin_instance(name).size <= max_domain
