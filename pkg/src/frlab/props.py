"""Seeded invariant suites.

Each suite evaluates one family of laws over a deterministic sample and
returns a :class:`PropsReport` listing pass/fail/unresolved counts per law,
with the first failing case shrunk by greedy element removal.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable

from .catalog import builtin_instance, seeded_fixed_instances
from .closure import (
    FORMS,
    all_subsets,
    enumerate_invariant_closures,
    indep,
    is_disjointifying,
    minimal_elements,
    random_invariant_closure,
)
from .fraisse import FraisseClassSpec, age, build_limit, in_class
from .groups import PermGroup, compose
from .instance import FixedInstance
from .oracles import RankOracle
from .rank import clmin, deissler_rank, krk
from .verdict import Verdict


@dataclass
class PropertyResult:
    name: str
    passed: int = 0
    failed: int = 0
    unresolved: int = 0
    witness: dict | None = None

    def record(self, ok: bool | None, witness: Callable[[], dict] | dict | None = None):
        if ok is None:
            self.unresolved += 1
        elif ok:
            self.passed += 1
        else:
            self.failed += 1
            if self.witness is None and witness is not None:
                self.witness = witness() if callable(witness) else witness

    @property
    def status(self) -> str:
        if self.failed:
            return "fail"
        return "unresolved" if self.unresolved else "pass"

    def to_json(self) -> dict:
        doc = {"property": self.name, "status": self.status, "passed": self.passed, "failed": self.failed, "unresolved": self.unresolved}
        if self.witness is not None:
            doc["witness"] = _jsonable(self.witness)
        return doc


@dataclass
class PropsReport:
    suite: str
    seed: int
    results: list = field(default_factory=list)

    def prop(self, name: str) -> PropertyResult:
        for r in self.results:
            if r.name == name:
                return r
        r = PropertyResult(name)
        self.results.append(r)
        return r

    @property
    def ok(self) -> bool:
        return all(r.failed == 0 for r in self.results)

    @property
    def status(self) -> str:
        if not self.ok:
            return "fail"
        return "unresolved" if any(r.unresolved for r in self.results) else "pass"

    def to_json(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "status": self.status, "properties": [r.to_json() for r in self.results]}


def _jsonable(x):
    if isinstance(x, (set, frozenset)):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def shrink(sets: dict[str, frozenset], still_fails: Callable[[dict], bool]) -> dict[str, frozenset]:
    """Greedy element removal: drop single elements from named sets while the failure persists."""
    cur = dict(sets)
    progress = True
    while progress:
        progress = False
        for key in list(cur):
            for x in sorted(cur[key]):
                trial = dict(cur)
                trial[key] = cur[key] - {x}
                if still_fails(trial):
                    cur = trial
                    progress = True
                    break
    return cur


# -- instance pools ------------------------------------------------------------------------

SMALL_GROUPS = ("s1", "s2", "s3", "s4", "c3", "c4", "e2-4", "cycle4", "trivial2", "trivial3")


def _small_instance(name: str) -> FixedInstance:
    if name.startswith("trivial"):
        return FixedInstance(PermGroup.trivial(int(name[7:])), name=name)
    return builtin_instance(name)


def enumerated_closures(names=SMALL_GROUPS):
    """(instance name, closure) for every invariant closure on each small group."""
    for name in names:
        inst = _small_instance(name)
        for cl in enumerate_invariant_closures(inst.group, 4):
            yield name, cl


def _sampled_closures(rng: random.Random, n_cases: int, lo: int = 5, hi: int = 7):
    pool = [builtin_instance(n) for n in ("s5", "s6", "s7", "c5", "c6", "e2-6", "cycle5", "delta-act(2,3)", "delta-act(3,2)")]
    pool = [p for p in pool if lo <= p.size <= hi]
    closures = {}
    for i in range(n_cases):
        inst = pool[rng.randrange(len(pool))]
        k = rng.randrange(4)
        key = (inst.name, k)
        if key not in closures:
            closures[key] = random_invariant_closure(inst, random.Random(f"{inst.name}:{k}"), density=rng.choice((0.15, 0.3, 0.5)))
        yield inst, closures[key]


def _random_subset(rng, U, max_size):
    return frozenset(rng.sample(list(U), rng.randint(0, min(max_size, len(U)))))


# -- closure suites ------------------------------------------------------------------------


def _wt_holds(cl, A, B, C, b) -> tuple[bool, bool]:
    lhs = indep(cl, A, B, C)
    rhs = indep(cl, A, {b}, C) and indep(cl, A, B, C | {b})
    return lhs, rhs


def _wt_case(props: tuple, cl, A, B, C):
    """props = (iff, forward, backward) results; b ranges over minimal elements of B over C."""
    iff, fwd, back = props
    A, B = A | C, B | C
    for b in minimal_elements(cl, B, C):
        lhs, rhs = _wt_holds(cl, A, B, C, b)

        def wit(A=A, B=B, C=C, b=b, lhs=lhs):
            def bad(d):
                A2, B2, C2 = d["A"] | d["C"], d["B"] | d["C"] | {b}, d["C"]
                if b in cl(C2) or b not in minimal_elements(cl, B2, C2):
                    return False
                l2, r2 = _wt_holds(cl, A2, B2, C2, b)
                return l2 == lhs and l2 != r2

            small = shrink({"A": A - C, "B": B - C - {b}, "C": C}, bad)
            small["B"] = small["B"] | small["C"] | {b}
            small["A"] = small["A"] | small["C"]
            return {"closure": cl.to_json(), "b": b, **small, "A indep_C B": lhs, "A indep_C b and A indep_bC B": not lhs}

        iff.record(lhs == rhs, wit)
        if lhs:
            fwd.record(rhs, wit)
        if rhs:
            back.record(lhs, wit)


def _indep_laws(report_sym, report_mono, cl, A, B, C, rng):
    A, B = A | C, B | C
    report_sym.record(indep(cl, A, B, C) == indep(cl, B, A, C), lambda: {"A": A, "B": B, "C": C, "closure": cl.to_json()})
    if indep(cl, A, B, C):
        # primed triple keeps the standing hypothesis C <= C' <= A' & B'
        C2 = C | frozenset(x for x in A & B if rng.random() < 0.5)
        A2 = C2 | frozenset(x for x in A if rng.random() < 0.6)
        B2 = C2 | frozenset(x for x in B if rng.random() < 0.6)
        report_mono.record(indep(cl, A2, B2, C2), lambda: {"A": A, "B": B, "C": C, "A'": A2, "B'": B2, "C'": C2, "closure": cl.to_json()})


def suite_weak_transitivity(seed: int = 0, samples: int = 1000, **_) -> PropsReport:
    rep = PropsReport("weak-transitivity", seed)
    wt = (rep.prop("weak-transitivity"), rep.prop("weak-transitivity-forward"), rep.prop("weak-transitivity-backward"))
    sym, mono = rep.prop("symmetry"), rep.prop("monotonicity")
    rng = random.Random(seed)
    for _name, cl in enumerated_closures():
        U = list(cl.carrier.universe)
        subsets = all_subsets(U)
        for C in subsets:
            sup = [S for S in subsets if S >= C]
            for A in sup:
                for B in sup:
                    _wt_case(wt, cl, A, B, C)
                    _indep_laws(sym, mono, cl, A, B, C, rng)
    for inst, cl in _sampled_closures(rng, samples):
        U = inst.universe
        C = _random_subset(rng, U, 2)
        A = _random_subset(rng, U, 3)
        B = _random_subset(rng, U, 3)
        _wt_case(wt, cl, A, B, C)
        _indep_laws(sym, mono, cl, A, B, C, rng)
    return rep


def _one_side_case(res: PropertyResult, cl, a, b, C):
    inst = cl.carrier
    orb_a = inst.orbit_over(a, C)
    if not all(a2 in cl(C | {b}) for a2 in orb_a):
        res.record(True)
        return
    orb_b = inst.orbit_over(b, C)
    bad = [(a2, b2) for a2 in orb_a for b2 in orb_b if a2 not in cl(C | {b2})]
    res.record(not bad, lambda: {"a": a, "b": b, "C": C, "a'": bad[0][0], "b'": bad[0][1], "closure": cl.to_json()})


def suite_one_side(seed: int = 0, samples: int = 1000, **_) -> PropsReport:
    rep = PropsReport("one-side", seed)
    res = rep.prop("one-side")
    for _name, cl in enumerated_closures():
        U = list(cl.carrier.universe)
        for C in all_subsets(U):
            for a in U:
                for b in U:
                    _one_side_case(res, cl, a, b, C)
    rng = random.Random(seed)
    for inst, cl in _sampled_closures(rng, samples):
        U = list(inst.universe)
        _one_side_case(res, cl, rng.choice(U), rng.choice(U), _random_subset(rng, U, 3))
    return rep


def suite_cl_equivalence(seed: int = 0, **_) -> PropsReport:
    rep = PropsReport("cl-equivalence", seed)
    res, uniq = rep.prop("forms-agree"), rep.prop("only-constant-full-disjointifying")
    groups = set()
    for name, cl in enumerated_closures():
        verdicts = [is_disjointifying(cl, form) for form in FORMS]
        statuses = [v.status for v in verdicts]
        groups.add(name)
        res.record(len(set(statuses)) == 1, lambda: {"group": name, "closure": cl.to_json(), "verdicts": dict(zip(FORMS, statuses))})
        full = frozenset(cl.carrier.universe)
        is_full = cl(frozenset()) == full
        uniq.record(verdicts[-1].holds == is_full, lambda: {"group": name, "closure": cl.to_json(), "form4": verdicts[-1].to_json()})
    rep.prop("group-types").record(len(groups) >= 3, {"groups": sorted(groups)})
    return rep


def suite_minimality(seed: int = 0, **_) -> PropsReport:
    rep = PropsReport("minimality", seed)
    res = rep.prop("clmin-below-disjointifying")
    for name, cl in enumerated_closures():
        if not is_disjointifying(cl, 4).holds:
            continue
        cm = clmin(cl.carrier)
        for B in all_subsets(list(cl.carrier.universe)):
            res.record(cm(B) <= cl(B), lambda: {"group": name, "B": B, "clmin(B)": cm(B), "cl(B)": cl(B), "closure": cl.to_json()})
    return rep


# -- rank suites ---------------------------------------------------------------------------


def _queries(inst):
    U = list(inst.universe)
    for B in all_subsets(U):
        for a in U:
            yield a, B


def suite_rank_oracle(seed: int = 0, max_n: int = 7, **_) -> PropsReport:
    rep = PropsReport("rank-oracle", seed)
    drk_res, krk_res, top = rep.prop("drk-equals-oracle"), rep.prop("krk-equals-oracle"), rep.prop("drk-empty-is-n-minus-1")
    for n in range(3, max_n + 1):
        inst = builtin_instance(f"s{n}")
        P = inst.group
        od = RankOracle(P, with_krk=False)
        ok_ = RankOracle(P, with_krk=True) if n <= 6 else None
        for a, B in _queries(inst):
            d = deissler_rank(inst, a, B).value
            want = od.value(a, B)
            drk_res.record(d == want, {"n": n, "a": a, "B": B, "engine": d, "oracle": want})
            if ok_ is not None:
                k = krk(inst, a, B).value
                want_k = ok_.value(a, B)
                krk_res.record(k == want_k, {"n": n, "a": a, "B": B, "engine": k, "oracle": want_k})
        for a in inst.universe:
            top.record(deissler_rank(inst, a, ()).value == n - 1, {"n": n, "a": a})
    return rep


def suite_krk_le_drk(seed: int = 0, count: int = 200, **_) -> PropsReport:
    rep = PropsReport("krk-le-drk", seed)
    res = rep.prop("krk-le-drk")
    for inst in seeded_fixed_instances(seed, count):
        for a, B in _queries(inst):
            k, d = krk(inst, a, B), deissler_rank(inst, a, B)
            res.record(k.value <= d.value, lambda: {"instance": inst.name, "a": a, "B": B, "Krk": str(k), "Drk": str(d)})
    return rep


def suite_basic_facts(seed: int = 0, count: int = 200, **_) -> PropsReport:
    rep = PropsReport("basic-facts", seed)
    f1, f2, f3 = rep.prop("monotone-in-B"), rep.prop("fact-2"), rep.prop("fact-3")
    for inst in seeded_fixed_instances(seed, count):
        U = list(inst.universe)
        K = lambda a, B: krk(inst, a, B)
        for a, B in _queries(inst):
            base = K(a, B)
            for c in U:
                if c not in B:
                    sub = K(a, B | {c})
                    f1.record(sub.value <= base.value, lambda: {"instance": inst.name, "a": a, "B": B, "c": c})
            hyp2 = any(all(K(a, B | {c2}).is_finite for c2 in inst.orbit_over(c, B)) for c in U)
            if hyp2:
                f2.record(base.is_finite, lambda: {"instance": inst.name, "a": a, "B": B})
            orb = inst.orbit_over(a, B)
            hyp3 = all(K(a, B | {a2}).is_finite or K(a2, B | {a}).is_finite for a2 in orb)
            if hyp3:
                f3.record(base.is_finite, lambda: {"instance": inst.name, "a": a, "B": B})
    return rep


def suite_totality(seed: int = 0, count: int = 200, oracle_max: int = 6, **_) -> PropsReport:
    rep = PropsReport("totality", seed)
    fin, full, orc = rep.prop("ranks-finite"), rep.prop("clmin-constant-full"), rep.prop("oracle-agrees")
    for inst in seeded_fixed_instances(seed, count):
        U = frozenset(inst.universe)
        cm = clmin(inst)
        oracles = None
        if inst.size <= oracle_max:
            oracles = (RankOracle(inst.group, False), RankOracle(inst.group, True))
        for a, B in _queries(inst):
            d, k = deissler_rank(inst, a, B), krk(inst, a, B)
            fin.record(d.is_finite and k.is_finite, {"instance": inst.name, "a": a, "B": B})
            if oracles is not None:
                want = (oracles[0].value(a, B), oracles[1].value(a, B))
                orc.record((d.value, k.value) == want, {"instance": inst.name, "a": a, "B": B, "engine": (d.value, k.value), "oracle": want})
        for B in all_subsets(sorted(U)):
            full.record(cm(B) == U, lambda: {"instance": inst.name, "B": B, "clmin(B)": cm(B)})
    return rep


def suite_rank_invariance(seed: int = 0, count: int = 40, **_) -> PropsReport:
    rep = PropsReport("rank-invariance", seed)
    res = rep.prop("congruent-queries-equal")
    for inst in seeded_fixed_instances(seed, count):
        for g in inst.group.generators:
            for a, B in _queries(inst):
                gB = frozenset(g[b] for b in B)
                same = krk(inst, a, B) == krk(inst, g[a], gB) and deissler_rank(inst, a, B) == deissler_rank(inst, g[a], gB)
                res.record(same, {"instance": inst.name, "a": a, "B": B, "g": g})
    return rep


# -- involvement, support, tokens ------------------------------------------------------------


def suite_quotient(seed: int = 0, samples: int = 200, delta_order: int = 2, n_orbits: int = 4, **_) -> PropsReport:
    from .catalog import delta_group
    from .involve import quotient_preimage, transversal_quotient

    rep = PropsReport("quotient", seed)
    hom, surj = rep.prop("homomorphism"), rep.prop("surjective")
    rng = random.Random(seed)
    P = delta_group(delta_order, n_orbits)
    elems = []
    for _ in range(samples):
        g = tuple(range(P.degree))
        for _ in range(rng.randint(0, 6)):
            g = compose(g, rng.choice(P.generators))
        elems.append(g)
    f = lambda p: transversal_quotient(delta_order, n_orbits, p)
    for p, q in itertools.product(elems, repeat=2):
        hom.record(f(compose(p, q)) == compose(f(p), f(q)), lambda: {"pi": p, "rho": q})
    for sigma in itertools.permutations(range(n_orbits)):
        shifts = [rng.randrange(delta_order) for _ in range(n_orbits)]
        pre = quotient_preimage(delta_order, sigma, shifts)
        surj.record(pre in P and f(pre) == sigma, {"sigma": sigma})
    return rep


def decompose_samples(seed: int, count: int, n: int = 12):
    """Seeded (pi, u, v, W) with |supp pi| <= 6, |u|, |v| <= 3 and pi fixing u & v."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        u = frozenset(rng.sample(range(n), rng.randint(0, 3)))
        v = frozenset(rng.sample(range(n), rng.randint(0, 3)))
        pool = [x for x in range(n) if x not in u & v]
        S = rng.sample(pool, rng.randint(0, 6))
        img = S[:]
        rng.shuffle(img)
        pi = list(range(n))
        for a, b in zip(S, img):
            pi[a] = b
        W = frozenset(S) | u | v
        if n - len(W) >= len(u - v):
            out.append((tuple(pi), u, v, W))
    return out


def suite_decompose(seed: int = 0, samples: int = 500, **_) -> PropsReport:
    from .support import decompose_permutation, in_setwise_stabilizer

    rep = PropsReport("decompose", seed)
    comp, stab, inv = rep.prop("composition"), rep.prop("stabilizers"), rep.prop("involution")
    for pi, u, v, W in decompose_samples(seed, samples):
        s0, p1, s2 = decompose_permutation(pi, u, v, W)
        wit = {"pi": pi, "u": u, "v": v, "W": W}
        comp.record(compose(s2, compose(p1, s0)) == pi, wit)
        stab.record(in_setwise_stabilizer(s0, v) and in_setwise_stabilizer(p1, u) and all(p1[x] == x for x in u & v), wit)
        inv.record(compose(s0, s0) == tuple(range(len(pi))), wit)
    return rep


def token_pairs(seed: int, count: int, max_index: int = 6):
    """Seeded TokenSeq pairs; even-indexed pairs share their range by construction."""
    from .support import TokenSeq

    rng = random.Random(seed)
    alphabet = ["a", "b", "c", "d", "e"]
    out = []
    for i in range(count):
        sup = {k: rng.choice(alphabet) for k in rng.sample(range(max_index), rng.randint(0, max_index))}
        p = TokenSeq.make(sup, "z")
        if i % 2 == 0:
            vals = sorted(set(sup.values()))
            idx = rng.sample(range(2 * max_index), len(vals) + rng.randint(0, 2))
            q_sup = dict(zip(idx, vals))
            for k in idx[len(vals):]:
                q_sup[k] = rng.choice(vals) if vals else "z"
            q = TokenSeq.make(q_sup, "z")
        else:
            q = TokenSeq.make({k: rng.choice(alphabet) for k in rng.sample(range(max_index), rng.randint(0, max_index))}, "z")
        out.append((p, q))
    return out


def qpoint_pairs(seed: int, count: int, max_delta: int = 4, max_t: int = 6):
    """Seeded injective QPoint pairs; half are images of each other under a random Q-element."""
    from .support import QPoint

    rng = random.Random(seed)
    out = []
    for i in range(count):
        d = rng.randint(1, max_delta)
        w = rng.randint(1, max_t)
        vals = tuple(f"r{j}" for j in rng.sample(range(10 * d * w), d * w))
        y1 = QPoint(d, w, vals)
        if i % 2 == 0:
            sigma = list(range(w))
            rng.shuffle(sigma)
            y2 = y1.act(sigma, [rng.randrange(d) for _ in range(w)])
        else:
            vals2 = list(vals)
            if rng.random() < 0.5 and d * w > 1:
                vals2[rng.randrange(d * w)] = "fresh"
            else:
                rng.shuffle(vals2)
            y2 = QPoint(d, w, tuple(vals2))
        out.append((y1, y2))
    return out


def suite_bireducibility(seed: int = 0, samples: int = 200, **_) -> PropsReport:
    from .support import EQY_equiv, eplus_equiv, reduce_EQY_to_eplus, reduce_eplus_to_EQY

    rep = PropsReport("bireducibility", seed)
    fwd, back = rep.prop("eplus-to-EQY"), rep.prop("EQY-to-eplus")
    for p, q in token_pairs(seed, samples):
        width = max(len(p.range()), len(q.range()))
        yp, yq = reduce_eplus_to_EQY(p, 3, width), reduce_eplus_to_EQY(q, 3, width)
        fwd.record(eplus_equiv(p, q) == EQY_equiv(yp, yq), lambda: {"p": p.to_json(), "q": q.to_json()})
    for y1, y2 in qpoint_pairs(seed, samples):
        back.record(
            EQY_equiv(y1, y2) == eplus_equiv(reduce_EQY_to_eplus(y1), reduce_EQY_to_eplus(y2)),
            lambda: {"y1": y1.to_json(), "y2": y2.to_json()},
        )
    rep.prop("equivalent-share").record(True, {"note": "half of each sample is equivalent by construction"})
    return rep


def suite_involution(seed: int = 0, **_) -> PropsReport:
    from .involve import run_involvement

    rep = PropsReport("involution-inverse", seed)
    res = rep.prop("sigma-inverse-mirror")
    runs = [("graphs", "identity", {0: 1, 1: 0}, 12), ("graphs", "identity", {0: 1, 1: 2, 2: 0}, 10), ("pairs", "add-partners", {0: 1, 1: 2, 2: 0}, 9)]
    for spec_name, cl, sigma, n in runs:
        spec = FraisseClassSpec.builtin(spec_name)
        inv = {v: k for k, v in sigma.items()}
        a = run_involvement(spec, cl, sigma, n)
        b = run_involvement(spec, cl, inv, n, lead="B")
        common = [x for x in a.g if a.g[x] in b.g]
        res.record(all(b.g[a.g[x]] == x for x in common) and len(common) == len(a.g), {"spec": spec_name, "sigma": sigma})
    return rep


def suite_fraisse_age(seed: int = 0, **_) -> PropsReport:
    rep = PropsReport("fraisse-age", seed)
    res = rep.prop("age-inside-class")
    det = rep.prop("build-deterministic")
    for name, n in (("graphs", 10), ("linear_orders", 8), ("pairs", 10), ("sets", 5)):
        spec = FraisseClassSpec.builtin(name)
        M = build_limit(spec, n, 2, seed=seed).structure
        det.record(M == build_limit(spec, n, 2, seed=seed).structure, {"spec": name})
        for k in range(4):
            for A in age(M, k):
                res.record(in_class(spec, A), lambda: {"spec": name, "member": A.to_json()})
    return rep


SUITES: dict[str, Callable[..., PropsReport]] = {
    "weak-transitivity": suite_weak_transitivity,
    "one-side": suite_one_side,
    "cl-equivalence": suite_cl_equivalence,
    "minimality": suite_minimality,
    "rank-oracle": suite_rank_oracle,
    "krk-le-drk": suite_krk_le_drk,
    "basic-facts": suite_basic_facts,
    "totality": suite_totality,
    "rank-invariance": suite_rank_invariance,
    "quotient": suite_quotient,
    "decompose": suite_decompose,
    "bireducibility": suite_bireducibility,
    "involution-inverse": suite_involution,
    "fraisse-age": suite_fraisse_age,
}


def run_suite(name: str, seed: int = 0, **bounds) -> PropsReport:
    try:
        fn = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return fn(seed=seed, **{k: v for k, v in bounds.items() if v is not None})
