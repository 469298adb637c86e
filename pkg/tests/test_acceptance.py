"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per criterion is
printed in the terminal summary.  ``python tests/test_acceptance.py`` does the
same without pytest.
"""

import itertools
import time

from frlab.fraisse import FraisseClassSpec, build_limit, has_amalgamation, induced_substructure, is_isomorphic
from frlab.involve import run_involvement
from frlab.props import enumerated_closures, run_suite
from frlab.catalog import builtin_instance
from frlab.support import check_support_axioms, check_support_rank_compat, pair_index

GRAPHS = FraisseClassSpec.builtin("graphs")
PAIRS = FraisseClassSpec.builtin("pairs")


class Timer:
    def __init__(self, limit: float):
        self.limit = limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False

    def check(self):
        assert self.elapsed < self.limit, f"took {self.elapsed:.1f}s, limit {self.limit}s"


def _clean(rep, *names):
    for name in names:
        r = rep.prop(name)
        assert r.failed == 0 and r.unresolved == 0, r.to_json()
        assert r.passed > 0, f"{name}: no cases checked"


def test_criterion_01_deissler_rank_on_symmetric_groups():
    """Drk on S3..S7 matches the literal-recursion oracle; Drk(a, {}) = n-1."""
    with Timer(10) as t:
        rep = run_suite("rank-oracle", max_n=7)
    _clean(rep, "drk-equals-oracle", "drk-empty-is-n-minus-1")
    assert rep.prop("drk-equals-oracle").passed == sum(n * 2**n for n in range(3, 8))
    assert rep.prop("drk-empty-is-n-minus-1").passed == sum(range(3, 8))
    t.check()


def test_criterion_02_krk_below_drk_and_basic_facts():
    """Krk <= Drk and the three basic facts on 200 seeded fixed instances."""
    with Timer(60) as t:
        a = run_suite("krk-le-drk", seed=0, count=200)
        b = run_suite("basic-facts", seed=0, count=200)
    _clean(a, "krk-le-drk")
    _clean(b, "monotone-in-B", "fact-2", "fact-3")
    t.check()


def test_criterion_03_finite_domain_totality():
    """Ranks finite everywhere, clmin is constant-full, oracle agrees for domain <= 6."""
    with Timer(60) as t:
        rep = run_suite("totality", seed=0, count=200, oracle_max=6)
    _clean(rep, "ranks-finite", "clmin-constant-full", "oracle-agrees")
    t.check()


def test_criterion_04_four_forms_agree():
    """Every enumerated invariant closure on domains <= 4 gets one verdict from all forms."""
    with Timer(300) as t:
        rep = run_suite("cl-equivalence")
    _clean(rep, "forms-agree", "only-constant-full-disjointifying", "group-types")
    groups = {name for name, _ in enumerated_closures()}
    assert len(groups) >= 3
    t.check()


def test_criterion_05_minimality():
    """clmin(B) is inside cl(B) for every disjointifying enumerated closure."""
    rep = run_suite("minimality")
    _clean(rep, "clmin-below-disjointifying")


def test_criterion_06_weak_transitivity_and_one_side():
    """Weak transitivity (both directions) and the one-side lemma, exhaustive plus 1000 samples."""
    wt = run_suite("weak-transitivity", seed=0, samples=1000)
    one = run_suite("one-side", seed=0, samples=1000)
    _clean(one, "one-side")
    _clean(wt, "weak-transitivity-backward", "symmetry", "monotonicity")
    iff = wt.prop("weak-transitivity")
    assert iff.failed == 0, f"biconditional fails in {iff.failed} cases; first: {iff.witness}"


def _pairs_member(n, edges):
    """Independent membership test: symmetric, irreflexive, every point has at most one partner."""
    if any(a == b or (b, a) not in edges for a, b in edges):
        return False
    return all(sum(1 for a, _ in edges if a == x) <= 1 for x in range(n))


def test_criterion_07_amalgamation():
    """Graphs: disjoint amalgamation to size 4.  Pairs: disjoint fails at size <= 3, plain holds."""
    with Timer(120) as t:
        graphs = has_amalgamation(GRAPHS, 4, "disjoint")
        pairs_disjoint = has_amalgamation(PAIRS, 3, "disjoint")
        pairs_plain = has_amalgamation(PAIRS, 3, "plain")
    assert graphs.status == "holds_up_to" and graphs.checked > 0
    assert pairs_plain.status == "holds_up_to"
    v = pairs_disjoint
    assert v.status == "counterexample"
    assert max(v.A.size, v.B.size, v.C.size) <= 3
    # the base point has a partner in B and another in C, so any disjoint union gives it two
    base = v.A.size
    assert base == 1
    nb, nc = v.B.size, v.C.size
    b_edges = set(map(tuple, v.B.tables["E"]))
    c_edges = set(map(tuple, v.C.tables["E"]))
    n = nb + nc - base
    c_map = {v.g[0]: v.f[0], **{y: nb + i for i, y in enumerate(y for y in range(nc) if y != v.g[0])}}
    forced = b_edges | {(c_map[x], c_map[y]) for x, y in c_edges}
    free = [(x, y) for x in range(nb) for y in range(nb, n)]
    for k in range(len(free) + 1):
        for extra in itertools.combinations(free, k):
            edges = forced | set(extra) | {(y, x) for x, y in extra}
            assert not _pairs_member(n, edges)
    t.check()


def _brute_extension_count(M, core, depth):
    adj = {x: set() for x in range(M.size)}
    for x, y in M.tables["E"]:
        adj[x].add(y)
    hit = total = 0
    for k in range(depth + 1):
        for S in itertools.combinations(core, k):
            for pattern in itertools.product((0, 1), repeat=k):
                total += 1
                want = {s for s, bit in zip(S, pattern) if bit}
                if any(z not in S and adj[z] & set(S) == want for z in range(M.size)):
                    hit += 1
    return hit, total


def test_criterion_08_graph_limit_extension_property():
    """build_limit(graphs, 24, 3): every depth-3 extension over the core realized; cores isomorphic."""
    with Timer(120) as t:
        builds = [build_limit(GRAPHS, 24, 3, seed=s) for s in (0, 1)]
    for b in builds:
        assert b.structure.size == 24
        hit, total = _brute_extension_count(b.structure, sorted(b.core), 3)
        assert total > 1 and hit == total, f"{hit}/{total} over a core of {len(b.core)}"
    cores = [induced_substructure(b.structure, b.core)[0] for b in builds]
    assert is_isomorphic(*cores)
    t.check()


def _involvement_ok(rep, sigma):
    assert rep.stages == len(rep.history) - 1
    for rec in rep.history[1:]:
        assert set(rec.checks) == {f"({k})" for k in range(1, 7)}, rec.stage
    assert rep.color_ok and rep.color_checks == len(rep.g) > 0


def test_criterion_09_involvement_runs():
    """Colored back-and-forth: graphs with sigma=(0 1), 12 stages; pairs with a 3-cycle, 9 stages."""
    for spec, cl, sigma, n in ((GRAPHS, "identity", {0: 1, 1: 0}, 12), (PAIRS, "add-partners", {0: 1, 1: 2, 2: 0}, 9)):
        with Timer(120) as t:
            rep = run_involvement(spec, cl, sigma, n)
        _involvement_ok(rep, sigma)
        t.check()


def test_criterion_10_decompose():
    """500 seeded decompositions: composition identity and both stabilizer memberships."""
    with Timer(10) as t:
        rep = run_suite("decompose", seed=0, samples=500)
    _clean(rep, "composition", "stabilizers", "involution")
    assert rep.prop("composition").passed == 500
    t.check()


def test_criterion_11_transversal_quotient():
    """Homomorphism on 200x200 sampled pairs; a preimage for each of the 24 targets."""
    with Timer(10) as t:
        rep = run_suite("quotient", seed=0, samples=200, delta_order=2, n_orbits=4)
    _clean(rep, "homomorphism", "surjective")
    assert rep.prop("homomorphism").passed == 200 * 200
    assert rep.prop("surjective").passed == 24
    t.check()


def test_criterion_12_bireducibility():
    """Both token-scale reductions preserve and reflect equivalence on 200 + 200 pairs."""
    with Timer(30) as t:
        rep = run_suite("bireducibility", seed=0, samples=200)
    _clean(rep, "eplus-to-EQY", "EQY-to-eplus")
    assert rep.prop("eplus-to-EQY").passed == rep.prop("EQY-to-eplus").passed == 200
    t.check()


def test_criterion_13_support_axioms_on_pairs_limit():
    """pair-index support: three axioms at (3, 24) and supp(aB) = supp(B) when Krk is finite."""
    with Timer(60) as t:
        inst = builtin_instance("pairs-limit")
        verdicts = [check_support_axioms(pair_index(inst).on(inst.fork()), k, 3, 24) for k in (1, 2, 3)]
        compat = check_support_rank_compat(pair_index(inst), inst, 3, 2)
    for k, v in enumerate(verdicts, 1):
        assert v.status == "holds" and v.checked > 0, (k, v.to_json())
    assert compat["ok"] and compat["finite_rank"] > 0
    t.check()


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted((n, f) for n, f in globals().items() if n.startswith("test_criterion_")):
        t0 = time.perf_counter()
        try:
            fn()
            verdict = "PASS"
        except AssertionError as exc:
            verdict, failed = f"FAIL ({str(exc).splitlines()[0][:120]})", failed + 1
        print(f"criterion {name[15:17]} {verdict} [{time.perf_counter() - t0:.1f}s] {fn.__doc__.splitlines()[0]}")
    sys.exit(1 if failed else 0)
