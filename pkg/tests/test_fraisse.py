import pytest
from hypothesis import given
from hypothesis import strategies as st

from frlab.fraisse import (
    FraisseClassSpec,
    RequirementStarved,
    age,
    amalgamate,
    build_limit,
    check_limit_properties,
    embeds,
    extension_rate,
    has_amalgamation,
    in_class,
    induced_substructure,
    is_isomorphic,
    members,
)
from frlab.structures import FinStructure, Signature, cycle_graph, empty_structure, graph, linear_order, paired_equivalence

GRAPHS = FraisseClassSpec.builtin("graphs")
PAIRS = FraisseClassSpec.builtin("pairs")
ORDERS = FraisseClassSpec.builtin("linear_orders")


@pytest.mark.parametrize(
    "name, counts",
    # isomorphism classes of members of size 1..4, from the exhaustive scan
    [("graphs", [1, 2, 4, 11]), ("linear_orders", [1, 1, 1, 1]), ("pairs", [1, 2, 2, 3]), ("sets", [1, 1, 1, 1])],
)
def test_member_counts(name, counts):
    spec = FraisseClassSpec.builtin(name)
    assert [len(members(spec, n)) for n in range(1, 5)] == counts


def test_empty_structure_in_every_class():
    for name in ("graphs", "linear_orders", "pairs", "sets"):
        spec = FraisseClassSpec.builtin(name)
        assert in_class(spec, empty_structure(spec.signature))


def test_pairs_rejects_three_element_class():
    assert not in_class(PAIRS, graph(3, [(0, 1), (1, 2)]))
    assert in_class(PAIRS, paired_equivalence(2))


def test_age_of_four_cycle():
    found = age(cycle_graph(4), 3)
    assert len(found) == 5
    three = [A for A in found if A.size == 3]
    assert len(three) == 1 and is_isomorphic(three[0], graph(3, [(0, 1), (1, 2)]))


def test_age_of_paired_equivalence():
    assert len(age(paired_equivalence(3), 2)) == 4


def test_age_spec_membership():
    spec = FraisseClassSpec.age_of(cycle_graph(5))
    assert in_class(spec, graph(3, [(0, 1), (1, 2)]))
    assert not in_class(spec, graph(3, [(0, 1), (1, 2), (0, 2)]))


def test_forbidden_spec():
    spec = FraisseClassSpec.forbidden([graph(3, [(0, 1), (1, 2), (0, 2)])])
    assert in_class(spec, cycle_graph(4))
    assert not in_class(spec, graph(4, [(0, 1), (1, 2), (0, 2), (2, 3)]))


def test_spec_json_round_trip():
    spec = FraisseClassSpec.forbidden([graph(2, [(0, 1)])])
    assert FraisseClassSpec.from_json(spec.to_json()).to_json() == spec.to_json()


def test_graphs_disjoint_amalgamation_to_four():
    assert has_amalgamation(GRAPHS, 4, "disjoint").ok


def test_pairs_disjoint_counterexample_and_plain_ok():
    v = has_amalgamation(PAIRS, 3, "disjoint")
    assert not v.ok
    assert v.B.size <= 3 and v.C.size <= 3
    # both sides give the base point a partner: disjointness would need degree 2
    assert len(v.B.tables["E"]) == 2 and len(v.C.tables["E"]) == 2
    assert has_amalgamation(PAIRS, 3, "plain").ok


def test_disjoint_success_implies_plain_with_same_D():
    A = empty_structure(GRAPHS.signature, 1)
    B = graph(2, [(0, 1)])
    C = graph(2, [])
    d = amalgamate(GRAPHS, A, B, C, {0: 0}, {0: 0}, "disjoint")
    p = amalgamate(GRAPHS, A, B, C, {0: 0}, {0: 0}, "plain")
    assert d.ok and p.ok
    assert d.D.size == 3


def test_linear_orders_amalgamate():
    A = linear_order(1)
    v = amalgamate(ORDERS, A, linear_order(2), linear_order(2), {0: 0}, {0: 0}, "plain")
    assert v.ok


def test_build_limit_deterministic():
    a = build_limit(GRAPHS, 12, 2, seed=3)
    b = build_limit(GRAPHS, 12, 2, seed=3)
    assert a.structure == b.structure and a.core == b.core


def test_build_limit_empty():
    assert build_limit(GRAPHS, 0, 3).structure.size == 0


def test_graph_limit_core_and_uniqueness():
    builds = [build_limit(GRAPHS, 24, 3, seed=s) for s in (0, 1)]
    for b in builds:
        hit, total = extension_rate(GRAPHS, b.structure, 3, b.core)
        assert hit == total == 577
        assert len(b.core) == 8
    cores = [induced_substructure(b.structure, b.core)[0] for b in builds]
    assert is_isomorphic(*cores)


def test_strict_build_reports_starvation():
    with pytest.raises(RequirementStarved):
        build_limit(GRAPHS, 6, 3, strict=True)


def test_check_limit_properties_four_cycle():
    rep = check_limit_properties(cycle_graph(4), GRAPHS, 2)
    assert rep.clause1_rate == 1.0
    assert rep.clause2_rate < 1.0


def test_check_limit_properties_empty_vacuous():
    rep = check_limit_properties(empty_structure(GRAPHS.signature), GRAPHS, 0)
    assert rep.clause1_rate == rep.clause2_rate == rep.clause3_rate == 1.0


@pytest.mark.parametrize("name", ["graphs", "linear_orders", "pairs", "sets"])
def test_age_of_limit_inside_class(name):
    spec = FraisseClassSpec.builtin(name)
    M = build_limit(spec, 10, 2).structure
    assert all(in_class(spec, A) for A in age(M, 3))


@given(st.integers(0, 2**32))
def test_limit_is_class_member_for_any_seed(seed):
    b = build_limit(PAIRS, 8, 2, seed)
    assert in_class(PAIRS, b.structure)


def test_embeds():
    assert embeds(graph(2, [(0, 1)]), cycle_graph(4))
    assert not embeds(graph(3, [(0, 1), (1, 2), (0, 2)]), cycle_graph(4))


def test_signature_mismatch_in_membership():
    from frlab.structures import StructureError

    M = FinStructure(Signature.of(R=1), 1, {"R": {(0,)}})
    with pytest.raises(StructureError):
        in_class(GRAPHS, M)
