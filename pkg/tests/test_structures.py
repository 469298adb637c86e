import pytest
from hypothesis import given
from hypothesis import strategies as st

from frlab.groups import automorphism_group, brute_force_automorphisms
from frlab.structures import (
    FinStructure,
    Signature,
    StructureError,
    cycle_graph,
    graph,
    induced_substructure,
    is_embedding,
    is_partial_isomorphism,
    linear_order,
    paired_equivalence,
    qf_type,
    ultrahomogenize,
)


def test_graph_symmetric_rows():
    G = graph(3, [(0, 1)])
    assert G.holds("E", (0, 1)) and G.holds("E", (1, 0))
    assert not G.holds("E", (0, 2))


def test_out_of_range_row_rejected():
    with pytest.raises(StructureError):
        FinStructure(Signature.of(E=2), 2, {"E": {(0, 5)}})


def test_arity_mismatch_rejected():
    with pytest.raises(StructureError):
        FinStructure(Signature.of(E=2), 3, {"E": {(0, 1, 2)}})


def test_json_round_trip():
    M = paired_equivalence(3)
    assert FinStructure.from_json(M.to_json()) == M


def test_malformed_json():
    with pytest.raises(StructureError):
        FinStructure.from_json({"signature": [{"name": "E"}], "size": 2, "tables": {}})


def test_induced_substructure_relabels():
    C5 = cycle_graph(5)
    sub, index = induced_substructure(C5, [0, 2, 3])
    assert sub.size == 3
    # only 2-3 is an edge among {0,2,3}
    assert len(sub.tables["E"]) == 2
    assert index == {0: 0, 2: 1, 3: 2}


def test_embedding_and_partial_iso():
    P = graph(2, [(0, 1)])
    C4 = cycle_graph(4)
    assert is_embedding({0: 0, 1: 1}, P, C4)
    assert not is_embedding({0: 0, 1: 2}, P, C4)
    assert is_partial_isomorphism(C4, {0: 1, 1: 2})
    assert not is_partial_isomorphism(C4, {0: 0, 1: 2})


def test_qf_type_distinguishes_edges():
    C4 = cycle_graph(4)
    assert qf_type(C4, (0, 1)) == qf_type(C4, (1, 2))
    assert qf_type(C4, (0, 1)) != qf_type(C4, (0, 2))


@pytest.mark.parametrize(
    "M, order",
    [(cycle_graph(4), 8), (cycle_graph(5), 10), (cycle_graph(6), 12), (paired_equivalence(3), 48), (linear_order(4), 1), (graph(4, [(0, 1), (1, 2)]), 2)],
)
def test_automorphism_orders_match_backtracking_oracle(M, order):
    assert automorphism_group(M).order() == order == len(brute_force_automorphisms(M))


def test_ultrahomogenize_four_cycle():
    C4 = cycle_graph(4)
    U = ultrahomogenize(C4, 2)
    assert automorphism_group(U).order() == 8
    # adjacent and antipodal pairs land in different binary relations
    adj = {n for n in U.signature.names if U.signature.arity(n) == 2 and U.holds(n, (0, 1))}
    anti = {n for n in U.signature.names if U.signature.arity(n) == 2 and U.holds(n, (0, 2))}
    assert adj and anti and not adj & anti


edges = st.integers(2, 6).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] < e[1]))))


@given(edges)
def test_aut_group_matches_oracle_on_random_graphs(ne):
    n, E = ne
    M = graph(n, E)
    assert automorphism_group(M).order() == len(brute_force_automorphisms(M))


@given(edges, st.randoms(use_true_random=False))
def test_relabel_is_isomorphism(ne, rnd):
    n, E = ne
    M = graph(n, E)
    perm = list(range(n))
    rnd.shuffle(perm)
    N = M.relabel(perm)
    assert is_embedding(dict(enumerate(perm)), M, N)
