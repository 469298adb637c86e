import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from frlab.catalog import builtin_instance
from frlab.groups import compose
from frlab.props import decompose_samples, qpoint_pairs, token_pairs
from frlab.support import (
    DomainTooSmall,
    EQY_equiv,
    EQY_witness,
    QPoint,
    TokenSeq,
    check_support_axioms,
    check_support_rank_compat,
    constant_empty,
    constant_zero,
    decompose_permutation,
    eplus_equiv,
    in_setwise_stabilizer,
    orbit_patterns,
    pair_index,
    reduce_EQY_to_eplus,
    reduce_eplus_to_EQY,
)


@pytest.fixture(scope="module")
def pairs_limit():
    return builtin_instance("pairs-limit")


@pytest.mark.parametrize("which", [1, 2, 3])
def test_pair_index_axioms(pairs_limit, which):
    supp = pair_index(pairs_limit).on(pairs_limit.fork())
    v = check_support_axioms(supp, which, 3, 24)
    assert not v.fails and not v.unresolved


def test_constant_empty_fails_axiom_two():
    inst = builtin_instance("s4")
    assert check_support_axioms(constant_empty(inst), 2).fails


def test_constant_zero_fails_axiom_three_on_s4():
    v = check_support_axioms(constant_zero(builtin_instance("s4")), 3)
    assert v.fails
    assert sorted(v.witness["v'"]) == [1]


def test_rank_compat_on_pairs(pairs_limit):
    res = check_support_rank_compat(pair_index(pairs_limit), pairs_limit, 3, 2)
    assert res["ok"] and res["finite_rank"] > 0


def _check_decomposition(pi, u, v, W):
    p0, p1, p2 = decompose_permutation(pi, u, v, W)
    assert compose(p2, compose(p1, p0)) == tuple(pi)
    assert p0 == p2 and compose(p0, p0) == tuple(range(len(pi)))
    assert in_setwise_stabilizer(p0, v)
    assert in_setwise_stabilizer(p1, u)


def test_decompose_example():
    _check_decomposition((1, 0, 2, 3, 4, 5, 6, 7), {0}, {1}, {0, 1})


def test_decompose_seeded_cases():
    for pi, u, v, W in decompose_samples(11, 100):
        _check_decomposition(pi, u, v, W)


def test_decompose_domain_too_small():
    with pytest.raises(DomainTooSmall):
        decompose_permutation((1, 0, 2), {0}, {1}, {0, 1, 2})


def test_tokenseq_json_round_trip():
    p = TokenSeq.make({0: "a", 3: ("b", 1)}, "z")
    assert TokenSeq.from_json(p.to_json()) == p


def test_qpoint_json_round_trip():
    y = reduce_eplus_to_EQY(TokenSeq.make({0: "a", 1: "b"}, "z"), 2, 3)
    assert QPoint.from_json(y.to_json()) == y


def test_reductions_on_seeded_pairs():
    for p, q in token_pairs(5, 100):
        width = max(len(p.range()), len(q.range()))
        yp, yq = reduce_eplus_to_EQY(p, 3, width), reduce_eplus_to_EQY(q, 3, width)
        assert eplus_equiv(p, q) == EQY_equiv(yp, yq)
    for y1, y2 in qpoint_pairs(5, 100):
        assert EQY_equiv(y1, y2) == eplus_equiv(reduce_EQY_to_eplus(y1), reduce_EQY_to_eplus(y2))


def test_eqy_witness_carries_point():
    for y1, y2 in qpoint_pairs(9, 40):
        w = EQY_witness(y1, y2)
        if w is None:
            assert not EQY_equiv(y1, y2)
        else:
            assert orbit_patterns(y1.act(*w)) == orbit_patterns(y2)


tokens = st.dictionaries(st.integers(0, 8), st.sampled_from("abcde"), max_size=6)


@given(tokens, tokens)
def test_same_range_gives_equivalent_points(s1, s2):
    p, q = TokenSeq.make(s1, "z"), TokenSeq.make(s2, "z")
    width = max(len(p.range()), len(q.range()))
    yp, yq = reduce_eplus_to_EQY(p, 2, width), reduce_eplus_to_EQY(q, 2, width)
    assert EQY_equiv(yp, yq) == (p.range() == q.range())


@given(st.integers(1, 3), st.integers(1, 4), st.randoms(use_true_random=False))
def test_acted_points_reduce_to_equivalent_sequences(d, w, rnd):
    vals = tuple(f"r{j}" for j in range(d * w))
    y = QPoint(d, w, vals)
    sigma = list(range(w))
    rnd.shuffle(sigma)
    y2 = y.act(sigma, [rnd.randrange(d) for _ in range(w)])
    assert eplus_equiv(reduce_EQY_to_eplus(y), reduce_EQY_to_eplus(y2))
