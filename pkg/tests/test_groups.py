import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from frlab.catalog import builtin_instance, delta_group
from frlab.groups import (
    GroupError,
    PermGroup,
    compose,
    cycle_perm,
    fmt_cycles,
    inverse,
    naive_elements,
    set_orbit,
    stabilizer,
)
from frlab.oracles import brute_force_orbit


def test_compose_is_right_to_left():
    p = cycle_perm(3, (0, 1))
    q = cycle_perm(3, (1, 2))
    assert compose(p, q)[1] == p[q[1]]


def test_non_bijection_rejected():
    with pytest.raises(GroupError):
        PermGroup(3, ((0, 0, 1),))


def test_fmt_cycles():
    assert fmt_cycles(cycle_perm(4, (0, 1), (2, 3))) == "(0 1)(2 3)"


@pytest.mark.parametrize("name, order", [("s1", 1), ("s3", 6), ("s4", 24), ("s5", 120), ("c4", 4), ("e2-4", 8), ("cycle5", 10), ("delta-act(2,2)", 8), ("delta-act(2,3)", 48)])
def test_orders_match_enumeration(name, order):
    P = builtin_instance(name).group
    assert P.order() == order
    if order <= 120:
        assert len(naive_elements(P)) == order


@pytest.mark.parametrize("name", ["s4", "c4", "e2-4", "cycle5", "delta-act(2,3)"])
def test_orbit_over_matches_oracle(name):
    inst = builtin_instance(name)
    for B in ([], [0], [1, 2], [0, 3]):
        for a in inst.universe:
            assert inst.orbit_over(a, B) == frozenset(brute_force_orbit(inst.group, a, B))


def test_s4_orbit_over_pair():
    inst = builtin_instance("s4")
    assert inst.orbit_over(0, {1, 2}) == {0, 3}
    assert inst.orbit_over(1, {1, 2}) == {1}


def test_stabilizers():
    S4 = PermGroup.symmetric(4)
    assert stabilizer(S4, {0, 1}, "pointwise").order() == 2
    assert stabilizer(S4, {0, 1}, "setwise").order() == 4


def test_set_orbit():
    S4 = PermGroup.symmetric(4)
    assert len(set_orbit(S4.generators, {0, 1})) == 6


def test_delta_group_commutes_with_rotation():
    from frlab.involve import delta_generator

    G = delta_group(2, 3)
    d = delta_generator(2, 3)
    for g in G.generators:
        assert compose(g, d) == compose(d, g)


perms = st.integers(1, 7).flatmap(lambda n: st.permutations(list(range(n))).map(tuple))


@given(perms)
def test_inverse(p):
    assert compose(p, inverse(p)) == tuple(range(len(p)))


@given(st.lists(st.permutations(list(range(5))).map(tuple), min_size=1, max_size=3))
def test_schreier_sims_order_matches_closure(gens):
    P = PermGroup(5, tuple(gens))
    elems = naive_elements(P)
    assert P.order() == len(elems)
    assert all(g in P for g in gens)
    outside = next((q for q in itertools.permutations(range(5)) if q not in elems), None)
    assert outside is None or outside not in P
