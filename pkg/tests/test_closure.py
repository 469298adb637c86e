import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from frlab.catalog import builtin_instance
from frlab.closure import (
    FORMS,
    DomainTooLarge,
    brute_force_closures,
    catalog_closure,
    enumerate_invariant_closures,
    form4_at,
    from_table,
    indep,
    is_disjointifying,
    is_invariant,
    minimal_elements,
    random_invariant_closure,
    validate_closure,
)

# invariant closure operators per group, from the brute-force Moore-family oracle
FROZEN_COUNTS = {"s1": 2, "s2": 3, "s3": 4, "s4": 5, "c3": 4, "c4": 8, "e2-4": 8, "cycle4": 8}


@pytest.mark.parametrize("name, count", sorted(FROZEN_COUNTS.items()))
def test_enumeration_count(name, count):
    P = builtin_instance(name).group
    assert len(list(enumerate_invariant_closures(P, 4))) == count
    assert len(brute_force_closures(P.degree, P.generators)) == count


def test_enumeration_cap():
    with pytest.raises(DomainTooLarge):
        list(enumerate_invariant_closures(builtin_instance("s5").group, 4))


@pytest.mark.parametrize("name", ["identity", "constant-full", "definable-closure"])
def test_catalog_operators_are_invariant_closures(name):
    inst = builtin_instance("e2-4")
    cl = catalog_closure(name, inst)
    assert validate_closure(cl).holds
    assert is_invariant(cl).holds


def test_unknown_closure_name():
    with pytest.raises(KeyError):
        catalog_closure("nope", builtin_instance("s3"))


def test_non_extensive_table_rejected():
    inst = builtin_instance("s2")
    table = {frozenset(): frozenset(), frozenset({0}): frozenset(), frozenset({1}): frozenset({1}), frozenset({0, 1}): frozenset({0, 1})}
    v = validate_closure(from_table(inst, table))
    assert v.fails


def test_non_invariant_table_detected():
    inst = builtin_instance("s2")
    table = {frozenset(): frozenset(), frozenset({0}): frozenset({0, 1}), frozenset({1}): frozenset({1}), frozenset({0, 1}): frozenset({0, 1})}
    assert is_invariant(from_table(inst, table)).fails


def test_independence_definition():
    cl = catalog_closure("identity", builtin_instance("s4"))
    assert indep(cl, {0}, {1}, set())
    assert not indep(cl, {0, 1}, {1, 2}, set())


def test_identity_on_s4_not_disjointifying_form4_witness():
    cl = catalog_closure("identity", builtin_instance("s4"))
    v = form4_at(cl, 0, {1, 2, 3})
    assert v.fails
    assert v.witness["clause"] == "a"


def test_constant_full_disjointifying_everywhere():
    for name in ("s3", "c4", "e2-4"):
        cl = catalog_closure("constant-full", builtin_instance(name))
        assert all(is_disjointifying(cl, f).holds for f in FORMS)


def test_identity_disjointifying_on_extendable_graphs():
    inst = builtin_instance("graphs-limit")
    v = is_disjointifying(catalog_closure("identity", inst), 4, set_size=2, witness_search=24)
    assert not v.fails


def test_minimal_elements_are_minimal():
    cl = catalog_closure("identity", builtin_instance("s4"))
    assert minimal_elements(cl, {0, 1, 2}, {0}) == {1, 2}


@given(st.integers(0, 10_000), st.sampled_from(["s3", "c4", "e2-4", "cycle5", "delta-act(2,3)"]))
def test_random_invariant_closures_are_valid(seed, name):
    inst = builtin_instance(name)
    cl = random_invariant_closure(inst, random.Random(seed))
    assert validate_closure(cl).holds
    assert is_invariant(cl).holds


@given(st.integers(0, 10_000))
def test_independence_symmetric(seed):
    rng = random.Random(seed)
    inst = builtin_instance(rng.choice(["s4", "c4", "e2-4"]))
    cl = random_invariant_closure(inst, rng)
    U = list(inst.universe)
    A, B, C = (frozenset(rng.sample(U, rng.randint(0, 3))) for _ in range(3))
    assert indep(cl, A | C, B | C, C) == indep(cl, B | C, A | C, C)
