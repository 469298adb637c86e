import pytest
from hypothesis import given
from hypothesis import strategies as st

from frlab.catalog import builtin_instance
from frlab.groups import PermGroup
from frlab.instance import FixedInstance
from frlab.oracles import all_values
from frlab.rank import CertificateFailed, RankValue, certify_infinite_rank, clmin, deissler_rank, krk, rank_table


@pytest.mark.parametrize("n", [3, 4, 5])
def test_drk_symmetric_matches_oracle(n):
    inst = FixedInstance(PermGroup.symmetric(n))
    oracle = all_values(inst.group, False)
    for (a, B), val in oracle.items():
        assert deissler_rank(inst, a, B) == RankValue.finite(val)
    assert all(deissler_rank(inst, a) == RankValue.finite(n - 1) for a in inst.universe)


# values from the literal-recursion oracle
FROZEN = {
    ("c4", 0, ()): (1, 1),
    ("c4", 0, (1,)): (0, 0),
    ("e2-4", 0, ()): (2, 2),
    ("e2-4", 0, (1,)): (0, 0),
    ("cycle5", 0, ()): (2, 2),
    ("cycle5", 0, (1,)): (1, 1),
}


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_frozen_ranks(key):
    name, a, B = key
    inst = builtin_instance(name)
    d, k = FROZEN[key]
    assert deissler_rank(inst, a, B).value == d
    assert krk(inst, a, B).value == k


@pytest.mark.parametrize("name", ["s4", "c4", "e2-4", "cycle5", "delta-act(2,2)"])
def test_krk_matches_oracle(name):
    inst = builtin_instance(name)
    for (a, B), val in all_values(inst.group, True).items():
        assert krk(inst, a, B) == RankValue.finite(val)


def test_rank_value_display():
    assert str(RankValue.finite(3)) == "3"
    assert str(RankValue("infinite")) == "inf"
    assert str(RankValue.unresolved(2)) == "unresolved(>=2)"


def test_rank_table_tsv_header_and_rows():
    t = rank_table(builtin_instance("s3"))
    lines = t.to_tsv().splitlines()
    assert lines[0] == "a\tB\tDrk\tKrk"
    assert len(lines) == 1 + 3 * 8
    assert t.fingerprint == builtin_instance("s3").fingerprint()


def test_clmin_constant_full_on_finite():
    inst = builtin_instance("cycle5")
    cl = clmin(inst)
    assert cl(set()) == frozenset(inst.universe)


def test_certificate_on_pairs_limit():
    from frlab.closure import catalog_closure

    inst = builtin_instance("pairs-limit")
    cert = certify_infinite_rank(inst, 0, (), catalog_closure("add-partners", inst), 3, 24)
    assert cert.to_json()["claim"] == "Krk(a,B) = inf"


def test_certificate_rejects_identity_on_finite():
    from frlab.closure import catalog_closure

    inst = builtin_instance("s4")
    with pytest.raises(CertificateFailed):
        certify_infinite_rank(inst, 0, (), catalog_closure("identity", inst), 2, 24)


@given(st.integers(0, 3), st.sets(st.integers(0, 3), max_size=3))
def test_krk_le_drk_s4(a, B):
    inst = builtin_instance("s4")
    assert krk(inst, a, B).value <= deissler_rank(inst, a, B).value


@given(st.integers(0, 4), st.sets(st.integers(0, 4), max_size=3), st.permutations(range(5)))
def test_rank_invariant_under_group(a, B, g):
    inst = builtin_instance("s5")
    gB = {g[b] for b in B}
    assert deissler_rank(inst, a, B) == deissler_rank(inst, g[a], gB)
