import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from frlab.fraisse import FraisseClassSpec
from frlab.groups import compose
from frlab.involve import (
    NULL,
    BaseAmalgamFailed,
    ColoredStructure,
    ColoringClash,
    NotEquivariant,
    amalgamate_colored,
    colored_strong_sub,
    delta_generator,
    quotient_preimage,
    run_involvement,
    structure_closure,
    transversal_quotient,
)
from frlab.structures import graph

GRAPHS = FraisseClassSpec.builtin("graphs")
PAIRS = FraisseClassSpec.builtin("pairs")
PARTNERS = structure_closure("add-partners")


def _check_run(rep, sigma):
    assert rep.ok
    assert set(rep.conditions) == {f"({k})" for k in range(1, 7)}
    for a, b in rep.g.items():
        assert rep.history[-1].B.count(b) == 1
    assert rep.color_checks == len(rep.g)


def test_graphs_identity_swap():
    rep = run_involvement(GRAPHS, "identity", {0: 1, 1: 0}, 12)
    _check_run(rep, {0: 1, 1: 0})
    assert len(rep.g) == 12


def test_pairs_partners_three_cycle():
    rep = run_involvement(PAIRS, "add-partners", {0: 1, 1: 2, 2: 0}, 9)
    _check_run(rep, {0: 1, 1: 2, 2: 0})


def test_identity_sigma_preserves_colors():
    rep = run_involvement(GRAPHS, "identity", {}, 6)
    lim_colors = rep.history  # conditions (5) already verified stage by stage
    assert rep.ok and lim_colors


def test_sigma_inverse_mirror():
    sigma = {0: 1, 1: 2, 2: 0}
    inv = {v: k for k, v in sigma.items()}
    fwd = run_involvement(GRAPHS, "identity", sigma, 8)
    back = run_involvement(GRAPHS, "identity", inv, 8, lead="B")
    assert back.g == {b: a for a, b in fwd.g.items()}


def test_sigma_outside_palette_rejected():
    with pytest.raises(ValueError):
        run_involvement(GRAPHS, "identity", {0: 9, 9: 0}, 2)


def test_trace_json_has_every_stage():
    rep = run_involvement(GRAPHS, "identity", {0: 1, 1: 0}, 4)
    doc = rep.to_json()
    assert [t["stage"] for t in doc["trace"]] == list(range(5))


def _pt(color, n=1, edges=()):
    return ColoredStructure(graph(n, edges), tuple(color) if isinstance(color, (list, tuple)) else (color,))


def test_colored_amalgam_disjoint_distinct_colors():
    A = _pt([0])
    B = _pt([0, 1], 2)
    C = _pt([0, 2], 2)
    r = amalgamate_colored(PARTNERS, PAIRS, A, B, C)
    assert r.D.base.size == 3
    assert sorted(r.D.colors) == [0, 1, 2]


def test_colored_amalgam_forced_clash():
    A = _pt([0])
    B = _pt([0, 1], 2)
    C = _pt([0, 2], 2)
    with pytest.raises(ColoringClash):
        amalgamate_colored(PARTNERS, PAIRS, A, B, C, base={0: 0, 1: 1})


def test_colored_amalgam_null_partners():
    A = _pt([0])
    B = _pt([0, NULL], 2, [(0, 1)])
    r = amalgamate_colored(PARTNERS, PAIRS, A, B, B)
    assert r.D.base.size == 2


def test_colored_amalgam_impossible_base():
    # two different partners for the same point cannot be merged in pairs
    A = _pt([0], 1)
    B = _pt([0, NULL], 2, [(0, 1)])
    C = _pt([0, NULL], 2, [(0, 1)])
    r = amalgamate_colored(PARTNERS, PAIRS, A, B, C)
    assert r.D.base.size == 2
    with pytest.raises((BaseAmalgamFailed, ColoringClash)):
        amalgamate_colored(PARTNERS, PAIRS, A, B, C, base={0: 0, 1: 2})


def test_colored_strong_sub_respects_closure():
    X = _pt([0])
    Y_colored = _pt([0, 3], 2, [(0, 1)])
    Y_null = _pt([0, NULL], 2, [(0, 1)])
    assert not colored_strong_sub(PARTNERS, X, Y_colored, {0: 0})
    assert colored_strong_sub(PARTNERS, X, Y_null, {0: 0})


def test_transversal_quotient_example():
    pi = quotient_preimage(2, (1, 0, 2), (1, 0, 0))
    assert transversal_quotient(2, 3, pi) == (1, 0, 2)


def test_not_equivariant():
    with pytest.raises(NotEquivariant):
        transversal_quotient(2, 2, (1, 0, 2, 3)[::-1][:0] + (0, 2, 1, 3))


def test_quotient_surjective_on_s4():
    for sigma in itertools.permutations(range(4)):
        assert transversal_quotient(2, 4, quotient_preimage(2, sigma)) == sigma


@given(st.permutations(range(4)), st.permutations(range(4)), st.lists(st.integers(0, 1), min_size=4, max_size=4), st.lists(st.integers(0, 1), min_size=4, max_size=4))
def test_quotient_homomorphism(s1, s2, sh1, sh2):
    p = quotient_preimage(2, tuple(s1), sh1)
    q = quotient_preimage(2, tuple(s2), sh2)
    lhs = transversal_quotient(2, 4, compose(p, q))
    assert lhs == compose(transversal_quotient(2, 4, p), transversal_quotient(2, 4, q))


def test_delta_generator_order():
    g = delta_generator(3, 2)
    assert compose(g, compose(g, g)) == tuple(range(6))
