import math

import pytest
from hypothesis import given, settings, strategies as st

from torgrad.groups import FiniteQuotient
from torgrad.crossring import (
    LevelSpace,
    MarkedModule,
    MarkedMorphism,
    marked_inclusion,
    marked_projection,
    morphism_stats,
    op_norm,
)
from torgrad.discretize import coinvariants_matrix
from torgrad.lognorm import (
    LOG_SLACK,
    atom_norms,
    column_l1s,
    gabber_column_bound,
    gabber_exact,
    gabber_split_bound,
    lognorm_certificate,
    lognorm_exact,
    lognorm_of_decomposition,
    lognorm_upper,
    set_partitions,
)

SP2 = LevelSpace(FiniteQuotient.abelian([2]))
SP4 = LevelSpace(FiniteQuotient.abelian([4]))


def full_morphism(space, entry):
    full = MarkedModule(space, [space.full_carrier()])
    return MarkedMorphism(full, full, [[entry]])


def test_single_atom_frozen_value():
    f = full_morphism(SP4, {0: {0: 2}})
    want = math.log(2) / 4
    assert lognorm_upper(f, "atoms") == pytest.approx(want)
    assert lognorm_upper(f, "block") == pytest.approx(want)
    assert lognorm_exact(f) == pytest.approx(0.17328679513998632, rel=1e-12)


def test_diagonal_23_partitions():
    # multiplication by 2 at one point and 3 at another; coinvariants is
    # diag(2, 3) and the exact bound meets the exact torsion log 6
    f = full_morphism(SP2, {0: {0: 2, 1: 3}})
    assert sorted(atom_norms(f).values()) == [2, 3]
    assert lognorm_upper(f, "atoms") == pytest.approx(math.log(6) / 2)
    assert lognorm_upper(f, "block") == pytest.approx(math.log(3))
    assert lognorm_exact(f) == pytest.approx(math.log(6) / 2)
    assert lognorm_upper(f, "greedy") == pytest.approx(math.log(6) / 2)
    assert gabber_exact(coinvariants_matrix(f)) == pytest.approx(math.log(6))


def test_decomposition_validation():
    f = full_morphism(SP2, {0: {0: 2, 1: 3}})
    both = [(0, 0), (0, 1)]
    assert lognorm_of_decomposition(f, [both]) == pytest.approx(math.log(3))
    with pytest.raises(ValueError):
        lognorm_of_decomposition(f, [both, [(0, 1)]])
    with pytest.raises(ValueError):
        lognorm_of_decomposition(f, [[(0, 0)]])
    with pytest.raises(ValueError):
        lognorm_of_decomposition(f, [both, [(5, 5)]])
    with pytest.raises(ValueError):
        lognorm_upper(f, "unheard-of")


def test_zero_and_unit_atoms_are_free():
    f = full_morphism(SP4, {0: {0: 1, 1: 1, 2: 5}})
    # unit-norm atoms never contribute
    assert lognorm_exact(f) == pytest.approx(math.log(5) / 4)
    zero = MarkedMorphism.zero(f.domain, f.codomain)
    assert lognorm_upper(zero, "atoms") == 0.0
    assert lognorm_exact(zero) == 0.0


def test_exact_cap_enforced():
    space = LevelSpace(FiniteQuotient.abelian([6]))
    f = full_morphism(space, {0: {u: 2 for u in range(6)}})
    with pytest.raises(ValueError):
        lognorm_exact(f, max_atoms=4)
    assert lognorm_exact(f, max_atoms=6) == pytest.approx(math.log(2))


def test_set_partitions_count():
    assert sum(1 for _ in set_partitions(range(4))) == 15
    assert list(set_partitions([])) == [[]]


celt_entries = st.dictionaries(
    st.integers(0, 3),
    st.dictionaries(st.integers(0, 3), st.integers(-3, 3), max_size=3),
    max_size=3,
)


@given(celt_entries)
@settings(deadline=None, max_examples=60)
def test_strategy_chain(entry):
    f = full_morphism(SP4, entry)
    exact = lognorm_exact(f)
    greedy = lognorm_upper(f, "greedy")
    atoms = lognorm_upper(f, "atoms")
    block = lognorm_upper(f, "block")
    assert 0.0 <= exact <= greedy + LOG_SLACK
    assert greedy <= atoms + LOG_SLACK
    assert greedy <= block + LOG_SLACK
    # dimension bound: no strategy beats dim * log of the operator norm
    dim_bound = float(f.domain.dim()) * math.log(max(op_norm(f), 1))
    assert exact <= dim_bound + LOG_SLACK


@given(celt_entries)
@settings(deadline=None, max_examples=40)
def test_level_torsion_dominated(entry):
    f = full_morphism(SP4, entry)
    bound = SP4.order * lognorm_upper(f, "atoms")
    assert gabber_exact(coinvariants_matrix(f)) <= bound + LOG_SLACK


celt_entries2 = st.dictionaries(
    st.integers(0, 1),
    st.dictionaries(st.integers(0, 1), st.integers(-3, 3), max_size=2),
    max_size=2,
)


@given(celt_entries2, celt_entries2)
@settings(deadline=None, max_examples=40)
def test_subadditive_under_direct_sum(a, b):
    fa = full_morphism(SP2, a)
    fb = full_morphism(SP2, b)
    dom = fa.domain.direct_sum(fb.domain)
    both = MarkedMorphism(dom, dom, [[a, {}], [{}, b]])
    assert lognorm_exact(both) <= (
        lognorm_exact(fa) + lognorm_exact(fb) + LOG_SLACK
    )


def test_invariant_under_marked_inclusion():
    f = full_morphism(SP4, {0: {0: 2, 2: 3}, 1: {1: -4}})
    big = f.codomain.direct_sum(MarkedModule(SP4, [frozenset({0, 1})]))
    incl = marked_inclusion(f.codomain, big, [0])
    proj = marked_projection(big, f.domain, [0])
    assert lognorm_exact(f.then(incl)) == pytest.approx(lognorm_exact(f))
    # extra zero-norm atoms from the projection change nothing
    assert lognorm_exact(proj.then(f)) == pytest.approx(lognorm_exact(f))
    for strategy in ("atoms", "greedy", "block"):
        assert lognorm_upper(f.then(incl), strategy) == pytest.approx(
            lognorm_upper(f, strategy)
        )


def test_almost_equality_stability():
    base = {0: {0: 2, 1: 3, 2: 2}}
    bent = {0: {0: 2, 1: 3, 2: 7}}
    f = full_morphism(SP4, base)
    g = full_morphism(SP4, bent)
    delta = morphism_stats(f.sub(g)).size1
    assert delta == pytest.approx(1 / 4)
    peak = math.log(max(op_norm(f), op_norm(g)))
    gap = abs(lognorm_exact(f) - lognorm_exact(g))
    assert gap <= float(delta) * peak + LOG_SLACK


@given(celt_entries, celt_entries)
@settings(deadline=None, max_examples=30)
def test_almost_equality_stability_random(a, b):
    f = full_morphism(SP4, a)
    g = full_morphism(SP4, b)
    delta = float(morphism_stats(f.sub(g)).size1)
    peak = math.log(max(op_norm(f), op_norm(g), 1))
    gap = abs(lognorm_exact(f) - lognorm_exact(g))
    assert gap <= delta * peak + LOG_SLACK


int_matrices = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(
            st.lists(st.integers(-9, 9), min_size=c, max_size=c),
            min_size=r, max_size=r,
        )
    )
)


def test_gabber_frozen_values():
    assert gabber_exact([[2, 0], [0, 3]]) == pytest.approx(math.log(6))
    assert gabber_column_bound([[2, 0], [0, 3]]) == pytest.approx(math.log(6))
    # [[2,1],[0,2]] has torsion Z/4 but column bound log 2 + log 3
    assert gabber_exact([[2, 1], [0, 2]]) == pytest.approx(math.log(4))
    assert gabber_column_bound([[2, 1], [0, 2]]) == pytest.approx(math.log(6))
    assert column_l1s([[2, 1], [0, 2]]) == [2, 3]
    assert gabber_split_bound([[2, 1], [0, 2]]) == pytest.approx(2 * math.log(3))


@given(int_matrices)
@settings(deadline=None, max_examples=120)
def test_gabber_chain(a):
    exact = gabber_exact(a)
    column = gabber_column_bound(a)
    split = gabber_split_bound(a)
    assert exact <= column + LOG_SLACK
    assert column <= split + LOG_SLACK


def test_gabber_split_blocks():
    a = [[2, 0, 1], [0, 3, 1]]
    assert gabber_split_bound(a, [[0], [1], [2]]) == pytest.approx(
        math.log(2) + math.log(3) + math.log(2)
    )
    with pytest.raises(ValueError):
        gabber_split_bound(a, [[0, 1]])
    with pytest.raises(ValueError):
        gabber_split_bound(a, [[0, 0], [1], [2]])
    with pytest.raises(ValueError):
        gabber_split_bound(a, [[0], [1], [2], [3]])


def test_certificate_realizes_value():
    f = full_morphism(SP2, {0: {0: 2, 1: 3}})
    for strategy in ("atoms", "greedy", "exact", "block"):
        value, blocks = lognorm_certificate(f, strategy)
        assert value == pytest.approx(lognorm_upper(f, strategy))
        assert lognorm_of_decomposition(f, blocks) == pytest.approx(value)
    # the zero morphism certifies with no blocks at all
    assert lognorm_certificate(full_morphism(SP2, {}), "exact") == (0.0, [])
