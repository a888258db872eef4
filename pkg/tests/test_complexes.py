from fractions import Fraction

import pytest

from torgrad.groups import FiniteQuotient, parse_word
from torgrad.crossring import (
    LevelSpace,
    MarkedModule,
    MarkedMorphism,
    almost_eq,
    celt_indicator,
    morphism_stats,
)
from torgrad.complexes import (
    GHWitness,
    MarkedComplex,
    check_chain_map,
    defect_report,
    gh_compose,
    gh_extracted_maps,
    gh_identity_witness,
    gh_verify,
    induce_resolution,
    kappa_stats,
    mapping_cone,
    tensor_complex,
    tensor_vector,
    witness_report,
)


def w(s):
    return parse_word(s)


def gm1(s):
    # g - 1 in the group ring
    return {w(s): 1, (): -1}


def free2_complex(space):
    # 0 -> R^2 -> R -> L: the induced resolution of a rank 2 free group
    return induce_resolution(space, [1, 2], [[[gm1("a")], [gm1("b")]]])


def koszul_complex(space):
    return induce_resolution(
        space,
        [1, 2, 1],
        [
            [[gm1("a")], [gm1("b")]],
            [[{w("b"): -1, (): 1}, gm1("a")]],
        ],
    )


SP22 = LevelSpace(FiniteQuotient.abelian([2, 2]))
SP33 = LevelSpace(FiniteQuotient.abelian([3, 3]))


def test_induced_free_resolution_is_strict():
    cx = free2_complex(SP22)
    rep = defect_report(cx)
    assert rep.is_strict
    assert rep.aug_size == 0
    assert cx.dims() == [Fraction(1), Fraction(2)]


def test_koszul_is_strict_only_after_commuting_quotient():
    cx = koszul_complex(SP33)
    rep = defect_report(cx)
    assert rep.composite_sizes[2] == 0
    assert rep.aug_size == 0
    assert rep.is_strict


def test_kappa_stats():
    cx = koszul_complex(SP33)
    stats = kappa_stats(cx)
    # the degree 2 boundary maps an atom to 4 units of l1 mass
    assert stats.kappa == 4
    assert stats.nu >= stats.nu_low >= 2
    assert stats.dims == (Fraction(1), Fraction(2), Fraction(1))
    assert stats.bounded_by(5)
    assert not stats.bounded_by(4)


def test_witness_report():
    cx = koszul_complex(SP33)
    z = cx.module(0).basis_vector(0)
    rep = witness_report(cx, z)
    assert rep.defect_size == 0
    assert rep.linf == 1 and rep.n1 == 1 and rep.n2 == 1
    assert rep.within(Fraction(1, 9), kappa=2)


def test_chain_map_identity_is_strict():
    cx = koszul_complex(SP33)
    maps = [MarkedMorphism.identity(m) for m in cx.modules]
    rep = check_chain_map(maps, cx, cx)
    assert rep.is_strict
    assert rep.aug_size == 0


def test_chain_map_defect_is_measured():
    cx = koszul_complex(SP33)
    maps = [MarkedMorphism.identity(m) for m in cx.modules]
    # shave one point off the degree 1 identity
    m1 = cx.module(1)
    bad = [
        [celt_indicator(SP33, sorted(m1.carriers[0])[1:]), {}],
        [{}, celt_indicator(SP33, m1.carriers[1])],
    ]
    maps[1] = MarkedMorphism(m1, m1, bad)
    rep = check_chain_map(maps, cx, cx)
    assert rep.square_sizes[1] > 0
    assert not rep.is_strict


def test_mapping_cone_of_identity():
    cx = free2_complex(SP22)
    maps = [MarkedMorphism.identity(m) for m in cx.modules]
    cone = mapping_cone(maps, cx, cx)
    assert cone.complex.top_degree == 2
    assert cone.complex.augmentation is None
    assert defect_report(cone.complex).is_strict
    # dim Cone_n = dim C_{n-1} + dim D_n
    assert cone.complex.dims() == [Fraction(1), Fraction(3), Fraction(2)]


def test_mapping_cone_rejects_nonstrict_maps():
    cx = free2_complex(SP22)
    maps = [MarkedMorphism.identity(m) for m in cx.modules]
    maps[1] = maps[1].scale(2)
    with pytest.raises(ValueError):
        mapping_cone(maps, cx, cx)


def one_generator_complex(space, image):
    # resolution of a single generator pushed along t -> image
    return induce_resolution(
        space, [1, 1], [[[gm1("a")]]], gen_images=[image]
    )


def test_tensor_matches_koszul():
    space = SP33
    t1, t2 = space.quotient.generator_images
    C = one_generator_complex(space, t1)
    D = one_generator_complex(space, t2)
    result = tensor_complex(C, D)
    tensor = result.complex
    assert [m.rank for m in tensor.modules] == [1, 2, 1]
    assert defect_report(tensor).is_strict
    assert tensor.augmentation is not None
    koszul = koszul_complex(space)
    assert tensor.dims() == koszul.dims()
    # the boundaries agree up to the summand order recorded in the layout
    maps = [MarkedMorphism.identity(m) for m in tensor.modules]
    rep = check_chain_map(maps, tensor, tensor)
    assert rep.is_strict


def test_tensor_vector_multiplies_components():
    space = SP33
    t1, t2 = space.quotient.generator_images
    C = one_generator_complex(space, t1)
    D = one_generator_complex(space, t2)
    result = tensor_complex(C, D)
    zc = C.module(0).basis_vector(0)
    zd = D.module(0).basis_vector(0)
    prod = tensor_vector(result, (0, 0), zc, zd)
    assert prod == result.complex.module(0).basis_vector(0)
    # augmentation of the product is the product of the augmentations (both 1)
    val = result.complex.augmentation.apply(prod)
    assert val == space.indicator(range(space.order))


def restricted_copy(cx, degree, summand, removed):
    """Copy of cx with some carrier points removed from one summand."""
    modules = list(cx.modules)
    carriers = list(modules[degree].carriers)
    carriers[summand] = carriers[summand] - removed
    modules[degree] = MarkedModule(cx.space, carriers)
    boundaries = []
    for r in range(1, cx.top_degree + 1):
        d = cx.boundary(r)
        boundaries.append(
            MarkedMorphism(modules[r], modules[r - 1],
                           [list(row) for row in d.entries])
        )
    aug = None
    if cx.augmentation is not None:
        from torgrad.crossring import Augmentation

        aug = Augmentation(modules[0], list(cx.augmentation.values))
    return MarkedComplex(modules, boundaries, aug)


def test_gh_identity_witness():
    cx = koszul_complex(SP33)
    witness = gh_identity_witness(cx, delta=Fraction(1, 9))
    rep = gh_verify(cx, cx, witness)
    assert rep.within
    assert all(v == 0 for v in rep.symdiff)
    assert all(v == 0 for v in rep.map_sizes)
    assert rep.aug_size == 0


def test_gh_perturbed_and_composed():
    cx = koszul_complex(SP33)
    removed = frozenset({0})
    other = restricted_copy(cx, 1, 0, removed)
    stats = kappa_stats(cx)
    witness = GHWitness(
        ambients=tuple(cx.modules),
        left_assignments=tuple(tuple(range(m.rank)) for m in cx.modules),
        right_assignments=tuple(tuple(range(m.rank)) for m in cx.modules),
        delta=Fraction(1, 2),
        k=2 * stats.kappa,
    )
    rep = gh_verify(cx, other, witness)
    assert rep.symdiff[1] == Fraction(1, 9)
    assert rep.symdiff[0] == 0 and rep.symdiff[2] == 0
    assert rep.within

    # glue cx ~ other ~ cx back together: parameters add
    back = GHWitness(
        ambients=witness.ambients,
        left_assignments=witness.right_assignments,
        right_assignments=witness.left_assignments,
        delta=witness.delta,
        k=witness.k,
    )
    glued = gh_compose(witness, other, back)
    assert glued.delta == Fraction(1)
    rep2 = gh_verify(cx, cx, glued)
    assert rep2.within
    assert all(v == 0 for v in rep2.symdiff)

    # extracted comparison maps are close to the identity
    maps = gh_extracted_maps(cx, other, witness)
    for r, f in enumerate(maps):
        ident = MarkedMorphism.identity(cx.module(r))
        ident_into = ident.then(
            MarkedMorphism(  # restrict the identity into the smaller module
                cx.module(r), other.module(r),
                [
                    [
                        celt_indicator(SP33, other.module(r).carriers[j])
                        if i == j else {}
                        for j in range(other.module(r).rank)
                    ]
                    for i in range(cx.module(r).rank)
                ],
            )
        )
        assert almost_eq(f, ident_into, Fraction(1, 2)).within


def test_gh_rejects_bad_assignments():
    cx = koszul_complex(SP33)
    other = restricted_copy(cx, 1, 0, frozenset({0}))
    witness = GHWitness(
        ambients=tuple(other.modules),
        left_assignments=tuple(tuple(range(m.rank)) for m in cx.modules),
        right_assignments=tuple(tuple(range(m.rank)) for m in cx.modules),
        delta=Fraction(1, 2),
        k=4,
    )
    # cx carriers are not contained in the shaved ambient
    with pytest.raises(ValueError):
        gh_verify(cx, other, witness)


def test_complex_json_round_trip():
    cx = koszul_complex(SP33)
    data = cx.to_json()
    again = MarkedComplex.from_json(data)
    assert again.to_json() == data
    assert defect_report(again).is_strict

    cone = mapping_cone(
        [MarkedMorphism.identity(m) for m in cx.modules], cx, cx
    ).complex
    assert cone.to_json()["augmentation"] is None
    assert MarkedComplex.from_json(cone.to_json()).augmentation is None
