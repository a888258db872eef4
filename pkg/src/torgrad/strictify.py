"""Repairing almost exact data into exactly exact data.

Three constructions, all at a fixed level and all exact-output:

* make_surjective patches the degree 0 module so an approximate
  augmentation witness becomes an exact one.
* strictify_complex appends small error summands degree by degree and
  corrects the boundaries so every composite (including the augmentation
  row) vanishes identically; the error carriers are exactly the supports
  of the measured defects, so a strict input passes through untouched.
* strictify_map does the same for an almost chain map between two strict
  complexes, enlarging only the target; the repaired map commutes exactly
  and covers the original augmentation on the nose.

Every output is compared against its input by measured support sizes, so
callers can check the advertised bounds instead of trusting them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .crossring import (
    Augmentation,
    MarkedModule,
    MarkedMorphism,
    Vector,
    celt_indicator,
    celt_neg,
    vector_supp1,
)
from .complexes import (
    DefectReport,
    GHWitness,
    MarkedComplex,
    defect_report,
    gh_verify,
    witness_report,
)


def _error_module(space, supports: Sequence[frozenset]):
    """Module of the nonempty supports; slots maps the originating summand
    index to the position of its error summand."""
    slots = {}
    carriers = []
    for i, B in enumerate(supports):
        if B:
            slots[i] = len(carriers)
            carriers.append(B)
    return MarkedModule(space, carriers), slots


def _pad_codomain(f: MarkedMorphism, big: MarkedModule) -> MarkedMorphism:
    """Reinterpret f into a codomain extended by extra summands on the
    right; the first block of big must be f.codomain."""
    extra = big.rank - f.codomain.rank
    if extra < 0 or big.carriers[: f.codomain.rank] != f.codomain.carriers:
        raise ValueError("extension must keep the codomain as its first block")
    rows = [list(row) + [{}] * extra for row in f.entries]
    return MarkedMorphism(f.domain, big, rows, normalize=False)


# ---------------------------------------------------------------------------
# surjectivity patch


@dataclass(frozen=True)
class SurjectiveResult:
    complex: MarkedComplex
    witness: Vector
    patch_carrier: frozenset
    patch_dim: Fraction
    patch_norm: int

    @property
    def patched(self) -> bool:
        return bool(self.patch_carrier)


def make_surjective(cx: MarkedComplex, z: Vector) -> SurjectiveResult:
    """Append <B>, B = supp(eta(z) - 1), send its generator to 1 - eta(z).

    The returned witness zhat = z + chi_B e satisfies eta_hat(zhat) = 1
    exactly; boundaries do not touch the new summand, so eta_hat o d_1 is
    unchanged.  The patch costs dim <B> = mu(B) < delta, has augmentation
    value bounded by |1 - eta(z)|_inf, and raises N_1, N_2 and the sup norm
    of the witness by at most one.
    """
    report = witness_report(cx, z)
    space = cx.space
    if not report.defect_support:
        return SurjectiveResult(cx, tuple(z), frozenset(), Fraction(0), 0)
    B = report.defect_support
    value = cx.augmentation.apply(z)
    one = space.indicator(range(space.order))
    patch_value = space.fn_sub(one, value)  # supported exactly on B

    new_zero = cx.module(0).direct_sum(MarkedModule(space, [B]))
    aug = Augmentation(new_zero, list(cx.augmentation.values) + [patch_value])
    boundaries = list(cx.boundaries())
    if cx.top_degree >= 1:
        boundaries[0] = _pad_codomain(cx.boundary(1), new_zero)
    modules = [new_zero] + list(cx.modules[1:])
    new_cx = MarkedComplex(modules, boundaries, aug)
    new_witness = tuple(z) + (celt_indicator(space, B),)
    return SurjectiveResult(
        complex=new_cx,
        witness=new_witness,
        patch_carrier=B,
        patch_dim=space.measure(B),
        patch_norm=report.defect_linf,
    )


# ---------------------------------------------------------------------------
# strictifying a complex


@dataclass(frozen=True)
class StrictifyComplexResult:
    complex: MarkedComplex
    error_modules: tuple
    error_dims: tuple
    input_defects: DefectReport
    witness: GHWitness

    @property
    def total_error_dim(self) -> Fraction:
        return sum(self.error_dims, Fraction(0))


def strictify_complex(cx: MarkedComplex) -> StrictifyComplexResult:
    """Correct an augmented almost complex to an exactly exact one.

    Degree by degree (r = 0 .. top-1) the defect of the corrected map
    against the next boundary is computed, its row supports B_i become new
    summands of degree r, the corrected boundary kills them and the new
    degree r map sends them onto the defect itself.  Error summands with
    empty carrier are dropped, so a strict complex returns unchanged.

    dim E_r is at most the input defect at r plus
    rank(D_{r+1}) * dim E_{r-1} * N_1max(d_{r+1}), and operator norms grow
    by at most (norm_r + 1)(norm_{r+1} + 1).
    """
    if cx.augmentation is None:
        raise ValueError("strictification needs an augmented complex")
    space = cx.space
    top = cx.top_degree
    input_defects = defect_report(cx)
    if top == 0:
        witness = _strictify_witness(cx, cx)
        return StrictifyComplexResult(cx, (), (), input_defects, witness)

    new_modules: list[Optional[MarkedModule]] = [None] * (top + 1)
    new_boundaries: list[Optional[MarkedMorphism]] = [None] * top
    error_modules = []
    error_dims = []

    # degree 0: the corrected degree 0 map is the augmentation itself
    comp_aug = cx.augmentation.after(cx.boundary(1))
    supports = [frozenset(v) for v in comp_aug.values]
    E0, slots = _error_module(space, supports)
    zero_hat = cx.module(0).direct_sum(E0)
    aug_values = list(cx.augmentation.values) + [
        comp_aug.values[i] for i in sorted(slots, key=slots.get)
    ]
    aug_hat = Augmentation(zero_hat, aug_values)
    new_modules[0] = zero_hat
    error_modules.append(E0)
    error_dims.append(E0.dim())

    tilde = _corrected_boundary(cx, 1, zero_hat, slots, supports)

    for r in range(1, top):
        comp = cx.boundary(r + 1).then(tilde)
        supports = [frozenset(vector_supp1(comp.row(i)))
                    for i in range(comp.domain.rank)]
        Er, slots = _error_module(space, supports)
        r_hat = cx.module(r).direct_sum(Er)
        rows = [list(row) for row in tilde.entries] + [
            list(comp.entries[i]) for i in sorted(slots, key=slots.get)
        ]
        new_boundaries[r - 1] = MarkedMorphism.from_rows(
            r_hat, new_modules[r - 1], rows
        )
        new_modules[r] = r_hat
        error_modules.append(Er)
        error_dims.append(Er.dim())
        tilde = _corrected_boundary(cx, r + 1, r_hat, slots, supports)

    new_modules[top] = cx.module(top)
    new_boundaries[top - 1] = tilde

    out = MarkedComplex(new_modules, new_boundaries, aug_hat)
    witness = _strictify_witness(cx, out)
    return StrictifyComplexResult(
        complex=out,
        error_modules=tuple(error_modules),
        error_dims=tuple(error_dims),
        input_defects=input_defects,
        witness=witness,
    )


def _corrected_boundary(cx, r, target_hat, slots, supports) -> MarkedMorphism:
    """d_r with each row i pushed into the extended target, minus the
    indicator of its error summand."""
    space = cx.space
    d = cx.boundary(r)
    base_rank = d.codomain.rank
    extra = target_hat.rank - base_rank
    rows = []
    for i in range(d.domain.rank):
        row = list(d.entries[i]) + [{}] * extra
        if i in slots:
            row[base_rank + slots[i]] = celt_neg(
                space, celt_indicator(space, supports[i])
            )
        rows.append(row)
    return MarkedMorphism.from_rows(d.domain, target_hat, rows)


def _strictify_witness(before: MarkedComplex, after: MarkedComplex) -> GHWitness:
    """Ambient comparison witness: the output modules contain the input
    modules as their first summand blocks.  delta is the measured maximum
    plus half an atom, k the measured norm maximum."""
    left = tuple(
        tuple(range(before.module(r).rank)) for r in range(before.top_degree + 1)
    )
    right = tuple(
        tuple(range(after.module(r).rank)) for r in range(after.top_degree + 1)
    )
    probe = GHWitness(
        ambients=tuple(after.modules),
        left_assignments=left,
        right_assignments=right,
        delta=Fraction(1),
        k=0,
    )
    rep = gh_verify(before, after, probe)
    sizes = list(rep.symdiff) + list(rep.map_sizes)
    if rep.aug_size is not None:
        sizes.append(rep.aug_size)
    norms = list(rep.map_norms)
    if rep.aug_linf is not None:
        norms.append(rep.aug_linf)
    delta = max(sizes, default=Fraction(0)) + Fraction(1, 2 * before.space.order)
    return GHWitness(
        ambients=probe.ambients,
        left_assignments=left,
        right_assignments=right,
        delta=delta,
        k=max(norms, default=0),
    )


# ---------------------------------------------------------------------------
# strictifying a chain map


@dataclass(frozen=True)
class StrictifyMapResult:
    target: MarkedComplex
    maps: tuple
    error_modules: tuple
    error_dims: tuple
    map_diff_sizes: tuple
    map_diff_norms: tuple

    @property
    def total_error_dim(self) -> Fraction:
        return sum(self.error_dims, Fraction(0))


def strictify_map(
    source: MarkedComplex,
    target: MarkedComplex,
    maps: Sequence[MarkedMorphism],
) -> StrictifyMapResult:
    """Repair an almost chain map between strict complexes.

    Both complexes must be strict and augmented.  The target gains error
    summands <B_i> carrying the commutation defect of each source summand;
    the repaired maps subtract the corresponding indicators, so all squares
    commute exactly, the extended target stays exactly exact, and the
    repaired degree 0 map covers the source augmentation on the nose.
    dim E_r equals the measured defect size in degree r, and the repaired
    map differs from the original by (sum of dim E_r, 1).
    """
    if source.augmentation is None or target.augmentation is None:
        raise ValueError("both complexes must be augmented")
    if source.top_degree != target.top_degree:
        raise ValueError("chain map strictification expects equal top degrees")
    for cx, name in ((source, "source"), (target, "target")):
        if not defect_report(cx).is_strict:
            raise ValueError(f"{name} complex is not strict")
    top = source.top_degree
    if len(maps) != top + 1:
        raise ValueError(f"{len(maps)} maps for degrees 0..{top}")

    space = source.space
    new_modules: list[Optional[MarkedModule]] = [None] * (top + 1)
    new_boundaries: list[Optional[MarkedMorphism]] = [None] * top
    new_maps: list[Optional[MarkedMorphism]] = [None] * (top + 1)
    error_modules = []
    error_dims = []
    diff_sizes = []
    diff_norms = []

    # degree 0: defect of the augmentation row
    delta0 = target.augmentation.after(maps[0]).sub(source.augmentation)
    supports = [frozenset(v) for v in delta0.values]
    E0, slots = _error_module(space, supports)
    zero_hat = target.module(0).direct_sum(E0)
    aug_hat = Augmentation(
        zero_hat,
        list(target.augmentation.values)
        + [delta0.values[i] for i in sorted(slots, key=slots.get)],
    )
    new_modules[0] = zero_hat
    new_maps[0] = _corrected_map(space, maps[0], zero_hat, slots, supports)
    error_modules.append(E0)
    error_dims.append(E0.dim())
    diff_sizes.append(E0.dim())
    diff_norms.append(1 if slots else 0)

    for r in range(top):
        # Delta: C_{r+1} -> target-hat_r, the square defect against the
        # already repaired degree r map
        through_target = _pad_codomain(
            maps[r + 1].then(target.boundary(r + 1)), new_modules[r]
        )
        through_source = source.boundary(r + 1).then(new_maps[r])
        delta = through_target.sub(through_source)
        supports = [frozenset(vector_supp1(delta.row(i)))
                    for i in range(delta.domain.rank)]
        Er, slots = _error_module(space, supports)
        r_hat = target.module(r + 1).direct_sum(Er)
        new_modules[r + 1] = r_hat
        # boundary: original target boundary on the first block, the defect
        # on the error block
        d_pad = _pad_codomain(target.boundary(r + 1), new_modules[r])
        rows = [list(row) for row in d_pad.entries] + [
            list(delta.entries[i]) for i in sorted(slots, key=slots.get)
        ]
        new_boundaries[r] = MarkedMorphism.from_rows(r_hat, new_modules[r], rows)
        new_maps[r + 1] = _corrected_map(space, maps[r + 1], r_hat, slots, supports)
        error_modules.append(Er)
        error_dims.append(Er.dim())
        diff_sizes.append(Er.dim())
        diff_norms.append(1 if slots else 0)

    out = MarkedComplex(new_modules, new_boundaries, aug_hat)
    return StrictifyMapResult(
        target=out,
        maps=tuple(new_maps),
        error_modules=tuple(error_modules),
        error_dims=tuple(error_dims),
        map_diff_sizes=tuple(diff_sizes),
        map_diff_norms=tuple(diff_norms),
    )


def _corrected_map(space, f: MarkedMorphism, target_hat, slots, supports
                   ) -> MarkedMorphism:
    base_rank = f.codomain.rank
    extra = target_hat.rank - base_rank
    rows = []
    for i in range(f.domain.rank):
        row = list(f.entries[i]) + [{}] * extra
        if i in slots:
            row[base_rank + slots[i]] = celt_neg(
                space, celt_indicator(space, supports[i])
            )
        rows.append(row)
    return MarkedMorphism.from_rows(f.domain, target_hat, rows)
