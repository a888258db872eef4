"""Marked chain complexes over a level, exactness defects, comparisons.

A complex stores one marked module per degree 0..top, boundaries
d_r: D_r -> D_{r-1} for r >= 1 and an optional augmentation eta: D_0 -> L.
Nothing is assumed exact: defect_report measures how far d o d and
eta o d_1 are from zero, and the almost-equality comparisons below measure
distances between complexes sharing an ambient.

Compositions that land in the base module (eta o d_1, augmentation rows of
chain map checks and of ambient comparisons) are measured after collapsing
to base functions.  Measuring them as maps into a rank-one marked module
would report spurious nonzero defects: (1, e) - (1, g) is a nonzero ring
element whose action on base functions is zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .crossring import (
    Augmentation,
    CElt,
    LevelSpace,
    MarkedModule,
    MarkedMorphism,
    Vector,
    celt_from_json,
    celt_to_json,
    marked_inclusion,
    marked_projection,
    morphism_stats,
    op_norm,
    vector_stats,
)
from .groups import push_to_quotient


class MarkedComplex:
    """Modules indexed by degree, boundaries, optional augmentation."""

    def __init__(
        self,
        modules: Sequence[MarkedModule],
        boundaries: Sequence[MarkedMorphism],
        augmentation: Optional[Augmentation] = None,
    ):
        if not modules:
            raise ValueError("a complex needs at least degree 0")
        if len(boundaries) != len(modules) - 1:
            raise ValueError(
                f"{len(boundaries)} boundaries for {len(modules)} degrees"
            )
        space = modules[0].space
        for m in modules:
            if m.space != space:
                raise ValueError("all degrees must share the level space")
        for r, d in enumerate(boundaries, start=1):
            if d.domain != modules[r] or d.codomain != modules[r - 1]:
                raise ValueError(f"boundary {r} has mismatched modules")
        if augmentation is not None and augmentation.domain != modules[0]:
            raise ValueError("augmentation domain must be degree 0")
        self.modules = tuple(modules)
        self._boundaries = tuple(boundaries)
        self.augmentation = augmentation
        self.space = space

    @property
    def top_degree(self) -> int:
        return len(self.modules) - 1

    def module(self, r: int) -> MarkedModule:
        return self.modules[r]

    def boundary(self, r: int) -> MarkedMorphism:
        if not 1 <= r <= self.top_degree:
            raise ValueError(f"no boundary in degree {r}")
        return self._boundaries[r - 1]

    def boundaries(self):
        return self._boundaries

    def dims(self) -> list[Fraction]:
        return [m.dim() for m in self.modules]

    def __repr__(self) -> str:
        ranks = ",".join(str(m.rank) for m in self.modules)
        return f"MarkedComplex(degrees 0..{self.top_degree}, ranks [{ranks}])"

    def to_json(self) -> dict:
        return {
            **self.space.to_json(),
            "degrees": [[sorted(A) for A in m.carriers] for m in self.modules],
            "boundaries": [
                [[celt_to_json(self.space, z) for z in row] for row in d.entries]
                for d in self._boundaries
            ],
            "augmentation": None
            if self.augmentation is None
            else [[[u, v[u]] for u in sorted(v)] for v in self.augmentation.values],
        }

    @staticmethod
    def from_json(data: dict, space: Optional[LevelSpace] = None) -> "MarkedComplex":
        if space is None:
            space = LevelSpace.from_json(data)
        modules = [MarkedModule(space, cs) for cs in data["degrees"]]
        boundaries = []
        for r, rows in enumerate(data["boundaries"], start=1):
            entries = [[celt_from_json(space, t) for t in row] for row in rows]
            boundaries.append(MarkedMorphism(modules[r], modules[r - 1], entries))
        aug = None
        if data.get("augmentation") is not None:
            values = [
                {int(u): int(c) for u, c in pairs} for pairs in data["augmentation"]
            ]
            aug = Augmentation(modules[0], values)
        return MarkedComplex(modules, boundaries, aug)


# ---------------------------------------------------------------------------
# defect measurement


@dataclass(frozen=True)
class DefectReport:
    """Sizes of d_{r-1} o d_r (keyed by r) and of eta o d_1 if augmented."""

    composite_sizes: dict
    composite_norms: dict
    aug_size: Optional[Fraction]
    aug_linf: Optional[int]

    @property
    def max_size(self) -> Fraction:
        sizes = list(self.composite_sizes.values())
        if self.aug_size is not None:
            sizes.append(self.aug_size)
        return max(sizes, default=Fraction(0))

    @property
    def is_strict(self) -> bool:
        return self.max_size == 0


def defect_report(cx: MarkedComplex) -> DefectReport:
    sizes = {}
    norms = {}
    for r in range(2, cx.top_degree + 1):
        comp = cx.boundary(r).then(cx.boundary(r - 1))
        sizes[r] = morphism_stats(comp).size1
        norms[r] = op_norm(comp)
    aug_size = aug_linf = None
    if cx.augmentation is not None and cx.top_degree >= 1:
        comp = cx.augmentation.after(cx.boundary(1))
        aug_size = comp.size1()
        aug_linf = comp.linf()
    return DefectReport(sizes, norms, aug_size, aug_linf)


@dataclass(frozen=True)
class KappaStats:
    """Norm and counting profile of a complex: kappa bounds operator norms,
    nu the fibre counts (nu_low with max taken over rows instead of sums)."""

    kappa: int
    nu: int
    nu_low: int
    dims: tuple

    def bounded_by(self, kappa: int) -> bool:
        return self.kappa < kappa and all(d < kappa for d in self.dims)


def kappa_stats(cx: MarkedComplex) -> KappaStats:
    kappa = nu = nu_low = 0
    if cx.augmentation is not None:
        norm = cx.augmentation.linf()
        kappa = nu = nu_low = norm
    for r in range(1, cx.top_degree + 1):
        s = morphism_stats(cx.boundary(r))
        kappa = max(kappa, op_norm(cx.boundary(r)))
        nu = max(nu, s.n1)
        nu_low = max(nu_low, s.n1_max)
    return KappaStats(kappa=kappa, nu=nu, nu_low=nu_low,
                      dims=tuple(m.dim() for m in cx.modules))


@dataclass(frozen=True)
class WitnessReport:
    """How close eta(z) is to the constant function 1."""

    defect_support: frozenset
    defect_size: Fraction
    defect_linf: int
    n1: int
    n2: int
    linf: int

    def within(self, delta, kappa: int) -> bool:
        return (
            self.defect_size < Fraction(delta)
            and self.n1 < kappa
            and self.n2 < kappa
            and self.linf < kappa
        )


def witness_report(cx: MarkedComplex, z: Vector) -> WitnessReport:
    if cx.augmentation is None:
        raise ValueError("witness reports need an augmented complex")
    space = cx.space
    value = cx.augmentation.apply(z)
    one = space.indicator(range(space.order))
    diff = space.fn_sub(value, one)
    stats = vector_stats(space, z)
    return WitnessReport(
        defect_support=frozenset(diff),
        defect_size=space.measure(set(diff)),
        defect_linf=space.fn_linf(diff),
        n1=stats.n1,
        n2=stats.n2,
        linf=stats.linf,
    )


# ---------------------------------------------------------------------------
# chain maps


@dataclass(frozen=True)
class ChainMapReport:
    square_sizes: dict
    square_norms: dict
    aug_size: Optional[Fraction]
    aug_linf: Optional[int]

    @property
    def max_size(self) -> Fraction:
        sizes = list(self.square_sizes.values())
        if self.aug_size is not None:
            sizes.append(self.aug_size)
        return max(sizes, default=Fraction(0))

    @property
    def is_strict(self) -> bool:
        return self.max_size == 0


def check_chain_map(
    maps: Sequence[MarkedMorphism],
    source: MarkedComplex,
    target: MarkedComplex,
) -> ChainMapReport:
    """Measure the commutation defects of maps[r]: source_r -> target_r.

    Squares are d^T_r o f_r - f_{r-1} o d^S_r for r >= 1; if both ends are
    augmented the degree-0 row compares eta_T o f_0 with eta_S, collapsed.
    """
    top = min(source.top_degree, target.top_degree, len(maps) - 1)
    for r in range(top + 1):
        if maps[r].domain != source.module(r) or maps[r].codomain != target.module(r):
            raise ValueError(f"chain map degree {r} has mismatched modules")
    sizes = {}
    norms = {}
    for r in range(1, top + 1):
        left = maps[r].then(target.boundary(r))
        right = source.boundary(r).then(maps[r - 1])
        diff = left.sub(right)
        sizes[r] = morphism_stats(diff).size1
        norms[r] = op_norm(diff)
    aug_size = aug_linf = None
    if source.augmentation is not None and target.augmentation is not None:
        diff = target.augmentation.after(maps[0]).sub(source.augmentation)
        aug_size = diff.size1()
        aug_linf = diff.linf()
    return ChainMapReport(sizes, norms, aug_size, aug_linf)


# ---------------------------------------------------------------------------
# induced resolutions


def induce_resolution(
    space: LevelSpace,
    ranks: Sequence[int],
    matrices: Sequence[Sequence[Sequence[dict]]],
    gen_images: Optional[Sequence[int]] = None,
    augmented: bool = True,
) -> MarkedComplex:
    """Induce free resolution data to the level, with full carriers.

    ranks[r] is the free rank in degree r; matrices[r] is the degree r+1
    boundary, a ranks[r+1] x ranks[r] array of group ring elements over the
    free group (dicts {word: coeff}).  A word w becomes the ring element
    (coeff * chi_G, image of w); words that merge in the quotient add.
    gen_images overrides the quotient's generator images, so resolutions of
    a subgroup generator can be pushed along a chosen embedding.
    """
    if len(matrices) != len(ranks) - 1:
        raise ValueError(f"{len(matrices)} matrices for {len(ranks)} ranks")
    q = space.quotient
    modules = [MarkedModule.full(space, n) for n in ranks]
    full = range(space.order)
    boundaries = []
    for r, mat in enumerate(matrices, start=1):
        if len(mat) != ranks[r]:
            raise ValueError(f"matrix {r} has {len(mat)} rows, expected {ranks[r]}")
        entries = []
        for row in mat:
            if len(row) != ranks[r - 1]:
                raise ValueError(
                    f"matrix {r} row has {len(row)} columns, expected {ranks[r - 1]}"
                )
            out_row = []
            for elt in row:
                pushed = push_to_quotient(elt, q, gen_images)
                celt: CElt = {}
                for g, c in pushed.items():
                    fn = space.fn_normalize({u: c for u in full})
                    if fn:
                        celt[g] = fn
                out_row.append(celt)
            entries.append(out_row)
        boundaries.append(
            MarkedMorphism(modules[r], modules[r - 1], entries, normalize=False)
        )
    aug = None
    if augmented:
        if ranks[0] != 1:
            raise ValueError("augmented induction expects a rank 1 degree 0")
        aug = Augmentation(modules[0], [space.indicator(full)])
    return MarkedComplex(modules, boundaries, aug)


# ---------------------------------------------------------------------------
# mapping cones


@dataclass(frozen=True)
class ConeResult:
    complex: MarkedComplex
    # layout[n] lists ("shift", i) for C_{n-1} summands and ("target", j)
    # for D_n summands, in storage order
    layout: tuple


def mapping_cone(
    maps: Sequence[MarkedMorphism],
    source: MarkedComplex,
    target: MarkedComplex,
) -> ConeResult:
    """Cone of a strict chain map phi: C -> D.

    Cone_n = C_{n-1} + D_n with d(c, d) = (-d^C c, d^D d + phi c).  The
    result carries no augmentation: the degree 0 part is D_0 but eta_D o
    d_1^Cone is nonzero whenever phi_0 hits eta, so an augmented cone would
    not even be an almost complex for small delta.
    """
    report = check_chain_map(maps, source, target)
    if not report.is_strict:
        raise ValueError(
            f"mapping cone needs a strict chain map, defects {report.square_sizes}"
        )
    if source.top_degree != target.top_degree:
        raise ValueError("cone expects equal top degrees")
    top = target.top_degree
    space = target.space
    modules = []
    layout = []
    for n in range(top + 2):
        parts = []
        tags = []
        if 1 <= n <= top + 1:
            shifted = source.module(n - 1)
            parts.extend(shifted.carriers)
            tags.extend(("shift", i) for i in range(shifted.rank))
        if n <= top:
            parts.extend(target.module(n).carriers)
            tags.extend(("target", j) for j in range(target.module(n).rank))
        modules.append(MarkedModule(space, parts))
        layout.append(tuple(tags))

    boundaries = []
    for n in range(1, top + 2):
        dom, cod = modules[n], modules[n - 1]
        entries = [[{} for _ in range(cod.rank)] for _ in range(dom.rank)]
        dom_tags, cod_tags = layout[n], layout[n - 1]
        cod_pos = {tag: t for t, tag in enumerate(cod_tags)}
        neg_dC = source.boundary(n - 1).neg() if n - 1 >= 1 else None
        for s, (kind, i) in enumerate(dom_tags):
            if kind == "shift":
                # -d^C into the shifted block, phi into the target block
                if neg_dC is not None:
                    for j in range(neg_dC.codomain.rank):
                        entries[s][cod_pos[("shift", j)]] = neg_dC.entries[i][j]
                phi = maps[n - 1]
                for j in range(phi.codomain.rank):
                    entries[s][cod_pos[("target", j)]] = phi.entries[i][j]
            else:
                dD = target.boundary(n)
                for j in range(dD.codomain.rank):
                    entries[s][cod_pos[("target", j)]] = dD.entries[i][j]
        boundaries.append(MarkedMorphism(dom, cod, entries, normalize=False))
    return ConeResult(MarkedComplex(modules, boundaries, None), tuple(layout))


# ---------------------------------------------------------------------------
# tensor products


@dataclass(frozen=True)
class TensorResult:
    complex: MarkedComplex
    # summands[n] lists (p, i, j): degree p factor summand i with degree
    # n-p factor summand j, in storage order
    summands: tuple


def tensor_complex(left: MarkedComplex, right: MarkedComplex) -> TensorResult:
    """Degreewise tensor product with intersected carriers.

    (L @ R)_n sums <A_i intersect B_j> over p + q = n; the boundary acts by
    d_L on the left index and by (-1)^p d_R on the right index, entries
    restricted to the intersected carriers by the morphism normalisation.
    The restriction is exact when entries do not distinguish the two factor
    carriers (full carriers, e.g. induced resolutions); in general the
    output is a well formed sequence whose defect_report measures the loss.
    """
    if left.space != right.space:
        raise ValueError("tensor factors live over different levels")
    space = left.space
    top = left.top_degree + right.top_degree
    summands = []
    modules = []
    for n in range(top + 1):
        tags = []
        carriers = []
        for p in range(max(0, n - right.top_degree), min(n, left.top_degree) + 1):
            q = n - p
            for i, A in enumerate(left.module(p).carriers):
                for j, B in enumerate(right.module(q).carriers):
                    tags.append((p, i, j))
                    carriers.append(A & B)
        summands.append(tuple(tags))
        modules.append(MarkedModule(space, carriers))

    boundaries = []
    for n in range(1, top + 1):
        dom, cod = modules[n], modules[n - 1]
        entries = [[{} for _ in range(cod.rank)] for _ in range(dom.rank)]
        cod_pos = {tag: t for t, tag in enumerate(summands[n - 1])}
        for s, (p, i, j) in enumerate(summands[n]):
            q = n - p
            if p >= 1:
                dL = left.boundary(p)
                for i2 in range(dL.codomain.rank):
                    t = cod_pos.get((p - 1, i2, j))
                    if t is not None:
                        entries[s][t] = dL.entries[i][i2]
            if q >= 1:
                dR = right.boundary(q)
                sign = -1 if p % 2 else 1
                scaled = dR if sign == 1 else dR.neg()
                for j2 in range(dR.codomain.rank):
                    t = cod_pos.get((p, i, j2))
                    if t is not None:
                        entries[s][t] = scaled.entries[j][j2]
        boundaries.append(MarkedMorphism(dom, cod, entries))

    aug = None
    if left.augmentation is not None and right.augmentation is not None:
        values = []
        for (p, i, j) in summands[0]:
            vi = left.augmentation.values[i]
            vj = right.augmentation.values[j]
            values.append(
                space.fn_normalize(
                    {u: vi[u] * vj[u] for u in vi.keys() & vj.keys()}
                )
            )
        aug = Augmentation(modules[0], values)
    return TensorResult(MarkedComplex(modules, boundaries, aug), tuple(summands))


def tensor_vector(result: TensorResult, degree_pair, left_vec: Vector,
                  right_vec: Vector) -> Vector:
    """Componentwise product z_i * w_j placed on the (p, i, j) summands of
    the tensor; exact for product-independent data."""
    from .crossring import celt_mul

    p, q = degree_pair
    n = p + q
    module = result.complex.module(n)
    out = [dict() for _ in range(module.rank)]
    pos = {tag: t for t, tag in enumerate(result.summands[n])}
    for i, z in enumerate(left_vec):
        for j, w in enumerate(right_vec):
            t = pos.get((p, i, j))
            if t is not None and z and w:
                out[t] = celt_mul(result.complex.space, z, w)
    return module.normalize_vector(out)


# ---------------------------------------------------------------------------
# ambient comparisons (Gromov-Hausdorff style witnesses)


@dataclass(frozen=True)
class GHWitness:
    """Two complexes embedded in shared ambient modules, degree by degree.

    ambients[r] is the shared module P_r; the assignments give the marked
    inclusions (summand i of the complex sits inside ambient summand
    assignment[i], with carrier containment).  delta bounds, per degree,
    both the carrier symmetric difference and the size of the boundary
    comparison; k bounds the comparison operator norms.
    """

    ambients: tuple
    left_assignments: tuple
    right_assignments: tuple
    delta: Fraction
    k: int


@dataclass(frozen=True)
class GHReport:
    symdiff: tuple
    map_sizes: tuple
    map_norms: tuple
    aug_size: Optional[Fraction]
    aug_linf: Optional[int]
    delta: Fraction
    k: int

    @property
    def within(self) -> bool:
        vals = list(self.symdiff) + list(self.map_sizes)
        if self.aug_size is not None:
            vals.append(self.aug_size)
        norms = list(self.map_norms)
        if self.aug_linf is not None:
            norms.append(self.aug_linf)
        return all(v < self.delta for v in vals) and all(
            n <= self.k for n in norms
        )


def _comparison_map(cx: MarkedComplex, witness_side, ambients, r: int
                    ) -> MarkedMorphism:
    """phi_{r-1} o d_r o pi_{phi_r} on the ambient modules."""
    pi = marked_projection(ambients[r], cx.module(r), witness_side[r])
    iota = marked_inclusion(cx.module(r - 1), ambients[r - 1], witness_side[r - 1])
    return pi.then(cx.boundary(r)).then(iota)


def gh_verify(left: MarkedComplex, right: MarkedComplex, witness: GHWitness
              ) -> GHReport:
    """Measure the witness: carrier symmetric differences and boundary
    comparisons per degree, augmentation row collapsed."""
    if left.top_degree != right.top_degree:
        raise ValueError("ambient comparison expects equal top degrees")
    if (left.augmentation is None) != (right.augmentation is None):
        raise ValueError("either both or neither complex may be augmented")
    top = left.top_degree
    if len(witness.ambients) != top + 1:
        raise ValueError(f"{len(witness.ambients)} ambients for top degree {top}")
    space = left.space
    symdiff = []
    for r in range(top + 1):
        P = witness.ambients[r]
        # also validates carrier containments
        marked_inclusion(left.module(r), P, witness.left_assignments[r])
        marked_inclusion(right.module(r), P, witness.right_assignments[r])
        left_at = {t: left.module(r).carriers[i]
                   for i, t in enumerate(witness.left_assignments[r])}
        right_at = {t: right.module(r).carriers[j]
                    for j, t in enumerate(witness.right_assignments[r])}
        total = Fraction(0)
        for t in range(P.rank):
            S = left_at.get(t, frozenset())
            T = right_at.get(t, frozenset())
            total += space.measure(S ^ T)
        symdiff.append(total)

    map_sizes = []
    map_norms = []
    for r in range(1, top + 1):
        F = _comparison_map(left, witness.left_assignments, witness.ambients, r)
        G = _comparison_map(right, witness.right_assignments, witness.ambients, r)
        diff = F.sub(G)
        map_sizes.append(morphism_stats(diff).size1)
        map_norms.append(op_norm(diff))

    aug_size = aug_linf = None
    if left.augmentation is not None:
        piL = marked_projection(witness.ambients[0], left.module(0),
                                witness.left_assignments[0])
        piR = marked_projection(witness.ambients[0], right.module(0),
                                witness.right_assignments[0])
        diff = left.augmentation.after(piL).sub(right.augmentation.after(piR))
        aug_size = diff.size1()
        aug_linf = diff.linf()
    return GHReport(
        symdiff=tuple(symdiff),
        map_sizes=tuple(map_sizes),
        map_norms=tuple(map_norms),
        aug_size=aug_size,
        aug_linf=aug_linf,
        delta=witness.delta,
        k=witness.k,
    )


def gh_identity_witness(cx: MarkedComplex, delta=None, k: Optional[int] = None
                        ) -> GHWitness:
    """The trivial witness comparing a complex with itself in itself."""
    assignments = tuple(
        tuple(range(cx.module(r).rank)) for r in range(cx.top_degree + 1)
    )
    stats = kappa_stats(cx)
    return GHWitness(
        ambients=tuple(cx.modules),
        left_assignments=assignments,
        right_assignments=assignments,
        delta=Fraction(delta) if delta is not None else Fraction(1),
        k=k if k is not None else stats.kappa,
    )


def gh_compose(first: GHWitness, middle: MarkedComplex, second: GHWitness
               ) -> GHWitness:
    """Glue two witnesses along the common middle complex.

    Per degree the new ambient is the pushout of the two ambients along the
    middle inclusions: ambient summands receiving the same middle summand
    are merged (carrier union), all other summands are kept.  Parameters
    add: (delta + delta', k + k').
    """
    top = middle.top_degree
    ambients = []
    left_assignments = []
    right_assignments = []
    for r in range(top + 1):
        P, Q = first.ambients[r], second.ambients[r]
        into_P = first.right_assignments[r]
        into_Q = second.left_assignments[r]
        if len(into_P) != middle.module(r).rank or len(into_Q) != middle.module(r).rank:
            raise ValueError("witnesses do not agree on the middle complex")
        carriers = []
        p_pos = {}
        q_pos = {}
        for j in range(middle.module(r).rank):
            p_pos[into_P[j]] = len(carriers)
            q_pos[into_Q[j]] = len(carriers)
            carriers.append(P.carriers[into_P[j]] | Q.carriers[into_Q[j]])
        for t in range(P.rank):
            if t not in p_pos:
                p_pos[t] = len(carriers)
                carriers.append(P.carriers[t])
        for t in range(Q.rank):
            if t not in q_pos:
                q_pos[t] = len(carriers)
                carriers.append(Q.carriers[t])
        ambients.append(MarkedModule(middle.space, carriers))
        left_assignments.append(
            tuple(p_pos[t] for t in first.left_assignments[r])
        )
        right_assignments.append(
            tuple(q_pos[t] for t in second.right_assignments[r])
        )
    return GHWitness(
        ambients=tuple(ambients),
        left_assignments=tuple(left_assignments),
        right_assignments=tuple(right_assignments),
        delta=first.delta + second.delta,
        k=first.k + second.k,
    )


def gh_transport_vector(left: MarkedComplex, right: MarkedComplex,
                        witness: GHWitness, vec: Vector, degree: int = 0
                        ) -> Vector:
    """Move a vector across the witness: pi_{phi'} (phi (vec)).

    Transporting an augmentation witness this way degrades its defect by at
    most (1 + N_1(vec)) times the witness delta, and never increases N_1,
    N_2 or the sup norm."""
    iota = marked_inclusion(left.module(degree), witness.ambients[degree],
                            witness.left_assignments[degree])
    pi = marked_projection(witness.ambients[degree], right.module(degree),
                           witness.right_assignments[degree])
    return pi.apply(iota.apply(vec))


def gh_extracted_maps(left: MarkedComplex, right: MarkedComplex,
                      witness: GHWitness) -> list[MarkedMorphism]:
    """The comparison maps pi_{phi'} o phi: left_r -> right_r."""
    maps = []
    for r in range(left.top_degree + 1):
        iota = marked_inclusion(left.module(r), witness.ambients[r],
                                witness.left_assignments[r])
        pi = marked_projection(witness.ambients[r], right.module(r),
                               witness.right_assignments[r])
        maps.append(iota.then(pi))
    return maps
