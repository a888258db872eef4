"""Concrete families: resolutions, cheap covers, Rokhlin complexes.

Resolution data is kept at the group ring level (ranks plus matrices of
word-coefficient dictionaries) so one description can be induced at every
finite level.  The other constructions live at a fixed level: a greedy
cheap degree-0 piece, the two-term complex attached to a Rokhlin tile of
Z/M, the chain homotopy equivalence between that complex and the induced
resolution of the integers, and extension of a short complex to higher
degrees along prescribed syzygies with support-minimal carriers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .groups import (
    FiniteQuotient,
    Word,
    fox_derivative,
    push_to_quotient,
    reduce_word,
)
from .crossring import (
    Augmentation,
    LevelSpace,
    MarkedModule,
    MarkedMorphism,
    celt_add,
    celt_indicator,
    celt_mul,
    celt_normalize,
    celt_sub,
    celt_supp1,
    op_norm,
)
from .complexes import MarkedComplex, defect_report


def _gen(k: int, e: int = 1) -> Word:
    return ((k, e),) if e else ()


def _gm1(k: int) -> dict:
    return {_gen(k): 1, (): -1}


# ---------------------------------------------------------------------------
# resolution data over group rings


def resolution_free(rank: int):
    """Free group on ``rank`` letters: 0 -> R^rank -> R -> Z -> 0."""
    if rank < 1:
        raise ValueError("free resolution needs at least one generator")
    return [1, rank], [[[_gm1(k)] for k in range(rank)]]


def resolution_integers():
    return resolution_free(1)


def surface_relator(genus: int) -> Word:
    """Product of commutators [x_0, x_1]...[x_{2g-2}, x_{2g-1}]."""
    raw = []
    for i in range(genus):
        a, b = 2 * i, 2 * i + 1
        raw += [(a, 1), (b, 1), (a, -1), (b, -1)]
    return reduce_word(tuple(raw))


def resolution_surface(genus: int):
    """Closed orientable surface group: ranks (1, 2g, 1), top boundary the
    free derivatives of the relator."""
    if genus < 1:
        raise ValueError("surface resolution needs genus >= 1")
    rel = surface_relator(genus)
    d1 = [[_gm1(k)] for k in range(2 * genus)]
    d2 = [[fox_derivative(rel, k) for k in range(2 * genus)]]
    return [1, 2 * genus, 1], [d1, d2]


def resolution_free_abelian(dim: int):
    """Koszul resolution of Z^dim; rank C(dim, r) in degree r.

    The boundaries square to zero only once the generator images commute,
    which holds at every level of an abelian quotient.
    """
    if dim < 1:
        raise ValueError("free abelian resolution needs dimension >= 1")
    ranks = []
    subsets = []
    for r in range(dim + 1):
        subs = [tuple(s) for s in combinations(range(dim), r)]
        subsets.append({s: k for k, s in enumerate(subs)})
        ranks.append(len(subs))
    matrices = []
    for r in range(1, dim + 1):
        rows = []
        for s in sorted(subsets[r], key=subsets[r].get):
            row = [{} for _ in range(ranks[r - 1])]
            for pos, k in enumerate(s):
                off = tuple(x for x in s if x != k)
                coeff = 1 if pos % 2 == 0 else -1
                row[subsets[r - 1][off]] = {
                    _gen(k): coeff, (): -coeff,
                }
            rows.append(row)
        matrices.append(rows)
    return ranks, matrices


def resolution_by_name(family: str, param: Optional[int] = None):
    if family == "free":
        return resolution_free(2 if param is None else param)
    if family == "surface":
        return resolution_surface(2 if param is None else param)
    if family == "integers":
        return resolution_integers()
    if family == "free_abelian":
        return resolution_free_abelian(2 if param is None else param)
    raise ValueError(f"unknown resolution family {family!r}")


# ---------------------------------------------------------------------------
# cheap degree-0 pieces by greedy covering


@dataclass(frozen=True)
class Degree0Result:
    complex: MarkedComplex
    witness: tuple
    base: frozenset       # A, carried by the first summand
    remainder: frozenset  # B = G minus the covered part, second summand
    pieces: tuple         # (translate, chunk) with chunk <= translate . A

    @property
    def dim(self) -> Fraction:
        return self.complex.module(0).dim()


def degree0_cheap(space: LevelSpace, translates: Sequence[int],
                  epsilon: Fraction) -> Degree0Result:
    """Greedy cover of the level by translates of a small base set.

    Points join the base while they enlarge the covered part, largest gain
    first and smallest point on ties, stopping at a full cover or once the
    base has measure epsilon/2.  Fails if base plus remainder is not
    smaller than epsilon.
    """
    q = space.quotient
    translates = list(dict.fromkeys(translates))
    if not translates:
        raise ValueError("need at least one translate")
    tables = [q.left_table(g) for g in translates]
    everything = set(range(space.order))
    base: set = set()
    covered: set = set()
    half = Fraction(epsilon, 2)
    while covered != everything and Fraction(len(base), space.order) < half:
        best_gain, best_point = 0, None
        for u in range(space.order):
            if u in base:
                continue
            gain = sum(1 for tab in tables if tab[u] not in covered)
            if gain > best_gain:
                best_gain, best_point = gain, u
        if best_point is None:
            break
        base.add(best_point)
        for tab in tables:
            covered.add(tab[best_point])
    remainder = everything - covered
    if Fraction(len(base) + len(remainder), space.order) >= epsilon:
        raise ValueError(
            f"cover of measure {Fraction(len(base) + len(remainder), space.order)} "
            f"is not below epsilon = {epsilon}"
        )

    pieces = []
    spoken = set()
    for g, tab in zip(translates, tables):
        chunk = frozenset(tab[u] for u in base) - spoken
        spoken |= chunk
        if chunk:
            pieces.append((g, chunk))

    module = MarkedModule(space, [frozenset(base), frozenset(remainder)])
    aug = Augmentation(module, [space.indicator(base),
                                space.indicator(remainder)])
    first = {}
    for g, chunk in pieces:
        first = celt_add(space, first, celt_indicator(space, chunk, g))
    witness = (first, celt_indicator(space, remainder))
    cx = MarkedComplex([module], [], aug)
    return Degree0Result(
        complex=cx,
        witness=witness,
        base=frozenset(base),
        remainder=frozenset(remainder),
        pieces=tuple(pieces),
    )


# ---------------------------------------------------------------------------
# Rokhlin complexes for Z at level Z/M


@dataclass(frozen=True)
class RokhlinResult:
    complex: MarkedComplex
    witness: tuple
    modulus: int
    tile: int
    base: frozenset       # residues 0, N, ..., (q-1)N
    remainder: frozenset  # residues qN .. M-1
    point: tuple          # point[r] = element index of t^r

    @property
    def carrier(self) -> frozenset:
        return self.base | self.remainder

    @property
    def dim(self) -> Fraction:
        return self.complex.module(0).dim()

    @property
    def boundary_norm(self) -> int:
        return op_norm(self.complex.boundary(1))


def _residue_points(quotient: FiniteQuotient):
    t = quotient.generator_images[0]
    return tuple(quotient.power(t, r) for r in range(quotient.order))


def rokhlin_partition(modulus: int, tile: int) -> RokhlinResult:
    """The two-term complex of the tile {0, N, ..., (q-1)N} in Z/M.

    Both modules sit on C = A u B where A is the tile base and B the
    ragged top; the witness x = sum_{j<N} (chi_{t^j A}, t^j) + (chi_B, e)
    has eta(x) = 1 exactly and the boundary has operator norm 2.
    """
    M, N = modulus, tile
    if not 1 <= N <= M:
        raise ValueError("need 1 <= tile <= modulus")
    quotient = FiniteQuotient.abelian([M])
    space = LevelSpace(quotient)
    point = _residue_points(quotient)
    q = M // N
    base = frozenset(point[j * N] for j in range(q))
    remainder = frozenset(point[k] for k in range(q * N, M))
    carrier = base | remainder

    def shifted(res_set, shift):
        return frozenset(point[(r + shift) % M]
                         for r in range(M) if point[r] in res_set)

    module = MarkedModule(space, [carrier])
    aug = Augmentation(module, [space.indicator(carrier)])

    x = {}
    for j in range(N):
        x = celt_add(space, x, celt_indicator(space, shifted(base, j), point[j]))
    x = celt_add(space, x, celt_indicator(space, remainder))

    entry = celt_indicator(space, carrier)
    entry = celt_sub(space, entry,
                     celt_indicator(space, shifted(base, N), point[N % M]))
    entry = celt_sub(space, entry,
                     celt_indicator(space, shifted(remainder, 1), point[1 % M]))
    boundary = MarkedMorphism(module, module, [[entry]])
    cx = MarkedComplex([module, module], [boundary], aug)
    return RokhlinResult(
        complex=cx,
        witness=(x,),
        modulus=M,
        tile=N,
        base=base,
        remainder=remainder,
        point=point,
    )


# --- contraction of the lifted complex, exponents kept in Z ---------------


def tower_mul(modulus: int, x: dict, y: dict) -> dict:
    """Product of sums of (residue, exponent) basis elements: (u, m)(v, k)
    is (u, m + k) when u = m + v mod M and zero otherwise."""
    out = {}
    for (u, m), c in x.items():
        for (v, k), d in y.items():
            if u == (m + v) % modulus:
                key = (u, m + k)
                val = out.get(key, 0) + c * d
                if val:
                    out[key] = val
                else:
                    out.pop(key, None)
    return out


def _rokhlin_residues(modulus: int, tile: int):
    q = modulus // tile
    base = {j * tile for j in range(q)}
    rem = set(range(q * tile, modulus))
    return base, rem


def rokhlin_tower_boundary(modulus: int, tile: int) -> dict:
    base, rem = _rokhlin_residues(modulus, tile)
    out = {(u, 0): 1 for u in base | rem}
    for a in base:
        out[((a + tile) % modulus, tile)] = -1
    for b in rem:
        out[((b + 1) % modulus, 1)] = out.get(((b + 1) % modulus, 1), 0) - 1
    return {k: v for k, v in out.items() if v}


def tower_contract(modulus: int, tile: int, elt: dict) -> dict:
    """c_0: on a basis element (u, m) of the lifted degree-0 module, minus
    the sum of (u, j) over 0 <= j < m with u in t^j C, and the mirrored
    positive sum for negative m."""
    base, rem = _rokhlin_residues(modulus, tile)
    carrier = base | rem
    out = {}
    for (u, m), c in elt.items():
        span = range(0, m) if m >= 0 else range(m, 0)
        sign = -1 if m >= 0 else 1
        for j in span:
            if (u - j) % modulus in carrier:
                key = (u, j)
                val = out.get(key, 0) + sign * c
                if val:
                    out[key] = val
                else:
                    out.pop(key, None)
    return out


def rokhlin_tower_contraction(modulus: int, tile: int,
                              span: Optional[range] = None) -> bool:
    """Check c_0 o d_1 = id on lifted basis elements over a window of
    exponents (the identity is exponent-uniform, the window is a probe)."""
    if span is None:
        span = range(-2 * modulus, 2 * modulus + 1)
    base, rem = _rokhlin_residues(modulus, tile)
    carrier = base | rem
    s_d = rokhlin_tower_boundary(modulus, tile)
    for m in span:
        for c_res in carrier:
            u = (c_res + m) % modulus
            z = {(u, m): 1}
            if tower_contract(modulus, tile, tower_mul(modulus, z, s_d)) != z:
                return False
    return True


def rokhlin_level_contraction(result: RokhlinResult) -> bool:
    """Check d_1 o c_0 = id - c_{-1} o eta at the level, with exponents
    read from the canonical representatives 0 <= m < M."""
    M = result.modulus
    space = result.complex.space
    point = result.point
    exponent = {point[m]: m for m in range(M)}
    carrier = result.carrier
    shifts = [frozenset(point[(exponent[p] + j) % M] for p in carrier)
              for j in range(M)]
    x = result.witness[0]
    d1 = result.complex.boundary(1)
    aug = result.complex.augmentation

    def c0(celt):
        out = {}
        for g, fn in celt.items():
            m = exponent[g]
            for u, c in fn.items():
                for j in range(m):
                    if u in shifts[j]:
                        out = celt_add(space, out, {point[j]: {u: -c}})
        return celt_normalize(space, out)

    for m in range(M):
        g = point[m]
        for u in shifts[m]:
            z = {g: {u: 1}}
            lhs = d1.apply((c0(z),))[0]
            eta = aug.apply((z,))
            rhs = celt_sub(space, z, celt_mul(space, {0: eta}, x))
            if lhs != rhs:
                return False
    return True


# ---------------------------------------------------------------------------
# the induced resolution of Z as a homotopy retract of a Rokhlin complex


@dataclass(frozen=True)
class EmbeddingResult:
    source: MarkedComplex   # induced resolution of Z, full carriers
    target: MarkedComplex   # Rokhlin complex
    forward: tuple          # f_r: source_r -> target_r
    backward: tuple         # r_r: target_r -> source_r
    homotopies: tuple       # h_0: source_0 -> source_1

    @property
    def norms(self) -> dict:
        return {
            "f0": op_norm(self.forward[0]),
            "f1": op_norm(self.forward[1]),
            "r0": op_norm(self.backward[0]),
            "r1": op_norm(self.backward[1]),
            "h0": op_norm(self.homotopies[0]),
        }


def integers_embedding(modulus: int, tile: int) -> EmbeddingResult:
    """Chain maps both ways between the induced resolution of Z at Z/M and
    the Rokhlin complex of the tile, with a homotopy making the induced
    resolution a retract.  Norms stay bounded by the tile: f, r0 by 1, r1
    by N and h0 by N - 1.
    """
    rok = rokhlin_partition(modulus, tile)
    M, N = modulus, tile
    space = rok.complex.space
    point = rok.point
    # resolution of Z with the degree-1 generator oriented so that
    # d_1 = 1 - t; this matches the sign of the Rokhlin boundary
    full = MarkedModule(space, [space.full_carrier()])
    d_entry = celt_sub(space, celt_indicator(space, range(M)),
                       celt_indicator(space, range(M), point[1 % M]))
    source = MarkedComplex(
        [full, full],
        [MarkedMorphism(full, full, [[d_entry]])],
        Augmentation(full, [space.indicator(range(M))]),
    )

    rok_exp = {point[m]: m for m in range(M)}

    def shifted(res_set, shift):
        return frozenset(point[(rok_exp[p] + shift) % M] for p in res_set)

    tile_top = shifted(rok.base, N)      # t^N A
    rem_up = shifted(rok.remainder, 1)   # t B

    f0 = MarkedMorphism(source.module(0), rok.complex.module(0),
                        [[rok.witness[0]]])
    f1 = MarkedMorphism(source.module(1), rok.complex.module(1),
                        [[celt_indicator(space, rok.carrier)]])
    r0 = MarkedMorphism(rok.complex.module(0), source.module(0),
                        [[celt_indicator(space, rok.carrier)]])
    x_tilde = {}
    for j in range(N):
        x_tilde = celt_add(space, x_tilde,
                           celt_indicator(space, tile_top, point[j]))
    x_tilde = celt_add(space, x_tilde, celt_indicator(space, rem_up))
    r1 = MarkedMorphism(rok.complex.module(1), source.module(1), [[x_tilde]])
    h_entry = {}
    for j in range(N):
        piece = shifted(rok.base, j)
        for k in range(j):
            h_entry = celt_sub(space, h_entry,
                               celt_indicator(space, piece, point[k]))
    h0 = MarkedMorphism(source.module(0), source.module(1), [[h_entry]])
    return EmbeddingResult(
        source=source,
        target=rok.complex,
        forward=(f0, f1),
        backward=(r0, r1),
        homotopies=(h0,),
    )


# ---------------------------------------------------------------------------
# extension along syzygies with support-minimal carriers


def ring_matrix_to_celts(space: LevelSpace, matrix, gen_images=None):
    """Push a matrix of group ring elements to level elements with full
    base functions, one (c chi_G, g) term per image element."""
    out = []
    for row in matrix:
        new = []
        for elt in row:
            pushed = push_to_quotient(elt, space.quotient, gen_images)
            celt = {g: {u: c for u in range(space.order)}
                    for g, c in pushed.items()}
            new.append(celt_normalize(space, celt))
        out.append(new)
    return out


def ring_kappa(matrix) -> int:
    """Largest l1 coefficient mass of an entry."""
    return max(
        (sum(abs(c) for c in elt.values()) for row in matrix for elt in row),
        default=0,
    )


def supp1_extend(space: LevelSpace, lam, codomain: MarkedModule
                 ) -> MarkedMorphism:
    """Morphism with entries lam[i][j] . chi_{B_j} and the smallest marked
    domain carrying them: A_i is the union of left supports of row i."""
    rows = len(lam)
    images = []
    carriers = []
    for i in range(rows):
        if len(lam[i]) != codomain.rank:
            raise ValueError(
                f"row {i} has {len(lam[i])} entries for rank {codomain.rank}"
            )
        row = [
            celt_mul(space, lam[i][j],
                     celt_indicator(space, codomain.carriers[j]))
            for j in range(codomain.rank)
        ]
        support = frozenset().union(*(celt_supp1(z) for z in row)) \
            if row else frozenset()
        images.append(row)
        carriers.append(support)
    domain = MarkedModule(space, carriers)
    return MarkedMorphism(domain, codomain, images)


def supp1_chain_extend(base: MarkedComplex, matrices,
                       gen_images=None) -> MarkedComplex:
    """Extend a complex upwards along group ring syzygies.

    matrices[k] maps the new degree top+k+1 to the previous top; each
    new module carries exactly the supports of the pushed rows, so chi_A z
    = z holds and composites vanish whenever the ring products do.  The
    result is validated and a non-complex input is rejected.
    """
    space = base.space
    modules = list(base.modules)
    boundaries = [base.boundary(r) for r in range(1, base.top_degree + 1)]
    for mat in matrices:
        lam = ring_matrix_to_celts(space, mat, gen_images)
        nxt = supp1_extend(space, lam, modules[-1])
        modules.append(nxt.domain)
        boundaries.append(nxt)
    out = MarkedComplex(modules, boundaries, base.augmentation)
    report = defect_report(out)
    if not report.is_strict:
        raise ValueError(
            f"extension is not a chain complex, defects {report.composite_sizes}"
        )
    return out
