"""Crossed product rings over a finite level and marked modules over them.

The level model of the crossed product: fix a finite quotient G of the
acting group and a coefficient ring (Z, or F_p with the trivial norm).  A
ring element is a finite sum z = sum_g (f_g, g) with f_g a finitely
supported function G -> coefficients, stored as {g: {point: coeff}}.
Multiplication twists by the left translation action (g.f)(x) = f(g^-1 x):

    (f, g) * (h, k) = (f * (g.h), g k)

A marked module is a finite direct sum of ideals <A_i> = (ring) * chi_{A_i}
with A_i a subset of G; its elements are tuples, component i supported in
g A_i fibre by fibre.  A marked morphism keeps one ring element per
(domain summand, codomain summand) pair, supported in A_i and g B_j fibre
by fibre; both normalisations are applied on construction, so stored data
always satisfies the support constraints.

The counting statistics N_1, N_2 of a tuple are joint across summands
(a point's count adds contributions from every (summand, group element)
pair); |.|_inf takes the max and supp_1 the union.  On one summand they
reduce to the plain element statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .groups import FiniteQuotient, parse_word, word_to_str

# Sparse function on the level: {point index: nonzero coefficient}.
Fn = dict
# Crossed ring element: {group element index: nonempty Fn}.
CElt = dict
# Module element: tuple of CElt, one per summand.
Vector = tuple


class LevelSpace:
    """A finite quotient together with a coefficient choice.

    ``char`` 0 means integer coefficients with the usual absolute value;
    a prime p means F_p with the trivial norm (|x| = 1 for x != 0).  The
    measure is the normalised counting measure on the quotient.
    """

    def __init__(self, quotient: FiniteQuotient, char: int = 0):
        if char < 0 or char == 1:
            raise ValueError(f"characteristic must be 0 or a prime, got {char}")
        self.quotient = quotient
        self.order = quotient.order
        self.char = int(char)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LevelSpace)
            and self.char == other.char
            and self.quotient.spec == other.quotient.spec
        )

    def __hash__(self):
        return hash((self.char, self.order))

    def __repr__(self) -> str:
        coeff = "Z" if self.char == 0 else f"F{self.char}"
        return f"LevelSpace(order={self.order}, coeffs={coeff})"

    def to_json(self) -> dict:
        return {"quotient": self.quotient.to_json(), "char": self.char}

    @staticmethod
    def from_json(data: dict) -> "LevelSpace":
        return LevelSpace(
            FiniteQuotient.from_json(data["quotient"]), data.get("char", 0)
        )

    # measure and coefficients ----------------------------------------------

    def measure(self, points: Iterable[int]) -> Fraction:
        return Fraction(len(points if hasattr(points, "__len__") else set(points)),
                        self.order)

    def full_carrier(self) -> frozenset:
        return frozenset(range(self.order))

    def normalize_coeff(self, c: int) -> int:
        return c % self.char if self.char else c

    def coeff_abs(self, c: int) -> int:
        if self.char:
            return 1 if c % self.char else 0
        return abs(c)

    # sparse functions -------------------------------------------------------

    def fn_normalize(self, f: Fn) -> Fn:
        out = {}
        for u, c in f.items():
            c = self.normalize_coeff(c)
            if c:
                out[u] = c
        return out

    def fn_add(self, f: Fn, g: Fn) -> Fn:
        out = dict(f)
        for u, c in g.items():
            s = self.normalize_coeff(out.get(u, 0) + c)
            if s:
                out[u] = s
            else:
                out.pop(u, None)
        return out

    def fn_neg(self, f: Fn) -> Fn:
        return {u: self.normalize_coeff(-c) for u, c in f.items()}

    def fn_sub(self, f: Fn, g: Fn) -> Fn:
        return self.fn_add(f, self.fn_neg(g))

    def fn_scale(self, a: int, f: Fn) -> Fn:
        return self.fn_normalize({u: a * c for u, c in f.items()})

    def fn_restrict(self, f: Fn, carrier) -> Fn:
        return {u: c for u, c in f.items() if u in carrier}

    def translate(self, g: int, f: Fn) -> Fn:
        """(g.f)(x) = f(g^-1 x); the support moves to g * supp(f)."""
        table = self.quotient.left_table(g)
        return {table[u]: c for u, c in f.items()}

    def indicator(self, points: Iterable[int]) -> Fn:
        return {int(u): 1 for u in points}

    def fn_l1_count(self, f: Fn) -> int:
        return sum(self.coeff_abs(c) for c in f.values())

    def fn_linf(self, f: Fn) -> int:
        return max((self.coeff_abs(c) for c in f.values()), default=0)


# ---------------------------------------------------------------------------
# ring elements


def celt_normalize(space: LevelSpace, z: CElt) -> CElt:
    out = {}
    for g, f in z.items():
        f = space.fn_normalize(f)
        if f:
            out[g] = f
    return out


def celt_indicator(space: LevelSpace, points: Iterable[int], g: int = 0) -> CElt:
    """(chi_S, g); the multiplicative unit is celt_indicator(space, all, e)."""
    f = space.indicator(points)
    return {g: f} if f else {}


def celt_unit(space: LevelSpace) -> CElt:
    return celt_indicator(space, range(space.order), space.quotient.identity)


def celt_add(space: LevelSpace, x: CElt, y: CElt) -> CElt:
    out = {g: dict(f) for g, f in x.items()}
    for g, f in y.items():
        merged = space.fn_add(out.get(g, {}), f)
        if merged:
            out[g] = merged
        else:
            out.pop(g, None)
    return out


def celt_neg(space: LevelSpace, x: CElt) -> CElt:
    return {g: space.fn_neg(f) for g, f in x.items()}


def celt_sub(space: LevelSpace, x: CElt, y: CElt) -> CElt:
    return celt_add(space, x, celt_neg(space, y))


def celt_scale(space: LevelSpace, a: int, x: CElt) -> CElt:
    out = {}
    for g, f in x.items():
        f = space.fn_scale(a, f)
        if f:
            out[g] = f
    return out


def celt_mul(space: LevelSpace, x: CElt, y: CElt) -> CElt:
    """(f, g)(h, k) = (f * (g.h), g k), extended bilinearly."""
    q = space.quotient
    out: CElt = {}
    for g, f in x.items():
        table = q.left_table(g)
        for k, h in y.items():
            gk = q.mul(g, k)
            prod = {}
            for u, c in h.items():
                gu = table[u]
                fv = f.get(gu)
                if fv is not None:
                    s = space.normalize_coeff(fv * c)
                    if s:
                        prod[gu] = s
            if prod:
                merged = space.fn_add(out.get(gk, {}), prod)
                if merged:
                    out[gk] = merged
                else:
                    out.pop(gk, None)
    return out


def celt_supp1(z: CElt) -> frozenset:
    """Union of the fibre supports; chi_supp1(z) * z = z."""
    out: set = set()
    for f in z.values():
        out.update(f)
    return frozenset(out)


def celt_apply_l(space: LevelSpace, z: CElt, xi: Fn) -> Fn:
    """Action on base functions: (f, g).xi = f * (g.xi)."""
    out: Fn = {}
    for g, f in z.items():
        table = space.quotient.left_table(g)
        for u, c in xi.items():
            gu = table[u]
            fv = f.get(gu)
            if fv is not None:
                s = space.normalize_coeff(out.get(gu, 0) + fv * c)
                if s:
                    out[gu] = s
                else:
                    out.pop(gu, None)
    return out


@dataclass(frozen=True)
class ElementStats:
    l1: Fraction
    linf: int
    n1: int
    n2: int
    size1: Fraction
    supp1: frozenset


def _stats_accumulate(space, z, counts1, counts2, supp):
    q = space.quotient
    total = 0
    linf = 0
    for g, f in z.items():
        back = q.left_table(q.inv(g))
        for u, c in f.items():
            a = space.coeff_abs(c)
            total += a
            if a > linf:
                linf = a
            counts2[u] = counts2.get(u, 0) + 1
            y = back[u]
            counts1[y] = counts1.get(y, 0) + 1
            supp.add(u)
    return total, linf


def celt_stats(space: LevelSpace, z: CElt) -> ElementStats:
    counts1: dict = {}
    counts2: dict = {}
    supp: set = set()
    total, linf = _stats_accumulate(space, z, counts1, counts2, supp)
    return ElementStats(
        l1=Fraction(total, space.order),
        linf=linf,
        n1=max(counts1.values(), default=0),
        n2=max(counts2.values(), default=0),
        size1=space.measure(supp),
        supp1=frozenset(supp),
    )


# ---------------------------------------------------------------------------
# vectors (elements of a direct sum)


def vector_add(space, x: Vector, y: Vector) -> Vector:
    return tuple(celt_add(space, a, b) for a, b in zip(x, y))


def vector_sub(space, x: Vector, y: Vector) -> Vector:
    return tuple(celt_sub(space, a, b) for a, b in zip(x, y))


def vector_neg(space, x: Vector) -> Vector:
    return tuple(celt_neg(space, a) for a in x)


def vector_scale(space, a: int, x: Vector) -> Vector:
    return tuple(celt_scale(space, a, z) for z in x)


def vector_is_zero(x: Vector) -> bool:
    return all(not z for z in x)


def vector_supp1(x: Vector) -> frozenset:
    out: set = set()
    for z in x:
        for f in z.values():
            out.update(f)
    return frozenset(out)


def vector_stats(space: LevelSpace, x: Vector) -> ElementStats:
    """Joint statistics: counts aggregate over (summand, group element)."""
    counts1: dict = {}
    counts2: dict = {}
    supp: set = set()
    total = 0
    linf = 0
    for z in x:
        t, m = _stats_accumulate(space, z, counts1, counts2, supp)
        total += t
        if m > linf:
            linf = m
    return ElementStats(
        l1=Fraction(total, space.order),
        linf=linf,
        n1=max(counts1.values(), default=0),
        n2=max(counts2.values(), default=0),
        size1=space.measure(supp),
        supp1=frozenset(supp),
    )


# ---------------------------------------------------------------------------
# marked modules


class MarkedModule:
    """A direct sum of marked ideals <A_1> + ... + <A_r>."""

    def __init__(self, space: LevelSpace, carriers: Sequence[Iterable[int]]):
        self.space = space
        fixed = []
        for A in carriers:
            A = frozenset(int(u) for u in A)
            for u in A:
                if not 0 <= u < space.order:
                    raise ValueError(f"carrier point {u} outside the level")
            fixed.append(A)
        self.carriers = tuple(fixed)

    @property
    def rank(self) -> int:
        return len(self.carriers)

    def dim(self) -> Fraction:
        return sum((self.space.measure(A) for A in self.carriers), Fraction(0))

    @classmethod
    def full(cls, space: LevelSpace, rank: int) -> "MarkedModule":
        return cls(space, [space.full_carrier()] * rank)

    def zero_vector(self) -> Vector:
        return ({},) * self.rank

    def basis_vector(self, i: int) -> Vector:
        """chi_{A_i} e_i, the marked generator of the i-th summand."""
        return self.element(i, celt_indicator(self.space, self.carriers[i]))

    def atom(self, i: int, u: int) -> Vector:
        """(chi_u, e) e_i; atoms run over i and u in A_i."""
        if u not in self.carriers[i]:
            raise ValueError(f"point {u} is not in carrier {i}")
        return self.element(i, celt_indicator(self.space, [u]))

    def element(self, i: int, z: CElt) -> Vector:
        out = [{}] * self.rank
        out[i] = self.normalize_component(i, z)
        return tuple(out)

    def normalize_component(self, i: int, z: CElt) -> CElt:
        """Project onto <A_i>: fibre at g is restricted to g A_i."""
        space = self.space
        q = space.quotient
        A = self.carriers[i]
        out = {}
        for g, f in z.items():
            table = q.left_table(g)
            allowed = {table[u] for u in A}
            f = space.fn_normalize(space.fn_restrict(f, allowed))
            if f:
                out[g] = f
        return out

    def normalize_vector(self, vec: Sequence[CElt]) -> Vector:
        if len(vec) != self.rank:
            raise ValueError(f"vector has {len(vec)} components, expected {self.rank}")
        return tuple(self.normalize_component(i, z) for i, z in enumerate(vec))

    def contains_vector(self, vec: Sequence[CElt]) -> bool:
        return len(vec) == self.rank and all(
            celt_sub(self.space, z, self.normalize_component(i, z)) == {}
            for i, z in enumerate(vec)
        )

    def atoms(self):
        for i, A in enumerate(self.carriers):
            for u in sorted(A):
                yield i, u

    def direct_sum(self, other: "MarkedModule") -> "MarkedModule":
        if self.space != other.space:
            raise ValueError("direct sum needs a common level space")
        return MarkedModule(self.space, self.carriers + other.carriers)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MarkedModule)
            and self.space == other.space
            and self.carriers == other.carriers
        )

    def __hash__(self):
        return hash((self.space, self.carriers))

    def __repr__(self) -> str:
        sizes = ",".join(str(len(A)) for A in self.carriers)
        return f"MarkedModule(order={self.space.order}, carrier sizes [{sizes}])"

    def to_json(self) -> dict:
        return {
            **self.space.to_json(),
            "carriers": [sorted(A) for A in self.carriers],
        }

    @staticmethod
    def from_json(data: dict, space: Optional[LevelSpace] = None) -> "MarkedModule":
        if space is None:
            space = LevelSpace.from_json(data)
        return MarkedModule(space, data["carriers"])


# ---------------------------------------------------------------------------
# marked morphisms


def celt_to_json(space: LevelSpace, z: CElt) -> list:
    q = space.quotient
    terms = []
    for g in z:
        terms.append(
            {
                "word": word_to_str(q.word_of(g)),
                "coeffs": [[u, z[g][u]] for u in sorted(z[g])],
            }
        )
    terms.sort(key=lambda t: t["word"])
    return terms


def celt_from_json(space: LevelSpace, terms: list) -> CElt:
    out: CElt = {}
    for term in terms:
        g = space.quotient.evaluate_word(parse_word(term["word"]))
        f = {int(u): int(c) for u, c in term["coeffs"]}
        out = celt_add(space, out, {g: f} if f else {})
    return out


class MarkedMorphism:
    """A morphism of marked modules, one ring element per summand pair.

    entries[i][j] maps the i-th domain summand to the j-th codomain
    summand; on construction each entry is normalised to lie in
    chi_{A_i} (ring) chi_{B_j}, so stored fibres satisfy
    supp(f_g) <= A_i intersect g B_j.
    """

    def __init__(self, domain: MarkedModule, codomain: MarkedModule, entries,
                 normalize: bool = True):
        if domain.space != codomain.space:
            raise ValueError("domain and codomain live over different levels")
        self.domain = domain
        self.codomain = codomain
        self.space = domain.space
        rows = []
        if len(entries) != domain.rank:
            raise ValueError(
                f"{len(entries)} entry rows for a rank {domain.rank} domain"
            )
        for i, row in enumerate(entries):
            if len(row) != codomain.rank:
                raise ValueError(
                    f"entry row {i} has {len(row)} columns, expected {codomain.rank}"
                )
            if normalize:
                row = [self._normalize_entry(i, j, z) for j, z in enumerate(row)]
            rows.append(tuple(row))
        self.entries = tuple(rows)

    def _normalize_entry(self, i: int, j: int, z: CElt) -> CElt:
        space = self.space
        q = space.quotient
        A = self.domain.carriers[i]
        B = self.codomain.carriers[j]
        out = {}
        for g, f in z.items():
            table = q.left_table(g)
            gB = {table[u] for u in B}
            f = space.fn_normalize(
                {u: c for u, c in f.items() if u in A and u in gB}
            )
            if f:
                out[g] = f
        return out

    # constructors -----------------------------------------------------------

    @classmethod
    def zero(cls, domain: MarkedModule, codomain: MarkedModule) -> "MarkedMorphism":
        return cls(
            domain,
            codomain,
            [[{} for _ in range(codomain.rank)] for _ in range(domain.rank)],
            normalize=False,
        )

    @classmethod
    def identity(cls, module: MarkedModule) -> "MarkedMorphism":
        entries = [
            [
                celt_indicator(module.space, module.carriers[i]) if i == j else {}
                for j in range(module.rank)
            ]
            for i in range(module.rank)
        ]
        return cls(module, module, entries)

    @classmethod
    def from_rows(cls, domain: MarkedModule, codomain: MarkedModule,
                  rows: Sequence[Sequence[CElt]]) -> "MarkedMorphism":
        """Build from the images of the marked generators; rows[i] is a
        codomain vector prescribing f(chi_{A_i} e_i)."""
        return cls(domain, codomain, [list(row) for row in rows])

    # algebra ----------------------------------------------------------------

    def row(self, i: int) -> Vector:
        """f(chi_{A_i} e_i); stored entries are already normalised."""
        return self.entries[i]

    def apply(self, vec: Sequence[CElt]) -> Vector:
        if len(vec) != self.domain.rank:
            raise ValueError(
                f"vector has {len(vec)} components, expected {self.domain.rank}"
            )
        space = self.space
        out = [{} for _ in range(self.codomain.rank)]
        for i, z in enumerate(vec):
            if not z:
                continue
            for j in range(self.codomain.rank):
                e = self.entries[i][j]
                if e:
                    out[j] = celt_add(space, out[j], celt_mul(space, z, e))
        return tuple(out)

    def then(self, other: "MarkedMorphism") -> "MarkedMorphism":
        """other composed after self (self first)."""
        if self.codomain != other.domain:
            raise ValueError("composition needs matching middle module")
        space = self.space
        entries = []
        for i in range(self.domain.rank):
            row = []
            for k in range(other.codomain.rank):
                acc: CElt = {}
                for j in range(self.codomain.rank):
                    a = self.entries[i][j]
                    b = other.entries[j][k]
                    if a and b:
                        acc = celt_add(space, acc, celt_mul(space, a, b))
                row.append(acc)
            entries.append(row)
        # entries are automatically normalised; skip the projection pass
        return MarkedMorphism(self.domain, other.codomain, entries, normalize=False)

    def add(self, other: "MarkedMorphism") -> "MarkedMorphism":
        self._check_same_shape(other)
        space = self.space
        entries = [
            [celt_add(space, a, b) for a, b in zip(ra, rb)]
            for ra, rb in zip(self.entries, other.entries)
        ]
        return MarkedMorphism(self.domain, self.codomain, entries, normalize=False)

    def neg(self) -> "MarkedMorphism":
        space = self.space
        entries = [[celt_neg(space, a) for a in row] for row in self.entries]
        return MarkedMorphism(self.domain, self.codomain, entries, normalize=False)

    def sub(self, other: "MarkedMorphism") -> "MarkedMorphism":
        return self.add(other.neg())

    def scale(self, a: int) -> "MarkedMorphism":
        space = self.space
        entries = [[celt_scale(space, a, z) for z in row] for row in self.entries]
        return MarkedMorphism(self.domain, self.codomain, entries, normalize=False)

    def is_zero(self) -> bool:
        return all(not z for row in self.entries for z in row)

    def _check_same_shape(self, other: "MarkedMorphism"):
        if self.domain != other.domain or self.codomain != other.codomain:
            raise ValueError("morphisms have different marked shapes")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MarkedMorphism)
            and self.domain == other.domain
            and self.codomain == other.codomain
            and self.entries == other.entries
        )

    def __repr__(self) -> str:
        return (
            f"MarkedMorphism({self.domain.rank} -> {self.codomain.rank}, "
            f"order={self.space.order})"
        )

    # serialisation -----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            **self.space.to_json(),
            "domain": [sorted(A) for A in self.domain.carriers],
            "codomain": [sorted(B) for B in self.codomain.carriers],
            "entries": [
                [celt_to_json(self.space, z) for z in row] for row in self.entries
            ],
        }

    @staticmethod
    def from_json(data: dict, space: Optional[LevelSpace] = None) -> "MarkedMorphism":
        if space is None:
            space = LevelSpace.from_json(data)
        domain = MarkedModule(space, data["domain"])
        codomain = MarkedModule(space, data["codomain"])
        entries = [
            [celt_from_json(space, t) for t in row] for row in data["entries"]
        ]
        return MarkedMorphism(domain, codomain, entries)


def morphism_apply(f: MarkedMorphism, vec: Sequence[CElt]) -> Vector:
    return f.apply(vec)


def compose(outer: MarkedMorphism, inner: MarkedMorphism) -> MarkedMorphism:
    """outer after inner."""
    return inner.then(outer)


# ---------------------------------------------------------------------------
# morphism statistics and norms


@dataclass(frozen=True)
class MorphismStats:
    size1: Fraction
    n1: int
    n2: int
    n1_max: int
    n2_max: int
    linf: int

    @property
    def k_bound(self) -> int:
        """N_2max * linf; always dominates the operator norm."""
        return self.n2_max * self.linf


def morphism_stats(f: MarkedMorphism) -> MorphismStats:
    space = f.space
    size1 = Fraction(0)
    n1 = n2 = n1_max = n2_max = linf = 0
    for i in range(f.domain.rank):
        s = vector_stats(space, f.row(i))
        size1 += s.size1
        n1 += s.n1
        n2 += s.n2
        n1_max = max(n1_max, s.n1)
        n2_max = max(n2_max, s.n2)
        linf = max(linf, s.linf)
    return MorphismStats(size1=size1, n1=n1, n2=n2, n1_max=n1_max,
                         n2_max=n2_max, linf=linf)


def op_norm(f: MarkedMorphism) -> int:
    """max over atoms (i, u in A_i) of the l1 mass of the image of the atom,
    renormalised by the measure of the atom; an integer."""
    space = f.space
    best = 0
    for i, A in enumerate(f.domain.carriers):
        per_point: dict[int, int] = {}
        for j in range(f.codomain.rank):
            for g, fn in f.entries[i][j].items():
                for u, c in fn.items():
                    per_point[u] = per_point.get(u, 0) + space.coeff_abs(c)
        # entries are normalised, so per_point only sees points of A_i
        if per_point:
            best = max(best, max(per_point.values()))
    return best


def marked_rank(f: MarkedMorphism) -> Fraction:
    """Total measure of the smallest marked submodule of the codomain
    containing the image: per codomain summand, the union of g^-1 supp(f_g)
    over all entries of the column."""
    space = f.space
    q = space.quotient
    total = Fraction(0)
    for j in range(f.codomain.rank):
        covered: set = set()
        for i in range(f.domain.rank):
            for g, fn in f.entries[i][j].items():
                back = q.left_table(q.inv(g))
                covered.update(back[u] for u in fn)
        total += space.measure(covered)
    return total


@dataclass(frozen=True)
class AlmostEqReport:
    size1: Fraction
    delta: Fraction
    op_norm: Optional[int]
    k: Optional[int]

    @property
    def within(self) -> bool:
        if self.size1 >= self.delta:
            return False
        if self.k is not None and self.op_norm is not None and self.op_norm > self.k:
            return False
        return True


def almost_eq(f: MarkedMorphism, g: MarkedMorphism, delta, k: Optional[int] = None
              ) -> AlmostEqReport:
    """Measure f =_delta g (strictly less than delta), optionally with the
    operator norm bound ||f - g|| <= k."""
    diff = f.sub(g)
    size1 = morphism_stats(diff).size1
    norm = op_norm(diff) if k is not None else None
    return AlmostEqReport(size1=size1, delta=Fraction(delta), op_norm=norm, k=k)


# ---------------------------------------------------------------------------
# marked inclusions and projections


def _check_assignment(sub: MarkedModule, ambient: MarkedModule,
                      assignment: Sequence[int]):
    if len(assignment) != sub.rank:
        raise ValueError("assignment length must equal the submodule rank")
    seen = set()
    for i, j in enumerate(assignment):
        if not 0 <= j < ambient.rank:
            raise ValueError(f"assignment target {j} out of range")
        if j in seen:
            raise ValueError("assignment must be injective on summands")
        seen.add(j)
        if not sub.carriers[i] <= ambient.carriers[j]:
            raise ValueError(
                f"carrier {i} is not contained in ambient carrier {j}"
            )


def marked_inclusion(sub: MarkedModule, ambient: MarkedModule,
                     assignment: Sequence[int]) -> MarkedMorphism:
    """The inclusion <A_i> -> <A'_sigma(i)> given A_i <= A'_sigma(i), each
    entry the identity indicator chi_{A_i}."""
    _check_assignment(sub, ambient, assignment)
    entries = [[{} for _ in range(ambient.rank)] for _ in range(sub.rank)]
    for i, j in enumerate(assignment):
        entries[i][j] = celt_indicator(sub.space, sub.carriers[i])
    return MarkedMorphism(sub, ambient, entries)


def marked_projection(ambient: MarkedModule, sub: MarkedModule,
                      assignment: Sequence[int]) -> MarkedMorphism:
    """The left inverse of marked_inclusion with the same assignment:
    restricts summand sigma(i) to <A_i> and kills unassigned summands."""
    _check_assignment(sub, ambient, assignment)
    entries = [[{} for _ in range(sub.rank)] for _ in range(ambient.rank)]
    for i, j in enumerate(assignment):
        entries[j][i] = celt_indicator(sub.space, sub.carriers[i])
    return MarkedMorphism(ambient, sub, entries)


# ---------------------------------------------------------------------------
# augmentations (maps from a degree-0 module to the base functions)


class Augmentation:
    """A module map eta: M -> L given by the values xi_i = eta(chi_{A_i} e_i),
    one base function per summand, supported in A_i.

    eta(z) = sum_i z_i . xi_i, the crossed ring acting on base functions.
    For such single-column maps the operator norm is exactly the max
    absolute value of the stored values, so norm bounds are exact here.
    """

    def __init__(self, domain: MarkedModule, values: Sequence[Fn]):
        if len(values) != domain.rank:
            raise ValueError(
                f"{len(values)} augmentation values for rank {domain.rank}"
            )
        self.domain = domain
        self.space = domain.space
        self.values = tuple(
            self.space.fn_normalize(
                self.space.fn_restrict(v, domain.carriers[i])
            )
            for i, v in enumerate(values)
        )

    @classmethod
    def zero(cls, domain: MarkedModule) -> "Augmentation":
        return cls(domain, [{}] * domain.rank)

    def apply(self, vec: Sequence[CElt]) -> Fn:
        if len(vec) != self.domain.rank:
            raise ValueError(
                f"vector has {len(vec)} components, expected {self.domain.rank}"
            )
        space = self.space
        out: Fn = {}
        for z, xi in zip(vec, self.values):
            if z and xi:
                out = space.fn_add(out, celt_apply_l(space, z, xi))
        return out

    def after(self, f: MarkedMorphism) -> "Augmentation":
        """The composite self o f, again an augmentation on f.domain."""
        if f.codomain != self.domain:
            raise ValueError("composition needs matching middle module")
        values = [self.apply(f.row(i)) for i in range(f.domain.rank)]
        return Augmentation(f.domain, values)

    def sub(self, other: "Augmentation") -> "Augmentation":
        if self.domain != other.domain:
            raise ValueError("augmentations have different domains")
        return Augmentation(
            self.domain,
            [self.space.fn_sub(a, b) for a, b in zip(self.values, other.values)],
        )

    def linf(self) -> int:
        """Exact operator norm, and also the bound K_eta."""
        return max((self.space.fn_linf(v) for v in self.values), default=0)

    def size1(self) -> Fraction:
        """Sum over summands of the measure of the value support."""
        return sum(
            (self.space.measure(set(v)) for v in self.values), Fraction(0)
        )

    def is_zero(self) -> bool:
        return all(not v for v in self.values)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Augmentation)
            and self.domain == other.domain
            and self.values == other.values
        )

    def __repr__(self) -> str:
        return f"Augmentation(rank {self.domain.rank}, order={self.space.order})"

    def to_json(self) -> dict:
        return {
            **self.domain.to_json(),
            "values": [[[u, v[u]] for u in sorted(v)] for v in self.values],
        }

    @staticmethod
    def from_json(data: dict, space: Optional[LevelSpace] = None) -> "Augmentation":
        domain = MarkedModule.from_json(data, space)
        values = [{int(u): int(c) for u, c in pairs} for pairs in data["values"]]
        return Augmentation(domain, values)


def augmentation_almost_eq(a: Augmentation, b: Augmentation, delta,
                           k: Optional[int] = None) -> AlmostEqReport:
    diff = a.sub(b)
    norm = diff.linf() if k is not None else None
    return AlmostEqReport(size1=diff.size1(), delta=Fraction(delta),
                          op_norm=norm, k=k)
