"""Log-norm bounds for torsion growth.

A partition of the domain atoms of a morphism gives the bound

    sum over blocks of  min(dim block, rank of f on block) * log+ |f on block|

normalised by the group order.  The block norm is the largest l1 mass of
an atom image, the block rank is the integer rank of the corresponding
columns of the coinvariants matrix, and log+ x = max(0, log x).  The value
of a block depends only on its atom set, so the best bound over all
decompositions is a minimum over set partitions; atoms with zero norm
contribute nothing and are kept out of the search.

For plain integer matrices the same game is played on columns: the exact
torsion of the cokernel (through Smith form) is dominated by the greedy
column bound (sum of log column norms over a rationally spanning subset,
cheapest columns first), which in turn is dominated by the one-block
split bound.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .crossring import MarkedMorphism
from .discretize import (
    coinvariants_matrix,
    cokernel_log_torsion,
    mat_shape,
    matrix_rank,
)

LOG_SLACK = 1e-9
EXACT_ATOM_CAP = 10


def log_plus(x) -> float:
    return math.log(x) if x > 1 else 0.0


def atom_norms(f: MarkedMorphism) -> dict:
    """l1 mass of the image of each domain atom, as integers."""
    out = {}
    for i in range(f.domain.rank):
        row = f.entries[i]
        for u in sorted(f.domain.carriers[i]):
            total = 0
            for j in range(f.codomain.rank):
                for fn in row[j].values():
                    c = fn.get(u)
                    if c:
                        total += f.space.coeff_abs(c)
            out[(i, u)] = total
    return out


class _BlockContext:
    """Shared data for evaluating blocks of one morphism, with caching."""

    def __init__(self, f: MarkedMorphism):
        self.order = f.space.order
        self.norms = atom_norms(f)
        self.matrix = coinvariants_matrix(f)
        atoms = list(f.domain.atoms())
        self.col_of = {atom: k for k, atom in enumerate(atoms)}
        self._cache = {}

    def value(self, block) -> float:
        key = frozenset(block)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        norm = max((self.norms[a] for a in key), default=0)
        if norm <= 1:
            self._cache[key] = 0.0
            return 0.0
        cols = sorted(self.col_of[a] for a in key)
        sub = [[row[c] for c in cols] for row in self.matrix]
        rank = matrix_rank(sub)
        weight = Fraction(min(len(key), rank), self.order)
        val = float(weight) * math.log(norm)
        self._cache[key] = val
        return val

    def total(self, blocks) -> float:
        return sum(self.value(b) for b in blocks)


def _validate_blocks(f: MarkedMorphism, ctx: _BlockContext, blocks) -> list:
    seen = set()
    cleaned = []
    for block in blocks:
        block = list(block)
        for atom in block:
            if atom not in ctx.norms:
                raise ValueError(f"atom {atom} is not in the domain")
            if atom in seen:
                raise ValueError(f"atom {atom} appears in two blocks")
            seen.add(atom)
        if block:
            cleaned.append(block)
    missing = [a for a, n in ctx.norms.items() if n and a not in seen]
    if missing:
        raise ValueError(f"atoms {missing} with nonzero norm are uncovered")
    return cleaned


def lognorm_of_decomposition(f: MarkedMorphism, blocks: Iterable) -> float:
    """Bound attached to an explicit partition of the domain atoms.

    Blocks must be disjoint and cover every atom of nonzero norm; atoms of
    zero norm may be left out or placed anywhere.
    """
    ctx = _BlockContext(f)
    return ctx.total(_validate_blocks(f, ctx, blocks))


def _atoms_blocks(ctx: _BlockContext) -> list:
    by_norm = {}
    for atom, n in ctx.norms.items():
        if n:
            by_norm.setdefault(n, []).append(atom)
    return [sorted(v) for _, v in sorted(by_norm.items())]


def _greedy_blocks(ctx: _BlockContext) -> list:
    blocks = [frozenset(b) for b in _atoms_blocks(ctx)]
    while len(blocks) > 1:
        best = None
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                merged = blocks[i] | blocks[j]
                gain = (ctx.value(merged)
                        - ctx.value(blocks[i]) - ctx.value(blocks[j]))
                if gain < -1e-12 and (best is None or gain < best[0]):
                    best = (gain, i, j, merged)
        if best is None:
            break
        _, i, j, merged = best
        blocks = [b for k, b in enumerate(blocks) if k not in (i, j)]
        blocks.append(merged)
    return [sorted(b) for b in blocks]


def set_partitions(items: Sequence):
    """All partitions of items into nonempty blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]
        yield [[first]] + part


def lognorm_certificate(
    f: MarkedMorphism,
    strategy: str = "greedy",
    max_atoms: int = EXACT_ATOM_CAP,
) -> tuple:
    """Value plus the decomposition realising it, for audit output.

    Blocks are lists of (summand, point) atoms; atoms of zero norm are
    left out, they never contribute.
    """
    ctx = _BlockContext(f)
    live = sorted(a for a, n in ctx.norms.items() if n)
    if not live:
        return 0.0, []
    if strategy == "block":
        return ctx.value(live), [list(live)]
    if strategy == "atoms":
        blocks = _atoms_blocks(ctx)
        return ctx.total(blocks), blocks
    if strategy == "greedy":
        blocks = _greedy_blocks(ctx)
        total = ctx.total(blocks)
        single = ctx.value(live)
        if single < total:
            return single, [list(live)]
        return total, blocks
    if strategy == "exact":
        if len(live) > max_atoms:
            raise ValueError(
                f"{len(live)} atoms exceed the exhaustive cap {max_atoms}"
            )
        best_val, best_blocks = None, None
        for part in set_partitions(live):
            val = ctx.total(part)
            if best_val is None or val < best_val:
                best_val, best_blocks = val, part
        return best_val, best_blocks
    raise ValueError(f"unknown strategy {strategy!r}")


def lognorm_upper(
    f: MarkedMorphism,
    strategy: str = "greedy",
    max_atoms: int = EXACT_ATOM_CAP,
) -> float:
    """Upper bound for the log-norm of f by the named search strategy.

    Every returned value is realised by some decomposition, so the chain
    exact <= greedy <= atoms and exact <= block always holds.
    """
    return lognorm_certificate(f, strategy, max_atoms)[0]


def lognorm_exact(f: MarkedMorphism, max_atoms: int = EXACT_ATOM_CAP) -> float:
    return lognorm_upper(f, "exact", max_atoms)


# ---------------------------------------------------------------------------
# integer matrix bounds


def column_l1s(a) -> list:
    rows, cols = mat_shape(a)
    return [sum(abs(a[i][j]) for i in range(rows)) for j in range(cols)]


def gabber_column_bound(a) -> float:
    """Sum of log column norms over a cheap rationally spanning subset.

    Columns are tried in order of ascending l1 norm and kept when they
    grow the rank, so the chosen set spans the image over Q and the
    torsion of the cokernel divides the product of the kept norms.
    """
    rows, cols = mat_shape(a)
    norms = column_l1s(a)
    order = sorted(range(cols), key=lambda j: (norms[j], j))
    chosen = []
    rank = 0
    total = 0.0
    for j in order:
        if not norms[j]:
            continue
        candidate = chosen + [j]
        r = matrix_rank([[row[c] for c in candidate] for row in a])
        if r > rank:
            chosen = candidate
            rank = r
            total += log_plus(norms[j])
            if rank == min(rows, cols):
                break
    return total


def gabber_split_bound(a, blocks: Optional[Iterable] = None) -> float:
    """Per-block bound min(block size, block rank) * log+ (max column norm).

    With the trivial one-block split this dominates the greedy column
    bound, which in turn dominates the exact cokernel torsion.
    """
    rows, cols = mat_shape(a)
    norms = column_l1s(a)
    if blocks is None:
        blocks = [list(range(cols))]
    seen = set()
    total = 0.0
    for block in blocks:
        block = [int(j) for j in block]
        for j in block:
            if not 0 <= j < cols:
                raise ValueError(f"column {j} outside 0..{cols - 1}")
            if j in seen:
                raise ValueError(f"column {j} appears in two blocks")
            seen.add(j)
        peak = max((norms[j] for j in block), default=0)
        if peak <= 1:
            continue
        rank = matrix_rank([[row[j] for j in block] for row in a])
        total += min(len(block), rank) * math.log(peak)
    if len(seen) != cols:
        raise ValueError("blocks must cover every column")
    return total


def gabber_exact(a) -> float:
    """Exact log torsion of the cokernel, through Smith normal form."""
    return cokernel_log_torsion(a)
