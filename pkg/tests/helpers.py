"""Builders shared by the test modules."""

from torgrad.groups import parse_word
from torgrad.crossring import (
    Augmentation,
    MarkedModule,
    MarkedMorphism,
    celt_add,
)
from torgrad.complexes import MarkedComplex, induce_resolution


def w(s):
    return parse_word(s)


def gm1(s):
    # g - 1 in the group ring
    return {w(s): 1, (): -1}


def free_complex(space, letters="ab"):
    mat = [[gm1(c)] for c in letters]
    return induce_resolution(space, [1, len(letters)], [mat])


def koszul2(space):
    return induce_resolution(
        space,
        [1, 2, 1],
        [
            [[gm1("a")], [gm1("b")]],
            [[{w("b"): -1, (): 1}, gm1("a")]],
        ],
    )


def zres(space, image):
    """Resolution of a single generator pushed along t -> image."""
    return induce_resolution(space, [1, 1], [[[gm1("a")]]], gen_images=[image])


def rebuild(cx, modules=None, entries_patch=None, aug_values=None):
    """Copy a complex, optionally with new modules, patched boundary
    entries {degree: entries}, or new augmentation values."""
    modules = list(modules if modules is not None else cx.modules)
    boundaries = []
    for r in range(1, cx.top_degree + 1):
        entries = (
            entries_patch[r]
            if entries_patch and r in entries_patch
            else [list(row) for row in cx.boundary(r).entries]
        )
        boundaries.append(MarkedMorphism(modules[r], modules[r - 1], entries))
    aug = None
    if cx.augmentation is not None:
        values = list(aug_values if aug_values is not None
                      else cx.augmentation.values)
        aug = Augmentation(modules[0], values)
    return MarkedComplex(modules, boundaries, aug)


def restricted_copy(cx, degree, summand, removed):
    """Copy with carrier points removed from one summand of one degree."""
    modules = list(cx.modules)
    carriers = list(modules[degree].carriers)
    carriers[summand] = carriers[summand] - frozenset(removed)
    modules[degree] = MarkedModule(cx.space, carriers)
    return rebuild(cx, modules=modules)


def with_boundary_extra(cx, r, i, j, extra):
    """Copy with ``extra`` added to entry (i, j) of the degree r boundary."""
    entries = [list(row) for row in cx.boundary(r).entries]
    entries[i][j] = celt_add(cx.space, entries[i][j], extra)
    return rebuild(cx, entries_patch={r: entries})


def with_aug_extra(cx, i, delta_fn):
    values = list(cx.augmentation.values)
    values[i] = cx.space.fn_add(values[i], delta_fn)
    return rebuild(cx, aug_values=values)
