"""Free-group words, integral group rings, Fox calculus, finite quotients.

A presented group is only ever touched through its finite quotients: words
stay elements of the ambient free group, and equality of words is decided
by evaluating both sides in a quotient.  A quotient enumerates its elements
once, breadth first over the generator images, keeping a shortest
representative word per element; everything downstream addresses elements
by their integer index, with index 0 the identity.
"""

from __future__ import annotations

import os
import re
import string
from collections import deque
from typing import Callable, Iterable, Optional, Sequence

# A word is a reduced tuple of (generator index, nonzero exponent) pairs,
# adjacent pairs having distinct generators.  () is the identity.
Word = tuple
# A group-ring element is a dict {word: nonzero integer coefficient}.
RingElt = dict

ORDER_CAP_ENV = "TORGRAD_ORDER_CAP"
DEFAULT_ORDER_CAP = 10_000


class OrderCapExceeded(RuntimeError):
    """A quotient enumeration grew past the configured element cap."""


def order_cap() -> int:
    """Current cap on quotient order, from TORGRAD_ORDER_CAP (default 10000)."""
    raw = os.environ.get(ORDER_CAP_ENV)
    if raw is None:
        return DEFAULT_ORDER_CAP
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{ORDER_CAP_ENV} must be an integer, got {raw!r}") from None
    if value <= 0:
        raise ValueError(f"{ORDER_CAP_ENV} must be positive, got {value}")
    return value


# ---------------------------------------------------------------------------
# words


def reduce_word(pairs: Iterable[Sequence[int]]) -> Word:
    """Freely reduce a sequence of (generator, exponent) pairs.

    Adjacent powers of the same generator merge, zero exponents vanish.
    """
    stack: list[tuple[int, int]] = []
    for g, e in pairs:
        g = int(g)
        e = int(e)
        if g < 0:
            raise ValueError(f"negative generator index {g}")
        if e == 0:
            continue
        if stack and stack[-1][0] == g:
            e += stack.pop()[1]
            if e == 0:
                continue
        stack.append((g, e))
    return tuple(stack)


def word_mul(u: Word, v: Word) -> Word:
    return reduce_word(tuple(u) + tuple(v))


def word_inv(u: Word) -> Word:
    return tuple((g, -e) for g, e in reversed(u))


def word_pow(u: Word, n: int) -> Word:
    if n < 0:
        return word_pow(word_inv(u), -n)
    acc: Word = ()
    for _ in range(n):
        acc = word_mul(acc, u)
    return acc


_TOKEN = re.compile(r"([a-z])(?:\^?(-?\d+))?")


def parse_word(text: str, num_generators: Optional[int] = None) -> Word:
    """Parse a word like ``"aba-1b-1"`` or ``"a^2 c-3"``.

    Generators are single lowercase letters a, b, c, ... mapped to indices
    0, 1, 2, ...; an optional integer exponent (with optional ``^``) follows
    each letter.  ``""`` and ``"1"`` both denote the identity.
    """
    stripped = text.replace("*", " ").strip()
    if stripped in ("", "1"):
        return ()
    pairs = []
    pos = 0
    for match in _TOKEN.finditer(stripped):
        if stripped[pos : match.start()].strip():
            raise ValueError(f"cannot parse word {text!r} near offset {pos}")
        letter, exp = match.groups()
        g = ord(letter) - ord("a")
        if num_generators is not None and g >= num_generators:
            raise ValueError(
                f"word {text!r} uses generator {letter!r} but only "
                f"{num_generators} generators are declared"
            )
        pairs.append((g, 1 if exp is None else int(exp)))
        pos = match.end()
    if stripped[pos:].strip():
        raise ValueError(f"cannot parse word {text!r} near offset {pos}")
    return reduce_word(pairs)


def generator_name(g: int) -> str:
    if not 0 <= g < 26:
        raise ValueError(f"generator index {g} out of the a..z range")
    return string.ascii_lowercase[g]


def word_to_str(word: Word) -> str:
    """Canonical compact spelling; the identity prints as an empty string."""
    return "".join(
        generator_name(g) + (str(e) if e != 1 else "") for g, e in word
    )


# ---------------------------------------------------------------------------
# integral group ring of the free group


def ring_from_word(word: Word, coeff: int = 1) -> RingElt:
    return {tuple(word): coeff} if coeff else {}


def ring_one() -> RingElt:
    return {(): 1}


def ring_add(x: RingElt, y: RingElt) -> RingElt:
    out = dict(x)
    for w, c in y.items():
        s = out.get(w, 0) + c
        if s:
            out[w] = s
        else:
            out.pop(w, None)
    return out


def ring_neg(x: RingElt) -> RingElt:
    return {w: -c for w, c in x.items()}


def ring_sub(x: RingElt, y: RingElt) -> RingElt:
    return ring_add(x, ring_neg(y))


def ring_mul(x: RingElt, y: RingElt) -> RingElt:
    out: RingElt = {}
    for u, cu in x.items():
        for v, cv in y.items():
            w = word_mul(u, v)
            s = out.get(w, 0) + cu * cv
            if s:
                out[w] = s
            else:
                out.pop(w, None)
    return out


def fox_derivative(word: Word, gen: int) -> RingElt:
    """Free derivative d(word)/d(gen) in the integral group ring.

    Characterised by d(uv) = du + u dv, dg/dg = 1, dh/dg = 0 for h != g,
    which forces d(g^-1)/dg = -g^-1.
    """
    out: RingElt = {}
    prefix: Word = ()
    for g, e in word:
        if g == gen:
            if e > 0:
                terms = [word_mul(prefix, ((g, k),) if k else ()) for k in range(e)]
                sign = 1
            else:
                terms = [word_mul(prefix, ((g, -k),)) for k in range(1, -e + 1)]
                sign = -1
            for t in terms:
                out = ring_add(out, ring_from_word(t, sign))
        prefix = word_mul(prefix, ((g, e),))
    return out


def fox_identity_defect(word: Word, num_generators: int) -> RingElt:
    """sum_g d(word)/dg * (g - 1) - (word - 1); zero for every word."""
    total: RingElt = {}
    for g in range(num_generators):
        bracket = ring_add(ring_from_word(((g, 1),)), ring_from_word((), -1))
        total = ring_add(total, ring_mul(fox_derivative(word, g), bracket))
    return ring_sub(total, ring_sub(ring_from_word(word), ring_one()))


# ---------------------------------------------------------------------------
# presentations


class Presentation:
    """A finite presentation: a generator count and a tuple of relator words."""

    def __init__(self, num_generators: int, relators: Iterable[Word]):
        self.num_generators = int(num_generators)
        if self.num_generators < 0:
            raise ValueError("generator count must be nonnegative")
        self.relators = tuple(reduce_word(r) for r in relators)
        for r in self.relators:
            for g, _ in r:
                if g >= self.num_generators:
                    raise ValueError(
                        f"relator {word_to_str(r)!r} uses generator index {g}, "
                        f"outside the declared {self.num_generators}"
                    )

    @staticmethod
    def from_json(data: dict) -> "Presentation":
        num = data["generators"]
        rels = [parse_word(r, num) for r in data.get("relators", [])]
        return Presentation(num, rels)

    def to_json(self) -> dict:
        return {
            "generators": self.num_generators,
            "relators": [word_to_str(r) for r in self.relators],
        }

    def __repr__(self) -> str:
        rels = ", ".join(word_to_str(r) or "1" for r in self.relators)
        return f"Presentation(<{self.num_generators} gens | {rels}>)"


# ---------------------------------------------------------------------------
# finite quotients


def _enumerate_subgroup(
    identity_key,
    gen_keys: Sequence,
    key_mul: Callable,
    key_inv: Callable,
    cap: int,
):
    keys = [identity_key]
    words: list[Word] = [()]
    index = {identity_key: 0}
    steps = []
    for gi, gk in enumerate(gen_keys):
        steps.append((gi, 1, gk))
        steps.append((gi, -1, key_inv(gk)))
    queue = deque([0])
    while queue:
        i = queue.popleft()
        base_key = keys[i]
        base_word = words[i]
        for gi, e, gk in steps:
            nk = key_mul(base_key, gk)
            if nk in index:
                continue
            if len(keys) >= cap:
                raise OrderCapExceeded(
                    f"quotient enumeration exceeded {cap} elements; raise "
                    f"{ORDER_CAP_ENV} to allow larger levels"
                )
            index[nk] = len(keys)
            keys.append(nk)
            words.append(word_mul(base_word, ((gi, e),)))
            queue.append(index[nk])
    return keys, words, index


class FiniteQuotient:
    """A finite quotient group, enumerated once and addressed by index.

    ``mul`` and ``inv`` act on indices.  ``left_table(g)`` returns (and
    caches) the permutation x -> g*x as a list, for translation-heavy
    callers.  ``word_of(i)`` is a representative word mapping onto element
    i, so data keyed by group elements can be serialised losslessly.
    """

    def __init__(self, spec: dict, gen_keys, identity_key, key_mul, key_inv):
        self.spec = spec
        self._key_mul = key_mul
        self._key_inv = key_inv
        keys, words, index = _enumerate_subgroup(
            identity_key, gen_keys, key_mul, key_inv, order_cap()
        )
        self._keys = keys
        self._words = words
        self._index = index
        self.order = len(keys)
        self.identity = 0
        self.generator_images = tuple(index[k] for k in gen_keys)
        self._left_tables: dict[int, list[int]] = {}

    # construction ---------------------------------------------------------

    @classmethod
    def abelian(
        cls,
        moduli: Sequence[int],
        images: Optional[Sequence[Sequence[int]]] = None,
    ) -> "FiniteQuotient":
        """Quotient inside Z/m_1 x ... x Z/m_k.

        Without ``images`` the j-th generator maps to the j-th basis vector
        (so the generator count equals len(moduli)); ``images`` overrides
        this with one coefficient vector per generator.
        """
        moduli = tuple(int(m) for m in moduli)
        if not moduli:
            raise ValueError("abelian quotient needs at least one modulus")
        for m in moduli:
            if m < 1:
                raise ValueError(f"moduli must be >= 1, got {m}")
        k = len(moduli)
        if images is None:
            vecs = [[1 if j == i else 0 for j in range(k)] for i in range(k)]
        else:
            vecs = [list(map(int, v)) for v in images]
            for v in vecs:
                if len(v) != k:
                    raise ValueError(
                        f"abelian image {v} has length {len(v)}, expected {k}"
                    )
        gen_keys = [tuple(c % m for c, m in zip(v, moduli)) for v in vecs]
        spec: dict = {"kind": "abelian", "moduli": list(moduli)}
        if images is not None:
            spec["images"] = [list(v) for v in vecs]

        def key_mul(x, y):
            return tuple((a + b) % m for a, b, m in zip(x, y, moduli))

        def key_inv(x):
            return tuple(-a % m for a, m in zip(x, moduli))

        return cls(spec, gen_keys, (0,) * k, key_mul, key_inv)

    @classmethod
    def permutation(
        cls, degree: int, images: Sequence[Sequence[int]]
    ) -> "FiniteQuotient":
        """Quotient inside the symmetric group on {0, ..., degree-1}.

        Permutations are one-line notation, 0-indexed, acting on the left;
        composition applies the right factor first.
        """
        degree = int(degree)
        if degree < 1:
            raise ValueError("permutation degree must be >= 1")
        gen_keys = []
        for p in images:
            t = tuple(int(x) for x in p)
            if sorted(t) != list(range(degree)):
                raise ValueError(f"{list(p)} is not a permutation of 0..{degree - 1}")
            gen_keys.append(t)
        spec = {
            "kind": "permutation",
            "degree": degree,
            "images": [list(p) for p in gen_keys],
        }
        rng = range(degree)

        def key_mul(p, q):
            return tuple(p[q[i]] for i in rng)

        def key_inv(p):
            out = [0] * degree
            for i in rng:
                out[p[i]] = i
            return tuple(out)

        return cls(spec, gen_keys, tuple(rng), key_mul, key_inv)

    @staticmethod
    def from_json(spec: dict) -> "FiniteQuotient":
        kind = spec.get("kind")
        if kind == "abelian":
            return FiniteQuotient.abelian(spec["moduli"], spec.get("images"))
        if kind == "permutation":
            return FiniteQuotient.permutation(spec["degree"], spec["images"])
        raise ValueError(f"unknown quotient kind {kind!r}")

    def to_json(self) -> dict:
        out = dict(self.spec)
        for key in ("moduli", "images"):
            if key in out:
                out[key] = [
                    list(v) if isinstance(v, (list, tuple)) else v for v in out[key]
                ]
        return out

    # arithmetic -----------------------------------------------------------

    def mul(self, i: int, j: int) -> int:
        return self._index[self._key_mul(self._keys[i], self._keys[j])]

    def inv(self, i: int) -> int:
        return self._index[self._key_inv(self._keys[i])]

    def power(self, i: int, n: int) -> int:
        if n < 0:
            i, n = self.inv(i), -n
        acc, sq = self.identity, i
        while n:
            if n & 1:
                acc = self.mul(acc, sq)
            sq = self.mul(sq, sq)
            n >>= 1
        return acc

    def left_table(self, g: int) -> list[int]:
        table = self._left_tables.get(g)
        if table is None:
            table = [self.mul(g, x) for x in range(self.order)]
            self._left_tables[g] = table
        return table

    def evaluate_word(
        self, word: Word, images: Optional[Sequence[int]] = None
    ) -> int:
        """Image of a free-group word, under the quotient's generator images
        or an explicit override (one element index per generator)."""
        imgs = self.generator_images if images is None else tuple(images)
        acc = self.identity
        for g, e in word:
            if g >= len(imgs):
                raise ValueError(
                    f"word uses generator index {g} but only {len(imgs)} images given"
                )
            acc = self.mul(acc, self.power(imgs[g], e))
        return acc

    # bookkeeping ----------------------------------------------------------

    def word_of(self, i: int) -> Word:
        return self._words[i]

    def element_label(self, i: int) -> str:
        return str(self._keys[i])

    def __repr__(self) -> str:
        return f"FiniteQuotient({self.spec}, order={self.order})"


def push_to_quotient(
    elt: RingElt,
    quotient: FiniteQuotient,
    images: Optional[Sequence[int]] = None,
) -> dict[int, int]:
    """Push a group-ring element to the quotient: a sparse {index: coeff}
    map, coefficients of words with the same image added together."""
    out: dict[int, int] = {}
    for w, c in elt.items():
        i = quotient.evaluate_word(w, images)
        s = out.get(i, 0) + c
        if s:
            out[i] = s
        else:
            out.pop(i, None)
    return out
