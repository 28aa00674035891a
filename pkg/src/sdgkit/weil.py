"""Truncated nilpotent polynomial algebras over the rationals.

An :class:`Algebra` is the quotient

    Q[e_0, ..., e_{k-1}] / (monomials of degree >= cap, forbidden quadratics, skew relations)

and :class:`WeilElement` is an element of it, stored sparsely as a map from
normal-form monomials to nonzero exact rationals (``gmpy2.mpq``; ``Rational``
and ``int`` inputs are accepted everywhere).

Monomials are sorted tuples of generator indices with repetition, so ``()``
is ``1``, ``(0, 0)`` is ``e_0**2`` and ``(0, 1)`` is ``e_0*e_1``.

Skew-tagged generators carry a ``(block, slot)`` label and multiply like
``xi_block * eta_slot`` for odd Grassmann symbols ``xi`` and ``eta``. A
monomial of tagged generators vanishes when a block or a slot repeats, and
otherwise equals +-1 times the monomial with slots sorted in block order.
This is the smallest commutative model in which two infinitesimal vectors
``q, r`` satisfy ``q_i r_j = -q_j r_i != 0`` (nil-square but not first-order
neighbours), which no purely monomial quotient can produce.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterable, Iterator, Mapping, Sequence

from gmpy2 import mpq as Rational

Monomial = tuple[int, ...]
Scalar = numbers.Rational


class SignatureMismatch(ValueError):
    """Raised when elements over different algebras are combined."""


class NotAUnit(ZeroDivisionError):
    """Raised when inverting an element with zero constant term."""


def rational(c) -> Rational:
    """Exact rational from an int, Rational, mpq or ``"p/q"`` string; floats are refused."""
    if isinstance(c, (numbers.Rational, str)) and not isinstance(c, bool):
        return Rational(c)
    raise TypeError(f"exact rational expected, got {type(c).__name__}")


@dataclass(frozen=True)
class Algebra:
    """Signature of a truncated polynomial algebra.

    ``forbidden`` holds unordered generator pairs ``(i, j)`` with ``e_i e_j = 0``
    (``(i, i)`` kills a square). ``skew`` is either empty or has one entry per
    generator: ``None`` or a ``(block, slot)`` tag.
    """

    k: int
    cap: int = 3
    forbidden: frozenset = frozenset()
    skew: tuple = ()
    _tag_lookup: dict = field(default=None, init=False, repr=False, compare=False, hash=False)
    _cache: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("generator count must be non-negative")
        if self.cap < 1:
            raise ValueError("cap must be at least 1")
        pairs = set()
        for pair in self.forbidden:
            i, j = pair
            if not (0 <= i < self.k and 0 <= j < self.k):
                raise ValueError(f"forbidden pair {pair} references a generator outside 0..{self.k - 1}")
            pairs.add((min(i, j), max(i, j)))
        object.__setattr__(self, "forbidden", frozenset(pairs))
        lookup = {}
        if self.skew:
            if len(self.skew) != self.k:
                raise ValueError("skew tags must be given for every generator (None for untagged)")
            for g, tag in enumerate(self.skew):
                if tag is None:
                    continue
                if tag in lookup:
                    raise ValueError(f"skew tag {tag} used twice")
                lookup[tuple(tag)] = g
            blocks = {b for b, _ in lookup}
            slots = {s for _, s in lookup}
            if len(lookup) != len(blocks) * len(slots):
                raise ValueError("skew tags must form a full block x slot grid")
            tagged = set(lookup.values())
            if any(i in tagged or j in tagged for i, j in pairs):
                raise ValueError("skew-tagged generators cannot appear in forbidden pairs")
        object.__setattr__(self, "_tag_lookup", lookup)
        object.__setattr__(self, "_cache", {})

    # -- monomial normal forms ---------------------------------------------

    def normal(self, mono: Monomial) -> tuple[int, Monomial] | None:
        """Return ``(sign, canonical)`` for a sorted monomial, or None if it is zero."""
        cache = self._cache
        hit = cache.get(mono, cache)
        if hit is not cache:
            return hit
        result = self._normal(mono)
        cache[mono] = result
        return result

    def _normal(self, mono: Monomial):
        if len(mono) >= self.cap:
            return None
        if self.forbidden and len(mono) >= 2:
            for a in range(len(mono)):
                for b in range(a + 1, len(mono)):
                    if (mono[a], mono[b]) in self.forbidden:
                        return None
        if not self._tag_lookup:
            return 1, mono
        tagged = [(self.skew[g], g) for g in mono if self.skew[g] is not None]
        if len(tagged) < 2:
            return 1, mono
        tags = sorted(t for t, _ in tagged)
        blocks = [b for b, _ in tags]
        slots = [s for _, s in tags]
        if len(set(blocks)) != len(blocks) or len(set(slots)) != len(slots):
            return None
        sign = _permutation_sign(slots)
        canon = [self._tag_lookup[(b, s)] for b, s in zip(blocks, sorted(slots))]
        plain = [g for g in mono if self.skew[g] is None]
        return sign, tuple(sorted(plain + canon))

    def product(self, a: Monomial, b: Monomial):
        if len(a) + len(b) >= self.cap:
            return None
        return self.normal(tuple(sorted(a + b)))

    # -- constructors --------------------------------------------------------

    def element(self, terms: Mapping) -> "WeilElement":
        """Build an element from ``{generator-index multiset: coefficient}``."""
        out: dict[Monomial, Rational] = {}
        for key, c in terms.items():
            mono = self._to_monomial(key)
            nf = self.normal(mono)
            if nf is None:
                continue
            sign, m = nf
            out[m] = out.get(m, 0) + sign * rational(c)
        return WeilElement(self, {m: c for m, c in out.items() if c})

    def const(self, c) -> "WeilElement":
        c = rational(c)
        return WeilElement(self, {(): c} if c else {})

    def gen(self, i: int) -> "WeilElement":
        if not 0 <= i < self.k:
            raise IndexError(f"generator {i} outside 0..{self.k - 1}")
        return self.element({(i,): 1})

    @property
    def zero(self) -> "WeilElement":
        return WeilElement(self, {})

    @property
    def one(self) -> "WeilElement":
        return self.const(1)

    def vec(self, values: Iterable) -> "Vec":
        return Vec(v if isinstance(v, WeilElement) else self.const(v) for v in values)

    def _to_monomial(self, key) -> Monomial:
        key = tuple(key)
        if any(not 0 <= g < self.k for g in key):
            raise ValueError(f"monomial {key} references a generator outside 0..{self.k - 1}")
        return tuple(sorted(key))

    # -- bookkeeping -----------------------------------------------------------

    def basis(self) -> list[tuple[int, ...]]:
        """All surviving monomials, as exponent vectors, ordered by degree."""
        out = []
        for d in range(self.cap):
            for mono in combinations_with_replacement(range(self.k), d):
                nf = self.normal(mono)
                if nf is not None and nf == (1, mono):
                    out.append(monomial_to_exponents(mono, self.k))
        return out

    def extend(self, count: int, *, square_zero: bool = False) -> "Algebra":
        """Append ``count`` untagged generators; optionally make them a square-zero block."""
        new = range(self.k, self.k + count)
        forbidden = set(self.forbidden)
        if square_zero:
            forbidden |= {(i, j) for i in new for j in new if i <= j}
        skew = tuple(self.skew) + (None,) * count if self.skew else ()
        return Algebra(self.k + count, self.cap, frozenset(forbidden), skew)


def make_algebra(k: int, cap: int = 3, forbidden: Iterable = (), skew: Sequence = ()) -> Algebra:
    if k < 1:
        raise ValueError("need at least one generator")
    return Algebra(k, cap, frozenset(tuple(p) for p in forbidden), tuple(skew))


def exponents_to_monomial(exps: Sequence[int]) -> Monomial:
    return tuple(g for g, e in enumerate(exps) for _ in range(e))


def monomial_to_exponents(mono: Monomial, k: int) -> tuple[int, ...]:
    exps = [0] * k
    for g in mono:
        exps[g] += 1
    return tuple(exps)


def _permutation_sign(seq: Sequence[int]) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


class WeilElement:
    """Immutable element of a truncated polynomial algebra."""

    __slots__ = ("alg", "terms", "_hash")

    def __init__(self, alg: Algebra, terms: dict[Monomial, Rational]):
        self.alg = alg
        self.terms = terms
        self._hash = None

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "WeilElement":
        if isinstance(other, WeilElement):
            if other.alg is not self.alg and other.alg != self.alg:
                raise SignatureMismatch("elements belong to different algebras")
            return other
        if isinstance(other, Scalar):
            return self.alg.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return WeilElement(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return WeilElement(self.alg, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Scalar):
            c = rational(other)
            if not c:
                return self.alg.zero
            return WeilElement(self.alg, {m: v * c for m, v in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.terms or not other.terms:
            return self.alg.zero
        if len(other.terms) == 1 and () in other.terms:
            return self * other.terms[()]
        if len(self.terms) == 1 and () in self.terms:
            return other * self.terms[()]
        alg = self.alg
        cap = alg.cap
        by_degree: dict[int, list] = {}
        for m, c in other.terms.items():
            by_degree.setdefault(len(m), []).append((m, c))
        out: dict[Monomial, Rational] = {}
        for m1, c1 in self.terms.items():
            for d2 in range(cap - len(m1)):
                for m2, c2 in by_degree.get(d2, ()):
                    nf = alg.product(m1, m2)
                    if nf is None:
                        continue
                    sign, m = nf
                    v = c1 * c2
                    out[m] = out.get(m, 0) + (v if sign > 0 else -v)
        return WeilElement(alg, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Scalar):
            return self * (1 / rational(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.invert()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        out = self.alg.one
        for _ in range(n):
            out = out * self
        return out

    def invert(self) -> "WeilElement":
        """Inverse of a unit: c^-1 (1 - m + m^2 - ...) truncated, for x = c(1 + m)."""
        c = self.constant
        if not c:
            raise NotAUnit(f"{self} has zero constant term")
        m = self * (1 / c) - 1
        term = self.alg.one
        total = self.alg.one
        for _ in range(1, self.alg.cap):
            term = term * (-m)
            total = total + term
        return total * (1 / c)

    # -- inspection ----------------------------------------------------------

    @property
    def constant(self) -> Rational:
        return self.terms.get((), Rational(0))

    @property
    def valuation(self) -> int:
        """Lowest degree carrying a nonzero coefficient (cap for zero)."""
        if not self.terms:
            return self.alg.cap
        return min(len(m) for m in self.terms)

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=-1)

    def truncate(self, degree: int) -> "WeilElement":
        """Drop every term of total degree >= ``degree``."""
        if self.degree < degree:
            return self
        return WeilElement(self.alg, {m: c for m, c in self.terms.items() if len(m) < degree})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    def coeff(self, exponents: Sequence[int]) -> Rational:
        """Coefficient of the basis monomial with the given exponent vector."""
        if len(exponents) != self.alg.k or any(e < 0 for e in exponents):
            raise ValueError(f"expected {self.alg.k} non-negative exponents, got {exponents}")
        mono = exponents_to_monomial(exponents)
        if self.alg.normal(mono) != (1, mono):
            raise ValueError(f"{tuple(exponents)} is not a basis monomial of this algebra")
        return self.terms.get(mono, Rational(0))

    def items(self) -> Iterator[tuple[Monomial, Rational]]:
        return iter(sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0])))

    def lift(self, alg: Algebra) -> "WeilElement":
        """Embed into an algebra that extends this one by extra generators."""
        if alg is self.alg:
            return self
        if alg.k < self.alg.k or alg.cap < self.alg.cap:
            raise SignatureMismatch("target algebra does not extend the source")
        return alg.element(dict(self.terms))

    def __eq__(self, other):
        if isinstance(other, WeilElement):
            return self.alg == other.alg and self.terms == other.terms
        if isinstance(other, Scalar):
            c = rational(other)
            return self.terms == ({(): c} if c else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.alg, frozenset(self.terms.items())))
        return self._hash

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.items():
            body = _format_monomial(mono)
            mag = abs(c)
            if not body:
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{mag}*{body}"
            parts.append(("-" if c < 0 else "+", text))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, text in parts[1:]:
            out += f" {sign} {text}"
        return out

    def __repr__(self):
        return f"WeilElement({self})"


def _format_monomial(mono: Monomial) -> str:
    out = []
    i = 0
    while i < len(mono):
        g = mono[i]
        e = mono.count(g)
        out.append(f"e{g}" if e == 1 else f"e{g}^{e}")
        i += e
    return "*".join(out)


class Vec:
    """An n-tuple of Weil elements over one algebra; points and vectors of R^n."""

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[WeilElement]):
        entries = tuple(entries)
        if not entries:
            raise ValueError("a Vec needs at least one entry")
        alg = entries[0].alg
        for e in entries[1:]:
            if e.alg is not alg and e.alg != alg:
                raise SignatureMismatch("Vec entries must share an algebra")
        self.entries = entries

    @property
    def alg(self) -> Algebra:
        return self.entries[0].alg

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def _check(self, other: "Vec"):
        if not isinstance(other, Vec):
            return NotImplemented
        if len(other) != len(self):
            raise ValueError(f"dimension mismatch: {len(self)} vs {len(other)}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Vec(a + b for a, b in zip(self.entries, other.entries))

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Vec(a - b for a, b in zip(self.entries, other.entries))

    def __neg__(self):
        return Vec(-a for a in self.entries)

    def __mul__(self, scalar):
        if isinstance(scalar, Vec):
            return NotImplemented
        return Vec(a * scalar for a in self.entries)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Vec(a / scalar for a in self.entries)

    def __eq__(self, other):
        if not isinstance(other, Vec):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def lift(self, alg: Algebra) -> "Vec":
        return Vec(e.lift(alg) for e in self.entries)

    @property
    def constant(self) -> tuple[Rational, ...]:
        return tuple(e.constant for e in self.entries)

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.entries)

    @property
    def valuation(self) -> int:
        return min(e.valuation for e in self.entries)

    def truncate(self, degree: int) -> "Vec":
        return Vec(e.truncate(degree) for e in self.entries)

    def __str__(self):
        return "(" + ", ".join(str(e) for e in self.entries) + ")"

    def __repr__(self):
        return f"Vec{self}"


def zero_vec(alg: Algebra, n: int) -> Vec:
    return Vec(alg.zero for _ in range(n))


def concat(*vecs: Vec) -> Vec:
    return Vec(e for v in vecs for e in v)
