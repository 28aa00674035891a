"""Taylor normal forms of maps, read off by evaluating on fresh generators.

A map is any signature-generic function from ``Vec`` to ``Vec`` built from
ring operations. Evaluating it at ``base + (e_0, ..., e_{n-1})`` in a fresh
algebra and reading coefficients gives value, derivative and Hessian. Each
extraction is then re-checked on an independent random witness, which catches
evaluators that are not polynomial in the ring operations.

Extraction happens at rational base points. At a Weil-valued base the
derivatives are only determined modulo terms the displacements annihilate.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Callable, Sequence

from .multilinear import Matrix, Tensor, bilinear, is_symmetric, linear
from .spaces import DEFAULT_BOUND, random_rational
from .weil import Algebra, Rational, Vec, WeilElement, make_algebra


class ExtractionError(ValueError):
    """The evaluator does not match the normal form it should have."""


@dataclass(frozen=True)
class PolyMap:
    """``fn`` takes ``arity`` Vecs of dimension ``n`` and returns a Vec of dimension ``w``."""

    n: int
    w: int
    fn: Callable[..., Vec]
    arity: int = 1
    degree: int | None = None

    def __call__(self, *args: Vec) -> Vec:
        if len(args) != self.arity:
            raise TypeError(f"map takes {self.arity} arguments, got {len(args)}")
        for a in args:
            if len(a) != self.n:
                raise ValueError(f"argument has dimension {len(a)}, expected {self.n}")
        out = self.fn(*args)
        if len(out) != self.w:
            raise ExtractionError(f"map returned dimension {len(out)}, declared {self.w}")
        return out


@dataclass(frozen=True)
class QuadraticMapRep:
    """``t(d, e) = a0 + A1 d + B1 e + A2[d, d] + B2[e, e] + C2[d, e]``."""

    a0: tuple
    A1: Matrix
    B1: Matrix
    A2: Tensor
    B2: Tensor
    C2: Tensor

    def __post_init__(self):
        if not (is_symmetric(self.A2) and is_symmetric(self.B2)):
            raise ValueError("A2 and B2 must be symmetric")

    def evaluate(self, d: Vec, e: Vec) -> Vec:
        alg = d.alg
        out = alg.vec(self.a0)
        out = out + linear(self.A1, d) + linear(self.B1, e)
        return out + bilinear(self.A2, d, d) + bilinear(self.B2, e, e) + bilinear(self.C2, d, e)


def _rational_base(base) -> tuple[Rational, ...]:
    if isinstance(base, Vec):
        if any(not x.is_constant() for x in base):
            raise ValueError("extraction needs a rational base point")
        return base.constant
    return tuple(Rational(x) for x in base)


def _read_quadratic(y: Vec, k: int, offset: int, n: int):
    """Linear and quadratic coefficients of ``y`` in generators ``offset..offset+n-1``."""
    lin = tuple(tuple(yi.terms.get((offset + j,), Rational(0)) for j in range(n)) for yi in y)
    quad = []
    for yi in y:
        rows = [[Rational(0)] * n for _ in range(n)]
        for j in range(n):
            for l in range(j, n):
                c = yi.terms.get((offset + j, offset + l), Rational(0))
                if j == l:
                    rows[j][j] = 2 * c
                else:
                    rows[j][l] = rows[l][j] = c
        quad.append(tuple(tuple(r) for r in rows))
    return lin, tuple(quad)


def _check_only(y: Vec, allowed: set, what: str):
    for i, yi in enumerate(y):
        for m, c in yi.terms.items():
            if m not in allowed:
                raise ExtractionError(f"{what}: output {i} has unexpected monomial {m} (coefficient {c})")


def extract_affine(f: PolyMap, base, *, verify: bool = True, rng: random.Random | None = None):
    """Value and derivative of ``f`` at ``base`` from a square-zero block of generators."""
    p = _rational_base(base)
    n = len(p)
    alg = make_algebra(n, 3, [(i, j) for i in range(n) for j in range(i, n)])
    x = alg.vec(p) + Vec(alg.gen(i) for i in range(n))
    y = f(x)
    _check_only(y, {()} | {(j,) for j in range(n)}, "affine extraction")
    value = tuple(yi.constant for yi in y)
    D, _ = _read_quadratic(y, n, 0, n)
    if verify:
        rng = rng or random.Random(0)
        d = Vec(sum((random_rational(rng, 1000) * alg.gen(j) for j in range(n)), alg.zero) for _ in range(n))
        if f(alg.vec(p) + d) != alg.vec(value) + linear(D, d):
            raise ExtractionError("affine extraction does not reproduce the map on a fresh D(n) witness")
    return value, D


def extract_quadratic(f: PolyMap, base, *, verify: bool = True, rng: random.Random | None = None):
    """Value, derivative and (symmetric) second derivative of ``f`` at ``base``."""
    p = _rational_base(base)
    n = len(p)
    alg = make_algebra(n, 3)
    x = alg.vec(p) + Vec(alg.gen(i) for i in range(n))
    y = f(x)
    value = tuple(yi.constant for yi in y)
    D, H = _read_quadratic(y, n, 0, n)
    if verify:
        rng = rng or random.Random(0)
        d = _random_d2(alg, n, range(n), rng)
        if f(alg.vec(p) + d) != taylor2(value, D, H, d):
            raise ExtractionError("quadratic extraction does not reproduce the map on a fresh D2 witness")
    return value, D, H


def taylor2(value, D: Matrix, H: Tensor, d: Vec) -> Vec:
    """``value + D d + 1/2 H[d, d]``."""
    return d.alg.vec(value) + linear(D, d) + bilinear(H, d, d) * Rational(1, 2)


def extract_binary_quadratic(m: PolyMap, *, verify: bool = True, rng: random.Random | None = None) -> QuadraticMapRep:
    """Normal form of a binary map on pairs of second-order infinitesimals."""
    if m.arity != 2:
        raise ValueError("extract_binary_quadratic needs a binary map")
    n = m.n
    alg = make_algebra(2 * n, 3)
    d = Vec(alg.gen(i) for i in range(n))
    e = Vec(alg.gen(n + i) for i in range(n))
    y = m(d, e)
    a0 = tuple(yi.constant for yi in y)
    A1, A2h = _read_quadratic(y, 2 * n, 0, n)
    B1, B2h = _read_quadratic(y, 2 * n, n, n)
    half = Rational(1, 2)
    A2 = tuple(tuple(tuple(c * half for c in row) for row in T) for T in A2h)
    B2 = tuple(tuple(tuple(c * half for c in row) for row in T) for T in B2h)
    C2 = tuple(
        tuple(tuple(yi.terms.get((j, n + l), Rational(0)) for l in range(n)) for j in range(n)) for yi in y
    )
    rep = QuadraticMapRep(a0, A1, B1, A2, B2, C2)
    if verify:
        rng = rng or random.Random(0)
        for dd, ee in [(d, e)] + [random_dtilde2(alg, n, rng) for _ in range(2)]:
            if m(dd, ee) != rep.evaluate(dd, ee):
                raise ExtractionError("binary normal form does not reproduce the map on a D~2 witness")
    return rep


# -- random witnesses and maps ---------------------------------------------------


def _random_d2(alg: Algebra, n: int, gens: Sequence[int], rng, bound: int = 1000) -> Vec:
    g = [alg.gen(i) for i in gens]
    out = []
    for _ in range(n):
        x = sum((random_rational(rng, bound) * gi for gi in g), alg.zero)
        x = x + random_rational(rng, bound) * rng.choice(g) * rng.choice(g)
        out.append(x)
    return Vec(out)


def random_dtilde2(alg: Algebra, n: int, rng: random.Random, bound: int = 1000) -> tuple[Vec, Vec]:
    """A generic pair in D~2(2, R^n): both built on all generators of a cap-3 algebra."""
    if alg.cap > 3:
        raise ValueError("D~2 witnesses need cap <= 3")
    gens = range(alg.k)
    return _random_d2(alg, n, gens, rng, bound), _random_d2(alg, n, gens, rng, bound)


def _monomials(nvars: int, degree: int):
    return [m for d in range(degree + 1) for m in combinations_with_replacement(range(nvars), d)]


def polynomial_map(n: int, w: int, coeffs: Sequence[dict], arity: int = 1) -> PolyMap:
    """Map whose output ``i`` is ``sum c * prod x_g`` over ``coeffs[i] = {var-multiset: c}``.

    For a binary map the variables are the concatenated coordinates of both arguments.
    """
    coeffs = [dict(c) for c in coeffs]
    degree = max((len(m) for c in coeffs for m in c), default=0)

    def fn(*args: Vec) -> Vec:
        xs = [x for a in args for x in a]
        alg = xs[0].alg
        powers: dict = {(): alg.one}

        def mono(m):
            if m not in powers:
                powers[m] = mono(m[:-1]) * xs[m[-1]]
            return powers[m]

        return Vec(sum((c * mono(m) for m, c in ci.items()), alg.zero) for ci in coeffs)

    return PolyMap(n, w, fn, arity, degree)


def random_polynomial_map(
    rng: random.Random, n: int, w: int, degree: int, *, arity: int = 1, bound: int = DEFAULT_BOUND, density: float = 0.6
) -> PolyMap:
    monos = _monomials(arity * n, degree)
    coeffs = []
    for _ in range(w):
        c = {m: random_rational(rng, bound) for m in monos if rng.random() < density or len(m) == degree}
        coeffs.append(c)
    return polynomial_map(n, w, coeffs, arity)
