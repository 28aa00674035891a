"""Infinitesimal neighbourhood sets, i-structure predicates and generic samplers.

Membership is decided on coordinate products. Coordinate products span the
multilinear forms on R^n, so "phi[v, w] = 0 for every bilinear phi" is the
same as "v_i * w_j = 0 for all i, j", and likewise for trilinear forms.

For the first- and second-order i-structures the "all pairs (triples) of
differences" condition is checked on differences to the first point only;
multilinearity expands any ``P_i - P_j`` into those.
"""

from __future__ import annotations

import random
from enum import Enum
from itertools import combinations, combinations_with_replacement
from typing import Sequence

from .weil import Algebra, Rational, Vec, WeilElement, make_algebra

DEFAULT_BOUND = 10**6


class IStructure(Enum):
    NIL_SQUARE = "nil-square"
    FIRST_ORDER = "first-order"
    SECOND_ORDER = "second-order"


class NeighbourhoodError(ValueError):
    """A tuple of points is not in the required i-structure."""


class InsufficientGenerators(ValueError):
    def __init__(self, required: int, available: int):
        super().__init__(f"sampler needs {required} fresh generators, algebra has {available}")
        self.required = required
        self.available = available


# -- vanishing of products -----------------------------------------------------


def _product_vanishes(factors: Sequence[WeilElement]) -> bool:
    cap = factors[0].alg.cap
    if sum(f.valuation for f in factors) >= cap:
        return True
    out = factors[0]
    for f in factors[1:]:
        out = out * f
        if out.is_zero():
            return True
    return out.is_zero()


def _products_vanish(scalars: Sequence[WeilElement], order: int) -> bool:
    return all(_product_vanishes(c) for c in combinations_with_replacement(scalars, order))


def _mixed_vanish(*groups: Sequence[WeilElement]) -> bool:
    def rec(i, chosen):
        if i == len(groups):
            return _product_vanishes(chosen)
        return all(rec(i + 1, chosen + [x]) for x in groups[i])

    return rec(0, [])


def _same_dim(*vs: Vec):
    n = len(vs[0])
    for v in vs[1:]:
        if len(v) != n:
            raise ValueError(f"dimension mismatch: {n} vs {len(v)}")


def in_D(v: Vec) -> bool:
    """v_i v_j = 0 for all i, j."""
    return _products_vanish(v.entries, 2)


def in_D2(v: Vec) -> bool:
    """Every product of three coordinates vanishes."""
    return _products_vanish(v.entries, 3)


def in_Dtilde2(v: Vec, w: Vec) -> bool:
    """All cubic products of coordinates of v and w vanish."""
    _same_dim(v, w)
    return _products_vanish(v.entries + w.entries, 3)


def in_DN1(v1: Vec, v2: Vec) -> bool:
    _same_dim(v1, v2)
    return in_D(v1) and in_D(v2) and _mixed_vanish(v1.entries, v2.entries)


def in_DN2(v1: Vec, v2: Vec, v3: Vec) -> bool:
    _same_dim(v1, v2, v3)
    return all(in_D2(v) for v in (v1, v2, v3)) and _mixed_vanish(v1.entries, v2.entries, v3.entries)


def in_istructure(kind: IStructure, points: Sequence[Vec]) -> bool:
    points = list(points)
    if len(points) <= 1:
        return True
    _same_dim(*points)
    if kind is IStructure.NIL_SQUARE:
        return all(in_D(p - q) for p, q in combinations(points, 2))
    anchored = [e for p in points[1:] for e in (p - points[0]).entries]
    order = 2 if kind is IStructure.FIRST_ORDER else 3
    return _products_vanish(anchored, order)


def require(kind: IStructure, points: Sequence[Vec], what: str = "points"):
    if not in_istructure(kind, points):
        raise NeighbourhoodError(f"{what} are not {kind.value} neighbours")


def in_monad(kind: IStructure, base: Vec, points: Sequence[Vec]) -> bool:
    """``<Q_1..Q_m>`` in the induced structure on the monad of ``base``."""
    return in_istructure(kind, [base, *points])


def reindex(points: Sequence[Vec], h: Sequence[int]) -> list[Vec]:
    return [points[i] for i in h]


def pair_up(points: Sequence[Vec]) -> list[Vec]:
    """``[P1, Q1, ..., Pm, Qm]`` -> ``[(P1, Q1), ..., (Pm, Qm)]`` as points of V + V."""
    if len(points) % 2:
        raise ValueError("need an even number of points")
    return [Vec(points[i].entries + points[i + 1].entries) for i in range(0, len(points), 2)]


# -- random rationals ------------------------------------------------------------


def random_rational(rng: random.Random, bound: int = DEFAULT_BOUND) -> Rational:
    return Rational(rng.randint(-bound, bound), rng.randint(1, bound))


def random_point(alg: Algebra, n: int, rng: random.Random, bound: int = DEFAULT_BOUND) -> Vec:
    return alg.vec(random_rational(rng, bound) for _ in range(n))


# -- generic witnesses -------------------------------------------------------------


def required_generators(kind: IStructure, n: int, m: int) -> int:
    return n * m


def algebra_for(kind: IStructure, n: int, m: int, *, cap: int | None = None, extra: int = 0) -> Algebra:
    """An algebra whose generators ``extra .. extra + n*m - 1`` suit ``sample_generic``.

    The first ``extra`` generators are left free for the caller.
    """
    need = required_generators(kind, n, m)
    k = extra + need
    block = range(extra, k)
    if kind is IStructure.SECOND_ORDER:
        cap = 3 if cap is None else cap
        if cap > 3:
            raise ValueError("second-order witnesses need cap <= 3")
        return make_algebra(k, cap)
    if kind is IStructure.FIRST_ORDER:
        forbidden = [(i, j) for i in block for j in block if i <= j]
        return make_algebra(k, 3 if cap is None else cap, forbidden)
    skew = [None] * extra + [(j, s) for j in range(m) for s in range(n)]
    return make_algebra(k, 3 if cap is None else cap, skew=skew)


def sample_generic(
    kind: IStructure,
    base: Vec,
    m: int,
    rng: random.Random,
    *,
    offset: int = 0,
    bound: int = DEFAULT_BOUND,
    quadratic: bool = True,
) -> list[Vec]:
    """Draw ``m`` points such that ``<base, P_1, ..., P_m>`` lies in ``kind``.

    Point ``j`` uses its own ``n`` generators starting at ``offset + j*n``.
    """
    alg = base.alg
    n = len(base)
    need = required_generators(kind, n, m)
    if alg.k - offset < need:
        raise InsufficientGenerators(need, alg.k - offset)
    gens = [[alg.gen(offset + j * n + s) for s in range(n)] for j in range(m)]
    used = range(offset, offset + need)

    if kind is IStructure.SECOND_ORDER:
        if alg.cap > 3:
            raise ValueError("second-order samples need cap <= 3")
        flat = [g for block in gens for g in block]
        points = []
        for j in range(m):
            d = _random_linear(gens[j], n, rng, bound)
            if quadratic:
                d = [
                    x + random_rational(rng, bound) * rng.choice(flat) * rng.choice(flat)
                    for x in d
                ]
            points.append(base + Vec(d))
        return points

    if kind is IStructure.FIRST_ORDER:
        if any((i, j) not in alg.forbidden for i in used for j in used if i <= j):
            raise ValueError("first-order samples need a mutually annihilating block of generators")
        return [base + Vec(_random_linear(gens[j], n, rng, bound)) for j in range(m)]

    expected = {offset + j * n + s: None for j in range(m) for s in range(n)}
    if not alg.skew or any(alg.skew[g] is None for g in expected):
        raise ValueError("nil-square samples need skew-tagged generators (see algebra_for)")
    tags = {alg.skew[offset + j * n + s] for j in range(m) for s in range(n)}
    if len({b for b, _ in tags}) != m or len({s for _, s in tags}) != n:
        raise ValueError("nil-square samples need one skew block per point and one slot per coordinate")
    mix = [[random_rational(rng, bound) for _ in range(n)] for _ in range(n)]
    points = []
    for j in range(m):
        c = random_rational(rng, bound) or Rational(1)
        d = [sum((mix[i][s] * c * gens[j][s] for s in range(n)), alg.zero) for i in range(n)]
        points.append(base + Vec(d))
    return points


def _random_linear(gens: list[WeilElement], n: int, rng, bound) -> list[WeilElement]:
    alg = gens[0].alg
    return [sum((random_rational(rng, bound) * g for g in gens), alg.zero) for _ in range(n)]


# -- stored counterexamples ------------------------------------------------------


def witness_nil_square_not_first_order() -> list[Vec]:
    """``<0, q, r>`` in V<3> for V = R^2 with ``q_1 r_2 = -q_2 r_1 != 0``."""
    alg = algebra_for(IStructure.NIL_SQUARE, 2, 2)
    q = Vec([alg.gen(0), alg.gen(1)])
    r = Vec([alg.gen(2), alg.gen(3)])
    return [alg.vec([0, 0]), q, r]


def witness_nil_square_not_second_order(n: int = 3) -> list[Vec]:
    """``<0, q, r, s>`` in V<4> but not V_2<4> for V = R^n, n >= 3.

    The displacement triple ``(q, r, s)`` is pairwise nil-square yet
    ``q_1 r_2 s_3 != 0``, so it is not in DN_2(V). Needs cap 4.
    """
    if n < 3:
        raise ValueError("the obstruction needs dimension at least 3")
    alg = algebra_for(IStructure.NIL_SQUARE, n, 3, cap=4)
    q, r, s = (Vec([alg.gen(j * n + i) for i in range(n)]) for j in range(3))
    return [alg.vec([0] * n), q, r, s]
