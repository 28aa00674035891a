import random
from collections import Counter
from fractions import Fraction
from itertools import combinations_with_replacement

import pytest

from sdgkit.calculus import (
    ExtractionError,
    PolyMap,
    QuadraticMapRep,
    extract_affine,
    extract_binary_quadratic,
    extract_quadratic,
    polynomial_map,
    random_dtilde2,
    taylor2,
)
from sdgkit.liegroup import GL2
from sdgkit.multilinear import matmul_tensor
from sdgkit.spaces import IStructure, algebra_for, in_istructure, random_point, sample_generic
from sdgkit.weil import Vec, make_algebra


def F(x):
    return Fraction(int(x.numerator), int(x.denominator))


# -- symbolic oracle for polynomial maps given by coefficient dictionaries -----------------


def random_coeffs(rng, nvars, w, degree):
    monos = [m for d in range(degree + 1) for m in combinations_with_replacement(range(nvars), d)]
    return [{m: Fraction(rng.randint(-50, 50), rng.randint(1, 9)) for m in monos if rng.random() < 0.6} for _ in range(w)]


def d_mono(mono, var):
    """Derivative of a monomial (variable multiset) as (factor, monomial)."""
    c = Counter(mono)
    k = c[var]
    if not k:
        return 0, ()
    c[var] -= 1
    return k, tuple(sorted(c.elements()))


def ev(mono, point):
    out = Fraction(1)
    for g in mono:
        out *= point[g]
    return out


def oracle_jets(coeffs, point):
    nv = len(point)
    value = [sum(c * ev(m, point) for m, c in ci.items()) for ci in coeffs]
    grad = []
    hess = []
    for ci in coeffs:
        g = [Fraction(0)] * nv
        h = [[Fraction(0)] * nv for _ in range(nv)]
        for m, c in ci.items():
            for a in range(nv):
                ka, ma = d_mono(m, a)
                if not ka:
                    continue
                g[a] += c * ka * ev(ma, point)
                for b in range(nv):
                    kb, mb = d_mono(ma, b)
                    if kb:
                        h[a][b] += c * ka * kb * ev(mb, point)
        grad.append(g)
        hess.append(h)
    return value, grad, hess


def as_fractions(T):
    if isinstance(T, (tuple, list)):
        return [as_fractions(x) for x in T]
    return F(T)


# -- worked examples ----------------------------------------------------------------------


def square(x):
    return Vec([x[0] * x[0]])


def test_affine_examples():
    f = PolyMap(1, 1, square)
    assert as_fractions(extract_affine(f, [3])) == [[9], [[6]]]
    const = PolyMap(1, 1, lambda x: x.alg.vec([7]))
    assert as_fractions(extract_affine(const, [2])[1]) == [[0]]
    g = PolyMap(2, 2, lambda x: Vec([x[0] * x[1], x[0] + x[1]]))
    value, D = extract_affine(g, [1, 2])
    assert as_fractions(value) == [2, 3]
    assert as_fractions(D) == [[2, 1], [1, 1]]


def test_quadratic_examples():
    cube = PolyMap(1, 1, lambda x: Vec([x[0] * x[0] * x[0]]))
    value, D, H = extract_quadratic(cube, [1])
    assert as_fractions((value, D, H)) == [[1], [[3]], [[[6]]]]
    lin = PolyMap(2, 1, lambda x: Vec([3 * x[0] - x[1]]))
    assert as_fractions(extract_quadratic(lin, [5, 7])[2]) == [[[0, 0], [0, 0]]]
    f = PolyMap(2, 1, lambda x: Vec([x[0] * x[0] * x[1]]))
    assert as_fractions(extract_quadratic(f, [1, 1])[2]) == [[[2, 2], [2, 0]]]


def test_binary_examples(rng):
    add = PolyMap(2, 2, lambda v, w: v + w, arity=2)
    rep = extract_binary_quadratic(add)
    ident = [[1, 0], [0, 1]]
    zero3 = [[[0, 0], [0, 0]]] * 2
    assert as_fractions(rep.a0) == [0, 0]
    assert as_fractions(rep.A1) == ident and as_fractions(rep.B1) == ident
    assert as_fractions(rep.A2) == zero3 and as_fractions(rep.B2) == zero3 and as_fractions(rep.C2) == zero3

    from sdgkit.multilinear import bilinear, random_tensor

    B = random_tensor(rng, 2, 2, 100)
    rep = extract_binary_quadratic(PolyMap(2, 2, lambda v, w: v + w + bilinear(B, v, w), arity=2))
    assert rep.C2 == B and as_fractions(rep.A2) == zero3


def test_binary_gl2_multiplication():
    def mul(q, r):
        alg = q.alg
        e = GL2.chart_identity(alg)
        return (GL2.from_chart(e + q) * GL2.from_chart(e + r)).chart() - e

    rep = extract_binary_quadratic(PolyMap(4, 4, mul, arity=2))
    assert rep.C2 == matmul_tensor(2)


def test_non_polynomial_evaluator_rejected():
    # output depends on how the argument is written, not only on its value
    def bad(x):
        return Vec([x[0] * x[0] if len(x[0].terms) == 1 else x[0]])

    with pytest.raises(ExtractionError):
        extract_quadratic(PolyMap(1, 1, bad), [0])


def test_affine_rejects_inconsistent_evaluator():
    def bad(x):
        return Vec([x[0] if len(x[0].terms) == 1 else 2 * x[0]])

    with pytest.raises(ExtractionError):
        extract_affine(PolyMap(2, 1, bad), [0, 0])


def test_quadratic_rep_requires_symmetry():
    z = ((0, 0), (0, 0))
    with pytest.raises(ValueError):
        QuadraticMapRep((0,), ((1, 0),), ((0, 1),), (((0, 1), (0, 0)),), (z,), (z,))


# -- properties ----------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(8))
def test_quadratic_extraction_matches_symbolic_oracle(seed):
    rng = random.Random(seed)
    n, w = 3, 2
    coeffs = random_coeffs(rng, n, w, 3)
    f = polynomial_map(n, w, coeffs)
    base = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)]
    value, D, H = extract_quadratic(f, base)
    ov, og, oh = oracle_jets(coeffs, base)
    assert as_fractions(value) == ov
    assert as_fractions(D) == og
    assert as_fractions(H) == oh


@pytest.mark.parametrize("degree", [0, 1, 2])
@pytest.mark.parametrize("seed", range(4))
def test_binary_extraction_matches_symbolic_oracle(degree, seed):
    rng = random.Random(100 * degree + seed)
    n = 2
    coeffs = random_coeffs(rng, 2 * n, n, degree)
    rep = extract_binary_quadratic(polynomial_map(n, n, coeffs, arity=2))
    ov, og, oh = oracle_jets(coeffs, [Fraction(0)] * (2 * n))
    assert as_fractions(rep.a0) == ov
    assert as_fractions(rep.A1) == [g[:n] for g in og]
    assert as_fractions(rep.B1) == [g[n:] for g in og]
    assert as_fractions(rep.A2) == [[[h[j][l] / 2 for l in range(n)] for j in range(n)] for h in oh]
    assert as_fractions(rep.B2) == [[[h[n + j][n + l] / 2 for l in range(n)] for j in range(n)] for h in oh]
    assert as_fractions(rep.C2) == [[[h[j][n + l] for l in range(n)] for j in range(n)] for h in oh]


@pytest.mark.parametrize("seed", range(4))
def test_binary_rep_reproduces_map_on_fresh_witnesses(seed):
    rng = random.Random(seed)
    n = 3
    f = polynomial_map(n, n, random_coeffs(rng, 2 * n, n, 4), arity=2)
    rep = extract_binary_quadratic(f)
    alg = make_algebra(2 * n, 3)
    for _ in range(4):
        d, e = random_dtilde2(alg, n, rng)
        assert f(d, e) == rep.evaluate(d, e)


def test_extraction_unique_across_generator_blocks(rng):
    n = 2
    coeffs = random_coeffs(rng, n, 1, 3)
    f = polynomial_map(n, 1, coeffs)
    base = [Fraction(1, 2), Fraction(-3)]
    first = extract_quadratic(f, base)
    again = extract_quadratic(f, base, rng=random.Random(99))
    assert first == again
    # evaluate on a later block of a larger algebra and read the same coefficients
    alg = make_algebra(2 * n, 3)
    y = f(alg.vec(base) + Vec([alg.gen(n), alg.gen(n + 1)]))
    assert y[0].terms.get((n,), 0) == first[1][0][0]
    assert 2 * y[0].terms.get((n + 1, n + 1), 0) == first[2][0][1][1]


@pytest.mark.parametrize("seed", range(4))
def test_taylor_second_order_exact(seed):
    rng = random.Random(seed)
    n = 3
    f = polynomial_map(n, 2, random_coeffs(rng, n, 2, 4))
    alg = algebra_for(IStructure.SECOND_ORDER, n, 1)
    Q = random_point(alg, n, rng, 50)
    (P,) = sample_generic(IStructure.SECOND_ORDER, Q, 1, rng, bound=50)
    value, D, H = extract_quadratic(f, Q)
    assert f(P) - f(Q) - (taylor2(value, D, H, P - Q) - alg.vec(value)) == alg.vec([0, 0])


@pytest.mark.parametrize("kind", list(IStructure))
def test_maps_preserve_istructures(kind, rng):
    n = 2
    f = polynomial_map(n, 3, random_coeffs(rng, n, 3, 3))
    alg = algebra_for(kind, n, 3)
    pts = sample_generic(kind, random_point(alg, n, rng, 50), 3, rng, bound=50)
    assert in_istructure(kind, pts)
    assert in_istructure(kind, [f(p) for p in pts])


def test_maps_are_first_order_affine(rng):
    n = 2
    f = polynomial_map(n, 2, random_coeffs(rng, n, 2, 3))
    alg = algebra_for(IStructure.FIRST_ORDER, n, 3)
    pts = sample_generic(IStructure.FIRST_ORDER, random_point(alg, n, rng, 50), 3, rng, bound=50)
    mu = [Fraction(2, 3), Fraction(-5, 7)]
    mu.append(1 - sum(mu))
    combo = pts[0] * mu[0] + pts[1] * mu[1] + pts[2] * mu[2]
    images = [f(p) for p in pts]
    assert f(combo) == images[0] * mu[0] + images[1] * mu[1] + images[2] * mu[2]


def test_wrong_arity_and_dimension():
    f = PolyMap(2, 1, lambda x: Vec([x[0]]))
    alg = make_algebra(1)
    with pytest.raises(TypeError):
        f(alg.vec([0, 0]), alg.vec([0, 0]))
    with pytest.raises(ValueError):
        f(alg.vec([0]))
    with pytest.raises(ValueError):
        extract_binary_quadratic(f)
