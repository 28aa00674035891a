import random
from itertools import combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense, dense_mul
from sdgkit.spaces import (
    InsufficientGenerators,
    IStructure,
    algebra_for,
    in_D,
    in_D2,
    in_DN1,
    in_DN2,
    in_Dtilde2,
    in_istructure,
    pair_up,
    random_point,
    random_rational,
    reindex,
    sample_generic,
    witness_nil_square_not_first_order,
    witness_nil_square_not_second_order,
)
from sdgkit.weil import Vec, make_algebra

KINDS = list(IStructure)


# -- oracles -------------------------------------------------------------------------


def products_vanish_dense(entries, order, alg):
    """Coordinate products via the dense reference multiplication (no skew algebras)."""
    k, cap, forb = alg.k, alg.cap, tuple(alg.forbidden)
    for combo in product(entries, repeat=order):
        acc = {(0,) * k: 1}
        for x in combo:
            acc = dense_mul(acc, dense(x), k, cap, forb)
        if acc:
            return False
    return True


def forms_vanish(vectors, rng, trials=6):
    """Definitional route: random multilinear forms in one slot per vector vanish."""
    n = len(vectors[0])
    for _ in range(trials):
        total = vectors[0].alg.zero
        for idx in product(range(n), repeat=len(vectors)):
            term = random_rational(rng, 50)
            for v, i in zip(vectors, idx):
                term = term * v[i]
            total = total + term
        if not total.is_zero():
            return False
    return True


# -- worked examples ---------------------------------------------------------------------


def test_in_D_examples():
    alg = make_algebra(2, 3, [(0, 0)])
    eps = alg.gen(0)
    assert in_D(Vec([3 * eps, -5 * eps]))
    assert not in_D(Vec([make_algebra(1).gen(0), make_algebra(1).zero]))
    assert in_D(alg.vec([0, 0]))


def test_in_D2_examples():
    alg = make_algebra(2)
    e1, e2 = alg.gen(0), alg.gen(1)
    assert in_D2(Vec([e1, e2]))
    assert not in_D2(Vec([1 + e1, alg.zero]))
    assert in_D2(Vec([e1 * e2, e2 * e2]))


def test_in_Dtilde2_examples():
    alg = make_algebra(4)
    v = Vec([alg.gen(0), alg.gen(1) + alg.gen(2) * alg.gen(3)])
    w = Vec([alg.gen(2), alg.gen(3)])
    assert in_Dtilde2(v, w)
    assert not in_Dtilde2(v + alg.vec([1, 0]), w)
    assert in_Dtilde2(alg.vec([0, 0]), w)


def test_in_DN_examples():
    alg = make_algebra(2, 3, [(0, 0)])
    e1, e2 = alg.gen(0), alg.gen(1)
    assert in_DN1(Vec([2 * e1, 3 * e1]), Vec([5 * e1, -e1]))
    alg2 = make_algebra(2, 3, [(0, 0), (1, 1)])
    u = (1, 2)
    a, b = alg2.gen(0), alg2.gen(1)
    assert not in_DN1(Vec([a * u[0], a * u[1]]), Vec([b * u[0], b * u[1]]))
    assert in_DN2(Vec([e1, e2]), Vec([e2, e1]), Vec([e1 + e2, e2]))


def test_short_tuples_always_admissible():
    alg = make_algebra(1)
    p = Vec([1 + alg.gen(0)])
    for kind in KINDS:
        assert in_istructure(kind, [])
        assert in_istructure(kind, [p])


def test_shared_constant_part_is_second_order():
    alg = make_algebra(3)
    pts = [alg.vec([1, 2]) + Vec([alg.gen(i), alg.gen((i + 1) % 3) * alg.gen(i)]) for i in range(3)]
    assert in_istructure(IStructure.SECOND_ORDER, pts)
    diffs = [e for p in pts[1:] for e in (p - pts[0])]
    assert products_vanish_dense(diffs, 3, alg)


def test_cross_multiplying_blocks_nil_square_not_first_order():
    # two square-zero blocks A and B with surviving cross products
    alg = make_algebra(4, 3, [(0, 0), (0, 1), (1, 1), (2, 2), (2, 3), (3, 3)])
    q = Vec([alg.gen(0), alg.gen(1)])
    r = Vec([alg.gen(2), alg.gen(3)])
    pts = [alg.vec([0, 0]), q, r]
    assert not in_istructure(IStructure.FIRST_ORDER, pts)
    assert not products_vanish_dense(list(q) + list(r), 2, alg)
    w = witness_nil_square_not_first_order()
    assert in_istructure(IStructure.NIL_SQUARE, w)
    assert not in_istructure(IStructure.FIRST_ORDER, w)


def test_sampler_examples(rng):
    alg = algebra_for(IStructure.SECOND_ORDER, 2, 2)
    e = alg.vec([0, 0])
    P, Q = sample_generic(IStructure.SECOND_ORDER, e, 2, rng)
    assert in_istructure(IStructure.SECOND_ORDER, [e, P, Q])
    alg = algebra_for(IStructure.FIRST_ORDER, 2, 3)
    base = random_point(alg, 2, rng)
    pts = sample_generic(IStructure.FIRST_ORDER, base, 3, rng)
    assert in_istructure(IStructure.FIRST_ORDER, [base, *pts])
    alg = algebra_for(IStructure.NIL_SQUARE, 2, 1)
    (P,) = sample_generic(IStructure.NIL_SQUARE, alg.vec([1, 1]), 1, rng)
    assert in_istructure(IStructure.NIL_SQUARE, [P])


def test_sampler_refuses_short_budget(rng):
    alg = make_algebra(3)
    with pytest.raises(InsufficientGenerators):
        sample_generic(IStructure.SECOND_ORDER, alg.vec([0, 0]), 2, rng)


# -- predicates against oracles ------------------------------------------------------------


@pytest.mark.parametrize("kind", [IStructure.SECOND_ORDER, IStructure.FIRST_ORDER])
@pytest.mark.parametrize("seed", range(6))
def test_predicates_match_dense_oracle(kind, seed):
    rng = random.Random(seed)
    n, m = 2, 2
    alg = algebra_for(kind, n, m + 1)
    pts = sample_generic(kind, random_point(alg, n, rng), m + 1, rng)
    # perturb half of the tuples so that both verdicts occur
    if seed % 2:
        pts[1] = pts[1] + alg.vec([1, 0])
    diffs = [e for p in pts[1:] for e in (p - pts[0])]
    order = 2 if kind is IStructure.FIRST_ORDER else 3
    assert in_istructure(kind, pts) == products_vanish_dense(diffs, order, alg)


@pytest.mark.parametrize("seed", range(4))
def test_nil_square_matches_definitional_forms(seed):
    rng = random.Random(seed)
    alg = algebra_for(IStructure.NIL_SQUARE, 2, 3)
    base = random_point(alg, 2, rng)
    pts = sample_generic(IStructure.NIL_SQUARE, base, 3, rng)
    assert in_istructure(IStructure.NIL_SQUARE, [base, *pts])
    for p, q in combinations([base, *pts], 2):
        assert forms_vanish([p - q, p - q], rng)


def test_dn_predicates_match_forms(rng):
    alg = algebra_for(IStructure.NIL_SQUARE, 2, 2)
    q = Vec([alg.gen(0), alg.gen(1)])
    r = Vec([alg.gen(2), alg.gen(3)])
    assert in_DN1(q, q) == forms_vanish([q, q], rng)
    assert in_DN1(q, r) == forms_vanish([q, r], rng)
    assert not in_DN1(q, r)


@pytest.mark.parametrize("kind", KINDS)
@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), m=st.integers(1, 3), h=st.lists(st.integers(0, 3), max_size=5))
def test_restriction_property(kind, seed, m, h):
    rng = random.Random(seed)
    alg = algebra_for(kind, 2, m + 1)
    pts = sample_generic(kind, random_point(alg, 2, rng), m + 1, rng)
    assert in_istructure(kind, pts)
    assert in_istructure(kind, reindex(pts, [i % len(pts) for i in h]))


@pytest.mark.parametrize("seed", range(5))
def test_first_order_contained_in_others(seed):
    rng = random.Random(seed)
    alg = algebra_for(IStructure.FIRST_ORDER, 3, 4)
    pts = sample_generic(IStructure.FIRST_ORDER, random_point(alg, 3, rng), 4, rng)
    for kind in KINDS:
        assert in_istructure(kind, pts)


def test_nil_square_triples_are_second_order(rng):
    # three points never separate the two structures: the 4-point witness below is needed
    alg = algebra_for(IStructure.NIL_SQUARE, 3, 3)
    pts = sample_generic(IStructure.NIL_SQUARE, random_point(alg, 3, rng), 3, rng)
    assert in_istructure(IStructure.NIL_SQUARE, pts)
    assert in_istructure(IStructure.SECOND_ORDER, pts)


def test_nil_square_not_second_order_witness():
    pts = witness_nil_square_not_second_order(3)
    assert in_istructure(IStructure.NIL_SQUARE, pts)
    assert not in_istructure(IStructure.SECOND_ORDER, pts)
    q, r, s = (p - pts[0] for p in pts[1:])
    assert not in_DN2(q, r, s)
    assert not (q[0] * r[1] * s[2]).is_zero()
    with pytest.raises(ValueError):
        witness_nil_square_not_second_order(2)


@pytest.mark.parametrize("kind", [IStructure.FIRST_ORDER, IStructure.SECOND_ORDER])
@pytest.mark.parametrize("m", [1, 2])
def test_product_lemma(kind, m, rng):
    alg = algebra_for(kind, 2, 2 * m)
    pts = sample_generic(kind, random_point(alg, 2, rng), 2 * m, rng)
    assert in_istructure(kind, pts)
    assert in_istructure(kind, pair_up(pts))


def test_pair_up_needs_even_length():
    with pytest.raises(ValueError):
        pair_up([make_algebra(1).vec([0])])
