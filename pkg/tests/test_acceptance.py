"""The twelve acceptance criteria, each with exact rational equality.

Run with ``pytest tests/test_acceptance.py``; a summary prints one pass/fail
line per criterion.
"""

import json
import random
from fractions import Fraction
from itertools import product

import pytest

from sdgkit import connection as cn
from sdgkit import igroup as ig
from sdgkit import liegroup as lg
from sdgkit.calculus import extract_binary_quadratic, random_dtilde2, random_polynomial_map
from sdgkit.cli import main
from sdgkit.multilinear import random_tensor
from sdgkit.spaces import (
    IStructure,
    algebra_for,
    in_istructure,
    random_point,
    sample_generic,
    witness_nil_square_not_first_order,
    witness_nil_square_not_second_order,
)
from sdgkit.weil import make_algebra

SEED = 42
TRIALS = 8
BOUND = 10**6


def rng_for(name):
    return random.Random(f"{SEED}:{name}")


def monad_group(rng, dim, symmetric=False):
    conn = cn.random_connection(rng, dim, bound=BOUND, symmetric=symmetric)
    return ig.MonadGroup(conn, random_point(make_algebra(1), dim, rng, BOUND))


def monad_samples(name):
    """(group, Q, R) for dims 2..4, 8 connections each, 8 pairs per connection."""
    rng = rng_for(name)
    for dim in (2, 3, 4):
        for _ in range(TRIALS):
            mg = monad_group(rng, dim)
            for _ in range(TRIALS):
                Q, R = mg.sample(rng, 2, bound=BOUND)
                yield mg, Q, R


def test_criterion_01_extraction_round_trip(criterion):
    criterion(1, "binary normal form round trip on D~2 witnesses")
    rng = rng_for("extraction")
    n = 3
    alg = make_algebra(2 * n, 3)
    for degree in (0, 1, 2):
        for _ in range(TRIALS):
            m = random_polynomial_map(rng, n, n, degree, arity=2, bound=BOUND)
            rep = extract_binary_quadratic(m, rng=rng)
            for _ in range(TRIALS):
                d, e = random_dtilde2(alg, n, rng)
                assert m(d, e) == rep.evaluate(d, e)


def test_criterion_02_bch_three_paths(criterion):
    criterion(2, "chart, BCH and transported products agree (dims 2-4)")
    for mg, Q, R in monad_samples("bch"):
        chart = mg.mul(Q, R, "chart")
        assert mg.mul(Q, R, "bch") == chart
        assert mg.mul(Q, R, "transport") == chart


def test_criterion_03_commutator_identity(criterion):
    criterion(3, "group commutator equals the bracket of points")
    for mg, Q, R in monad_samples("bch"):
        assert ig.commutator(mg, Q, R) == ig.lie_bracket_points(mg, Q, R)


def test_criterion_04_torsion(criterion):
    criterion(4, "definitional and chart torsion agree; bracket is reflected torsion")
    for mg, Q, R in monad_samples("torsion"):
        P = mg.at(Q.alg)
        chart = cn.torsion(mg.conn, P, Q, R, mode="chart")
        assert cn.torsion(mg.conn, P, Q, R, mode="definitional") == chart
        assert mg.bracket(Q, R) - P == -(chart - P)


def test_criterion_05_classification(criterion):
    criterion(5, "extract_B inverts d2_mul; corrupted laws rejected with diagnostics")
    rng = rng_for("classification")
    for n in (1, 2, 3, 4):
        for _ in range(TRIALS):
            B = random_tensor(rng, n, n, BOUND)
            assert ig.extract_B(ig.IGroupOnD2(n, B).mul_map()) == B
        for component in ("a0", "A2"):
            with pytest.raises(ig.NotAnIGroupLaw) as info:
                ig.extract_B(ig.corrupted_law(random_tensor(rng, n, n, BOUND), component, rng))
            assert info.value.component == component


@pytest.mark.parametrize("group", [lg.GL2, lg.HEISENBERG], ids=lambda g: g.name)
def test_criterion_06_lie_group_monad(criterion, group):
    criterion(6, "monad group of the left connection is matrix multiplication (GL2, Heisenberg)")
    rng = rng_for(f"liegroup-{group.name}")
    mg = lg.left_monad_group(group)
    for _ in range(TRIALS):
        Q, R = mg.sample(rng, 2, bound=BOUND)
        QM, RM = group.from_chart(Q), group.from_chart(R)
        assert mg.mul(Q, R) == (QM * RM).chart()
        assert mg.inv(Q) == lg.mat_inv(QM).chart()


def matrix_of(group, coords):
    M = [[Fraction(0)] * group.n for _ in range(group.n)]
    for (i, j), x in zip(group.coords(), coords):
        M[i][j] = Fraction(x)
    return M


def commutator_oracle(group, v1, v2):
    X, Y = matrix_of(group, v1), matrix_of(group, v2)
    n = group.n
    mm = lambda A, B: [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)] for i in range(n)]  # noqa: E731
    XY, YX = mm(X, Y), mm(Y, X)
    return [XY[i][j] - YX[i][j] for i, j in group.coords()]


@pytest.mark.parametrize("group", [lg.GL2, lg.HEISENBERG], ids=lambda g: g.name)
def test_criterion_07_lie_algebra_recovery(criterion, group):
    criterion(7, "tangent bracket equals the matrix commutator (basis pairs and random pairs)")
    rng = rng_for(f"tangent-{group.name}")
    basis = [[int(i == j) for i in range(group.dim)] for j in range(group.dim)]
    pairs = list(product(basis, repeat=2))
    assert len(pairs) == group.dim**2
    for _ in range(TRIALS):
        pairs.append(tuple([Fraction(rng.randint(-BOUND, BOUND), rng.randint(1, BOUND)) for _ in range(group.dim)] for _ in range(2)))
    for v1, v2 in pairs:
        t = lg.tangent_bracket(group, lg.tangent_at_identity(group, v1), lg.tangent_at_identity(group, v2))
        assert list(t.principal.constant) == commutator_oracle(group, v1, v2)


def base_point_samples(name, m, symmetric=False):
    rng = rng_for(f"{name}-{m}")
    for _ in range(TRIALS):
        conn = cn.random_connection(rng, 3, bound=BOUND, symmetric=symmetric)
        alg = algebra_for(IStructure.SECOND_ORDER, 3, m + 2)
        pts = sample_generic(IStructure.SECOND_ORDER, random_point(alg, 3, rng, BOUND), m + 2, rng, bound=BOUND)
        mu = [Fraction(rng.randint(-BOUND, BOUND), rng.randint(1, BOUND)) for _ in range(m - 1)]
        mu.append(1 - sum(mu))
        yield conn, pts[0], pts[1], mu, pts[2:]


def test_criterion_08_base_point_obstruction(criterion):
    criterion(8, "base-point change with the torsion correction as stated (left-to-right product, +correction)")
    mismatches = []
    for m in (2, 3):
        for conn, P, Q, mu, pts in base_point_samples("base-point", m):
            assert not conn.is_symmetric
            lhs, rhs = ig.base_point_change(conn, P, Q, mu, pts)
            if lhs != rhs:
                mismatches.append(m)
        for conn, P, Q, mu, pts in base_point_samples("base-point-sym", m):
            sym = conn.symmetrized()
            assert Q + ig.torsion_correction(sym, P, Q, mu, pts) == Q
            lhs, rhs = ig.base_point_change(sym, P, Q, mu, pts)
            assert lhs == rhs
    assert not mismatches, f"{len(mismatches)} of {2 * TRIALS} non-symmetric samples violate the stated equality"


@pytest.mark.parametrize("order,sign", [("left", -1), ("right", 1)])
def test_criterion_08_companion_sign_conventions(order, sign):
    # the same samples under the two self-consistent conventions
    for m in (2, 3):
        for conn, P, Q, mu, pts in base_point_samples("base-point", m):
            lhs, rhs = ig.base_point_change(conn, P, Q, mu, pts, order=order, sign=sign)
            assert lhs == rhs


def test_criterion_09_igroup_axioms(criterion):
    criterion(9, "i-group axioms and derived words for IGroupOnD2 and MonadGroup")
    rng = rng_for("axioms")
    for dim in (2, 3, 4):
        groups = [ig.IGroupOnD2(dim, random_tensor(rng, dim, dim, BOUND)), monad_group(rng, dim)]
        for g in groups:
            report = ig.verify_igroup_axioms(g, rng, TRIALS, words=TRIALS, bound=BOUND)
            assert report.ok, report.failed()
            assert set(report.checks) >= {
                "associativity",
                "unit",
                "inverse",
                "neighbourhood_product",
                "neighbourhood_inverse",
                "neighbourhood_unit",
                "derived_words",
            }


def test_criterion_10_containments_and_witnesses(criterion):
    criterion(10, "structure containments and stored counterexamples")
    rng = rng_for("containments")
    for _ in range(TRIALS):
        alg = algebra_for(IStructure.FIRST_ORDER, 3, 4)
        pts = sample_generic(IStructure.FIRST_ORDER, random_point(alg, 3, rng, BOUND), 4, rng, bound=BOUND)
        assert in_istructure(IStructure.FIRST_ORDER, pts)
        assert in_istructure(IStructure.NIL_SQUARE, pts)
        assert in_istructure(IStructure.SECOND_ORDER, pts)
    w = witness_nil_square_not_first_order()
    assert in_istructure(IStructure.NIL_SQUARE, w) and not in_istructure(IStructure.FIRST_ORDER, w)
    w = witness_nil_square_not_second_order(3)
    assert len(w[0]) == 3
    assert in_istructure(IStructure.NIL_SQUARE, w) and not in_istructure(IStructure.SECOND_ORDER, w)
    P, Q, R = lg.nil_square_failure_witness(lg.GL3)
    e = lg.GL3.chart_identity(P.alg)
    assert in_istructure(IStructure.NIL_SQUARE, [e, P.chart(), Q.chart(), R.chart()])
    assert not in_istructure(IStructure.NIL_SQUARE, [(P * Q).chart(), R.chart()])


def test_criterion_11_abelian_iff_symmetric(criterion):
    criterion(11, "multiplication commutes exactly when the symbol is symmetric at the base")
    rng = rng_for("abelian")
    verdicts = []
    for t in range(TRIALS):
        mg = monad_group(rng, 3, symmetric=bool(t % 2))
        commutes = True
        for _ in range(TRIALS):
            Q, R = mg.sample(rng, 2, bound=BOUND)
            commutes &= mg.mul(Q, R) == mg.mul(R, Q)
        symmetric = mg.conn.is_symmetric_at(mg.base)
        assert commutes == symmetric
        verdicts.append(symmetric)
    assert any(verdicts) and not all(verdicts)


def test_criterion_12_cli_determinism(criterion, tmp_path, capsys):
    criterion(12, "identical CLI runs give byte-identical JSON; negative controls expected-fail, exit 0")
    outs = []
    for name in ("a", "b"):
        path = tmp_path / f"{name}.json"
        code = main(["verify", "--seed", str(SEED), "--negative-controls", "--out", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    negatives = [r for r in doc["records"] if r["id"].startswith("neg_")]
    assert negatives and all(r["status"] == "expected-fail" for r in negatives)
    assert doc["summary"]["fail"] == 0
