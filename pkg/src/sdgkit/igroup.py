"""Infinitesimal groups.

* ``IGroupOnD2``: the law ``v * w = v + w + B[v, w]`` on second-order
  infinitesimal vectors, and ``extract_B`` which recovers ``B`` from any such law.
* ``MonadGroup``: the group on the second-order monad of a point induced by an
  affine connection, with three independent multiplication routes.
* ``verify_igroup_axioms``: sampled check of the group and neighbourhood axioms.
* ``base_point_change``: compares non-abelian affine combinations formed from
  two different base points.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .calculus import PolyMap, extract_binary_quadratic
from .connection import (
    ConnectionSymbol,
    exp_at,
    iaffine_combination,
    log_at,
    torsion,
)
from .multilinear import Tensor, alternation, bilinear, is_symmetric, is_zero_tensor, nonzero_entries, scale, to_rational
from .spaces import IStructure, NeighbourhoodError, algebra_for, in_D2, in_Dtilde2, in_istructure, sample_generic
from .weil import Rational, SignatureMismatch, Vec, rational

HALF = Rational(1, 2)


class NotAnIGroupLaw(ValueError):
    def __init__(self, component: str, detail: str):
        super().__init__(f"not an i-group law: component {component} {detail}")
        self.component = component


# -- i-groups on D2(V) -------------------------------------------------------------


@dataclass(frozen=True)
class IGroupOnD2:
    """``v * w = v + w + B[v, w]``, ``v^-1 = -v + B[v, v]``, unit 0."""

    n: int
    B: Tensor
    strict: bool = True

    def _check(self, *vs: Vec):
        if not self.strict:
            return
        for v in vs:
            if not in_D2(v) or any(x.constant for x in v):
                raise NeighbourhoodError("argument is not in D2(V)")
        if len(vs) == 2 and not in_Dtilde2(*vs):
            raise NeighbourhoodError("arguments are not in D~2(2, V)")

    def unit(self, alg) -> Vec:
        return alg.vec([0] * self.n)

    def mul(self, v: Vec, w: Vec) -> Vec:
        self._check(v, w)
        return v + w + bilinear(self.B, v, w)

    def inv(self, v: Vec) -> Vec:
        self._check(v)
        return -v + bilinear(self.B, v, v)

    def mul_map(self) -> PolyMap:
        return PolyMap(self.n, self.n, lambda v, w: v + w + bilinear(self.B, v, w), arity=2)

    @property
    def abelian(self) -> bool:
        return is_symmetric(self.B)


def d2_mul(g: IGroupOnD2, v: Vec, w: Vec) -> Vec:
    return g.mul(v, w)


def d2_inv(g: IGroupOnD2, v: Vec) -> Vec:
    return g.inv(v)


def extract_B(mul: PolyMap) -> Tensor:
    """Recover ``B`` from a group law on D2(V) with unit 0.

    Raises ``NotAnIGroupLaw`` naming the first normal-form component that
    contradicts ``v + w + B[v, w]``.
    """
    rep = extract_binary_quadratic(mul)
    n = mul.n
    ident = tuple(tuple(Rational(int(i == j)) for j in range(n)) for i in range(n))
    if any(rep.a0):
        raise NotAnIGroupLaw("a0", f"= {[str(x) for x in rep.a0]} (the unit 0 is not neutral)")
    if rep.A1 != ident:
        raise NotAnIGroupLaw("A1", "is not the identity")
    if rep.B1 != ident:
        raise NotAnIGroupLaw("B1", "is not the identity")
    if not is_zero_tensor(rep.A2):
        raise NotAnIGroupLaw("A2", f"has nonzero entries {_show(rep.A2)}")
    if not is_zero_tensor(rep.B2):
        raise NotAnIGroupLaw("B2", f"has nonzero entries {_show(rep.B2)}")
    return rep.C2


def _show(T: Tensor, limit: int = 3) -> str:
    items = nonzero_entries(T)
    text = ", ".join(f"[{i},{j},{k}]={x}" for i, j, k, x in items[:limit])
    return text + (", ..." if len(items) > limit else "")


def corrupted_law(B: Tensor, component: str, rng: random.Random) -> PolyMap:
    """A deliberately broken law ``v + w + B[v, w]`` plus an injected ``a0`` or ``A2`` term."""
    n = len(B)
    if component == "a0":
        shift = [Rational(rng.randint(1, 9)) for _ in range(n)]
        return PolyMap(n, n, lambda v, w: v + w + bilinear(B, v, w) + v.alg.vec(shift), arity=2)
    if component == "A2":
        i = rng.randrange(n)
        extra = [[[Rational(0)] * n for _ in range(n)] for _ in range(n)]
        extra[i][0][0] = Rational(rng.randint(1, 9))
        E = tuple(tuple(tuple(r) for r in Ti) for Ti in extra)
        return PolyMap(n, n, lambda v, w: v + w + bilinear(B, v, w) + bilinear(E, v, v), arity=2)
    raise ValueError(f"unknown component {component!r}")


# -- the monad group of a connection ----------------------------------------------------


class MonadGroup:
    """The second-order monad of ``base`` as an i-group built from ``conn``.

    Points are passed as full points (not displacements). A rational base
    point is re-embedded into whatever algebra the arguments live in.
    """

    PATHS = ("chart", "bch", "transport")

    def __init__(self, conn: ConnectionSymbol, base: Vec, *, strict: bool = True):
        if len(base) != conn.dim:
            raise ValueError("base point dimension does not match the connection")
        self.conn = conn
        self.sym = conn.symmetrized()
        self.base = base
        self.strict = strict
        self.n = conn.dim
        self._rational = all(x.is_constant() for x in base)
        A = alternation(conn.tensor(base))
        self.bracket_tensor = to_rational(A) if self._rational else A
        self._bases = {base.alg: base}

    # -- plumbing --------------------------------------------------------------

    def at(self, alg) -> Vec:
        """The base point inside ``alg``."""
        hit = self._bases.get(alg)
        if hit is None:
            if not self._rational:
                raise SignatureMismatch("a Weil-valued base point cannot be moved to another algebra")
            hit = alg.vec(self.base.constant)
            self._bases[alg] = hit
        return hit

    def _check(self, *pts: Vec) -> Vec:
        P = self.at(pts[0].alg)
        if self.strict and not in_istructure(IStructure.SECOND_ORDER, [P, *pts]):
            raise NeighbourhoodError("points are not in the second-order monad of the base")
        return P

    def contains(self, points: Sequence[Vec]) -> bool:
        points = list(points)
        if not points:
            return True
        P = self.at(points[0].alg)
        return all(p.constant == P.constant for p in points) and in_istructure(IStructure.SECOND_ORDER, [P, *points])

    def unit(self, alg) -> Vec:
        return self.at(alg)

    def sample(self, rng: random.Random, m: int, **kw) -> list[Vec]:
        alg = algebra_for(IStructure.SECOND_ORDER, self.n, m)
        return sample_generic(IStructure.SECOND_ORDER, self.at(alg), m, rng, **kw)

    def tangent_group(self) -> IGroupOnD2:
        """The transported law on tangent vectors: ``B = 1/2 (Gamma[u, v] - Gamma[v, u])``."""
        return IGroupOnD2(self.n, scale(HALF, self.bracket_tensor), strict=False)

    # -- operations ----------------------------------------------------------------

    def bracket(self, Q: Vec, R: Vec) -> Vec:
        """Lie bracket of points ``P + Gamma_P[q, r] - Gamma_P[r, q]``."""
        P = self._check(Q, R)
        return P + self.conn.alternation(P, Q - P, R - P)

    def mul(self, Q: Vec, R: Vec, path: str = "chart") -> Vec:
        P = self._check(Q, R)
        if path == "chart":
            return Q + R - P + self.conn(P, Q - P, R - P)
        if path == "bch":
            # Q + R + 1/2 [Q, R] as an i-linear combination around P
            br = P + self.conn.alternation(P, Q - P, R - P)
            return iaffine_combination(self.sym, P, [1, 1, HALF], [Q, R, br], linear=True, strict=False)
        if path == "transport":
            v = log_at(self.sym, P, Q, strict=False)
            w = log_at(self.sym, P, R, strict=False)
            return exp_at(self.sym, P, self.tangent_group().mul(v, w), strict=False)
        raise ValueError(f"unknown multiplication path {path!r}")

    def inv(self, Q: Vec, path: str = "chart") -> Vec:
        P = self._check(Q)
        if path == "chart":
            q = Q - P
            return P - q + self.sym.quadratic(P, q)
        if path == "reflection":
            return iaffine_combination(self.sym, P, [-1], [Q], linear=True, strict=False)
        if path == "transport":
            return exp_at(self.sym, P, -log_at(self.sym, P, Q, strict=False), strict=False)
        raise ValueError(f"unknown inverse path {path!r}")

    def commutator(self, Q: Vec, R: Vec) -> Vec:
        """``((Q R) Q^-1) R^-1`` from ``mul`` and ``inv`` only."""
        return self.mul(self.mul(self.mul(Q, R), self.inv(Q)), self.inv(R))

    def product(self, points: Sequence[Vec]) -> Vec:
        points = list(points)
        acc = points[0]
        for p in points[1:]:
            acc = self.mul(acc, p)
        return acc

    def power(self, Q: Vec, k: int) -> Vec:
        if k == 0:
            return self.unit(Q.alg)
        X = Q if k > 0 else self.inv(Q)
        acc = X
        for _ in range(abs(k) - 1):
            acc = self.mul(acc, X)
        return acc

    @property
    def abelian_at_base(self) -> bool:
        return is_zero_tensor(self.bracket_tensor)


def lie_bracket_points(mg: MonadGroup, Q: Vec, R: Vec) -> Vec:
    return mg.bracket(Q, R)


def commutator(mg: MonadGroup, Q: Vec, R: Vec) -> Vec:
    return mg.commutator(Q, R)


# -- D2 adapter so both kinds of group share the axiom checker ----------------------------


class _D2Adapter:
    def __init__(self, g: IGroupOnD2, mul=None):
        self.g = g
        self.n = g.n
        self._mul = mul

    def unit(self, alg):
        return self.g.unit(alg)

    def mul(self, v, w):
        if self._mul is not None:
            return self._mul(v, w)
        return self.g.mul(v, w)

    def inv(self, v):
        return self.g.inv(v)

    def contains(self, points):
        points = list(points)
        if not points:
            return True
        zero = points[0].alg.vec([0] * self.n)
        return in_istructure(IStructure.SECOND_ORDER, [zero, *points])

    def sample(self, rng, m, **kw):
        alg = algebra_for(IStructure.SECOND_ORDER, self.n, m)
        return sample_generic(IStructure.SECOND_ORDER, alg.vec([0] * self.n), m, rng, **kw)

    def power(self, v, k):
        if k == 0:
            return self.unit(v.alg)
        X = v if k > 0 else self.inv(v)
        acc = X
        for _ in range(abs(k) - 1):
            acc = self.mul(acc, X)
        return acc


@dataclass
class AxiomReport:
    """Per-check list of failure witnesses; a check passes when its list is empty."""

    checks: dict = field(default_factory=dict)

    def record(self, name: str, ok: bool, witness=None):
        bucket = self.checks.setdefault(name, [])
        if not ok:
            bucket.append(witness)

    @property
    def ok(self) -> bool:
        return all(not w for w in self.checks.values())

    def failed(self) -> list[str]:
        return sorted(name for name, w in self.checks.items() if w)


def verify_igroup_axioms(
    group,
    rng: random.Random,
    trials: int = 8,
    *,
    words: int = 8,
    mul: Callable | None = None,
    bound: int = 10**6,
) -> AxiomReport:
    """Sample admissible tuples and check the i-group axioms.

    ``group`` is an ``IGroupOnD2`` or a ``MonadGroup``; ``mul`` optionally
    replaces the multiplication (used by negative controls).
    """
    if isinstance(group, IGroupOnD2):
        G = _D2Adapter(group, mul)
    else:
        G = group
        if mul is not None:
            G = _Overridden(group, mul)
    report = AxiomReport()
    for t in range(trials):
        P, Q, R, S1, S2 = G.sample(rng, 5, bound=bound)
        e = G.unit(P.alg)
        w = {"P": str(P), "Q": str(Q), "R": str(R)}
        PQ = G.mul(P, Q)
        report.record("associativity", G.mul(PQ, R) == G.mul(P, G.mul(Q, R)), w)
        report.record("unit", G.mul(e, P) == P and G.mul(P, e) == P, w)
        Pi = G.inv(P)
        report.record("inverse", G.mul(P, Pi) == e and G.mul(Pi, P) == e, w)
        report.record("neighbourhood_product", G.contains([PQ, R, S1, S2]), w)
        report.record("neighbourhood_inverse", G.contains([Pi, Q, R, S1]), w)
        report.record("neighbourhood_unit", G.contains([e, P, Q, R]), w)
    for _ in range(words):
        n = rng.randint(1, 4)
        pts = G.sample(rng, n, bound=bound)
        images = []
        for _ in range(rng.randint(1, 3)):
            alpha = [rng.randint(-2, 2) for _ in range(n)]
            acc = G.unit(pts[0].alg)
            for p, a in zip(pts, alpha):
                acc = G.mul(acc, G.power(p, a))
            images.append(acc)
        report.record("derived_words", G.contains(images), {"points": [str(p) for p in pts]})
    return report


class _Overridden:
    def __init__(self, mg: MonadGroup, mul):
        self._mg = mg
        self.mul = mul
        self.n = mg.n

    def __getattr__(self, name):
        return getattr(self._mg, name)

    def power(self, Q, k):
        if k == 0:
            return self._mg.unit(Q.alg)
        X = Q if k > 0 else self._mg.inv(Q)
        acc = X
        for _ in range(abs(k) - 1):
            acc = self.mul(acc, X)
        return acc


# -- base-point change of non-abelian affine combinations -------------------------------


def tangent_product(B: Callable[[Vec, Vec], Vec], vectors: Sequence[Vec], order: str = "left") -> Vec:
    """Iterated product under ``v * w = v + w + B(v, w)``.

    ``order='left'`` multiplies ``v_1 v_2 ... v_m`` left to right;
    ``order='right'`` multiplies ``v_m ... v_2 v_1``.
    """
    vs = list(vectors)
    if order == "right":
        vs.reverse()
    elif order != "left":
        raise ValueError(f"unknown product order {order!r}")
    acc = vs[0]
    for v in vs[1:]:
        acc = acc + v + B(acc, v)
    return acc


def group_combination(conn: ConnectionSymbol, base: Vec, weights, points, *, order: str = "left") -> Vec:
    """``exp_base(prod_j mu_j log_base(P_j))`` with the product taken in the tangent group at ``base``."""
    sym = conn.symmetrized()

    def B(u, v):
        return conn.alternation(base, u, v) * HALF

    logs = [log_at(sym, base, p, strict=False) * rational(m) for m, p in zip(weights, points)]
    return exp_at(sym, base, tangent_product(B, logs, order), strict=False)


def torsion_correction(conn: ConnectionSymbol, P: Vec, Q: Vec, weights, points) -> Vec:
    """``1/2 sum_j sum_{k<j} mu_k mu_j (tau_Q(P, P_k) + tau_Q(P_j, P) - 2Q)``."""
    mu = [rational(m) for m in weights]
    total = Q.alg.vec([0] * len(Q))
    for j in range(len(points)):
        for k in range(j):
            c = mu[k] * mu[j]
            if not c:
                continue
            t = (
                torsion(conn, Q, P, points[k], strict=False)
                + torsion(conn, Q, points[j], P, strict=False)
                - Q * 2
            )
            total = total + t * c
    return total * HALF


def base_point_change(
    conn: ConnectionSymbol,
    P: Vec,
    Q: Vec,
    weights,
    points: Sequence[Vec],
    *,
    order: str = "left",
    sign: int = 1,
    strict: bool = True,
) -> tuple[Vec, Vec]:
    """``(lhs, rhs)`` for the base-point change of a non-abelian combination.

    ``lhs`` is the combination formed at ``P``; ``rhs`` the one formed at ``Q``
    plus ``sign`` times the torsion correction. With the left-to-right product
    the identity holds for ``sign=-1``; with ``order='right'`` for ``sign=+1``.
    """
    points = list(points)
    mu = [rational(m) for m in weights]
    if len(mu) != len(points):
        raise ValueError("one weight per point")
    if sum(mu) != 1:
        raise ValueError(f"weights must sum to 1, got {sum(mu)}")
    if strict and not in_istructure(IStructure.SECOND_ORDER, [P, Q, *points]):
        raise NeighbourhoodError("<P, Q, P_1, ..., P_m> must be second-order neighbours")
    lhs = group_combination(conn, P, mu, points, order=order)
    rhs = group_combination(conn, Q, mu, points, order=order)
    return lhs, rhs + torsion_correction(conn, P, Q, mu, points) * sign
