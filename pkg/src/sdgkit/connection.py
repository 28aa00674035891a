"""Affine connections in a chart: ``lambda(P, Q, S) = Q + S - P + Gamma_P[Q - P, S - P]``.

Also torsion, the second-order log/exp bijection and second-order i-affine
combinations. ``Gamma_P`` may depend polynomially on the base point ``P``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Callable, Mapping, Sequence

from .multilinear import Tensor, bilinear, combine, is_zero_tensor, swap, alternation
from .spaces import (
    DEFAULT_BOUND,
    IStructure,
    NeighbourhoodError,
    in_D,
    in_D2,
    in_istructure,
    random_rational,
)
from .weil import Rational, Vec, WeilElement, rational

HALF = Rational(1, 2)


class NotSymmetric(ValueError):
    pass


class ConnectionFormatError(ValueError):
    pass


class ConnectionSymbol:
    """Point-dependent bilinear map ``Gamma_P``. Subclasses supply ``tensor``."""

    dim: int

    def tensor(self, P: Vec) -> Tensor:
        raise NotImplementedError

    def __call__(self, P: Vec, u: Vec, v: Vec) -> Vec:
        return bilinear(self.tensor(P), u, v)

    def quadratic(self, P: Vec, v: Vec) -> Vec:
        """``Gamma_P[v]^2``; only the symmetric part contributes."""
        return self(P, v, v)

    def symmetrized(self) -> "ConnectionSymbol":
        return DerivedConnection(self, "sym")

    def conjugated(self) -> "ConnectionSymbol":
        return DerivedConnection(self, "op")

    def alternation(self, P: Vec, u: Vec, v: Vec) -> Vec:
        """``Gamma_P[u, v] - Gamma_P[v, u]``."""
        return self(P, u, v) - self(P, v, u)

    @property
    def is_symmetric(self) -> bool:
        cached = getattr(self, "_symmetric", None)
        if cached is None:
            cached = self._probe_symmetric()
            self._symmetric = cached
        return cached

    def _probe_symmetric(self) -> bool:
        from .weil import make_algebra

        alg = make_algebra(1)
        rng = random.Random(0)
        for _ in range(4):
            P = alg.vec(random_rational(rng, 1000) for _ in range(self.dim))
            if not is_zero_tensor(alternation(self.tensor(P))):
                return False
        return True

    def is_symmetric_at(self, P: Vec) -> bool:
        return is_zero_tensor(alternation(self.tensor(P)))


class FunctionConnection(ConnectionSymbol):
    """Connection given by a function ``P -> Gamma_P`` (a tensor)."""

    def __init__(self, dim: int, tensor_fn: Callable[[Vec], Tensor], *, symmetric: bool | None = None, name: str = ""):
        self.dim = dim
        self._fn = tensor_fn
        self._symmetric = symmetric
        self.name = name

    def tensor(self, P: Vec) -> Tensor:
        return self._fn(P)


class DerivedConnection(ConnectionSymbol):
    """Symmetrization (``mode='sym'``) or slot swap (``mode='op'``) of another symbol."""

    def __init__(self, parent: ConnectionSymbol, mode: str):
        if mode not in ("sym", "op"):
            raise ValueError(mode)
        self.parent = parent
        self.mode = mode
        self.dim = parent.dim
        self._symmetric = True if mode == "sym" else None

    def tensor(self, P: Vec) -> Tensor:
        T = self.parent.tensor(P)
        if self.mode == "op":
            return swap(T)
        return combine(HALF, T, HALF, swap(T))

    def __call__(self, P, u, v):
        if self.mode == "op":
            return self.parent(P, v, u)
        return (self.parent(P, u, v) + self.parent(P, v, u)) * HALF

    def symmetrized(self):
        return self if self.mode == "sym" else self.parent.symmetrized()

    def conjugated(self):
        return self.parent if self.mode == "op" else self


class PolynomialConnection(ConnectionSymbol):
    """``Gamma_P[u, v]_i = sum c[i, j, k, alpha] * P^alpha * u_j * v_k``.

    ``coeffs`` maps ``(i, j, k, alpha)`` to a rational, ``alpha`` an exponent
    vector of length ``dim`` with total degree at most ``degree``.
    """

    def __init__(self, dim: int, coeffs: Mapping, degree: int = 2):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim
        self.degree = degree
        clean = {}
        for key, c in coeffs.items():
            i, j, k, alpha = key
            alpha = tuple(int(a) for a in alpha)
            if not all(0 <= x < dim for x in (i, j, k)):
                raise ValueError(f"index {(i, j, k)} outside 0..{dim - 1}")
            if len(alpha) != dim or any(a < 0 for a in alpha) or sum(alpha) > degree:
                raise ValueError(f"bad multi-index {alpha} for dim {dim}, degree {degree}")
            c = rational(c)
            if c:
                clean[(i, j, k, alpha)] = clean.get((i, j, k, alpha), 0) + c
        self.coeffs = {key: c for key, c in clean.items() if c}
        by_alpha: dict = {}
        for (i, j, k, alpha), c in sorted(self.coeffs.items()):
            by_alpha.setdefault(alpha, []).append((i, j, k, c))
        self._by_alpha = by_alpha
        self._symmetric = all(self.coeffs.get((i, k, j, a), 0) == c for (i, j, k, a), c in self.coeffs.items())

    def _powers(self, P: Vec, precision: int | None = None) -> dict:
        """``P^alpha`` for every multi-index in use, modulo degree ``precision``."""
        alg = P.alg
        if precision is not None:
            P = P.truncate(precision)
        out = {}
        for alpha in self._by_alpha:
            x = alg.one
            for g, e in enumerate(alpha):
                for _ in range(e):
                    x = x * P[g]
            out[alpha] = x
        return out

    def tensor(self, P: Vec, precision: int | None = None) -> Tensor:
        n = self.dim
        alg = P.alg
        T = [[[alg.zero] * n for _ in range(n)] for _ in range(n)]
        for alpha, Pa in self._powers(P, precision).items():
            for i, j, k, c in self._by_alpha[alpha]:
                T[i][j][k] = T[i][j][k] + c * Pa
        return tuple(tuple(tuple(r) for r in Ti) for Ti in T)

    def __call__(self, P: Vec, u: Vec, v: Vec) -> Vec:
        # terms of P^alpha of degree >= cap - val(u) - val(v) cannot survive
        precision = P.alg.cap - u.valuation - v.valuation
        if precision <= 0:
            return P.alg.vec([0] * self.dim)
        return bilinear(self.tensor(P, precision), u, v)

    def symmetrized(self) -> "PolynomialConnection":
        out = {}
        for (i, j, k, a), c in self.coeffs.items():
            out[(i, j, k, a)] = out.get((i, j, k, a), 0) + c * HALF
            out[(i, k, j, a)] = out.get((i, k, j, a), 0) + c * HALF
        return PolynomialConnection(self.dim, out, self.degree)

    def conjugated(self) -> "PolynomialConnection":
        return PolynomialConnection(self.dim, {(i, k, j, a): c for (i, j, k, a), c in self.coeffs.items()}, self.degree)

    def antisymmetric_part_zero(self) -> bool:
        return self._symmetric

    # -- JSON ------------------------------------------------------------------

    def to_json_obj(self) -> dict:
        coeffs = [
            [i, j, k, list(a), _frac_str(c)] for (i, j, k, a), c in sorted(self.coeffs.items())
        ]
        return {"dim": self.dim, "degree": self.degree, "coeffs": coeffs}

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True)

    @classmethod
    def from_json_obj(cls, obj) -> "PolynomialConnection":
        if not isinstance(obj, dict):
            raise ConnectionFormatError("connection document must be a JSON object")
        keys = set(obj)
        if keys != {"dim", "degree", "coeffs"}:
            extra, missing = keys - {"dim", "degree", "coeffs"}, {"dim", "degree", "coeffs"} - keys
            raise ConnectionFormatError(f"unknown fields {sorted(extra)}, missing fields {sorted(missing)}")
        dim, degree, entries = obj["dim"], obj["degree"], obj["coeffs"]
        if not (_is_int(dim) and dim >= 1 and _is_int(degree) and degree >= 0):
            raise ConnectionFormatError("dim must be a positive integer and degree a non-negative integer")
        if not isinstance(entries, list):
            raise ConnectionFormatError("coeffs must be a list")
        coeffs = {}
        for pos, entry in enumerate(entries):
            if not (isinstance(entry, list) and len(entry) == 5):
                raise ConnectionFormatError(f"coeffs[{pos}] must be [i, j, k, [alpha...], \"p/q\"]")
            i, j, k, alpha, c = entry
            if not all(_is_int(x) for x in (i, j, k)) or not isinstance(alpha, list) or not all(_is_int(a) for a in alpha):
                raise ConnectionFormatError(f"coeffs[{pos}] has non-integer indices")
            if not isinstance(c, str):
                raise ConnectionFormatError(f"coeffs[{pos}] coefficient must be a \"p/q\" string")
            try:
                value = Rational(c)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConnectionFormatError(f"coeffs[{pos}] coefficient {c!r} is not a rational") from exc
            key = (i, j, k, tuple(alpha))
            if key in coeffs:
                raise ConnectionFormatError(f"coeffs[{pos}] duplicates an earlier entry")
            coeffs[key] = value
        try:
            return cls(dim, coeffs, degree)
        except ValueError as exc:
            raise ConnectionFormatError(str(exc)) from exc

    @classmethod
    def loads(cls, text: str) -> "PolynomialConnection":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConnectionFormatError(f"invalid JSON: {exc}") from exc
        return cls.from_json_obj(obj)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _frac_str(c: Rational) -> str:
    return f"{c.numerator}/{c.denominator}"


def random_connection(
    rng: random.Random,
    dim: int,
    *,
    degree: int = 2,
    bound: int = DEFAULT_BOUND,
    density: float = 0.3,
    symmetric: bool = False,
) -> PolynomialConnection:
    """Random polynomial symbol; every constant entry is present so Gamma_P is generic."""
    alphas = [
        tuple(m.count(g) for g in range(dim))
        for d in range(degree + 1)
        for m in combinations_with_replacement(range(dim), d)
    ]
    coeffs = {}
    for i in range(dim):
        for j in range(dim):
            for k in range(dim):
                for a in alphas:
                    if sum(a) == 0 or rng.random() < density:
                        coeffs[(i, j, k, a)] = random_rational(rng, bound)
    conn = PolynomialConnection(dim, coeffs, degree)
    return conn.symmetrized() if symmetric else conn


def zero_connection(dim: int) -> PolynomialConnection:
    return PolynomialConnection(dim, {}, 0)


# -- lambda and torsion ------------------------------------------------------------


def _check_lambda_args(P: Vec, Q: Vec, S: Vec):
    if (in_D(Q - P) and in_D(S - P)) or in_istructure(IStructure.SECOND_ORDER, [P, Q, S]):
        return
    raise NeighbourhoodError("lambda needs <P,Q>, <P,S> nil-square neighbours or <P,Q,S> second-order")


def lambda_apply(conn: ConnectionSymbol, P: Vec, Q: Vec, S: Vec, *, strict: bool = True) -> Vec:
    if strict:
        _check_lambda_args(P, Q, S)
    return Q + S - P + conn(P, Q - P, S - P)


def torsion(conn: ConnectionSymbol, P: Vec, Q: Vec, R: Vec, *, mode: str = "chart", strict: bool = True) -> Vec:
    """``tau_P(Q, R)``: ``lambda(lambda(P, Q, R), Q, R)`` or its chart form."""
    if strict:
        _check_lambda_args(P, Q, R)
    if mode == "chart":
        return P - conn.alternation(P, Q - P, R - P)
    if mode == "definitional":
        X = lambda_apply(conn, P, Q, R, strict=False)
        return lambda_apply(conn, X, Q, R, strict=False)
    raise ValueError(f"unknown torsion mode {mode!r}")


# -- log / exp -----------------------------------------------------------------------


def _require_symmetric(conn: ConnectionSymbol):
    if not conn.is_symmetric:
        raise NotSymmetric("log/exp need a symmetric connection (use .symmetrized())")


def _require_monad(P: Vec, v: Vec, what: str):
    if any(x.constant for x in v) or not in_D2(v):
        raise NeighbourhoodError(f"{what} is outside the second-order monad of the base point")


def log_at(conn: ConnectionSymbol, P: Vec, Q: Vec, *, strict: bool = True) -> Vec:
    """``log_P(Q) = (Q - P) - 1/2 Gamma_P[Q - P]^2``."""
    q = Q - P
    if strict:
        _require_symmetric(conn)
        _require_monad(P, q, "Q - P")
    return q - conn.quadratic(P, q) * HALF


def exp_at(conn: ConnectionSymbol, P: Vec, v: Vec, *, strict: bool = True) -> Vec:
    """``exp_P(v) = P + v + 1/2 Gamma_P[v]^2``."""
    if strict:
        _require_symmetric(conn)
        _require_monad(P, v, "v")
    return P + v + conn.quadratic(P, v) * HALF


def log_exp(conn: ConnectionSymbol, P: Vec, *, strict: bool = True):
    """The pair ``(log_P, exp_P)`` as functions."""
    if strict:
        _require_symmetric(conn)
    return (lambda Q: log_at(conn, P, Q, strict=strict)), (lambda v: exp_at(conn, P, v, strict=strict))


# -- i-affine combinations --------------------------------------------------------------


def iaffine_combination(
    conn: ConnectionSymbol,
    P: Vec,
    weights: Sequence,
    points: Sequence[Vec],
    *,
    linear: bool = False,
    strict: bool = True,
) -> Vec:
    """Second-order i-affine combination computed in the chart of ``P``.

    ``S + 1/2 (Gamma_P[S - P]^2 - sum mu_j Gamma_P[P_j - P]^2)`` with
    ``S = P + sum mu_j (P_j - P)``. With ``linear=True`` the weights are free
    and ``P`` acts as the origin (an i-linear combination); otherwise they
    must sum to 1, in which case ``S = sum mu_j P_j``.
    """
    mu = [rational(m) for m in weights]
    points = list(points)
    if len(mu) != len(points):
        raise ValueError("one weight per point")
    if not linear and sum(mu) != 1:
        raise ValueError(f"affine weights must sum to 1, got {sum(mu)}")
    if strict and not in_istructure(IStructure.SECOND_ORDER, [P, *points]):
        raise NeighbourhoodError("points are not second-order neighbours of the base")
    diffs = [Pj - P for Pj in points]
    total = P.alg.vec([0] * len(P))
    corr = P.alg.vec([0] * len(P))
    for m, d in zip(mu, diffs):
        if m:
            total = total + d * m
            corr = corr + conn.quadratic(P, d) * m
    return P + total + (conn.quadratic(P, total) - corr) * HALF


@dataclass(frozen=True)
class TangentVector:
    """The tangent vector ``d -> base + d * principal``."""

    base: Vec
    principal: Vec

    def __post_init__(self):
        if len(self.base) != len(self.principal):
            raise ValueError("base and principal part must share the dimension")

    def at(self, d: WeilElement) -> Vec:
        return self.base + self.principal * d
