"""Matrix Lie groups over the Weil model: GL(n) and the 3x3 Heisenberg group.

Chart coordinates: GL(n) uses the row-major entries of the matrix (``e`` is
``vec(I)``); the Heisenberg group uses ``(X[0][1], X[1][2], X[0][2])``.
Canonical connections come from translation, ``lambda_l(P, Q, R) = Q P^-1 R``
and ``lambda_r(P, Q, R) = R P^-1 Q``, so ``Gamma_P[q, r] = q P^-1 r`` (left).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .calculus import ExtractionError, PolyMap, extract_binary_quadratic
from .connection import ConnectionSymbol, PolynomialConnection, TangentVector, iaffine_combination
from .multilinear import Tensor, is_zero_tensor
from .weil import Algebra, NotAUnit, Rational, Vec, WeilElement, make_algebra

Grid = tuple[tuple[WeilElement, ...], ...]

_HEIS_COORDS = ((0, 1), (1, 2), (0, 2))


@dataclass(frozen=True)
class MatrixGroup:
    """``kind`` is ``"GL"`` (any ``n``) or ``"Heisenberg"`` (``n = 3``)."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in ("GL", "Heisenberg"):
            raise ValueError(f"unknown matrix group {self.kind!r}")
        if self.kind == "Heisenberg" and self.n != 3:
            raise ValueError("the Heisenberg group here is 3x3")
        if self.n < 1:
            raise ValueError("matrix size must be positive")

    @property
    def name(self) -> str:
        return f"gl{self.n}" if self.kind == "GL" else "heisenberg"

    @property
    def dim(self) -> int:
        return self.n * self.n if self.kind == "GL" else 3

    def coords(self) -> list[tuple[int, int]]:
        if self.kind == "GL":
            return [(i, j) for i in range(self.n) for j in range(self.n)]
        return list(_HEIS_COORDS)

    def identity(self, alg: Algebra) -> "MatrixElement":
        return MatrixElement(self, _identity_grid(alg, self.n))

    def from_chart(self, v: Vec) -> "MatrixElement":
        """The group element with chart coordinates ``v``."""
        return MatrixElement(self, self._grid(v, diagonal=1))

    def displacement(self, v: Vec) -> Grid:
        """The matrix of a chart difference ``v`` (zero unit diagonal for Heisenberg)."""
        return self._grid(v, diagonal=0)

    def _grid(self, v: Vec, diagonal) -> Grid:
        if len(v) != self.dim:
            raise ValueError(f"{self.name} chart vectors have dimension {self.dim}")
        alg = v.alg
        if self.kind == "GL":
            n = self.n
            return tuple(tuple(v[i * n + j] for j in range(n)) for i in range(n))
        rows = [[alg.const(diagonal if i == j else 0) for j in range(3)] for i in range(3)]
        for (i, j), x in zip(_HEIS_COORDS, v):
            rows[i][j] = x
        return tuple(tuple(r) for r in rows)

    def to_chart(self, X) -> Vec:
        rows = X.rows if isinstance(X, MatrixElement) else X
        return Vec(rows[i][j] for i, j in self.coords())

    def chart_identity(self, alg: Algebra) -> Vec:
        return self.to_chart(self.identity(alg))


GL2 = MatrixGroup("GL", 2)
GL3 = MatrixGroup("GL", 3)
HEISENBERG = MatrixGroup("Heisenberg", 3)
GROUPS = {"gl2": GL2, "gl3": GL3, "heisenberg": HEISENBERG}


def group_by_name(name: str) -> MatrixGroup:
    try:
        return GROUPS[name]
    except KeyError:
        raise ValueError(f"unknown group {name!r}; choose from {sorted(GROUPS)}") from None


@dataclass(frozen=True)
class MatrixElement:
    group: MatrixGroup
    rows: Grid

    def __post_init__(self):
        n = self.group.n
        if len(self.rows) != n or any(len(r) != n for r in self.rows):
            raise ValueError(f"expected a {n}x{n} matrix")
        const = _constant(self.rows)
        if self.group.kind == "Heisenberg":
            for i in range(3):
                if self.rows[i][i] != 1:
                    raise ValueError("Heisenberg elements have unit diagonal")
                for j in range(i):
                    if not self.rows[i][j].is_zero():
                        raise ValueError("Heisenberg elements are upper triangular")
        elif _rational_inverse(const) is None:
            raise NotAUnit("constant part of the matrix is singular")

    @property
    def alg(self) -> Algebra:
        return self.rows[0][0].alg

    def __mul__(self, other: "MatrixElement") -> "MatrixElement":
        return mat_mul(self, other)

    def chart(self) -> Vec:
        return self.group.to_chart(self)


# -- matrix arithmetic --------------------------------------------------------------


def _identity_grid(alg: Algebra, n: int) -> Grid:
    return tuple(tuple(alg.const(int(i == j)) for j in range(n)) for i in range(n))


def _constant(rows: Grid) -> list[list[Rational]]:
    return [[x.constant for x in r] for r in rows]


def _rational_inverse(C: Sequence[Sequence]) -> list[list[Rational]] | None:
    """Gauss-Jordan over the rationals; None when singular."""
    n = len(C)
    M = [[Rational(x) for x in row] + [Rational(int(i == j)) for j in range(n)] for i, row in enumerate(C)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col]), None)
        if pivot is None:
            return None
        M[col], M[pivot] = M[pivot], M[col]
        p = M[col][col]
        M[col] = [x / p for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def grid_mul(A: Grid, B: Grid) -> Grid:
    n, m, p = len(A), len(B), len(B[0])
    alg = A[0][0].alg
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = alg.zero
            for k in range(m):
                if not A[i][k].is_zero() and not B[k][j].is_zero():
                    acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def grid_add(A: Grid, B: Grid, b=1) -> Grid:
    return tuple(tuple(x + y * b for x, y in zip(ra, rb)) for ra, rb in zip(A, B))


def grid_inv(A: Grid) -> Grid:
    """``(I + N)^-1 C^-1`` for ``A = C (I + N)``, the first factor a truncated Neumann series."""
    alg = A[0][0].alg
    n = len(A)
    Cinv = _rational_inverse(_constant(A))
    if Cinv is None:
        raise NotAUnit("constant part of the matrix is singular")
    Cw = tuple(tuple(alg.const(x) for x in r) for r in Cinv)
    ident = _identity_grid(alg, n)
    N = grid_add(grid_mul(Cw, A), ident, -1)  # nilpotent entries
    total, term = ident, ident
    for _ in range(1, alg.cap):
        term = grid_mul(term, N)
        term = tuple(tuple(-x for x in r) for r in term)
        total = grid_add(total, term)
    return grid_mul(total, Cw)


def mat_mul(A: MatrixElement, B: MatrixElement) -> MatrixElement:
    if A.group != B.group:
        raise ValueError("elements of different groups")
    return MatrixElement(A.group, grid_mul(A.rows, B.rows))


def mat_inv(A: MatrixElement) -> MatrixElement:
    return MatrixElement(A.group, grid_inv(A.rows))


def rational_commutator(X: Sequence[Sequence], Y: Sequence[Sequence]) -> list[list[Rational]]:
    """``XY - YX`` for rational matrices."""
    n = len(X)
    XY = [[sum((Rational(X[i][k]) * Y[k][j] for k in range(n)), Rational(0)) for j in range(n)] for i in range(n)]
    YX = [[sum((Rational(Y[i][k]) * X[k][j] for k in range(n)), Rational(0)) for j in range(n)] for i in range(n)]
    return [[XY[i][j] - YX[i][j] for j in range(n)] for i in range(n)]


# -- canonical connections ----------------------------------------------------------------


class CanonicalConnection(ConnectionSymbol):
    """``Gamma_P[q, r] = q P^-1 r`` (left), ``r P^-1 q`` (right) or their average."""

    SIDES = ("left", "right", "symmetrized")

    def __init__(self, group: MatrixGroup, side: str = "left"):
        if side not in self.SIDES:
            raise ValueError(f"side must be one of {self.SIDES}")
        self.group = group
        self.side = side
        self.dim = group.dim
        self._symmetric = True if side == "symmetrized" else None

    def __call__(self, P: Vec, u: Vec, v: Vec) -> Vec:
        g = self.group
        Pinv = grid_inv(g._grid(P, diagonal=1))
        U, V = g.displacement(u), g.displacement(v)
        if self.side == "left":
            return g.to_chart(grid_mul(grid_mul(U, Pinv), V))
        if self.side == "right":
            return g.to_chart(grid_mul(grid_mul(V, Pinv), U))
        left = g.to_chart(grid_mul(grid_mul(U, Pinv), V))
        right = g.to_chart(grid_mul(grid_mul(V, Pinv), U))
        return (left + right) * Rational(1, 2)

    def tensor(self, P: Vec) -> Tensor:
        alg = P.alg
        n = self.dim
        basis = [alg.vec([int(i == j) for i in range(n)]) for j in range(n)]
        cols = [[self(P, basis[j], basis[k]) for k in range(n)] for j in range(n)]
        return tuple(tuple(tuple(cols[j][k][i] for k in range(n)) for j in range(n)) for i in range(n))

    def symmetrized(self):
        return CanonicalConnection(self.group, "symmetrized")

    def conjugated(self):
        if self.side == "symmetrized":
            return self
        return CanonicalConnection(self.group, "right" if self.side == "left" else "left")


def canonical_lambda(conn: CanonicalConnection, P: MatrixElement, Q: MatrixElement, R: MatrixElement) -> MatrixElement:
    """``Q P^-1 R``, ``R P^-1 Q``, or their i-affine midpoint."""
    Pi = mat_inv(P)
    if conn.side == "left":
        return Q * Pi * R
    if conn.side == "right":
        return R * Pi * Q
    g = conn.group
    left, right = g.to_chart(Q * Pi * R), g.to_chart(R * Pi * Q)
    mid = iaffine_combination(conn, P.chart(), [Rational(1, 2), Rational(1, 2)], [left, right], strict=False)
    return g.from_chart(mid)


def extract_connection_symbol(conn: CanonicalConnection, at: MatrixElement) -> PolynomialConnection:
    """Read ``Gamma`` at a rational point off the binary map ``(q, r) -> lambda(P, P+q, P+r) - P``.

    Returned as a constant symbol (valid at ``at``).
    """
    g = conn.group
    p = at.chart()
    if any(not x.is_constant() for x in p):
        raise ValueError("extraction needs a rational point")
    pc = p.constant

    def m(q: Vec, r: Vec) -> Vec:
        P = g.from_chart(q.alg.vec(pc))
        Q = g.from_chart(P.chart() + q)
        R = g.from_chart(P.chart() + r)
        return canonical_lambda(conn, P, Q, R).chart() - P.chart()

    rep = extract_binary_quadratic(PolyMap(g.dim, g.dim, m, arity=2))
    n = g.dim
    ident = tuple(tuple(Rational(int(i == j)) for j in range(n)) for i in range(n))
    if any(rep.a0) or rep.A1 != ident or rep.B1 != ident or not is_zero_tensor(rep.A2) or not is_zero_tensor(rep.B2):
        raise ExtractionError("lambda is not of the form Q + R - P + Gamma_P[Q - P, R - P]")
    coeffs = {
        (i, j, k, (0,) * n): c
        for i, Ti in enumerate(rep.C2)
        for j, Tj in enumerate(Ti)
        for k, c in enumerate(Tj)
        if c
    }
    return PolynomialConnection(n, coeffs, 0)


def tangent_bracket(group: MatrixGroup, t1: TangentVector, t2: TangentVector) -> TangentVector:
    """Bracket read off ``t1(d1) t2(d2) (t2(d2) t1(d1))^-1 = e + d1 d2 [v1, v2]``."""
    n = group.dim
    alg = make_algebra(2, 3, [(0, 0), (1, 1)])
    d1, d2 = alg.gen(0), alg.gen(1)
    e = group.chart_identity(alg)
    v1 = alg.vec(t1.principal.constant)
    v2 = alg.vec(t2.principal.constant)
    if t1.base.constant != e.constant or t2.base.constant != e.constant:
        raise ValueError("tangent_bracket needs tangent vectors at the identity")
    X = group.from_chart(e + v1 * d1)
    Y = group.from_chart(e + v2 * d2)
    C = (X * Y) * mat_inv(Y * X)
    c = C.chart()
    principal = [x.coeff((1, 1)) for x in c]
    base = make_algebra(1).vec(e.constant)
    return TangentVector(base, base.alg.vec(principal))


def tangent_at_identity(group: MatrixGroup, principal: Sequence) -> TangentVector:
    alg = make_algebra(1)
    return TangentVector(group.chart_identity(alg), alg.vec(principal))


def left_monad_group(group: MatrixGroup, *, strict: bool = True):
    """The monad group at ``e`` built from the extracted left-connection symbol."""
    from .igroup import MonadGroup

    alg = make_algebra(1)
    e = group.identity(alg)
    return MonadGroup(extract_connection_symbol(CanonicalConnection(group, "left"), e), e.chart(), strict=strict)


# -- nil-square failure of the neighbourhood axiom -----------------------------------------


def nil_square_failure_witness(group: MatrixGroup = GL3):
    """``(P, Q, R)`` with ``<e, P, Q, R>`` nil-square but ``<PQ, R>`` not nil-square.

    Built on a cap-4 skew grid (three blocks, one slot per chart coordinate), so
    all displacements are pairwise nil-square while triple products survive.
    """
    n = group.dim
    skew = [(b, s) for b in range(3) for s in range(n)]
    alg = make_algebra(3 * n, 4, skew=skew)
    e = group.chart_identity(alg)
    pts = [group.from_chart(e + Vec(alg.gen(b * n + s) for s in range(n))) for b in range(3)]
    return tuple(pts)
