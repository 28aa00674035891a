"""Small exact tensors: matrices ``M[i][j]`` and bilinear maps ``T[i][j][k]``.

Entries are rational or ``WeilElement``; ``T[i][j][k]`` is the ``i``-th
output coordinate's coefficient of ``u_j * v_k``.
"""

from __future__ import annotations

import random
from typing import Sequence

from .spaces import DEFAULT_BOUND, random_rational
from .weil import Rational, Vec, WeilElement

Matrix = tuple[tuple, ...]
Tensor = tuple[tuple[tuple, ...], ...]


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, WeilElement) else x == 0


def linear(M: Matrix, v: Vec) -> Vec:
    alg = v.alg
    return Vec(
        sum((row[j] * v[j] for j in range(len(v)) if not _is_zero(row[j])), alg.zero)
        for row in M
    )


def bilinear(T: Tensor, u: Vec, v: Vec) -> Vec:
    alg = u.alg
    n = len(u)
    uv = [[u[j] * v[k] for k in range(n)] for j in range(n)]
    out = []
    for Ti in T:
        acc = alg.zero
        for j in range(n):
            for k in range(n):
                c = Ti[j][k]
                if not _is_zero(c) and not uv[j][k].is_zero():
                    acc = acc + uv[j][k] * c
        out.append(acc)
    return Vec(out)


def swap(T: Tensor) -> Tensor:
    """``T'[u, v] = T[v, u]``."""
    return tuple(tuple(tuple(Ti[k][j] for k in range(len(Ti))) for j in range(len(Ti))) for Ti in T)


def combine(a, T: Tensor, b, S: Tensor) -> Tensor:
    """``a*T + b*S``."""
    return tuple(
        tuple(tuple(a * t + b * s for t, s in zip(Tj, Sj)) for Tj, Sj in zip(Ti, Si))
        for Ti, Si in zip(T, S)
    )


def symmetric_part(T: Tensor) -> Tensor:
    return combine(Rational(1, 2), T, Rational(1, 2), swap(T))


def alternation(T: Tensor) -> Tensor:
    """``T[u, v] - T[v, u]``."""
    return combine(1, T, -1, swap(T))


def is_zero_tensor(T: Tensor) -> bool:
    return all(_is_zero(x) for Ti in T for Tj in Ti for x in Tj)


def is_symmetric(T: Tensor) -> bool:
    return is_zero_tensor(alternation(T))


def zero_tensor(w: int, n: int) -> Tensor:
    return tuple(tuple(tuple(Rational(0) for _ in range(n)) for _ in range(n)) for _ in range(w))


def random_tensor(rng: random.Random, w: int, n: int, bound: int = DEFAULT_BOUND) -> Tensor:
    return tuple(
        tuple(tuple(random_rational(rng, bound) for _ in range(n)) for _ in range(n)) for _ in range(w)
    )


def random_matrix(rng: random.Random, w: int, n: int, bound: int = DEFAULT_BOUND) -> Matrix:
    return tuple(tuple(random_rational(rng, bound) for _ in range(n)) for _ in range(w))


def identity(n: int) -> Matrix:
    return tuple(tuple(Rational(int(i == j)) for j in range(n)) for i in range(n))


def matmul_tensor(n: int) -> Tensor:
    """Matrix product on row-major vectorised n x n matrices: ``T[x, y] = vec(X Y)``."""
    d = n * n
    T = [[[Rational(0)] * d for _ in range(d)] for _ in range(d)]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                T[a * n + b][a * n + c][c * n + b] = Rational(1)
    return tuple(tuple(tuple(row) for row in Ti) for Ti in T)


def to_rational(T) -> Tensor:
    """Constant Weil entries -> rationals (raises if an entry is not constant)."""

    def conv(x):
        if isinstance(x, WeilElement):
            if not x.is_constant():
                raise ValueError(f"entry {x} is not a rational constant")
            return x.constant
        return Rational(x)

    return tuple(tuple(tuple(conv(x) for x in Tj) for Tj in Ti) for Ti in T)


def nonzero_entries(T: Tensor) -> list[tuple[int, int, int, object]]:
    return [
        (i, j, k, x)
        for i, Ti in enumerate(T)
        for j, Tj in enumerate(Ti)
        for k, x in enumerate(Tj)
        if not _is_zero(x)
    ]


def as_tensor(rows: Sequence) -> Tensor:
    return tuple(tuple(tuple(Rational(x) for x in Tj) for Tj in Ti) for Ti in rows)


def scale(c, T: Tensor) -> Tensor:
    return tuple(tuple(tuple(c * x for x in Tj) for Tj in Ti) for Ti in T)
