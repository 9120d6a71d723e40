"""Confluent Hermite interpolation over complex nodes."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Sequence

from gmpy2 import mpc, mpfr

from martylab.numerics import complex_from_json, complex_to_json, get_precision
from martylab.poly import Poly, taylor_factor


class SingularSystemError(ArithmeticError):
    """The confluent Vandermonde system is singular at working precision."""


@dataclass(frozen=True)
class HermiteData:
    """Prescribed derivatives ``values[i][j] = q^(j)(nodes[i])``."""

    nodes: tuple
    values: tuple

    def __post_init__(self) -> None:
        nodes = tuple(mpc(z) for z in self.nodes)
        values = tuple(tuple(mpc(v) for v in row) for row in self.values)
        if not nodes:
            raise ValueError("no interpolation nodes")
        if len(values) != len(nodes):
            raise ValueError("one value list per node is required")
        if any(not row for row in values):
            raise ValueError("every node needs at least the order-0 value")
        min_sep = mpfr(2) ** (-(get_precision() // 2))
        for i in range(len(nodes)):
            for j in range(i):
                if abs(nodes[i] - nodes[j]) <= min_sep:
                    raise ValueError(f"duplicate nodes {j} and {i}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @property
    def total_conditions(self) -> int:
        return sum(len(row) for row in self.values)

    def to_json(self) -> dict:
        return {
            "nodes": [complex_to_json(z) for z in self.nodes],
            "values": [[complex_to_json(v) for v in row] for row in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> HermiteData:
        return cls(
            tuple(complex_from_json(z) for z in data["nodes"]),
            tuple(tuple(complex_from_json(v) for v in row) for row in data["values"]),
        )


def hermite_interpolate(data: HermiteData) -> Poly:
    """Newton form with confluent divided differences, expanded to monomials."""
    xs: list[mpc] = []
    owner: list[int] = []
    for i, (z, row) in enumerate(zip(data.nodes, data.values)):
        xs.extend([z] * len(row))
        owner.extend([i] * len(row))
    m = len(xs)

    # column holds f[x_i .. x_{i+order}] in place, one order at a time
    column = [data.values[owner[i]][0] for i in range(m)]
    newton = [column[0]]
    for order in range(1, m):
        for i in range(m - order):
            if owner[i] == owner[i + order]:
                column[i] = data.values[owner[i]][order] / factorial(order)
            else:
                column[i] = (column[i + 1] - column[i]) / (xs[i + order] - xs[i])
        newton.append(column[0])

    # expand c_0 + (z-x_0)(c_1 + (z-x_1)(c_2 + ...))
    coeffs = [newton[-1]]
    for k in range(m - 2, -1, -1):
        shifted = [mpc(0)] + coeffs
        for i, c in enumerate(coeffs):
            shifted[i] -= xs[k] * c
        shifted[0] += newton[k]
        coeffs = shifted
    return Poly(coeffs)


def confluent_vandermonde(data: HermiteData) -> tuple[list[list[mpc]], list[mpc]]:
    rows, rhs = [], []
    m = data.total_conditions
    for z, row in zip(data.nodes, data.values):
        for j, v in enumerate(row):
            rows.append([taylor_factor(i, j) * z ** (i - j) if i >= j else mpc(0) for i in range(m)])
            rhs.append(v)
    return rows, rhs


def solve_linear(a: Sequence[Sequence[mpc]], b: Sequence[mpc]) -> list[mpc]:
    """Gaussian elimination with partial pivoting."""
    n = len(b)
    a = [list(map(mpc, row)) for row in a]
    b = list(map(mpc, b))
    scale = max((abs(v) for row in a for v in row), default=mpfr(0))
    tiny = scale * mpfr(2) ** (-(get_precision() // 2))
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
        if abs(a[pivot][col]) <= tiny:
            raise SingularSystemError(f"pivot {col} vanishes at working precision")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            b[col], b[pivot] = b[pivot], b[col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] * inv
            if factor == 0:
                continue
            row_r, row_c = a[r], a[col]
            for c in range(col, n):
                row_r[c] -= factor * row_c[c]
            b[r] -= factor * b[col]
    out = [mpc(0)] * n
    for r in range(n - 1, -1, -1):
        acc = b[r]
        for c in range(r + 1, n):
            acc -= a[r][c] * out[c]
        out[r] = acc / a[r][r]
    return out


def hermite_oracle(data: HermiteData) -> Poly:
    """Solve the confluent Vandermonde system in the monomial basis."""
    rows, rhs = confluent_vandermonde(data)
    return Poly(solve_linear(rows, rhs))
