"""Dense univariate polynomials and sparse integer multivariate polynomials.

:class:`Poly` coefficients may be Python ints (exact) or gmpy2 ``mpc``
values; arithmetic keeps ints exact, which is what the bracket identity
tests rely on. :class:`MultiPoly` always has integer coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Any, Iterable, Mapping, Sequence

import gmpy2
from gmpy2 import mpc, mpfr

from martylab.numerics import complex_from_json, complex_to_json, pi, unit_roundoff


def _trim(coeffs: Sequence) -> tuple:
    end = len(coeffs)
    while end and coeffs[end - 1] == 0:
        end -= 1
    return tuple(coeffs[:end])


@dataclass(frozen=True)
class Poly:
    """Polynomial with ``coeffs[i]`` the coefficient of ``z**i``."""

    coeffs: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _trim(tuple(self.coeffs)))

    @classmethod
    def zero(cls) -> Poly:
        return cls(())

    @classmethod
    def constant(cls, c) -> Poly:
        return cls((c,))

    @classmethod
    def monomial(cls, degree: int, c=1) -> Poly:
        return cls((0,) * degree + (c,))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, z):
        return poly_eval(self, z)

    def __add__(self, other) -> Poly:
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly(tuple(x + y for x, y in zip(a, b)) + a[len(b):])

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> Poly:
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> Poly:
        return (-self) + other

    def __mul__(self, other) -> Poly:
        if not isinstance(other, Poly):
            if isinstance(other, (int, mpfr, mpc)):
                return Poly(tuple(c * other for c in self.coeffs))
            return NotImplemented
        if self.is_zero or other.is_zero:
            return Poly.zero()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> Poly:
        result = Poly.constant(1)
        for _ in range(e):
            result = result * self
        return result

    def derivative(self, order: int = 1) -> Poly:
        p = self
        for _ in range(order):
            p = poly_derivative(p)
        return p

    def to_json(self) -> list[list[str]]:
        return [complex_to_json(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Iterable) -> Poly:
        return cls(tuple(complex_from_json(pair) for pair in data))

    def __repr__(self) -> str:
        if self.is_zero:
            return "Poly(0)"
        terms = [f"({c})*z^{i}" for i, c in enumerate(self.coeffs) if c != 0]
        return "Poly(" + " + ".join(terms) + ")"


def _as_poly(x):
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, mpfr, mpc)):
        return Poly.constant(x)
    return NotImplemented


def poly_eval(p: Poly, z):
    """Horner evaluation."""
    acc = 0
    for c in reversed(p.coeffs):
        acc = acc * z + c
    return acc


def poly_eval_checked(p: Poly, z) -> tuple[Any, bool]:
    """Evaluate and report whether the value is zero to working precision.

    The value counts as zero when it lies below a running rounding-error
    bound for Horner's rule, ``8 (deg + 1) u sum |c_i| |z|^i``. Exact zeros
    such as ``z**n - 1`` at an n-th root of unity land here.
    """
    value = poly_eval(p, z)
    if value == 0:
        return value, True
    az = abs(z)
    scale = mpfr(0)
    for c in reversed(p.coeffs):
        scale = scale * az + abs(c)
    bound = 8 * (p.degree + 1) * unit_roundoff() * scale
    return value, abs(value) <= bound


def poly_derivative(p: Poly) -> Poly:
    return Poly(tuple(i * c for i, c in enumerate(p.coeffs) if i > 0))


def poly_antiderivative(p: Poly, constant=0) -> Poly:
    """Antiderivative with value ``constant`` at 0."""
    return Poly((constant,) + tuple(_divide(c, i + 1) for i, c in enumerate(p.coeffs)))


def _divide(c, d: int):
    if isinstance(c, int) and c % d == 0:
        return c // d
    return c / mpfr(d)


def roots_of_unity(n: int) -> list[mpc]:
    """``exp(2 pi i l / n)`` for ``l = 0..n-1``.

    Quarter turns are returned exactly (1, i, -1, -i).
    """
    if n < 1:
        raise ValueError("n must be positive")
    exact = {0: mpc(1, 0), 1: mpc(0, 1), 2: mpc(-1, 0), 3: mpc(0, -1)}
    out = []
    for ell in range(n):
        if (4 * ell) % n == 0:
            out.append(exact[4 * ell // n])
        else:
            theta = 2 * pi() * ell / n
            out.append(mpc(gmpy2.cos(theta), gmpy2.sin(theta)))
    return out


def taylor_factor(i: int, j: int) -> int:
    """``d^j/dz^j z^i = taylor_factor(i, j) * z^(i-j)``."""
    return factorial(i) // factorial(i - j) if i >= j else 0


# -- multivariate -----------------------------------------------------------

Monomial = tuple  # sorted tuple of (variable, power) pairs, powers > 0


class UnknownVariableError(KeyError):
    """A variable outside a polynomial's declared variable set was used."""


def _var_sort_key(name: str) -> tuple[str, int]:
    return (name[0], int(name[1:])) if name[1:].isdigit() else (name, 0)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    powers = dict(a)
    for v, e in b:
        powers[v] = powers.get(v, 0) + e
    return tuple(sorted(powers.items(), key=lambda t: _var_sort_key(t[0])))


@dataclass(frozen=True)
class MultiPoly:
    """Sparse polynomial with integer coefficients over named variables."""

    variables: tuple[str, ...]
    terms: Mapping[Monomial, int]

    def __post_init__(self) -> None:
        variables = tuple(sorted(set(self.variables), key=_var_sort_key))
        terms = {}
        for mono, c in self.terms.items():
            if c == 0:
                continue
            for v, e in mono:
                if v not in variables:
                    raise UnknownVariableError(v)
            terms[mono] = int(c)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "terms", terms)

    @classmethod
    def var(cls, name: str) -> MultiPoly:
        return cls((name,), {((name, 1),): 1})

    @classmethod
    def constant(cls, c: int, variables: Iterable[str] = ()) -> MultiPoly:
        return cls(tuple(variables), {(): c})

    def with_variables(self, variables: Iterable[str]) -> MultiPoly:
        """Re-declare the variable set (must cover every variable in use)."""
        return MultiPoly(tuple(variables), self.terms)

    def used_variables(self) -> set[str]:
        return {v for mono in self.terms for v, _ in mono}

    def __add__(self, other) -> MultiPoly:
        if isinstance(other, int):
            other = MultiPoly.constant(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            terms[mono] = terms.get(mono, 0) + c
        return MultiPoly(self.variables + other.variables, terms)

    __radd__ = __add__

    def __mul__(self, other) -> MultiPoly:
        if isinstance(other, int):
            return MultiPoly(self.variables, {m: c * other for m, c in self.terms.items()})
        terms: dict[Monomial, int] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                mono = _mono_mul(ma, mb)
                terms[mono] = terms.get(mono, 0) + ca * cb
        return MultiPoly(self.variables + other.variables, terms)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def partial(self, var: str) -> MultiPoly:
        return mp_partial(self, var)

    def sorted_terms(self) -> list[tuple[Monomial, int]]:
        def key(item):
            mono, _ = item
            degree = sum(e for _, e in mono)
            return (-degree, [(_var_sort_key(v), -e) for v, e in mono])

        return sorted(self.terms.items(), key=key)

    def to_json(self) -> list[dict[str, Any]]:
        return [{"coeff": c, "exponents": dict(mono)} for mono, c in self.sorted_terms()]

    @classmethod
    def from_json(cls, data: list[dict[str, Any]], variables: Iterable[str] = ()) -> MultiPoly:
        terms = {}
        names = set(variables)
        for item in data:
            mono = tuple(sorted(((v, int(e)) for v, e in item["exponents"].items()),
                                key=lambda t: _var_sort_key(t[0])))
            names.update(v for v, _ in mono)
            terms[mono] = int(item["coeff"])
        return cls(tuple(names), terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            factors = [v if e == 1 else f"{v}^{e}" for v, e in mono]
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append("*".join([str(c)] + factors))
        return " + ".join(parts).replace("+ -", "- ")


def mp_partial(m: MultiPoly, var: str) -> MultiPoly:
    if var not in m.variables:
        raise UnknownVariableError(var)
    terms: dict[Monomial, int] = {}
    for mono, c in m.terms.items():
        powers = dict(mono)
        e = powers.get(var, 0)
        if e == 0:
            continue
        if e == 1:
            del powers[var]
        else:
            powers[var] = e - 1
        new = tuple(sorted(powers.items(), key=lambda t: _var_sort_key(t[0])))
        terms[new] = terms.get(new, 0) + c * e
    return MultiPoly(m.variables, terms)


def mp_eval(m: MultiPoly, assignment: Mapping[str, Any], zero: Any = 0):
    """Substitute values for every variable.

    Values may be scalars or :class:`Poly`; ``zero`` seeds the sum.
    """
    missing = [v for v in m.variables if v not in assignment]
    if missing:
        raise UnknownVariableError(missing[0])
    powers: dict[tuple[str, int], Any] = {}

    def power(v: str, e: int):
        key = (v, e)
        if key not in powers:
            powers[key] = assignment[v] if e == 1 else power(v, e - 1) * assignment[v]
        return powers[key]

    total = zero
    for mono, c in m.sorted_terms():
        term = None
        for v, e in mono:
            f = power(v, e)
            term = f if term is None else term * f
        total = total + (c if term is None else term * c)
    return total

