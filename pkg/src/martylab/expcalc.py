"""Derivatives of exp-products ``h = g * exp(p)`` with polynomial ``g, p``.

Every derivative factors as ``h^(k) = exp(p) * B_k`` with a polynomial
bracket ``B_k``. Two independent routes compute it:

* :func:`bracket_direct` iterates ``B_{k+1} = B_k' + p' B_k``;
* :func:`bracket_lemma` assembles
  ``k g' p^(k-1) + g phi_k(p', ..) + psi_k(g', .., p', ..) + g p^(k)``
  from the universal integer polynomials ``phi_k``, ``psi_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from martylab.numerics import LogComplex, NEG_INF, log_abs
from martylab.poly import MultiPoly, Poly, mp_eval, mp_partial, poly_eval, poly_eval_checked


def x(i: int) -> str:
    return f"x{i}"


def y(i: int) -> str:
    return f"y{i}"


def phi_variables(k: int) -> tuple[str, ...]:
    return tuple(x(i) for i in range(1, k))


def psi_variables(k: int) -> tuple[str, ...]:
    return tuple(y(i) for i in range(1, k + 1)) + tuple(x(i) for i in range(1, k - 1))


@dataclass(frozen=True)
class ExpProduct:
    g: Poly
    p: Poly


@dataclass(frozen=True)
class PhiPsiRegistry:
    k_max: int
    phi: dict[int, MultiPoly] = field(repr=False)
    psi: dict[int, MultiPoly] = field(repr=False)

    def to_json(self) -> dict:
        return {
            "k_max": self.k_max,
            "phi": {str(k): self.phi[k].to_json() for k in sorted(self.phi)},
            "psi": {str(k): self.psi[k].to_json() for k in sorted(self.psi)},
        }


def build_registry(k_max: int) -> PhiPsiRegistry:
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    X = {i: MultiPoly.var(x(i)) for i in range(1, k_max + 1)}
    Y = {i: MultiPoly.var(y(i)) for i in range(1, k_max + 1)}
    phi = {2: (X[1] * X[1]).with_variables(phi_variables(2))}
    psi = {2: Y[2].with_variables(psi_variables(2))}
    for k in range(2, k_max):
        f, s = phi[k], psi[k]
        nxt = X[1] * f + X[1] * X[k]
        for m in range(1, k):
            nxt = nxt + mp_partial(f, x(m)) * X[m + 1]
        phi[k + 1] = nxt.with_variables(phi_variables(k + 1))

        nxt = Y[2] * X[k - 1] * k + Y[1] * f + Y[1] * X[1] * X[k - 1] * k + X[1] * s
        for m in range(1, k + 1):
            nxt = nxt + mp_partial(s, y(m)) * Y[m + 1]
        for m in range(1, k - 1):
            nxt = nxt + mp_partial(s, x(m)) * X[m + 1]
        psi[k + 1] = nxt.with_variables(psi_variables(k + 1))
    return PhiPsiRegistry(k_max, phi, psi)


def bracket_direct(h: ExpProduct, k: int) -> Poly:
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    dp = h.p.derivative()
    b = h.g
    for _ in range(k):
        b = b.derivative() + dp * b
    return b


def derivative_table(poly: Poly, order: int) -> list[Poly]:
    """``[poly, poly', ..., poly^(order)]``."""
    out = [poly]
    for _ in range(order):
        out.append(out[-1].derivative())
    return out


def bracket_lemma(h: ExpProduct, k: int, reg: PhiPsiRegistry) -> Poly:
    if not 2 <= k <= reg.k_max:
        raise ValueError(f"k={k} outside 2..{reg.k_max}")
    g = derivative_table(h.g, k)
    p = derivative_table(h.p, k)
    xs = {x(i): p[i] for i in range(1, k)}
    ys = {y(i): g[i] for i in range(1, k + 1)}
    phi_val = mp_eval(reg.phi[k], xs, zero=Poly.zero())
    psi_val = mp_eval(reg.psi[k], {**ys, **xs}, zero=Poly.zero())
    return g[1] * p[k - 1] * k + g[0] * phi_val + psi_val + g[0] * p[k]


def log_eval_deriv(h: ExpProduct, k: int, z, log_scale=0, bracket: Poly | None = None) -> LogComplex:
    """``exp(log_scale) * h^(k)(z)`` in log-polar form.

    ``bracket`` may pass a precomputed ``B_k`` to skip rebuilding it.
    """
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    b = bracket_direct(h, k) if bracket is None else bracket
    value, is_zero = poly_eval_checked(b, z)
    if is_zero:
        return LogComplex.zero()
    pz = poly_eval(h.p, z)
    if pz == 0:
        re_p, im_p = mpfr(0), mpfr(0)
    else:
        re_p, im_p = gmpy2.mpc(pz).real, gmpy2.mpc(pz).imag
    return LogComplex(mpfr(log_scale) + re_p + log_abs(value), im_p + gmpy2.phase(gmpy2.mpc(value)))


def log_abs_deriv(h: ExpProduct, z, log_scale=0, bracket: Poly | None = None) -> mpfr:
    """``log |exp(log_scale) h^(k)(z)|`` only (no phase)."""
    value, is_zero = poly_eval_checked(h.g if bracket is None else bracket, z)
    if is_zero:
        return NEG_INF
    pz = gmpy2.mpc(poly_eval(h.p, z))
    return mpfr(log_scale) + pz.real + log_abs(value)
