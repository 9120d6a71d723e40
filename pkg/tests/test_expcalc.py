import random

import gmpy2
import pytest
import sympy as sp
from gmpy2 import mpc, mpfr

from martylab.expcalc import (
    ExpProduct,
    bracket_direct,
    bracket_lemma,
    build_registry,
    log_eval_deriv,
)
from martylab.numerics import get_precision
from martylab.poly import MultiPoly, Poly, poly_eval

REG = build_registry(7)


def leibniz_oracle(k):
    """phi_k, psi_k read off sympy's k-th derivative of g * exp(p)."""
    z = sp.Symbol("z")
    g, p = sp.Function("g")(z), sp.Function("p")(z)
    bracket = sp.expand(sp.diff(g * sp.exp(p), z, k) / sp.exp(p))
    xs = sp.symbols(f"x1:{k + 1}")
    ys = sp.symbols(f"y1:{k + 1}")
    G = sp.Symbol("G")
    subs = {sp.Derivative(g, (z, i)): ys[i - 1] for i in range(k, 0, -1)}
    subs.update({sp.Derivative(p, (z, i)): xs[i - 1] for i in range(k, 0, -1)})
    expr = sp.expand(bracket.subs(subs).subs(g, G))
    phi = sp.expand(expr.coeff(G, 1) - xs[k - 1])
    psi = sp.expand(expr.coeff(G, 0) - k * ys[0] * xs[k - 2])
    return phi, psi


def to_sympy(m: MultiPoly):
    expr = 0
    for mono, c in m.terms.items():
        term = sp.Integer(c)
        for v, e in mono:
            term *= sp.Symbol(v) ** e
        expr += term
    return sp.expand(expr)


def test_base_case():
    assert str(REG.phi[2]) == "x1^2"
    assert str(REG.psi[2]) == "y2"


def test_closed_forms_k3():
    x1, x2, y1, y2, y3 = (MultiPoly.var(v) for v in ("x1", "x2", "y1", "y2", "y3"))
    assert REG.phi[3] == x1 * x1 * x1 + x1 * x2 * 3
    assert REG.psi[3] == y3 + x1 * y2 * 3 + x1 * x1 * y1 * 3


@pytest.mark.parametrize("k", range(2, 7))
def test_registry_matches_leibniz_oracle(k):
    phi, psi = leibniz_oracle(k)
    assert sp.expand(to_sympy(REG.phi[k]) - phi) == 0
    assert sp.expand(to_sympy(REG.psi[k]) - psi) == 0


@pytest.mark.parametrize("k", range(2, 8))
def test_registry_variable_sets(k):
    assert REG.phi[k].used_variables() <= {f"x{i}" for i in range(1, k)}
    allowed = {f"y{i}" for i in range(1, k + 1)} | {f"x{i}" for i in range(1, k - 1)}
    assert REG.psi[k].used_variables() <= allowed


def test_registry_rejects_small_k():
    with pytest.raises(ValueError):
        build_registry(1)


def test_bracket_direct_examples():
    g = Poly((3, 1, 4))
    assert bracket_direct(ExpProduct(g, Poly((0, 5))), 0) == g
    assert bracket_direct(ExpProduct(Poly((0, 1)), Poly.zero()), 2).is_zero
    assert bracket_direct(ExpProduct(Poly((1,)), Poly((0, 1))), 3) == Poly((1,))


def test_bracket_lemma_examples():
    assert bracket_lemma(ExpProduct(Poly((-1, 0, 1)), Poly.zero()), 2, REG) == Poly((2,))
    assert bracket_lemma(ExpProduct(Poly((1,)), Poly((0, 1))), 2, REG) == Poly((1,))
    with pytest.raises(ValueError):
        bracket_lemma(ExpProduct(Poly((1,)), Poly((0, 1))), 8, REG)


def test_recursion_equals_direct_on_random_integer_pairs():
    rng = random.Random(7)
    for _ in range(60):
        g = Poly(tuple(rng.randint(-5, 5) for _ in range(rng.randint(1, 6))))
        p = Poly(tuple(rng.randint(-5, 5) for _ in range(rng.randint(1, 6))))
        h = ExpProduct(g, p)
        for k in range(2, 7):
            assert bracket_lemma(h, k, REG) == bracket_direct(h, k)


def test_log_eval_deriv_examples():
    assert log_eval_deriv(ExpProduct(Poly((-1, 1)), Poly.zero()), 0, mpc(1), 5).is_zero
    big = log_eval_deriv(ExpProduct(Poly((1,)), Poly((0, 1))), 0, mpc(1000), 0)
    assert big.log_mag == 1000
    out = log_eval_deriv(ExpProduct(Poly((-1, 0, 1)), Poly.zero()), 1, mpc(2), gmpy2.log(3))
    assert abs(out.log_mag - gmpy2.log(12)) < mpfr(2) ** -250
    assert out.phase == 0


def random_exp_product(rng):
    g = Poly(tuple(mpc(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(rng.randint(1, 5))))
    p = Poly(tuple(mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(rng.randint(1, 4))))
    return ExpProduct(g, p)


def test_scale_shift():
    rng = random.Random(5)
    for _ in range(50):
        h = random_exp_product(rng)
        z = mpc(rng.uniform(-2, 2), rng.uniform(-2, 2))
        s = mpfr(rng.uniform(-100, 100))
        k = rng.randint(0, 4)
        base, shifted = log_eval_deriv(h, k, z, 0), log_eval_deriv(h, k, z, s)
        if base.is_zero:
            assert shifted.is_zero
            continue
        assert abs(shifted.log_mag - (base.log_mag + s)) <= mpfr(2) ** -240 * (1 + abs(s))
        assert shifted.phase == base.phase


def test_log_eval_matches_direct_value():
    rng = random.Random(6)
    for _ in range(50):
        h = random_exp_product(rng)
        z = mpc(rng.uniform(-2, 2), rng.uniform(-2, 2))
        k = rng.randint(0, 4)
        direct = gmpy2.exp(poly_eval(h.p, z)) * poly_eval(bracket_direct(h, k), z)
        got = log_eval_deriv(h, k, z).to_complex()
        assert abs(got - direct) <= mpfr(2) ** -240 * abs(direct)


def test_bracket_recursion_against_finite_differences():
    """d/dz (exp(p) B_k) = exp(p) B_{k+1}, checked on the real axis."""
    rng = random.Random(8)
    prec = get_precision()
    step = mpfr(2) ** (-prec // 2)
    tol = mpfr(2) ** (-prec // 4)
    for _ in range(40):
        g = Poly(tuple(mpfr(rng.uniform(-2, 2)) for _ in range(rng.randint(1, 5))))
        p = Poly(tuple(mpfr(rng.uniform(-1, 1)) for _ in range(rng.randint(1, 4))))
        h = ExpProduct(g, p)
        t = mpfr(rng.uniform(-1.5, 1.5))
        k = rng.randint(0, 4)
        bk, bk1 = bracket_direct(h, k), bracket_direct(h, k + 1)

        def f(s):
            return gmpy2.exp(poly_eval(p, s)) * poly_eval(bk, s)

        fd = (f(t + step) - f(t - step)) / (2 * step)
        exact = gmpy2.exp(poly_eval(p, t)) * poly_eval(bk1, t)
        assert abs(fd - exact) <= tol * max(abs(exact), mpfr(1))
