import random

import pytest
from gmpy2 import mpc, mpfr

from martylab.hermite import (
    HermiteData,
    SingularSystemError,
    hermite_interpolate,
    hermite_oracle,
    solve_linear,
)
from martylab.poly import Poly, poly_eval

TOL = mpfr("1e-9")


def residuals_ok(q: Poly, data: HermiteData) -> bool:
    for z, row in zip(data.nodes, data.values):
        d = q
        for v in row:
            if abs(poly_eval(d, z) - v) > TOL * (1 + abs(v)):
                return False
            d = d.derivative()
    return True


def coefficients_agree(a: Poly, b: Poly) -> bool:
    n = max(len(a.coeffs), len(b.coeffs))
    ca = a.coeffs + (mpc(0),) * (n - len(a.coeffs))
    cb = b.coeffs + (mpc(0),) * (n - len(b.coeffs))
    return all(abs(u - v) <= TOL * max(abs(u), abs(v)) for u, v in zip(ca, cb))


def random_data(rng, total):
    nodes, values = [], []
    left = total
    while left:
        m = min(rng.randint(1, 4), left)
        nodes.append(mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)))
        values.append([mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(m)])
        left -= m
    return HermiteData(tuple(nodes), tuple(values))


def test_single_value():
    v = mpc(2, -3)
    data = HermiteData((mpc(0),), ((v,),))
    assert hermite_interpolate(data) == Poly((v,))
    assert hermite_oracle(data) == Poly((v,))


def test_value_and_slope_at_origin():
    data = HermiteData((mpc(0),), ((mpc(0), mpc(1)),))
    assert hermite_interpolate(data) == Poly((0, 1))
    assert hermite_oracle(data) == Poly((0, 1))


def test_two_nodes_with_slopes():
    # hand solve: q = a + bz + cz^2 + dz^3 gives q = (z^3 - z) / 2
    data = HermiteData((mpc(1), mpc(-1)), ((mpc(0), mpc(1)), (mpc(0), mpc(1))))
    expected = Poly((0, mpfr("-0.5"), 0, mpfr("0.5")))
    for q in (hermite_interpolate(data), hermite_oracle(data)):
        assert coefficients_agree(q, expected)
        assert residuals_ok(q, data)


def test_degree_bound_and_agreement_on_random_data():
    rng = random.Random(21)
    for total in (1, 2, 5, 12, 25, 40):
        data = random_data(rng, total)
        a, b = hermite_interpolate(data), hermite_oracle(data)
        assert a.degree <= total - 1
        assert b.degree <= total - 1
        assert coefficients_agree(a, b)
        assert residuals_ok(a, data)
        assert residuals_ok(b, data)


def test_invalid_data():
    with pytest.raises(ValueError):
        HermiteData((), ())
    with pytest.raises(ValueError):
        HermiteData((mpc(1), mpc(1)), ((mpc(0),), (mpc(1),)))
    with pytest.raises(ValueError):
        HermiteData((mpc(1),), ((),))
    with pytest.raises(ValueError):
        HermiteData((mpc(1),), ((mpc(0),), (mpc(0),)))


def test_json_round_trip():
    data = random_data(random.Random(2), 7)
    assert HermiteData.from_json(data.to_json()) == data


def test_singular_system_detected():
    with pytest.raises(SingularSystemError):
        solve_linear([[mpc(1), mpc(2)], [mpc(2), mpc(4)]], [mpc(1), mpc(2)])
