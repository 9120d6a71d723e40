"""Deterministic 1-D maximization: grid scan plus golden-section refinement."""

from __future__ import annotations

from typing import Callable, Sequence

import gmpy2
from gmpy2 import mpc, mpfr

from martylab.numerics import pi

GOLDEN_ITERATIONS = 60


def golden_section_max(f: Callable[[mpfr], mpfr], lo, hi,
                       iterations: int = GOLDEN_ITERATIONS) -> tuple[mpfr, mpfr]:
    """Best ``(x, f(x))`` seen while golden-section shrinking ``[lo, hi]``.

    Endpoints are evaluated too, so the result is never worse than them.
    """
    inv_phi = (gmpy2.sqrt(mpfr(5)) - 1) / 2
    a, b = mpfr(lo), mpfr(hi)
    best = max(((a, f(a)), (b, f(b))), key=lambda t: t[1])
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iterations):
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = f(x2)
    for cand in ((x1, f1), (x2, f2)):
        if cand[1] > best[1]:
            best = cand
    return best


def refine_grid_max(f: Callable[[mpfr], mpfr], xs: Sequence[mpfr], values: Sequence[mpfr],
                    top: int, periodic: bool = False) -> tuple[mpfr, mpfr]:
    """Refine the ``top`` best grid samples over their neighbouring cells."""
    n = len(xs)
    order = sorted(range(n), key=lambda i: (values[i], -i), reverse=True)[:top]
    best = (xs[order[0]], values[order[0]])
    for i in order:
        if periodic:
            step = xs[1] - xs[0]
            lo, hi = xs[i] - step, xs[i] + step
        else:
            lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
        if lo == hi:
            continue
        cand = golden_section_max(f, lo, hi)
        if cand[1] > best[1]:
            best = cand
    return best


def circle_point(center, radius, theta) -> mpc:
    return mpc(center) + radius * mpc(gmpy2.cos(theta), gmpy2.sin(theta))


def circle_angles(samples: int) -> list[mpfr]:
    two_pi = 2 * pi()
    return [two_pi * j / samples for j in range(samples)]


def circle_max(f: Callable[[mpc], mpfr], center, radius, samples: int = 4096,
               top: int = 8) -> tuple[mpc, mpfr]:
    """Max of a real function of ``z`` over a circle; returns ``(argmax, max)``."""
    radius = mpfr(radius)
    if radius == 0:
        z = mpc(center)
        return z, f(z)

    def on_circle(theta):
        return f(circle_point(center, radius, theta))

    thetas = circle_angles(samples)
    values = [on_circle(t) for t in thetas]
    theta, value = refine_grid_max(on_circle, thetas, values, top, periodic=True)
    return circle_point(center, radius, theta), value


def circle_min(f: Callable[[mpc], mpfr], center, radius, samples: int = 4096,
               top: int = 8) -> tuple[mpc, mpfr]:
    z, value = circle_max(lambda w: -f(w), center, radius, samples, top)
    return z, -value
