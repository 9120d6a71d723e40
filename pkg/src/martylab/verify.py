"""Grid verification of Marty-type quotients and non-normality witnesses.

All quotients are returned as natural logs, so ``-inf`` means the numerator
vanished and thresholds are compared as ``log C``.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable, Sequence

import gmpy2
from gmpy2 import mpc, mpfr

from martylab.expcalc import ExpProduct, bracket_direct, log_abs_deriv, log_eval_deriv
from martylab.numerics import (
    NEG_INF,
    LogComplex,
    complex_to_json,
    is_neg_inf,
    lc_softplus_alpha,
    log_abs,
    pi,
    real_to_str,
    softplus,
)
from martylab.poly import poly_eval, poly_eval_checked, roots_of_unity
from martylab.search import circle_angles, circle_point

if TYPE_CHECKING:
    from martylab.construct import ConstructedFamily, FamilyMember

VANISHING_RTOL = mpfr("1e-8")
VANISHING_RADIUS = mpfr("0.1")
VANISHING_SAMPLES = 64
SLOPE_RADII = (mpfr("1e-2"), mpfr("1e-3"), mpfr("1e-4"))
MIN_SLOPE = 1.9
WITNESS_SAMPLES = 1024


# -- evaluators -------------------------------------------------------------

class Evaluator:
    """Holomorphic function handle: ``f(z, j)`` is ``f^(j)(z)`` in log-polar form."""

    label: str = "f"
    domain: str = ""

    def __call__(self, z: mpc, order: int) -> LogComplex:
        raise NotImplementedError

    def log_abs(self, z: mpc, order: int) -> mpfr:
        return self(z, order).log_mag


class FunctionEvaluator(Evaluator):
    """Wrap a plain ``func(z, order) -> complex`` of moderate size."""

    def __init__(self, func: Callable[[mpc, int], object], label: str = "f", domain: str = ""):
        self.func = func
        self.label = label
        self.domain = domain

    def __call__(self, z, order):
        return LogComplex.from_complex(self.func(mpc(z), order))


class ExpProductEvaluator(Evaluator):
    """``exp(log_scale) * g * exp(p)`` with brackets built on first use."""

    def __init__(self, h: ExpProduct, log_scale=0, label: str = "h", domain: str = ""):
        self.h = h
        self.log_scale = mpfr(log_scale)
        self.label = label
        self.domain = domain
        self._brackets: dict[int, object] = {}

    def bracket(self, order: int):
        if order not in self._brackets:
            self._brackets[order] = bracket_direct(self.h, order)
        return self._brackets[order]

    def __call__(self, z, order):
        return log_eval_deriv(self.h, order, mpc(z), self.log_scale, self.bracket(order))

    def log_abs(self, z, order):
        return log_abs_deriv(self.h, mpc(z), self.log_scale, self.bracket(order))


def member_evaluator(member: FamilyMember) -> ExpProductEvaluator:
    return ExpProductEvaluator(member.h, member.log_an, label=f"f_{member.n}",
                               domain="disk |z| < 2")


class ExpDifferenceEvaluator(Evaluator):
    """``n (exp(z) - exp(zeta z))`` with ``zeta = exp(2 pi i / k)``.

    ``f^(j) = n (exp(z) - zeta^j exp(zeta z))``; ``zeta^j`` is taken from
    ``j mod k`` so the identity ``f^(k) = f`` holds exactly.
    """

    def __init__(self, k: int, n: int):
        if k < 2 or n < 1:
            raise ValueError("need k >= 2 and n >= 1")
        self.k, self.n = k, n
        self.powers = roots_of_unity(k)
        self.zeta = self.powers[1 % k]
        self.label = f"exp-difference k={k} n={n}"
        self.domain = "strip -1 < Re((1 - zeta) z) < 1"

    def value(self, z, order: int) -> mpc:
        z = mpc(z)
        return self.n * (gmpy2.exp(z) - self.powers[order % self.k] * gmpy2.exp(self.zeta * z))

    def __call__(self, z, order):
        return LogComplex.from_complex(self.value(z, order))

    def common_zero(self, j: int) -> mpc:
        return 2 * pi() * mpc(0, j) / (1 - self.zeta)


def remark3_family(k: int, n: int) -> ExpDifferenceEvaluator:
    return ExpDifferenceEvaluator(k, n)


# -- quotients --------------------------------------------------------------

def marty_quotient(f: Evaluator, z, k: int, alpha) -> mpfr:
    """``log(|f^(k)(z)| / (1 + |f(z)|^alpha))``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    alpha = mpfr(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    top = f.log_abs(z, k)
    if is_neg_inf(top):
        return NEG_INF
    return top - softplus(alpha * f.log_abs(z, 0))


def spherical_derivative(f: Evaluator, z) -> mpfr:
    """``log(|f'(z)| / (1 + |f(z)|^2))``."""
    top = f.log_abs(z, 1)
    if is_neg_inf(top):
        return NEG_INF
    return top - lc_softplus_alpha(LogComplex(f.log_abs(z, 0), 0), 2)


# -- regions and grids ------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """Closed sampling region, optionally minus an open annulus ``exclusion``."""

    kind: str
    center: mpc = mpc(0)
    radius: mpfr = mpfr(1)
    inner_radius: mpfr = mpfr(0)
    corners: tuple = ()
    direction: mpc = mpc(1)
    half_width: mpfr = mpfr(1)
    exclusion: tuple | None = None
    exclusion_center: mpc = mpc(0)
    description: str = ""

    @classmethod
    def disk(cls, center=0, radius=1, exclusion=None) -> Region:
        return cls("disk", center=mpc(center), radius=mpfr(radius), exclusion=exclusion,
                   description=f"disk |z - {center}| <= {radius}")

    @classmethod
    def annulus(cls, center, inner_radius, radius) -> Region:
        if not inner_radius < radius:
            raise ValueError("empty annulus")
        return cls("annulus", center=mpc(center), radius=mpfr(radius),
                   inner_radius=mpfr(inner_radius))

    @classmethod
    def rectangle(cls, lower_left, upper_right) -> Region:
        ll, ur = mpc(lower_left), mpc(upper_right)
        if not (ll.real < ur.real and ll.imag < ur.imag):
            raise ValueError("empty rectangle")
        return cls("rectangle", corners=(ll, ur))

    @classmethod
    def strip(cls, direction, half_width, radius) -> Region:
        """``|Re(direction * z)| <= half_width`` clipped to ``|z| <= radius``."""
        return cls("strip", direction=mpc(direction), half_width=mpfr(half_width),
                   radius=mpfr(radius))

    def bounding_box(self) -> tuple[mpfr, mpfr, mpfr, mpfr]:
        if self.kind == "rectangle":
            ll, ur = self.corners
            return ll.real, ll.imag, ur.real, ur.imag
        c, r = self.center, self.radius
        return c.real - r, c.imag - r, c.real + r, c.imag + r

    def contains(self, z: mpc) -> bool:
        if self.exclusion is not None:
            r_in, r_out = self.exclusion
            d = abs(z - self.exclusion_center)
            if r_in < d < r_out:
                return False
        if self.kind == "rectangle":
            ll, ur = self.corners
            return ll.real <= z.real <= ur.real and ll.imag <= z.imag <= ur.imag
        d2 = gmpy2.norm(z - self.center)
        if d2 > self.radius ** 2:
            return False
        if self.kind == "disk":
            return True
        if self.kind == "annulus":
            return d2 >= self.inner_radius ** 2
        if self.kind == "strip":
            return abs((self.direction * z).real) <= self.half_width
        raise ValueError(f"unknown region kind {self.kind!r}")


def grid_points(region: Region, resolution: int) -> list[mpc]:
    """Closed ``resolution x resolution`` lattice over the bounding box, clipped."""
    if resolution < 3:
        raise ValueError("resolution must be at least 3")
    x0, y0, x1, y1 = region.bounding_box()
    last = resolution - 1
    xs = [x0 + (x1 - x0) * i / last for i in range(resolution)]
    ys = [y0 + (y1 - y0) * i / last for i in range(resolution)]
    pts = []
    for yv in ys:
        for xv in xs:
            z = mpc(xv, yv)
            if region.contains(z):
                pts.append(z)
    return pts


@dataclass
class GridReport:
    resolution: int
    max_log_quotient: mpfr
    argmax_z: mpc
    threshold_log: mpfr
    passed: bool
    samples_evaluated: int

    @property
    def margin(self) -> mpfr:
        return self.threshold_log - self.max_log_quotient

    def to_json(self) -> dict:
        return {
            "resolution": self.resolution,
            "max_log_quotient": real_to_str(self.max_log_quotient),
            "argmax": complex_to_json(self.argmax_z),
            "threshold_log": real_to_str(self.threshold_log),
            "pass": self.passed,
            "samples_evaluated": self.samples_evaluated,
        }

    @classmethod
    def from_json(cls, data: dict) -> GridReport:
        re, im = data["argmax"]
        return cls(int(data["resolution"]), mpfr(data["max_log_quotient"]),
                   mpc(mpfr(re), mpfr(im)), mpfr(data["threshold_log"]), bool(data["pass"]),
                   int(data["samples_evaluated"]))


def grid_sup_many(f: Evaluator, region: Region, k: int,
                  checks: Sequence[tuple[object, object]], resolution: int) -> list[GridReport]:
    """One sweep, several ``(alpha, threshold_log)`` pairs sharing evaluations."""
    alphas = [mpfr(a) for a, _ in checks]
    best = [NEG_INF] * len(checks)
    where = [None] * len(checks)
    points = grid_points(region, resolution)
    for z in points:
        top = f.log_abs(z, k)
        if is_neg_inf(top):
            continue
        base = f.log_abs(z, 0)
        for i, a in enumerate(alphas):
            val = top - softplus(a * base)
            if val > best[i]:
                best[i], where[i] = val, z
    reports = []
    for i, (_, threshold) in enumerate(checks):
        threshold = mpfr(threshold)
        argmax = where[i] if where[i] is not None else (points[0] if points else region.center)
        reports.append(GridReport(resolution, best[i], argmax, threshold,
                                  bool(best[i] <= threshold), len(points)))
    return reports


def grid_sup(f: Evaluator, region: Region, k: int, alpha, resolution: int,
             threshold_log) -> GridReport:
    return grid_sup_many(f, region, k, [(alpha, threshold_log)], resolution)[0]


# -- construction checks ----------------------------------------------------

@dataclass
class VanishingEntry:
    node: mpc
    order: int
    abs_value: mpfr
    scale: mpfr
    passed: bool


@dataclass
class VanishingReport:
    g_zero_at_nodes: bool
    entries: list[VanishingEntry]
    slopes: list[float]
    min_slope_required: float = MIN_SLOPE
    rtol: mpfr = VANISHING_RTOL

    @property
    def passed(self) -> bool:
        return (self.g_zero_at_nodes and all(e.passed for e in self.entries)
                and all(s >= self.min_slope_required for s in self.slopes))

    @property
    def worst_ratio(self) -> mpfr:
        return max((e.abs_value / e.scale for e in self.entries), default=mpfr(0))

    def summary(self) -> dict:
        return {
            "pass": self.passed,
            "g_zero_at_nodes": self.g_zero_at_nodes,
            "max_relative_residual": real_to_str(self.worst_ratio),
            "rtol": real_to_str(self.rtol),
            "min_slope": min(self.slopes) if self.slopes else None,
        }


def _circle_abs_max(poly, center, radius, samples) -> mpfr:
    return max(abs(poly_eval(poly, circle_point(center, radius, t)))
               for t in circle_angles(samples))


def multiplicity_slope(poly, center, radii: Iterable = SLOPE_RADII,
                       samples: int = VANISHING_SAMPLES) -> float:
    """Least-squares slope of ``log max_{|z-c|=r} |poly|`` against ``log r``."""
    xs, ys = [], []
    for r in radii:
        m = _circle_abs_max(poly, center, r, samples)
        if m == 0:
            return float("inf")
        xs.append(float(gmpy2.log(r)))
        ys.append(float(gmpy2.log(m)))
    return statistics.linear_regression(xs, ys).slope


def check_vanishing(member: FamilyMember, k0: int) -> VanishingReport:
    """Brackets ``B_2 .. B_{k0+1}`` must vanish at every n-th root of unity."""
    h = member.h
    nodes = roots_of_unity(member.n)
    g_zero = all(poly_eval_checked(h.g, z)[1] for z in nodes)
    entries = []
    brackets = {j: bracket_direct(h, j) for j in range(2, k0 + 2)}
    for z in nodes:
        for j, b in brackets.items():
            value = abs(poly_eval(b, z))
            scale = max(mpfr(1), _circle_abs_max(b, z, VANISHING_RADIUS, VANISHING_SAMPLES))
            entries.append(VanishingEntry(z, j, value, scale, bool(value <= VANISHING_RTOL * scale)))
    slopes = [multiplicity_slope(brackets[k0], z) for z in nodes]
    return VanishingReport(g_zero, entries, slopes)


@dataclass
class WitnessReport:
    n: int
    zeros_exact: bool
    inner_radius: mpfr
    min_log_abs_inner: mpfr
    threshold_log: mpfr
    max_log_spherical_unit: mpfr = field(default=NEG_INF)

    @property
    def passed(self) -> bool:
        return self.zeros_exact and self.min_log_abs_inner >= self.threshold_log

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "zeros_exact": self.zeros_exact,
            "inner_radius": real_to_str(self.inner_radius),
            "min_log_abs_inner": real_to_str(self.min_log_abs_inner),
            "threshold_log": real_to_str(self.threshold_log),
            "max_log_spherical_unit_circle": real_to_str(self.max_log_spherical_unit),
            "pass": self.passed,
        }


def max_spherical_on_circle(f: Evaluator, radius=1, samples: int = WITNESS_SAMPLES) -> mpfr:
    return max(spherical_derivative(f, circle_point(0, mpfr(radius), t))
               for t in circle_angles(samples))


def nonnormality_witness(family: ConstructedFamily, n: int) -> WitnessReport:
    """Exact zeros on the unit circle next to values of modulus at least ``n``."""
    if n < 2:
        raise ValueError("the witness needs n >= 2")
    member = family.member(n)
    f = member_evaluator(member)
    zeros = all(f(z, 0).is_zero for z in roots_of_unity(n))
    inner = 1 - mpfr(1) / n
    min_inner = min(f.log_abs(circle_point(0, inner, t), 0) for t in circle_angles(WITNESS_SAMPLES))
    return WitnessReport(n, zeros, inner, min_inner, gmpy2.log(mpfr(n)),
                         max_spherical_on_circle(f))


def heat_map(f: Evaluator, region: Region, k: int, alpha, resolution: int) -> list[tuple]:
    """Rows ``(z, log_quotient, log_spherical)`` over the region grid."""
    return [(z, marty_quotient(f, z, k, alpha), spherical_derivative(f, z))
            for z in grid_points(region, resolution)]


def entire_quotient_log(h: ExpProduct, bracket, p: int, q: int) -> Callable[[mpc], mpfr]:
    """``z -> log |(h^(k))^q / h^p|`` given ``bracket = B_k``."""

    def value(z: mpc) -> mpfr:
        pz = mpc(poly_eval(h.p, z))
        gz = poly_eval(h.g, z)
        bz = poly_eval(bracket, z)
        if bz == 0:
            return NEG_INF
        return (q - p) * pz.real + q * log_abs(bz) - p * log_abs(gz)

    return value
