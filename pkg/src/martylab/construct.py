"""Counterexample families ``f_n = a_n (z^n - 1) exp(p_n)`` on the disk ``|z| < 2``.

For ``k0 >= 2``, ``alpha > 1`` and ``C > 0`` every member satisfies
``|f_n^(k0)| / (1 + |f_n|^alpha) <= C`` on the disk, while the sequence has
zeros on the unit circle next to values of modulus at least ``n``.

Pipeline per member: prescribe derivatives of ``p_n'`` at the roots of unity,
Hermite-interpolate, integrate, then size ``a_n`` from ``c_n`` (a maximum over
``|z| = 2`` of the entire quotient ``(h^(k0))^q / h^p``) and from the minimum
of ``|h_n|`` away from the unit circle. Large constants stay in logs.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2
from gmpy2 import mpc, mpfr

from martylab.expcalc import (
    ExpProduct,
    PhiPsiRegistry,
    bracket_direct,
    bracket_lemma,
    build_registry,
    derivative_table,
    x,
    y,
)
from martylab.hermite import HermiteData, hermite_interpolate
from martylab.numerics import (
    NEG_INF,
    get_precision,
    log_abs,
    real_from_str,
    real_to_str,
    set_precision,
    working_precision,
)
from martylab.poly import Poly, mp_eval, poly_antiderivative, poly_eval, roots_of_unity
from martylab.search import circle_max, circle_min, refine_grid_max
from martylab.verify import (
    GridReport,
    Region,
    check_vanishing,
    entire_quotient_log,
    grid_sup_many,
    member_evaluator,
)

log = logging.getLogger(__name__)

DOMAIN_RADIUS = 2
M_SAFETY = mpfr("1e-3")
M_GRID_POINTS = 2000
M_VALIDATION_POINTS = 100_000
CIRCLE_SAMPLES = 4096
CIRCLE_TOP = 8
SAFETY_FACTOR = "1.05"
DEFAULT_GRID = 101
ENTIRENESS_RTOL_BITS = 2  # recursive and direct brackets agree to 2^(-prec/2)


class ConstructionError(RuntimeError):
    """A pipeline stage failed for one member."""

    def __init__(self, stage: str, n: int | None, message: str):
        self.stage, self.n = stage, n
        where = f" (n={n})" if n is not None else ""
        super().__init__(f"{stage}{where}: {message}")


class VerificationError(ConstructionError):
    """A constructed member failed one of its numerical checks."""


def log_safety() -> mpfr:
    return gmpy2.log(mpfr(SAFETY_FACTOR))


# -- exponent pair and the ratio bound -------------------------------------

def _guard() -> mpfr:
    return mpfr(2) ** (-(get_precision() // 2))


def select_pq(alpha) -> tuple[int, int]:
    """Smallest ``q``, then smallest ``p``, with ``1 < p/q < min(alpha, 2)``."""
    alpha = mpfr(alpha)
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    cap = min(alpha, mpfr(2)) - _guard()
    q = 1
    while True:
        p = q + 1
        if p < q * cap:
            return p, q
        q += 1


def ratio_bound_function(p: int, q: int, alpha):
    """``x -> (1 + x^(p/q)) / (1 + x^alpha)`` on ``x >= 0``."""
    s = mpfr(p) / q
    alpha = mpfr(alpha)

    def h(xv):
        xv = mpfr(xv)
        if xv == 0:
            return mpfr(1)
        return (1 + xv ** s) / (1 + xv ** alpha)

    return h


def ratio_tail_start(p: int, q: int, alpha) -> mpfr:
    """Beyond this point the ratio is at most ``2 x^(p/q - alpha) <= 1``."""
    s = mpfr(p) / q
    return max(mpfr(2), mpfr(2) ** (1 / (mpfr(alpha) - s)))


@dataclass(frozen=True)
class RatioMaximum:
    x_star: mpfr
    argmax: mpfr
    grid_max: mpfr
    refined_max: mpfr

    @property
    def best(self) -> mpfr:
        return max(self.grid_max, self.refined_max)


def maximize_ratio(p: int, q: int, alpha, points: int = M_GRID_POINTS) -> RatioMaximum:
    if not Fraction(p, q) > 1 or not mpfr(p) / q < mpfr(alpha):
        raise ValueError("need 1 < p/q < alpha")
    h = ratio_bound_function(p, q, alpha)
    x_star = ratio_tail_start(p, q, alpha)
    lo = mpfr("1e-8")
    step = (x_star / lo) ** (mpfr(1) / (points - 1))
    xs = [mpfr(0)] + [lo * step ** i for i in range(points)]
    xs[-1] = x_star
    values = [h(v) for v in xs]
    i_best = max(range(len(xs)), key=lambda i: values[i])
    argmax, refined = refine_grid_max(h, xs, values, top=3)
    return RatioMaximum(x_star, argmax if refined >= values[i_best] else xs[i_best],
                        values[i_best], refined)


def bound_M(p: int, q: int, alpha) -> mpfr:
    """Validated upper bound for ``(1 + x^(p/q)) / (1 + x^alpha)`` on ``x >= 0``."""
    found = maximize_ratio(p, q, alpha)
    m_hat = (1 + M_SAFETY) * found.best
    h = ratio_bound_function(p, q, alpha)
    # independent check: uniform grid on the bulk, geometric grid near 0
    x_star = found.x_star
    half = M_VALIDATION_POINTS // 2
    uniform = (x_star * i / (half - 1) for i in range(half))
    lo = mpfr(2) ** -40
    ratio = (x_star / lo) ** (mpfr(1) / (half - 1))
    geometric = (lo * ratio ** i for i in range(half))
    for xv in (*uniform, *geometric):
        if h(xv) > m_hat:
            raise ConstructionError("bound_M", None, f"ratio {h(xv)} at x={xv} exceeds {m_hat}")
    return m_hat


# -- spec -------------------------------------------------------------------

@dataclass(frozen=True)
class CounterexampleSpec:
    k0: int
    alpha: mpfr
    C: mpfr
    p: int
    q: int
    M: mpfr
    precision_bits: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", mpfr(self.alpha))
        object.__setattr__(self, "C", mpfr(self.C))
        object.__setattr__(self, "M", mpfr(self.M))
        if self.k0 < 2:
            raise ValueError("k0 must be at least 2")
        if not self.alpha > 1:
            raise ValueError("alpha must exceed 1")
        if not self.C > 0:
            raise ValueError("C must be positive")
        if not (self.p > self.q >= 1 and self.p < self.q * (min(self.alpha, mpfr(2)) - _guard())):
            raise ValueError(f"need 1 < p/q < min(alpha, 2), got {self.p}/{self.q}")
        if not 2 * self.q > self.p:
            raise ValueError("need 2q > p")
        if not self.M >= 1:
            raise ValueError("M must be at least 1")

    @classmethod
    def create(cls, k0: int, alpha, C) -> CounterexampleSpec:
        alpha = mpfr(alpha)
        p, q = select_pq(alpha)
        return cls(k0, alpha, mpfr(C), p, q, bound_M(p, q, alpha), get_precision())

    def to_json(self) -> dict:
        return {
            "k0": self.k0,
            "alpha": real_to_str(self.alpha),
            "C": real_to_str(self.C),
            "p": self.p,
            "q": self.q,
            "M": real_to_str(self.M),
            "precision_bits": self.precision_bits,
        }

    @classmethod
    def from_json(cls, data: dict) -> CounterexampleSpec:
        return cls(int(data["k0"]), real_from_str(data["alpha"]), real_from_str(data["C"]),
                   int(data["p"]), int(data["q"]), real_from_str(data["M"]),
                   int(data["precision_bits"]))


# -- members ----------------------------------------------------------------

def g_poly(n: int) -> Poly:
    """``z^n - 1``."""
    return Poly((-1,) + (0,) * (n - 1) + (1,))


def prescribe_derivatives(n: int, k0: int, reg: PhiPsiRegistry) -> HermiteData:
    """Values of ``p', p'', .., p^(k0)`` at each n-th root of unity.

    They make ``h'' .. h^(k0+1)`` vanish there for ``h = (z^n - 1) exp(p)``.
    Orders are solved strictly in sequence per node: order ``k`` uses the
    already fixed orders ``1 .. k-1``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if reg.k_max < k0 + 1:
        raise ValueError(f"registry holds psi up to {reg.k_max}, need {k0 + 1}")
    g = derivative_table(g_poly(n), k0 + 1)
    nodes = roots_of_unity(n)
    values = []
    for z in nodes:
        gz = [poly_eval(gj, z) for gj in g]
        if gz[1] == 0:
            raise ValueError(f"g' vanishes at node {z}")
        derivs = [None, -gz[2] / (2 * gz[1])]
        for k in range(2, k0 + 1):
            assignment = {y(i): gz[i] for i in range(1, k + 2)}
            assignment.update({x(i): derivs[i] for i in range(1, k)})
            psi = mp_eval(reg.psi[k + 1], assignment, zero=mpc(0))
            derivs.append(-psi / ((k + 1) * gz[1]))
        values.append([mpc(v) for v in derivs[1:]])
    return HermiteData(tuple(nodes), tuple(tuple(v) for v in values))


def build_pn(n: int, k0: int, reg: PhiPsiRegistry) -> Poly:
    """Interpolate ``p_n'`` at the roots of unity and integrate with constant 0."""
    q = hermite_interpolate(prescribe_derivatives(n, k0, reg))
    return poly_antiderivative(q, mpc(0))


def log_abs_h(h: ExpProduct):
    def value(z):
        return mpc(poly_eval(h.p, z)).real + log_abs(poly_eval(h.g, z))

    return value


def compute_cn(h: ExpProduct, spec: CounterexampleSpec) -> mpfr:
    """``log c_n``: boundary maximum of the entire quotient, plus ``log 1.05``.

    The quotient is entire, so its maximum over the closed disk sits on
    ``|z| = 2`` and the removable points on the unit circle never need
    evaluating.
    """
    quotient = entire_quotient_log(h, bracket_direct(h, spec.k0), spec.p, spec.q)
    _, value = circle_max(quotient, 0, DOMAIN_RADIUS, CIRCLE_SAMPLES, CIRCLE_TOP)
    return value + log_safety()


def min_log_abs_h(h: ExpProduct, n: int) -> mpfr:
    """``log min |h_n|`` over ``|z| <= 1 - 1/n`` and ``1 + 1/n <= |z| <= 2``.

    ``h_n`` has no zeros off the unit circle, so the minimum sits on the
    bounding circles; radius 0 (``n = 1``) degenerates to ``z = 0``.
    """
    f = log_abs_h(h)
    radii = [1 - mpfr(1) / n, 1 + mpfr(1) / n]
    if radii[1] < DOMAIN_RADIUS:
        radii.append(mpfr(DOMAIN_RADIUS))
    return min(circle_min(f, 0, r, CIRCLE_SAMPLES, CIRCLE_TOP)[1] for r in radii)


def an_lower_bounds(log_cn: mpfr, log_min_h: mpfr, n: int,
                    spec: CounterexampleSpec) -> tuple[mpfr, mpfr]:
    """Both requirements on ``log a_n``: size against ``c_n``, and divergence."""
    sizing = (log_cn + spec.q * gmpy2.log(spec.M) - spec.q * gmpy2.log(spec.C)) / (spec.p - spec.q)
    divergence = gmpy2.log(mpfr(n)) - (log_min_h - log_safety())
    return sizing, divergence


def compute_an(h: ExpProduct, n: int, log_cn: mpfr, spec: CounterexampleSpec) -> mpfr:
    return max(an_lower_bounds(log_cn, min_log_abs_h(h, n), n, spec))


@dataclass
class FamilyMember:
    n: int
    pn: Poly
    log_cn: mpfr
    log_an: mpfr
    verification: dict = field(default_factory=dict)

    @property
    def h(self) -> ExpProduct:
        return ExpProduct(g_poly(self.n), self.pn)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "pn_coeffs": self.pn.to_json(),
            "log_cn": real_to_str(self.log_cn),
            "log_an": real_to_str(self.log_an),
            "verification": self.verification,
        }

    @classmethod
    def from_json(cls, data: dict) -> FamilyMember:
        return cls(int(data["n"]), Poly.from_json(data["pn_coeffs"]),
                   real_from_str(data["log_cn"]), real_from_str(data["log_an"]),
                   dict(data.get("verification", {})))


@dataclass
class ConstructedFamily:
    spec: CounterexampleSpec
    members: list[FamilyMember]

    def __post_init__(self) -> None:
        ns = [m.n for m in self.members]
        if ns != sorted(set(ns)):
            raise ValueError("members must be sorted by n and distinct")

    def member(self, n: int) -> FamilyMember:
        for m in self.members:
            if m.n == n:
                return m
        raise KeyError(n)

    @property
    def passed(self) -> bool:
        return all(m.verification.get("pass", False) for m in self.members)

    def to_json(self) -> dict:
        return {"spec": self.spec.to_json(), "members": [m.to_json() for m in self.members]}

    @classmethod
    def from_json(cls, data: dict) -> ConstructedFamily:
        return cls(CounterexampleSpec.from_json(data["spec"]),
                   [FamilyMember.from_json(m) for m in data["members"]])


def domain_region() -> Region:
    return Region.disk(0, DOMAIN_RADIUS)


def quotient_checks(spec: CounterexampleSpec) -> list[tuple[mpfr, mpfr]]:
    """``(alpha, log C)`` and the intermediate ``(p/q, log(C/M))``."""
    log_c = gmpy2.log(spec.C)
    return [(spec.alpha, log_c), (mpfr(spec.p) / spec.q, log_c - gmpy2.log(spec.M))]


def verify_member(member: FamilyMember, spec: CounterexampleSpec,
                  resolution: int) -> tuple[dict, list[GridReport]]:
    vanishing = check_vanishing(member, spec.k0)
    main, intermediate = grid_sup_many(member_evaluator(member), domain_region(), spec.k0,
                                       quotient_checks(spec), resolution)
    summary = main.to_json()
    summary["intermediate"] = intermediate.to_json()
    summary["vanishing"] = vanishing.summary()
    summary["pass"] = bool(main.passed and intermediate.passed and vanishing.passed)
    return summary, [main, intermediate]


def _check_brackets_agree(h: ExpProduct, k: int, reg: PhiPsiRegistry, n: int) -> None:
    direct, lemma = bracket_direct(h, k), bracket_lemma(h, k, reg)
    tol = mpfr(2) ** (-(get_precision() // ENTIRENESS_RTOL_BITS))
    scale = max((abs(c) for c in direct.coeffs), default=mpfr(0))
    diff = direct - lemma
    if any(abs(c) > tol * max(scale, mpfr(1)) for c in diff.coeffs):
        raise ConstructionError("brackets", n, f"recursive and direct brackets disagree for k={k}")


def build_member(n: int, spec: CounterexampleSpec, reg: PhiPsiRegistry,
                 resolution: int = DEFAULT_GRID, strict: bool = True) -> FamilyMember:
    try:
        pn = build_pn(n, spec.k0, reg)
    except (ValueError, ArithmeticError) as exc:
        raise ConstructionError("build_pn", n, str(exc)) from exc
    member = FamilyMember(n, pn, NEG_INF, NEG_INF)
    _check_brackets_agree(member.h, spec.k0 + 1, reg, n)

    vanishing = check_vanishing(member, spec.k0)
    if strict and not vanishing.passed:
        raise VerificationError("vanishing", n, f"summary {vanishing.summary()}")
    member.log_cn = compute_cn(member.h, spec)
    member.log_an = compute_an(member.h, n, member.log_cn, spec)
    member.verification, _ = verify_member(member, spec, resolution)
    if strict and not member.verification["pass"]:
        raise VerificationError("verify", n, f"report {member.verification}")
    log.info("member n=%d: log c_n=%s, log a_n=%s", n, gmpy2.mpfr(member.log_cn, 53),
             gmpy2.mpfr(member.log_an, 53))
    return member


def _build_member_worker(args) -> FamilyMember:
    n, spec, resolution, strict = args
    set_precision(spec.precision_bits)
    return build_member(n, spec, build_registry(spec.k0 + 1), resolution, strict)


def construct_family(k0: int, alpha, C, n_list: Sequence[int], precision_bits: int | None = None,
                     resolution: int = DEFAULT_GRID, workers: int = 1,
                     strict: bool = True) -> ConstructedFamily:
    """Build and verify members for every ``n`` in ``n_list``."""
    if not n_list:
        raise ValueError("n_list is empty")
    if any(n < 1 for n in n_list):
        raise ValueError("every n must be positive")
    bits = precision_bits or get_precision()
    with working_precision(bits):
        spec = CounterexampleSpec.create(k0, alpha, C)
        ns = sorted(set(n_list))
        if workers == 1:
            reg = build_registry(k0 + 1)
            members = [build_member(n, spec, reg, resolution, strict) for n in ns]
        else:
            with ProcessPoolExecutor(max_workers=workers or None) as pool:
                members = list(pool.map(_build_member_worker,
                                        [(n, spec, resolution, strict) for n in ns]))
        return ConstructedFamily(spec, members)
