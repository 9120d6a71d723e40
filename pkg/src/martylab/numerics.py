"""Extended-precision scalars and an overflow-free log-polar complex type.

Real and complex scalars are :mod:`gmpy2` ``mpfr`` / ``mpc`` values. The
working precision lives in the thread-local gmpy2 context and is set with
:func:`set_precision` (default 256 bits).

:class:`LogComplex` stores ``log|z|`` and ``arg z`` so that products such as
``a * exp(p(z))`` with astronomically large modulus stay representable.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Union

import gmpy2
from gmpy2 import mpc, mpfr

DEFAULT_PRECISION = 256
MIN_PRECISION = 64
PRECISION_ENV = "MARTYLAB_PRECISION"

BigReal = mpfr
BigComplex = mpc
RealLike = Union[int, float, str, mpfr]

NEG_INF = mpfr("-inf")


def set_precision(bits: int) -> None:
    if bits < MIN_PRECISION:
        raise ValueError(f"precision must be at least {MIN_PRECISION} bits, got {bits}")
    gmpy2.get_context().precision = int(bits)


def get_precision() -> int:
    return gmpy2.get_context().precision


def precision_from_env(default: int = DEFAULT_PRECISION) -> int:
    raw = os.environ.get(PRECISION_ENV)
    return int(raw) if raw else default


@contextmanager
def working_precision(bits: int) -> Iterator[None]:
    """Temporarily switch the working precision."""
    old = get_precision()
    set_precision(bits)
    try:
        yield
    finally:
        set_precision(old)


set_precision(DEFAULT_PRECISION)


def unit_roundoff() -> mpfr:
    return mpfr(2) ** (1 - get_precision())


def pi() -> mpfr:
    return gmpy2.const_pi()


def to_real(x: RealLike) -> mpfr:
    return mpfr(x)


def to_complex(z) -> mpc:
    if isinstance(z, (list, tuple)):
        return mpc(mpfr(z[0]), mpfr(z[1]))
    return mpc(z)


def is_neg_inf(x: mpfr) -> bool:
    return gmpy2.is_infinite(x) and x < 0


def log_abs(z) -> mpfr:
    """Natural log of ``|z|``; ``-inf`` for an exact zero."""
    if z == 0:
        return NEG_INF
    if isinstance(z, mpc):
        return gmpy2.log(gmpy2.norm(z)) / 2
    return gmpy2.log(abs(mpfr(z)))


def normalize_phase(phi: mpfr) -> mpfr:
    """Map an angle to ``(-pi, pi]``."""
    two_pi = 2 * pi()
    r = gmpy2.remainder(mpfr(phi), two_pi)
    if r <= -pi():
        r += two_pi
    elif r > pi():
        r -= two_pi
    return r


# -- serialization ---------------------------------------------------------

def real_to_str(x: mpfr) -> str:
    """Decimal string that round-trips exactly at the working precision."""
    x = mpfr(x)
    if gmpy2.is_infinite(x):
        return "-inf" if x < 0 else "inf"
    if gmpy2.is_nan(x):
        raise ValueError("NaN cannot be serialized")
    return str(x)


def real_from_str(s: str) -> mpfr:
    return mpfr(s)


def complex_to_json(z) -> list[str]:
    z = mpc(z)
    return [real_to_str(z.real), real_to_str(z.imag)]


def complex_from_json(pair) -> mpc:
    re, im = pair
    return mpc(mpfr(re), mpfr(im))


# -- log-domain complex ----------------------------------------------------

@dataclass(frozen=True)
class LogComplex:
    """``exp(log_mag + i*phase)``; ``log_mag == -inf`` encodes exact zero."""

    log_mag: mpfr
    phase: mpfr

    def __post_init__(self) -> None:
        log_mag = mpfr(self.log_mag)
        if gmpy2.is_nan(log_mag) or (gmpy2.is_infinite(log_mag) and log_mag > 0):
            raise ValueError(f"invalid log-magnitude {log_mag}")
        phase = mpfr(0) if is_neg_inf(log_mag) else normalize_phase(self.phase)
        object.__setattr__(self, "log_mag", log_mag)
        object.__setattr__(self, "phase", phase)

    @classmethod
    def zero(cls) -> LogComplex:
        return cls(NEG_INF, mpfr(0))

    @classmethod
    def one(cls) -> LogComplex:
        return cls(mpfr(0), mpfr(0))

    @classmethod
    def from_complex(cls, z) -> LogComplex:
        z = mpc(z)
        if z == 0:
            return cls.zero()
        return cls(log_abs(z), gmpy2.phase(z))

    @property
    def is_zero(self) -> bool:
        return is_neg_inf(self.log_mag)

    def to_complex(self) -> mpc:
        """Materialize as an ``mpc``; overflows for huge magnitudes."""
        if self.is_zero:
            return mpc(0)
        return gmpy2.exp(self.log_mag) * gmpy2.exp(mpc(0, self.phase))

    def scaled(self, log_factor: mpfr) -> LogComplex:
        """Multiply by the positive real ``exp(log_factor)``."""
        if self.is_zero:
            return self
        return LogComplex(self.log_mag + log_factor, self.phase)

    def __mul__(self, other: LogComplex) -> LogComplex:
        return lc_mul(self, other)

    def __add__(self, other: LogComplex) -> LogComplex:
        return lc_add(self, other)

    def to_json(self) -> dict[str, str]:
        return {"log_mag": real_to_str(self.log_mag), "phase": real_to_str(self.phase)}

    @classmethod
    def from_json(cls, data: dict[str, str]) -> LogComplex:
        return cls(real_from_str(data["log_mag"]), real_from_str(data["phase"]))


def lc_mul(a: LogComplex, b: LogComplex) -> LogComplex:
    if a.is_zero or b.is_zero:
        return LogComplex.zero()
    return LogComplex(a.log_mag + b.log_mag, a.phase + b.phase)


def lc_add(a: LogComplex, b: LogComplex) -> LogComplex:
    """Sum with the larger term factored out.

    A relative cancellation below a few ulps of the larger term is reported
    as the zero sentinel: at that point the sum is indistinguishable from 0.
    """
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    big, small = (a, b) if a.log_mag >= b.log_mag else (b, a)
    ratio = gmpy2.exp(small.log_mag - big.log_mag)
    w = 1 + ratio * gmpy2.exp(mpc(0, small.phase - big.phase))
    if abs(w) <= 16 * unit_roundoff():
        return LogComplex.zero()
    return LogComplex(big.log_mag + log_abs(w), big.phase + gmpy2.phase(w))


def lc_softplus_alpha(x: LogComplex, alpha: RealLike) -> mpfr:
    """``log(1 + |x|**alpha)`` without forming ``|x|**alpha``."""
    alpha = mpfr(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if x.is_zero:
        return mpfr(0)
    return softplus(alpha * x.log_mag)


def softplus(t: mpfr) -> mpfr:
    """``log(1 + exp(t))`` for a real ``t`` of any size."""
    if is_neg_inf(t):
        return mpfr(0)
    if t > 0:
        return t + gmpy2.log1p(gmpy2.exp(-t))
    return gmpy2.log1p(gmpy2.exp(t))
