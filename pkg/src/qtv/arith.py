"""Precision-controlled arithmetic at roots of unity.

All high-precision values are :mod:`gmpy2` ``mpfr``/``mpc`` objects.  The
working precision lives in the thread-local gmpy2 context, so every public
function here enters a context at the precision of its :class:`RootSpec`
before touching the tables.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable

import gmpy2
from gmpy2 import mpc, mpfr

DEFAULT_PREC = 256
DEFAULT_DIGITS = 12
DEFAULT_MAX_PREC = 1 << 15
PREC_ENV = "QTV_PRECISION_BITS"


class QtvError(Exception):
    """Base class for every error raised by this package."""


class InvalidRoot(QtvError, ValueError):
    pass


class LogOfZero(QtvError, ValueError):
    pass


class PrecisionExhausted(QtvError, ArithmeticError):
    """Adaptive refinement hit the precision cap.

    ``best`` holds the last (highest precision) value that was computed and
    ``verified_digits`` the agreement reached with the level before it.
    """

    def __init__(self, message, best=None, verified_digits=0, prec=0):
        super().__init__(message)
        self.best = best
        self.verified_digits = verified_digits
        self.prec = prec


def default_precision() -> int:
    """Initial working precision in bits, overridable through ``QTV_PRECISION_BITS``."""
    raw = os.environ.get(PREC_ENV)
    if not raw:
        return DEFAULT_PREC
    try:
        bits = int(raw)
    except ValueError:
        raise QtvError(f"{PREC_ENV} must be an integer, got {raw!r}") from None
    if bits < 64:
        raise QtvError(f"{PREC_ENV} must be at least 64 bits, got {bits}")
    return bits


def context(prec: int):
    """A fresh gmpy2 context at ``prec`` bits, usable as a ``with`` block."""
    return gmpy2.context(precision=prec)


def decimal_digits(prec: int) -> int:
    """Number of decimal digits carried by ``prec`` bits."""
    return int(prec * math.log10(2))


@dataclass(frozen=True)
class RootSpec:
    """The root of unity q = exp(k*pi*i/r) together with its working precision.

    Construction validates the root and fills the sine, quantum-integer and
    quantum-factorial tables once; they are read-only afterwards.  ``sixj_cache``
    is the per-root memo table used by :mod:`qtv.sixj`.
    """

    r: int
    k: int
    prec: int = DEFAULT_PREC
    sixj_cache: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    def __post_init__(self):
        r, k = self.r, self.k
        if not isinstance(r, int) or not isinstance(k, int):
            raise InvalidRoot(f"r and k must be integers, got r={r!r}, k={k!r}")
        if r < 3:
            raise InvalidRoot(f"level r must be >= 3, got {r}")
        if not 1 <= k < 2 * r:
            raise InvalidRoot(f"root index k must satisfy 1 <= k < 2r, got k={k}, r={r}")
        if math.gcd(k, r) != 1:
            raise InvalidRoot(
                f"q^2 = exp(2*{k}*pi*i/{r}) is not a primitive r-th root of unity (gcd(k, r) != 1)"
            )
        if self.prec < 53:
            raise InvalidRoot(f"precision must be at least 53 bits, got {self.prec}")
        with context(self.prec):
            pi = gmpy2.const_pi()
            two_r = 2 * r
            # sin(m*pi/r) for m in [0, 2r), each evaluated once on [0, pi/2] so the
            # reflection identities hold bit-for-bit; exact zeros at m = 0 and m = r
            half = [mpfr(0)] + [gmpy2.sin(min(m, r - m) * pi / r) for m in range(1, r)]
            sines = half + [-v for v in half]
            denom = sines[k % two_r]
            qint = [sines[(n * k) % two_r] / denom for n in range(two_r)]
            fact = [mpfr(1)]
            for n in range(1, two_r + 2):
                fact.append(fact[-1] * qint[n % two_r])
            # [n]! vanishes for n >= r, so the reciprocal table stops at r-1
            invfact = [1 / fact[n] for n in range(r)]
            weights = [qint[c + 1] if c % 2 == 0 else -qint[c + 1] for c in range(r - 1)]
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "_sines", sines)
        object.__setattr__(self, "qint", qint)
        object.__setattr__(self, "fact", fact)
        object.__setattr__(self, "invfact", invfact)
        object.__setattr__(self, "weights", weights)

    @property
    def num_colors(self) -> int:
        """Size of I_r; twice-colors run over ``range(num_colors)``."""
        return self.r - 1

    @property
    def max_twice_sum(self) -> int:
        """Bound on the sum of three twice-colors of an admissible triple."""
        return 2 * (self.r - 2)

    def context(self):
        return context(self.prec)

    def with_prec(self, prec: int) -> "RootSpec":
        return RootSpec(self.r, self.k, prec)

    def q_power(self, m: int) -> mpc:
        """q**m = exp(m*k*pi*i/r) with the exponent reduced exactly modulo 2r."""
        j = (m * self.k) % (2 * self.r)
        with self.context():
            return expi_pi_fraction(j, self.r, self.pi)


def expi_pi_fraction(num: int, den: int, pi: mpfr | None = None) -> mpc:
    """exp(i*pi*num/den) in the current context, reducing num modulo 2*den first."""
    num %= 2 * den
    if pi is None:
        pi = gmpy2.const_pi()
    theta = num * pi / den
    return mpc(gmpy2.cos(theta), gmpy2.sin(theta))


def make_root(r: int, k: int, prec: int | None = None) -> RootSpec:
    """Validated root q = exp(k*pi*i/r); raises :class:`InvalidRoot` when gcd(k, r) != 1."""
    return RootSpec(r, k, default_precision() if prec is None else prec)


def quantum_int(n: int, root: RootSpec) -> mpfr:
    """[n] = sin(n*k*pi/r) / sin(k*pi/r).  Exactly zero when r divides n."""
    return root.qint[n % (2 * root.r)]


def quantum_factorial(n: int, root: RootSpec) -> mpfr:
    """[n]! = [n][n-1]...[1] with [0]! = 1, read from the prefix table."""
    if not 0 <= n <= 2 * root.r:
        raise ValueError(f"quantum factorial index must lie in [0, 2r], got {n} (r={root.r})")
    return root.fact[n]


def _precision_of(x) -> int:
    prec = getattr(x, "precision", None)
    if prec is None:
        return gmpy2.get_context().precision
    if isinstance(prec, tuple):
        return max(prec)
    return prec


def signed_sqrt(x) -> mpc:
    """Square root with sqrt(x) = sqrt(-x)*i for negative real x.

    Works at the precision of ``x`` (or of the current context for plain
    Python numbers).
    """
    with context(_precision_of(x)):
        x = mpfr(x)
        if x < 0:
            return mpc(0, gmpy2.sqrt(-x))
        return mpc(gmpy2.sqrt(x), 0)


def principal_log(z) -> mpc:
    """log|z| + i*arg(z) with the argument taken in [0, 2*pi)."""
    with context(_precision_of(z)):
        z = mpc(z)
        if gmpy2.is_zero(z):
            raise LogOfZero("logarithm of zero")
        arg = gmpy2.phase(z)
        if arg < 0:
            arg += 2 * gmpy2.const_pi()
        return mpc(gmpy2.log(abs(z)), arg)


@dataclass(frozen=True)
class InvariantValue:
    """A computed invariant together with its numerical pedigree.

    ``verified_digits`` counts the leading decimal digits on which the value
    agreed with a recomputation at the previous precision level.
    """

    re: mpfr
    im: mpfr
    prec: int
    verified_digits: int

    @property
    def value(self) -> mpc:
        with context(self.prec):
            return mpc(self.re, self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __float__(self):
        return float(self.re)

    def is_real(self) -> bool:
        scale = max(1.0, abs(float(self.re)))
        return abs(float(self.im)) <= 10.0 ** (-self.verified_digits) * scale


def agreeing_digits(a, b, prec: int) -> int:
    """Leading decimal digits on which ``a`` and ``b`` agree, relative to |b|.

    Capped by what ``prec`` bits can represent; an exact zero reference falls
    back to absolute agreement.
    """
    cap = max(decimal_digits(prec) - 1, 0)
    with context(2 * prec):
        a, b = mpc(a), mpc(b)
        diff = abs(a - b)
        if gmpy2.is_zero(diff):
            return cap
        scale = abs(b)
        if gmpy2.is_zero(scale):
            scale = mpfr(1)
        rel = diff / scale
        if rel >= 1:
            return 0
        digits = int(gmpy2.floor(-gmpy2.log10(rel)))
    return max(0, min(digits, cap))


def _vanishing(lo, hi, prec: int):
    """Exact zero when both levels are pure round-off: tiny, and shrinking with precision."""
    with context(2 * prec):
        a, b = abs(mpc(lo)), abs(mpc(hi))
        if gmpy2.is_zero(a) or a >= mpfr(2) ** (-prec // 2):
            return None
        if b > a * mpfr(2) ** (-prec // 2):
            return None
        return mpc(0, 0, precision=2 * prec)


def zero_digits(lo, prec: int) -> int:
    """Absolute decimal digits certified for a value recognised as zero."""
    with context(prec):
        a = abs(mpc(lo))
        if gmpy2.is_zero(a):
            return decimal_digits(prec) - 1
        return max(0, int(gmpy2.floor(-gmpy2.log10(a))))


def refine(
    compute: Callable[[int], mpc],
    prec: int,
    digits: int = DEFAULT_DIGITS,
    max_prec: int = DEFAULT_MAX_PREC,
) -> tuple[mpc, int, int]:
    """Evaluate ``compute`` at successive doublings of precision until two
    consecutive levels agree on ``digits`` decimal digits.

    Returns ``(value, prec, verified_digits)`` where ``value`` is the result at
    the highest precision used.  Raises :class:`PrecisionExhausted` when the
    cap is reached first.
    """
    if prec > max_prec:
        raise PrecisionExhausted(f"initial precision {prec} exceeds cap {max_prec}", prec=prec)
    lo = compute(prec)
    vd = 0
    while 2 * prec <= max_prec:
        hi = compute(2 * prec)
        vd = agreeing_digits(lo, hi, prec)
        zero = _vanishing(lo, hi, prec)
        prec *= 2
        if zero is not None:
            return zero, prec, min(zero_digits(lo, prec), decimal_digits(prec) - 1)
        if vd >= digits:
            return hi, prec, vd
        lo = hi
    raise PrecisionExhausted(
        f"could not verify {digits} digits below {max_prec} bits",
        best=lo,
        verified_digits=vd,
        prec=prec,
    )
