"""Colored Jones values of 4_1 and 5_2 and the surgery invariant tau_r.

Every q-power used here is exp(i*pi*j/r) for an integer j, so a single table
of the 2r values exp(i*pi*j/r) at the working precision serves all of them;
exponents are reduced exactly modulo 2r before lookup.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

from .arith import (
    DEFAULT_DIGITS,
    DEFAULT_MAX_PREC,
    InvariantValue,
    QtvError,
    RootSpec,
    context,
    default_precision,
    expi_pi_fraction,
    principal_log,
    refine,
)

KNOTS = ("fig8", "k52")

# (vol, cs) of the surgered manifolds, used to pick the branch of Im Q_r
SURGERY_TARGETS = {
    ("fig8", -6): (1.28449, -1.34092),
    ("fig8", -5): (0.98137, -1.52067),
    ("fig8", 5): (0.98137, 1.52067),
    ("fig8", 6): (1.28449, 1.34092),
    ("fig8", 7): (1.46378, 1.19653),
    ("fig8", 8): (1.58317, 1.07850),
    ("k52", -3): (2.10310, -4.45132),
    ("k52", -2): (1.84359, -4.63884),
    ("k52", -1): (1.39851, -4.86783),
    ("k52", 5): (0.98137, -1.52067),
    ("k52", 6): (1.41406, -1.51206),
    ("k52", 7): (1.75713, -1.55255),
}


class InvalidSurgery(QtvError, ValueError):
    pass


class DivisionByZero(QtvError, ZeroDivisionError):
    pass


@dataclass(frozen=True)
class SurgerySpec:
    knot: str
    p: int
    r: int

    def __post_init__(self):
        if self.knot not in KNOTS:
            raise InvalidSurgery(f"knot must be one of {', '.join(KNOTS)}, got {self.knot!r}")
        if not isinstance(self.p, int) or self.p == 0:
            raise InvalidSurgery(f"surgery coefficient p must be a nonzero integer, got {self.p!r}")
        if not isinstance(self.r, int) or self.r < 3 or self.r % 2 == 0:
            raise InvalidSurgery(f"r must be an odd integer >= 3, got {self.r!r}")


class _Units:
    """exp(i*pi*j/r) for j in [0, 2r) at the precision of ``root``."""

    def __init__(self, root: RootSpec):
        r = root.r
        self.r = r
        self.k = root.k
        with root.context():
            s = root._sines
            # cosines on [0, pi], mirrored so that cos(pi*(2r-j)/r) == cos(pi*j/r) exactly
            pi = root.pi
            half = [gmpy2.cos(j * pi / r) for j in range(r + 1)]
            cos = [half[j] if j <= r else half[2 * r - j] for j in range(2 * r)]
            self.table = [mpc(cos[j], s[j]) for j in range(2 * r)]

    def e(self, j: int) -> mpc:
        return self.table[j % (2 * self.r)]

    def q(self, m: int) -> mpc:
        """q**m with q = exp(k*pi*i/r)."""
        return self.table[(m * self.k) % (2 * self.r)]


def _pair_factors(n: int, root: RootSpec):
    # (q^{n-i} - q^{-n+i})(q^{n+i} - q^{-n-i}) = -4 sin(k(n-i)pi/r) sin(k(n+i)pi/r), i = 1..n-1
    s = root._sines
    k, m = root.k, 2 * root.r
    return [-4 * s[(k * (n - i)) % m] * s[(k * (n + i)) % m] for i in range(1, n)]


def jones_fig8(n: int, root: RootSpec) -> mpc:
    """n-th colored Jones value of 4_1 at q = exp(k*pi*i/r); real for these q."""
    if n < 1:
        raise ValueError(f"color n must be >= 1, got {n}")
    with root.context():
        total = mpfr(1)
        prod = mpfr(1)
        for f in _pair_factors(n, root):
            prod *= f
            total += prod
        return mpc(total, 0)


def _c_coefficients(kmax: int, root: RootSpec, units: _Units):
    """d_k = q^{k(k+3)/2} c_k for k = 0..kmax (inside the root context)."""
    fact, inv = root.fact, root.invfact
    out = []
    for k in range(kmax + 1):
        inner = mpc(0)
        for i in range(k + 1):
            inner += units.q(i * i - 2 * i - 3 * k * i) * (fact[k] * inv[i] * inv[k - i])
        # q^{k(k+3)/2} * (-1)^k * q^{(5k^2+7k)/2} = (-1)^k q^{3k^2+5k}
        c = units.q(3 * k * k + 5 * k) * inner
        out.append(-c if k & 1 else c)
    return out


def c_coefficient(k: int, root: RootSpec) -> mpc:
    """c_k of the 5_2 formula (without the q^{k(k+3)/2} prefactor)."""
    if not 0 <= k < root.r:
        raise ValueError(f"c_k needs 0 <= k < r, got k={k}")
    units = _Units(root)
    with root.context():
        d = _c_coefficients(k, root, units)[k]
        return d * units.q(-(k * (k + 3) // 2))


def jones_52(n: int, root: RootSpec) -> mpc:
    """n-th colored Jones value of 5_2 at q = exp(k*pi*i/r)."""
    if n < 1:
        raise ValueError(f"color n must be >= 1, got {n}")
    if n > root.r:
        raise ValueError(f"color n must be <= r for the q-binomials to exist, got n={n}")
    return jones_values("k52", root, n)[n - 1]


def jones_values(knot: str, root: RootSpec, nmax: int) -> list:
    """[J_1, ..., J_nmax] for ``knot`` in O(nmax^2) total work."""
    if knot not in KNOTS:
        raise InvalidSurgery(f"knot must be one of {', '.join(KNOTS)}, got {knot!r}")
    with root.context():
        if knot == "fig8":
            out = []
            for n in range(1, nmax + 1):
                total = mpfr(1)
                prod = mpfr(1)
                for f in _pair_factors(n, root):
                    prod *= f
                    total += prod
                out.append(mpc(total, 0))
            return out
        units = _Units(root)
        d = _c_coefficients(nmax - 1, root, units)
        out = []
        for n in range(1, nmax + 1):
            total = d[0]
            prod = mpfr(1)
            for k, f in enumerate(_pair_factors(n, root), start=1):
                prod *= f
                total += d[k] * prod
            out.append(total)
        return out


def _prefactor_turns(r: int) -> Fraction:
    # ((3 + r^2)/r - (3 - r)/4) reduced modulo 2
    return (Fraction(3 + r * r, r) - Fraction(3 - r, 4)) % 2


def rt_fixed(spec: SurgerySpec, prec: int) -> mpc:
    """tau_r(M_p; exp(2*pi*i/r)) at one working precision."""
    r, p = spec.r, spec.p
    root = RootSpec(r, 2, prec)
    units = _Units(root)
    js = jones_values(spec.knot, root, r - 1)
    with root.context():
        s = root._sines
        terms = []
        for n in range(r - 1):
            # (-exp(i*pi/r))^{-p(n^2+2n)} = exp(i*pi*j/r) with j = r*p*n - p*(n^2+2n)
            j = r * (p * n % 2) - p * (n * n + 2 * n)
            sn = s[(2 * (n + 1)) % (2 * r)]
            terms.append(units.e(j) * js[n] * (sn * sn))
        total = mpc(gmpy2.fsum(t.real for t in terms), gmpy2.fsum(t.imag for t in terms))
        turns = _prefactor_turns(r)
        pref = expi_pi_fraction(turns.numerator, turns.denominator, root.pi)
        return pref * total * 2 / r


def rt_surgery(
    spec: SurgerySpec,
    *,
    digits: int = DEFAULT_DIGITS,
    max_prec: int = DEFAULT_MAX_PREC,
    prec: int | None = None,
) -> InvariantValue:
    """tau_r of the p-surgery on ``spec.knot`` with adaptive precision."""
    start = default_precision() if prec is None else prec
    value, used, vd = refine(lambda b: rt_fixed(spec, b), start, digits, max_prec)
    with context(used):
        return InvariantValue(value.real, value.imag, used, vd)


@dataclass(frozen=True)
class QrValue:
    """Q_r with Im reduced modulo pi^2; ``im_raw`` keeps the principal-log value."""

    re: mpfr
    im: mpfr
    im_raw: mpfr
    prec: int
    verified_digits: int
    target: tuple | None = None

    def __complex__(self):
        return complex(float(self.re), float(self.im))


def reduce_im(im, center=None):
    """Representative of ``im`` modulo pi^2 in [center - pi^2/2, center + pi^2/2), or [0, pi^2)."""
    with context(_prec_of(im)):
        pi2 = gmpy2.const_pi() ** 2
        lo = mpfr(0) if center is None else mpfr(center) - pi2 / 2
        k = gmpy2.floor((im - lo) / pi2)
        v = im - k * pi2
        # rounding can land exactly on the open end of the window
        if v >= lo + pi2:
            v -= pi2
        elif v < lo:
            v += pi2
        return v


def _prec_of(x) -> int:
    return getattr(x, "precision", None) or gmpy2.get_context().precision


def qr(
    knot: str,
    p: int,
    r: int,
    *,
    target: tuple | None = None,
    digits: int = DEFAULT_DIGITS,
    max_prec: int = DEFAULT_MAX_PREC,
    prec: int | None = None,
) -> QrValue:
    """Q_r = 2*pi*log(tau_r / tau_{r-2}) for the p-surgery on ``knot``.

    ``target`` is a (vol, cs) pair used to choose the branch of the
    imaginary part; by default the built-in table is consulted.
    """
    if r < 7 or r % 2 == 0:
        raise InvalidSurgery(f"Q_r needs odd r >= 7, got {r}")
    hi = rt_surgery(SurgerySpec(knot, p, r), digits=digits, max_prec=max_prec, prec=prec)
    lo = rt_surgery(SurgerySpec(knot, p, r - 2), digits=digits, max_prec=max_prec, prec=prec)
    if target is None:
        target = SURGERY_TARGETS.get((knot, p))
    bits = max(hi.prec, lo.prec)
    with context(bits):
        den = lo.value
        if gmpy2.is_zero(den) or abs(den) < gmpy2.exp10(-lo.verified_digits) * abs(hi.value):
            raise DivisionByZero(f"tau_{r - 2} vanishes to the verified precision")
        lg = principal_log(hi.value / den)
        two_pi = 2 * gmpy2.const_pi()
        re = lg.real * two_pi
        im_raw = lg.imag * two_pi
        im = reduce_im(im_raw, None if target is None else target[1])
    vd = min(hi.verified_digits, lo.verified_digits)
    return QrValue(re, im, im_raw, bits, vd, target)


__all__ = [
    "DivisionByZero",
    "InvalidSurgery",
    "KNOTS",
    "QrValue",
    "SURGERY_TARGETS",
    "SurgerySpec",
    "c_coefficient",
    "jones_52",
    "jones_fig8",
    "jones_values",
    "qr",
    "reduce_im",
    "rt_fixed",
    "rt_surgery",
]
