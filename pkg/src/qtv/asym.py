"""Growth quantities over a range of levels and log-line fits of Phi_r."""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import gmpy2
from gmpy2 import mpfr

from .arith import (
    DEFAULT_DIGITS,
    DEFAULT_MAX_PREC,
    InvariantValue,
    LogOfZero,
    QtvError,
    context,
    default_precision,
)
from .statesum import qv_from_tv, root_at, tv
from .tri import ColoredTriangulation

KINDS = ("qv", "tv", "phi")


class DegenerateFit(QtvError, ValueError):
    pass


@dataclass(frozen=True)
class SeriesPoint:
    r: int
    value: object = None  # mpc for qv/tv, mpfr for phi; None when the point failed
    verified_digits: int = 0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class Series:
    label: str
    points: list = field(default_factory=list)

    def ok_points(self) -> list:
        return [p for p in self.points if p.ok]

    @property
    def n_failed(self) -> int:
        return sum(1 for p in self.points if not p.ok)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    rms_residual: float
    n_points: int
    n_excluded: int = 0


def phi_from_tv(t: InvariantValue, r: int, vol: float) -> mpfr:
    """ln|TV_r| - (r-2)/(2*pi) * vol; the modulus covers negative TV."""
    if gmpy2.is_zero(t.re):
        raise LogOfZero(f"TV_{r} vanishes, Phi_{r} is undefined")
    with context(t.prec):
        return gmpy2.log(abs(t.re)) - (r - 2) * mpfr(vol) / (2 * gmpy2.const_pi())


def phi(
    ct: ColoredTriangulation,
    r: int,
    vol: float,
    *,
    digits: int = DEFAULT_DIGITS,
    max_prec: int = DEFAULT_MAX_PREC,
    threads: int = 1,
) -> mpfr:
    """Phi_r(M) at q = exp(2*pi*i/r)."""
    if r % 2 == 0 or r < 3:
        raise QtvError(f"Phi_r needs odd r >= 3, got {r}")
    t = tv(ct, root_at(r, 2, default_precision()), digits=digits, max_prec=max_prec, threads=threads)
    return phi_from_tv(t, r, vol)


def _point(ct, r, kind, vol, digits, max_prec, threads) -> SeriesPoint:
    try:
        if kind != "tv" and r % 2 == 0:
            raise QtvError(f"{kind} needs odd r, got {r}")
        t = tv(ct, root_at(r, 2, default_precision()), digits=digits, max_prec=max_prec, threads=threads)
        if kind == "tv":
            return SeriesPoint(r, t.value, t.verified_digits)
        if kind == "qv":
            q = qv_from_tv(t, r)
            return SeriesPoint(r, q.value, q.verified_digits)
        return SeriesPoint(r, phi_from_tv(t, r, vol), t.verified_digits)
    except QtvError as exc:
        return SeriesPoint(r, None, 0, f"{type(exc).__name__}: {exc}")


def iter_series(
    ct: ColoredTriangulation,
    r_list: Iterable[int],
    kind: str = "qv",
    *,
    vol: float | None = None,
    digits: int = DEFAULT_DIGITS,
    max_prec: int = DEFAULT_MAX_PREC,
    threads: int = 1,
    workers: int = 1,
) -> Iterator[SeriesPoint]:
    """Yield one point per r, in increasing r, as each is computed.

    A failing point is yielded with its error message instead of aborting.
    ``workers`` evaluates several levels concurrently; output order is kept.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if kind == "phi" and vol is None:
        raise ValueError("phi needs a reference volume")
    rs = sorted(set(r_list))
    if workers <= 1:
        for r in rs:
            yield _point(ct, r, kind, vol, digits, max_prec, threads)
        return
    with ThreadPoolExecutor(max_workers=workers) as ex:
        yield from ex.map(lambda r: _point(ct, r, kind, vol, digits, max_prec, threads), rs)


def series(ct: ColoredTriangulation, r_list: Iterable[int], kind: str = "qv", **kw) -> Series:
    s = Series(f"{kind}:{ct.name}")
    s.points.extend(iter_series(ct, r_list, kind, **kw))
    return s


def fit_logline(points: Iterable, n_excluded: int = 0) -> FitResult:
    """Ordinary least squares of Phi_r against ln(r - 2) over ``(r, phi)`` pairs."""
    pts = [(int(r), float(v)) for r, v in points]
    if len(pts) < 2:
        raise DegenerateFit(f"need at least 2 points, got {len(pts)}")
    xs = [math.log(r - 2) for r, _ in pts]
    ys = [v for _, v in pts]
    if len(set(xs)) < 2:
        raise DegenerateFit("all abscissae coincide")
    slope, intercept = statistics.linear_regression(xs, ys)
    rms = math.sqrt(sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys)) / len(xs))
    return FitResult(slope, intercept, rms, len(pts), n_excluded)


def fit_series(s: Series) -> FitResult:
    """Fit the successful points of a phi series, reporting how many were dropped."""
    ok = s.ok_points()
    return fit_logline([(p.r, p.value) for p in ok], s.n_failed)
