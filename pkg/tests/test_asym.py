from __future__ import annotations

import math

import gmpy2
import pytest
from gmpy2 import mpfr

from qtv.arith import InvariantValue, LogOfZero, QtvError, context
from qtv.asym import (
    DegenerateFit,
    Series,
    SeriesPoint,
    fit_logline,
    fit_series,
    iter_series,
    phi,
    phi_from_tv,
    series,
)
from qtv.statesum import qv, tv
from qtv.tri import ColoredTriangulation, census


def _line(slope, intercept, rs):
    return [(r, slope * math.log(r - 2) + intercept) for r in rs]


def test_fit_exact_line():
    fit = fit_logline(_line(0.5, 1.0, [11, 21, 51, 101, 201]))
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(1.0, abs=1e-12)
    assert fit.rms_residual < 1e-12
    assert fit.n_points == 5 and fit.n_excluded == 0


def test_fit_negative_slope_with_noise():
    pts = _line(-1.5, 3.0, [51, 101, 201, 301, 401])
    pts = [(r, y + (0.01 if i % 2 else -0.01)) for i, (r, y) in enumerate(pts)]
    fit = fit_logline(pts)
    assert fit.slope == pytest.approx(-1.5, abs=0.05)
    assert 0 < fit.rms_residual < 0.02


def test_fit_degenerate():
    with pytest.raises(DegenerateFit):
        fit_logline([(11, 1.0)])
    with pytest.raises(DegenerateFit):
        fit_logline([(11, 1.0), (11, 2.0)])
    with pytest.raises(ValueError):
        fit_logline([])


def test_fit_series_skips_failed_points():
    s = Series("phi:x", [SeriesPoint(r, mpfr(y)) for r, y in _line(2.0, 0.0, [7, 9, 13])])
    s.points.append(SeriesPoint(15, None, 0, "PrecisionExhausted: cap"))
    fit = fit_series(s)
    assert fit.n_points == 3 and fit.n_excluded == 1
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert s.n_failed == 1 and len(s.ok_points()) == 3


@pytest.mark.parametrize(
    "name,rs,expected",
    [
        ("fig8", [11, 13, 15], [2.40661, 2.37755, 2.34826]),
        ("n21", [5, 7], [2.90345, 2.54929]),
        ("gieseking", [7], [1.81736]),
    ],
)
def test_series_examples(name, rs, expected):
    s = series(census(name)[0], rs, "qv")
    assert [p.r for p in s.points] == rs
    for p, e in zip(s.points, expected):
        assert p.ok
        assert abs(float(p.value.real) - e) < 1e-5


def test_series_orders_and_dedups():
    pts = list(iter_series(census("fig8")[0], [15, 11, 13, 11], "qv"))
    assert [p.r for p in pts] == [11, 13, 15]


def test_series_workers_match_sequential():
    ct, _ = census("k52")
    a = series(ct, [7, 9, 11, 13], "qv")
    b = series(ct, [7, 9, 11, 13], "qv", workers=3)
    assert [p.value for p in a.points] == [p.value for p in b.points]


def test_series_marks_failures_without_aborting():
    ct, meta = census("fig8")
    s = series(ct, [10, 11], "qv")
    assert not s.points[0].ok and "odd" in s.points[0].error
    assert s.points[1].ok
    # a cap too small to verify anything fails the point, not the series
    s = series(ct, [11, 13], "tv", max_prec=256)
    assert all(not p.ok and "PrecisionExhausted" in p.error for p in s.points)


def test_series_kind_validation():
    ct, _ = census("fig8")
    with pytest.raises(ValueError):
        list(iter_series(ct, [11], "jones"))
    with pytest.raises(ValueError):
        list(iter_series(ct, [11], "phi"))


def test_tv_series_values():
    ct, _ = census("hopf")
    s = series(ct, [3, 4, 5, 7], "tv")
    # the series runs at k=2, which is not a primitive root for even r
    assert "InvalidRoot" in s.points[1].error
    assert [round(float(p.value.real)) for p in s.ok_points()] == [2, 4, 6]


def test_phi_definition():
    ct, meta = census("fig8")
    r = 21
    t = tv(ct, (r, 2))
    v = phi(ct, r, meta.vol)
    with context(t.prec):
        expected = gmpy2.log(t.re) - (r - 2) * mpfr(meta.vol) / (2 * gmpy2.const_pi())
    assert abs(v - expected) < mpfr("1e-40")


def test_phi_vanishes_when_qv_equals_volume():
    # Phi_r = (r-2)/(2 pi) (QV_r - vol), so using QV_r as the volume gives 0
    ct, _ = census("fig8")
    r = 31
    q = qv(ct, r)
    v = phi(ct, r, float(q.re))
    assert abs(v) < 1e-12 * (r - 2)


def test_phi_uses_modulus_for_negative_tv():
    ct, meta = census("mmin")
    for r in range(11, 40, 2):
        t = tv(ct, (r, 2))
        if t.re < 0:
            v = phi_from_tv(t, r, meta.vol)
            with context(t.prec):
                assert abs(v - (gmpy2.log(-t.re) - (r - 2) * mpfr(meta.vol) / (2 * gmpy2.const_pi()))) < 1e-30
            break
    else:
        pytest.fail("expected a negative TV for mmin below r=40")


def test_phi_errors():
    ct, meta = census("fig8")
    with pytest.raises(QtvError):
        phi(ct, 20, meta.vol)
    with context(64):
        zero = InvariantValue(mpfr(0), mpfr(0), 64, 10)
    with pytest.raises(LogOfZero):
        phi_from_tv(zero, 11, 1.0)


@pytest.mark.parametrize("name", ["fig8", "k52", "gieseking", "n21"])
def test_qv_decreases_toward_volume(name):
    ct, meta = census(name)
    vals = [float(p.value.real) for p in series(ct, list(range(11, 42, 6)), "qv").points]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] > meta.vol


def test_fig8_expansion_residual_is_order_inverse_r():
    ct, meta = census("fig8")
    scaled = []
    for r in (101, 151, 201):
        x = float(qv(ct, r).re)
        scaled.append((x - meta.vol - math.pi * math.log(r - 2) / (r - 2)) * (r - 2))
    assert max(abs(s) for s in scaled) < 10
    assert max(scaled) - min(scaled) < 0.5


def test_series_values_finite():
    s = series(ColoredTriangulation("g", 1, ((0,) * 6,)), [7, 9], "qv")
    assert all(p.ok and gmpy2.is_finite(p.value.real) for p in s.points)
