from __future__ import annotations

import itertools
import math
from fractions import Fraction

import gmpy2
import mpmath
import pytest
from gmpy2 import mpfr

from qtv.arith import InvalidRoot, InvariantValue, LogOfZero, QtvError, context, make_root
from qtv.sixj import is_admissible
from qtv.statesum import (
    TooLarge,
    count_colorings,
    plan,
    qv,
    qv_from_tv,
    tv,
    tv_bruteforce,
    tv_fixed,
)
from qtv.tri import ColoredTriangulation, census

import _oracle


def _valid_ks(r, ks=(1, 2, 3)):
    return [k for k in ks if math.gcd(k, r) == 1 and k < 2 * r]


def _mp(x):
    return mpmath.mpf(str(x))


def test_unknot_is_one():
    ct, _ = census("unknot")
    for r in (3, 6, 11):
        for k in _valid_ks(r):
            v = tv(ct, make_root(r, k))
            assert abs(v.re - 1) < mpfr("1e-30")


def test_closed_form_examples():
    assert abs(tv(census("trefoil")[0], (5, 1)).re - 2) < mpfr("1e-30")
    for k in (1, 2):
        assert abs(tv(census("hopf")[0], (3, k)).re - 2) < mpfr("1e-30")
    assert abs(tv(census("t24")[0], (5, 1)).re - 6) < mpfr("1e-30")


def test_static_order_is_most_constrained_first():
    pl = plan(census("k61")[0])
    occ = census("k61")[0].occurrences()
    counts = [occ[c] for c in pl.order]
    assert counts == sorted(counts, reverse=True)
    assert sorted(pl.order) == [0, 1, 2, 3]


# ---------------------------------------------------------------------------
# hand-coded evaluations of the displayed census sums


def _w(a, r, k):
    return _oracle.weight(a, r, k)


def _six(st, r, k):
    return _oracle.sixj(*st, r, k)


def _ok(sts, r):
    return all(is_admissible(tuple(int(2 * c) for c in st), r) for st in sts)


def _displayed_sum(num, tuples_of, r, k):
    colors = [Fraction(c, 2) for c in range(r - 1)]
    total = mpmath.mpf(0)
    for col in itertools.product(colors, repeat=num):
        sts = tuples_of(*col)
        if not _ok(sts, r):
            continue
        term = mpmath.mpf(1)
        for c in col:
            term *= _w(c, r, k)
        for st in sts:
            term *= _six(st, r, k)
        total += term
    return total


DISPLAYED = {
    "fig8": (2, lambda a, b: [(a, b, a, a, b, b)] * 2),
    "k52": (3, lambda a, b, c: [(a, a, b, b, c, c)] * 2 + [(a, b, c, b, b, c)]),
    "m36": (3, lambda a, b, c: [(a, a, b, b, c, c)] * 2 + [(a, b, c, a, a, c)]),
    "k61": (
        4,
        lambda a, b, c, d: [(a, a, b, a, d, b), (a, c, c, b, b, d), (b, b, c, a, c, d), (b, b, c, b, d, c)],
    ),
    "gieseking": (1, lambda a: [(a,) * 6]),
    "n21": (2, lambda a, b: [(a, b, b, a, b, b)] * 2),
    "mmin": (1, lambda a: [(a,) * 6] * 2),
}


# the k61 brute sum over r-1 colors per edge is only run at small r
DISPLAYED_CASES = [
    (name, r, k)
    for name in sorted(DISPLAYED)
    for r, k in [(5, 2), (7, 2), (9, 2), (8, 3)]
    if name != "k61" or r <= 7
]


@pytest.mark.parametrize("name,r,k", DISPLAYED_CASES)
def test_census_matches_displayed_sum(name, r, k):
    num, tuples_of = DISPLAYED[name]
    ref = _displayed_sum(num, tuples_of, r, k)
    got = tv(census(name)[0], make_root(r, k), digits=30)
    assert abs(_mp(got.re) - ref) < mpmath.mpf(10) ** -40 * max(1, abs(ref))


@pytest.mark.parametrize("name", ["fig8", "gieseking", "n21", "hopf", "trefoil"])
@pytest.mark.parametrize("r,k", [(5, 1), (6, 1), (7, 3)])
def test_tv_matches_mpmath_bruteforce(name, r, k):
    ct, _ = census(name)
    ref = _oracle.tv(ct.tets, ct.num_edge_classes, r, k)
    got = tv(ct, make_root(r, k), digits=30)
    assert abs(_mp(got.re) - ref.real) < mpmath.mpf(10) ** -40
    assert abs(ref.imag) < mpmath.mpf(10) ** -40


def test_bruteforce_examples():
    fig8, _ = census("fig8")
    a = tv(fig8, make_root(5, 2))
    b = tv_bruteforce(fig8, make_root(5, 2))
    assert abs(a.re - b.re) < mpfr(10) ** -min(a.verified_digits, b.verified_digits)
    g, _ = census("gieseking")
    a = tv(g, make_root(7, 2))
    b = tv_bruteforce(g, make_root(7, 2))
    assert abs(a.re - b.re) < mpfr("1e-12")
    assert abs(tv_bruteforce(census("unknot")[0], make_root(3, 1)).re - 1) < mpfr("1e-30")


def test_bruteforce_too_large():
    big = ColoredTriangulation("big", 6, ((0, 1, 2, 3, 4, 5),))
    with pytest.raises(TooLarge):
        tv_bruteforce(big, make_root(5, 1))
    with pytest.raises(TooLarge):
        tv_bruteforce(census("fig8")[0], make_root(11, 1))


@pytest.mark.parametrize("name", ["fig8", "k52", "k61", "t26", "n21"])
@pytest.mark.parametrize("r", [5, 8, 11])
def test_count_colorings_matches_direct_count(name, r):
    ct, _ = census(name)
    direct = sum(
        1
        for col in itertools.product(range(r - 1), repeat=ct.num_edge_classes)
        if all(is_admissible(tuple(col[c] for c in t), r) for t in ct.tets)
    )
    assert count_colorings(ct, r) == direct


@pytest.mark.parametrize("name", ["fig8", "k52", "m36", "k61", "gieseking", "n21", "mmin", "t26"])
def test_realness(name):
    ct, _ = census(name)
    rs = (5, 9, 13) if name == "k61" else (5, 9, 17, 31)
    for r in rs:
        for k in _valid_ks(r):
            v = tv(ct, make_root(r, k))
            bound = mpfr(10) ** -v.verified_digits * max(mpfr(1), abs(v.re))
            assert abs(v.im) < bound
            assert v.verified_digits >= 12


def test_thread_count_bit_identical():
    ct, _ = census("k52")
    root = make_root(23, 2)
    one = tv_fixed(ct, root, threads=1)
    many = tv_fixed(ct, make_root(23, 2), threads=4)
    assert one == many


def test_tv_accepts_pair_and_validates_root():
    assert abs(tv(census("unknot")[0], (7, 2)).re - 1) < mpfr("1e-30")
    with pytest.raises(InvalidRoot):
        tv(census("unknot")[0], (6, 3))


def test_tv_even_r_allowed():
    v = tv(census("hopf")[0], (8, 1))
    assert abs(v.re - 7) < mpfr("1e-30")


@pytest.mark.parametrize(
    "name,r,expected",
    [("fig8", 11, "2.40661"), ("k52", 7, "3.38531"), ("k61", 5, "3.83348"), ("mmin", 11, "4.39782")],
)
def test_qv_spot_values(name, r, expected):
    v = qv(census(name)[0], r)
    assert abs(float(v.re) - float(expected)) < 1e-5


def test_qv_imaginary_part_is_zero_or_half_turn():
    for r in (7, 9, 11, 13, 15, 17, 19):
        v = qv(census("mmin")[0], r)
        with context(v.prec):
            half = 2 * gmpy2.const_pi() ** 2 / (r - 2)
            assert gmpy2.is_zero(v.im) or abs(v.im - half) < mpfr("1e-40")


def test_qv_rejects_even_r():
    with pytest.raises(QtvError):
        qv(census("fig8")[0], 10)


def test_qv_log_of_zero():
    with context(128):
        zero = InvariantValue(mpfr(0), mpfr(0), 128, 20)
        tiny = InvariantValue(mpfr("1e-30"), mpfr(0), 128, 20)
    with pytest.raises(LogOfZero):
        qv_from_tv(zero, 11)
    with pytest.raises(LogOfZero):
        qv_from_tv(tiny, 11)


def test_requested_digits_are_met():
    v = tv(census("fig8")[0], make_root(41, 2), digits=40)
    assert v.verified_digits >= 40
    assert v.prec >= 256
