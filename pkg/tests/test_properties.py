from __future__ import annotations

import math

import gmpy2
from gmpy2 import mpfr
from hypothesis import given, settings
from hypothesis import strategies as st

from qtv.arith import context, make_root
from qtv.asym import fit_logline
from qtv.cli import parse_r_spec
from qtv.jones import reduce_im
from qtv.sixj import (
    SYMMETRY_GROUP,
    admissible_sixtuples,
    apply_symmetry,
    canonical_key,
    evaluate_sixj,
    is_admissible_triple,
    sixj,
)
from qtv.statesum import tv_fixed
from qtv.tri import ColoredTriangulation, parse, serialize, structural_hash

SETTINGS = settings(max_examples=60, deadline=None)


@st.composite
def roots(draw, rmax=16):
    r = draw(st.integers(3, rmax))
    k = draw(st.integers(1, 2 * r - 1).filter(lambda k: math.gcd(k, r) == 1))
    return r, k


_TUPLES: dict = {}


@st.composite
def admissible_tuples(draw):
    r, k = draw(roots())
    if r not in _TUPLES:
        _TUPLES[r] = list(admissible_sixtuples(r))
    return r, k, draw(st.sampled_from(_TUPLES[r]))


@st.composite
def triangulations(draw):
    e = draw(st.integers(1, 4))
    n = draw(st.integers(1, 3))
    tets = tuple(tuple(draw(st.integers(0, e - 1)) for _ in range(6)) for _ in range(n))
    name = draw(st.text(alphabet="abcxyz_-0123456789", max_size=8))
    return ColoredTriangulation(name, e, tets)


@SETTINGS
@given(st.tuples(*[st.integers(0, 12)] * 6), st.sampled_from(SYMMETRY_GROUP))
def test_canonical_key_is_orbit_invariant(t, perm):
    assert canonical_key(apply_symmetry(t, perm)) == canonical_key(t)
    assert canonical_key(t) <= t


@SETTINGS
@given(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20), st.integers(3, 24))
def test_triple_admissibility_is_symmetric(a, b, c, r):
    v = is_admissible_triple(a, b, c, r)
    assert all(is_admissible_triple(*p, r) == v for p in ((b, a, c), (c, b, a), (a, c, b)))


@SETTINGS
@given(admissible_tuples(), st.sampled_from(SYMMETRY_GROUP))
def test_sixj_tetrahedral_symmetry(data, perm):
    r, k, t = data
    root = make_root(r, k)
    with root.context():
        a = evaluate_sixj(t, root)
        b = evaluate_sixj(apply_symmetry(t, perm), root)
        assert abs(a - b) < mpfr("1e-40")


@SETTINGS
@given(admissible_tuples())
def test_sixj_real_or_imaginary(data):
    r, k, t = data
    v = sixj(t, make_root(r, k))
    assert gmpy2.is_zero(v.real) or gmpy2.is_zero(v.imag)


@SETTINGS
@given(admissible_tuples())
def test_cache_is_transparent(data):
    r, k, t = data
    root = make_root(r, k)
    assert sixj(t, root) == sixj(t, root, use_cache=False)
    assert sixj(t, root) == sixj(t, root)


@SETTINGS
@given(triangulations())
def test_serialize_parse_round_trip(ct):
    back = parse(serialize(ct))
    assert back.num_edge_classes == ct.num_edge_classes
    assert back.tets == ct.tets
    assert back.name == ct.name.strip()
    assert structural_hash(back) == structural_hash(ct)


@settings(max_examples=25, deadline=None)
@given(triangulations(), roots(rmax=9), st.integers(2, 5))
def test_state_sum_thread_independent(ct, rk, threads):
    r, k = rk
    one = tv_fixed(ct, make_root(r, k, 128), threads=1)
    many = tv_fixed(ct, make_root(r, k, 128), threads=threads)
    assert one == many


@SETTINGS
@given(
    st.floats(-3, 3, allow_nan=False),
    st.floats(-10, 10, allow_nan=False),
    st.lists(st.integers(5, 3000), min_size=2, max_size=8, unique=True),
)
def test_fit_recovers_exact_lines(slope, intercept, rs):
    pts = [(r, slope * math.log(r - 2) + intercept) for r in rs]
    fit = fit_logline(pts)
    assert abs(fit.slope - slope) < 1e-9
    assert abs(fit.intercept - intercept) < 1e-8
    assert fit.rms_residual < 1e-9


@SETTINGS
@given(st.integers(3, 500), st.integers(0, 60), st.integers(1, 7))
def test_r_ranges_are_inclusive(start, length, step):
    end = start + length
    got = parse_r_spec(f"{start}:{end}:{step}")
    assert got == list(range(start, end + 1, step))


@SETTINGS
@given(st.floats(-200, 200, allow_nan=False), st.one_of(st.none(), st.floats(-20, 20, allow_nan=False)))
def test_reduce_im_lands_in_window(x, center):
    with context(128):
        pi2 = gmpy2.const_pi() ** 2
        v = reduce_im(mpfr(x), center)
        lo = mpfr(0) if center is None else mpfr(center) - pi2 / 2
        assert lo <= v < lo + pi2 + mpfr("1e-30")
        turns = (mpfr(x) - v) / pi2
        assert abs(turns - gmpy2.rint(turns)) < mpfr("1e-25")
        assert abs(reduce_im(v, center) - v) < mpfr("1e-25")


@SETTINGS
@given(roots(rmax=40))
def test_quantum_integer_reflection(rk):
    r, k = rk
    root = make_root(r, k)
    with root.context():
        sign = (-1) ** (k + 1)
        for n in range(1, r):
            assert abs(root.qint[r - n] - sign * root.qint[n]) < mpfr("1e-60")
