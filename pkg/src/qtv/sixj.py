"""Admissibility, Delta, weights and the quantum 6j-symbol.

Colors are carried as *twice-colors*: the half-integer ``c`` in
I_r = {0, 1/2, ..., (r-2)/2} is stored as the integer ``2c`` in ``0..r-2``, so
every index computation below is exact integer arithmetic.

A 6j-symbol at a root of unity is always real or purely imaginary, so the
internal representation is a pair ``(x, e)`` meaning ``x * i**e`` with ``x``
a real mpfr and ``e`` in ``0..3``.  The public :func:`sixj` converts to mpc.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from operator import itemgetter
from typing import Iterator

import gmpy2
from gmpy2 import mpc, mpfr

from .arith import QtvError, RootSpec, signed_sqrt

Color = int  # twice the half-integer color
SixTuple = tuple  # (i, j, k, l, m, n) of twice-colors


class InadmissibleInput(QtvError, ValueError):
    pass


class InadmissibleTriple(InadmissibleInput):
    pass


class InadmissibleSixTuple(InadmissibleInput):
    pass


def to_twice(c) -> Color:
    """Twice-color of a half-integer given as int, Fraction, float or ``"a/2"`` string."""
    v = Fraction(c) * 2
    if v.denominator != 1:
        raise ValueError(f"{c!r} is not a half-integer")
    return int(v)


def from_twice(c: Color) -> Fraction:
    return Fraction(c, 2)


# Positional symmetries of |i j k; l m n| stated for these 6j-symbols, as index
# maps new[t] = old[perm[t]].
GENERATORS = (
    (1, 0, 2, 4, 3, 5),  # |j i k; m l n|
    (0, 2, 1, 3, 5, 4),  # |i k j; l n m|
    (0, 4, 5, 3, 1, 2),  # |i m n; l j k|
    (3, 4, 2, 0, 1, 5),  # |l m k; i j n|
    (3, 1, 5, 0, 4, 2),  # |l j n; i m k|
)


def _closure(generators) -> tuple:
    group = {tuple(range(6))}
    frontier = list(group)
    while frontier:
        nxt = []
        for p in frontier:
            for g in generators:
                comp = tuple(p[g[t]] for t in range(6))
                if comp not in group:
                    group.add(comp)
                    nxt.append(comp)
        frontier = nxt
    return tuple(sorted(group))


SYMMETRY_GROUP = _closure(GENERATORS)
# group elements indexed by the slot they move to the front
_BY_FIRST = tuple(tuple(itemgetter(*p) for p in SYMMETRY_GROUP if p[0] == s) for s in range(6))


def apply_symmetry(st: SixTuple, perm) -> SixTuple:
    return tuple(st[p] for p in perm)


def canonical_key(st: SixTuple) -> SixTuple:
    """Lexicographically least member of the symmetry orbit of ``st``."""
    m = min(st)
    # only images starting with the smallest color can be minimal
    return min([g(st) for s in range(6) if st[s] == m for g in _BY_FIRST[s]])


def faces(st: SixTuple):
    """The four face triples (i,j,k), (j,l,n), (i,m,n), (k,l,m)."""
    i, j, k, l, m, n = st
    return ((i, j, k), (j, l, n), (i, m, n), (k, l, m))


def is_admissible_triple(a: Color, b: Color, c: Color, r: int) -> bool:
    """Triangle inequalities, integral sum and a + b + c <= r - 2 (in half-integers)."""
    s = a + b + c
    return (
        a + b >= c
        and b + c >= a
        and c + a >= b
        and s % 2 == 0
        and s <= 2 * (r - 2)
        and min(a, b, c) >= 0
    )


def is_admissible(st: SixTuple, r: int) -> bool:
    i, j, k, l, m, n = st
    return (
        is_admissible_triple(i, j, k, r)
        and is_admissible_triple(j, l, n, r)
        and is_admissible_triple(i, m, n, r)
        and is_admissible_triple(k, l, m, r)
    )


def weight(c: Color, root: RootSpec) -> mpfr:
    """w_c = (-1)^(2c) [2c + 1]."""
    return root.weights[c]


def delta(a: Color, b: Color, c: Color, root: RootSpec) -> mpc:
    """Delta(a, b, c), purely real or purely imaginary by the signed square root."""
    if not is_admissible_triple(a, b, c, root.r):
        raise InadmissibleTriple(f"triple {(a, b, c)} is not admissible at r={root.r}")
    f = root.fact
    with root.context():
        x = f[(a + b - c) // 2] * f[(b + c - a) // 2] * f[(c + a - b) // 2] / f[(a + b + c) // 2 + 1]
        return signed_sqrt(x)


def _polar(st: SixTuple, root: RootSpec):
    # Formula evaluation in the caller's context; returns (x, e) with value x * i**e.
    i, j, k, l, m, n = st
    f = root.fact
    inv = root.invfact
    e = -(i + j + k + l + m + n)
    radicand = mpfr(1)
    ts = []
    for a, b, c in ((i, j, k), (j, l, n), (i, m, n), (k, l, m)):
        x = f[(a + b - c) >> 1] * f[(b + c - a) >> 1] * f[(c + a - b) >> 1] * inv[((a + b + c) >> 1) + 1]
        if x < 0:
            e += 1
            x = -x
        radicand *= x
        ts.append((a + b + c) >> 1)
    t1, t2, t3, t4 = ts
    q1 = (i + j + l + m) >> 1
    q2 = (i + k + l + n) >> 1
    q3 = (j + k + m + n) >> 1
    zlo = max(ts)
    zhi = min(q1, q2, q3)
    total = mpfr(0)
    for z in range(zlo, zhi + 1):
        term = (
            f[z + 1]
            * inv[z - t1]
            * inv[z - t2]
            * inv[z - t3]
            * inv[z - t4]
            * inv[q1 - z]
            * inv[q2 - z]
            * inv[q3 - z]
        )
        if z & 1:
            total -= term
        else:
            total += term
    return gmpy2.sqrt(radicand) * total, e % 4


def polar_cached(st: SixTuple, root: RootSpec, cache: dict | None = None):
    """Memoized ``(x, e)`` form of the 6j-symbol; caller must hold ``root.context()``.

    The value is always computed from the canonical representative, so cached
    and uncached results are bit-identical.
    """
    key = canonical_key(st)
    if cache is None:
        cache = root.sixj_cache
    v = cache.get(key)
    if v is None:
        v = _polar(key, root)
        cache[key] = v
    return v


_UNIT = ((1, 0), (0, 1), (-1, 0), (0, -1))


def polar_to_mpc(x, e: int) -> mpc:
    re, im = _UNIT[e % 4]
    return mpc(x * re, x * im)


def evaluate_sixj(st: SixTuple, root: RootSpec) -> mpc:
    """The 6j-symbol from the defining formula applied to ``st`` as given.

    No canonicalization and no cache: this is the path used to check the
    symmetries themselves.
    """
    st = tuple(st)
    if not is_admissible(st, root.r):
        raise InadmissibleSixTuple(f"6-tuple {st} is not admissible at r={root.r}")
    with root.context():
        return polar_to_mpc(*_polar(st, root))


def sixj(st: SixTuple, root: RootSpec, use_cache: bool = True) -> mpc:
    """Quantum 6j-symbol |i j k; l m n| of an admissible 6-tuple of twice-colors."""
    st = tuple(st)
    if not is_admissible(st, root.r):
        raise InadmissibleSixTuple(f"6-tuple {st} is not admissible at r={root.r}")
    with root.context():
        if use_cache:
            x, e = polar_cached(st, root)
        else:
            x, e = _polar(canonical_key(st), root)
        return polar_to_mpc(x, e)


# ---------------------------------------------------------------------------
# identity checkers


def check_orthogonality(i, j, k, l, m, n, root: RootSpec) -> mpfr:
    """|sum_s w_s w_m |i j m; k l s| |i j n; k l s| - delta_mn|."""
    r = root.r
    for tri in ((i, j, m), (i, j, n), (k, l, m), (k, l, n)):
        if not is_admissible_triple(*tri, r):
            raise InadmissibleInput(f"triple {tri} is not admissible at r={r}")
    with root.context():
        terms = []
        for s in range(r - 1):
            a = (i, j, m, k, l, s)
            b = (i, j, n, k, l, s)
            if is_admissible(a, r) and is_admissible(b, r):
                xa, ea = polar_cached(a, root)
                xb, eb = polar_cached(b, root)
                terms.append(polar_to_mpc(root.weights[s] * root.weights[m] * xa * xb, ea + eb))
        total = _csum(terms)
        if m == n:
            total -= 1
        return abs(total)


def check_biedenharn_elliot(i, j, k, l, m, n, o, p, q, root: RootSpec) -> mpfr:
    """|sum_s w_s |i j q; m l s| |j k o; n m s| |k i p; l n s| - |o p q; i j k| |o p q; l m n||."""
    r = root.r
    lhs_a = (o, p, q, i, j, k)
    lhs_b = (o, p, q, l, m, n)
    for st in (lhs_a, lhs_b):
        if not is_admissible(st, r):
            raise InadmissibleInput(f"6-tuple {st} is not admissible at r={r}")
    with root.context():
        terms = []
        for s in range(r - 1):
            t1 = (i, j, q, m, l, s)
            t2 = (j, k, o, n, m, s)
            t3 = (k, i, p, l, n, s)
            if is_admissible(t1, r) and is_admissible(t2, r) and is_admissible(t3, r):
                x1, e1 = polar_cached(t1, root)
                x2, e2 = polar_cached(t2, root)
                x3, e3 = polar_cached(t3, root)
                terms.append(polar_to_mpc(root.weights[s] * x1 * x2 * x3, e1 + e2 + e3))
        xa, ea = polar_cached(lhs_a, root)
        xb, eb = polar_cached(lhs_b, root)
        return abs(_csum(terms) - polar_to_mpc(xa * xb, ea + eb))


def _csum(terms) -> mpc:
    re = gmpy2.fsum(t.real for t in terms) if terms else mpfr(0)
    im = gmpy2.fsum(t.imag for t in terms) if terms else mpfr(0)
    return mpc(re, im)


# ---------------------------------------------------------------------------
# enumeration of checker inputs


def admissible_triples(r: int) -> list:
    cs = range(r - 1)
    return [t for t in itertools.product(cs, repeat=3) if is_admissible_triple(*t, r)]


def admissible_sixtuples(r: int) -> Iterator[SixTuple]:
    """Every admissible 6-tuple at level r, in lexicographic order."""
    cs = range(r - 1)
    for i, j, k in itertools.product(cs, repeat=3):
        if not is_admissible_triple(i, j, k, r):
            continue
        for l, m in itertools.product(cs, repeat=2):
            if not is_admissible_triple(k, l, m, r):
                continue
            for n in cs:
                if is_admissible_triple(j, l, n, r) and is_admissible_triple(i, m, n, r):
                    yield (i, j, k, l, m, n)


def orthogonality_inputs(r: int) -> Iterator[tuple]:
    """All (i, j, k, l, m, n) with (i,j,m), (i,j,n), (k,l,m), (k,l,n) admissible."""
    cs = range(r - 1)
    for i, j, k, l in itertools.product(cs, repeat=4):
        ms = [m for m in cs if is_admissible_triple(i, j, m, r) and is_admissible_triple(k, l, m, r)]
        for m in ms:
            for n in ms:
                yield (i, j, k, l, m, n)


def biedenharn_elliot_inputs(r: int) -> Iterator[tuple]:
    """All (i, j, k, l, m, n, o, p, q) with (o,p,q,i,j,k) and (o,p,q,l,m,n) admissible."""
    by_head: dict = {}
    for st in admissible_sixtuples(r):
        by_head.setdefault(st[:3], []).append(st[3:])
    for (o, p, q), tails in by_head.items():
        for ijk in tails:
            for lmn in tails:
                yield (*ijk, *lmn, o, p, q)


def random_orthogonality_input(r: int, rng: random.Random) -> tuple:
    while True:
        i, j, k, l = (rng.randrange(r - 1) for _ in range(4))
        ms = [m for m in range(r - 1) if is_admissible_triple(i, j, m, r) and is_admissible_triple(k, l, m, r)]
        if ms:
            return (i, j, k, l, rng.choice(ms), rng.choice(ms))


def random_biedenharn_elliot_input(r: int, rng: random.Random) -> tuple:
    cs = range(r - 1)
    while True:
        o, p, q = (rng.randrange(r - 1) for _ in range(3))
        if not is_admissible_triple(o, p, q, r):
            continue
        tails = [
            (a, b, c)
            for a, b, c in itertools.product(cs, repeat=3)
            if is_admissible((o, p, q, a, b, c), r)
        ]
        if tails:
            ijk = rng.choice(tails)
            lmn = rng.choice(tails)
            return (*ijk, *lmn, o, p, q)
