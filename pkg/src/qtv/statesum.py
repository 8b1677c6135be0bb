"""The Turaev-Viro state sum over admissible edge colorings.

The enumerator assigns twice-colors to edge classes in a static order
(most-occurring class first).  Every face triple is attached to the depth at
which its last class is colored; at that depth admissibility of the triple is
an interval plus a parity condition on the new color, so candidates are
generated directly as an arithmetic progression and no coloring is ever
rejected after the fact.  Tetrahedron weights are multiplied in as soon as
their six edges are colored.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .arith import (
    DEFAULT_DIGITS,
    DEFAULT_MAX_PREC,
    InvariantValue,
    LogOfZero,
    PrecisionExhausted,
    QtvError,
    RootSpec,
    context,
    default_precision,
    principal_log,
    refine,
)
from .sixj import evaluate_sixj, is_admissible, polar_cached
from .tri import ColoredTriangulation

BRUTEFORCE_MAX_EDGES = 5
BRUTEFORCE_MAX_R = 9


class TooLarge(QtvError, ValueError):
    pass


def root_at(r: int, k: int, prec: int) -> RootSpec:
    """A fresh RootSpec, so each precision level owns (and frees) its 6j cache."""
    return RootSpec(r, k, prec)


@dataclass(frozen=True)
class _Plan:
    order: tuple  # edge classes in assignment order
    constraints: tuple  # per depth: tuple of (multiplicity, other classes)
    tets: tuple  # per depth: tets completed at that depth


def _faces(t):
    c12, c13, c23, c34, c24, c14 = t
    return ((c12, c13, c23), (c13, c34, c14), (c12, c24, c14), (c23, c34, c24))


def plan(ct: ColoredTriangulation) -> _Plan:
    """Static assignment order and the constraints released at each depth."""
    occ = ct.occurrences()
    used = [c for c in range(ct.num_edge_classes) if occ[c] > 0]
    order = tuple(sorted(used, key=lambda c: (-occ[c], c)))
    pos = {c: d for d, c in enumerate(order)}
    triples = set()
    for t in ct.tets:
        for f in _faces(t):
            triples.add(tuple(sorted(f)))
    cons = [[] for _ in order]
    for tri in sorted(triples):
        d = max(pos[c] for c in tri)
        x = order[d]
        others = tuple(c for c in tri if c != x)
        cons[d].append((3 - len(others), others))
    tets = [[] for _ in order]
    for t in ct.tets:
        tets[max(pos[c] for c in t)].append(t)
    return _Plan(order, tuple(map(tuple, cons)), tuple(map(tuple, tets)))


def _candidates(constraints, colors, r):
    # Colors x making every released triple admissible; None when empty.
    lo, hi = 0, r - 2
    parity = None
    top = 2 * (r - 2)
    for mult, others in constraints:
        if mult == 1:
            u, v = colors[others[0]], colors[others[1]]
            lo = max(lo, abs(u - v))
            hi = min(hi, u + v, top - u - v)
            p = (u + v) & 1
        elif mult == 2:
            u = colors[others[0]]
            if u & 1:
                return None
            lo = max(lo, u >> 1)
            hi = min(hi, (top - u) >> 1)
            p = None
        else:
            hi = min(hi, top // 3)
            p = 0
        if p is not None:
            if parity is None:
                parity = p
            elif parity != p:
                return None
    if parity is None:
        return range(lo, hi + 1)
    if (lo & 1) != parity:
        lo += 1
    return range(lo, hi + 1, 2)


def _enumerate(pl: _Plan, root: RootSpec, first_colors, num_classes: int):
    """Terms of the state sum with the first class restricted to ``first_colors``.

    Returns four lists, the contributions along 1, i, -1, -i.  Must run inside
    ``root.context()``.
    """
    r = root.r
    weights = root.weights
    cache = root.sixj_cache
    local: dict = {}
    buckets = ([], [], [], [])
    colors = [0] * num_classes
    order, cons, tets = pl.order, pl.constraints, pl.tets
    depth_max = len(order)

    def tet_factor(t, x, e):
        for tt in t:
            st = (
                colors[tt[0]],
                colors[tt[1]],
                colors[tt[2]],
                colors[tt[3]],
                colors[tt[4]],
                colors[tt[5]],
            )
            v = local.get(st)
            if v is None:
                v = polar_cached(st, root, cache)
                local[st] = v
            if not v[0]:
                return None, 0
            x = x * v[0]
            e += v[1]
        return x, e

    def rec(d, x, e):
        cls = order[d]
        cand = _candidates(cons[d], colors, r) if d else first_colors
        if cand is None:
            return
        last = d + 1 == depth_max
        for c in cand:
            if d == 0 and not _first_ok(cons[0], c, r):
                continue
            colors[cls] = c
            y, f = tet_factor(tets[d], x * weights[c], e)
            if y is None:
                continue
            if last:
                buckets[f & 3].append(y)
            else:
                rec(d + 1, y, f)

    rec(0, mpfr(1), 0)
    return buckets


def _first_ok(constraints, c, r):
    # Triples made of the first class alone: (x,x,x) only.
    for mult, _ in constraints:
        if mult == 3 and (c & 1 or 3 * c > 2 * (r - 2)):
            return False
    return True


def _reduce(parts) -> mpc:
    b0, b1, b2, b3 = ([], [], [], [])
    for p in parts:
        b0.extend(p[0])
        b1.extend(p[1])
        b2.extend(p[2])
        b3.extend(p[3])
    # fsum is correctly rounded, hence independent of term order and partitioning
    re = gmpy2.fsum(b0 + [-v for v in b2]) if b0 or b2 else mpfr(0)
    im = gmpy2.fsum(b1 + [-v for v in b3]) if b1 or b3 else mpfr(0)
    return mpc(re, im)


def tv_fixed(ct: ColoredTriangulation, root: RootSpec, threads: int = 1) -> mpc:
    """TV_r at the single working precision of ``root``, no refinement."""
    pl = plan(ct)
    r = root.r
    first = range(r - 1)
    if threads <= 1:
        with root.context():
            return _reduce([_enumerate(pl, root, first, ct.num_edge_classes)])

    def job(c):
        with root.context():
            return _enumerate(pl, root, (c,), ct.num_edge_classes)

    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(job, first))
    with root.context():
        return _reduce(parts)


def _finish(value: mpc, prec: int, vd: int) -> InvariantValue:
    # The imaginary part of TV vanishes exactly, so its residual bounds the digits we claim.
    with context(prec):
        re, im = value.real, value.imag
        if not gmpy2.is_zero(im):
            scale = max(mpfr(1), abs(re))
            bound = int(gmpy2.floor(-gmpy2.log10(abs(im) / scale)))
            vd = max(0, min(vd, bound))
    return InvariantValue(re, im, prec, vd)


def tv(
    ct: ColoredTriangulation,
    root: RootSpec | tuple,
    *,
    digits: int = DEFAULT_DIGITS,
    max_prec: int = DEFAULT_MAX_PREC,
    threads: int = 1,
) -> InvariantValue:
    """TV_r(M; q) with adaptive precision.

    ``root`` is a RootSpec (its precision is the starting level) or an
    ``(r, k)`` pair started at the default precision.
    """
    if isinstance(root, RootSpec):
        r, k, prec = root.r, root.k, root.prec
    else:
        r, k = root
        prec = default_precision()
        RootSpec(r, k, 53)  # validate before any heavy work

    def compute(p):
        return tv_fixed(ct, root_at(r, k, p), threads)

    value, p, vd = refine(compute, prec, digits, max_prec)
    return _finish(value, p, vd)


def tv_bruteforce(
    ct: ColoredTriangulation,
    root: RootSpec,
    *,
    digits: int = DEFAULT_DIGITS,
    max_prec: int = DEFAULT_MAX_PREC,
) -> InvariantValue:
    """Independent oracle: every coloring in I_r^E, no pruning, no 6j cache."""
    if ct.num_edge_classes > BRUTEFORCE_MAX_EDGES or root.r > BRUTEFORCE_MAX_R:
        raise TooLarge(
            f"brute force needs E <= {BRUTEFORCE_MAX_EDGES} and r <= {BRUTEFORCE_MAX_R},"
            f" got E={ct.num_edge_classes}, r={root.r}"
        )
    r = root.r

    def compute(p):
        rt = RootSpec(r, root.k, p)
        total = mpc(0)
        with rt.context():
            total = mpc(0)
            for col in itertools.product(range(r - 1), repeat=ct.num_edge_classes):
                sts = [tuple(col[c] for c in t) for t in ct.tets]
                if not all(is_admissible(st, r) for st in sts):
                    continue
                term = mpc(1)
                for c in col:
                    term *= rt.weights[c]
                for st in sts:
                    term *= evaluate_sixj(st, rt)
                total += term
        return total

    value, p, vd = refine(compute, root.prec, digits, max_prec)
    return _finish(value, p, vd)


def count_colorings(ct: ColoredTriangulation, r: int) -> int:
    """Size of A_r(M, T), via the pruned enumerator's candidate generation."""
    pl = plan(ct)
    colors = [0] * ct.num_edge_classes

    def rec(d):
        cand = _candidates(pl.constraints[d], colors, r) if d else range(r - 1)
        if cand is None:
            return 0
        n = 0
        for c in cand:
            if d == 0 and not _first_ok(pl.constraints[0], c, r):
                continue
            colors[pl.order[d]] = c
            n += 1 if d + 1 == len(pl.order) else rec(d + 1)
        return n

    return rec(0)


def qv(
    ct: ColoredTriangulation,
    r: int,
    *,
    digits: int = DEFAULT_DIGITS,
    max_prec: int = DEFAULT_MAX_PREC,
    threads: int = 1,
    prec: int | None = None,
) -> InvariantValue:
    """QV_r = 2*pi/(r-2) * log TV_r(M; exp(2*pi*i/r)), the argument taken in [0, 2*pi)."""
    if r % 2 == 0 or r < 3:
        raise QtvError(f"QV_r needs odd r >= 3, got {r}")
    p = default_precision() if prec is None else prec
    t = tv(ct, root_at(r, 2, p), digits=digits, max_prec=max_prec, threads=threads)
    return qv_from_tv(t, r)


def qv_from_tv(t: InvariantValue, r: int) -> InvariantValue:
    with context(t.prec):
        re = t.re
        if gmpy2.is_zero(re) or abs(re) < gmpy2.exp10(-t.verified_digits) * max(1, abs(re)):
            raise LogOfZero(f"TV_{r} vanishes to the verified precision")
        lg = principal_log(mpc(re, 0))
        scale = 2 * gmpy2.const_pi() / (r - 2)
        return InvariantValue(lg.real * scale, lg.imag * scale, t.prec, t.verified_digits)


__all__ = [
    "TooLarge",
    "PrecisionExhausted",
    "count_colorings",
    "plan",
    "qv",
    "qv_from_tv",
    "root_at",
    "tv",
    "tv_bruteforce",
    "tv_fixed",
]
