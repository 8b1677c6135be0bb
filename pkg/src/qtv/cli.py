"""Command-line interface ``qtv``.

Subcommands: ``tv``, ``qv``, ``rt``, ``verify`` and ``fit``.  Exit status is 0
when every record succeeded, 2 when some records failed and 1 on a
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import random
import sys
import tempfile
import time
from typing import Optional, Sequence

import gmpy2

from . import __version__
from .arith import (
    DEFAULT_DIGITS,
    DEFAULT_MAX_PREC,
    InvalidRoot,
    LogOfZero,
    PrecisionExhausted,
    QtvError,
    RootSpec,
    default_precision,
)
from .asym import DegenerateFit, fit_series, series
from .jones import SURGERY_TARGETS, InvalidSurgery, SurgerySpec, qr
from .sixj import (
    GENERATORS,
    admissible_sixtuples,
    apply_symmetry,
    biedenharn_elliot_inputs,
    check_biedenharn_elliot,
    check_orthogonality,
    evaluate_sixj,
    is_admissible,
    is_admissible_triple,
    orthogonality_inputs,
    random_biedenharn_elliot_input,
    random_orthogonality_input,
)
from .statesum import qv_from_tv, tv
from .tri import CENSUS_NAMES, census, parse, structural_hash

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2

TV_FIELDS = ["r", "k", "tv_re", "tv_im_residual", "qv_re", "qv_im", "verified_digits", "elapsed_ms", "error"]
RT_FIELDS = [
    "r",
    "knot",
    "p",
    "qr_re",
    "qr_im",
    "qr_im_raw",
    "target_vol",
    "target_cs",
    "verified_digits",
    "elapsed_ms",
    "error",
]
VERIFY_FIELDS = ["identity", "r", "k", "n_inputs", "max_residual", "threshold", "passed"]
FIT_FIELDS = ["manifold", "vol", "slope", "intercept", "rms_residual", "n_points", "n_excluded", "elapsed_ms"]


class ConfigError(QtvError):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# argument helpers


def parse_r_spec(text: str) -> list:
    """``51``, ``11,13,15`` or ``start:end[:step]`` (end included when hit), comma-joinable."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ":" in part:
                bits = [int(b) for b in part.split(":")]
                if len(bits) == 2:
                    bits.append(1)
                if len(bits) != 3 or bits[2] <= 0:
                    raise ValueError
                start, end, step = bits
                out.extend(range(start, end + 1, step))
            else:
                out.append(int(part))
        except ValueError:
            raise ConfigError(f"bad r specification {part!r}") from None
    if not out:
        raise ConfigError(f"r specification {text!r} is empty")
    for r in out:
        if r < 3:
            raise ConfigError(f"r must be >= 3, got {r}")
    return out


def fmt(x, digits: int) -> str:
    """``x`` with ``digits`` significant digits; exact zero prints as 0."""
    if x is None:
        return ""
    if gmpy2.is_zero(x):
        return "0"
    digits = max(digits, 1)
    s = format(x, f".{digits}g")
    if "e" not in s and "." in s:
        s = s.rstrip("0").rstrip(".")
    return s


def fmt_residual(x) -> str:
    if gmpy2.is_zero(x):
        return "0"
    return format(x, ".3g")


def load_manifold(args):
    if args.census:
        ct, meta = census(args.census)
        return ct, meta
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.file}: {exc.strerror}") from None
    return parse(text), None


# ---------------------------------------------------------------------------
# output


class Writer:
    """Emits records as csv, json or text; csv and text stream line by line."""

    def __init__(self, fields, fmt_name, stream):
        self.fields = fields
        self.fmt = fmt_name
        self.stream = stream
        self.records = []
        if fmt_name == "csv":
            self._csv = csv.DictWriter(stream, fieldnames=fields, lineterminator="\n")
            self._csv.writeheader()
            stream.flush()

    def write(self, rec: dict):
        rec = {f: rec.get(f, "") for f in self.fields}
        if self.fmt == "csv":
            self._csv.writerow({k: "" if v is None else v for k, v in rec.items()})
            self.stream.flush()
        elif self.fmt == "text":
            shown = [f"{k}={v}" for k, v in rec.items() if v not in ("", None)]
            self.stream.write(" ".join(shown) + "\n")
            self.stream.flush()
        else:
            self.records.append(rec)

    def close(self):
        if self.fmt == "json":
            json.dump(self.records, self.stream, indent=2)
            self.stream.write("\n")
            self.stream.flush()


class ResultCache:
    """One JSON document per key in a user-managed directory."""

    def __init__(self, directory: str | None):
        self.dir = directory
        self.hits = 0
        self.misses = 0
        if directory:
            os.makedirs(directory, exist_ok=True)

    @staticmethod
    def key(*parts) -> str:
        return hashlib.sha256(json.dumps(parts, sort_keys=True).encode()).hexdigest()

    def get(self, key: str):
        if not self.dir:
            return None
        path = os.path.join(self.dir, key + ".json")
        try:
            with open(path, encoding="utf-8") as fh:
                rec = json.load(fh)
        except (OSError, ValueError):
            self.misses += 1
            return None
        self.hits += 1
        return rec

    def put(self, key: str, rec: dict):
        if not self.dir:
            return
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(rec, fh, sort_keys=True)
            os.replace(tmp, os.path.join(self.dir, key + ".json"))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def report(self):
        if self.dir:
            print(f"cache: {self.hits} hits, {self.misses} misses", file=sys.stderr)


def _elapsed(t0, args):
    return None if args.no_timing else int(round((time.perf_counter() - t0) * 1000))


def _run_records(args, fields, items, compute, key_of):
    """Drive ``compute`` over ``items`` with caching; returns the exit status."""
    cache = ResultCache(args.cache)
    out = Writer(fields, args.format, sys.stdout)
    failed = 0
    for item in items:
        t0 = time.perf_counter()
        key = key_of(item)
        rec = cache.get(key)
        if rec is None:
            rec = compute(item)
            if not rec.get("error"):
                cache.put(key, rec)
        rec = dict(rec)
        rec["elapsed_ms"] = _elapsed(t0, args)
        if rec.get("error"):
            failed += 1
        out.write(rec)
    out.close()
    cache.report()
    return EXIT_PARTIAL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# commands


def _tv_record(ct, r, k, args, with_qv):
    rec = {"r": r, "k": k}
    try:
        t = tv(
            ct,
            RootSpec(r, k, args.prec),
            digits=args.digits,
            max_prec=args.max_prec,
            threads=args.threads,
        )
    except InvalidRoot as exc:
        rec["error"] = f"InvalidRoot: {exc}"
        return rec
    except PrecisionExhausted as exc:
        rec["error"] = f"PrecisionExhausted: {exc} ({exc.verified_digits} digits verified)"
        rec["verified_digits"] = exc.verified_digits
        return rec
    nd = min(t.verified_digits, args.digits)
    rec["tv_re"] = fmt(t.re, nd)
    rec["tv_im_residual"] = fmt_residual(abs(t.im))
    rec["verified_digits"] = t.verified_digits
    if with_qv and k == 2 and r % 2 == 1:
        try:
            q = qv_from_tv(t, r)
            rec["qv_re"] = fmt(q.re, nd)
            rec["qv_im"] = fmt(q.im, nd)
        except LogOfZero as exc:
            rec["error"] = f"LogOfZero: {exc}"
    return rec


def cmd_tv(args) -> int:
    ct, _ = load_manifold(args)
    rs = parse_r_spec(args.r)
    ident = structural_hash(ct)

    def key_of(r):
        return ResultCache.key("tv", ident, r, args.k, args.digits, args.prec, args.max_prec)

    return _run_records(args, TV_FIELDS, rs, lambda r: _tv_record(ct, r, args.k, args, True), key_of)


def cmd_qv(args) -> int:
    ct, _ = load_manifold(args)
    rs = parse_r_spec(args.r)
    even = [r for r in rs if r % 2 == 0]
    if even:
        raise ConfigError(f"qv needs odd r, got {', '.join(map(str, even))}")
    ident = structural_hash(ct)

    def key_of(r):
        return ResultCache.key("qv", ident, r, 2, args.digits, args.prec, args.max_prec)

    return _run_records(args, TV_FIELDS, rs, lambda r: _tv_record(ct, r, 2, args, True), key_of)


def cmd_rt(args) -> int:
    if args.p == 0:
        raise ConfigError("surgery coefficient p must be nonzero")
    rs = parse_r_spec(args.r)
    bad = [r for r in rs if r % 2 == 0 or r < 7]
    if bad:
        raise ConfigError(f"rt needs odd r >= 7, got {', '.join(map(str, bad))}")
    SurgerySpec(args.knot, args.p, rs[0])
    target = SURGERY_TARGETS.get((args.knot, args.p))
    if args.target_cs is not None:
        target = (args.target_vol if args.target_vol is not None else float("nan"), args.target_cs)

    def compute(r):
        rec = {"r": r, "knot": args.knot, "p": args.p}
        if target is not None:
            rec["target_vol"] = repr(target[0])
            rec["target_cs"] = repr(target[1])
        try:
            v = qr(args.knot, args.p, r, target=target, digits=args.digits, max_prec=args.max_prec, prec=args.prec)
        except PrecisionExhausted as exc:
            rec["error"] = f"PrecisionExhausted: {exc} ({exc.verified_digits} digits verified)"
            return rec
        except QtvError as exc:
            rec["error"] = f"{type(exc).__name__}: {exc}"
            return rec
        nd = min(v.verified_digits, args.digits)
        rec["qr_re"] = fmt(v.re, nd)
        rec["qr_im"] = fmt(v.im, nd)
        rec["qr_im_raw"] = fmt(v.im_raw, nd)
        rec["verified_digits"] = v.verified_digits
        return rec

    def key_of(r):
        return ResultCache.key("rt", args.knot, args.p, r, target, args.digits, args.prec, args.max_prec)

    return _run_records(args, RT_FIELDS, rs, compute, key_of)


def _random_sixtuple(r, rng):
    while True:
        i, j, k = (rng.randrange(r - 1) for _ in range(3))
        if not is_admissible_triple(i, j, k, r):
            continue
        for _ in range(64):
            l, m, n = (rng.randrange(r - 1) for _ in range(3))
            if is_admissible((i, j, k, l, m, n), r):
                return (i, j, k, l, m, n)


def _symmetry_residual(st, root):
    base = evaluate_sixj(st, root)
    with root.context():
        return max(abs(base - evaluate_sixj(apply_symmetry(st, g), root)) for g in GENERATORS)


def cmd_verify(args) -> int:
    try:
        root = RootSpec(args.r, args.k, args.prec)
    except InvalidRoot as exc:
        raise ConfigError(str(exc)) from None
    rng = random.Random(args.seed)
    r = args.r
    if args.identity == "orthogonality":
        check = check_orthogonality
        inputs = orthogonality_inputs(r) if args.exhaustive else (
            random_orthogonality_input(r, rng) for _ in range(args.samples)
        )
    elif args.identity == "be":
        check = check_biedenharn_elliot
        inputs = biedenharn_elliot_inputs(r) if args.exhaustive else (
            random_biedenharn_elliot_input(r, rng) for _ in range(args.samples)
        )
    else:
        inputs = admissible_sixtuples(r) if args.exhaustive else (
            _random_sixtuple(r, rng) for _ in range(args.samples)
        )

        def check(*a):
            return _symmetry_residual(a[:6], a[6])

    worst = gmpy2.mpfr(0)
    n = 0
    for item in inputs:
        res = check(*item, root)
        if res > worst:
            worst = res
        n += 1
    passed = worst < args.threshold
    out = Writer(VERIFY_FIELDS, args.format, sys.stdout)
    out.write(
        {
            "identity": args.identity,
            "r": r,
            "k": args.k,
            "n_inputs": n,
            "max_residual": fmt_residual(worst),
            "threshold": repr(args.threshold),
            "passed": "yes" if passed else "no",
        }
    )
    out.close()
    return EXIT_OK if passed else EXIT_PARTIAL


def cmd_fit(args) -> int:
    ct, meta = census(args.census)
    if meta is None:
        raise ConfigError(f"census entry {args.census!r} has no reference volume")
    rs = parse_r_spec(args.r)
    even = [r for r in rs if r % 2 == 0]
    if even:
        raise ConfigError(f"fit needs odd r, got {', '.join(map(str, even))}")
    if len(set(rs)) < 2:
        raise DegenerateFit("need at least two distinct r values")
    t0 = time.perf_counter()
    s = series(ct, rs, "phi", vol=meta.vol, digits=args.digits, max_prec=args.max_prec, threads=args.threads)
    for p in s.points:
        if not p.ok:
            print(f"r={p.r}: {p.error}", file=sys.stderr)
    res = fit_series(s)
    out = Writer(FIT_FIELDS, args.format, sys.stdout)
    out.write(
        {
            "manifold": args.census,
            "vol": repr(meta.vol),
            "slope": f"{res.slope:.6f}",
            "intercept": f"{res.intercept:.6f}",
            "rms_residual": f"{res.rms_residual:.3e}",
            "n_points": res.n_points,
            "n_excluded": res.n_excluded,
            "elapsed_ms": _elapsed(t0, args),
        }
    )
    out.close()
    return EXIT_PARTIAL if res.n_excluded else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _common(p, manifold=True):
    if manifold:
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--census", choices=CENSUS_NAMES, help="built-in triangulation")
        src.add_argument("--file", help="triangulation in qtv-triangulation v1 format")
    p.add_argument("--r", required=True, help="levels: 51, 11,13,15 or start:end:step")
    p.add_argument("--digits", type=_positive, default=DEFAULT_DIGITS, help="digits to verify")
    p.add_argument("--threads", type=_positive, default=1)
    p.add_argument("--format", choices=("csv", "json", "text"), default="csv")
    p.add_argument("--cache", metavar="DIR", help="on-disk result cache")
    p.add_argument("--prec", type=_positive, default=None, help="initial precision in bits")
    p.add_argument("--max-prec", type=_positive, default=DEFAULT_MAX_PREC, help="precision cap in bits")
    p.add_argument("--no-timing", action="store_true", help="leave elapsed_ms empty (stable output)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtv", description="Quantum invariants of 3-manifolds at roots of unity.")
    parser.add_argument("--version", action="version", version=f"qtv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("tv", help="TV_r at q = exp(k*pi*i/r)")
    _common(p)
    p.add_argument("--k", type=_positive, default=2, help="root index")
    p.set_defaults(func=cmd_tv)

    p = sub.add_parser("qv", help="QV_r = 2pi/(r-2) log TV_r at q = exp(2*pi*i/r)")
    _common(p)
    p.set_defaults(func=cmd_qv)

    p = sub.add_parser("rt", help="Q_r of a surgery on 4_1 or 5_2")
    _common(p, manifold=False)
    p.add_argument("--knot", choices=("fig8", "k52"), required=True)
    p.add_argument("--p", type=int, required=True, help="surgery coefficient, nonzero")
    p.add_argument("--target-vol", type=float, default=None)
    p.add_argument("--target-cs", type=float, default=None, help="branch center for Im Q_r")
    p.set_defaults(func=cmd_rt)

    p = sub.add_parser("verify", help="check 6j identities numerically")
    p.add_argument("--identity", choices=("orthogonality", "be", "symmetry"), required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=_positive, default=1)
    how = p.add_mutually_exclusive_group()
    how.add_argument("--exhaustive", action="store_true")
    how.add_argument("--samples", type=_positive, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=1e-30)
    p.add_argument("--prec", type=_positive, default=None, help="precision in bits")
    p.add_argument("--format", choices=("csv", "json", "text"), default="csv")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fit", help="log-line fit of Phi_r against ln(r-2)")
    p.add_argument("--census", choices=CENSUS_NAMES, required=True)
    p.add_argument("--r", required=True)
    p.add_argument("--digits", type=_positive, default=DEFAULT_DIGITS)
    p.add_argument("--threads", type=_positive, default=1)
    p.add_argument("--max-prec", type=_positive, default=DEFAULT_MAX_PREC)
    p.add_argument("--format", choices=("csv", "json", "text"), default="csv")
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors exit 1, --help and --version exit 0
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        if getattr(args, "prec", None) is None and "prec" in vars(args):
            args.prec = default_precision()
        if "prec" in vars(args) and args.prec < 64:
            raise ConfigError(f"--prec must be at least 64 bits, got {args.prec}")
        return args.func(args)
    except ConfigError as exc:
        print(f"qtv: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QtvError, InvalidSurgery) as exc:
        print(f"qtv: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print("qtv: interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
