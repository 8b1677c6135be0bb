"""Edge-colored ideal triangulations: data model, text format and census.

Only the edge-identification pattern is stored: each tetrahedron is the
tuple of edge-class indices in slot order (e12, e13, e23, e34, e24, e14),
which is also the placement used for its 6j-symbol.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass

from .arith import QtvError

HEADER = "qtv-triangulation v1"
SLOTS = ("e12", "e13", "e23", "e34", "e24", "e14")


class ParseError(QtvError, SyntaxError):
    """Malformed triangulation text; carries 1-based ``line`` and ``col``."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.lineno = line
        self.offset = col

    def __str__(self):
        return self.msg


class EdgeIndexError(ParseError, IndexError):
    pass


class EmptyTriangulation(QtvError, ValueError):
    pass


class UnknownCensusName(QtvError, KeyError):
    def __str__(self):
        return self.args[0] if self.args else "unknown census name"


@dataclass(frozen=True)
class ColoredTriangulation:
    name: str
    num_edge_classes: int
    tets: tuple

    def __post_init__(self):
        tets = tuple(tuple(int(c) for c in t) for t in self.tets)
        object.__setattr__(self, "tets", tets)
        if not tets:
            raise EmptyTriangulation(f"triangulation {self.name!r} has no tetrahedra")
        if self.num_edge_classes < 1:
            raise ValueError("num_edge_classes must be >= 1")
        for t in tets:
            if len(t) != 6:
                raise ValueError(f"tetrahedron {t} must have 6 edge slots")
            for c in t:
                if not 0 <= c < self.num_edge_classes:
                    raise IndexError(f"edge class {c} out of range 0..{self.num_edge_classes - 1}")

    @property
    def num_tets(self) -> int:
        return len(self.tets)

    def occurrences(self) -> Counter:
        """Number of tetrahedron slots carrying each edge class."""
        return Counter(c for t in self.tets for c in t)


@dataclass(frozen=True)
class ManifoldMeta:
    vol: float
    cs: float | None = None
    source: str = ""


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error", "warning" or "info"
    message: str


def _int_token(tok: str, line: int, col: int, what: str) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(f"expected integer {what}, got {tok!r}", line, col) from None
    if v < 0:
        raise ParseError(f"{what} must be non-negative, got {v}", line, col)
    return v


def _tokens(line: str):
    # (column, token) pairs with 1-based columns
    out = []
    i = 0
    n = len(line)
    while i < n:
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not line[j].isspace():
            j += 1
        out.append((i + 1, line[i:j]))
        i = j
    return out


def parse(text: str) -> ColoredTriangulation:
    """Parse the ``qtv-triangulation v1`` text format."""
    name = ""
    edges = None
    tets = []
    seen_header = False
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        if not seen_header:
            if line.strip() != HEADER:
                raise ParseError(f"expected header {HEADER!r}", lineno, toks[0][0])
            seen_header = True
            continue
        col, kw = toks[0]
        if kw == "name":
            if len(toks) < 2:
                raise ParseError("name requires a value", lineno, col + len(kw))
            name = line[toks[1][0] - 1 :].strip()
        elif kw == "edges":
            if edges is not None:
                raise ParseError("duplicate edges line", lineno, col)
            if len(toks) != 2:
                raise ParseError("edges takes exactly one integer", lineno, col)
            edges = _int_token(toks[1][1], lineno, toks[1][0], "edge count")
            if edges < 1:
                raise ParseError("edge count must be >= 1", lineno, toks[1][0])
        elif kw == "tet":
            if edges is None:
                raise ParseError("tet line before edges line", lineno, col)
            if len(toks) != 7:
                where = toks[7][0] if len(toks) > 7 else col + len(line[col - 1 :].rstrip())
                raise ParseError(f"tet needs 6 edge indices, got {len(toks) - 1}", lineno, where)
            t = []
            for c, tok in toks[1:]:
                v = _int_token(tok, lineno, c, "edge index")
                if v >= edges:
                    raise EdgeIndexError(f"edge class {v} out of range 0..{edges - 1}", lineno, c)
                t.append(v)
            tets.append(tuple(t))
        else:
            raise ParseError(f"unknown keyword {kw!r}", lineno, col)
    if not seen_header:
        raise ParseError(f"missing header {HEADER!r}", max(last_line, 1), 1)
    if edges is None:
        raise ParseError("missing edges line", max(last_line, 1), 1)
    if not tets:
        raise EmptyTriangulation("no tet lines")
    return ColoredTriangulation(name, edges, tuple(tets))


def serialize(ct: ColoredTriangulation) -> str:
    lines = [HEADER]
    if ct.name:
        lines.append(f"name {ct.name}")
    lines.append(f"edges {ct.num_edge_classes}")
    for t in ct.tets:
        lines.append("tet " + " ".join(str(c) for c in t))
    return "\n".join(lines) + "\n"


def structural_hash(ct: ColoredTriangulation) -> str:
    """Digest of the edge pattern, independent of the name."""
    payload = f"{ct.num_edge_classes}|" + ";".join(",".join(map(str, t)) for t in ct.tets)
    return hashlib.sha256(payload.encode()).hexdigest()


def validate(ct: ColoredTriangulation) -> list:
    out = []
    if not ct.tets:
        out.append(Diagnostic("error", "triangulation has no tetrahedra"))
        return out
    occ = ct.occurrences()
    for c in range(ct.num_edge_classes):
        if occ[c] == 0:
            out.append(Diagnostic("warning", f"edge class {c} is declared but unused"))
    counts = ", ".join(f"{c}:{occ[c]}" for c in range(ct.num_edge_classes))
    out.append(Diagnostic("info", f"edge class multiplicities {counts}"))
    return out


# ---------------------------------------------------------------------------
# census


def _pattern(*words: str):
    # "aabbcc" -> (0, 0, 1, 1, 2, 2)
    return tuple(tuple(ord(ch) - ord("a") for ch in w) for w in words)


_CENSUS = {
    "unknot": (_pattern("aaaaab", "aaaaaa"), None),
    "trefoil": (_pattern("aaaaab", "aaaaab"), None),
    "hopf": (_pattern("aaaaac", "aaabbb", "aaabbb"), None),
    "t24": (_pattern("aabccc", "aabccc", "bbbaad", "bbbaaa"), None),
    "t26": (_pattern("aacbba", "aacbba", "bbcbbb", "bbdbbc"), None),
    # faces (a,b,a), (b,a,b): both edges carry the triples (a,a,b) and (a,b,b)
    "fig8": (_pattern("abaabb", "abaabb"), ManifoldMeta(2.02988, None, "4_1 complement")),
    "fig8_sister": (_pattern("abaabb", "abaabb"), ManifoldMeta(2.02988, None, "m003")),
    "k52": (_pattern("aabbcc", "aabbcc", "abcbbc"), ManifoldMeta(2.82812, None, "5_2 complement")),
    "m36": (_pattern("aabbcc", "aabbcc", "abcaac"), ManifoldMeta(2.82812, None, "M3_6")),
    "k61": (
        _pattern("aabadb", "accbbd", "bbcacd", "bbcbdc"),
        ManifoldMeta(3.163963, None, "6_1 complement"),
    ),
    "gieseking": (_pattern("aaaaaa"), ManifoldMeta(1.014942, None, "N1_1")),
    "n21": (_pattern("abbabb", "abbabb"), ManifoldMeta(1.831931, None, "N2_1")),
    "mmin": (_pattern("aaaaaa", "aaaaaa"), ManifoldMeta(6.452, None, "minimal geodesic-boundary")),
}

CENSUS_NAMES = tuple(_CENSUS)


def census(name: str):
    """Built-in triangulation ``name`` and its reference geometry (``None`` if non-hyperbolic)."""
    try:
        tets, meta = _CENSUS[name]
    except KeyError:
        raise UnknownCensusName(
            f"unknown census name {name!r}; choose from {', '.join(CENSUS_NAMES)}"
        ) from None
    num = 1 + max(c for t in tets for c in t)
    return ColoredTriangulation(name, num, tets), meta
