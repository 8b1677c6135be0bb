"""High-precision quantum invariants of 3-manifolds at roots of unity."""

from __future__ import annotations

__version__ = "0.1.0"

from .arith import (  # noqa: E402
    InvalidRoot,
    InvariantValue,
    LogOfZero,
    PrecisionExhausted,
    QtvError,
    RootSpec,
    make_root,
    principal_log,
    quantum_factorial,
    quantum_int,
    signed_sqrt,
)
from .sixj import canonical_key, delta, is_admissible_triple, weight  # noqa: E402
from .tri import ColoredTriangulation, ManifoldMeta, census, parse, serialize  # noqa: E402
from .statesum import qv, tv, tv_bruteforce  # noqa: E402
from .jones import SurgerySpec, jones_52, jones_fig8, qr, rt_surgery  # noqa: E402
from .asym import fit_logline, phi, series  # noqa: E402
