"""Overflow-safe SL2(R) arithmetic, classification, and length functionals.

A group element g is carried as a ScaledMat (m, s) meaning g = e^s * m, with
m renormalized to unit Frobenius norm after every multiplication.  Products
of thousands of generators then never overflow: growth accumulates in the
additive log-scale s while the stored entries stay near 1.

Observables are computed in the log domain throughout:

    log ||g||        = s + (1/2) log sigma_max^2(m),
    sigma_max^2(m)   = (F^2 + sqrt(F^4 - 4 D^2)) / 2,   F = frobenius(m), D = det(m)
    log |tr g|       = s + log |tr m|
    translation len  = 2 arccosh(|tr g| / 2)   for hyperbolic g.

Trace classification: |tr| > 2 hyperbolic, = 2 parabolic (or the identity),
< 2 elliptic, with a tolerance band around log 2 because the exact boundary
is measure-zero but floating error is not.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple, Optional

from .errors import DomainError, NumericFailure

LOG2 = math.log(2.0)

# Identity restoration is pointless once e^s alone exceeds every tolerance.
_RESTORE_S_CUTOFF = 50.0


class Mat2(NamedTuple):
    """Row-major 2x2 real matrix."""

    a: float
    b: float
    c: float
    d: float


class ScaledMat(NamedTuple):
    """g = e^s * m with m kept near unit Frobenius norm."""

    m: Mat2
    s: float


class ElementClass(Enum):
    """Trace classification of a group element; values are the CSV codes."""

    IDENTITY = "I"
    ELLIPTIC = "E"
    PARABOLIC = "P"
    HYPERBOLIC = "H"


def frobenius(m: Mat2) -> float:
    return math.hypot(m.a, m.b, m.c, m.d)


def det(m: Mat2) -> float:
    return m.a * m.d - m.b * m.c


def trace(m: Mat2) -> float:
    return m.a + m.d


def mat_mul(x: Mat2, y: Mat2) -> Mat2:
    """Plain (unscaled) matrix product."""
    return Mat2(
        x.a * y.a + x.b * y.c,
        x.a * y.b + x.b * y.d,
        x.c * y.a + x.d * y.c,
        x.c * y.b + x.d * y.d,
    )


def sl2_inverse(m: Mat2) -> Mat2:
    """Inverse of a determinant-one matrix (the adjugate)."""
    return Mat2(m.d, -m.b, -m.c, m.a)


def from_mat2(m: Mat2, s: float = 0.0) -> ScaledMat:
    """Wrap a plain matrix as a ScaledMat, normalizing Frobenius to 1."""
    if not all(math.isfinite(v) for v in (*m, s)):
        raise NumericFailure("non-finite matrix entry or scale")
    f = frobenius(m)
    if f == 0.0 or not math.isfinite(f):
        raise NumericFailure("matrix has no unit-scale decomposition")
    inv = 1.0 / f
    return ScaledMat(Mat2(m.a * inv, m.b * inv, m.c * inv, m.d * inv), s + math.log(f))


def identity() -> ScaledMat:
    return from_mat2(Mat2(1.0, 0.0, 0.0, 1.0))


def restore(g: ScaledMat) -> Mat2:
    """Reconstruct e^s * m as a plain matrix."""
    try:
        es = math.exp(g.s)
    except OverflowError:
        raise NumericFailure("scale too large to restore") from None
    out = Mat2(g.m.a * es, g.m.b * es, g.m.c * es, g.m.d * es)
    if not all(math.isfinite(v) for v in out):
        raise NumericFailure("restored entries are not finite")
    return out


def mul(x: ScaledMat, y: ScaledMat) -> ScaledMat:
    """Product x*y, renormalized so frobenius(m_out) = 1."""
    p = mat_mul(x.m, y.m)
    f = frobenius(p)
    if not math.isfinite(f) or f == 0.0:
        raise NumericFailure("matrix product left the representable range")
    inv = 1.0 / f
    return ScaledMat(
        Mat2(p.a * inv, p.b * inv, p.c * inv, p.d * inv),
        x.s + y.s + math.log(f),
    )


def log_op_norm(g: ScaledMat) -> float:
    """log of the largest singular value of e^s * m."""
    m = g.m
    f2 = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d
    dd = det(m)
    disc = f2 * f2 - 4.0 * dd * dd
    if disc < 0.0:
        disc = 0.0  # rounding only; exact value is (sigma_max^2 - sigma_min^2)^2 >= 0
    smax2 = 0.5 * (f2 + math.sqrt(disc))
    if not (smax2 > 0.0 and math.isfinite(smax2)):
        raise NumericFailure("singular value computation failed")
    out = g.s + 0.5 * math.log(smax2)
    if not math.isfinite(out):
        raise NumericFailure("log operator norm is not finite")
    return out


def signed_log_trace(g: ScaledMat) -> tuple[int, float]:
    """(sign of tr, log|tr g|); a zero trace reports (0, -inf)."""
    t = trace(g.m)
    if t == 0.0:
        return (0, float("-inf"))
    return (1 if t > 0.0 else -1, g.s + math.log(abs(t)))


def _near_identity(g: ScaledMat, tol: float) -> bool:
    if not math.isfinite(g.s) or g.s > _RESTORE_S_CUTOFF:
        return False
    es = math.exp(g.s)
    a, b, c, d = g.m.a * es, g.m.b * es, g.m.c * es, g.m.d * es
    for sgn in (1.0, -1.0):
        if (
            abs(a - sgn) <= tol
            and abs(d - sgn) <= tol
            and abs(b) <= tol
            and abs(c) <= tol
        ):
            return True
    return False


def classify(g: ScaledMat, tol: float = 1e-9) -> ElementClass:
    """Trace classification with a tolerance band of tol around log 2.

    The verdict is only as good as the float trace: a product whose true
    trace is below its norm times machine epsilon reports whatever the
    cancellation left behind.  When that matters, classify a conjugate
    with less cancellation (for a word, its cyclic reduction).
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    _, logabs = signed_log_trace(g)
    if logabs > LOG2 + tol:
        return ElementClass.HYPERBOLIC
    if _near_identity(g, tol):
        return ElementClass.IDENTITY
    if logabs < LOG2 - tol:
        return ElementClass.ELLIPTIC
    return ElementClass.PARABOLIC


def geom_length(g: ScaledMat, tol: float = 1e-9) -> float:
    """Translation length 2*arccosh(|tr g|/2) of a hyperbolic element.

    Evaluated in the log domain when |tr| is too large to exponentiate:
    2*arccosh(T/2) = 2*(log T - log 2 + log(1 + sqrt(1 - 4/T^2))).
    """
    cls = classify(g, tol)
    if cls is not ElementClass.HYPERBOLIC:
        raise DomainError(f"geometric length needs a hyperbolic element, got {cls.name}")
    _, logabs = signed_log_trace(g)
    if logabs <= 30.0:
        t = math.exp(logabs)
        return 2.0 * math.log(0.5 * t + math.sqrt(max(0.25 * t * t - 1.0, 0.0)))
    r = math.sqrt(max(1.0 - 4.0 * math.exp(-2.0 * logabs), 0.0))
    return 2.0 * (logabs - LOG2 + math.log(1.0 + r))


def observe(
    g: ScaledMat, tol: float = 1e-9
) -> tuple[float, int, float, ElementClass, Optional[float]]:
    """All walk observables of one element: (log_norm, trace_sign, log_abs_trace, class, geom_length)."""
    sign, logabs = signed_log_trace(g)
    cls = classify(g, tol)
    geom = geom_length(g, tol) if cls is ElementClass.HYPERBOLIC else None
    return (log_op_norm(g), sign, logabs, cls, geom)


def canonical_key(m: Mat2, quantum: float = 1e-9) -> tuple[int, int, int, int]:
    """Hashable projective (sign-canonical) key: entries on a quantum grid,
    sign flipped so the first nonzero rounded entry is positive."""
    q = (
        round(m.a / quantum),
        round(m.b / quantum),
        round(m.c / quantum),
        round(m.d / quantum),
    )
    for v in q:
        if v > 0:
            return q
        if v < 0:
            return (-q[0], -q[1], -q[2], -q[3])
    return q
