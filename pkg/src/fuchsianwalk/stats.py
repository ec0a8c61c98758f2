"""Estimators and empirical checks for the walk limit laws.

Conventions, fixed here once: lambda1_hat is mean(log_norm)/n with standard
error std/(n sqrt(N)); phi_hat is the per-step CLT variance var(log_norm)/n
(so the sqrt(n)-normalized statistic is compared against Normal(0, phi));
sample variance uses the N-1 denominator.  Geometric lengths inherit the
trace-length convention geom ~ 2 log||g||, so their CLT uses drift 2*lambda1
and variance 4*phi.  Samples flagged failed are excluded from every
aggregate, with N counting the survivors.

exact_distribution enumerates all k^n words by level expansion with the same
renormalized kernel the simulator uses, so a sampled word and its enumerated
twin produce bit-identical observables.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import erf

from .errors import (
    DegenerateInput,
    EmptyInput,
    NumericFailure,
    TooLarge,
    ValidationError,
)
from .groups import GeneratorSet
from .sl2 import ElementClass
from .walk import (
    PathTrajectory,
    StepLaw,
    WalkSample,
    _gen_columns,
    finalize_observables,
)

_ENUM_GUARD = 10 ** 8


class LawEstimates(NamedTuple):
    lambda1_hat: float
    lambda1_se: float
    phi_hat: float
    n: int
    N: int
    hyperbolic_fraction: float


class Atom(NamedTuple):
    log_norm: float
    trace_sign: int
    log_abs_trace: float
    cls: ElementClass
    probability: float


class LdpPoint(NamedTuple):
    n: int
    p_hat: float
    root: float
    censored: bool


@dataclass(frozen=True)
class ExactDistribution:
    """Exact law of the n-step product observables, as weighted atoms."""

    n: int
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        if any(a.probability <= 0.0 for a in self.atoms):
            raise ValidationError("atom probabilities must be positive")
        total = math.fsum(a.probability for a in self.atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"atom probabilities sum to {total!r}, need 1")

    def total_probability(self) -> float:
        return math.fsum(a.probability for a in self.atoms)

    def mean_log_norm(self) -> float:
        return math.fsum(a.probability * a.log_norm for a in self.atoms)

    def central_moment_log_norm(self, order: int) -> float:
        mu = self.mean_log_norm()
        return math.fsum(a.probability * (a.log_norm - mu) ** order for a in self.atoms)

    def var_log_norm(self) -> float:
        return self.central_moment_log_norm(2)

    def hyperbolic_fraction(self) -> float:
        return math.fsum(
            a.probability for a in self.atoms if a.cls is ElementClass.HYPERBOLIC
        )

    def non_hyperbolic_probability(self) -> float:
        return math.fsum(
            a.probability for a in self.atoms if a.cls is not ElementClass.HYPERBOLIC
        )


def _live(samples: Sequence[WalkSample]) -> list[WalkSample]:
    return [s for s in samples if not s.failed]


def _shared_n(samples: Sequence[WalkSample]) -> int:
    ns = {s.n for s in samples}
    if len(ns) != 1:
        raise ValidationError("samples must share a single walk length n")
    return ns.pop()


def estimate_lambda1(samples: Sequence[WalkSample]) -> tuple[float, float]:
    """(mean(log_norm)/n, sample-std(log_norm)/(n*sqrt(N)))."""
    live = _live(samples)
    if len(live) < 2:
        raise EmptyInput("lambda1 estimation needs at least two samples")
    n = _shared_n(live)
    x = np.asarray([s.log_norm for s in live], dtype=np.float64)
    lam = float(np.mean(x)) / n
    se = float(np.std(x, ddof=1)) / (n * math.sqrt(x.size))
    return (lam, se)


def estimate_phi(samples: Sequence[WalkSample]) -> float:
    """Per-step CLT variance: sample-variance(log_norm)/n."""
    live = _live(samples)
    if len(live) < 2:
        raise EmptyInput("phi estimation needs at least two samples")
    n = _shared_n(live)
    x = np.asarray([s.log_norm for s in live], dtype=np.float64)
    return float(np.var(x, ddof=1)) / n


def hyperbolic_fraction(samples: Sequence[WalkSample]) -> float:
    live = _live(samples)
    if not live:
        raise EmptyInput("no samples")
    hyp = sum(1 for s in live if s.cls is ElementClass.HYPERBOLIC)
    return hyp / len(live)


def estimate_laws(samples: Sequence[WalkSample]) -> LawEstimates:
    """Bundle lambda1, phi, and the hyperbolic fraction for one batch."""
    live = _live(samples)
    if len(live) < 2:
        raise EmptyInput("need at least two samples")
    n = _shared_n(live)
    lam, se = estimate_lambda1(live)
    phi = estimate_phi(live)
    frac = hyperbolic_fraction(live)
    return LawEstimates(lam, se, phi, n, len(live), frac)


def normal_cdf(x):
    """Standard normal CDF via erf; absolute error well under 1.5e-7."""
    out = 0.5 * (1.0 + erf(np.asarray(x, dtype=np.float64) / math.sqrt(2.0)))
    return float(out) if np.ndim(out) == 0 else out


def _ks_against_normal(values: np.ndarray, variance: float) -> float:
    x = np.sort(values)
    size = x.size
    cdf = normal_cdf(x / math.sqrt(variance))
    i = np.arange(1, size + 1, dtype=np.float64)
    return float(max(np.max(i / size - cdf), np.max(cdf - (i - 1.0) / size)))


def clt_ks(
    samples: Sequence[WalkSample],
    lambda1: float,
    phi: float,
    use_geom: bool = False,
) -> float:
    """KS sup-distance of the sqrt(n)-normalized statistic vs its Gaussian law.

    use_geom=False: (log_norm - lambda1*n)/sqrt(n) against Normal(0, phi).
    use_geom=True: hyperbolic samples only, (geom - 2*lambda1*n)/sqrt(n)
    against Normal(0, 4*phi).
    """
    if not (phi > 0.0 and math.isfinite(phi)):
        raise DegenerateInput("phi must be positive")
    live = _live(samples)
    if use_geom:
        vals = [
            (s.geom_length - 2.0 * lambda1 * s.n) / math.sqrt(s.n)
            for s in live
            if s.cls is ElementClass.HYPERBOLIC
        ]
        variance = 4.0 * phi
    else:
        vals = [(s.log_norm - lambda1 * s.n) / math.sqrt(s.n) for s in live]
        variance = phi
    if not vals:
        raise DegenerateInput("no qualifying samples")
    return _ks_against_normal(np.asarray(vals, dtype=np.float64), variance)


def ldp_estimate(
    batches: Sequence[tuple[int, Sequence[WalkSample]]],
    lambda1: float,
    t0: float,
) -> list[LdpPoint]:
    """Deviation probabilities p_hat = P(|log_norm - lambda1*n| >= n*t0) per batch.

    Zero-count cells report the rule-of-three bound 3/N flagged censored
    instead of an exact zero (whose n-th root would be spuriously perfect).
    """
    if not (t0 > 0.0 and math.isfinite(t0)):
        raise DegenerateInput("t0 must be positive")
    if not batches:
        raise EmptyInput("no batches")
    if len({n for n, _ in batches}) < 3:
        raise DegenerateInput("need batches at three or more distinct n")
    out = []
    for n, samples in batches:
        live = _live(samples)
        if not live:
            raise EmptyInput(f"batch at n={n} has no usable samples")
        count = sum(1 for s in live if abs(s.log_norm - lambda1 * n) >= n * t0)
        size = len(live)
        if count == 0:
            p = 3.0 / size
            censored = True
        else:
            p = count / size
            censored = False
        out.append(LdpPoint(n, p, p ** (1.0 / n), censored))
    return out


def llt_window(
    samples: Sequence[WalkSample],
    lambda1: float,
    phi: float,
    a1: float,
    a2: float,
) -> tuple[float, float]:
    """(sqrt(n) * fraction with log_norm - lambda1*n in [a1, a2],
    (a2 - a1)/sqrt(2*pi*phi))."""
    if not a1 < a2:
        raise DegenerateInput("need a1 < a2")
    if not (phi > 0.0 and math.isfinite(phi)):
        raise DegenerateInput("phi must be positive")
    live = _live(samples)
    if not live:
        raise EmptyInput("no samples")
    n = _shared_n(live)
    hits = sum(1 for s in live if a1 <= s.log_norm - lambda1 * n <= a2)
    empirical = math.sqrt(n) * hits / len(live)
    theoretical = (a2 - a1) / math.sqrt(2.0 * math.pi * phi)
    return (empirical, theoretical)


def lil_normalize(
    traj: PathTrajectory, lambda1: float, phi: float
) -> list[tuple[int, float]]:
    """(n, (log_norm - lambda1*n)/sqrt(2*phi*n*loglog n)) for checkpoints n >= 3."""
    if not (phi > 0.0 and math.isfinite(phi)):
        raise DegenerateInput("phi must be positive")
    out = []
    for cp in traj.checkpoints:
        if cp.n < 3:
            continue
        denom = math.sqrt(2.0 * phi * cp.n * math.log(math.log(cp.n)))
        out.append((cp.n, (cp.log_norm - lambda1 * cp.n) / denom))
    return out


def exact_distribution(gens: GeneratorSet, law: StepLaw, n: int) -> ExactDistribution:
    """Exact observable law of the n-step product by full k^n enumeration.

    Level expansion with the simulator's renormalized kernel; per-word
    probabilities are products of the step weights; observables are merged
    into atoms at 12-decimal resolution.
    """
    if len(law.weights) != gens.k:
        raise ValidationError("step law length must match the generator count")
    if n < 0:
        raise ValueError("n must be non-negative")
    k = gens.k
    if k ** n > _ENUM_GUARD:
        raise TooLarge(f"{k}^{n} words exceed the enumeration guard")
    ga, gb, gc, gd = _gen_columns(gens)
    w = np.asarray(law.weights, dtype=np.float64)
    a = np.ones(1)
    b = np.zeros(1)
    c = np.zeros(1)
    d = np.ones(1)
    kscale = np.zeros(1, dtype=np.int64)
    p = np.ones(1)
    for _ in range(n):
        na = (ga[:, None] * a[None, :] + gb[:, None] * c[None, :]).ravel()
        nb = (ga[:, None] * b[None, :] + gb[:, None] * d[None, :]).ravel()
        nc = (gc[:, None] * a[None, :] + gd[:, None] * c[None, :]).ravel()
        nd = (gc[:, None] * b[None, :] + gd[:, None] * d[None, :]).ravel()
        f2 = na * na + nb * nb + nc * nc + nd * nd
        _, e = np.frexp(f2)
        half = e >> 1
        scale = np.ldexp(1.0, -half)
        a = na * scale
        b = nb * scale
        c = nc * scale
        d = nd * scale
        kscale = np.tile(kscale, k) + half
        p = (w[:, None] * p[None, :]).ravel()
    cols = finalize_observables(a, b, c, d, kscale)
    if bool(cols["failed"].any()):
        raise NumericFailure("exact enumeration met non-finite products")
    atoms: dict[tuple, list] = {}
    log_norm = cols["log_norm"].tolist()
    sign = cols["trace_sign"].tolist()
    logabs = cols["log_abs_trace"].tolist()
    codes = cols["cls"].tolist()
    probs = p.tolist()
    for i in range(len(log_norm)):
        key = (round(log_norm[i], 12), sign[i], round(logabs[i], 12), codes[i])
        slot = atoms.get(key)
        if slot is None:
            atoms[key] = [log_norm[i], sign[i], logabs[i], codes[i], [probs[i]]]
        else:
            slot[4].append(probs[i])
    from .walk import _CODE_TO_CLASS

    merged = [
        Atom(v[0], v[1], v[2], _CODE_TO_CLASS[v[3]], math.fsum(v[4]))
        for v in (atoms[key] for key in sorted(atoms))
    ]
    return ExactDistribution(n, tuple(merged))


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v if math.isfinite(v) else "null"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        inner = ", ".join(f"{json.dumps(k)}: {_json_value(x)}" for k, x in v.items())
        return "{" + inner + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def render_summary_json(
    group: str,
    n: int,
    N: int,
    seed: int,
    lambda1_hat: float,
    lambda1_se: float,
    phi_hat: float,
    hyperbolic_fraction: float,
    ks_log_norm: Optional[float] = None,
    ks_geom: Optional[float] = None,
    ldp: Optional[Sequence[LdpPoint]] = None,
    llt: Optional[dict] = None,
) -> str:
    """Summary JSON with floats at 17 significant digits, keys in fixed order."""
    ldp_field: Optional[list] = None
    if ldp is not None:
        ldp_field = [
            {"n": q.n, "p_hat": q.p_hat, "root": q.root, "censored": q.censored}
            for q in ldp
        ]
    fields = [
        ("group", group),
        ("n", n),
        ("N", N),
        ("seed", seed),
        ("lambda1_hat", lambda1_hat),
        ("lambda1_se", lambda1_se),
        ("phi_hat", phi_hat),
        ("hyperbolic_fraction", hyperbolic_fraction),
        ("ks_log_norm", ks_log_norm),
        ("ks_geom", ks_geom),
        ("ldp", ldp_field),
        ("llt", llt),
    ]
    inner = ", ".join(f"{json.dumps(k)}: {_json_value(v)}" for k, v in fields)
    return "{" + inner + "}"
