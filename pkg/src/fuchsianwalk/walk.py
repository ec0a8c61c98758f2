"""Deterministic, parallelizable simulation of n-step generator walks.

Sample i draws its own splitmix64 stream derived from (seed, i), so results
are bit-identical for fixed (gens, law, n, N, seed) no matter how the work
is chunked or threaded.  The batch kernel is vectorized over a fixed chunk
size; running products are renormalized by exact powers of two (frexp/ldexp)
so the hot loop touches no transcendental functions and the scalar and
vectorized paths compute identical IEEE values step for step.

The running product is tracked as 2^kscale * [[a,b],[c,d]] with Frobenius
norm kept in [2^-1/2, 2^1/2); observables are derived in the log domain at
finalization only.  Per-sample numeric failures (possible only for extreme
user-supplied generators) are recorded in the sample, not raised.
"""

from __future__ import annotations

import bisect
import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import IO, NamedTuple, Optional, Sequence, Union

import numpy as np

from . import rng as rng_mod
from .errors import NumericFailure, ParseError, ValidationError
from .groups import GeneratorSet
from .sl2 import LOG2, ElementClass
from .words import Word, format_word
from .words import parse as parse_word

_LN2 = math.log(2.0)
_CHUNK = 1 << 14  # fixed so output does not depend on thread count
_RESTORE_S_CUTOFF = 50.0

_CSV_HEADER = [
    "index",
    "n",
    "log_norm",
    "trace_sign",
    "log_abs_trace",
    "class",
    "geom_length",
    "word",
]

_CODE_TO_CLASS = {
    ord("H"): ElementClass.HYPERBOLIC,
    ord("P"): ElementClass.PARABOLIC,
    ord("E"): ElementClass.ELLIPTIC,
    ord("I"): ElementClass.IDENTITY,
}


@dataclass(frozen=True)
class StepLaw:
    """Positive step weights over the generator set, normalized to sum 1."""

    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) == 0:
            raise ValidationError("step law needs at least one weight")
        ws = [float(w) for w in self.weights]
        if any(not math.isfinite(w) or w <= 0.0 for w in ws):
            raise ValidationError("step-law weights must be positive and finite")
        total = math.fsum(ws)
        norm = tuple(w / total for w in ws)
        if abs(math.fsum(norm) - 1.0) > 1e-12:
            raise NumericFailure("weight normalization failed")
        object.__setattr__(self, "weights", norm)

    @classmethod
    def uniform(cls, k: int) -> "StepLaw":
        if k < 1:
            raise ValidationError("need at least one generator")
        return cls((1.0,) * k)

    @cached_property
    def cumulative(self) -> np.ndarray:
        # inverse-CDF table; the last entry is forced to 1.0 so every
        # uniform in [0,1) lands on a valid generator index
        cum = np.cumsum(np.asarray(self.weights, dtype=np.float64))
        np.minimum(cum, 1.0, out=cum)
        cum[-1] = 1.0
        return cum


class WalkSample(NamedTuple):
    """Observables of one n-step product (CSV column 'class' is `cls`)."""

    index: int
    n: int
    log_norm: float
    trace_sign: int
    log_abs_trace: float
    cls: Optional[ElementClass]
    geom_length: Optional[float] = None
    word: Optional[Word] = None
    failed: bool = False


class Checkpoint(NamedTuple):
    n: int
    log_norm: float
    trace_sign: int
    log_abs_trace: float
    cls: ElementClass


@dataclass
class PathTrajectory:
    """Observables of a single walk recorded along the way."""

    checkpoints: list[Checkpoint]
    failed: bool = False


def finalize_observables(
    a: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    d: np.ndarray,
    kscale: np.ndarray,
    tol: float = 1e-9,
) -> dict:
    """Observable columns for products stored as 2^kscale * [[a,b],[c,d]].

    Returns log_norm, trace_sign, log_abs_trace, cls (class code bytes,
    0 for failed lanes), geom (nan where absent), failed.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        failed = ~(np.isfinite(a) & np.isfinite(b) & np.isfinite(c) & np.isfinite(d))
        s = kscale.astype(np.float64) * _LN2
        f2 = a * a + b * b + c * c + d * d
        dd = a * d - b * c
        disc = np.maximum(f2 * f2 - 4.0 * dd * dd, 0.0)
        smax2 = 0.5 * (f2 + np.sqrt(disc))
        log_norm = s + 0.5 * np.log(smax2)
        tr = a + d
        trace_sign = np.where(np.isfinite(tr), np.sign(tr), 0.0).astype(np.int8)
        logabs = s + np.log(np.abs(tr))

        cls = np.full(a.shape, ord("P"), dtype=np.uint8)
        hyp = (logabs > LOG2 + tol) & ~failed
        ell = (logabs < LOG2 - tol) & ~failed
        cls[hyp] = ord("H")
        cls[ell] = ord("E")
        cand = np.flatnonzero(~hyp & ~failed & (s <= _RESTORE_S_CUTOFF))
        if cand.size:
            k32 = kscale[cand].astype(np.int32)
            ra = np.ldexp(a[cand], k32)
            rb = np.ldexp(b[cand], k32)
            rc = np.ldexp(c[cand], k32)
            rd = np.ldexp(d[cand], k32)
            off = (np.abs(rb) <= tol) & (np.abs(rc) <= tol)
            near = off & (
                ((np.abs(ra - 1.0) <= tol) & (np.abs(rd - 1.0) <= tol))
                | ((np.abs(ra + 1.0) <= tol) & (np.abs(rd + 1.0) <= tol))
            )
            cls[cand[near]] = ord("I")
        cls[failed] = 0

        geom = np.full(a.shape, np.nan)
        hyp_idx = np.flatnonzero(hyp)
        if hyp_idx.size:
            lh = logabs[hyp_idx]
            out = np.empty(lh.shape)
            small = lh <= 30.0
            ls = lh[small]
            t = np.exp(ls)
            out[small] = 2.0 * np.log(0.5 * t + np.sqrt(np.maximum(0.25 * t * t - 1.0, 0.0)))
            lb = lh[~small]
            out[~small] = 2.0 * (
                lb - LOG2 + np.log(1.0 + np.sqrt(np.maximum(1.0 - 4.0 * np.exp(-2.0 * lb), 0.0)))
            )
            geom[hyp_idx] = out

    return {
        "log_norm": log_norm,
        "trace_sign": trace_sign,
        "log_abs_trace": logabs,
        "cls": cls,
        "geom": geom,
        "failed": failed,
    }


def _observe_scaled(
    a: float, b: float, c: float, d: float, kexp: int, tol: float = 1e-9
) -> tuple[float, int, float, ElementClass, Optional[float]]:
    """Scalar twin of finalize_observables for the single-path kernel."""
    s = kexp * _LN2
    f2 = a * a + b * b + c * c + d * d
    dd = a * d - b * c
    disc = f2 * f2 - 4.0 * dd * dd
    if disc < 0.0:
        disc = 0.0
    log_norm = s + 0.5 * math.log(0.5 * (f2 + math.sqrt(disc)))
    tr = a + d
    if tr == 0.0:
        sign, logabs = 0, float("-inf")
    else:
        sign, logabs = (1 if tr > 0.0 else -1), s + math.log(abs(tr))

    if logabs > LOG2 + tol:
        if logabs <= 30.0:
            t = math.exp(logabs)
            geom = 2.0 * math.log(0.5 * t + math.sqrt(max(0.25 * t * t - 1.0, 0.0)))
        else:
            r = math.sqrt(max(1.0 - 4.0 * math.exp(-2.0 * logabs), 0.0))
            geom = 2.0 * (logabs - LOG2 + math.log(1.0 + r))
        return (log_norm, sign, logabs, ElementClass.HYPERBOLIC, geom)
    if s <= _RESTORE_S_CUTOFF:
        ra = math.ldexp(a, kexp)
        rb = math.ldexp(b, kexp)
        rc = math.ldexp(c, kexp)
        rd = math.ldexp(d, kexp)
        if abs(rb) <= tol and abs(rc) <= tol:
            for sgn in (1.0, -1.0):
                if abs(ra - sgn) <= tol and abs(rd - sgn) <= tol:
                    return (log_norm, sign, logabs, ElementClass.IDENTITY, None)
    if logabs < LOG2 - tol:
        return (log_norm, sign, logabs, ElementClass.ELLIPTIC, None)
    return (log_norm, sign, logabs, ElementClass.PARABOLIC, None)


def _gen_columns(gens: GeneratorSet):
    g = np.asarray([[m.a, m.b, m.c, m.d] for m in gens.mats], dtype=np.float64)
    return g[:, 0].copy(), g[:, 1].copy(), g[:, 2].copy(), g[:, 3].copy()


def _run_chunk(ga, gb, gc, gd, cum, n, N, seed, lo, keep_words):
    hi = min(lo + _CHUNK, N)
    m = hi - lo
    states = rng_mod.stream_states(seed, np.arange(lo, hi, dtype=np.uint64))
    a = np.ones(m)
    b = np.zeros(m)
    c = np.zeros(m)
    d = np.ones(m)
    kscale = np.zeros(m, dtype=np.int64)
    letters = np.empty((n, m), dtype=np.uint16) if keep_words else None
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        for t in range(n):
            u = rng_mod.advance_uniforms(states)
            j = np.searchsorted(cum, u, side="right")
            za = ga[j]
            zb = gb[j]
            zc = gc[j]
            zd = gd[j]
            # left-multiply: new = Z * M, so the newest letter is leftmost
            na = za * a + zb * c
            nb = za * b + zb * d
            nc = zc * a + zd * c
            nd = zc * b + zd * d
            f2 = na * na + nb * nb + nc * nc + nd * nd
            _, e = np.frexp(f2)
            half = e >> 1
            scale = np.ldexp(1.0, -half)
            a = na * scale
            b = nb * scale
            c = nc * scale
            d = nd * scale
            kscale += half
            if letters is not None:
                letters[t] = j
    cols = finalize_observables(a, b, c, d, kscale)
    if letters is not None:
        cols["letters"] = letters
    return cols


def _append_samples(out, lo, n, cols, keep_words):
    log_norm = cols["log_norm"].tolist()
    sign = cols["trace_sign"].tolist()
    logabs = cols["log_abs_trace"].tolist()
    codes = cols["cls"].tolist()
    geom = cols["geom"].tolist()
    failed = cols["failed"].tolist()
    words_rows = cols["letters"].T.tolist() if keep_words else None
    hyp_code = ord("H")
    for i in range(len(log_norm)):
        w = Word(tuple(words_rows[i])) if words_rows is not None else None
        if failed[i]:
            out.append(
                WalkSample(lo + i, n, float("nan"), 0, float("nan"), None, None, w, True)
            )
        else:
            code = codes[i]
            g = geom[i] if code == hyp_code else None
            out.append(
                WalkSample(lo + i, n, log_norm[i], sign[i], logabs[i], _CODE_TO_CLASS[code], g, w, False)
            )


def simulate_batch(
    gens: GeneratorSet,
    law: StepLaw,
    n: int,
    N: int,
    seed: int,
    keep_words: bool = False,
    threads: int = 1,
) -> list[WalkSample]:
    """N independent n-step walks; sample i uses the stream for (seed, i)."""
    if len(law.weights) != gens.k:
        raise ValidationError("step law length must match the generator count")
    if n < 1 or N < 1:
        raise ValueError("n and N must be at least 1")
    if threads < 1:
        raise ValueError("threads must be at least 1")
    cum = law.cumulative
    ga, gb, gc, gd = _gen_columns(gens)
    starts = list(range(0, N, _CHUNK))

    def run(lo):
        return _run_chunk(ga, gb, gc, gd, cum, n, N, seed, lo, keep_words)

    if threads == 1 or len(starts) == 1:
        chunks = [run(lo) for lo in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(run, starts))
    samples: list[WalkSample] = []
    for lo, cols in zip(starts, chunks):
        _append_samples(samples, lo, n, cols, keep_words)
    return samples


def simulate_path(
    gens: GeneratorSet,
    law: StepLaw,
    n_max: int,
    seed: int,
    checkpoint_stride: int = 1,
) -> PathTrajectory:
    """One walk extended to n_max steps, observed every checkpoint_stride
    steps (plus the final step); uses the stream for (seed, 0)."""
    if len(law.weights) != gens.k:
        raise ValidationError("step law length must match the generator count")
    if n_max < 1 or checkpoint_stride < 1:
        raise ValueError("n_max and checkpoint_stride must be at least 1")
    cum = law.cumulative.tolist()
    mats = [(m.a, m.b, m.c, m.d) for m in gens.mats]
    stream = rng_mod.SplitMix64.for_sample(seed, 0)
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    kexp = 0
    checkpoints: list[Checkpoint] = []
    for t in range(1, n_max + 1):
        u = stream.uniform()
        j = bisect.bisect_right(cum, u)
        za, zb, zc, zd = mats[j]
        na = za * a + zb * c
        nb = za * b + zb * d
        nc = zc * a + zd * c
        nd = zc * b + zd * d
        f2 = na * na + nb * nb + nc * nc + nd * nd
        if not (f2 > 0.0 and math.isfinite(f2)):
            return PathTrajectory(checkpoints, failed=True)
        _, e = math.frexp(f2)
        half = e >> 1
        scale = math.ldexp(1.0, -half)
        a = na * scale
        b = nb * scale
        c = nc * scale
        d = nd * scale
        kexp += half
        if t % checkpoint_stride == 0 or t == n_max:
            log_norm, sign, logabs, cls, _ = _observe_scaled(a, b, c, d, kexp)
            checkpoints.append(Checkpoint(t, log_norm, sign, logabs, cls))
    return PathTrajectory(checkpoints, failed=False)


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_samples_csv(
    samples: Sequence[WalkSample],
    dest: Union[str, os.PathLike, IO[str]],
    gens: Optional[GeneratorSet] = None,
) -> None:
    """Write samples as CSV; word columns need `gens` for generator names."""
    own = isinstance(dest, (str, os.PathLike))
    f = open(dest, "w", newline="") if own else dest
    try:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(_CSV_HEADER)
        for s in samples:
            if s.word is not None:
                if gens is None:
                    raise ValidationError("serializing words requires the generator set")
                word_text = format_word(s.word, gens)
            else:
                word_text = ""
            writer.writerow(
                [
                    str(s.index),
                    str(s.n),
                    _fmt(s.log_norm),
                    str(s.trace_sign),
                    _fmt(s.log_abs_trace),
                    s.cls.value if s.cls is not None else "",
                    _fmt(s.geom_length) if s.geom_length is not None else "",
                    word_text,
                ]
            )
    finally:
        if own:
            f.close()


def read_samples_csv(
    src: Union[str, os.PathLike, IO[str]],
    gens: Optional[GeneratorSet] = None,
) -> list[WalkSample]:
    """Read a walk CSV back; floats round-trip exactly at 17 significant digits.

    Word text is decoded only when `gens` is supplied (names are not stored
    in the file); otherwise the word field reads back as None.
    """
    own = isinstance(src, (str, os.PathLike))
    f = open(src, "r", newline="") if own else src
    try:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != _CSV_HEADER:
            raise ParseError("unexpected CSV header")
        out: list[WalkSample] = []
        for row in reader:
            if len(row) != len(_CSV_HEADER):
                raise ParseError(f"row {len(out)} has {len(row)} fields")
            try:
                index = int(row[0])
                n = int(row[1])
                log_norm = float(row[2])
                sign = int(row[3])
                logabs = float(row[4])
            except ValueError as e:
                raise ParseError(f"bad numeric field: {e}") from None
            word = parse_word(row[7], gens) if (row[7] and gens is not None) else None
            if row[5] == "":
                out.append(WalkSample(index, n, log_norm, sign, logabs, None, None, word, True))
                continue
            try:
                cls = ElementClass(row[5])
            except ValueError:
                raise ParseError(f"unknown class code {row[5]!r}") from None
            has_geom = row[6] != ""
            if has_geom != (cls is ElementClass.HYPERBOLIC):
                raise ValidationError(
                    "geom_length must be present exactly for hyperbolic rows")
            geom = float(row[6]) if has_geom else None
            out.append(WalkSample(index, n, log_norm, sign, logabs, cls, geom, word, False))
        return out
    finally:
        if own:
            f.close()
