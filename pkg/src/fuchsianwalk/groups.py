"""Generator sets for Fuchsian groups: construction, config I/O, validation.

Built-ins: a pair-of-pants group with prescribed boundary lengths, and the
standard free parabolic pair [[1,2],[0,1]], [[1,0],[2,1]].  `validate`
searches short products for certificates of the two random-walk hypotheses
(unboundedness and strong irreducibility); it can verify but never refute,
so the negative outcome is Inconclusive rather than an error.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .errors import DegenerateInput, NoInverse, NumericFailure, ParseError, ValidationError
from .sl2 import (
    ElementClass,
    Mat2,
    classify,
    det,
    sl2_inverse,
    trace,
)

_DET_TOL = 1e-9
_PAIR_TOL = 1e-9
_AXIS_SEP = 1e-6


@dataclass(frozen=True)
class Pants:
    l1: float
    l2: float
    l3: float


@dataclass(frozen=True)
class Sanov:
    pass


@dataclass(frozen=True)
class Custom:
    pass


Provenance = Union[Pants, Sanov, Custom]


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """Named SL2(R) generators with optional inverse pairing.

    Equality compares names, matrices (bitwise), and pairing; provenance is
    bookkeeping and deliberately excluded.  Spanning (that the closure is the
    whole intended group) is the caller's responsibility and not checkable.
    """

    names: tuple[str, ...]
    mats: tuple[Mat2, ...]
    inverse_pairing: Optional[dict[int, int]] = None
    provenance: Provenance = field(default_factory=Custom)

    def __post_init__(self):
        k = len(self.mats)
        if k < 1:
            raise ValidationError("a generator set needs at least one matrix")
        if len(self.names) != k:
            raise ValidationError("names and matrices differ in length")
        if any(not isinstance(nm, str) or not nm for nm in self.names):
            raise ValidationError("generator names must be non-empty strings")
        if len(set(self.names)) != k:
            raise ValidationError("generator names must be unique")
        for nm, m in zip(self.names, self.mats):
            if not all(math.isfinite(v) for v in m):
                raise ValidationError(f"generator {nm!r} has non-finite entries")
            if abs(det(m) - 1.0) > _DET_TOL:
                raise ValidationError(f"generator {nm!r} has det {det(m)!r}, need 1")
        if self.inverse_pairing is not None:
            self._check_pairing()

    def _check_pairing(self):
        pairing = self.inverse_pairing
        k = len(self.mats)
        for i, j in pairing.items():
            if not (0 <= i < k and 0 <= j < k):
                raise ValidationError("inverse pairing index out of range")
            if pairing.get(j) != i:
                raise ValidationError("inverse pairing is not an involution")
            inv = sl2_inverse(self.mats[i])
            other = self.mats[j]
            err = max(abs(x - y) for x, y in zip(inv, other))
            if err > _PAIR_TOL:
                raise ValidationError(
                    f"generators {self.names[i]!r} and {self.names[j]!r} "
                    f"are paired but not inverse (entry error {err:.3g})"
                )

    def __eq__(self, other):
        if not isinstance(other, GeneratorSet):
            return NotImplemented
        return (
            self.names == other.names
            and self.mats == other.mats
            and self.inverse_pairing == other.inverse_pairing
        )

    @property
    def k(self) -> int:
        return len(self.mats)

    def inverse_of(self, i: int) -> int:
        if self.inverse_pairing is None or i not in self.inverse_pairing:
            raise NoInverse(f"generator {self.names[i]!r} has no paired inverse")
        return self.inverse_pairing[i]


class CertStatus(Enum):
    VERIFIED = "Verified"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class HypothesisReport:
    """Certificate search outcome for the random-walk hypotheses.

    Verified statuses carry witness words; Inconclusive means the bounded
    search found nothing, not that the property fails.
    """

    moment_ok: bool
    unbounded: CertStatus
    strongly_irreducible: CertStatus
    witness_words: tuple
    search_depth: int


def pants(l1: float, l2: float, l3: float, include_inverses: bool = True) -> GeneratorSet:
    """Pair-of-pants generators with boundary geodesic lengths (l1, l2, l3).

    X = diag(e^{l1/2}, e^{-l1/2}); Y = [[a,1],[ad-1,d]] solves the two trace
    conditions tr Y = 2 cosh(l2/2) and tr XY = -2 cosh(l3/2).  The negative
    sign on tr XY picks the discrete (free) solution; the off-diagonal
    choice b = 1 fixes one representative of the conjugacy class.
    """
    for name, l in (("l1", l1), ("l2", l2), ("l3", l3)):
        if not (isinstance(l, (int, float)) and math.isfinite(l) and l > 0):
            raise DegenerateInput(f"{name} must be a positive finite length")
    try:
        alpha = math.exp(l1 / 2.0)
        t2 = 2.0 * math.cosh(l2 / 2.0)
        t3 = 2.0 * math.cosh(l3 / 2.0)
    except OverflowError:
        raise NumericFailure("boundary length too large to exponentiate") from None
    if not all(math.isfinite(v) for v in (alpha, t2, t3)):
        raise NumericFailure("boundary length too large to exponentiate")
    denom = alpha - 1.0 / alpha
    if denom == 0.0:
        raise DegenerateInput("trace system is singular")
    a = (-t3 - t2 / alpha) / denom
    d = t2 - a
    c = a * d - 1.0
    x = Mat2(alpha, 0.0, 0.0, 1.0 / alpha)
    y = Mat2(a, 1.0, c, d)
    prov = Pants(float(l1), float(l2), float(l3))
    if not include_inverses:
        return GeneratorSet(("X", "Y"), (x, y), None, prov)
    return GeneratorSet(
        ("X", "Y", "X^-1", "Y^-1"),
        (x, y, sl2_inverse(x), sl2_inverse(y)),
        {0: 2, 2: 0, 1: 3, 3: 1},
        prov,
    )


def sanov() -> GeneratorSet:
    """The free parabolic pair X=[[1,2],[0,1]], Y=[[1,0],[2,1]] with inverses."""
    x = Mat2(1.0, 2.0, 0.0, 1.0)
    y = Mat2(1.0, 0.0, 2.0, 1.0)
    return GeneratorSet(
        ("X", "Y", "X^-1", "Y^-1"),
        (x, y, sl2_inverse(x), sl2_inverse(y)),
        {0: 2, 2: 0, 1: 3, 3: 1},
        Sanov(),
    )


def load(config_text) -> GeneratorSet:
    """Parse a group config (JSON text or bytes) into a GeneratorSet.

    Schema: {"generators": [{"name": str, "matrix": [[a,b],[c,d]]}, ...],
    "inverse_pairs": [[i,j], ...] (optional)}.
    """
    if isinstance(config_text, bytes):
        try:
            config_text = config_text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"config is not valid UTF-8: {e}") from None
    try:
        obj = json.loads(config_text)
    except json.JSONDecodeError as e:
        raise ParseError(f"config is not valid JSON: {e}") from None
    if not isinstance(obj, dict) or "generators" not in obj:
        raise ParseError("config must be an object with a 'generators' list")
    raw_gens = obj["generators"]
    if not isinstance(raw_gens, list) or not raw_gens:
        raise ParseError("'generators' must be a non-empty list")
    names = []
    mats = []
    for entry in raw_gens:
        if not isinstance(entry, dict) or "name" not in entry or "matrix" not in entry:
            raise ParseError("each generator needs 'name' and 'matrix' fields")
        name = entry["name"]
        rows = entry["matrix"]
        if not isinstance(name, str):
            raise ParseError("generator name must be a string")
        if (
            not isinstance(rows, list)
            or len(rows) != 2
            or any(not isinstance(r, list) or len(r) != 2 for r in rows)
            or any(not isinstance(v, (int, float)) or isinstance(v, bool) for r in rows for v in r)
        ):
            raise ParseError(f"matrix for {name!r} must be 2x2 numeric, row-major")
        names.append(name)
        mats.append(Mat2(float(rows[0][0]), float(rows[0][1]), float(rows[1][0]), float(rows[1][1])))
    pairing = None
    if "inverse_pairs" in obj and obj["inverse_pairs"] is not None:
        raw_pairs = obj["inverse_pairs"]
        if not isinstance(raw_pairs, list) or any(
            not isinstance(p, list) or len(p) != 2 or any(not isinstance(v, int) or isinstance(v, bool) for v in p)
            for p in raw_pairs
        ):
            raise ParseError("'inverse_pairs' must be a list of [i, j] index pairs")
        pairing = {}
        for i, j in raw_pairs:
            if i in pairing or j in pairing:
                raise ValidationError("inverse pairing lists an index twice")
            pairing[i] = j
            pairing[j] = i
    return GeneratorSet(tuple(names), tuple(mats), pairing, Custom())


def dump_config(gens: GeneratorSet) -> str:
    """Serialize a GeneratorSet to config JSON; load(dump_config(g)) == g."""
    obj: dict = {
        "generators": [
            {"name": nm, "matrix": [[m.a, m.b], [m.c, m.d]]}
            for nm, m in zip(gens.names, gens.mats)
        ]
    }
    if gens.inverse_pairing is not None:
        pairs = sorted({tuple(sorted((i, j))) for i, j in gens.inverse_pairing.items()})
        obj["inverse_pairs"] = [list(p) for p in pairs]
    return json.dumps(obj, indent=2)


def _fixed_directions(m: Mat2) -> Optional[tuple[float, float]]:
    """Eigendirections of m on the projective line as angles in [0, pi).

    Returns None when the eigenvalues are not numerically separated (the
    element is then useless as an irreducibility witness).
    """
    t = trace(m)
    disc = t * t - 4.0 * det(m)
    if not (disc > 0.0 and math.isfinite(disc)):
        return None
    sq = math.sqrt(disc)
    angles = []
    for lam in ((t + sq) / 2.0, (t - sq) / 2.0):
        v1 = (m.b, lam - m.a)
        v2 = (lam - m.d, m.c)
        v = v1 if math.hypot(*v1) >= math.hypot(*v2) else v2
        if v == (0.0, 0.0):
            return None
        theta = math.fmod(math.atan2(v[1], v[0]), math.pi)
        if theta < 0.0:
            theta += math.pi
        angles.append(theta)
    angles.sort()
    return (angles[0], angles[1])


def _angular_distance(x: float, y: float) -> float:
    d = abs(x - y)
    return min(d, math.pi - d)


def _all_separated(pair_a: tuple[float, float], pair_b: tuple[float, float]) -> bool:
    four = (*pair_a, *pair_b)
    for i in range(4):
        for j in range(i + 1, 4):
            if _angular_distance(four[i], four[j]) <= _AXIS_SEP:
                return False
    return True


def validate(gens: GeneratorSet, search_depth: int = 6) -> HypothesisReport:
    """Search products of up to search_depth generators for hypothesis certificates.

    Unboundedness is witnessed by any hyperbolic product (its powers leave
    every bounded set).  Strong irreducibility is witnessed by two hyperbolic
    products whose four fixed directions on the projective line are pairwise
    separated: a finite invariant union of lines would have to sit inside
    both fixed-direction pairs at once.  Cost grows like k^depth.
    """
    from . import words as words_mod

    if search_depth < 1:
        raise ValueError("search_depth must be at least 1")
    k = gens.k
    first_word = None
    seen: list[tuple] = []  # (word, axis pair) of hyperbolic products found so far
    pair = None
    for depth in range(1, search_depth + 1):
        if pair is not None:
            break
        for letters in itertools.product(range(k), repeat=depth):
            w = words_mod.Word(letters)
            g = words_mod.evaluate(w, gens)
            if classify(g) is not ElementClass.HYPERBOLIC:
                continue
            if first_word is None:
                first_word = w
            axes = _fixed_directions(g.m)
            if axes is None:
                continue
            for w0, axes0 in seen:
                if _all_separated(axes0, axes):
                    pair = (w0, w)
                    break
            if pair is not None:
                break
            if len(seen) < 256:
                seen.append((w, axes))
    if pair is not None:
        return HypothesisReport(
            moment_ok=True,
            unbounded=CertStatus.VERIFIED,
            strongly_irreducible=CertStatus.VERIFIED,
            witness_words=pair,
            search_depth=search_depth,
        )
    if first_word is not None:
        return HypothesisReport(
            moment_ok=True,
            unbounded=CertStatus.VERIFIED,
            strongly_irreducible=CertStatus.INCONCLUSIVE,
            witness_words=(first_word,),
            search_depth=search_depth,
        )
    return HypothesisReport(
        moment_ok=True,
        unbounded=CertStatus.INCONCLUSIVE,
        strongly_irreducible=CertStatus.INCONCLUSIVE,
        witness_words=(),
        search_depth=search_depth,
    )
