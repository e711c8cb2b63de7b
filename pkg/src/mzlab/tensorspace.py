"""Finite atomic measure spaces, function families and their mixed norms.

Exponents are plain floats in ``[1, inf]`` with ``math.inf`` standing for the
sup-norm endpoint; every kernel branches on ``math.isinf`` explicitly, so sup
norms are bit-exact maxima rather than limits of large powers.  Exponents in
``(0, 1)`` are accepted only by the quasinorm entry points (``lp_norm`` with
``allow_low=True``, ``weak_lp_quasinorm`` and the level-set suprema).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

INF = math.inf


class ExponentError(ValueError):
    """Raised for an exponent outside the admissible range."""


def as_exponent(value: Any, *, allow_low: bool = False) -> float:
    """Parse an exponent; accepts numbers and the strings ``"inf"``/``"∞"``."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "∞", "+inf"):
            return INF
        if "/" in text:
            num, den = text.split("/", 1)
            value = float(num) / float(den)
        else:
            value = float(text)
    p = float(value)
    if math.isnan(p):
        raise ExponentError("exponent is NaN")
    if p >= 1.0:
        return p
    if allow_low and p > 0.0:
        return p
    lo = "(0, inf]" if allow_low else "[1, inf]"
    raise ExponentError(f"exponent {p!r} outside {lo}")


def dual(p: float) -> float:
    """Conjugate exponent p/(p-1) with 1 <-> inf exact.

    The result is snapped to 15 significant digits so that ``dual(dual(p))``
    returns ``p`` for decimal inputs such as 1.2 (float division would drift).
    """
    p = as_exponent(p)
    if p == 1.0:
        return INF
    if math.isinf(p):
        return 1.0
    return float(f"{p / (p - 1.0):.15g}")


def exponent_str(p: float) -> str:
    return "inf" if math.isinf(p) else repr(float(p))


def exponent_json(p: float) -> float | str:
    return "inf" if math.isinf(p) else float(p)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite measure given by strictly positive atom weights."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size == 0:
            raise ValueError("a measure needs at least one atom")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("atom weights must be finite and > 0")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def counting(cls, n: int) -> "DiscreteMeasure":
        return cls(np.ones(int(n)))

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def is_counting(self) -> bool:
        return bool(np.all(self.weights == 1.0))

    def product(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        """Product measure, atoms ordered row-major (self index outer)."""
        return DiscreteMeasure(np.outer(self.weights, other.weights).reshape(-1))

    def to_dict(self) -> dict:
        return {"weights": [float(x) for x in self.weights]}

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteMeasure":
        return cls(np.asarray(data["weights"], dtype=float))

    def __eq__(self, other):
        return isinstance(other, DiscreteMeasure) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())


@dataclass(frozen=True, eq=False)
class FunctionFamily:
    """``n_functions x n_atoms`` matrix of function values on ``measure``."""

    values: np.ndarray
    measure: DiscreteMeasure = field(default=None)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValueError("a family is a nonempty 2-d array (functions x atoms)")
        measure = self.measure if self.measure is not None else DiscreteMeasure.counting(v.shape[1])
        if v.shape[1] != measure.size:
            raise ValueError(
                f"family has {v.shape[1]} columns but the measure has {measure.size} atoms"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "measure", measure)

    @property
    def n_functions(self) -> int:
        return int(self.values.shape[0])

    def with_values(self, values) -> "FunctionFamily":
        return FunctionFamily(values, self.measure)

    def to_dict(self) -> dict:
        return {"values": self.values.tolist(), "measure": self.measure.to_dict()}

    def __eq__(self, other):
        return (
            isinstance(other, FunctionFamily)
            and np.array_equal(self.values, other.values)
            and self.measure == other.measure
        )

    __hash__ = None

    @classmethod
    def from_dict(cls, data: dict) -> "FunctionFamily":
        measure = data.get("measure")
        return cls(
            np.asarray(data["values"], dtype=float),
            None if measure is None else DiscreteMeasure.from_dict(measure),
        )


def _weights(f: np.ndarray, measure: DiscreteMeasure | Sequence[float] | None) -> np.ndarray:
    if measure is None:
        return np.ones(f.shape[-1])
    w = measure.weights if isinstance(measure, DiscreteMeasure) else np.asarray(measure, float)
    if w.shape[-1] != f.shape[-1]:
        raise ValueError(f"function has {f.shape[-1]} values but the measure has {w.shape[-1]} atoms")
    return w


def lp_norm(f, p, measure=None, *, allow_low: bool = False) -> float:
    """(sum_j |f_j|^p w_j)^(1/p), or max_j |f_j| when p is inf."""
    p = as_exponent(p, allow_low=allow_low)
    a = np.abs(np.asarray(f, dtype=float)).reshape(-1)
    w = _weights(a, measure)
    top = float(a.max()) if a.size else 0.0
    if math.isinf(p) or top == 0.0:
        return top
    return top * math.fsum((a / top) ** p * w) ** (1.0 / p)


def pointwise_lr(values: np.ndarray, r, axis=0) -> np.ndarray:
    """Pointwise l^r norm of a stack of functions along ``axis`` (max when r is inf)."""
    r = as_exponent(r)
    a = np.abs(np.asarray(values, dtype=float))
    if a.size == 0:
        raise ValueError("empty family")
    top = a.max(axis=axis, keepdims=True)
    if math.isinf(r):
        return np.squeeze(top, axis=axis)
    safe = np.where(top > 0, top, 1.0)
    if r >= 8:
        moved = np.moveaxis((a / safe) ** r, axis, -1)
        sums = np.apply_along_axis(math.fsum, -1, moved)
    else:
        sums = np.sum((a / safe) ** r, axis=axis)
    return np.squeeze(top, axis=axis) * sums ** (1.0 / r)


def mixed_norm(family: FunctionFamily, r, q) -> float:
    """|| (sum_k |f_k|^r)^(1/r) ||_{L^q(mu)} for the family's measure."""
    return lp_norm(pointwise_lr(family.values, r, axis=0), q, family.measure)


def _levels(f, measure):
    """Distinct nonzero levels of |f| in decreasing order with mu(|f| >= level)."""
    a = np.abs(np.asarray(f, dtype=float)).reshape(-1)
    w = _weights(a, measure)
    order = np.argsort(-a, kind="stable")
    a, w = a[order], w[order]
    keep = a > 0
    a, w = a[keep], w[keep]
    if a.size == 0:
        return a, a, a
    cum = np.cumsum(w)
    last = np.r_[a[1:] != a[:-1], True]
    return a[last], cum[last], (a, w)


def weak_lp_quasinorm(f, p, measure=None) -> float:
    """sup_{t>0} t * mu(|f| > t)^(1/p), exact over the distinct levels of |f|.

    The distribution function is a step function, so the supremum is the
    largest ``v * mu(|f| >= v)^(1/p)`` over the attained values ``v``.
    """
    p = as_exponent(p, allow_low=True)
    if math.isinf(p):
        raise ExponentError("weak L^p needs a finite p")
    levels, mass, _ = _levels(f, measure)
    if levels.size == 0:
        return 0.0
    return float(np.max(levels * mass ** (1.0 / p)))


def level_set_sup(f, p, s, measure=None) -> float:
    """sup over sets E of mu(E)^(1/p-1/s) (int_E |f|^s)^(1/s), for 0 < s < p.

    Scans the super-level sets {|f| >= v}.  This is the supremum over every
    subset of atoms, and even over fractional sets: for a fixed mass the
    integral is maximized greedily by value, and along each greedy segment
    the logarithmic derivative of the objective has an increasing numerator,
    so its only critical point is a minimum and the maximum sits at a segment
    end, i.e. at a super-level set.
    """
    p = as_exponent(p, allow_low=True)
    s = float(s)
    if not 0 < s < p:
        raise ExponentError(f"need 0 < s < p, got s={s}, p={p}")
    levels, mass, raw = _levels(f, measure)
    if levels.size == 0:
        return 0.0
    a, w = raw
    integral = np.cumsum(a**s * w)
    last = np.r_[a[1:] != a[:-1], True]
    integral = integral[last]
    return float(np.max(mass ** (1.0 / p - 1.0 / s) * integral ** (1.0 / s)))
