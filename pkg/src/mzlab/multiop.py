"""Dense m-linear operators between finite weighted L^q spaces.

``coeffs[j, i1, ..., im]`` is the coefficient of output atom ``j``; the
operator acts by T(f1, ..., fm)(j) = sum coeffs[j, i] f1(i1) ... fm(im).
A scalar-valued form is an operator with one output atom of weight 1.

Extension values are indexed by the multi-index (k1, ..., km) of the input
families, flattened row-major (k1 outermost) wherever a flat order is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensorspace import (
    DiscreteMeasure,
    FunctionFamily,
    as_exponent,
    exponent_json,
    lp_norm,
    mixed_norm,
    pointwise_lr,
    weak_lp_quasinorm,
)

_LETTERS = "abcdefghijklmnopqrstuvw"


@dataclass(frozen=True)
class ExponentTriple:
    qs: tuple[float, ...]
    p: float
    r: float

    def __post_init__(self):
        qs = tuple(as_exponent(q) for q in self.qs)
        if not qs:
            raise ValueError("at least one input exponent is required")
        object.__setattr__(self, "qs", qs)
        object.__setattr__(self, "p", as_exponent(self.p))
        object.__setattr__(self, "r", as_exponent(self.r))

    @property
    def m(self) -> int:
        return len(self.qs)

    def to_dict(self) -> dict:
        return {
            "q": [exponent_json(q) for q in self.qs],
            "p": exponent_json(self.p),
            "r": exponent_json(self.r),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExponentTriple":
        return cls(tuple(data["q"]), data["p"], data["r"])


@dataclass(frozen=True, eq=False)
class MultilinearOperator:
    coeffs: np.ndarray
    input_measures: tuple[DiscreteMeasure, ...] = None
    output_measure: DiscreteMeasure = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim < 2:
            raise ValueError("coefficient tensor needs an output axis and at least one input axis")
        if c.ndim - 1 > len(_LETTERS) - 2:
            raise ValueError("arity too large")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        ins = self.input_measures
        if ins is None:
            ins = tuple(DiscreteMeasure.counting(d) for d in c.shape[1:])
        ins = tuple(ins)
        if len(ins) != c.ndim - 1:
            raise ValueError(f"{len(ins)} input measures for arity {c.ndim - 1}")
        for axis, mu in enumerate(ins):
            if mu.size != c.shape[axis + 1]:
                raise ValueError(f"input measure {axis} has {mu.size} atoms, tensor axis has {c.shape[axis + 1]}")
        out = self.output_measure if self.output_measure is not None else DiscreteMeasure.counting(c.shape[0])
        if out.size != c.shape[0]:
            raise ValueError(f"output measure has {out.size} atoms, tensor has {c.shape[0]} output rows")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "input_measures", ins)
        object.__setattr__(self, "output_measure", out)

    @classmethod
    def scalar_form(cls, matrix, input_measures=None) -> "MultilinearOperator":
        """Scalar-valued form from a tensor indexed by inputs only."""
        return cls(np.asarray(matrix, dtype=float)[None, ...], input_measures)

    @property
    def arity(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def input_dims(self) -> tuple[int, ...]:
        return tuple(self.coeffs.shape[1:])

    @property
    def output_dim(self) -> int:
        return int(self.coeffs.shape[0])

    def scaled(self, factor: float) -> "MultilinearOperator":
        return MultilinearOperator(self.coeffs * factor, self.input_measures, self.output_measure)

    def with_coeffs(self, coeffs) -> "MultilinearOperator":
        return MultilinearOperator(coeffs, self.input_measures, self.output_measure)

    def to_dict(self) -> dict:
        return {
            "arity": self.arity,
            "input_dims": list(self.input_dims),
            "coeffs": [float(x) for x in self.coeffs.reshape(-1)],
            "output_measure": self.output_measure.to_dict(),
            "input_measures": [mu.to_dict() for mu in self.input_measures],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MultilinearOperator":
        out = DiscreteMeasure.from_dict(data["output_measure"])
        dims = [int(d) for d in data["input_dims"]]
        if len(dims) != int(data["arity"]):
            raise ValueError("input_dims length differs from arity")
        flat = np.asarray(data["coeffs"], dtype=float)
        shape = (out.size, *dims)
        if flat.size != math.prod(shape):
            raise ValueError(f"coeffs has {flat.size} entries, expected {math.prod(shape)}")
        ins = data.get("input_measures")
        ins = None if ins is None else tuple(DiscreteMeasure.from_dict(x) for x in ins)
        return cls(flat.reshape(shape), ins, out)

    def __eq__(self, other):
        return (
            isinstance(other, MultilinearOperator)
            and np.array_equal(self.coeffs, other.coeffs)
            and self.input_measures == other.input_measures
            and self.output_measure == other.output_measure
        )

    __hash__ = None


def _contract(coeffs: np.ndarray, args: Sequence[np.ndarray]) -> np.ndarray:
    """out[k1..km, j] = sum_i coeffs[j, i1..im] a1[k1, i1] ... am[km, im]."""
    m = coeffs.ndim - 1
    ins = _LETTERS[:m]
    outs = _LETTERS[m : 2 * m]
    spec = "z" + ins + "," + ",".join(o + i for o, i in zip(outs, ins)) + "->" + outs + "z"
    return np.einsum(spec, coeffs, *args, optimize=True)


def _check_slots(T: MultilinearOperator, args) -> None:
    if len(args) != T.arity:
        raise ValueError(f"operator has arity {T.arity}, got {len(args)} arguments")


def apply(T: MultilinearOperator, *fs) -> np.ndarray:
    """Evaluate T(f1, ..., fm) on the output atoms."""
    _check_slots(T, fs)
    vecs = []
    for i, f in enumerate(fs):
        v = np.asarray(f, dtype=float).reshape(-1)
        if v.size != T.input_dims[i]:
            raise ValueError(f"argument {i} has length {v.size}, expected {T.input_dims[i]}")
        vecs.append(v[None, :])
    return _contract(T.coeffs, vecs).reshape(T.output_dim)


def _family_values(T: MultilinearOperator, families) -> list[np.ndarray]:
    _check_slots(T, families)
    out = []
    for i, fam in enumerate(families):
        if isinstance(fam, FunctionFamily):
            if fam.measure != T.input_measures[i]:
                raise ValueError(f"family {i} lives on a different measure than input slot {i}")
            vals = fam.values
        else:
            vals = np.asarray(fam, dtype=float)
            vals = vals[None, :] if vals.ndim == 1 else vals
        if vals.ndim != 2 or vals.shape[1] != T.input_dims[i]:
            raise ValueError(f"family {i} must have {T.input_dims[i]} columns")
        out.append(vals)
    return out


def extension_values(T: MultilinearOperator, families) -> np.ndarray:
    """Array of T(f_{k1}, ..., f_{km}) with shape (K1, ..., Km, output_dim)."""
    return _contract(T.coeffs, _family_values(T, families))


def pointwise_extension(T: MultilinearOperator, families, r) -> np.ndarray:
    """Pointwise l^r norm over all multi-indices, one value per output atom."""
    vals = extension_values(T, families)
    return pointwise_lr(vals.reshape(-1, T.output_dim), r, axis=0)


def extension_lhs(T: MultilinearOperator, families, r, p) -> float:
    """|| (sum_k |T(f_{k1}, ..., f_{km})|^r)^(1/r) ||_{L^p(output measure)}."""
    return lp_norm(pointwise_extension(T, families, r), p, T.output_measure, allow_low=True)


def extension_lhs_weak(T: MultilinearOperator, families, r, p) -> float:
    """Same aggregate, finished with the weak L^p quasinorm instead (finite p only)."""
    p = as_exponent(p, allow_low=True)
    if math.isinf(p):
        raise ValueError("the weak quasinorm needs a finite p")
    return weak_lp_quasinorm(pointwise_extension(T, families, r), p, T.output_measure)


def rhs_product(T: MultilinearOperator, families, r, qs) -> float:
    """Product of the input-side mixed norms."""
    vals = _family_values(T, families)
    if len(qs) != T.arity:
        raise ValueError("one exponent per input slot is required")
    return math.prod(
        mixed_norm(FunctionFamily(v, mu), r, q) for v, mu, q in zip(vals, T.input_measures, qs)
    )


def tensor_product(*ops: MultilinearOperator) -> MultilinearOperator:
    """(T1 x ... x Tm)(f1, ..., fm)(w1, ..., wm) = T1 f1(w1) ... Tm fm(wm).

    Output atoms are ordered row-major over (w1, ..., wm).
    """
    if not ops:
        raise ValueError("need at least one operator")
    for i, op in enumerate(ops):
        if op.arity != 1:
            raise ValueError(f"factor {i} has arity {op.arity}; tensor products take linear operators")
    coeffs = ops[0].coeffs
    out = ops[0].output_measure
    for op in ops[1:]:
        # (J, I..) x (j, i) -> (J, j, I.., i) then merge output axes
        a, b = coeffs, op.coeffs
        c = np.multiply.outer(a, b)
        k = a.ndim
        c = np.moveaxis(c, k, 1)
        coeffs = c.reshape(a.shape[0] * b.shape[0], *a.shape[1:], b.shape[1])
        out = out.product(op.output_measure)
    return MultilinearOperator(coeffs, tuple(op.input_measures[0] for op in ops), out)
