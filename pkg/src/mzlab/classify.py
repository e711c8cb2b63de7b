"""Closed-form classification of the constants k_{q,p}(r) and k_{q1..qm,p}(r).

A constant is Finite (with a known value or not), Infinite, or Undetermined
(only partial information is available).  Known values are symbolic products
of ratios of stable moments c_{r,s}, evaluated lazily by quadrature.

Two engines implement every case analysis.  The nested-conditional engine
(:func:`linear_k`, :func:`multilinear_k`) follows the theorem statements and
reaches the p >= 2 part of the linear table by duality, k_{q,p}(r) =
k_{p',q'}(r').  The decision-table engine (:func:`linear_k_table`,
:func:`multilinear_k_table`) lists disjoint regions with their outcomes and
checks that exactly one row matches.  Tests compare the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .stablelaw import moment_constant
from .tensorspace import as_exponent, dual

FINITE = "finite"
INFINITE = "infinite"
UNDETERMINED = "undetermined"

_INF = math.inf


def _key(x: float) -> float:
    return round(float(x), 12)


@dataclass(frozen=True)
class MomentProduct:
    """prod c_{r,s} over ``num`` divided by prod c_{r,s} over ``den``; empty means 1."""

    num: tuple[tuple[float, float], ...] = ()
    den: tuple[tuple[float, float], ...] = ()

    @classmethod
    def ratio(cls, top: tuple[float, float], bottom: tuple[float, float]) -> "MomentProduct":
        return cls((top,), (bottom,)).canonical()

    def canonical(self) -> "MomentProduct":
        num = sorted((_key(r), _key(s)) for r, s in self.num)
        den = sorted((_key(r), _key(s)) for r, s in self.den)
        for item in list(num):
            if item in den:
                num.remove(item)
                den.remove(item)
        return MomentProduct(tuple(num), tuple(den))

    def __mul__(self, other: "MomentProduct") -> "MomentProduct":
        return MomentProduct(self.num + other.num, self.den + other.den).canonical()

    @property
    def is_one(self) -> bool:
        return not self.num and not self.den

    def evaluate(self) -> tuple[float, float]:
        """(value, absolute error) from the memoized quadrature moments."""
        value, rel = 1.0, 0.0
        for r, s in self.num:
            mv = moment_constant(r, s)
            value *= float(mv.value)
            rel += mv.error_estimate / mv.value
        for r, s in self.den:
            mv = moment_constant(r, s)
            value /= float(mv.value)
            rel += mv.error_estimate / mv.value
        return float(value), float(value * rel)

    def __str__(self) -> str:
        if self.is_one:
            return "1"
        fmt = lambda t: "c(%s,%s)" % (_num(t[0]), _num(t[1]))
        top = "*".join(fmt(t) for t in self.num) or "1"
        if not self.den:
            return top
        return top + "/" + "/".join(fmt(t) for t in self.den)

    def to_json(self) -> dict:
        return {"numerator": [list(t) for t in self.num], "denominator": [list(t) for t in self.den]}


def _num(x: float) -> str:
    return f"{x:.12g}"


ONE = MomentProduct()


@dataclass(frozen=True)
class KClassification:
    status: str
    formula: MomentProduct | None
    provenance: str

    def __post_init__(self):
        if self.status not in (FINITE, INFINITE, UNDETERMINED):
            raise ValueError(f"unknown status {self.status!r}")
        if self.formula is not None and self.status != FINITE:
            raise ValueError("only finite constants carry a value")
        if not self.provenance:
            raise ValueError("provenance must be nonempty")

    @property
    def known(self) -> bool:
        return self.status == FINITE and self.formula is not None

    @property
    def value(self) -> float | None:
        if self.status == INFINITE:
            return _INF
        return self.formula.evaluate()[0] if self.known else None

    @property
    def value_error(self) -> float | None:
        return self.formula.evaluate()[1] if self.known else None

    def signature(self) -> tuple:
        """Status and symbolic value, used to compare engines."""
        return (self.status, None if self.formula is None else (self.formula.num, self.formula.den))

    def to_dict(self, numeric: bool = True) -> dict:
        out = {"status": self.status, "provenance": self.provenance}
        if self.status == FINITE:
            out["formula"] = str(self.formula) if self.known else "unknown"
            if self.known and numeric:
                v, e = self.formula.evaluate()
                out["value"] = v
                out["value_error"] = e
        if self.status == INFINITE:
            out["value"] = "inf"
        return out


def _finite(formula, provenance) -> KClassification:
    return KClassification(FINITE, formula, provenance)


def _infinite(provenance) -> KClassification:
    return KClassification(INFINITE, None, provenance)


# provenance labels
P_TRIVIAL = "linear values theorem: q = 1 or p = inf gives k = 1"
P_INCREASING = "linear values theorem: 1 < q <= p < inf, finite iff min(q,2) <= r <= max(p,2), then k = 1"
P_INCREASING_OUT = "linear values theorem: 1 < q <= p < inf with r outside [min(q,2), max(p,2)]"
P_LOW = "linear values theorem: 1 <= p < q <= 2, q < r <= 2 gives c_{r,q}/c_{r,p}"
P_LOW_R2 = "linear values theorem: p < q = r = 2 gives c_{2,2}/c_{2,p}"
P_HIGH = "linear values theorem: 2 <= p < q, 2 <= r < p gives c_{r',p'}/c_{r',q'}"
P_HIGH_R2 = "linear values theorem with duality: p = 2 < q, r = 2 gives c_{2,2}/c_{2,q'}"
P_GAP = "linear values theorem: 1 <= p < 2 < q, r = 2 is finite with undetermined value"
P_GROTHENDIECK = (
    "Grothendieck inequality: k_{inf,1}(2) is the real Grothendieck constant (finite, value not asserted)"
)
P_DECREASING_OUT = "linear values theorem: p < q, r outside every finite case"

P_ONES = "all q_i = 1: k = 1 for every p and r"
P_REMARK_ONE = "q_i <= r <= p for all i: k = 1"
P_DIVERGENT = "sup-norm target: r below m (1/max(q',2) + sum 1/min(q_i,2))^(-1) forces k = inf"
P_INF_FINITE = "sup-norm target: r >= min(max q, 2) gives a finite constant of unknown value"
P_INF_GAP = "sup-norm target: r between the divergence threshold and min(max q, 2) is open"
P_IA = "multilinear theorem, max q <= p <= 2: finite iff max q <= r <= 2, product of linear constants"
P_IB = "multilinear theorem, 2 <= max q <= p: finite iff 2 <= r <= p"
P_IC = "multilinear theorem, max q <= 2 <= p: finite iff max q <= r <= p, product of linear constants"
P_IIA = "multilinear theorem, p < max q <= 2: finite iff max q < r <= 2 or max q = r = 2, product"
P_IIB = "multilinear theorem, 2 < p < max q: finite at r = 2, infinite outside [2, p)"
P_IIB_OPEN = "multilinear theorem, 2 < p < max q, 2 < r < p: only necessity is known"
P_IIC = "multilinear theorem, p <= 2 <= max q: finite iff r = 2"
P_P_EQ_R = "product lower bound is an equality when p = r"


def _snap(x: float) -> float:
    # boundaries such as q = r must survive p -> p' -> p'' rounding, so compare at 12 digits
    return x if math.isinf(x) else float(f"{x:.12g}")


def _check(qs, p, r):
    return [_snap(as_exponent(q)) for q in qs], _snap(as_exponent(p)), _snap(as_exponent(r))


# -- nested-conditional engine -------------------------------------------------------


def linear_k(q, p, r) -> KClassification:
    """Classify the linear constant k_{q,p}(r)."""
    (q,), p, r = _check([q], p, r)
    if q == 1.0 or math.isinf(p):
        return _finite(ONE, P_TRIVIAL)
    if q <= p:
        if min(q, 2.0) <= r <= max(p, 2.0):
            return _finite(ONE, P_INCREASING)
        return _infinite(P_INCREASING_OUT)
    # p < q from here on
    if p >= 2.0:
        # mirror into the q <= 2 half by duality
        mirrored = linear_k(dual(p), dual(q), dual(r))
        if mirrored.status != FINITE:
            return _infinite(P_DECREASING_OUT)
        label = P_HIGH_R2 if (p == 2.0 and r == 2.0) else P_HIGH
        return _finite(mirrored.formula, label)
    if q <= 2.0:
        if q < r <= 2.0:
            return _finite(MomentProduct.ratio((r, q), (r, p)), P_LOW)
        if q == 2.0 and r == 2.0:
            return _finite(MomentProduct.ratio((2.0, 2.0), (2.0, p)), P_LOW_R2)
        return _infinite(P_DECREASING_OUT)
    if r == 2.0:
        # p < 2 < q
        return _finite(None, P_GROTHENDIECK if (p == 1.0 and math.isinf(q)) else P_GAP)
    return _infinite(P_DECREASING_OUT)


def product_lower_bound(qs: Sequence, p, r) -> KClassification:
    """Product of the linear constants k_{q_i,p}(r), a lower bound for the multilinear one."""
    parts = [linear_k(q, p, r) for q in qs]
    if any(c.status == INFINITE for c in parts):
        return _infinite("product lower bound: some linear factor is infinite")
    if any(c.status == UNDETERMINED for c in parts):
        return KClassification(UNDETERMINED, None, "product lower bound: an undetermined factor")
    if any(not c.known for c in parts):
        return _finite(None, "product lower bound: some factor has unknown value")
    total = ONE
    for c in parts:
        total = total * c.formula
    return _finite(total, "product lower bound of linear constants")


def divergence_threshold(qs: Sequence[float]) -> float:
    """m (1/max(bq', 2) + sum 1/min(q_i, 2))^(-1) for the sup-norm target."""
    qs = [_snap(as_exponent(q)) for q in qs]
    bq = max(qs)
    first = 1.0 / max(dual(bq), 2.0)
    return _snap(len(qs) / (first + sum(1.0 / min(q, 2.0) for q in qs)))


def multilinear_k(qs: Sequence, p, r) -> KClassification:
    """Classify k_{q1..qm,p}(r); m = 1 defers to :func:`linear_k`."""
    qs, p, r = _check(qs, p, r)
    if not qs:
        raise ValueError("need at least one input exponent")
    if all(q == 1.0 for q in qs):
        return _finite(ONE, P_ONES)
    if len(qs) == 1:
        return linear_k(qs[0], p, r)
    bq = max(qs)

    def product(label):
        prod = product_lower_bound(qs, p, r)
        return _finite(prod.formula, label)

    if math.isinf(p):
        if bq <= r:
            return _finite(ONE, P_REMARK_ONE)
        if r < divergence_threshold(qs):
            return _infinite(P_DIVERGENT)
        if r >= min(bq, 2.0):
            return _finite(None, P_INF_FINITE)
        return KClassification(UNDETERMINED, None, P_INF_GAP)

    if bq <= p:
        if p <= 2.0:
            return product(P_IA) if bq <= r <= 2.0 else _infinite(P_IA)
        if bq >= 2.0:
            if not 2.0 <= r <= p:
                return _infinite(P_IB)
            return product(P_IB) if r >= bq else _finite(None, P_IB)
        return product(P_IC) if bq <= r <= p else _infinite(P_IC)

    if bq <= 2.0:
        ok = (bq < r <= 2.0) or (bq == 2.0 and r == 2.0)
        return product(P_IIA) if ok else _infinite(P_IIA)
    if p > 2.0:
        if r == 2.0:
            return _finite(None, P_IIB)
        if 2.0 < r < p:
            return KClassification(UNDETERMINED, None, P_IIB_OPEN)
        return _infinite(P_IIB)
    if r != 2.0:
        return _infinite(P_IIC)
    return product(P_P_EQ_R) if p == 2.0 else _finite(None, P_IIC)


# -- decision-table engine ----------------------------------------------------------


@dataclass(frozen=True)
class Row:
    name: str
    region: Callable[..., bool]
    outcome: Callable[..., KClassification]


def _c(r, s):
    return (r, s)


LINEAR_TABLE: tuple[Row, ...] = (
    Row("q=1", lambda q, p, r: q == 1, lambda q, p, r: _finite(ONE, P_TRIVIAL)),
    Row("p=inf", lambda q, p, r: q > 1 and p == _INF, lambda q, p, r: _finite(ONE, P_TRIVIAL)),
    Row(
        "q<=p inside",
        lambda q, p, r: 1 < q <= p < _INF and min(q, 2) <= r <= max(p, 2),
        lambda q, p, r: _finite(ONE, P_INCREASING),
    ),
    Row(
        "q<=p outside",
        lambda q, p, r: 1 < q <= p < _INF and not (min(q, 2) <= r <= max(p, 2)),
        lambda q, p, r: _infinite(P_INCREASING_OUT),
    ),
    Row(
        "p<q<=2, q<r<=2",
        lambda q, p, r: p < q <= 2 and q < r <= 2,
        lambda q, p, r: _finite(MomentProduct((_c(r, q),), (_c(r, p),)).canonical(), P_LOW),
    ),
    Row(
        "p<q=r=2",
        lambda q, p, r: p < q == 2 and r == 2,
        lambda q, p, r: _finite(MomentProduct(((2.0, 2.0),), ((2.0, p),)).canonical(), P_LOW_R2),
    ),
    Row(
        "2<=p<q, 2<=r<p",
        lambda q, p, r: 2 <= p < q and p < _INF and 2 <= r < p,
        lambda q, p, r: _finite(
            MomentProduct(((_snap(dual(r)), _snap(dual(p))),), ((_snap(dual(r)), _snap(dual(q))),)).canonical(), P_HIGH
        ),
    ),
    Row(
        "p=2<q, r=2",
        lambda q, p, r: p == 2 < q and r == 2,
        lambda q, p, r: _finite(MomentProduct(((2.0, 2.0),), ((2.0, _snap(dual(q))),)).canonical(), P_HIGH_R2),
    ),
    Row(
        "p<2<q, r=2",
        lambda q, p, r: p < 2 < q and r == 2,
        lambda q, p, r: _finite(None, P_GROTHENDIECK if (p == 1 and q == _INF) else P_GAP),
    ),
    Row(
        "p<q, no finite case",
        lambda q, p, r: q > 1
        and p < q
        and p < _INF
        and not (q <= 2 and q < r <= 2)
        and not (q == 2 and r == 2)
        and not (2 <= p and 2 <= r < p)
        and not (p <= 2 <= q and r == 2),
        lambda q, p, r: _infinite(P_DECREASING_OUT),
    ),
)


def _lookup(table, *args) -> KClassification:
    hits = [row for row in table if row.region(*args)]
    if len(hits) != 1:
        names = [row.name for row in hits]
        raise AssertionError(f"decision table is not a partition at {args}: matches {names}")
    return hits[0].outcome(*args)


def linear_k_table(q, p, r) -> KClassification:
    (q,), p, r = _check([q], p, r)
    return _lookup(LINEAR_TABLE, q, p, r)


def _prod_formula(qs, p, r):
    out = ONE
    for q in qs:
        c = linear_k_table(q, p, r)
        if not c.known:
            return None
        out = out * c.formula
    return out


def _prod(label):
    return lambda qs, bq, p, r: _finite(_prod_formula(qs, p, r), label)


def _const(status, label, formula=None):
    return lambda qs, bq, p, r: KClassification(status, formula, label)


def _thr(qs):
    return divergence_threshold(qs)


MULTI_TABLE: tuple[Row, ...] = (
    Row("inf: q_i <= r", lambda qs, bq, p, r: p == _INF and bq <= r, _const(FINITE, P_REMARK_ONE, ONE)),
    Row("inf: divergent", lambda qs, bq, p, r: p == _INF and r < _thr(qs), _const(INFINITE, P_DIVERGENT)),
    Row(
        "inf: finite",
        lambda qs, bq, p, r: p == _INF and min(bq, 2) <= r < bq,
        _const(FINITE, P_INF_FINITE),
    ),
    Row(
        "inf: gap",
        lambda qs, bq, p, r: p == _INF and _thr(qs) <= r < min(bq, 2),
        _const(UNDETERMINED, P_INF_GAP),
    ),
    Row("ia in", lambda qs, bq, p, r: bq <= p <= 2 and bq <= r <= 2, _prod(P_IA)),
    Row("ia out", lambda qs, bq, p, r: bq <= p <= 2 and not bq <= r <= 2, _const(INFINITE, P_IA)),
    Row("ib product", lambda qs, bq, p, r: 2 <= bq <= p < _INF and p > 2 and bq <= r <= p, _prod(P_IB)),
    Row(
        "ib unknown",
        lambda qs, bq, p, r: 2 <= bq <= p < _INF and p > 2 and 2 <= r < bq,
        _const(FINITE, P_IB),
    ),
    Row(
        "ib out",
        lambda qs, bq, p, r: 2 <= bq <= p < _INF and p > 2 and not 2 <= r <= p,
        _const(INFINITE, P_IB),
    ),
    Row("ic in", lambda qs, bq, p, r: bq < 2 < p < _INF and bq <= r <= p, _prod(P_IC)),
    Row("ic out", lambda qs, bq, p, r: bq < 2 < p < _INF and not bq <= r <= p, _const(INFINITE, P_IC)),
    Row(
        "iia in",
        lambda qs, bq, p, r: p < bq <= 2 and (bq < r <= 2 or bq == r == 2),
        _prod(P_IIA),
    ),
    Row(
        "iia out",
        lambda qs, bq, p, r: p < bq <= 2 and not (bq < r <= 2 or bq == r == 2),
        _const(INFINITE, P_IIA),
    ),
    Row("iib r=2", lambda qs, bq, p, r: 2 < p < bq and r == 2, _const(FINITE, P_IIB)),
    Row("iib open", lambda qs, bq, p, r: 2 < p < bq and 2 < r < p, _const(UNDETERMINED, P_IIB_OPEN)),
    Row("iib out", lambda qs, bq, p, r: 2 < p < bq and not 2 <= r < p, _const(INFINITE, P_IIB)),
    Row("iic p=r=2", lambda qs, bq, p, r: p == 2 < bq and r == 2, _prod(P_P_EQ_R)),
    Row("iic r=2", lambda qs, bq, p, r: p < 2 < bq and r == 2, _const(FINITE, P_IIC)),
    Row("iic out", lambda qs, bq, p, r: p <= 2 < bq and r != 2, _const(INFINITE, P_IIC)),
)


def multilinear_k_table(qs: Sequence, p, r) -> KClassification:
    qs, p, r = _check(qs, p, r)
    if max(qs) == 1.0:
        return _finite(ONE, P_ONES)
    if len(qs) == 1:
        return linear_k_table(qs[0], p, r)
    return _lookup(MULTI_TABLE, tuple(qs), max(qs), p, r)
