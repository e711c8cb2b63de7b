"""Explicit operators that certify lower bounds or positivity.

* Sylvester-Hadamard bilinear forms on l^inf_n x l^inf_n (Littlewood-type probes).
* Random sign tensors eps[j1, ..., j_{m+1}] read as m-linear maps into l^p_n.
* Cyclic convolution on Z_N and pointwise domination checks for positive maps.
* The two-sided comparison between the weak L^p quasinorm and the level-set supremum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._rng import stream
from .multiop import (
    MultilinearOperator,
    apply,
    extension_lhs,
    extension_lhs_weak,
    pointwise_extension,
    rhs_product,
)
from .normsolver import NormBracket, operator_norm
from .tensorspace import (
    FunctionFamily,
    as_exponent,
    level_set_sup,
    pointwise_lr,
    weak_lp_quasinorm,
)

LITTLEWOOD_SIZES = (1, 2, 4, 8, 16)


def sylvester_hadamard(n: int) -> np.ndarray:
    """H_1 = [1], H_2k = [[H_k, H_k], [H_k, -H_k]]."""
    if n < 1 or n & (n - 1):
        raise ValueError(f"n must be a power of 2, got {n}")
    H = np.ones((1, 1))
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    return H


def littlewood_witness(n: int) -> MultilinearOperator:
    """The Hadamard matrix as a scalar bilinear form on l^inf_n x l^inf_n."""
    if n not in LITTLEWOOD_SIZES:
        raise ValueError(f"n={n} is outside the exactly enumerable sizes {LITTLEWOOD_SIZES}")
    return MultilinearOperator.scalar_form(sylvester_hadamard(n))


def basis_family(n: int, d: int | None = None) -> np.ndarray:
    """Rows e_1, ..., e_n (zero rows once n exceeds the dimension d)."""
    d = n if d is None else d
    return np.eye(n, d)


@dataclass(frozen=True, eq=False)
class ProbePoint:
    n: int
    seed: int
    lhs: float
    rhs: float
    bracket: NormBracket

    @property
    def ratio(self) -> float:
        """Certified lower bound on k^(n): exact LHS over (upper norm x exact RHS)."""
        return self.lhs / (self.bracket.upper * self.rhs)

    def to_row(self) -> dict:
        return {
            "n": self.n,
            "lower_bound": self.ratio,
            "norm_upper": self.bracket.upper,
            "norm_lower": self.bracket.lower,
            "lhs": self.lhs,
            "rhs_product": self.rhs,
            "seed": self.seed,
            "norm_method": self.bracket.method,
        }


@dataclass(frozen=True, eq=False)
class GrowthReport:
    kind: str
    qs: tuple[float, ...]
    p: float
    r: float
    points: tuple[ProbePoint, ...]

    @property
    def ratios(self) -> list[float]:
        return [pt.ratio for pt in self.points]

    @property
    def growth_exponent(self) -> float:
        """Least-squares slope of log(ratio) against log(n)."""
        if len(self.points) < 2:
            return math.nan
        x = np.log([pt.n for pt in self.points])
        y = np.log(self.ratios)
        return float(np.polyfit(x, y, 1)[0])


def littlewood_point(n: int, r) -> ProbePoint:
    """Exact Littlewood ratio at size n: basis families, enumerated norm."""
    T = littlewood_witness(n)
    bracket = operator_norm(T, [math.inf, math.inf], math.inf, mode="exact")
    fams = [basis_family(n), basis_family(n)]
    lhs = extension_lhs(T, fams, r, math.inf)
    rhs = rhs_product(T, fams, r, [math.inf, math.inf])
    return ProbePoint(n, 0, lhs, rhs, bracket)


def littlewood_probe(ns: Sequence[int], r) -> GrowthReport:
    r = as_exponent(r)
    pts = tuple(littlewood_point(n, r) for n in ns)
    return GrowthReport("littlewood", (math.inf, math.inf), math.inf, r, pts)


@dataclass(frozen=True, eq=False)
class SignTensor:
    m: int
    n: int
    entries: np.ndarray
    seed: int
    attempt: int = 0

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.shape != (self.n,) * (self.m + 1):
            raise ValueError("sign tensor must have shape n^(m+1)")
        if not np.all(np.abs(e) == 1):
            raise ValueError("sign tensor entries must be +1 or -1")

    def operator(self) -> MultilinearOperator:
        """First index is the output atom; the others are the m inputs."""
        return MultilinearOperator(np.asarray(self.entries, dtype=float))


def random_sign_tensor(m: int, n: int, seed: int, attempt: int = 0) -> SignTensor:
    rng = stream(seed, 100_000 + attempt)
    entries = np.where(rng.integers(0, 2, size=(n,) * (m + 1)) == 1, 1.0, -1.0)
    return SignTensor(m, n, entries, seed, attempt)


def ksz_witness(m: int, n: int, qs, p, seed: int, attempts: int = 20):
    """Best of ``attempts`` random sign tensors, ranked by the upper end of the norm.

    Norms are exact (vertex enumeration or per-slice spectral norms); an
    exponent pattern without an exact mode raises ``NoExactMode``.  Ties go to
    the lowest attempt index.
    """
    if len(qs) != m:
        raise ValueError(f"need {m} input exponents")
    if attempts < 1:
        raise ValueError("attempts must be >= 1")
    best = None
    for a in range(attempts):
        sign = random_sign_tensor(m, n, seed, a)
        T = sign.operator()
        bracket = operator_norm(T, qs, p, mode="exact")
        if best is None or bracket.upper < best[2].upper:
            best = (sign, T, bracket)
    sign, T, bracket = best
    return T, bracket, sign


def divergence_probe(
    m: int, ns: Sequence[int], qs, r, seeds: Sequence[int] | int = 0, p=math.inf, attempts: int = 20
) -> GrowthReport:
    """Certified ratios n^(m/r) / (||T||_upper prod n^(1/q_i)) for sign tensors and basis families."""
    qs = tuple(as_exponent(q) for q in qs)
    r = as_exponent(r)
    seeds = [seeds] * len(ns) if np.isscalar(seeds) else list(seeds)
    if len(seeds) != len(ns):
        raise ValueError("one seed per size is required")
    pts = []
    for n, seed in zip(ns, seeds):
        T, bracket, _ = ksz_witness(m, n, qs, p, seed, attempts)
        fams = [basis_family(n) for _ in range(m)]
        lhs = extension_lhs(T, fams, r, p)
        rhs = rhs_product(T, fams, r, qs)
        pts.append(ProbePoint(n, int(seed), lhs, rhs, bracket))
    return GrowthReport("ksz", qs, as_exponent(p), r, tuple(pts))


def convolution_operator(N: int) -> MultilinearOperator:
    """Cyclic convolution on Z_N: T(f, g)(x) = sum_y f(x - y) g(y), counting measure."""
    if N < 1:
        raise ValueError("N must be >= 1")
    a = np.arange(N)
    coeffs = np.zeros((N, N, N))
    coeffs[(a[:, None] + a[None, :]) % N, a[:, None], a[None, :]] = 1.0
    return MultilinearOperator(coeffs)


def check_positive_domination(T: MultilinearOperator, families, r) -> float:
    """min over output atoms of T(|F_1|_r, ..., |F_m|_r) - (sum_k |T(f_k..)|^r)^(1/r)."""
    if np.any(T.coeffs < 0):
        raise ValueError("operator not positive")
    lhs = pointwise_extension(T, families, r)
    vals = [f.values if isinstance(f, FunctionFamily) else np.atleast_2d(np.asarray(f, float)) for f in families]
    dominating = apply(T, *[pointwise_lr(v, r, axis=0) for v in vals])
    return float(np.min(dominating - lhs))


@dataclass
class CheckReport:
    name: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, name: str, passed: bool, margin: float, asserted: bool = True, **extra):
        self.checks.append(
            {"name": name, "pass": bool(passed), "margin": float(margin), "asserted": bool(asserted), **extra}
        )

    @property
    def passed(self) -> bool:
        """Informational checks (asserted=False) never fail a report."""
        return all(c["pass"] for c in self.checks if c["asserted"])

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": self.passed, "checks": self.checks, "data": self.data}


def weak_sandwich(f, p, s, measure=None, rtol: float = 1e-10) -> tuple[float, float, float, float]:
    """(weak, level-set sup, upper factor, worst relative violation) for one function."""
    weak = weak_lp_quasinorm(f, p, measure)
    sup = level_set_sup(f, p, s, measure)
    factor = (p / (p - s)) ** (1.0 / s)
    scale = max(weak, 1e-300)
    violation = max(weak - sup, sup - factor * weak) / scale
    return weak, sup, factor, violation


def weak_extension_check(T: MultilinearOperator, qs, p, families, r, s_grid, rtol: float = 1e-10) -> CheckReport:
    """Level-set sandwich of the weak quasinorm of the extension, plus the weak MZ ratio.

    The ratio divides the weak left side by the strong norm's upper end times
    the mixed norms; since the weak norm of T never exceeds its strong norm
    the reported value is a lower estimate of the weak constant.  It is
    reported, not asserted.  The strong norm is only computed when every
    exponent is at least 1.
    """
    p = as_exponent(p, allow_low=True)
    out = pointwise_extension(T, families, r)
    rep = CheckReport("weak_sandwich")
    for s in s_grid:
        s = float(s)
        if not 0 < s < p:
            raise ValueError(f"need 0 < s < p, got s={s}")
        weak, sup, factor, viol = weak_sandwich(out, p, s, T.output_measure, rtol)
        rep.add(f"sandwich s={s:g}", viol <= rtol, -viol, weak=weak, level_sup=sup, factor=factor)
    weak_lhs = extension_lhs_weak(T, families, r, p)
    rep.data["weak_lhs"] = weak_lhs
    if p >= 1 and all(as_exponent(q, allow_low=True) >= 1 for q in qs):
        bracket = operator_norm(T, qs, p)
        rhs = rhs_product(T, families, r, qs)
        rep.data["norm_upper"] = bracket.upper
        rep.data["weak_ratio"] = weak_lhs / (bracket.upper * rhs) if rhs > 0 and bracket.upper > 0 else 0.0
    return rep
