"""Structural checks on closed-form constants and on certified estimates.

Every function returns a :class:`CheckReport`.  Checks flagged
``asserted=False`` are informational: they compare one-sided lower bounds
and can legitimately fail without contradicting any theorem.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ._rng import stream
from .classify import FINITE, INFINITE, linear_k, multilinear_k
from .estimate import estimate_kn
from .multiop import MultilinearOperator, extension_lhs, rhs_product
from .normsolver import operator_norm
from .tensorspace import DiscreteMeasure, as_exponent, dual
from .witnesses import CheckReport, check_positive_domination, convolution_operator, weak_sandwich

CLOSED_FORM_TOL = 1e-9


def verify_monotonicity_p(
    qs: Sequence, r, p_grid: Sequence, n: int | None = None, budget: int = 10, seed: int = 0
) -> CheckReport:
    """k is nonincreasing in p: closed forms on the grid, and estimates against them."""
    ps = sorted(as_exponent(p) for p in p_grid)
    rep = CheckReport("monotonicity_p")
    cls = [multilinear_k(qs, p, r) for p in ps]
    rep.data["closed_form"] = [{"p": p, **c.to_dict()} for p, c in zip(ps, cls)]
    for (p1, c1), (p2, c2) in zip(zip(ps, cls), zip(ps[1:], cls[1:])):
        if c1.known and c2.known:
            v1, v2 = c1.value, c2.value
            rep.add(f"closed form p={p1:g} -> {p2:g}", v2 <= v1 + CLOSED_FORM_TOL * max(1.0, v1), v1 - v2)
        elif c1.status == INFINITE and c2.status == FINITE:
            pass  # finite at the larger p is allowed
        elif c1.status == FINITE and c2.status == INFINITE:
            rep.add(f"status p={p1:g} -> {p2:g}", False, -math.inf)
    if n is not None:
        ests = [estimate_kn(qs, p, r, n, budget=budget, seed=seed) for p in ps]
        rep.data["estimates"] = [{"p": p, **e.to_dict()} for p, e in zip(ps, ests)]
        for i, (pi, ci) in enumerate(zip(ps, cls)):
            for j in range(i, len(ps)):
                if ci.known:
                    lo = ests[j].lower
                    rep.add(
                        f"estimate p={ps[j]:g} <= closed form p={pi:g}",
                        lo <= ci.value + 1e-6,
                        ci.value - lo,
                    )
        for i in range(len(ps) - 1):
            # shared witness: the larger-p witness re-evaluated at the smaller p
            w = ests[i + 1].witness
            b = operator_norm(w.operator, qs, ps[i], seed=seed)
            lhs = extension_lhs(w.operator, w.families, r, ps[i])
            ratio_small = lhs / (b.upper * w.rhs) if w.rhs > 0 else 0.0
            rep.add(
                f"shared witness p={ps[i + 1]:g} vs p={ps[i]:g}",
                w.ratio <= ratio_small + 1e-6,
                ratio_small - w.ratio,
                asserted=False,
            )
    return rep


def _interp_r(r1: float, r2: float, theta: float) -> float:
    inv = (1 - theta) * (0.0 if math.isinf(r1) else 1 / r1) + theta * (0.0 if math.isinf(r2) else 1 / r2)
    return math.inf if inv == 0 else 1.0 / inv


def verify_interpolation_r(
    qs: Sequence, p, r1, r2, theta_grid: Sequence[float], n: int | None = None, budget: int = 10, seed: int = 0
) -> CheckReport:
    """k(r) <= k(r1)^(1-theta) k(r2)^theta with 1/r = (1-theta)/r1 + theta/r2."""
    r1, r2 = as_exponent(r1), as_exponent(r2)
    rep = CheckReport("interpolation_r")
    c1, c2 = multilinear_k(qs, p, r1), multilinear_k(qs, p, r2)
    for theta in theta_grid:
        r = _interp_r(r1, r2, float(theta))
        c = multilinear_k(qs, p, r)
        if c1.status == FINITE and c2.status == FINITE and c.status == INFINITE:
            rep.add(f"status theta={theta:g}", False, -math.inf)
        if c.known and c1.known and c2.known:
            lhs = math.log(c.value)
            rhs = (1 - theta) * math.log(c1.value) + theta * math.log(c2.value)
            rep.add(f"closed form theta={theta:g}", lhs <= rhs + 1e-6, rhs - lhs)
        if n is not None and c1.known and c2.known:
            est = estimate_kn(qs, p, r, n, budget=budget, seed=seed)
            bound = c1.value ** (1 - theta) * c2.value**theta
            rep.add(f"estimate theta={theta:g}", est.lower <= bound + 1e-6, bound - est.lower, asserted=False)
    return rep


def verify_log_convexity_r(qs: Sequence, p, r_grid: Sequence) -> CheckReport:
    """Slopes of log k against 1/r must be nondecreasing along the grid."""
    rs = sorted((as_exponent(r) for r in r_grid), reverse=True)  # increasing 1/r
    rep = CheckReport("log_convexity_r")
    pts = []
    for r in rs:
        c = multilinear_k(qs, p, r)
        if c.known:
            pts.append((1.0 / r, math.log(c.value)))
    rep.data["points"] = pts
    slopes = [(y2 - y1) / (x2 - x1) for (x1, y1), (x2, y2) in zip(pts, pts[1:])]
    for i, (s1, s2) in enumerate(zip(slopes, slopes[1:])):
        # compare chord slopes scaled by the step so the tolerance is on log k itself
        h = pts[i + 2][0] - pts[i][0]
        rep.add(f"convexity at 1/r={pts[i + 1][0]:.6g}", (s1 - s2) * h <= 1e-6, (s2 - s1) * h)
    return rep


def verify_witness_interpolation(T: MultilinearOperator, families, qs, p, rs: Sequence) -> CheckReport:
    """For a fixed witness, the certified ratio is log-convex in 1/r (three-point form)."""
    rs = sorted(as_exponent(r) for r in rs)
    bracket = operator_norm(T, qs, p)
    ratio = {}
    for r in rs:
        ratio[r] = extension_lhs(T, families, r, p) / (bracket.upper * rhs_product(T, families, r, qs))
    rep = CheckReport("witness_interpolation")
    rep.data["ratios"] = {str(r): v for r, v in ratio.items()}
    for a, b, c in zip(rs, rs[1:], rs[2:]):
        # 1/b = (1-theta)/a + theta/c
        theta = (1 / a - 1 / b) / (1 / a - (0 if math.isinf(c) else 1 / c))
        bound = ratio[a] ** (1 - theta) * ratio[c] ** theta
        rep.add(f"r={b:g} between {a:g} and {c:g}", ratio[b] <= bound * (1 + 1e-12), bound - ratio[b])
    return rep


def verify_duality(q, p, r, tol: float = 1e-8) -> CheckReport:
    """k_{q,p}(r) against k_{p',q'}(r'): same status, same value when known."""
    a = linear_k(q, p, r)
    b = linear_k(dual(p), dual(q), dual(r))
    rep = CheckReport("duality")
    rep.add("status", a.status == b.status, 0.0 if a.status == b.status else -1.0)
    if a.known and b.known:
        diff = abs(a.value - b.value)
        rep.add("value", diff <= tol, tol - diff)
    rep.data = {"direct": a.to_dict(numeric=False), "dual": b.to_dict(numeric=False)}
    return rep


def _nonneg_family(rng, n_funcs: int, atoms: int) -> np.ndarray:
    vals = rng.exponential(size=(n_funcs, atoms))
    vals[rng.random(vals.shape) < 0.3] = 0.0
    return vals


def verify_positivity(
    N: int = 16, trials: int = 1000, rs: Sequence = (1, 1.7, 3, math.inf), seed: int = 0, young=(1, 2, 2)
) -> CheckReport:
    """Pointwise domination and the constant-one MZ inequality for cyclic convolution."""
    T = convolution_operator(N)
    q1, q2, p = young
    norm = operator_norm(T, [q1, q2], p).upper
    rep = CheckReport("positivity")
    worst_dom, worst_mz = math.inf, math.inf
    for t in range(trials):
        rng = stream(seed, t)
        fams = [_nonneg_family(rng, int(rng.integers(1, 5)), N) for _ in range(2)]
        for r in rs:
            worst_dom = min(worst_dom, check_positive_domination(T, fams, r))
            lhs = extension_lhs(T, fams, r, p)
            rhs = norm * rhs_product(T, fams, r, [q1, q2])
            worst_mz = min(worst_mz, (rhs - lhs) / max(rhs, 1e-300))
    rep.add("pointwise domination", worst_dom >= -1e-12, worst_dom)
    rep.add("MZ inequality with constant 1", worst_mz >= -1e-12, worst_mz)
    rep.data.update(N=N, trials=trials, norm=norm, young=list(young))
    return rep


def verify_weak_sandwich(trials: int = 1000, atoms: int = 32, seed: int = 0, rtol: float = 1e-10) -> CheckReport:
    """weak <= level-set sup <= (p/(p-s))^(1/s) weak on random weighted functions."""
    rep = CheckReport("weak_sandwich")
    worst = -math.inf
    for t in range(trials):
        rng = stream(seed, t)
        f = rng.standard_normal(atoms)
        f[rng.random(atoms) < 0.2] = 0.0
        f = np.round(f, int(rng.integers(1, 4)))  # repeated levels
        mu = DiscreteMeasure(rng.uniform(0.1, 2.0, atoms))
        p = float(rng.uniform(0.25, 4.0))
        if not np.any(f):
            f[0] = 1.0
        for s in (p / 4, p / 2, 3 * p / 4):
            worst = max(worst, weak_sandwich(f, p, s, mu)[3])
    rep.add("sandwich", worst <= rtol, -worst)
    rep.data.update(trials=trials, atoms=atoms)
    return rep


def verify_duality_grid(values: Sequence) -> CheckReport:
    """Duality over every (q, p, r) drawn from ``values``; mismatches are listed, not one check each."""
    vals = [as_exponent(v) for v in values]
    rep = CheckReport("duality_grid")
    status_bad, value_bad, compared, worst = [], [], 0, 0.0
    for q in vals:
        for p in vals:
            for r in vals:
                a = linear_k(q, p, r)
                b = linear_k(dual(p), dual(q), dual(r))
                if a.status != b.status:
                    status_bad.append([q, p, r])
                elif a.known and b.known:
                    compared += 1
                    diff = abs(a.value - b.value)
                    worst = max(worst, diff)
                    if diff > 1e-8:
                        value_bad.append([q, p, r])
    rep.add("status agreement", not status_bad, -len(status_bad))
    rep.add("value agreement", not value_bad, 1e-8 - worst)
    rep.data.update(
        triples=len(vals) ** 3,
        values_compared=compared,
        status_mismatches=status_bad[:20],
        value_mismatches=value_bad[:20],
    )
    return rep


DUALITY_VALUES = (1, 1.2, 4 / 3, 1.5, 1.8, 2, 2.5, 3, 4, 6, math.inf)
SUITES = ("positivity", "weak", "duality", "monotonicity", "interpolation", "littlewood")


def run_suite(name: str, trials: int = 1000, seed: int = 0) -> CheckReport:
    """Named check bundles used by the command line."""
    if name == "positivity":
        return verify_positivity(trials=trials, seed=seed)
    if name == "weak":
        return verify_weak_sandwich(trials=trials, seed=seed)
    if name == "duality":
        return verify_duality_grid(DUALITY_VALUES)
    if name == "monotonicity":
        return verify_monotonicity_p([1.5], 1.8, np.linspace(1.0, 1.5, 11))
    if name == "interpolation":
        return verify_log_convexity_r([1.5], 1, np.linspace(2.0, 1.5, 51)[:-1])
    if name == "littlewood":
        from .witnesses import basis_family, littlewood_witness

        return verify_witness_interpolation(
            littlewood_witness(4), [basis_family(4)] * 2, [math.inf] * 2, math.inf, [1, 4 / 3, 2, 4, math.inf]
        )
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
