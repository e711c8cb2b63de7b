"""Certified numerical lower bounds on k^(n)_{q,p}(r).

A candidate operator T and families F_1..F_m give the ratio
extension_lhs / (||T||_upper * prod mixed_norm(F_i)), a true lower bound on
k^(n) because the upper end of the norm bracket is used.  Candidates are the
tensor identity, Hadamard forms (bilinear sup-norm case) and Gaussian
tensors refined by hill climbing on the coefficients.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._rng import stream
from .multiop import ExponentTriple, MultilinearOperator, tensor_product
from .normsolver import NormBracket, family_ascent, operator_norm
from .tensorspace import FunctionFamily
from .witnesses import LITTLEWOOD_SIZES, basis_family, littlewood_witness

_MAX_ATOMS = 4096


@dataclass(frozen=True, eq=False)
class Witness:
    name: str
    operator: MultilinearOperator
    families: tuple[FunctionFamily, ...]
    bracket: NormBracket
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs <= 0 or self.bracket.upper <= 0:
            return 0.0
        return self.lhs / (self.bracket.upper * self.rhs)

    def digest(self) -> str:
        payload = {
            "operator": self.operator.to_dict(),
            "families": [f.to_dict() for f in self.families],
        }
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class KEstimate:
    triple: ExponentTriple
    n: int
    lower: float
    witness: Witness
    seed: int
    budget: int
    candidates: tuple[tuple[str, float], ...]
    converged: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "lower": self.lower,
            "witness": self.witness.name,
            "witness_digest": self.witness.digest(),
            "norm_upper": self.witness.bracket.upper,
            "norm_method": self.witness.bracket.method,
            "lhs": self.witness.lhs,
            "rhs_product": self.witness.rhs,
            "seed": self.seed,
            "budget": self.budget,
            "converged": self.converged,
            "candidates": [{"name": n, "lower": v} for n, v in self.candidates],
        }


def tensor_identity(dims: Sequence[int]) -> MultilinearOperator:
    """(f_1, ..., f_m) -> f_1 x ... x f_m on the product of counting measures."""
    return tensor_product(*[MultilinearOperator(np.eye(d)) for d in dims])


def _starts(T: MultilinearOperator, n: int) -> list[list[np.ndarray]]:
    basis = [basis_family(n, d) for d in T.input_dims]
    # every function on one atom: the l^r aggregate is then as concentrated as possible
    spike = [np.eye(1, d).repeat(n, axis=0) for d in T.input_dims]
    return [basis, spike]


def evaluate_candidate(
    name: str, T: MultilinearOperator, qs, p, r, n: int, budget: int, seed: int, restarts: int = 2
) -> tuple[Witness, bool]:
    bracket = operator_norm(T, qs, p, seed=seed, budget=budget)
    asc = family_ascent(T, qs, p, r, n, budget=budget, seed=seed, restarts=restarts, starts=_starts(T, n))
    w = Witness(name, T, asc.families, bracket, asc.lhs, asc.rhs)
    return w, asc.converged and bracket.converged


def estimate_kn(
    qs: Sequence,
    p,
    r,
    n: int,
    dims: Sequence[int] | None = None,
    budget: int = 20,
    seed: int = 0,
    restarts: int = 2,
) -> KEstimate:
    """Best certified lower bound on k^(n) over the candidate witnesses.

    ``dims`` is (output atoms, input atoms per slot) for the random
    candidates; it defaults to n everywhere.  ``budget`` bounds both the
    ascent iterations and the number of hill-climbing steps.
    """
    triple = ExponentTriple(tuple(qs), p, r)
    qs, p, r = list(triple.qs), triple.p, triple.r
    m = triple.m
    if n < 1:
        raise ValueError("n must be >= 1")
    dims = [n] * (m + 1) if dims is None else [int(d) for d in dims]
    if len(dims) != m + 1:
        raise ValueError("dims lists the output size then one size per input slot")

    results: list[tuple[Witness, bool]] = []
    ident_dims = dims[1:]
    if math.prod(ident_dims) <= _MAX_ATOMS:
        results.append(
            evaluate_candidate("tensor_identity", tensor_identity(ident_dims), qs, p, r, n, budget, seed, restarts)
        )
    if m == 2 and all(math.isinf(q) for q in qs) and n in LITTLEWOOD_SIZES and n > 1:
        results.append(evaluate_candidate("hadamard", littlewood_witness(n), qs, p, r, n, budget, seed, restarts))

    rng = stream(seed, 31)
    shape = tuple(dims)
    best_random = None
    for k in range(max(1, restarts)):
        T = MultilinearOperator(rng.standard_normal(shape))
        cand = evaluate_candidate(f"gaussian_{k}", T, qs, p, r, n, budget, seed + k, restarts)
        results.append(cand)
        if best_random is None or cand[0].ratio > best_random[0].ratio:
            best_random = cand

    # hill climb on the coefficients of the best random candidate
    current, conv = best_random
    step = 0.5
    for it in range(budget):
        trial = current.operator.with_coeffs(current.operator.coeffs + step * rng.standard_normal(shape))
        cand, c = evaluate_candidate(f"climb_{it}", trial, qs, p, r, n, budget, seed, restarts=1)
        if cand.ratio > current.ratio:
            current, conv = cand, c
        else:
            step *= 0.8
    results.append((current, conv))

    best, best_conv = max(results, key=lambda wc: wc[0].ratio)
    cands = tuple((w.name, w.ratio) for w, _ in results)
    return KEstimate(triple, n, best.ratio, best, seed, budget, cands, best_conv)
