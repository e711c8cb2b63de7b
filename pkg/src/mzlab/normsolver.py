"""Operator norms of dense multilinear maps, exact or bracketed.

Every computation first rescales the coefficient tensor so that all spaces
carry counting measure: A[j, i] = nu_j^(1/p) C[j, i] prod_s mu_s(i_s)^(-1/q_s).
The output norm is then dualized, which turns ||T|| into the supremum of an
(m+1)-linear form over a product of unit balls whose exponents are
(p', q_1, ..., q_m).  Slot 0 always denotes the output.

A slot with exponent inf or 1 has finitely many extreme points worth
checking (sign vectors and basis vectors), so the form's supremum is found
by enumerating those slots and solving the rest in closed form.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from ._rng import stream
from .multiop import MultilinearOperator, apply, extension_lhs
from .tensorspace import FunctionFamily, as_exponent, dual, lp_norm, mixed_norm, pointwise_lr

ENUMERATION_LIMIT = 2**25
_BLOCK = 1 << 14
_LETTERS = "abcdefghijklmnop"


class EnumerationTooLarge(ValueError):
    pass


class NoExactMode(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NormBracket:
    lower: float
    upper: float
    lower_witness: tuple[np.ndarray, ...]
    method: str
    tolerance: float = 0.0
    converged: bool = True
    upper_method: str = ""
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper * (1 + 1e-12) + 1e-300:
            raise ValueError(f"inconsistent bracket [{self.lower}, {self.upper}]")

    @property
    def exact(self) -> bool:
        return self.method in ("exact", "vertex_enum", "spectral")

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "method": self.method,
            "upper_method": self.upper_method,
            "converged": self.converged,
            "tolerance": self.tolerance,
            "lower_witness": [np.asarray(w).tolist() for w in self.lower_witness],
        }


def _inv(e: float) -> float:
    return 0.0 if math.isinf(e) else 1.0 / e


def dual_align(vector, q) -> np.ndarray:
    """argmax of <vector, x> over the unit ball of l^q.

    q = inf gives the sign vector with sign(0) = +1; q = 1 gives a signed
    indicator of the largest |entry|, ties going to the lowest index.
    """
    q = as_exponent(q)
    v = np.asarray(vector, dtype=float).reshape(-1)
    if not np.any(v):
        raise ValueError("undefined alignment for the zero vector")
    sign = np.where(v < 0, -1.0, 1.0)
    if math.isinf(q):
        return sign
    if q == 1.0:
        out = np.zeros_like(v)
        k = int(np.argmax(np.abs(v)))
        out[k] = sign[k]
        return out
    a = np.abs(v)
    top = a.max()
    x = sign * (a / top) ** (1.0 / (q - 1.0))
    return x / lp_norm(x, q)


def mixed_align(V: np.ndarray, outer, inner) -> np.ndarray:
    """argmax of <V, G> over ||G||_{l^outer over columns (l^inner over rows)} <= 1.

    Each column is aligned against the inner exponent, then the column
    weights are aligned against the outer exponent.  Zero columns stay zero.
    """
    V = np.asarray(V, dtype=float)
    inner_dual = dual(inner)
    beta = pointwise_lr(V, inner_dual, axis=0)
    if not np.any(beta):
        raise ValueError("undefined alignment for the zero tensor")
    weights = dual_align(beta, outer)
    G = np.zeros_like(V)
    for a in np.flatnonzero(beta):
        G[:, a] = weights[a] * dual_align(V[:, a], inner)
    return G


class Reduced(NamedTuple):
    A: np.ndarray  # (n_out, d1..dm) in counting-measure coordinates
    input_scale: tuple[np.ndarray, ...]  # f = x * scale
    scalar_out: bool


def reduce(T: MultilinearOperator, qs, p) -> Reduced:
    qs = [as_exponent(q) for q in qs]
    p = as_exponent(p)
    if len(qs) != T.arity:
        raise ValueError(f"{len(qs)} input exponents for arity {T.arity}")
    A = T.coeffs * (T.output_measure.weights ** _inv(p)).reshape((-1,) + (1,) * T.arity)
    scales = []
    for s, (mu, q) in enumerate(zip(T.input_measures, qs)):
        sc = mu.weights ** (-_inv(q))
        shape = [1] * (T.arity + 1)
        shape[s + 1] = -1
        A = A * sc.reshape(shape)
        scales.append(sc)
    return Reduced(A, tuple(scales), T.output_dim == 1)


def _form_exponents(qs, p, scalar_out) -> list[float]:
    # a one-atom output contributes |.| whatever p is; exponent 1 makes the slot a single basis vector
    out = 1.0 if scalar_out else dual(as_exponent(p))
    return [out] + [as_exponent(q) for q in qs]


def _contract_except(F: np.ndarray, xs: Sequence[np.ndarray | None]) -> np.ndarray:
    """Contract every slot whose vector is given; None slots stay free."""
    k = F.ndim
    idx = _LETTERS[:k]
    ops, args = [idx], [F]
    for s, x in enumerate(xs):
        if x is not None:
            ops.append(idx[s])
            args.append(x)
    free = "".join(idx[s] for s, x in enumerate(xs) if x is None)
    return np.einsum(",".join(ops) + "->" + free, *args, optimize=True)


def form_value(F: np.ndarray, xs) -> float:
    return float(_contract_except(F, list(xs)))


def _candidates(e: float, d: int) -> np.ndarray:
    """Extreme points up to a global sign for slots with exponent inf or 1."""
    if d == 1:
        return np.ones((1, 1))
    if e == 1.0:
        return np.eye(d)
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=d - 1)))
    return np.hstack([np.ones((signs.shape[0], 1)), signs])


def _is_vertex(e: float, d: int) -> bool:
    return d == 1 or e == 1.0 or math.isinf(e)


def _exact_plan(exps: Sequence[float], dims: Sequence[int]):
    """Choose enumerated slots and the free block; None when no exact mode applies."""
    slots = range(len(exps))
    non_vertex = [s for s in slots if not _is_vertex(exps[s], dims[s])]
    spectral = False
    if len(non_vertex) == 0:
        # leave the costliest enumerable slot free
        cost = lambda s: (dims[s] - 1) if math.isinf(exps[s]) else math.log2(max(dims[s], 1))
        free = [max(slots, key=lambda s: (cost(s), -s))]
    elif len(non_vertex) == 1:
        free = non_vertex
    elif len(non_vertex) == 2 and all(exps[s] == 2.0 for s in non_vertex):
        free, spectral = non_vertex, True
    else:
        return None
    enum = [s for s in slots if s not in free]
    count = 1
    for s in enum:
        count *= _candidates_count(exps[s], dims[s])
    return enum, free, spectral, count


def _candidates_count(e: float, d: int) -> int:
    if d == 1:
        return 1
    return d if e == 1.0 else 2 ** (d - 1)


def _solve_exact(F: np.ndarray, exps: Sequence[float]):
    """Exact supremum of |F| over the unit balls; returns (value, optimal vectors, method)."""
    dims = F.shape
    plan = _exact_plan(exps, dims)
    if plan is None:
        raise NoExactMode(_pattern_message(exps, dims))
    enum, free, spectral, count = plan
    if count > ENUMERATION_LIMIT:
        raise EnumerationTooLarge(
            f"vertex enumeration needs {count} points, above the limit {ENUMERATION_LIMIT}"
        )
    cands = [_candidates(exps[s], dims[s]) for s in enum]
    sizes = [c.shape[0] for c in cands]
    best_val, best_idx = -1.0, None
    idx = _LETTERS[: F.ndim]
    free_idx = "".join(idx[s] for s in free)
    spec = ",".join([idx] + ["z" + idx[s] for s in enum]) + "->z" + free_idx
    for start in range(0, count, _BLOCK):
        flat = np.arange(start, min(start + _BLOCK, count))
        multi = np.unravel_index(flat, sizes) if enum else ()
        vecs = [c[mi] for c, mi in zip(cands, multi)]
        if enum:
            part = np.einsum(spec, F, *vecs, optimize=True)
        else:
            part = F[None, ...]
        vals = _free_values(part, [exps[s] for s in free], spectral)
        k = int(np.argmax(vals))  # first maximum: lowest enumeration index
        if vals[k] > best_val * (1 + 1e-13) or best_idx is None:
            best_val, best_idx = float(vals[k]), int(flat[k])
    xs: list = [None] * F.ndim
    if enum:
        multi = np.unravel_index(best_idx, sizes)
        for s, c, mi in zip(enum, cands, multi):
            xs[s] = c[int(mi)]
    v = _contract_except(F, xs)
    if spectral:
        u, sv, vt = np.linalg.svd(v)
        xs[free[0]], xs[free[1]] = u[:, 0], vt[0]
    elif np.any(v):
        xs[free[0]] = dual_align(v, exps[free[0]])
    else:
        xs[free[0]] = _unit(exps[free[0]], dims[free[0]])
    if spectral:
        method = "spectral"
    elif any(math.isinf(exps[s]) and dims[s] > 1 for s in enum):
        method = "vertex_enum"
    else:
        method = "exact"
    return best_val, xs, method


def _unit(e: float, d: int) -> np.ndarray:
    x = np.zeros(d)
    x[0] = 1.0
    return x


def _free_values(part: np.ndarray, exps, spectral: bool) -> np.ndarray:
    if spectral:
        return np.linalg.svd(part, compute_uv=False)[:, 0]
    return pointwise_lr(part, dual(exps[0]), axis=1)


def _pattern_message(exps, dims) -> str:
    desc = ", ".join("inf" if math.isinf(e) else f"{e:g}" for e in exps)
    return (
        f"no exact mode for slot exponents ({desc}) with dims {tuple(dims)}; exact modes need all "
        "slots but one in {1, inf}, or all but two with both remaining slots at exponent 2"
    )


def holder_upper(F: np.ndarray, exps: Sequence[float]) -> float:
    """Iterated dual-norm contraction of |F|, minimized over slot orderings."""
    best = math.inf
    k = F.ndim
    absF = np.abs(F)
    for order in itertools.permutations(range(k)):
        G = absF
        axes = list(range(k))
        for s in order:
            ax = axes.index(s)
            G = pointwise_lr(G, dual(exps[s]), axis=ax)
            axes.pop(ax)
        best = min(best, float(G))
    return best


def _kappa(e: float, d: int) -> float:
    # sup of ||x||_2 over the unit ball of l^e in d dimensions
    return d ** (0.5 - _inv(e)) if e > 2.0 else 1.0


def spectral_upper(F: np.ndarray, exps: Sequence[float]) -> float:
    """Min over slot bipartitions of sigma_max(unfolding) times the l^2 inflation factors."""
    k = F.ndim
    kap = math.prod(_kappa(e, d) for e, d in zip(exps, F.shape))
    best = math.inf
    for size in range(1, k):
        for left in itertools.combinations(range(k), size):
            if 0 not in left:
                continue  # complements give the same unfolding
            right = [s for s in range(k) if s not in left]
            M = np.transpose(F, list(left) + right).reshape(
                math.prod(F.shape[s] for s in left), -1
            )
            best = min(best, float(np.linalg.norm(M, 2)) * kap)
    return best


def schur_upper(F: np.ndarray, exps: Sequence[float]) -> float:
    """Schur-test bound: Hoelder against the measure |F| with exponents summing to one.

    With sum 1/a_s = 1, sum |F| prod |x_s| <= prod_s (max_i M_s(i))^(1/a_s), where
    M_s are the slot marginals of |F|.  The a_s are the slot exponents scaled
    uniformly; scaling down costs the usual d^(1/a - 1/e) inflation.
    """
    # one-atom slots hold a scalar of modulus <= 1 and need no exponent budget
    inv = [_inv(e) if d > 1 else 0.0 for e, d in zip(exps, F.shape)]
    total = sum(inv)
    if total == 0.0:
        return math.inf
    absF = np.abs(F)
    bound = 1.0
    for s, (w, d) in enumerate(zip(inv, F.shape)):
        a_inv = w / total
        if a_inv == 0.0:
            continue
        marginal = absF.sum(axis=tuple(j for j in range(F.ndim) if j != s))
        bound *= float(marginal.max()) ** a_inv * d ** max(a_inv - w, 0.0)
    return bound


def form_upper(F: np.ndarray, exps) -> tuple[float, str]:
    bounds = [(holder_upper(F, exps), "holder_bound"), (schur_upper(F, exps), "schur_bound")]
    if F.ndim >= 2:
        bounds.append((spectral_upper(F, exps), "spectral_bound"))
    return min(bounds, key=lambda b: b[0])


def _random_unit(rng: np.random.Generator, e: float, d: int) -> np.ndarray:
    x = rng.standard_normal(d)
    if math.isinf(e):
        return np.where(x < 0, -1.0, 1.0)
    return x / lp_norm(x, e)


def alternating_ascent(F: np.ndarray, exps, budget: int, seed: int, restarts: int, starts=()):
    """Multi-start block ascent on |F|; returns (value, vectors, converged)."""
    k = F.ndim
    best_val, best_xs, all_conv = -1.0, None, True
    inits = [list(s) for s in starts]
    for t in range(restarts):
        rng = stream(seed, 7000 + t)
        inits.append([_random_unit(rng, exps[s], F.shape[s]) for s in range(k)])
    for xs in inits:
        val = abs(form_value(F, xs))
        conv = False
        for _ in range(budget):
            prev = val
            for s in range(k):
                others = [x if j != s else None for j, x in enumerate(xs)]
                v = _contract_except(F, others)
                if np.any(v):
                    xs[s] = dual_align(v, exps[s])
            val = abs(form_value(F, xs))
            if val - prev <= 1e-10 * max(val, 1e-300):
                conv = True
                break
        all_conv &= conv
        if val > best_val:
            best_val, best_xs = val, [x.copy() for x in xs]
    return best_val, best_xs, all_conv


def _witness_and_value(T, red: Reduced, qs, p, xs) -> tuple[tuple[np.ndarray, ...], float]:
    inputs = tuple(x * sc for x, sc in zip(xs[1:], red.input_scale))
    value = lp_norm(apply(T, *inputs), p, T.output_measure)
    return inputs, value


def operator_norm(
    T: MultilinearOperator,
    qs,
    p,
    mode: str = "auto",
    budget: int = 200,
    seed: int = 0,
    restarts: int = 20,
) -> NormBracket:
    """Norm of T from prod L^{q_i}(mu_i) to L^p(nu).

    ``mode`` is ``"auto"`` (exact when a mode applies, bracket otherwise),
    ``"exact"`` (raise :class:`NoExactMode` if none applies) or
    ``"bracket"`` (ascent lower bound plus a sound coefficient upper bound).
    The lower end is always re-evaluated directly at ``lower_witness``.
    """
    qs = [as_exponent(q) for q in qs]
    p = as_exponent(p)
    red = reduce(T, qs, p)
    exps = _form_exponents(qs, p, red.scalar_out)
    F = red.A
    if mode not in ("auto", "exact", "bracket"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode != "bracket":
        plan = _exact_plan(exps, F.shape)
        usable = plan is not None and plan[3] <= ENUMERATION_LIMIT
        if usable or mode == "exact":
            val, xs, method = _solve_exact(F, exps)
            wit, lower = _witness_and_value(T, red, qs, p, xs)
            upper = max(val, lower)
            return NormBracket(lower, upper, wit, method, tolerance=upper - lower, upper_method=method)
    val, xs, conv = alternating_ascent(F, exps, budget, seed, restarts)
    wit, lower = _witness_and_value(T, red, qs, p, xs)
    upper, how = form_upper(F, exps)
    upper = max(upper, lower)
    return NormBracket(lower, upper, wit, "alternating", tolerance=upper - lower, converged=conv, upper_method=how)


# -- family ascent ---------------------------------------------------------------


class AscentResult(NamedTuple):
    families: tuple[FunctionFamily, ...]
    lhs: float
    rhs: float
    converged: bool
    iterations: int

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else 0.0


def _family_lhs(A, Gs, r, p) -> tuple[float, np.ndarray]:
    m = A.ndim - 1
    ins = _LETTERS[1 : m + 1]
    outs = _LETTERS[m + 1 : 2 * m + 1]
    spec = "a" + ins + "," + ",".join(o + i for o, i in zip(outs, ins)) + "->a" + outs
    Y = np.einsum(spec, A, *Gs, optimize=True).reshape(A.shape[0], -1)
    return lp_norm(pointwise_lr(Y, r, axis=1), p), Y


def _normalize_family(G: np.ndarray, q, r) -> np.ndarray:
    n = lp_norm(pointwise_lr(G, r, axis=0), q)
    return G / n if n > 0 else G


def family_ascent(
    T: MultilinearOperator,
    qs,
    p,
    r,
    n_funcs,
    budget: int = 200,
    seed: int = 0,
    restarts: int = 4,
    starts: Sequence[Sequence] = (),
) -> AscentResult:
    """Block-coordinate ascent of extension_lhs over unit mixed-norm families.

    Families live in L^{q_i}(l^r) of the input measures; each block update
    aligns one family with the partial contraction of the current dual
    certificate, which lies in l^{p'}(l^{r'}) over (output atom, multi-index).
    ``n_funcs`` is an int or one count per slot; ``starts`` adds explicit
    starting families (arrays of shape n_i x d_i in the operator's measures).
    """
    qs = [as_exponent(q) for q in qs]
    p, r = as_exponent(p), as_exponent(r)
    m = T.arity
    ns = [int(n_funcs)] * m if np.isscalar(n_funcs) else [int(n) for n in n_funcs]
    if len(ns) != m or min(ns) < 1:
        raise ValueError("n_funcs must be >= 1 for every slot")
    red = reduce(T, qs, p)
    A = red.A
    inits = []
    for st in starts:
        Gs = [np.asarray(f, float) / sc for f, sc in zip(st, red.input_scale)]
        inits.append([_normalize_family(G, q, r) for G, q in zip(Gs, qs)])
    for t in range(restarts):
        rng = stream(seed, 9000 + t)
        inits.append(
            [_normalize_family(rng.standard_normal((n, d)), q, r) for n, d, q in zip(ns, T.input_dims, qs)]
        )
    if not inits:
        raise ValueError("no starting point: give restarts >= 1 or explicit starts")
    best = None
    ins = _LETTERS[1 : m + 1]
    outs = _LETTERS[m + 1 : 2 * m + 1]
    it = 0
    for Gs in inits:
        val, Y = _family_lhs(A, Gs, r, p)
        conv = False
        for it in range(1, budget + 1):
            prev = val
            for s in range(m):
                if not np.any(Y):
                    break
                H = mixed_align(Y.T, dual(p), dual(r)).T.reshape((A.shape[0], *[G.shape[0] for G in Gs]))
                ops = ["a" + outs, "a" + ins] + [outs[j] + ins[j] for j in range(m) if j != s]
                spec = ",".join(ops) + "->" + outs[s] + ins[s]
                V = np.einsum(spec, H, A, *[Gs[j] for j in range(m) if j != s], optimize=True)
                if np.any(V):
                    Gs[s] = mixed_align(V, qs[s], r)
                val, Y = _family_lhs(A, Gs, r, p)
            if val - prev <= 1e-10 * max(val, 1e-300):
                conv = True
                break
        if best is None or val > best[0]:
            best = (val, [G.copy() for G in Gs], conv, it)
    _, Gs, conv, it = best
    fams = tuple(
        FunctionFamily(G * sc, mu) for G, sc, mu in zip(Gs, red.input_scale, T.input_measures)
    )
    lhs = extension_lhs(T, fams, r, p)
    rhs = math.prod(mixed_norm(f, r, q) for f, q in zip(fams, qs))
    return AscentResult(fams, lhs, rhs, conv, it)
