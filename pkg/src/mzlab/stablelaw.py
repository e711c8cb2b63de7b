"""Symmetric r-stable laws with characteristic function exp(-|t|^r).

The normalization is fixed globally: r = 2 is the Gaussian of variance 2 and
r = 1 the standard Cauchy law.  Constants tabulated elsewhere may use another
scale.

``c_{r,s}`` denotes (E|X|^s)^(1/s).  It is finite for 0 < s < r < 2, and for
every s > 0 when r = 2.  The stable identity says that for independent copies
X_1, ..., X_n and reals a_k the variable sum a_k X_k has the law of
(sum |a_k|^r)^(1/r) X_1, whence (E|sum a_k X_k|^s)^(1/s) = c_{r,s} ||a||_r.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate, special
from scipy.stats import qmc

from ._rng import stream

# Moment orders this close to r (with r < 2) are rejected: the moment diverges at s = r.
MOMENT_GAP = 1e-6
_CHUNK = 1 << 18
RQMC_REPLICATES = 16


class QuadratureError(RuntimeError):
    """Quadrature did not reach the requested accuracy."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error {achieved:.3g})")
        self.achieved = achieved


class MomentDivergence(ValueError):
    """Requested a moment of order s >= r for an r-stable law with r < 2."""


@dataclass(frozen=True)
class StableLaw:
    r: float

    def __post_init__(self):
        r = float(self.r)
        if not 0.0 < r <= 2.0:
            raise ValueError(f"stability exponent must lie in (0, 2], got {r}")
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class MomentValue:
    r: float
    s: float
    value: float
    method: str
    error_estimate: float
    std_error: float | None = None

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("moment constant must be positive")
        if self.error_estimate < 0:
            raise ValueError("error estimate must be nonnegative")


def _law(law) -> StableLaw:
    return law if isinstance(law, StableLaw) else StableLaw(float(law))


def _check_order(r: float, s: float) -> None:
    if not s > 0:
        raise ValueError(f"moment order must be positive, got {s}")
    if r < 2.0 and s >= r - MOMENT_GAP:
        raise MomentDivergence(f"moment diverges: s={s} >= r={r} for an r-stable law with r < 2")


def _truncation_point(r: float, tol: float) -> float:
    """T with (1/pi) int_T^inf exp(-t^r) dt < tol / 10."""
    scale = special.gamma(1.0 / r) / (math.pi * r)
    t = 1.0
    while scale * special.gammaincc(1.0 / r, t**r) >= tol / 10.0:
        t *= 1.5
    return t


def _quad(func, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(func, a, b, limit=400, **kw)


def stable_density(law, x: float, tol: float = 1e-10, full_output: bool = False):
    """Density w(x) = (1/pi) int_0^inf exp(-t^r) cos(x t) dt.

    The cosine integral is truncated where the remaining mass of exp(-t^r)
    drops below tol/10 and integrated adaptively with a cosine weight.
    Raises :class:`QuadratureError` if the error estimate exceeds ``tol``.
    """
    law = _law(law)
    if not tol > 0:
        raise ValueError("tol must be positive")
    r = law.r
    x = abs(float(x))
    val, err = _density_raw(r, x, tol)
    if err > tol:
        raise QuadratureError(f"density quadrature at r={r}, x={x}", err)
    return (val, err) if full_output else val


def _tail_terms(r: float, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of the large-x expansion and their envelopes (sine factor dropped).

    w(x) ~ (1/pi) sum_k (-1)^(k+1) Gamma(k r + 1)/k! sin(k pi r / 2) x^(-k r - 1)
    """
    k = np.arange(1, count + 1)
    sines = np.sin(k * math.pi * r / 2)
    sines[np.abs(sines) < 1e-12] = 0.0  # exact zeros when k r is an even integer
    envelope = np.exp(special.gammaln(k * r + 1) - special.gammaln(k + 1)) / math.pi
    return (-1.0) ** (k + 1) * envelope * sines, envelope


def _tail_coefficients(r: float, count: int) -> np.ndarray:
    return _tail_terms(r, count)[0]


def _tail_moment(r: float, s: float, x0: float) -> tuple[float, float]:
    """int_{x0}^inf x^s w(x) dx from the large-x expansion; returns (value, error).

    Truncation is decided on the envelope, since the sine factor can make
    single terms tiny without the series having converged (r near 1).
    """
    if r == 2.0:
        return 0.0, 0.0
    count = 60
    k = np.arange(1, count + 1)
    coeffs, env = _tail_terms(r, count)
    scale = x0 ** (s - k * r) / (k * r - s)
    terms, bounds = coeffs * scale, env * scale
    total = 0.0
    for i in range(count):
        total += terms[i]
        nxt = bounds[i + 1] if i + 1 < count else math.inf
        if nxt > bounds[i]:
            # asymptotic regime: stop before the envelope turns up
            return total, bounds[i]
        if nxt < 1e-17 * abs(total):
            return total, nxt
    return total, bounds[-1]


def _cutoff(r: float) -> float:
    if r == 2.0:
        return 18.0
    # the expansion is convergent for r < 1; for r >= 1 it is asymptotic and needs x >> 1
    return 12.0 if r < 1.0 else 25.0


def _density_raw(r: float, x: float, tol: float) -> tuple[float, float]:
    t_max = _truncation_point(r, tol)
    amp = lambda t: math.exp(-(t**r))
    kw = dict(epsabs=tol * math.pi / 4, epsrel=0.0)
    if x == 0.0:
        val, err = _quad(amp, 0.0, t_max, **kw)
    else:
        val, err = _quad(amp, 0.0, t_max, weight="cos", wvar=x, **kw)
    return val / math.pi, err / math.pi + tol / 10.0


def _moment_quadrature(r: float, s: float, tol: float) -> tuple[float, float]:
    """(E|X|^s, error) = 2 int_0^inf x^s w(x) dx."""
    x0 = _cutoff(r)
    inner_tol = 1e-15
    worst = [0.0]

    def integrand(x):
        val, err = _density_raw(r, x, inner_tol)
        worst[0] = max(worst[0], err)
        return x**s * val

    body, body_err = 0.0, 0.0
    for a, b in [(0.0, 1.0), (1.0, 4.0), (4.0, x0)]:
        worst[0] = 0.0
        val, err = _quad(integrand, a, b, epsabs=0.0, epsrel=tol * 1e-2)
        body += val
        body_err += err + worst[0] * (b ** (s + 1) - a ** (s + 1)) / (s + 1)
    tail, tail_err = _tail_moment(r, s, x0)
    return 2.0 * (body + tail), 2.0 * (body_err + tail_err)


def _moment_monte_carlo(law: StableLaw, s: float, samples: int, seed: int):
    total = total_sq = 0.0
    done = 0
    for draws in _sample_chunks(law, samples, seed, 0):
        y = np.abs(draws) ** s
        total += math.fsum(y)
        total_sq += math.fsum(y * y)
        done += y.size
    mean = total / done
    var = max(total_sq / done - mean * mean, 0.0) * done / max(done - 1, 1)
    return mean, math.sqrt(var / done)


def stable_moment(
    law,
    s: float,
    method: str = "quadrature",
    tol: float = 1e-8,
    seed: int = 0,
    samples: int = 1_000_000,
) -> MomentValue:
    """Compute c_{r,s} = (int |t|^s w(t) dt)^(1/s).

    ``method="quadrature"`` integrates |x|^s w(x) on [0, X] with w from
    :func:`stable_density` and adds the tail beyond X from the |x|^(-1-r)
    expansion of the density.  ``method="monte_carlo"`` averages |X|^s over
    ``samples`` draws; its error estimate is a three-standard-error band.
    """
    law = _law(law)
    s = float(s)
    _check_order(law.r, s)
    if method == "quadrature":
        m, err = _moment_quadrature(law.r, s, tol)
        c = m ** (1.0 / s)
        err_c = c * err / (s * m) + 1e-12 * c  # floor for accumulated rounding
        if err_c > tol:
            raise QuadratureError(f"moment quadrature r={law.r}, s={s}", err_c)
        return MomentValue(law.r, s, c, "quadrature", err_c, err_c)
    if method == "monte_carlo":
        m, se = _moment_monte_carlo(law, s, int(samples), seed)
        c = m ** (1.0 / s)
        se_c = c * se / (s * m)
        return MomentValue(law.r, s, c, "monte_carlo", 3.0 * se_c, se_c)
    raise ValueError(f"unknown method {method!r}")


@lru_cache(maxsize=None)
def _cached_constant(r_key: float, s_key: float) -> MomentValue:
    return stable_moment(StableLaw(r_key), s_key)


def moment_constant(r: float, s: float) -> MomentValue:
    """Memoized quadrature value of c_{r,s}, keyed on (r, s) rounded to 12 digits."""
    return _cached_constant(round(float(r), 12), round(float(s), 12))


def _cms_transform(phi: np.ndarray, w: np.ndarray, r: float) -> np.ndarray:
    # Chambers-Mallows-Stuck transform, symmetric case
    if r == 1.0:
        return np.tan(phi)
    if r == 2.0:
        return 2.0 * np.sin(phi) * np.sqrt(w)
    return np.sin(r * phi) / np.cos(phi) ** (1.0 / r) * (np.cos((1.0 - r) * phi) / w) ** ((1.0 - r) / r)


def _cms(rng: np.random.Generator, r: float, count: int) -> np.ndarray:
    phi = rng.uniform(-math.pi / 2, math.pi / 2, count)
    w = rng.standard_exponential(count)
    return _cms_transform(phi, w, r)


def _rqmc_replicates(r: float, dims: int, sample_count: int, seed: int, replicates: int = RQMC_REPLICATES):
    """Independent scrambled-Sobol replicates, each an array (dims, points) of stable draws.

    Points per replicate are rounded up to a power of two so every replicate
    keeps the Sobol balance properties; the total is at least sample_count.
    """
    per = 1 << max(1, math.ceil(math.log2(max(sample_count, 2) / replicates)))
    for k in range(replicates):
        scramble_seed = int(stream(seed, 50_000 + k).integers(2**63))
        sob = qmc.Sobol(2 * dims, scramble=True, seed=scramble_seed)
        u = sob.random_base2(int(math.log2(per)))
        # keep uniforms strictly inside (0, 1): the transform is singular at the ends
        u = np.clip(u, 1e-300, 1.0 - 2.0**-53)
        phi = math.pi * (u[:, 0::2] - 0.5)
        w = -np.log1p(-u[:, 1::2])
        yield _cms_transform(phi, w, r).T


def _sample_chunks(law: StableLaw, count: int, seed: int, index: int):
    rng = stream(seed, index)
    left = count
    while left > 0:
        size = min(left, _CHUNK)
        yield _cms(rng, law.r, size)
        left -= size


def sample_stable(law, count: int, seed: int = 0, index: int = 0) -> np.ndarray:
    """``count`` i.i.d. draws; (law, count, seed, index) determines the output."""
    law = _law(law)
    if count < 1:
        raise ValueError("count must be >= 1")
    return np.concatenate(list(_sample_chunks(law, int(count), seed, index)))


class IdentityEstimate(NamedTuple):
    empirical: float
    exact: float
    std_error: float
    relative_error: float


def stable_identity_estimate(
    law, s: float, coeffs, sample_count: int, seed: int = 0, sampler: str = "rqmc"
) -> IdentityEstimate:
    """Estimate (E|sum a_k X_k|^s)^(1/s) and compare it with c_{r,s} ||a||_r.

    ``sampler="rqmc"`` averages randomized Sobol replicates, whose spread
    gives the standard error; ``sampler="mc"`` uses independent draws.  The
    heavy tail of |X|^s for s near r makes the plain mean converge slowly.
    """
    law = _law(law)
    s = float(s)
    _check_order(law.r, s)
    a = np.asarray(coeffs, dtype=float).reshape(-1)
    if a.size == 0:
        raise ValueError("coefficients must be nonempty")
    norm = float(np.sum(np.abs(a) ** law.r) ** (1.0 / law.r))
    if norm == 0.0:
        return IdentityEstimate(0.0, 0.0, 0.0, 0.0)
    n = int(sample_count)
    if sampler == "rqmc":
        means = [float(np.mean(np.abs(a @ draws) ** s)) for draws in _rqmc_replicates(law.r, a.size, n, seed)]
        mean = math.fsum(means) / len(means)
        se = float(np.std(means, ddof=1) / math.sqrt(len(means)))
    elif sampler == "mc":
        gens = [_sample_chunks(law, n, seed, k) for k in range(a.size)]
        total = total_sq = 0.0
        for chunks in zip(*gens):
            y = np.abs(sum(ak * ck for ak, ck in zip(a, chunks))) ** s
            total += math.fsum(y)
            total_sq += math.fsum(y * y)
        mean = total / n
        se = math.sqrt(max(total_sq / n - mean * mean, 0.0) / max(n - 1, 1))
    else:
        raise ValueError(f"unknown sampler {sampler!r}")
    emp = mean ** (1.0 / s)
    exact = moment_constant(law.r, s).value * norm
    return IdentityEstimate(float(emp), float(exact), float(emp * se / (s * mean)), float(abs(emp - exact) / exact))


def check_stable_identity(law, s: float, coeffs, sample_count: int, seed: int = 0, sampler: str = "rqmc") -> float:
    """Relative error between the empirical and exact sides of the stable identity."""
    return stable_identity_estimate(law, s, coeffs, sample_count, seed, sampler).relative_error


class EmbeddingCheck(NamedTuple):
    margin: float
    std_error: float
    lhs: float
    rhs: float
    constant: float


def embedding_constant(r: float, p: float, m: int, s: float | None = None) -> float:
    """Constant C with C ||a||_r <= ||sum a w...w||_{L^p} for products of m stable variables."""
    if not 0 < p < math.inf:
        raise ValueError(f"exponent p={p} outside the embedding lemma (0 < p < inf)")
    if (p < r < 2.0) or (r == 2.0 and p <= 2.0):
        return moment_constant(r, p).value ** m
    if r == 2.0:
        return moment_constant(2.0, 2.0).value ** m
    if r < 2.0 and r <= p:
        s = r / 2.0 if s is None else float(s)
        if not 0 < s < r:
            raise ValueError(f"auxiliary order s={s} must lie in (0, r)")
        return moment_constant(r, s).value ** m
    raise ValueError(f"(r={r}, p={p}) is outside the embedding lemma's cases")


def check_embedding_inequality(
    law,
    p: float,
    m: int,
    coeff_tensor,
    sample_count: int,
    seed: int = 0,
    s: float | None = None,
    sampler: str = "rqmc",
) -> EmbeddingCheck:
    """Monte Carlo margin of the multilinear stable embedding inequality.

    Estimates (E|sum a[k] w1[k1]...wm[km]|^p)^(1/p) - C (sum |a|^r)^(1/r)
    for independent stable vectors w1..wm.  When the p-th stable moment is
    finite, the last slot is integrated exactly: conditionally on the other
    slots the sum is ||b||_r times a stable variable, with b the partial
    contraction.  That makes m = 1 exact and cuts the variance for m >= 2.
    ``sampler`` is "rqmc" (randomized Sobol replicates) or "mc".
    ``margin`` is the first field; ``std_error`` is the delta-method error
    of the left side.
    """
    law = _law(law)
    a = np.asarray(coeff_tensor, dtype=float)
    if a.ndim != m or m < 1:
        raise ValueError(f"coefficient tensor has {a.ndim} axes, expected m={m} >= 1")
    if sampler not in ("rqmc", "mc"):
        raise ValueError(f"unknown sampler {sampler!r}")
    p = float(p)
    r = law.r
    const = embedding_constant(r, p, m, s)
    rhs = const * float(np.sum(np.abs(a) ** r) ** (1.0 / r))
    conditional = r == 2.0 or p < r - MOMENT_GAP
    n = int(sample_count)
    random_slots = m - 1 if conditional else m
    dims = [a.shape[i] for i in range(random_slots)]

    def integrand(vecs):
        if conditional:
            b = _contract_samples(a, vecs, keep_last=True)
            return np.sum(np.abs(b) ** r, axis=-1) ** (p / r)
        return np.abs(_contract_samples(a, vecs)) ** p

    def split(block):  # (total_dims, points) -> per-slot (points, d_i)
        return [block[sum(dims[:i]) : sum(dims[: i + 1])].T for i in range(random_slots)]

    if random_slots == 0:
        # m = 1 with a finite moment: nothing left to sample
        mean, se = float(np.sum(np.abs(a) ** r) ** (p / r)), 0.0
    elif sampler == "rqmc":
        means = [float(np.mean(integrand(split(block)))) for block in _rqmc_replicates(r, sum(dims), n, seed)]
        mean = math.fsum(means) / len(means)
        se = float(np.std(means, ddof=1) / math.sqrt(len(means)))
    else:
        gens = [_sample_chunks(law, n, seed, 1000 * i + k) for i in range(random_slots) for k in range(dims[i])]
        total = total_sq = 0.0
        for chunks in zip(*gens):
            z = integrand(split(np.stack(chunks)))
            total += math.fsum(z)
            total_sq += math.fsum(z * z)
        mean = total / n
        se = math.sqrt(max(total_sq / n - mean * mean, 0.0) / max(n - 1, 1))
    scale = moment_constant(r, p).value if conditional else 1.0
    lhs = scale * mean ** (1.0 / p)
    lhs_se = lhs * se / (p * mean) if mean > 0 else 0.0
    return EmbeddingCheck(float(lhs - rhs), float(lhs_se), float(lhs), float(rhs), float(const))


def _contract_samples(a: np.ndarray, vecs: list[np.ndarray], keep_last: bool = False) -> np.ndarray:
    """Contract the leading len(vecs) axes of ``a`` against per-sample vectors.

    Returns y[t] (or y[t, :] when ``keep_last``) = sum a[k...] v1[t,k1] ... .
    """
    letters = "abcdefgh"[: a.ndim]
    used = letters[: len(vecs)]
    out = "z" + (letters[-1] if keep_last else "")
    spec = letters + "," + ",".join("z" + c for c in used) + "->" + out
    return np.einsum(spec, a, *vecs, optimize=True)
