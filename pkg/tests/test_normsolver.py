import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mzlab.multiop import MultilinearOperator, apply, extension_lhs, rhs_product
from mzlab.normsolver import (
    EnumerationTooLarge,
    NoExactMode,
    dual_align,
    family_ascent,
    mixed_align,
    operator_norm,
)
from mzlab.tensorspace import INF, DiscreteMeasure, dual, lp_norm, pointwise_lr
from mzlab.witnesses import sylvester_hadamard

finite = st.floats(-3, 3, allow_nan=False)


def brute_sign_norm(H):
    """max over x in {+-1}^n of ||H x||_1: the inf x inf form norm."""
    n = H.shape[1]
    return max(np.abs(H @ np.array(s)).sum() for s in itertools.product([-1, 1], repeat=n))


@pytest.mark.parametrize("n", [2, 4, 8])
def test_hadamard_form_norm_matches_brute_force(n):
    H = sylvester_hadamard(n)
    b = operator_norm(MultilinearOperator.scalar_form(H), [INF, INF], INF, mode="exact")
    assert b.lower == b.upper == pytest.approx(brute_sign_norm(H))


def test_hadamard_sixteen():
    b = operator_norm(MultilinearOperator.scalar_form(sylvester_hadamard(16)), [INF, INF], INF, mode="exact")
    assert b.upper == 64.0 and b.exact


def test_linear_closed_form_norms(rng):
    A = rng.standard_normal((4, 5))
    T = MultilinearOperator(A)
    # 1 -> p: largest column norm
    for p in (1.0, 2.0, 3.0, INF):
        b = operator_norm(T, [1], p)
        assert b.upper == pytest.approx(max(lp_norm(A[:, j], p) for j in range(5)))
    # q -> inf: largest row norm in the dual exponent
    for q in (1.0, 1.5, 2.0, INF):
        b = operator_norm(T, [q], INF)
        assert b.upper == pytest.approx(max(lp_norm(A[i], dual(q)) for i in range(4)))
    # 2 -> 2: largest singular value
    assert operator_norm(T, [2], 2).upper == pytest.approx(np.linalg.svd(A, compute_uv=False)[0])
    # inf -> 1: sign enumeration
    assert operator_norm(T, [INF], 1).upper == pytest.approx(brute_sign_norm(A))


def test_identity_norms():
    T = MultilinearOperator(np.eye(4))
    for q in (1.0, 1.5, 2.0, 3.0, INF):
        b = operator_norm(T, [q], q)
        assert b.lower == pytest.approx(1.0) and b.upper == pytest.approx(1.0)
    # l^2 -> l^1 on 4 atoms: sqrt(4)
    assert operator_norm(T, [2], 1).upper == pytest.approx(2.0)


def test_weighted_identity_norm_is_one():
    mu = DiscreteMeasure([0.25, 2.0, 1.0])
    T = MultilinearOperator(np.eye(3), [mu], mu)
    for q in (1.0, 2.0, 3.0, INF):
        b = operator_norm(T, [q], q)
        assert b.upper == pytest.approx(1.0, rel=1e-9)


def test_modes():
    T = MultilinearOperator(np.random.default_rng(1).standard_normal((3, 3, 3)))
    with pytest.raises(NoExactMode):
        operator_norm(T, [1.5, 1.5], 3, mode="exact")
    with pytest.raises(ValueError):
        operator_norm(T, [2, 2], 2, mode="fast")
    big = MultilinearOperator.scalar_form(np.ones((30, 30)))
    with pytest.raises(EnumerationTooLarge):
        operator_norm(big, [INF, INF], INF, mode="exact")


@given(arrays(float, (2, 3, 3), elements=finite), st.sampled_from([1.0, 1.5, 2.0, 4.0, INF]))
def test_bracket_contains_exact_norm(coeffs, p):
    T = MultilinearOperator(coeffs)
    exact = operator_norm(T, [INF, INF], p, mode="exact")
    br = operator_norm(T, [INF, INF], p, mode="bracket", budget=50, restarts=4)
    assert br.lower <= exact.upper * (1 + 1e-9) + 1e-12
    assert br.upper >= exact.upper * (1 - 1e-9) - 1e-12


@given(arrays(float, (3, 3, 2), elements=finite), st.sampled_from([1.2, 2.0, 3.0]), st.integers(0, 100))
def test_lower_end_reproduced_at_witness(coeffs, q, seed):
    T = MultilinearOperator(coeffs)
    b = operator_norm(T, [q, 2.5], 1.7, seed=seed, budget=30, restarts=3)
    xs = b.lower_witness
    val = lp_norm(apply(T, *xs), 1.7) / (lp_norm(xs[0], q) * lp_norm(xs[1], 2.5)) if b.lower > 0 else 0.0
    assert val == pytest.approx(b.lower, rel=1e-9, abs=1e-12)
    assert b.lower <= b.upper


@given(arrays(float, (2, 3, 3), elements=finite), st.integers(0, 10_000))
def test_no_feasible_point_beats_upper(coeffs, seed):
    T = MultilinearOperator(coeffs)
    b = operator_norm(T, [3.0, 1.5], 2.0, budget=20, restarts=2)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        x, y = rng.standard_normal(3), rng.standard_normal(3)
        val = lp_norm(apply(T, x, y), 2.0) / (lp_norm(x, 3.0) * lp_norm(y, 1.5))
        assert val <= b.upper * (1 + 1e-9) + 1e-12


def test_positive_identity_schur_bound_tight():
    T = MultilinearOperator(np.eye(5))
    b = operator_norm(T, [1.5], 1.5, mode="bracket")
    assert b.upper == pytest.approx(1.0)


@given(arrays(float, 5, elements=finite), st.sampled_from([1.0, 1.3, 2.0, 5.0, INF]))
def test_dual_align_attains_dual_norm(v, q):
    if not np.any(v):
        with pytest.raises(ValueError):
            dual_align(v, q)
        return
    x = dual_align(v, q)
    assert lp_norm(x, q) == pytest.approx(1.0)
    assert float(v @ x) == pytest.approx(lp_norm(v, dual(q)), rel=1e-9)


@given(arrays(float, (3, 4), elements=finite), st.sampled_from([1.0, 2.0, 3.0, INF]), st.sampled_from([1.0, 1.5, 2.0, INF]))
def test_mixed_align_attains_dual_mixed_norm(V, outer, inner):
    if not np.any(V):
        return
    G = mixed_align(V, outer, inner)
    assert lp_norm(pointwise_lr(G, inner, axis=0), outer) == pytest.approx(1.0)
    target = lp_norm(pointwise_lr(V, dual(inner), axis=0), dual(outer))
    assert float(np.sum(V * G)) == pytest.approx(target, rel=1e-9)


def test_family_ascent_consistent():
    H = sylvester_hadamard(4)
    T = MultilinearOperator.scalar_form(H)
    res = family_ascent(T, [INF, INF], INF, 1.0, 4, budget=30, seed=0, restarts=2, starts=[[np.eye(4), np.eye(4)]])
    assert res.lhs == pytest.approx(extension_lhs(T, list(res.families), 1.0, INF))
    assert res.rhs == pytest.approx(rhs_product(T, list(res.families), 1.0, [INF, INF]))
    # basis families reach sum |h_ij| = 16 against norm 8
    assert res.ratio >= 16.0 - 1e-9


def test_deterministic():
    T = MultilinearOperator(np.random.default_rng(3).standard_normal((3, 4, 4)))
    a = operator_norm(T, [1.5, 3], 2, seed=5, budget=30)
    b = operator_norm(T, [1.5, 3], 2, seed=5, budget=30)
    assert a.lower == b.lower and a.upper == b.upper
