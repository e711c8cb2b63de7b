import math

import numpy as np
import pytest

from mzlab.classify import linear_k
from mzlab.estimate import estimate_kn, evaluate_candidate, tensor_identity
from mzlab.multiop import extension_lhs, rhs_product
from mzlab.normsolver import operator_norm
from mzlab.tensorspace import INF


def test_tensor_identity_shape():
    T = tensor_identity([2, 3])
    assert T.input_dims == (2, 3) and T.output_dim == 6
    assert np.count_nonzero(T.coeffs) == 6


@pytest.mark.parametrize("qs,p,r", [((2, 2), 2, 2), ((1, 1), 2, 2), ((1, 1), 3, 5)])
def test_equality_cases_give_one(qs, p, r):
    est = estimate_kn(qs, p, r, 2, budget=5, seed=0)
    assert 0.9 <= est.lower <= 1 + 1e-6
    ident = dict(est.candidates)["tensor_identity"]
    assert ident >= 0.999


def test_witness_is_certified():
    est = estimate_kn((INF, INF), INF, 4 / 3, 2, budget=5, seed=0)
    w = est.witness
    fams = list(w.families)
    assert w.lhs == pytest.approx(extension_lhs(w.operator, fams, 4 / 3, INF))
    assert w.rhs == pytest.approx(rhs_product(w.operator, fams, 4 / 3, [INF, INF]))
    assert w.bracket.upper >= operator_norm(w.operator, [INF, INF], INF).lower - 1e-12
    assert est.lower == pytest.approx(math.sqrt(2), abs=1e-9)  # Hadamard witness at n = 2


@pytest.mark.parametrize("q,p,r", [(1.5, 1.2, 1.8), (2, 3, 2.5), (3, 1.5, 2)])
def test_linear_estimates_below_closed_form(q, p, r):
    est = estimate_kn((q,), p, r, 3, budget=8, seed=1)
    k = linear_k(q, p, r)
    if k.known:
        assert est.lower <= k.value + 1e-6
    assert est.lower >= 1 - 1e-9  # a single function already gives ratio 1 at best norm


def test_deterministic_and_serializable():
    a = estimate_kn((2,), 1.5, 2, 2, budget=3, seed=4)
    b = estimate_kn((2,), 1.5, 2, 2, budget=3, seed=4)
    assert a.to_dict() == b.to_dict()
    assert len(a.to_dict()["witness_digest"]) == 64


def test_argument_validation():
    with pytest.raises(ValueError):
        estimate_kn((2,), 2, 2, 0)
    with pytest.raises(ValueError):
        estimate_kn((2, 2), 2, 2, 2, dims=[2, 2])


def test_evaluate_candidate_ratio_bounds():
    T = tensor_identity([2, 2])
    w, _ = evaluate_candidate("id", T, [2, 2], 2, 2, 2, budget=5, seed=0)
    assert w.ratio == pytest.approx(1.0)
