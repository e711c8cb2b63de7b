import math

import numpy as np
import pytest

from mzlab.multiop import MultilinearOperator, apply, extension_lhs, rhs_product
from mzlab.tensorspace import INF, DiscreteMeasure, lp_norm
from mzlab.witnesses import (
    CheckReport,
    basis_family,
    check_positive_domination,
    convolution_operator,
    divergence_probe,
    ksz_witness,
    littlewood_point,
    littlewood_probe,
    littlewood_witness,
    random_sign_tensor,
    sylvester_hadamard,
    weak_extension_check,
    weak_sandwich,
)


def test_hadamard_orthogonal():
    for n in (1, 2, 4, 8, 16):
        H = sylvester_hadamard(n)
        assert np.array_equal(H @ H.T, n * np.eye(n))
    assert np.array_equal(sylvester_hadamard(2), [[1, 1], [1, -1]])
    with pytest.raises(ValueError):
        sylvester_hadamard(6)
    with pytest.raises(ValueError):
        littlewood_witness(32)


def test_littlewood_point_n2():
    # sum |h_ij|^r over 4 entries against norm 2
    pt = littlewood_point(2, 4 / 3)
    assert pt.bracket.upper == 2.0
    assert pt.ratio == pytest.approx(4 ** 0.75 / 2, abs=1e-12)
    assert pt.ratio == pytest.approx(math.sqrt(2), abs=1e-9)


def test_littlewood_probe_r1():
    rep = littlewood_probe([2, 4, 8, 16], 1)
    assert rep.ratios == pytest.approx([2.0, 2.0, 3.2, 4.0])
    assert all(b >= a for a, b in zip(rep.ratios, rep.ratios[1:]))
    row = rep.points[0].to_row()
    assert {"n", "lower_bound", "norm_upper", "lhs", "rhs_product", "seed"} <= set(row)


def test_sign_tensor_validation_and_determinism():
    a = random_sign_tensor(2, 4, seed=3, attempt=1)
    b = random_sign_tensor(2, 4, seed=3, attempt=1)
    assert np.array_equal(a.entries, b.entries)
    assert set(np.unique(a.entries)) <= {-1.0, 1.0}
    assert a.operator().input_dims == (4, 4)
    with pytest.raises(ValueError):
        type(a)(2, 4, np.zeros((4, 4, 4)), 0)


def test_ksz_bracket_sound():
    T, bracket, sign = ksz_witness(2, 8, [2, 2], INF, seed=0, attempts=5)
    assert bracket.lower == pytest.approx(bracket.upper)
    xs = bracket.lower_witness
    val = lp_norm(apply(T, *xs), INF) / (lp_norm(xs[0], 2) * lp_norm(xs[1], 2))
    assert val == pytest.approx(bracket.lower, rel=1e-12)
    # the kept tensor has the smallest norm among the attempts
    others = [ksz_witness(2, 8, [2, 2], INF, seed=0, attempts=1)]
    assert bracket.upper <= others[0][1].upper + 1e-12


def test_divergence_probe_ratios_certified():
    rep = divergence_probe(2, [4, 8], [2, 2], 1, seeds=0, attempts=3)
    for pt in rep.points:
        T, _, _ = ksz_witness(2, pt.n, [2, 2], INF, 0, 3)
        fams = [basis_family(pt.n)] * 2
        assert pt.lhs == pytest.approx(extension_lhs(T, fams, 1, INF))
        assert pt.rhs == pytest.approx(rhs_product(T, fams, 1, [2, 2]))
        assert pt.ratio == pt.lhs / (pt.bracket.upper * pt.rhs)
    assert math.isfinite(rep.growth_exponent)
    with pytest.raises(ValueError):
        divergence_probe(2, [4, 8], [2, 2], 1, seeds=[0])


def test_convolution():
    T = convolution_operator(5)
    assert set(np.unique(T.coeffs)) == {0.0, 1.0}
    f, g = np.arange(5.0), np.array([1.0, 0, 0, 2.0, 0])
    want = [sum(f[(x - y) % 5] * g[y] for y in range(5)) for x in range(5)]
    assert np.allclose(apply(T, f, g), want)


def test_positive_domination(rng):
    T = convolution_operator(8)
    for r in (1, 1.7, 3, INF):
        fams = [rng.exponential(size=(3, 8)), rng.exponential(size=(2, 8))]
        assert check_positive_domination(T, fams, r) >= -1e-12
    with pytest.raises(ValueError, match="not positive"):
        check_positive_domination(MultilinearOperator(-np.ones((2, 2, 2))), [np.ones((1, 2))] * 2, 2)


def test_weak_sandwich_single():
    weak, sup, factor, viol = weak_sandwich([3.0, 1.0, 1.0], 2.0, 1.0)
    assert weak <= sup <= factor * weak
    assert viol <= 0


def test_weak_extension_check():
    T = convolution_operator(6)
    fams = [np.abs(np.random.default_rng(0).standard_normal((2, 6)))] * 2
    rep = weak_extension_check(T, [1, 2], 2, fams, 2, [0.5, 1.0, 1.5])
    assert rep.passed
    assert 0 < rep.data["weak_ratio"] <= 1 + 1e-12
    low = weak_extension_check(T, [1, 2], 0.8, fams, 2, [0.4])
    assert "weak_ratio" not in low.data
    with pytest.raises(ValueError):
        weak_extension_check(T, [1, 2], 2, fams, 2, [2.5])


def test_check_report_ignores_informational():
    rep = CheckReport("x")
    rep.add("hard", True, 1.0)
    rep.add("soft", False, -1.0, asserted=False)
    assert rep.passed
    rep.add("hard2", False, -1.0)
    assert not rep.passed
    assert rep.to_dict()["pass"] is False


def test_weighted_measure_sandwich():
    f = np.array([1.0, 2.0, 2.0, 0.0])
    mu = DiscreteMeasure([0.5, 1.0, 0.25, 3.0])
    weak, sup, factor, _ = weak_sandwich(f, 1.5, 0.75, mu)
    assert weak <= sup * (1 + 1e-12) and sup <= factor * weak * (1 + 1e-12)
