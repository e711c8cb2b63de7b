import math

import numpy as np
import pytest

from mzlab.verify import (
    SUITES,
    run_suite,
    verify_duality,
    verify_duality_grid,
    verify_interpolation_r,
    verify_log_convexity_r,
    verify_monotonicity_p,
    verify_positivity,
    verify_weak_sandwich,
    verify_witness_interpolation,
)
from mzlab.witnesses import basis_family, littlewood_witness

INF = math.inf


def test_monotonicity_closed_form():
    rep = verify_monotonicity_p([1.5], 1.8, np.linspace(1.0, 1.5, 6))
    assert rep.passed and rep.checks


def test_monotonicity_with_estimates():
    rep = verify_monotonicity_p([1.5], 1.8, [1.2, 1.5], n=2, budget=3)
    assert rep.passed
    assert any(not c["asserted"] for c in rep.checks)


def test_interpolation_and_log_convexity():
    assert verify_interpolation_r([1.5], 1, 1.6, 2, [0.25, 0.5, 0.75]).passed
    rep = verify_log_convexity_r([1.5], 1, np.linspace(2.0, 1.5, 21)[:-1])
    assert rep.passed and len(rep.checks) == 18


def test_witness_interpolation_fixed_operator():
    rep = verify_witness_interpolation(littlewood_witness(4), [basis_family(4)] * 2, [INF, INF], INF, [1, 1.5, 2, 4])
    assert rep.passed


@pytest.mark.parametrize("q,p,r", [(1.5, 1.2, 1.8), (INF, 2, 2), (3, 6, 2.5), (6, 3, 2.5), (3, 1.5, 2)])
def test_duality_points(q, p, r):
    assert verify_duality(q, p, r).passed


def test_duality_grid():
    rep = verify_duality_grid([1, 1.5, 2, 3, INF])
    assert rep.passed and rep.data["triples"] == 125


def test_positivity_and_weak_small():
    assert verify_positivity(N=8, trials=20, seed=1).passed
    assert verify_weak_sandwich(trials=50, atoms=16, seed=2).passed


def test_run_suite_all_names():
    for name in SUITES:
        assert run_suite(name, trials=10, seed=0).passed
    with pytest.raises(ValueError):
        run_suite("nope")
