import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvemax.dyadic_martingale import (DyadicFunction, _exterior_max_measure, cww_data,
                                        cww_factor_A, cww_factor_B, cww_from_data, cww_verify,
                                        dyadic_maximal, expectation, martingale_difference,
                                        martingale_product_identity, random_martingale,
                                        square_function)
from curvemax.experiments import cww_rows

seeds = st.integers(0, 2**31)


def test_validation():
    with pytest.raises(ValueError):
        DyadicFunction(3, 2, np.zeros(4))
    with pytest.raises(ValueError):
        DyadicFunction(1, 3, np.zeros(4))
    f = DyadicFunction(1, 3, np.arange(8.0))
    with pytest.raises(ValueError):
        expectation(f, 4)
    with pytest.raises(ValueError):
        martingale_difference(f, 3)
    with pytest.raises(ValueError):
        expectation(f, 1, axis=2)
    with pytest.raises(ValueError):
        random_martingale(3, np.random.default_rng(0), kind="gaussian")


def test_hand_computed_expectations():
    f = DyadicFunction(1, 2, np.array([1.0, 3.0, 5.0, 7.0]))
    assert np.array_equal(expectation(f, 1).values, [2.0, 2.0, 6.0, 6.0])
    assert np.array_equal(expectation(f, 0).values, [4.0] * 4)
    assert np.array_equal(martingale_difference(f, 0).values, [-2.0, -2.0, 2.0, 2.0])
    assert np.allclose(square_function(f, 0).values, math.sqrt(5.0))
    assert np.array_equal(dyadic_maximal(f, 0).values, [3.0, 2.0, 2.0, 3.0])
    assert np.array_equal(dyadic_maximal(f, 0, form="global").values, [4.0, 4.0, 6.0, 7.0])
    g = DyadicFunction(2, 1, np.array([[1.0, 3.0], [5.0, 7.0]]))
    assert np.array_equal(expectation(g, 0, axis=2).values, [[2.0, 2.0], [6.0, 6.0]])


@settings(max_examples=40)
@given(seeds, st.sampled_from([1, 2]))
def test_tower_telescoping_and_orthogonality(seed, dim):
    rng = np.random.default_rng(seed)
    J = 6 if dim == 1 else 4
    f = random_martingale(J, rng, dim, ("uniform", "rademacher", "bump")[seed % 3])
    for i in range(J + 1):
        for k in range(i + 1):
            assert np.allclose(expectation(expectation(f, i), k).values, expectation(f, k).values)
    D = sum(martingale_difference(f, j).values for j in range(J))
    assert np.allclose(D, f.values - expectation(f, 0).values)
    # orthogonal increments: ||S_0 f||^2 = ||f - E_0 f||^2
    S = square_function(f, 0).values
    assert math.isclose(np.mean(S**2), np.mean((f.values - expectation(f, 0).values) ** 2),
                        rel_tol=1e-10, abs_tol=1e-14)
    assert np.all(dyadic_maximal(f, 0).values >= np.abs(f.values - expectation(f, 0).values) - 1e-12)


def test_factors():
    assert round(cww_factor_B(0.25), 6) == 0.022218
    assert math.isclose(cww_factor_A(0.25), 4 * math.exp(-2.0))


def test_exterior_measure_by_hand():
    # mean 1, lambda 0.3, d = 1: only [0, 2) has average 1/2 > 0.3, so the exterior is [1, 2)
    assert _exterior_max_measure(1.0, 0.3, 1) == 1.0
    # d = 2, lambda 0.05: averages 1/4, 1/16 > 0.05, then 1/64 is not; exterior 16 - 1
    assert _exterior_max_measure(1.0, 0.05, 2) == 15.0
    assert _exterior_max_measure(0.2, 0.3, 1) == 0.0


def _walk_exceed_count(J, level):
    """Number of +-1 walks of length J with max_k |S_k| >= level."""
    counts = {0: 1}
    hit = 0
    for _ in range(J):
        nxt = {}
        for s, c in counts.items():
            for t in (s - 1, s + 1):
                if abs(t) >= level:
                    hit += c * 2 ** (J - _ - 1)
                else:
                    nxt[t] = nxt.get(t, 0) + c
        counts = nxt
    return hit


def test_good_lambda_exact_rademacher_walk():
    # f = a * (r_1 + ... + r_J): S_0 f = a sqrt(J) everywhere, f - E_0 f is a scaled walk
    J, a, eps = 20, 1.0, 0.45
    i = np.arange(2**J)
    bits = (i[:, None] >> np.arange(J)[None, :]) & 1
    f = DyadicFunction(1, J, a * (2 * bits - 1).sum(axis=1).astype(float))
    lam = 9.95 * a  # inside [a sqrt(J)/eps, 10 a)
    rep = cww_verify(f, lam, eps, "B")
    assert rep.lhs_measure == 2.0**-19  # only the two extreme walks exceed 2 lambda = 19.9
    assert rep.rhs_measure == _walk_exceed_count(J, 10) * 2.0**-J
    assert rep.passed and rep.lhs_measure > 0
    assert rep.lhs_measure <= cww_factor_B(eps) * rep.rhs_measure


def test_zero_extension_form_counts_coarse_levels():
    f = DyadicFunction(1, 2, np.array([4.0, 4.0, 4.0, 4.0]))
    D = cww_data(f)
    # coarse differences add I^2 (1 - 1/2) / (1 + 1/2) = 16 / 3
    assert np.allclose(D.S_full**2, 16.0 / 3.0)
    rep = cww_from_data(D, 0.5, 0.45, "A")
    assert rep.rhs_measure == 1.0 + _exterior_max_measure(4.0, 0.5, 1)
    with pytest.raises(ValueError):
        cww_from_data(D, 0.5, 0.6, "A")
    with pytest.raises(ValueError):
        cww_from_data(D, 0.0, 0.2, "B")
    with pytest.raises(ValueError):
        cww_from_data(D, 1.0, 0.2, "C")


def test_two_dimensional_sweep():
    rows = cww_rows(60, 5, 10, (0.1, 0.2, 0.3, 0.4), seed=11, dim=2)
    assert rows and all(r["pass"] for r in rows)


@settings(max_examples=30)
@given(seeds, st.sampled_from([1, 2]), st.sampled_from([0.5, 1.0, 2.0]))
def test_product_identity(seed, dim, t):
    rng = np.random.default_rng(seed)
    J = 7 if dim == 1 else 4
    f = random_martingale(J, rng, dim)
    n = int(rng.integers(0, J + 1))
    m = int(rng.integers(n, J + 1))
    cell = (n,) + tuple(int(rng.integers(0, 2**n)) for _ in range(dim))
    assert abs(martingale_product_identity(f, cell, m, t) - 1.0) < 1e-12


def test_product_identity_rejects_bad_cells():
    f = random_martingale(4, np.random.default_rng(0))
    with pytest.raises(ValueError):
        martingale_product_identity(f, (2, 4), 3, 1.0)
    with pytest.raises(ValueError):
        martingale_product_identity(f, (3, 0), 2, 1.0)
    with pytest.raises(ValueError):
        martingale_product_identity(f, (1, 0, 0), 2, 1.0)
