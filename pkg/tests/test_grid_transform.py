import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvemax.cutoffs import CutoffLibrary
from curvemax.grid_transform import (GridFunction1D, GridFunction2D, MikhlinMultiplier1D,
                                     cotlar_check, dyadic_frequency_range, full_singular,
                                     grid_coordinates, hardy_littlewood_max, hilbert_along_curve,
                                     hilbert_family, littlewood_paley_project, lp_index_range,
                                     maximal_over_params, random_test_function_1d, read_snapshot,
                                     sample_multiplier, spectral_map, truncated_singular,
                                     write_snapshot)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridFunction2D(6, 8, 1.0, 1.0, np.zeros((6, 8)))
    with pytest.raises(ValueError):
        GridFunction2D(8, 8, 0.0, 1.0, np.zeros((8, 8)))
    with pytest.raises(ValueError):
        GridFunction2D(8, 8, 1.0, 1.0, np.full((8, 8), np.nan))
    with pytest.raises(ValueError):
        GridFunction1D(8, 1.0, np.zeros(7))


def test_norm_and_frequencies():
    f = GridFunction2D.from_function(lambda x1, x2: np.ones_like(x1), 8, 16, 2.0, 0.5)
    assert np.isclose(f.norm(), 1.0)
    k1, k2 = f.frequencies()
    assert np.isclose(k1[1], np.pi) and np.isclose(k2[1], 4 * np.pi)


@pytest.mark.parametrize("k", [(1, 0), (3, -2), (0, 5), (-7, 1)])
@pytest.mark.parametrize("u", [0.5, 4.0])
def test_plane_waves_are_eigenfunctions(evaluator, k, u):
    L1, L2 = 1.0, 2.0
    xi = (2 * np.pi * k[0] / L1, 2 * np.pi * k[1] / L2)
    f = GridFunction2D.from_function(lambda a, b: np.exp(1j * (xi[0] * a + xi[1] * b)), 32, 32, L1, L2)
    h = hilbert_along_curve(f, evaluator, u)
    assert np.allclose(h.samples, evaluator(xi[0], u * xi[1]) * f.samples, atol=1e-12)


def test_real_input_stays_real(evaluator):
    rng = np.random.default_rng(0)
    f = GridFunction2D(16, 32, 1.0, 1.0, rng.normal(size=(16, 32)))
    h = hilbert_along_curve(f, evaluator, 2.0)
    assert np.abs(h.samples.imag).max() < 1e-12
    # Nyquist averaging keeps the sampled multiplier Hermitian on the grid
    m = sample_multiplier(lambda a, b: evaluator(a, b), 16, 32, 1.0, 1.0)
    idx1, idx2 = (-np.arange(16)) % 16, (-np.arange(32)) % 32
    assert np.allclose(m[np.ix_(idx1, idx2)], np.conj(m), atol=1e-12)


def test_family_and_maximal(evaluator):
    rng = np.random.default_rng(1)
    f = GridFunction2D(32, 32, 1.0, 1.0, rng.normal(size=(32, 32)))
    U = (0.25, 1.0, 16.0)
    fam = hilbert_family(f, evaluator, U)
    mx = maximal_over_params(f, evaluator, U)
    for u, h in zip(U, fam):
        assert np.allclose(h.samples, hilbert_along_curve(f, evaluator, u).samples)
        assert np.all(mx >= np.abs(h.samples) - 1e-15)
    with pytest.raises(ValueError):
        hilbert_along_curve(f, evaluator, -1.0)
    with pytest.raises(ValueError):
        maximal_over_params(f, evaluator, ())


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(16, 16), (64, 8), (8, 128)]), st.floats(0.3, 4), st.floats(0.3, 4),
       st.sampled_from([1.5, 2.0, 3.0]), st.integers(0, 2**31))
def test_littlewood_paley_partition(shape, L1, L2, b, seed):
    rng = np.random.default_rng(seed)
    f = GridFunction2D(shape[0], shape[1], L1, L2, rng.normal(size=shape))
    lib = CutoffLibrary(b)
    for ax in (1, 2):
        lo, hi = lp_index_range(f, ax, lib)
        s = sum(littlewood_paley_project(f, ax, k, lib).samples for k in range(lo, hi + 1))
        assert np.abs(s - (f.samples - f.samples.mean(axis=ax - 1, keepdims=True))).max() < 1e-10
    with pytest.raises(ValueError):
        littlewood_paley_project(f, 3, 0, lib)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_spectral_map_contracts():
    rng = np.random.default_rng(2)
    f = GridFunction2D(16, 16, 1.0, 1.0, rng.normal(size=(16, 16)))
    assert np.allclose(spectral_map(f, lambda a, b: np.ones_like(a)).samples, f.samples)
    g = spectral_map(f, lambda a, b: 0.5 * np.exp(1j * (a + b)))
    assert np.isclose(g.norm(), 0.5 * f.norm())
    with pytest.raises(ValueError):
        spectral_map(f, lambda a, b: np.full(a.shape, np.inf))


def _brute_max_1d(a):
    n = a.size
    out = np.empty(n)
    radii = [0] + [h for h in (2**k for k in range(20)) if 2 * h + 1 <= n]
    for i in range(n):
        out[i] = max(np.mean(a[(i + np.arange(-h, h + 1)) % n]) for h in radii)
    return np.maximum(out, a.mean())


def test_maximal_functions_against_brute_force():
    rng = np.random.default_rng(3)
    a = np.abs(rng.normal(size=(16, 8)))
    ref1 = np.stack([_brute_max_1d(a[:, j]) for j in range(8)], axis=1)
    assert np.allclose(hardy_littlewood_max(a, "axis1"), ref1)
    ref2 = np.stack([_brute_max_1d(a[i]) for i in range(16)], axis=0)
    assert np.allclose(hardy_littlewood_max(a, "axis2"), ref2)
    full = hardy_littlewood_max(a, "full")
    assert np.all(full >= a) and np.all(full >= a.mean() - 1e-15)
    # the centred 3x3 window average at one point
    assert full[5, 4] >= a[4:7, 3:6].mean() - 1e-15
    assert np.allclose(hardy_littlewood_max(np.full((8, 8), 2.0), "strong"), 2.0)
    with pytest.raises(ValueError):
        hardy_littlewood_max(a, "diagonal")


def test_truncations_exhaust():
    rng = np.random.default_rng(4)
    f = random_test_function_1d(256, rng)
    mm = MikhlinMultiplier1D.hilbert()
    lo, hi = dyadic_frequency_range(f)
    assert np.allclose(truncated_singular(f, mm, hi).samples, full_singular(f, mm).samples)
    assert np.allclose(truncated_singular(f, mm, lo - 5).samples, 0.0)
    # Hilbert transform of cos is sin
    x = np.arange(64) / 64
    c = GridFunction1D(64, 1.0, np.cos(2 * np.pi * 3 * x))
    assert np.allclose(full_singular(c, mm).samples, np.sin(2 * np.pi * 3 * x), atol=1e-12)


def test_mikhlin_bounds():
    xi = np.linspace(-50, 50, 101)
    assert MikhlinMultiplier1D.hilbert().check_bound(xi)
    assert MikhlinMultiplier1D.imaginary_power(2.0).check_bound(xi)
    with pytest.raises(ValueError):
        MikhlinMultiplier1D(lambda x: x, 0.0)


def test_cotlar_report():
    rng = np.random.default_rng(5)
    f = random_test_function_1d(512, rng)
    mm = MikhlinMultiplier1D.hilbert()
    rep = cotlar_check(f, mm, 0.5, 0.05)
    assert rep.fitted_constant >= 0
    again = cotlar_check(f, mm, 0.5, 0.05, candidate=rep.fitted_constant)
    assert again.fraction_holding == 1.0
    assert np.all(rep.S_star >= 0) and np.all(rep.Mf > 0)
    with pytest.raises(ValueError):
        cotlar_check(f, mm, r=1.5)
    with pytest.raises(ValueError):
        cotlar_check(f, mm, delta=0.9)


def test_snapshot_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    f = GridFunction2D(8, 16, 1.5, 0.25, rng.normal(size=(8, 16)) + 1j * rng.normal(size=(8, 16)))
    p = tmp_path / "f.bin"
    write_snapshot(p, f)
    g = read_snapshot(p)
    assert (g.n1, g.n2, g.L1, g.L2) == (8, 16, 1.5, 0.25)
    assert np.array_equal(g.samples, f.samples)
    p.write_bytes(p.read_bytes()[:-16])
    with pytest.raises(ValueError):
        read_snapshot(p)


def test_grid_coordinates():
    x1, x2 = grid_coordinates(4, 2, 2.0, 1.0)
    assert x1.shape == (4, 2) and x1[3, 0] == 1.5 and x2[0, 1] == 0.5
