"""The twelve acceptance criteria, each at its stated tolerance and runtime budget."""

import math
import time

import numpy as np
import pytest

from conftest import record
from curvemax.curve_model import CurveParams, lacunary_selection
from curvemax.cutoffs import CutoffLibrary
from curvemax.dyadic_martingale import cww_factor_B, martingale_product_identity, random_martingale
from curvemax.experiments import (DEFAULT_SEED, ExperimentConfig, cotlar_rows, cww_rows,
                                  decompose_rows, growth_fit, measured_C_circ, run_growth,
                                  symbol_rows)
from curvemax.grid_transform import (GridFunction2D, hilbert_along_curve,
                                     littlewood_paley_project, lp_index_range, sample_multiplier)
from curvemax.karagulyan import assemble, build_family, lower_bound_experiment, verify_family
from curvemax.multiplier import hoelder_verify, m_axis, m_point
from curvemax.quadrature import QuadratureConfig

pytestmark = pytest.mark.slow
CFG = QuadratureConfig()


def test_axis_values():
    t0 = time.perf_counter()
    # rho = (1/b) log(c_minus / c_plus) with principal branch; +1 for (2, 1, e^2)
    cases = [(CurveParams(2, 1, 1), 0j), (CurveParams(3, 1, -1), -1j * math.pi / 3),
             (CurveParams(2, 1, math.e**2), 1 + 0j)]
    worst_h, worst_final, monotone = 0.0, 0.0, True
    for p, rho in cases:
        assert abs(m_axis(p, "vertical_up") - rho) < 1e-15
        for s in (1.0, -1.0):
            worst_h = max(worst_h, abs(m_point(p, (s, 0.0), CFG) - (-1j * math.pi * s)))
        dev = [abs(m_point(p, (10.0**-k, 1.0), CFG) - rho) for k in range(1, 7)]
        monotone &= all(b < a for a, b in zip(dev, dev[1:]))
        worst_final = max(worst_final, dev[-1])
    secs = time.perf_counter() - t0
    ok = worst_h <= 1e-6 and monotone and worst_final <= 1e-2 and secs <= 60
    record(1, ok, f"axis error {worst_h:.2e}, final vertical deviation {worst_final:.2e}, "
                  f"decreasing {monotone}, {secs:.1f}s")
    assert ok


def test_homogeneity_and_symmetry(p211):
    t0 = time.perf_counter()
    rng = np.random.default_rng(DEFAULT_SEED)
    worst = 0.0
    for _ in range(200):
        xi = (rng.normal(), rng.normal())
        lam = 2.0 ** rng.uniform(-4, 4)
        a = m_point(p211, xi, CFG)
        worst = max(worst, abs(m_point(p211, (lam * xi[0], lam**2 * xi[1]), CFG) - a),
                    abs(m_point(p211, (-xi[0], -xi[1]), CFG) - np.conj(a)))
    secs = time.perf_counter() - t0
    ok = worst <= 2 * CFG.abs_tol and secs <= 60
    record(2, ok, f"max identity defect {worst:.2e} (limit {2 * CFG.abs_tol:.0e}), {secs:.1f}s")
    assert ok


def test_hoelder_at_axes(p211):
    t0 = time.perf_counter()
    eta = [10.0**-k for k in range(1, 7)]
    rep = hoelder_verify(p211, eta, CFG)
    ratios = np.array(rep.deviations_xi2_axis) / np.array(rep.eta_grid) ** 0.25
    top = np.sort(ratios)[-3:]
    spread = top.max() / top.min()
    secs = time.perf_counter() - t0
    ok = spread <= 10 and rep.fitted_exponent_xi2_axis >= 0.25 - 0.05 and secs <= 120
    record(3, ok, f"top-3 ratio spread {spread:.3f}, fitted exponent "
                  f"{rep.fitted_exponent_xi2_axis:.3f}, C_circ {rep.C_circ_estimate:.4f}, {secs:.1f}s")
    assert ok


def test_stationary_phase(p211):
    t0 = time.perf_counter()
    rows = symbol_rows(p211, CFG, [100, 200, 400])
    err_ratios = [r["err_ratio"] for r in rows[1:]]
    res_ratios = [r["residual_ratio"] for r in rows[1:]]
    secs = time.perf_counter() - t0
    ok = max(err_ratios) <= 0.7 and max(res_ratios) <= 0.7 and secs <= 120
    record(4, ok, f"error ratios {np.round(err_ratios, 3).tolist()}, residual ratios "
                  f"{np.round(res_ratios, 3).tolist()}, {secs:.1f}s")
    assert ok


def test_decomposition_identity(p211):
    t0 = time.perf_counter()
    rows = decompose_rows(p211, CFG, 100, DEFAULT_SEED, check_residual=True)
    ident = max(r["identity_error"] for r in rows)
    trunc = max(r["truncation_error"] for r in rows)
    secs = time.perf_counter() - t0
    ok = ident <= 1e-6 and trunc < 1e-8 and secs <= 120
    record(5, ok, f"max |S + T+ + T- - m| {ident:.2e}, truncation {trunc:.1e}, {secs:.1f}s")
    assert ok


def test_cww_exact_constants():
    t0 = time.perf_counter()
    assert round(cww_factor_B(0.25), 6) == 0.022218
    rows = cww_rows(500, 10, 20, (0.1, 0.2, 0.3, 0.4), DEFAULT_SEED)
    bad = [r for r in rows if not r["pass"]]
    forms = {f: sum(r["form"] == f for r in rows) for f in ("A", "B")}
    secs = time.perf_counter() - t0
    ok = not bad and forms["A"] == forms["B"] == 500 * 20 * 4 and secs <= 120
    record(6, ok, f"{len(bad)} violations in {len(rows)} checks "
                  f"({forms['B']} form B, {forms['A']} form A), {secs:.1f}s")
    assert ok


def test_product_martingale_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(DEFAULT_SEED)
    worst = 0.0
    for s in range(200):
        dim = 1 + s % 2
        J = 8 if dim == 1 else 5
        f = random_martingale(J, rng, dim, ("uniform", "rademacher", "bump")[s % 3])
        n = int(rng.integers(0, J))
        m = int(rng.integers(n, J + 1))
        cell = (n,) + tuple(int(rng.integers(0, 2**n)) for _ in range(dim))
        for t in (0.5, 1.0, 2.0):
            worst = max(worst, abs(martingale_product_identity(f, cell, m, t) - 1.0))
    secs = time.perf_counter() - t0
    ok = worst <= 1e-12 and secs <= 30
    record(7, ok, f"max |value - 1| {worst:.1e} over 600 cases, {secs:.1f}s")
    assert ok


def test_karagulyan_family_mu4(p211):
    t0 = time.perf_counter()
    fam = build_family(p211, lacunary_selection(p211, 4, 1.9), 4, 2048)
    f, pieces, _ = assemble(fam)
    rep = verify_family(fam, f, pieces)
    secs = time.perf_counter() - t0
    ok = (rep.partition_exact and rep.norm_sq <= 2.05 and rep.tree_ok
          and rep.sup_ratio >= rep.sup_bound_50 and secs <= 600)
    record(8, ok, f"partition exact {rep.partition_exact}, ||f||^2 {rep.norm_sq:.4f}, "
                  f"tree min ratio {rep.tree_min_ratio:.4f}, sup ratio {rep.sup_ratio:.4f} "
                  f"(need {rep.sup_bound_50:.4f}), {secs:.1f}s")
    assert ok


def test_lower_bound_error_control(p211, evaluator):
    t0 = time.perf_counter()
    C = measured_C_circ(p211, None, CFG)
    fam = build_family(p211, lacunary_selection(p211, 3, C), 3, 512)
    f, pieces, _ = assemble(fam)
    lb = lower_bound_experiment(fam, f, pieces, evaluator, require=False)
    secs = time.perf_counter() - t0
    ok = lb.bounds_ok and secs <= 300
    record(9, ok, f"C_circ {C:.4f}, worst M*relative deviation: axis "
                  f"{lb.max_scaled_error_axis:.3f}, vertical {lb.max_scaled_error_vertical:.3f}, "
                  f"{secs:.1f}s")
    assert ok


def test_growth(evaluator):
    t0 = time.perf_counter()
    rows = run_growth(ExperimentConfig(), evaluator)
    fit = growth_fit(rows)
    secs = time.perf_counter() - t0
    ok = ([r.N for r in rows] == [2, 4, 8, 16, 32] and fit["nondecreasing"]
          and fit["correlation"] >= 0.9 and secs <= 1200)
    record(10, ok, f"estimates {[round(r.estimate, 4) for r in rows]}, "
                   f"correlation {fit['correlation']:.4f}, {secs:.1f}s")
    assert ok


def test_cotlar_stability():
    t0 = time.perf_counter()
    rows = cotlar_rows(1024, 50, DEFAULT_SEED, 0.5, 0.05)
    secs = time.perf_counter() - t0
    ok = all(0 < r["ratio"] <= 2 for r in rows) and secs <= 120
    record(11, ok, ", ".join(f"{r['multiplier']}: {r['family_1']:.4f} / {r['family_2']:.4f}"
                             for r in rows) + f", {secs:.1f}s")
    assert ok


def test_spectral_contracts(evaluator):
    t0 = time.perf_counter()
    rng = np.random.default_rng(DEFAULT_SEED)
    lib = CutoffLibrary(2.0)
    worst_lp, plancherel = 0.0, True
    for n1, n2, L1, L2 in ((64, 64, 1.0, 1.0), (128, 32, 2.0, 0.5), (32, 128, 1.0, 3.0)):
        f = GridFunction2D(n1, n2, L1, L2, rng.normal(size=(n1, n2)) + 1j * rng.normal(size=(n1, n2)))
        for u in (0.25, 1.0, 8.0):
            mmax = np.abs(sample_multiplier(lambda a, b: evaluator(a, u * b), n1, n2, L1, L2)).max()
            plancherel &= hilbert_along_curve(f, evaluator, u).norm() <= mmax * f.norm() * (1 + 1e-12)
        for ax in (1, 2):
            lo, hi = lp_index_range(f, ax, lib)
            s = sum(littlewood_paley_project(f, ax, k, lib).samples for k in range(lo, hi + 1))
            mean = f.samples.mean(axis=ax - 1, keepdims=True)
            worst_lp = max(worst_lp, float(np.abs(s - (f.samples - mean)).max()))
    secs = time.perf_counter() - t0
    ok = plancherel and worst_lp <= 1e-10 and secs <= 60
    record(12, ok, f"Plancherel bound held {plancherel}, partition residual {worst_lp:.1e}, {secs:.1f}s")
    assert ok
