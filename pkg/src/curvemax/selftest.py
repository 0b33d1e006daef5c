"""Invariant suites run by `curvemax selftest`."""

from __future__ import annotations

import math
import time
import traceback

import numpy as np

from .curve_model import CurveParams, lacunary_selection
from .cutoffs import CutoffLibrary
from .dyadic_martingale import (cww_data, cww_from_data, expectation, martingale_product_identity,
                                random_martingale, square_function)
from .grid_transform import (GridFunction2D, littlewood_paley_project, lp_index_range,
                             spectral_map)
from .karagulyan import assemble, build_family, tau_index, verify_family, words
from .multiplier import m_axis, m_point
from .oscillatory import PLUS, PhaseBranch, kappa_leading, sigma_hat

P211 = CurveParams(2.0, 1.0, 1.0)


def _axis_values():
    for p in (P211, CurveParams(3.0, 1.0, -1.0), CurveParams(2.0, 1.0, math.e**2)):
        assert abs(m_point(p, (1.0, 0.0)) + 1j * math.pi) < 1e-6
        assert abs(m_point(p, (1e-6, 1.0)) - m_axis(p, "vertical_up")) < 1e-2


def _homogeneity(count):
    rng = np.random.default_rng(1)
    for _ in range(count):
        xi = (rng.normal(), rng.normal())
        lam = 2 ** rng.uniform(-4, 4)
        a = m_point(P211, xi)
        assert abs(m_point(P211, (lam * xi[0], lam**2 * xi[1])) - a) < 2e-8
        assert abs(m_point(P211, (-xi[0], -xi[1])) - np.conj(a)) < 2e-8


def _stationary_phase():
    br = PhaseBranch(PLUS, P211)
    errs = []
    for R in (100, 200, 400):
        k = kappa_leading(br, (-2.0 * R, R))
        errs.append(abs(sigma_hat(br, (-2.0 * R, R)) - k) / abs(k))
    assert all(b / a <= 0.7 for a, b in zip(errs, errs[1:]))


def _spectral():
    rng = np.random.default_rng(2)
    f = GridFunction2D(32, 16, 1.0, 2.0, rng.normal(size=(32, 16)))
    assert np.allclose(spectral_map(f, lambda a, b: np.ones_like(a)).samples, f.samples, atol=1e-12)
    lib = CutoffLibrary(2.0)
    for ax in (1, 2):
        lo, hi = lp_index_range(f, ax, lib)
        s = sum(littlewood_paley_project(f, ax, k, lib).samples for k in range(lo, hi + 1))
        mean = f.samples.mean(axis=ax - 1, keepdims=True)
        assert np.abs(s - (f.samples - mean)).max() < 1e-10


def _martingales(samples):
    rng = np.random.default_rng(3)
    for s in range(samples):
        f = random_martingale(10, rng, 1, ("uniform", "rademacher", "bump")[s % 3])
        D = cww_data(f)
        for lam in D.M_full.max() * np.logspace(-3, 0, 20):
            for eps in (0.1, 0.2, 0.3, 0.4):
                assert cww_from_data(D, lam, eps, "B").passed
                assert cww_from_data(D, lam, eps, "A").passed
    f = random_martingale(8, rng)
    assert np.allclose(expectation(expectation(f, 5), 3).values, expectation(f, 3).values)
    for t in (0.5, 1.0, 2.0):
        assert abs(martingale_product_identity(f, (1, 1), 8, t) - 1) < 1e-12
    assert square_function(f.like(np.full(256, 2.0)), 0).values.max() == 0


def _tau():
    for mu in range(1, 13):
        assert sorted(tau_index(w, mu) for w in words(mu)) == list(range(1, 2**mu))


def _family(mu, n):
    sel = lacunary_selection(P211, mu, 1.9)
    fam = build_family(P211, sel, mu, n)
    f, pieces, _ = assemble(fam)
    rep = verify_family(fam, f, pieces)
    assert rep.passed, rep.to_dict()


def run(level: str):
    fast = level == "fast"
    suites = [
        ("multiplier axis values", _axis_values),
        ("homogeneity and symmetry", lambda: _homogeneity(10 if fast else 200)),
        ("stationary phase decay", _stationary_phase),
        ("spectral contracts", _spectral),
        ("dyadic martingales and CWW", lambda: _martingales(30 if fast else 500)),
        ("tau bijection", _tau),
        ("tree family", lambda: _family(2, 128) if fast else _family(4, 2048)),
    ]
    out = []
    for name, fn in suites:
        t = time.perf_counter()
        try:
            fn()
            ok = True
        except Exception:
            traceback.print_exc()
            ok = False
        out.append((name, ok, time.perf_counter() - t))
    return out
