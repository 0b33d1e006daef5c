import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from curvemax.curve_model import CurveParams
from curvemax.cutoffs import chi_plus
from curvemax.oscillatory import (MINUS, PLUS, PhaseBranch, Psi, critical_point, kappa_leading,
                                  phase, phase_derivatives, phi0_residual, sigma0_hat, sigma_hat)

P = CurveParams(2.0, 1.0, 1.0)


def test_branch_domain():
    with pytest.raises(ValueError):
        PhaseBranch(0, P)
    with pytest.raises(ValueError):
        phase(PhaseBranch(PLUS, P), -1.0, (1.0, 1.0))
    with pytest.raises(ValueError):
        critical_point(PhaseBranch(PLUS, P), (0.0, 0.0))


@settings(max_examples=60)
@given(st.floats(0.1, 50), st.floats(0.1, 50), st.sampled_from([PLUS, MINUS]),
       st.sampled_from([CurveParams(2, 1, 1), CurveParams(3, 1, -1), CurveParams(2.5, 2, 0.5)]))
def test_critical_point_is_stationary(a, c, sign, params):
    br = PhaseBranch(sign, params)
    # choose xi so that the branch has a stationary point
    xi = (-sign * a * math.copysign(1.0, br.c), c)
    cp = critical_point(br, xi)
    assert cp is not None
    d1, d2 = phase_derivatives(br, cp.t_star, xi)
    assert abs(d1) <= 1e-9 * (abs(xi[0]) + abs(xi[1]))
    assert math.isclose(d2, cp.second_derivative, rel_tol=1e-12)
    assert math.isclose(Psi(br, xi), -cp.phase_at_crit, rel_tol=1e-10, abs_tol=1e-12)


def test_no_critical_point_off_sector():
    assert critical_point(PhaseBranch(PLUS, P), (1.0, 1.0)) is None
    assert critical_point(PhaseBranch(PLUS, P), (1.0, 0.0)) is None
    with pytest.raises(ValueError):
        Psi(PhaseBranch(PLUS, P), (1.0, 1.0))


@pytest.mark.parametrize("xi", [(3.0, -1.0), (-20.0, 7.0), (0.5, 0.5)])
def test_sigma_hat_against_scipy(xi):
    br = PhaseBranch(PLUS, P)

    def g(t, part):
        v = np.exp(-1j * (t * xi[0] + t**2 * xi[1])) * chi_plus(np.array(t)) / t
        return float(v.real if part == 0 else v.imag)

    ref = complex(quad(g, 0.5, 2.0, args=(0,), limit=400, epsabs=1e-13)[0],
                  quad(g, 0.5, 2.0, args=(1,), limit=400, epsabs=1e-13)[0])
    assert abs(sigma_hat(br, xi) - ref) < 1e-10


def test_minus_branch_is_reflection():
    # with c_plus = c_minus the minus shell is the plus shell at (-xi_1, xi_2), negated
    xi = (4.0, -3.0)
    a = sigma_hat(PhaseBranch(MINUS, P), xi)
    b = sigma_hat(PhaseBranch(PLUS, P), (-xi[0], xi[1]))
    assert abs(a + b) < 1e-12


def test_stationary_phase_decay():
    br = PhaseBranch(PLUS, P)
    errs = []
    for R in (100, 200, 400, 800):
        k = kappa_leading(br, (-2.0 * R, R))
        errs.append(abs(sigma_hat(br, (-2.0 * R, R)) - k) / abs(k))
    ratios = [b / a for a, b in zip(errs, errs[1:])]
    assert max(ratios) <= 0.7
    # the relative error of the leading term is O(1/R): halving trend, not faster than R^-2
    assert min(ratios) >= 0.2


def test_residual_composition():
    xi = (-300.0, 150.0)
    r = phi0_residual(P, xi)
    s = sigma0_hat(P, xi)
    k = kappa_leading(PhaseBranch(PLUS, P), xi) + kappa_leading(PhaseBranch(MINUS, P), xi)
    assert abs(r - (s - k)) < 1e-14
    assert abs(r) < 0.05 * abs(k)
