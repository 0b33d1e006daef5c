"""Phases, critical points and the dyadic oscillatory pieces of the curve measure."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .curve_model import CurveParams
from .cutoffs import CutoffLibrary, chi_plus
from .quadrature import (
    QuadratureConfig,
    QuadratureError,
    integrate_panels,
    phase_breakpoints,
)

PLUS, MINUS = 1, -1


@dataclass(frozen=True)
class PhaseBranch:
    sign: int
    params: CurveParams

    def __post_init__(self):
        if self.sign not in (PLUS, MINUS):
            raise ValueError("branch sign must be +1 or -1")

    @property
    def c(self) -> float:
        return self.params.coefficient(self.sign)


@dataclass(frozen=True)
class CriticalPointData:
    t_star: float
    phase_at_crit: float
    second_derivative: float


def _check_domain(branch: PhaseBranch, t):
    t = np.asarray(t, dtype=float)
    if np.any(branch.sign * t <= 0):
        side = "t > 0" if branch.sign > 0 else "t < 0"
        raise ValueError(f"t outside the branch domain ({side})")
    return t


def phase(branch: PhaseBranch, t, xi):
    t = _check_domain(branch, t)
    b = branch.params.b
    val = t * xi[0] + branch.c * np.abs(t) ** b * xi[1]
    return val if np.ndim(val) else float(val)


def phase_derivatives(branch: PhaseBranch, t, xi):
    t = _check_domain(branch, t)
    b, c, s = branch.params.b, branch.c, branch.sign
    at = np.abs(t)
    d1 = xi[0] + s * c * b * at ** (b - 1) * xi[1]
    d2 = c * b * (b - 1) * at ** (b - 2) * xi[1]
    if np.ndim(d1) == 0:
        return float(d1), float(d2)
    return d1, d2


def critical_point(branch: PhaseBranch, xi) -> Optional[CriticalPointData]:
    xi1, xi2 = float(xi[0]), float(xi[1])
    if xi1 == 0 and xi2 == 0:
        raise ValueError("critical points are undefined at xi = 0")
    if xi2 == 0:
        return None
    b, c, s = branch.params.b, branch.c, branch.sign
    ratio = xi1 / (c * xi2)
    if s * ratio >= 0:
        return None
    t = s * (abs(ratio) / b) ** (1.0 / (b - 1))
    d2 = c * b * (b - 1) * abs(t) ** (b - 2) * xi2
    return CriticalPointData(t, phase(branch, t, (xi1, xi2)), d2)


def Psi(branch: PhaseBranch, xi) -> float:
    """Minus the phase at the critical point, in closed form."""
    xi1, xi2 = float(xi[0]), float(xi[1])
    b, c, s = branch.params.b, branch.c, branch.sign
    if xi2 == 0 or s * xi1 / (c * xi2) >= 0:
        raise ValueError("no critical point for this branch and frequency")
    return (b - 1) * c * xi2 * (-s * xi1 / (b * c * xi2)) ** (b / (b - 1))


def _sigma_integrand(params: CurveParams, sign: int, xi):
    # after t -> sign * tau the integral runs over tau in (1/2, 2)
    b = params.b
    c = params.coefficient(sign)
    a1 = sign * xi[0]
    a2 = c * xi[1]

    def f(tau):
        return np.exp(-1j * (a1 * tau + a2 * tau**b)) * chi_plus(tau) / tau

    return f, abs(a1), abs(a2)


def sigma_hat(branch: PhaseBranch, xi, cfg: QuadratureConfig = QuadratureConfig(),
              full_output: bool = False):
    """Integral of exp(-i psi(t, xi)) chi(t) dt / t over the branch's dyadic shell."""
    params, s = branch.params, branch.sign
    f, alpha, beta = _sigma_integrand(params, s, xi)
    breaks = np.concatenate([
        np.linspace(0.5, 2.0, 33),
        phase_breakpoints(0.5, 2.0, alpha, beta, params.b, per_panel=np.pi),
    ])
    val, err = integrate_panels(f, breaks, cfg)
    val *= s
    if err > cfg.abs_tol:
        raise QuadratureError(f"sigma_hat error estimate {err:.3g} exceeds abs_tol", err)
    return (val, err) if full_output else val


def _cut_factor(params: CurveParams, sign: int, xi1, xi2, lib: CutoffLibrary):
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    c = params.coefficient(sign)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(xi2 != 0, xi1 / (c * np.where(xi2 != 0, xi2, 1.0)), np.inf)
    var = lib.varsigma_minus(ratio) if sign > 0 else lib.varsigma_plus(ratio)
    var = np.where(np.isfinite(ratio), var, 0.0)
    return (1.0 - lib.eta0(xi1, xi2)) * var


def mu_hat(branch: PhaseBranch, xi, cfg: QuadratureConfig = QuadratureConfig()):
    params = branch.params
    lib = CutoffLibrary(params.b)
    factor = float(_cut_factor(params, branch.sign, xi[0], xi[1], lib))
    if factor == 0.0:
        return 0j
    return factor * sigma_hat(branch, xi, cfg)


def kappa_leading_array(params: CurveParams, sign: int, xi1, xi2, lib=None):
    """Vectorised leading stationary-phase symbol of the sector piece."""
    lib = lib or CutoffLibrary(params.b)
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    b, c = params.b, params.coefficient(sign)
    out = np.zeros(np.broadcast(xi1, xi2).shape, dtype=complex)
    factor = _cut_factor(params, sign, xi1, xi2, lib)
    live = factor != 0
    if not np.any(live):
        return out
    x1 = np.broadcast_to(xi1, out.shape)[live]
    x2 = np.broadcast_to(xi2, out.shape)[live]
    ratio = x1 / (c * x2)
    at = (np.abs(ratio) / b) ** (1.0 / (b - 1))
    t = sign * at
    d2 = c * b * (b - 1) * at ** (b - 2) * x2
    big_psi = (b - 1) * c * x2 * at**b
    amp = chi_plus(at) / t * np.sqrt(2 * np.pi / np.abs(d2))
    out[live] = (np.broadcast_to(factor, out.shape)[live] * amp
                 * np.exp(-0.25j * np.pi * np.sign(d2)) * np.exp(1j * big_psi))
    return out


def kappa_leading(branch: PhaseBranch, xi) -> complex:
    return complex(kappa_leading_array(branch.params, branch.sign, xi[0], xi[1]))


def sigma0_hat(params: CurveParams, xi, cfg: QuadratureConfig = QuadratureConfig(),
               full_output: bool = False):
    vp, ep = sigma_hat(PhaseBranch(PLUS, params), xi, cfg, full_output=True)
    vm, em = sigma_hat(PhaseBranch(MINUS, params), xi, cfg, full_output=True)
    return (vp + vm, ep + em) if full_output else vp + vm


def phi0_residual(params: CurveParams, xi, cfg: QuadratureConfig = QuadratureConfig(),
                  full_output: bool = False):
    """sigma0_hat minus both leading stationary-phase symbols."""
    val, err = sigma0_hat(params, xi, cfg, full_output=True)
    lib = CutoffLibrary(params.b)
    for s in (PLUS, MINUS):
        val -= complex(kappa_leading_array(params, s, xi[0], xi[1], lib))
    return (val, err) if full_output else val
