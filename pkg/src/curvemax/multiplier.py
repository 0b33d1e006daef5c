"""The multiplier m of the Hilbert transform along the curve.

m(xi) = p.v. int exp(-i (t xi_1 + gamma_b(t) xi_2)) dt / t, evaluated by folding
the two half-lines onto (0, inf), panel quadrature on (0, T) and an analytic
treatment of the tail beyond every critical point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .contour import ContourError, half_line_integral
from .curve_model import CurveParams
from .cutoffs import CutoffLibrary, smoothstep
from .oscillatory import MINUS, PLUS, kappa_leading_array, phi0_residual
from .quadrature import (
    QuadratureConfig,
    QuadratureError,
    geometric_breakpoints,
    integrate_panels,
    phase_breakpoints,
)


@dataclass(frozen=True)
class MultiplierValue:
    value: complex
    quad_err: float
    tail_bound: float
    cutoff: float


@dataclass(frozen=True)
class HoelderReport:
    C_circ_estimate: float
    max_ratio_xi2_axis: float
    max_ratio_xi1_axis: float
    sample_count: int
    beta_theory: float = 0.0
    fitted_exponent_xi2_axis: float = 0.0
    fitted_exponent_xi1_axis: float = 0.0
    eta_grid: tuple = ()
    deviations_xi2_axis: tuple = ()
    deviations_xi1_axis: tuple = ()

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def m_axis(params: CurveParams, which: str, sign_or_unit: float = 1.0) -> complex:
    if which == "horizontal":
        if sign_or_unit == 0:
            raise ValueError("horizontal axis value needs a nonzero xi_1")
        return -1j * math.pi * math.copysign(1.0, sign_or_unit)
    b, cp, cm = params.b, params.c_plus, params.c_minus
    # (1/b)(log(i c_minus) - log(i c_plus)) with principal logarithms
    rho = complex(math.log(abs(cm / cp)) / b,
                  0.5 * math.pi * (math.copysign(1.0, cm) - math.copysign(1.0, cp)) / b)
    if which == "vertical_up":
        return rho
    if which == "vertical_down":
        return rho.conjugate()
    raise ValueError(f"unknown axis selector {which!r}")


def rho_constant(params: CurveParams) -> complex:
    return m_axis(params, "vertical_up")


def _sphere_normalise(params: CurveParams, xi1: float, xi2: float):
    lam = abs(xi1) + abs(xi2) ** (1.0 / params.b)
    return xi1 / lam, xi2 / lam**params.b


def _tail_ibp(alpha, beta, b, T):
    """Two-step integration by parts for int_T^inf exp(-i(alpha t + beta t^b)) dt / t.

    Returns (value, remainder_bound); the bound is the total variation of the
    second-order amplitude on [T, inf).
    """
    def d1(t):
        return alpha + b * beta * t ** (b - 1)

    def d2(t):
        return b * (b - 1) * beta * t ** (b - 2)

    def amp1(t):
        d = d1(t)
        return -(d + t * d2(t)) / (t**2 * d**3)

    ph = np.exp(-1j * (alpha * T + beta * T**b))
    d = d1(T)
    B0 = 1j / (T * d)
    B1 = amp1(T)
    val = -ph * (B0 + B1)
    ts = T * np.logspace(0, 12, 600)
    a = amp1(ts)
    bound = float(np.abs(np.diff(a)).sum() + abs(a[-1]))
    return complex(val), bound


def _tail_window(g, T, cfg, alpha_max, beta_max, b):
    """Smoothly windowed continuation of the integral over (T, 3T)."""
    def w(t):
        return 1.0 - smoothstep((t - T) / (2.0 * T))

    breaks = np.concatenate([[T, 3 * T], np.linspace(T, 3 * T, 17),
                             phase_breakpoints(T, 3 * T, alpha_max, beta_max, b)])
    val, err = integrate_panels(lambda t: g(t) * w(t), breaks, cfg)
    return val, err


_T0 = 1.0


def _branches(params, x1, x2):
    # t > 0 branch phase: x1 t + cp x2 t^b ; folded t < 0 branch: -x1 t + cm x2 t^b
    return ((x1, params.c_plus * x2, 1.0), (-x1, params.c_minus * x2, -1.0))


def _contour_regime(params, x1, x2) -> bool:
    """Near the horizontal axis, where real-line quadrature meets a far stationary point."""
    if x2 == 0 or abs(x1) < 0.5:
        return False
    b = params.b
    for al, be, _ in _branches(params, x1, x2):
        if al * be < 0 and (math.log(-al / be) - math.log(b)) / (b - 1) < math.log(3.0 * _T0):
            return False
    return True


@dataclass(frozen=True)
class MultiplierParts:
    """m = smooth + sum_k exp(i Psi_k) W_k near the horizontal axis."""

    smooth: complex
    psi: tuple
    weights: tuple
    err: float

    def value(self) -> complex:
        return self.smooth + sum(np.exp(1j * p) * w for p, w in zip(self.psi, self.weights))


def _parts_sphere(params, x1, x2, cfg) -> MultiplierParts:
    b = params.b
    dif_lin, dif_pow = 2.0 * x1, (params.c_plus - params.c_minus) * x2
    sum_pow = (params.c_plus + params.c_minus) * x2

    def g(t):
        half = 0.5 * (dif_lin * t + dif_pow * t**b)
        return -2j * np.sin(half) / t * np.exp(-0.5j * sum_pow * t**b)

    breaks = np.concatenate([np.linspace(0.0, _T0, 9), geometric_breakpoints(1e-14, _T0)])
    smooth, err = integrate_panels(g, breaks, cfg)
    psi, weights = [], []
    for al, be, sgn in _branches(params, x1, x2):
        res = half_line_integral(al, be, b, _T0, cfg.nodes_high, cfg.nodes_low)
        smooth += sgn * res.endpoint
        err += res.err
        for sd in res.saddles:
            psi.append(-sd.phase)
            weights.append(sgn * sd.weight)
    return MultiplierParts(complex(smooth), tuple(psi), tuple(weights), float(err))


def m_parts(params: CurveParams, xi, cfg: QuadratureConfig = QuadratureConfig()):
    """Split of m into a non-oscillating part and stationary-point terms.

    Only available near the horizontal axis (returns None elsewhere). The phases
    Psi_k are invariant under the anisotropic dilation, like m itself.
    """
    xi1, xi2 = float(xi[0]), float(xi[1])
    if xi1 == 0 and xi2 == 0:
        raise ValueError("the multiplier is undefined at xi = 0")
    x1, x2 = _sphere_normalise(params, xi1, xi2)
    if not _contour_regime(params, x1, x2):
        return None
    try:
        parts = _parts_sphere(params, x1, x2, cfg)
    except ContourError:
        return None
    return parts if parts.err <= cfg.abs_tol else None


def m_point(params: CurveParams, xi, cfg: QuadratureConfig = QuadratureConfig(),
            full_output: bool = False):
    """Principal-value multiplier at xi != 0."""
    xi1, xi2 = float(xi[0]), float(xi[1])
    if xi1 == 0 and xi2 == 0:
        raise ValueError("the multiplier is undefined at xi = 0")
    x1, x2 = _sphere_normalise(params, xi1, xi2)
    b, cp, cm = params.b, params.c_plus, params.c_minus
    if _contour_regime(params, x1, x2):
        try:
            parts = _parts_sphere(params, x1, x2, cfg)
        except ContourError:
            parts = None
        # a descent path that brushes a complex stationary point shows up in the
        # error estimate; real-line quadrature takes over in that case
        if parts is not None and parts.err <= cfg.abs_tol:
            val = parts.value()
            if full_output:
                return MultiplierValue(val, parts.err, 0.0, float("inf"))
            return val
    a_p, b_p = x1, cp * x2
    a_m, b_m = -x1, cm * x2

    crit = [1.0]
    for al, be in ((a_p, b_p), (a_m, b_m)):
        if be != 0 and -al / be > 0:
            log_t = (math.log(-al / be) - math.log(b)) / (b - 1)
            if log_t > 60.0:
                raise QuadratureError(f"stationary point at t ~ e^{log_t:.3g} is out of reach "
                                      "for real-line quadrature")
            crit.append(math.exp(log_t))
    factor = max(2.0, 2.0 ** (1.0 / (b - 1)))
    T = max(4.0, factor * max(crit))

    dif_lin, dif_pow = 2.0 * x1, (cp - cm) * x2
    sum_pow = (cp + cm) * x2

    def g(t):
        half = 0.5 * (dif_lin * t + dif_pow * t**b)
        return -2j * np.sin(half) / t * np.exp(-0.5j * sum_pow * t**b)

    alpha_max = abs(x1)
    beta_max = max(abs(cp), abs(cm)) * abs(x2)

    def body(T):
        lo = 1e-14
        breaks = np.concatenate([
            [0.0, T], geometric_breakpoints(lo, T),
            phase_breakpoints(0.0, T, alpha_max, beta_max, b),
        ])
        return integrate_panels(g, breaks, cfg)

    if cfg.tail_strategy == "steepest_descent" and b_p != 0 and b_m != 0:
        val, err = body(T)
        tail_bound = 0.0
        for al, be, sgn in ((a_p, b_p, 1.0), (a_m, b_m, -1.0)):
            try:
                res = half_line_integral(al, be, b, T, cfg.nodes_high, cfg.nodes_low)
            except ContourError:
                return m_point(params, xi, replace(cfg, tail_strategy="integration_by_parts"),
                               full_output)
            val += sgn * res.total()
            err += res.err
        if err > cfg.abs_tol:
            return m_point(params, xi, replace(cfg, tail_strategy="integration_by_parts"),
                           full_output)
    elif cfg.tail_strategy in ("integration_by_parts", "steepest_descent"):
        for _ in range(40):
            tp, ep = _tail_ibp(a_p, b_p, b, T)
            tm, em = _tail_ibp(a_m, b_m, b, T)
            tail_bound = ep + em
            if tail_bound <= 0.1 * cfg.abs_tol:
                break
            T *= 2.0
        else:
            raise QuadratureError(f"tail bound {tail_bound:.3g} stays above tolerance", tail_bound)
        val, err = body(T)
        val += tp - tm
    else:
        # the windowed total converges faster than any power of T; double until it settles
        def windowed(T):
            v, e = body(T)
            wv, we = _tail_window(g, T, cfg, alpha_max, beta_max, b)
            return v + wv, e + we

        val, err = windowed(T)
        for _ in range(12):
            nxt, nerr = windowed(2.0 * T)
            tail_bound = abs(nxt - val)
            T, val, err = 2.0 * T, nxt, nerr
            if tail_bound <= 0.1 * cfg.abs_tol:
                break
    if err > cfg.abs_tol or tail_bound > 10 * cfg.abs_tol:
        raise QuadratureError(
            f"multiplier quadrature error {err:.3g} / tail {tail_bound:.3g} above tolerance",
            err + tail_bound)
    if full_output:
        return MultiplierValue(complex(val), err, tail_bound, T)
    return complex(val)


def _saddle_layout(params: CurveParams, side: float):
    """(alpha, c) of every branch with a stationary point at xi = (1, side * r), r > 0."""
    out = []
    if params.c_plus * side < 0:
        out.append((1.0, params.c_plus))
    if params.c_minus * side > 0:
        out.append((-1.0, params.c_minus))
    return out


def _psi_from_log(params: CurveParams, alpha: float, c: float, log_abs_r):
    # Psi at (1, r) for the branch with linear coefficient alpha and curve coefficient c
    b = params.b
    log_t = -(math.log(b) + math.log(abs(c)) + np.asarray(log_abs_r)) / (b - 1)
    return -alpha * (b - 1) / b * np.exp(log_t)


class MultiplierEvaluator:
    """Tabulated multiplier, reduced by anisotropic homogeneity and Hermitian symmetry.

    Two charts cover the unit sphere: r = xi_2 / |xi_1|^b in [-1, 1] and
    q = xi_1 / |xi_2|^{1/b} in [-1, 1]. In the first chart each side is tabulated
    in v = log10|r|; near the axis the table holds the non-oscillating parts of
    m = R + sum_k exp(i Psi_k) W_k with Psi_k in closed form, so the rapid
    oscillation of m never has to be interpolated.
    """

    V_MIN = -14.0

    def __init__(self, params: CurveParams, qcfg: QuadratureConfig = QuadratureConfig(),
                 tol: float = 1e-5, dv: float = 0.2, n_direct: int = 40, n_vertical: int = 129,
                 n_checks: int = 16, seed: int = 0, validate: bool = True):
        self.params = params
        self.qcfg = qcfg
        # tabulation uses descent-path tails; validation uses qcfg as given
        self._build_cfg = replace(qcfg, tail_strategy="steepest_descent")
        self.tol = float(tol)
        self.rho_const = m_axis(params, "vertical_up")
        self.gamma = 1.0 / (2.0 * (params.b - 1.0))
        self._sides = {s: self._build_side(s, dv, n_direct) for s in (1.0, -1.0)}
        # vertical chart on Chebyshev points, which cluster at both chart edges
        k = np.arange(n_vertical)
        q = -np.cos(np.pi * k / (n_vertical - 1))
        q[n_vertical // 2] = 0.0
        mv = np.array([self.rho_const if x == 0 else m_point(params, (x, 1.0), self._build_cfg)
                       for x in q])
        self._vert = CubicSpline(q, mv)
        self.n_knots = int(n_vertical + sum(sd["n"] for sd in self._sides.values()))
        self.max_spot_error = None
        if validate:
            self.max_spot_error = self.validate(n_checks, seed)
            if self.max_spot_error > self.tol:
                raise QuadratureError(
                    f"cache spot-check error {self.max_spot_error:.3g} exceeds tolerance {self.tol:.3g}",
                    self.max_spot_error)

    def _build_side(self, side, dv, n_direct):
        p = self.params
        layout = _saddle_layout(p, side)
        # the contour regime holds on an initial segment of v; find its end on a fine scan
        scan = np.arange(self.V_MIN, 1e-12, 0.02)
        ok = np.array([_contour_regime(p, *_sphere_normalise(p, 1.0, side * 10.0**v)) for v in scan])
        v_top = scan[int(np.argmin(ok)) - 1] if not ok.all() else 0.0
        out = {"layout": layout, "n": 0}
        vc, R, Wt = [], [], []
        if ok[0]:
            # knots dense near the top of the segment, where t* approaches the contour start
            fine = v_top - np.arange(0.0, 2.0, dv / 4)
            coarse = np.arange(fine[-1] - dv, self.V_MIN - dv, -dv)
            for v in np.concatenate([fine, coarse]):
                v = max(v, self.V_MIN)
                r = 10.0**v
                parts = m_parts(p, (1.0, side * r), self._build_cfg)
                if parts is None:
                    # descent paths degrade: restart the segment below this knot
                    vc, R, Wt = [], [], []
                    continue
                if len(parts.weights) != len(layout):
                    raise AssertionError("unexpected stationary-point layout")
                vc.append(v)
                R.append(parts.smooth)
                Wt.append([w * r ** -self.gamma for w in self._order(parts, layout, r)])
                if v == self.V_MIN:
                    break
            vc, R, Wt = vc[::-1], R[::-1], Wt[::-1]
        if len(vc) >= 4:
            vc = np.asarray(vc)
            out["v_split"] = float(vc[-1])
            out["R"] = CubicSpline(vc, np.array(R))
            out["W"] = CubicSpline(vc, np.array(Wt).reshape(len(vc), len(layout)))
            out["n"] += len(vc)
            v_lo = float(vc[-1])
        else:
            out["v_split"] = -np.inf
            v_lo = self.V_MIN
        if v_lo < 0.0:
            # remaining stretch up to the chart edge; Psi is O(1) here
            # Psi is moderate here but can still wind a few times: keep knots dense in Psi
            psi_top = max([abs(float(_psi_from_log(p, a, c, v_lo * math.log(10.0))))
                           for a, c in layout] + [0.0])
            n = max(n_direct, int(math.ceil(psi_top * math.log(10.0) * (0.0 - v_lo) / 0.15)))
            vd = np.linspace(v_lo, 0.0, min(n, 400))
            md = np.array([m_point(p, (1.0, side * 10.0**v), self._build_cfg) for v in vd])
            out["direct"] = CubicSpline(vd, md)
            out["n"] += len(vd)
        return out

    def _order(self, parts, layout, r):
        # match each returned weight to its branch via the closed-form phase
        log_r = math.log(r)
        psi_ref = [float(_psi_from_log(self.params, a, c, log_r)) for a, c in layout]
        got = list(zip(parts.psi, parts.weights))
        ordered = []
        for ref in psi_ref:
            k = min(range(len(got)), key=lambda i: abs(got[i][0] - ref))
            ordered.append(got.pop(k)[1])
        return ordered

    # evaluation -------------------------------------------------------------

    def _side_eval(self, side, v):
        """m(1, side * 10^v) for an array v <= 0."""
        sd = self._sides[side]
        v = np.asarray(v, dtype=float)
        out = np.empty(v.shape, dtype=complex)
        near = v <= sd["v_split"]
        if np.any(near):
            vn = np.maximum(v[near], self.V_MIN)
            val = sd["R"](vn)
            Wt = sd["W"](vn)
            log_r = v[near] * math.log(10.0)
            amp = np.exp(self.gamma * log_r)
            for k, (a, c) in enumerate(sd["layout"]):
                with np.errstate(over="ignore"):
                    psi = _psi_from_log(self.params, a, c, log_r)
                # past |psi| ~ 1e15 the phase carries no digits and amp is far below tol
                live = np.abs(psi) < 1e15
                ph = np.exp(1j * np.mod(np.where(live, psi, 0.0), 2 * np.pi))
                val = val + np.where(live, ph * Wt[..., k] * amp, 0.0)
            out[near] = val
        if np.any(~near):
            out[~near] = sd["direct"](v[~near])
        return out

    def from_log(self, sign1, sign2, log_abs_xi1, log_abs_xi2):
        """m at xi = (sign1 e^{a}, sign2 e^{c}); handles magnitudes far outside float range.

        A zero sign selects the corresponding axis.
        """
        sign1, sign2, a, c = np.broadcast_arrays(
            np.sign(sign1), np.sign(sign2), np.asarray(log_abs_xi1, dtype=float),
            np.asarray(log_abs_xi2, dtype=float))
        b = self.params.b
        out = np.zeros(sign1.shape, dtype=complex)
        horiz = (sign2 == 0) & (sign1 != 0)
        out[horiz] = -1j * np.pi * sign1[horiz]
        vert = (sign1 == 0) & (sign2 != 0)
        out[vert] = np.where(sign2[vert] > 0, self.rho_const, np.conj(self.rho_const))
        gen = (sign1 != 0) & (sign2 != 0)
        with np.errstate(invalid="ignore"):
            log_r = c - b * a  # log |xi_2| / |xi_1|^b; nan only on the axes
        g = gen & (log_r <= 0)
        if np.any(g):
            s = sign1[g] * sign2[g]
            v = log_r[g] / math.log(10.0)
            val = np.empty(v.shape, dtype=complex)
            for side in (1.0, -1.0):
                sel = s == side
                if np.any(sel):
                    val[sel] = self._side_eval(side, v[sel])
            out[g] = np.where(sign1[g] < 0, np.conj(val), val)
        h = gen & (log_r > 0)
        if np.any(h):
            q = sign1[h] * sign2[h] * np.exp(-log_r[h] / b)
            val = self._vert(q)
            out[h] = np.where(sign2[h] < 0, np.conj(val), val)
        return out

    def __call__(self, xi1, xi2):
        xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
        with np.errstate(divide="ignore"):
            a = np.log(np.abs(xi1))
            c = np.log(np.abs(xi2))
        return self.from_log(np.sign(xi1), np.sign(xi2), a, c)

    def validate(self, n: int, seed: int = 0) -> float:
        """Largest deviation from direct evaluation over random sphere points."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        b = self.params.b
        for k in range(n):
            if k % 2 == 0:
                # horizontal chart, log-uniform in r
                r = rng.choice([-1.0, 1.0]) * 10.0 ** rng.uniform(-8.0, 0.0)
                xi = (rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 4.0), 0.0)
                xi = (xi[0], r * abs(xi[0]) ** b)
            else:
                q = rng.uniform(-1.0, 1.0)
                s2 = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 4.0)
                xi = (q * abs(s2) ** (1.0 / b), s2)
            ref = m_point(self.params, xi, self.qcfg)
            worst = max(worst, abs(complex(self(xi[0], xi[1])) - ref))
        return worst


def m_cached(ev: MultiplierEvaluator, xi):
    """Cached multiplier; accepts a single point or a pair of arrays. m(0, 0) := 0."""
    out = ev(xi[0], xi[1])
    return complex(out) if np.ndim(out) == 0 else out


def _loglog_slope(x, y):
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def hoelder_verify(params: CurveParams, eta_grid, cfg: QuadratureConfig = QuadratureConfig()):
    """Measure the Hoelder quotients of m at both axes over a grid of small eta."""
    eta = np.sort(np.asarray(list(eta_grid), dtype=float))[::-1]
    if eta.size == 0 or np.any(eta <= 0) or np.any(eta > 1):
        raise ValueError("eta grid values must lie in (0, 1]")
    b = params.b
    rho = m_axis(params, "vertical_up")
    dev_h, dev_v = [], []
    for e in eta:
        d1 = max(abs(m_point(params, (1.0, e), cfg) + 1j * np.pi),
                 abs(m_point(params, (1.0, -e), cfg) + 1j * np.pi),
                 abs(m_point(params, (-1.0, e), cfg) - 1j * np.pi),
                 abs(m_point(params, (-1.0, -e), cfg) - 1j * np.pi))
        d2 = max(abs(m_point(params, (e, 1.0), cfg) - rho),
                 abs(m_point(params, (-e, 1.0), cfg) - rho),
                 abs(m_point(params, (e, -1.0), cfg) - np.conj(rho)),
                 abs(m_point(params, (-e, -1.0), cfg) - np.conj(rho)))
        dev_h.append(d1)
        dev_v.append(d2)
    dev_h, dev_v = np.array(dev_h), np.array(dev_v)
    # |xi_2|/|xi_1|^b = eta on the first family, |xi_1|^b/|xi_2| = eta^b on the second
    ratio_h = dev_h / eta ** (1.0 / (2 * b))
    ratio_v = dev_v / (eta**b) ** (1.0 / (2 * b))
    tail = slice(-3, None) if eta.size >= 3 else slice(None)
    fit_h = _loglog_slope(eta[tail], np.maximum(dev_h[tail], 1e-300))
    fit_v = _loglog_slope(eta[tail], np.maximum(dev_v[tail], 1e-300))
    mh, mv = float(ratio_h.max()), float(ratio_v.max())
    return HoelderReport(
        C_circ_estimate=max(1.0, mh, mv),
        max_ratio_xi2_axis=mh,
        max_ratio_xi1_axis=mv,
        sample_count=int(8 * eta.size),
        beta_theory=min(1.0 / (b + 1.0), 1.0 / (2.0 * b - 2.0)),
        fitted_exponent_xi2_axis=fit_h,
        fitted_exponent_xi1_axis=fit_v,
        eta_grid=tuple(float(x) for x in eta),
        deviations_xi2_axis=tuple(float(x) for x in dev_h),
        deviations_xi1_axis=tuple(float(x) for x in dev_v),
    )


@dataclass(frozen=True)
class Decomposition:
    S: complex
    T_plus: complex
    T_minus: complex
    truncation_error: float
    scales: tuple  # dyadic exponents j with a nonzero term

    def __iter__(self):
        return iter((self.S, self.T_plus, self.T_minus))


def _active_scales(params: CurveParams, sign: int, xi1: float, xi2: float):
    """Dyadic exponents j for which delta_{2^j} xi can meet the sector cutoff."""
    if xi1 == 0 or xi2 == 0:
        return range(0)
    b = params.b
    c = params.coefficient(sign)
    ratio = abs(xi1 / (c * xi2))
    # the ratio scales like 2^{j(1-b)}; its cutoff support is (b 4^{1-b}, b 4^{b-1})
    lo = (math.log2(ratio) - math.log2(b * 4.0 ** (b - 1))) / (b - 1)
    hi = (math.log2(ratio) - math.log2(b * 4.0 ** (1 - b))) / (b - 1)
    return range(math.floor(lo) - 1, math.ceil(hi) + 2)


def sector_sum(params: CurveParams, sign: int, xi1: float, xi2: float, lib=None):
    """sum_j kappa_leading(delta_{2^j} xi), with the count of nonzero terms and edge check."""
    lib = lib or CutoffLibrary(params.b)
    js = _active_scales(params, sign, xi1, xi2)
    if len(js) == 0:
        return 0j, 0.0, ()
    j = np.arange(js.start, js.stop)
    lam = 2.0 ** j
    terms = kappa_leading_array(params, sign, lam * xi1, lam**params.b * xi2, lib)
    # both end terms lie outside the cutoff support by construction
    edge = float(abs(terms[0]) + abs(terms[-1]))
    live = tuple(int(x) for x in j[terms != 0])
    return complex(terms.sum()), edge, live


def decomposition_values(params: CurveParams, u: float, xi,
                         cfg: QuadratureConfig = QuadratureConfig()) -> Decomposition:
    """(S, T_plus, T_minus) at (xi_1, u xi_2) with S = m - T_plus - T_minus."""
    if not u > 0:
        raise ValueError("u must be positive")
    xi1, xi2 = float(xi[0]), float(u * xi[1])
    if xi1 == 0 and xi2 == 0:
        raise ValueError("the decomposition is undefined at xi = 0")
    lib = CutoffLibrary(params.b)
    tp, ep, lp = sector_sum(params, PLUS, xi1, xi2, lib)
    tm, em, lm = sector_sum(params, MINUS, xi1, xi2, lib)
    if ep + em > 0:
        raise QuadratureError("sector sum did not terminate inside its scale window", ep + em)
    m = m_point(params, (xi1, xi2), cfg)
    return Decomposition(m - tp - tm, tp, tm, float(ep + em), tuple(sorted(set(lp + lm))))


def residual_sum(params: CurveParams, u: float, xi, cfg: QuadratureConfig = QuadratureConfig(),
                 j_min: int = -60, stop: float = 1e-12):
    """Independent evaluation of S as sum_j phi0_residual(delta_{2^j}(xi_1, u xi_2)).

    Scales below j_min are dropped (each term is O(2^j |xi|) there). Past the
    last scale whose stationary point meets the cutoff the terms decay faster
    than any power, and the sum stops after two consecutive terms below ``stop``.
    """
    xi1, xi2 = float(xi[0]), float(u * xi[1])
    b = params.b
    # beyond the last scale with a live stationary term the pieces are non-stationary
    lib = CutoffLibrary(b)
    live = sector_sum(params, PLUS, xi1, xi2, lib)[2] + sector_sum(params, MINUS, xi1, xi2, lib)[2]
    past = max(live) + 1 if live else j_min
    total, j, small = 0j, j_min, 0
    while True:
        lam = 2.0**j
        term = phi0_residual(params, (lam * xi1, lam**b * xi2), cfg)
        total += term
        if lam * math.hypot(xi1, xi2) > 1 and j >= past:
            small = small + 1 if abs(term) < stop else 0
            if small >= 2:
                return total
        j += 1
        if j > 200:
            raise QuadratureError("residual sum did not settle", abs(term))
