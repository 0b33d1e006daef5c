"""Steepest-descent evaluation of I(alpha, beta) = int_{t0}^inf exp(-i(alpha t + beta t^b)) dt / t.

Used when beta is small relative to alpha, where the integrand on the real line
has a far stationary point and very many oscillations. The real half-line is
deformed into the steepest-descent path leaving t0 plus, when the phase has a
stationary point t* > t0, the two descent arms through t*. The saddle part is
returned separately as exp(-i phi(t*)) * W with W free of oscillation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import _gl

P_MAX = 42.0  # exp(-42) ~ 6e-19
Q_MAX = float(np.sqrt(P_MAX))


class ContourError(RuntimeError):
    pass


@dataclass(frozen=True)
class SaddleTerm:
    t_star: float
    phase: float  # phi(t*)
    weight: complex  # W, so the contribution is exp(-i phase) * W


@dataclass(frozen=True)
class ContourResult:
    endpoint: complex
    saddles: tuple
    err: float

    def total(self) -> complex:
        return self.endpoint + sum(np.exp(-1j * s.phase) * s.weight for s in self.saddles)


def _panel_nodes(edges, n):
    x, w = _gl(n)
    a, b = edges[:-1, None], edges[1:, None]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return (mid + half * x).ravel(), (half * w).ravel()


def _trace(residual, deriv, guess_fn, nodes):
    """Continuation + Newton along increasing path parameters."""
    out = np.empty(nodes.size, dtype=complex)
    prev_s, prev_h = None, None
    for k, s in enumerate(nodes):
        h = guess_fn(s) if prev_h is None else prev_h
        if prev_h is not None:
            # Euler predictor along the path
            h = prev_h + (s - prev_s) * deriv(prev_h, prev_s)
        last = np.inf
        for _ in range(60):
            f, fp = residual(h, s)
            step = f / fp
            h = h - step
            if abs(step) <= 1e-14 * abs(h) or abs(step) >= last:
                break
            last = abs(step)
        f, fp = residual(h, s)
        if not abs(f / fp) <= 1e-9 * max(abs(h), 1e-300):
            raise ContourError("path tracing did not converge")
        out[k] = h
        prev_s, prev_h = s, h
    return out


def _endpoint_path(alpha, beta, b, t0, n):
    phi0 = alpha * t0 + beta * t0**b

    def phi(h):
        return alpha * h + beta * h**b

    def dphi(h):
        return alpha + b * beta * h ** (b - 1)

    def residual(h, p):
        return phi(h) - phi0 + 1j * p, dphi(h)

    def deriv(h, p):
        return -1j / dphi(h)

    edges = np.concatenate([np.linspace(0.0, 2.0, 9), np.linspace(2.0, P_MAX, 21)[1:]])
    p, w = _panel_nodes(edges, n)
    h = _trace(residual, deriv, lambda s: t0 - 1j * s / dphi(t0), p)
    if np.any(np.abs(np.angle(h)) > np.pi - 0.05) or np.any(np.abs(h) < 0.25 * t0):
        raise ContourError("endpoint path approaches the branch cut or the origin")
    vals = np.exp(-p) * (-1j / dphi(h)) / h
    return np.exp(-1j * phi0) * np.sum(vals * w)


def _saddle_arms(alpha, beta, b, n):
    """Weight W of the saddle on t > 0 for beta > 0 > alpha."""
    log_ts = (math.log(-alpha) - math.log(b * beta)) / (b - 1)
    if log_ts > 600.0:
        # weight ~ (|alpha| t*)^{-1/2} is below e^{-300}; t* itself overflows
        return SaddleTerm(float("inf"), 0.0, 0j)
    ts = math.exp(log_ts)
    scale = math.exp(math.log(beta) + b * log_ts)

    def E(u):
        # (1+u)^b - 1 - b u, stable for small u
        if abs(u) < 1e-2:
            tot, coef = 0j, b
            for k in range(2, 12):
                coef *= (b - k + 1) / k
                tot += coef * u**k
            return tot
        return np.expm1(b * np.log1p(u)) - b * u

    def Ep(u):
        return b * np.expm1((b - 1) * np.log1p(u))

    def residual(u, q):
        return E(u) + 1j * q * q / scale, Ep(u)

    def deriv(u, q):
        return -2j * q / (scale * Ep(u))

    curv = b * (b - 1) * scale  # phi'' t*^2
    # alpha t* + beta t*^b with beta t*^{b-1} = -alpha / b
    phase = alpha * ts * (b - 1) / b
    if scale > 1e12:
        # relative corrections are O(1/scale), below double precision
        lead = np.sqrt(2.0 * np.pi / curv) * np.exp(-0.25j * np.pi)
        return SaddleTerm(float(ts), float(phase), complex(lead))
    edges = np.linspace(0.0, Q_MAX, 25)
    q, w = _panel_nodes(edges, n)
    arms = []
    for sgn in (1.0, -1.0):
        base = sgn * np.sqrt(2.0 / curv) * np.exp(-0.25j * np.pi)
        u = _trace(residual, deriv, lambda s: base * s, q)
        h = ts * (1.0 + u)
        if np.any(np.abs(np.angle(h)) > np.pi - 0.05) or np.any(np.abs(h) < 1e-3 * ts):
            raise ContourError("saddle arm approaches the branch cut or the origin")
        dh = ts * (-2j * q) / (scale * np.array([Ep(x) for x in u]))
        arms.append(np.sum(np.exp(-q * q) * dh / h * w))
    return SaddleTerm(float(ts), float(phase), complex(arms[0] - arms[1]))


def _ray_path(alpha, beta, b, t0, n):
    """Straight ray t0 + s exp(-i pi/(2b)) for alpha >= 0 < beta; both terms decay along it."""
    direction = np.exp(-0.5j * np.pi / b)

    def phi(t):
        return alpha * t + beta * t**b

    def dphi(t):
        return alpha + b * beta * t ** (b - 1)

    phi0 = phi(t0)
    edges = [0.0]
    s_pos = 0.0
    while (phi(t0 + s_pos * direction) - phi0).imag > -P_MAX:
        t = t0 + s_pos * direction
        # at most ~2 radians of phase change per panel, never longer than t0-scale growth
        step = min(2.0 / abs(dphi(t)), 0.5 * abs(t))
        s_pos += step
        edges.append(s_pos)
        if len(edges) > 100_000:
            raise ContourError("ray integration did not reach the decay threshold")
    s_nodes, w = _panel_nodes(np.asarray(edges), n)
    t = t0 + s_nodes * direction
    vals = np.exp(-1j * (phi(t) - phi0)) / t * direction
    return np.exp(-1j * phi0) * np.sum(vals * w)


def _integral_pos_beta(alpha, beta, b, t0, n):
    saddles = []
    if alpha >= 0:
        return _ray_path(alpha, beta, b, t0, n), saddles
    end = _endpoint_path(alpha, beta, b, t0, n)
    log_ts = (math.log(-alpha) - math.log(b * beta)) / (b - 1)
    ts = math.exp(min(log_ts, 700.0))
    if 0.5 * t0 < ts <= 2.0 * t0:
        raise ContourError("stationary point too close to the start of the contour")
    if ts > t0:
        saddles.append(_saddle_arms(alpha, beta, b, n))
    return end, saddles


def half_line_integral(alpha: float, beta: float, b: float, t0: float = 1.0,
                       n_high: int = 24, n_low: int = 16) -> ContourResult:
    """int_{t0}^inf exp(-i(alpha t + beta t^b)) dt / t for beta != 0."""
    if beta == 0:
        raise ContourError("beta = 0 has no decaying deformation; use the axis formula")
    conj = beta < 0
    a, be = (-alpha, -beta) if conj else (alpha, beta)
    eh, sh = _integral_pos_beta(a, be, b, t0, n_high)
    el, sl = _integral_pos_beta(a, be, b, t0, n_low)
    err = abs(eh - el) + sum(abs(x.weight - y.weight) for x, y in zip(sh, sl))
    if conj:
        eh = eh.conjugate()
        sh = [SaddleTerm(s.t_star, -s.phase, s.weight.conjugate()) for s in sh]
    return ContourResult(complex(eh), tuple(sh), float(err))
