"""Panel Gauss-Legendre quadrature for oscillatory integrands.

Panels are laid out so that none spans more than one period of the phase,
with geometric grading where the amplitude varies on a logarithmic scale.
Each panel is integrated with two Gauss-Legendre rules; their difference
is the error estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-8
    rel_tol: float = 0.0
    max_subdivisions: int = 4_000_000
    tail_strategy: str = "integration_by_parts"
    nodes_high: int = 24
    nodes_low: int = 16

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_subdivisions < 8:
            raise ValueError("max_subdivisions must be at least 8")
        if self.tail_strategy not in ("integration_by_parts", "smooth_window", "steepest_descent"):
            raise ValueError(f"unknown tail strategy {self.tail_strategy!r}")

    def split_exponents(self, b: float) -> dict:
        """Exponents of the |eta|-dependent cut points used for domain splitting."""
        return {"A": -1.0 / (b + 1.0), "B": -1.0 / (b - 1.0)}


class QuadratureError(RuntimeError):
    def __init__(self, msg, estimate=None):
        super().__init__(msg)
        self.estimate = estimate


@lru_cache(maxsize=8)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def invert_phase_count(alpha, beta, b, y):
    """Solve alpha t + beta t^b = y for t >= 0 (alpha, beta >= 0, y >= 0)."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        t1 = y / alpha if alpha > 0 else np.full_like(y, np.inf)
        t2 = (y / beta) ** (1.0 / b) if beta > 0 else np.full_like(y, np.inf)
    t = np.minimum(t1, t2)
    if alpha > 0 and beta > 0:
        for _ in range(60):
            f = alpha * t + beta * t**b - y
            d = alpha + b * beta * t ** (b - 1.0)
            step = f / d
            t = t - step
            if np.all(np.abs(step) <= 1e-14 * np.maximum(t, 1e-300)):
                break
    return t


def phase_breakpoints(a, b_end, alpha, beta, b, per_panel=TWO_PI, origin=0.0):
    """Points in (a, b_end) where alpha (t-origin) + beta (t-origin)^b crosses multiples of per_panel."""
    lo = alpha * (a - origin) + beta * max(a - origin, 0.0) ** b
    hi = alpha * (b_end - origin) + beta * (b_end - origin) ** b
    k0 = int(np.floor(lo / per_panel)) + 1
    k1 = int(np.ceil(hi / per_panel)) - 1
    if k1 < k0:
        return np.empty(0)
    ys = per_panel * np.arange(k0, k1 + 1, dtype=float)
    return origin + invert_phase_count(alpha, beta, b, ys)


def geometric_breakpoints(lo, hi, ratio=np.sqrt(2.0)):
    if hi <= lo or lo <= 0:
        return np.empty(0)
    n = int(np.ceil(np.log(hi / lo) / np.log(ratio)))
    return hi / ratio ** np.arange(1, n + 1)


def integrate_panels(f, breaks, cfg: QuadratureConfig, chunk=50_000):
    """Integrate f over the union of panels [breaks[i], breaks[i+1]].

    Returns (value, error_estimate). ``f`` maps a float array to a complex array.
    """
    breaks = np.unique(np.asarray(breaks, dtype=float))
    npan = breaks.size - 1
    if npan < 1:
        return 0j, 0.0
    if npan > cfg.max_subdivisions:
        raise QuadratureError(
            f"{npan} panels required, exceeds max_subdivisions={cfg.max_subdivisions}")
    xh, wh = _gl(cfg.nodes_high)
    xl, wl = _gl(cfg.nodes_low)
    total_h = 0j
    err = 0.0
    for s in range(0, npan, chunk):
        a = breaks[s:s + chunk + 1]
        mid = 0.5 * (a[1:] + a[:-1])[:, None]
        half = 0.5 * (a[1:] - a[:-1])[:, None]
        vh = (f(mid + half * xh) * wh).sum(axis=1) * half[:, 0]
        vl = (f(mid + half * xl) * wl).sum(axis=1) * half[:, 0]
        total_h += vh.sum()
        err += np.abs(vh - vl).sum()
    return complex(total_h), float(err)
