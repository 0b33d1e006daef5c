"""Smooth cutoff functions built from the glue g(x) = exp(-1/x)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def glue(x):
    """exp(-1/x) for x > 0 and 0 otherwise (C-infinity at 0)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a = glue(x)
    return a / (a + glue(1.0 - x))


def plateau(x, a0, a1, b1, b0):
    """Equal to 1 on [a1, b1], 0 outside (a0, b0), smooth in between."""
    x = np.asarray(x, dtype=float)
    up = smoothstep((x - a0) / (a1 - a0))
    down = smoothstep((b0 - x) / (b0 - b1))
    return up * down


def _theta_log(x):
    # bump in the log-variable x = log2 t, supported in (-1, 1)
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1
    out = np.zeros_like(x)
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def chi_plus(t):
    """Dyadic partition function on (1/2, 2): sum_j chi_plus(2^j t) = 1 for t > 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = (t > 0.5) & (t < 2.0)
    if np.any(pos):
        x = np.log2(t[pos])
        num = _theta_log(x)
        den = num + _theta_log(x - 1.0) + _theta_log(x + 1.0)
        out[pos] = num / den
    return out


def chi_even(t):
    t = np.asarray(t, dtype=float)
    return chi_plus(np.abs(t))


def chi_minus(t):
    t = np.asarray(t, dtype=float)
    return chi_plus(-t)


@dataclass(frozen=True)
class CutoffLibrary:
    """The cutoff functions used throughout; ``b`` fixes the sector plateaus and chi_b."""

    b: float

    def chi_plus(self, t):
        return chi_plus(t)

    def chi(self, t):
        return chi_even(t)

    def chi_minus(self, t):
        return chi_minus(t)

    def eta0(self, xi1, xi2=None):
        """Radial plateau: 1 for |xi| <= 50, 0 for |xi| >= 100."""
        r = np.abs(np.asarray(xi1, dtype=float)) if xi2 is None else np.hypot(xi1, xi2)
        return 1.0 - smoothstep((r - 50.0) / 50.0)

    def varsigma_plus(self, r):
        b = self.b
        lo0, lo1 = b * 0.25 ** (b - 1), b * (2.0 / 7.0) ** (b - 1)
        hi1, hi0 = b * 3.5 ** (b - 1), b * 4.0 ** (b - 1)
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        pos = r > 0
        lr = np.log(r[pos])
        out[pos] = plateau(lr, np.log(lo0), np.log(lo1), np.log(hi1), np.log(hi0))
        return out

    def varsigma_minus(self, r):
        return self.varsigma_plus(-np.asarray(r, dtype=float))

    def chi_b(self, t):
        """Even cutoff on 2^{-b} < |t| < 2^b with sum_k chi_b(2^{-kb} t) = 1."""
        t = np.abs(np.asarray(t, dtype=float))
        return chi_plus(t ** (1.0 / self.b))

    def eta_annulus(self, xi):
        """Radial annulus bump; its dyadic dilates sum to 1 away from the origin."""
        return chi_even(xi)
