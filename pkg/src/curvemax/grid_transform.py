"""Periodic grid realisation of the curve Hilbert transforms and their companions.

Everything here acts on samples of a function on a torus [0, L1) x [0, L2).
Frequencies are xi_k = 2 pi k / L with k in the symmetric FFT range. At a
Nyquist index the frequency +pi n / L and -pi n / L are the same bin, so a
multiplier is averaged over both lifts there; that keeps the sampled
multiplier Hermitian whenever the continuous one is.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .curve_model import ParamSet
from .cutoffs import CutoffLibrary, chi_even


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass
class GridFunction2D:
    n1: int
    n2: int
    L1: float
    L2: float
    samples: np.ndarray

    def __post_init__(self):
        if not (_is_pow2(self.n1) and _is_pow2(self.n2)):
            raise ValueError(f"grid dimensions must be powers of two, got {self.n1}x{self.n2}")
        if not (self.L1 > 0 and self.L2 > 0):
            raise ValueError("box side lengths must be positive")
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.n1, self.n2):
            raise ValueError(f"samples have shape {s.shape}, expected {(self.n1, self.n2)}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        self.samples = s

    @classmethod
    def from_function(cls, fn, n1, n2, L1=1.0, L2=1.0):
        x1, x2 = grid_coordinates(n1, n2, L1, L2)
        return cls(n1, n2, L1, L2, np.asarray(fn(x1, x2), dtype=complex))

    def like(self, samples) -> "GridFunction2D":
        return GridFunction2D(self.n1, self.n2, self.L1, self.L2, samples)

    @property
    def cell_area(self) -> float:
        return self.L1 * self.L2 / (self.n1 * self.n2)

    def norm(self) -> float:
        """L2 norm with the cell-area weight."""
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.cell_area))

    def frequencies(self):
        """Angular frequencies per axis, as 1-D arrays in FFT order."""
        return (2 * np.pi * np.fft.fftfreq(self.n1, d=self.L1 / self.n1),
                2 * np.pi * np.fft.fftfreq(self.n2, d=self.L2 / self.n2))


def grid_coordinates(n1, n2, L1=1.0, L2=1.0):
    x1 = np.arange(n1) * (L1 / n1)
    x2 = np.arange(n2) * (L2 / n2)
    return np.meshgrid(x1, x2, indexing="ij")


def _lifts(n, L):
    """Frequency lifts per FFT index: two columns, different only at the Nyquist index."""
    k = np.fft.fftfreq(n, d=1.0 / n)
    lo = 2 * np.pi * k / L
    hi = lo.copy()
    if n % 2 == 0 and n > 1:
        hi[n // 2] = -lo[n // 2]
    return lo, hi


def sample_multiplier(mult: Callable, n1, n2, L1, L2) -> np.ndarray:
    """The multiplier on the FFT grid, averaged over Nyquist lifts."""
    a_lo, a_hi = _lifts(n1, L1)
    b_lo, b_hi = _lifts(n2, L2)
    X1, X2 = np.meshgrid(a_lo, b_lo, indexing="ij")
    out = np.asarray(mult(X1, X2), dtype=complex)
    out = np.broadcast_to(out, X1.shape).copy()
    nyq1 = a_lo != a_hi
    nyq2 = b_lo != b_hi
    if np.any(nyq1):
        i = np.flatnonzero(nyq1)[0]
        alt = np.asarray(mult(np.full(n2, a_hi[i]), b_lo), dtype=complex)
        out[i, :] = 0.5 * (out[i, :] + alt)
    if np.any(nyq2):
        j = np.flatnonzero(nyq2)[0]
        alt = np.asarray(mult(a_lo, np.full(n1, b_hi[j])), dtype=complex)
        out[:, j] = 0.5 * (out[:, j] + alt)
        if np.any(nyq1):
            # corner: average over all four lifts
            i = np.flatnonzero(nyq1)[0]
            four = [complex(np.asarray(mult(np.array([x]), np.array([y])))[0])
                    for x in (a_lo[i], a_hi[i]) for y in (b_lo[j], b_hi[j])]
            out[i, j] = sum(four) / 4.0
    if not np.all(np.isfinite(out)):
        raise ValueError("multiplier produced non-finite values")
    return out


def spectral_map(f: GridFunction2D, mult: Callable) -> GridFunction2D:
    """FFT, multiply by mult(xi1, xi2) (vectorised over arrays), inverse FFT."""
    m = sample_multiplier(mult, f.n1, f.n2, f.L1, f.L2)
    return f.like(np.fft.ifft2(np.fft.fft2(f.samples) * m))


def hilbert_along_curve(f: GridFunction2D, ev, u: float) -> GridFunction2D:
    if not u > 0:
        raise ValueError(f"u must be positive, got {u}")
    # the evaluator returns the axis values on the axes and 0 at the origin
    return spectral_map(f, lambda x1, x2: ev(x1, u * x2))


def hilbert_family(f: GridFunction2D, ev, U):
    """H^(u) f for every u in U, sharing one forward FFT."""
    fh = np.fft.fft2(f.samples)
    out = []
    for u in U:
        if not u > 0:
            raise ValueError(f"u must be positive, got {u}")
        m = sample_multiplier(lambda x1, x2: ev(x1, u * x2), f.n1, f.n2, f.L1, f.L2)
        out.append(f.like(np.fft.ifft2(fh * m)))
    return out


def maximal_over_params(f: GridFunction2D, ev, U) -> np.ndarray:
    values = U.values if isinstance(U, ParamSet) else tuple(U)
    if not values:
        raise ValueError("parameter set is empty")
    out = np.zeros((f.n1, f.n2))
    for h in hilbert_family(f, ev, values):
        np.maximum(out, np.abs(h.samples), out=out)
    return out


def littlewood_paley_project(f: GridFunction2D, axis: int, k: int,
                             lib: CutoffLibrary) -> GridFunction2D:
    if axis == 1:
        return spectral_map(f, lambda x1, x2: lib.chi(2.0 ** (-k) * x1) + 0 * x2)
    if axis == 2:
        return spectral_map(f, lambda x1, x2: lib.chi_b(2.0 ** (-k * lib.b) * x2) + 0 * x1)
    raise ValueError(f"axis must be 1 or 2, got {axis}")


def lp_index_range(f: GridFunction2D, axis: int, lib: CutoffLibrary):
    """Smallest range of k whose projections cover every nonzero frequency on the axis."""
    n, L = (f.n1, f.L1) if axis == 1 else (f.n2, f.L2)
    lo = 2 * np.pi / L
    hi = np.pi * n / L
    if axis == 1:
        return int(np.floor(np.log2(lo))) - 1, int(np.ceil(np.log2(hi))) + 1
    b = lib.b
    return int(np.floor(np.log2(lo) / b)) - 1, int(np.ceil(np.log2(hi) / b)) + 1


def _dyadic_radii(n):
    r, h = [0], 1
    while 2 * h + 1 <= n:
        r.append(h)
        h *= 2
    return r


def _centred_max_1d(a: np.ndarray, axis: int) -> np.ndarray:
    """max over h in {0,1,2,4,...} of the periodic average over [i-h, i+h]."""
    a = np.moveaxis(a, axis, 0)
    n = a.shape[0]
    out = a.copy()
    radii = _dyadic_radii(n)
    if len(radii) > 1:
        hmax = radii[-1]
        ext = np.concatenate([a[n - hmax:], a, a[:hmax]], axis=0)
        cs = np.concatenate([np.zeros((1,) + a.shape[1:]), np.cumsum(ext, axis=0)], axis=0)
        idx = np.arange(n) + hmax
        for h in radii[1:]:
            avg = (cs[idx + h + 1] - cs[idx - h]) / (2 * h + 1)
            np.maximum(out, avg, out=out)
    # the whole period closes the ladder, so Mf > 0 wherever f is not identically 0
    np.maximum(out, a.mean(axis=0), out=out)
    return np.moveaxis(out, 0, axis)


def _square_max(a: np.ndarray) -> np.ndarray:
    n1, n2 = a.shape
    out = a.copy()
    radii = _dyadic_radii(min(n1, n2))
    if len(radii) == 1:
        return np.maximum(out, a.mean())
    hmax = radii[-1]
    ext = np.pad(a, hmax, mode="wrap")
    cs = np.zeros((ext.shape[0] + 1, ext.shape[1] + 1))
    cs[1:, 1:] = ext.cumsum(0).cumsum(1)
    i = np.arange(n1)[:, None] + hmax
    j = np.arange(n2)[None, :] + hmax
    for h in radii[1:]:
        tot = cs[i + h + 1, j + h + 1] - cs[i - h, j + h + 1] - cs[i + h + 1, j - h] + cs[i - h, j - h]
        np.maximum(out, tot / (2 * h + 1) ** 2, out=out)
    np.maximum(out, a.mean(), out=out)
    return out


def hardy_littlewood_max(f, mode: str = "full") -> np.ndarray:
    """Centred dyadic-window maximal averages of |f| with periodic wraparound.

    The ladder is h = 0, 1, 2, 4, ... (windows of 2h + 1 cells) topped by the full period.
    """
    a = np.abs(f.samples if isinstance(f, GridFunction2D) else np.asarray(f))
    if mode == "axis1":
        return _centred_max_1d(a, 0)
    if mode == "axis2":
        return _centred_max_1d(a, 1)
    if mode == "strong":
        return _centred_max_1d(_centred_max_1d(a, 1), 0)
    if mode == "full":
        return _square_max(a)
    raise ValueError(f"unknown maximal mode {mode!r}")


# ---- one-dimensional truncations and the Cotlar inequality ----------------

@dataclass
class GridFunction1D:
    n: int
    L: float
    samples: np.ndarray

    def __post_init__(self):
        if not _is_pow2(self.n):
            raise ValueError(f"grid size must be a power of two, got {self.n}")
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.n,) or not np.all(np.isfinite(s)):
            raise ValueError("samples must be a finite array of length n")
        self.samples = s

    def like(self, samples) -> "GridFunction1D":
        return GridFunction1D(self.n, self.L, samples)

    def frequencies(self):
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.L / self.n)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.L / self.n))


@dataclass(frozen=True)
class MikhlinMultiplier1D:
    evaluator: Callable
    B_estimate: float
    name: str = "custom"

    def __post_init__(self):
        if not self.B_estimate > 0:
            raise ValueError("B_estimate must be positive")

    @classmethod
    def hilbert(cls):
        return cls(lambda x: -1j * np.sign(x), 1.0, "hilbert")

    @classmethod
    def imaginary_power(cls, a: float = 1.0):
        """|xi|^{i a}; unimodular with bounded Mikhlin norm."""
        return cls(lambda x: np.exp(1j * a * np.log(np.where(x == 0, 1.0, np.abs(x)))), 1.0,
                   f"abs_power_i{a:g}")

    def check_bound(self, xi) -> bool:
        xi = np.asarray(xi, dtype=float)
        xi = xi[xi != 0]
        return bool(np.all(np.abs(self.evaluator(xi)) <= self.B_estimate * (1 + 1e-12)))


def _sampled_1d(mm: MikhlinMultiplier1D, xi):
    m = np.asarray(mm.evaluator(xi), dtype=complex)
    m = np.where(xi == 0, 0.0, m)
    n = xi.size
    if n % 2 == 0:
        # Nyquist: average the two lifts
        m[n // 2] = 0.5 * (m[n // 2] + complex(np.asarray(mm.evaluator(np.array([-xi[n // 2]])))[0]))
    return m


def dyadic_frequency_range(f: GridFunction1D):
    """(n_min, n_max): truncation indices below n_min are 0, above n_max are exhausted."""
    xi = np.abs(f.frequencies())
    lo, hi = xi[xi > 0].min(), xi.max()
    return int(np.floor(np.log2(lo))) - 1, int(np.ceil(np.log2(hi))) + 1


def _lowpass_weights(xi, n, n_min):
    w = np.zeros(xi.shape)
    for j in range(n_min, n + 1):
        w += chi_even(2.0 ** (-j) * xi)
    return w


def truncated_singular(f1d: GridFunction1D, mm: MikhlinMultiplier1D, n: int,
                       lib: CutoffLibrary = None) -> GridFunction1D:
    """Multiplier sum_{j <= n} eta(2^{-j} xi) m(xi), clamped to the grid's dyadic range."""
    xi = f1d.frequencies()
    n_min, n_max = dyadic_frequency_range(f1d)
    n = min(max(n, n_min - 1), n_max)
    w = _lowpass_weights(xi, n, n_min)
    return f1d.like(np.fft.ifft(np.fft.fft(f1d.samples) * w * _sampled_1d(mm, xi)))


def full_singular(f1d: GridFunction1D, mm: MikhlinMultiplier1D) -> GridFunction1D:
    xi = f1d.frequencies()
    return f1d.like(np.fft.ifft(np.fft.fft(f1d.samples) * _sampled_1d(mm, xi)))


@dataclass
class CotlarReport:
    fitted_constant: float
    fraction_holding: float
    candidate: float
    r: float
    delta: float
    S_star: np.ndarray
    M_Sf_r: np.ndarray
    Mf: np.ndarray

    def to_dict(self) -> dict:
        return {"fitted_constant": self.fitted_constant, "fraction_holding": self.fraction_holding,
                "candidate": self.candidate, "r": self.r, "delta": self.delta}


def cotlar_check(f1d: GridFunction1D, mm: MikhlinMultiplier1D, r: float = 0.5,
                 delta: float = 0.25, lib: CutoffLibrary = None,
                 candidate: float = 1.0) -> CotlarReport:
    if not 0 < r <= 1:
        raise ValueError("r must lie in (0, 1]")
    if not 0 < delta <= 0.5:
        raise ValueError("delta must lie in (0, 1/2]")
    xi = f1d.frequencies()
    n_min, n_max = dyadic_frequency_range(f1d)
    fh = np.fft.fft(f1d.samples)
    m = _sampled_1d(mm, xi)
    # S_n for every n via cumulative annulus weights
    S_star = np.zeros(f1d.n)
    w = np.zeros(xi.shape)
    for j in range(n_min, n_max + 1):
        w = w + chi_even(2.0 ** (-j) * xi)
        np.maximum(S_star, np.abs(np.fft.ifft(fh * w * m)), out=S_star)
    Sf = np.fft.ifft(fh * m)
    M_Sf_r = _centred_max_1d(np.abs(Sf) ** r, 0) ** (1.0 / r)
    Mf = _centred_max_1d(np.abs(f1d.samples), 0)
    excess = np.maximum(S_star - (1.0 - delta) ** (-1.0 / r) * M_Sf_r, 0.0)
    scale = mm.B_estimate * Mf / delta
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(scale > 0, excess / np.where(scale > 0, scale, 1.0), 0.0)
    fitted = float(ratio.max()) if ratio.size else 0.0
    holds = S_star <= (1.0 - delta) ** (-1.0 / r) * M_Sf_r + candidate * scale + 1e-12
    return CotlarReport(fitted, float(np.mean(holds)), candidate, r, delta, S_star, M_Sf_r, Mf)


def random_test_function_1d(n: int, rng: np.random.Generator, L: float = 1.0) -> GridFunction1D:
    """Random real signal: a few smoothed steps plus band-limited noise."""
    x = np.arange(n) / n
    f = np.zeros(n)
    for _ in range(rng.integers(1, 5)):
        a, w = rng.uniform(0, 1), rng.uniform(0.02, 0.3)
        f += rng.normal() * (((x - a) % 1.0) < w)
    k = np.fft.fftfreq(n, d=1.0 / n)
    band = rng.integers(4, n // 4)
    noise = np.fft.ifft(np.where(np.abs(k) <= band, rng.normal(size=n) + 1j * rng.normal(size=n), 0)).real
    noise *= np.sqrt(n) * 0.3 / max(1.0, np.sqrt(band))
    return GridFunction1D(n, L, f + noise)


# ---- snapshots --------------------------------------------------------------

def write_snapshot(path, f: GridFunction2D) -> None:
    header = {"n1": f.n1, "n2": f.n2, "L1": f.L1, "L2": f.L2, "kind": "complex128"}
    data = np.ascontiguousarray(f.samples, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("utf-8"))
        fh.write(data.tobytes(order="C"))


def read_snapshot(path) -> GridFunction2D:
    raw = Path(path).read_bytes()
    nl = raw.index(b"\n")
    header = json.loads(raw[:nl].decode("utf-8"))
    if header.get("kind") != "complex128":
        raise ValueError(f"unsupported snapshot kind {header.get('kind')!r}")
    n1, n2 = int(header["n1"]), int(header["n2"])
    body = raw[nl + 1:]
    if len(body) != 16 * n1 * n2:
        raise ValueError("snapshot body size does not match the header")
    samples = np.frombuffer(body, dtype="<c16").reshape(n1, n2).astype(complex)
    return GridFunction2D(n1, n2, float(header["L1"]), float(header["L2"]), samples)
