"""Binary-tree lower-bound construction for the maximal curve Hilbert transform.

The unit square is a periodic n x n grid. Each word w carries a frequency
xi_w = 2 pi k_w with k_w a (typically enormous) integer vector inside the
sector S_tau(w); on the grid only the residue a_w = k_w mod n is visible, so
f_w is stored as a band-limited envelope modulated by exp(2 pi i a_w . x),
while the curve multiplier is always evaluated at the lifted frequencies
2 pi (k_w + delta). Grid samples of every trigonometric polynomial involved are
therefore exact samples of the corresponding function on the torus.

Envelope radii grow with the depth of the word (a child's envelope has to
resolve the stripes cut by its ancestors) and the residues are placed greedily,
closest to the origin first, with pairwise disjoint spectral balls.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import fft as sfft

from .curve_model import CurveParams, SeparatedSelection
from .grid_transform import GridFunction2D

TWO_PI = 2.0 * math.pi


# ---- words and the tau ordering ----------------------------------------------

Word = tuple  # tuple of bits, () is the empty word


def words(mu: int) -> list:
    """All words of length < mu in breadth-first order."""
    if mu < 1:
        raise ValueError("mu must be at least 1")
    out, layer = [()], [()]
    for _ in range(mu - 1):
        layer = [w + (b,) for w in layer for b in (0, 1)]
        out.extend(layer)
    return out


def tau_index(w: Word, mu: int) -> int:
    w = tuple(w)
    ell = len(w)
    if ell >= mu:
        raise ValueError(f"word length {ell} must be below mu = {mu}")
    if any(b not in (0, 1) for b in w):
        raise ValueError("words are over {0, 1}")
    return sum(b << (mu - i - 1) for i, b in enumerate(w)) + (1 << (mu - ell - 1))


def word_str(w: Word) -> str:
    return "".join(map(str, w)) or "()"


# ---- sectors -----------------------------------------------------------------

@dataclass(frozen=True)
class SectorFamily:
    params: CurveParams
    K: float
    u_list: tuple

    def __post_init__(self):
        if not self.K > 1:
            raise ValueError("K must exceed 1")

    @property
    def M(self) -> int:
        return len(self.u_list)

    def log_bounds(self, j: int):
        """log of (lower, upper) bounds for xi_2 / xi_1^b in S_j (1-based j)."""
        u = self.u_list[j - 1]
        hi = -math.log(self.K) - math.log(u)
        return hi - math.log(2.0), hi

    def contains_lifted_ball(self, j: int, k, R: float, margin: float = 1e-9) -> bool:
        """B(2 pi k, 2 pi R) inside S_j, checked on the enclosing box in log space."""
        k1, k2 = int(k[0]), int(k[1])
        if not (k1 - R > 0 and k2 - R > 0):
            return False
        b = self.params.b
        lo, hi = self.log_bounds(j)
        # xi_2 / xi_1^b = (2 pi)^{1-b} k_2 / k_1^b
        shift = (1.0 - b) * math.log(TWO_PI)
        lk1 = math.log(k1)
        lk2 = math.log(k2)
        r1lo, r1hi = math.log1p(-R / k1), math.log1p(R / k1)
        r2lo, r2hi = math.log1p(-R / k2), math.log1p(R / k2)
        smallest = shift + lk2 + r2lo - b * (lk1 + r1hi)
        largest = shift + lk2 + r2hi - b * (lk1 + r1lo)
        return smallest > lo + margin and largest < hi - margin


def _int_exp(x: float) -> int:
    """An integer close to e^x, valid beyond the float range."""
    shift = max(0, int((x - 600.0) / math.log(2.0)) + 1)
    return int(math.exp(x - shift * math.log(2.0))) << shift


def _adjust_residue(x: int, a: int, n: int) -> int:
    """The integer >= x congruent to a mod n."""
    return x + ((a - x) % n)


def lift_frequency(sectors: SectorFamily, j: int, a, R: float, n: int):
    """Integer frequency k = a (mod n) on the central curve of S_j with the R-ball inside S_j."""
    b = sectors.params.b
    lo, hi = sectors.log_bounds(j)
    centre = hi + math.log(0.75)  # log of 3/(4 K u_j)
    shift = (1.0 - b) * math.log(TWO_PI)
    # the sector's width in k_2 at k_1 is about exp(hi - shift) k_1^b / 2
    need = math.log(64.0 * (R + n)) - (hi - shift) + math.log(2.0)
    log_k1 = max(math.log(64.0 * b * (R + n)), need / b)
    for _ in range(64):
        k1 = _adjust_residue(_int_exp(log_k1) + 1, int(a[0]), n)
        log_k2 = centre - shift + b * math.log(k1)
        k2 = _adjust_residue(_int_exp(log_k2), int(a[1]), n)
        if sectors.contains_lifted_ball(j, (k1, k2), R):
            return k1, k2
        log_k1 += math.log(2.0)
    raise ValueError(f"could not place a ball of radius {R} inside sector {j}")


# ---- mollifiers -------------------------------------------------------------

def _index_grid(n):
    k = np.fft.fftfreq(n, d=1.0 / n)
    return np.meshgrid(k, k, indexing="ij")


@dataclass
class Mollifier:
    """phi_rho = c |psi|^2 with psi^ a bump of index radius R/2; phi^ lives in |k| <= R.

    rho = 2 pi R is the radius in angular frequency.
    """

    R: float
    n: int
    samples: np.ndarray = field(repr=False)
    fhat: np.ndarray = field(repr=False)  # discrete transform, normalised so fhat[0,0] = 1

    @property
    def rho(self) -> float:
        return TWO_PI * self.R

    @classmethod
    def build(cls, R: float, n: int) -> "Mollifier":
        if not 0 < R < n / 2:
            raise ValueError(f"mollifier radius must lie in (0, n/2), got {R}")
        k1, k2 = _index_grid(n)
        s = np.hypot(k1, k2) / (0.5 * R)
        psi_hat = np.zeros_like(s)
        inside = s < 1
        psi_hat[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
        psi = np.fft.ifft2(psi_hat)
        phi = np.abs(psi) ** 2
        cell = 1.0 / (n * n)
        phi /= phi.sum() * cell
        fhat = np.fft.fft2(phi).real * cell
        fhat[np.hypot(k1, k2) > R] = 0.0
        return cls(float(R), n, phi, fhat)

    def convolve(self, mask: np.ndarray) -> np.ndarray:
        half = self.fhat[:, : self.n // 2 + 1]
        return sfft.irfft2(sfft.rfft2(mask.astype(float)) * half, s=mask.shape)


# ---- frequency selection -------------------------------------------------------

class FrequencySelectionError(ValueError):
    def __init__(self, msg, eps_achieved=None, cos_mass=None):
        super().__init__(msg)
        self.eps_achieved = eps_achieved
        self.cos_mass = cos_mass


@dataclass(frozen=True)
class FrequencyChoice:
    residue: tuple
    k: tuple          # lifted integer frequency (python ints)
    R: float
    eps_achieved: float
    cos_mass: float

    @property
    def rho(self) -> float:
        return TWO_PI * self.R

    @property
    def xi(self) -> tuple:
        return (TWO_PI * self.k[0], TWO_PI * self.k[1])


def _cos_grid(a, n):
    x = np.arange(n) / n
    return np.cos(TWO_PI * (a[0] * x[:, None] + a[1] * x[None, :]))


def _disk(n, R):
    k1, k2 = _index_grid(n)
    return np.hypot(k1, k2) <= R


@lru_cache(maxsize=16)
def _disk_rfft(n, R):
    return sfft.rfft2(_disk(n, R).astype(float))


def _forbidden_centres(occupied: np.ndarray, R: float) -> np.ndarray:
    """Residues whose R-ball meets an occupied residue (periodic)."""
    n = occupied.shape[0]
    if not occupied.any():
        return np.zeros_like(occupied)
    conv = sfft.irfft2(sfft.rfft2(occupied.astype(float)) * _disk_rfft(n, R), s=occupied.shape)
    return conv > 0.5


def select_frequency(E: np.ndarray, sectors: SectorFamily, j: int, eps: float, R: float,
                     occupied: Optional[np.ndarray] = None, mollifier: Optional[Mollifier] = None,
                     strict: bool = True, max_candidates: int = 4096) -> FrequencyChoice:
    """Smallest grid residue whose R-ball is free and that meets the cos-mass criterion.

    The mollifier criterion depends only on E and R; with ``strict`` a value above
    eps is an error, otherwise it is reported in the returned choice.
    """
    E = np.asarray(E, dtype=bool)
    n = E.shape[0]
    if not E.any():
        raise FrequencySelectionError("empty set E")
    cell = 1.0 / (n * n)
    measure = E.sum() * cell
    mol = mollifier if mollifier is not None else Mollifier.build(R, n)
    eps_achieved = float(np.sqrt(np.sum((mol.convolve(E) - E) ** 2) * cell))
    if strict and eps_achieved > eps:
        raise FrequencySelectionError(
            f"mollifier error {eps_achieved:.3g} exceeds eps = {eps:.3g} at radius {R}",
            eps_achieved, None)
    occupied = np.zeros((n, n), dtype=bool) if occupied is None else occupied
    bad = _forbidden_centres(occupied, R)
    k1, k2 = _index_grid(n)
    # the ball must not wrap onto itself
    ok = (~bad) & (np.hypot(k1, k2) + R < n / 2) & ((k1 != 0) | (k2 != 0))
    cand = np.flatnonzero(ok)
    if cand.size == 0:
        raise FrequencySelectionError(f"no free residue for radius {R}", eps_achieved, None)
    radius = np.hypot(k1.flat[cand], k2.flat[cand])
    if cand.size > max_candidates:
        keep = np.argpartition(radius, max_candidates - 1)[:max_candidates]
        cand, radius = cand[keep], radius[keep]
    order = np.lexsort((np.arctan2(k2.flat[cand], k1.flat[cand]), radius))
    best = 0.0
    for idx in cand[order]:
        a = (int(k1.flat[idx]), int(k2.flat[idx]))
        mass = float(np.abs(_cos_grid(a, n))[E].sum() * cell)
        best = max(best, mass)
        if mass >= measure / 3.0:
            k = lift_frequency(sectors, j, a, R, n)
            return FrequencyChoice(a, k, float(R), eps_achieved, mass)
    raise FrequencySelectionError("no residue met the cos-mass criterion", eps_achieved, best)


# ---- the family ----------------------------------------------------------------

@dataclass
class WordRecord:
    word: tuple
    tau: int
    E: np.ndarray = field(repr=False)
    choice: FrequencyChoice = None

    @property
    def xi(self):
        return self.choice.xi

    @property
    def rho(self):
        return self.choice.rho


@dataclass
class KaragulyanFamily:
    params: CurveParams
    sectors: SectorFamily
    mu: int
    n: int
    records: dict
    radii: tuple
    eps_target: float
    epsilon_used: float

    @property
    def M(self) -> int:
        return 2**self.mu - 1

    def metadata(self) -> dict:
        return {
            "mu": self.mu, "n": self.n, "K": self.sectors.K, "b": self.params.b,
            "c_plus": self.params.c_plus, "c_minus": self.params.c_minus,
            "u_list": list(self.sectors.u_list), "radii": list(self.radii),
            "eps_target": self.eps_target, "epsilon_used": self.epsilon_used,
            "words": [{
                "word": word_str(w), "tau": r.tau, "residue": list(r.choice.residue),
                "k": [str(r.choice.k[0]), str(r.choice.k[1])], "R": r.choice.R,
                "rho": r.choice.rho, "eps_achieved": r.choice.eps_achieved,
                "cos_mass": r.choice.cos_mass, "measure": float(r.E.mean()),
            } for w, r in self.records.items()],
        }


def depth_radii(mu: int, R_top: float, growth: float = 4.0) -> tuple:
    """Envelope radius per word depth; the root's envelope is exactly 1, so radius 1 suffices."""
    return tuple([1.0] + [max(2.0, R_top / growth ** (mu - 1 - ell)) for ell in range(1, mu)])


def radius_ladder(n: int, mu: int):
    """Candidate top radii, largest first."""
    r = n / 4.0
    out = []
    while r >= 4:
        out.append(float(math.floor(r)))
        r /= math.sqrt(2.0)
    return out


def build_family(params: CurveParams, selection: SeparatedSelection, mu: int, n: int,
                 eps: Optional[float] = None, radii: Optional[tuple] = None) -> KaragulyanFamily:
    if selection.M != 2**mu - 1 or selection.mu != mu:
        raise ValueError(f"selection has M = {selection.M}, need 2^mu - 1 = {2**mu - 1}")
    if n & (n - 1) or n < 8:
        raise ValueError("grid size must be a power of two >= 8")
    eps = 2.0 ** (-mu - 10) if eps is None else float(eps)
    if not eps > 0:
        raise ValueError("eps must be positive")
    sectors = SectorFamily(params, selection.K, tuple(selection.u_list))
    ladders = [radii] if radii is not None else [depth_radii(mu, r) for r in radius_ladder(n, mu)]
    last_err = None
    for rad in ladders:
        try:
            return _build_with_radii(params, sectors, mu, n, eps, rad)
        except FrequencySelectionError as exc:
            last_err = exc
    raise FrequencySelectionError(f"no radius ladder fits on a {n}^2 grid: {last_err}")


def _build_with_radii(params, sectors, mu, n, eps, radii):
    occupied = np.zeros((n, n), dtype=bool)
    mollifiers = {}
    records = {}
    E_of = {(): np.ones((n, n), dtype=bool)}
    for w in words(mu):
        E = E_of[w]
        R = radii[len(w)]
        if R not in mollifiers:
            mollifiers[R] = Mollifier.build(R, n)
        tau = tau_index(w, mu)
        try:
            ch = select_frequency(E, sectors, tau, eps, R, occupied, mollifiers[R], strict=False)
        except FrequencySelectionError as exc:
            raise FrequencySelectionError(f"word {word_str(w)}: {exc}", exc.eps_achieved,
                                          exc.cos_mass) from exc
        occupied |= np.roll(np.roll(_disk(n, R), ch.residue[0], 0), ch.residue[1], 1)
        records[w] = WordRecord(w, tau, E, ch)
        if len(w) < mu - 1:
            c = _cos_grid(ch.residue, n)
            # cos = 0 goes to the 0-child
            E_of[w + (0,)] = E & (c >= 0)
            E_of[w + (1,)] = E & (c < 0)
    eps_used = max(eps, max(r.choice.eps_achieved for r in records.values()))
    return KaragulyanFamily(params, sectors, mu, n, records, tuple(radii), eps, eps_used)


# ---- assembly -------------------------------------------------------------------

@dataclass
class Piece:
    """Sparse spectrum of f_w: flat FFT indices and numpy-convention coefficients."""

    word: tuple
    tau: int
    index: np.ndarray
    coef: np.ndarray
    offsets: np.ndarray  # (count, 2) integer offsets from the residue

    def dense_spectrum(self, n) -> np.ndarray:
        out = np.zeros(n * n, dtype=complex)
        out[self.index] = self.coef
        return out.reshape(n, n)

    def samples(self, n) -> np.ndarray:
        return np.fft.ifft2(self.dense_spectrum(n))

    def norm_sq(self, n) -> float:
        # Parseval with cell area 1/n^2: sum |f|^2 / n^2 = sum |F|^2 / n^4
        return float(np.sum(np.abs(self.coef) ** 2)) / n**4


class TreeSystem:
    """F_w = Re(f_w) 1_{E_w}, materialised on demand."""

    def __init__(self, family: KaragulyanFamily, pieces: dict):
        self.family = family
        self.pieces = pieces

    def __len__(self):
        return len(self.pieces)

    def __iter__(self):
        for w in self.pieces:
            yield self[w]

    def __getitem__(self, w) -> np.ndarray:
        n = self.family.n
        return self.pieces[w].samples(n).real * self.family.records[w].E


def assemble(family: KaragulyanFamily):
    """f = sum_w mu^{-1/2} exp(i xi_w . x) (1_{E_w} * phi_{rho_w}); returns (f, pieces, tree)."""
    n, mu = family.n, family.mu
    k1, k2 = _index_grid(n)
    pieces = {}
    total = np.zeros((n, n), dtype=complex)
    mols = {}
    for w, rec in family.records.items():
        R = rec.choice.R
        if R not in mols:
            mols[R] = Mollifier.build(R, n)
        env_hat = np.fft.fft2(rec.E.astype(float)) * mols[R].fhat / math.sqrt(mu)
        ball = np.hypot(k1, k2) <= R
        a1, a2 = rec.choice.residue
        d1, d2 = k1[ball].astype(int), k2[ball].astype(int)
        index = ((d1 + a1) % n) * n + ((d2 + a2) % n)
        coef = env_hat[ball]
        pieces[w] = Piece(w, rec.tau, index, coef, np.stack([d1, d2], axis=1))
        total.flat[index] += coef
    f = GridFunction2D(n, n, 1.0, 1.0, np.fft.ifft2(total))
    return f, pieces, TreeSystem(family, pieces)


# ---- verification ----------------------------------------------------------------

@dataclass
class TreeReport:
    partition_exact: bool
    norm_sq: float
    norm_sq_bound: float
    pythagoras_error: float
    mollifier_ok: bool
    cos_mass_ok: bool
    tree_min_ratio: float
    tree_ok: bool
    l1_sum_abs_F: float
    l1_bound: float
    sup_ratio: float
    sup_bound_100: float
    sup_bound_50: float
    spectra_disjoint: bool
    sign_structure_ok: bool
    sectors_ok: bool
    eps_used: float

    @property
    def passed(self) -> bool:
        return (self.partition_exact and self.norm_sq <= self.norm_sq_bound and self.mollifier_ok
                and self.cos_mass_ok and self.tree_ok and self.l1_sum_abs_F >= self.l1_bound
                and self.sup_ratio >= self.sup_bound_50 and self.spectra_disjoint
                and self.sign_structure_ok and self.sectors_ok)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def _partial_sums_sup(pieces: dict, n: int, M: int, transform=None):
    """sup_{1<=j<=M} |sum_{tau(w) >= j} g_w| where g_w = transform(w, samples)."""
    order = sorted(pieces.values(), key=lambda p: -p.tau)
    acc = None
    sup = np.zeros((n, n))
    for p in order:
        g = p.samples(n)
        if transform is not None:
            g = transform(p.word, g)
        acc = g if acc is None else acc + g
        np.maximum(sup, np.abs(acc), out=sup)
    return sup


def verify_family(family: KaragulyanFamily, f: GridFunction2D, pieces: dict,
                  norm_slack: float = 0.05) -> TreeReport:
    n, mu = family.n, family.mu
    cell = 1.0 / (n * n)
    recs = family.records
    count = np.zeros((n, n), dtype=np.int64)
    for r in recs.values():
        count += r.E
    partition = bool(np.all(count == mu))
    # disjoint union property for the children and the sign structure
    sign_ok = True
    for w, r in recs.items():
        if len(w) < mu - 1:
            c0, c1 = recs[w + (0,)].E, recs[w + (1,)].E
            if np.any(c0 & c1) or np.any((c0 | c1) != r.E):
                partition = False
            c = _cos_grid(r.choice.residue, n)
            sign_ok &= bool(np.all(c[c0] >= 0) and np.all(c[c1] < 0))
    norm_sq = f.norm() ** 2
    pyth = abs(norm_sq - sum(p.norm_sq(n) for p in pieces.values()))
    seen = np.zeros(n * n, dtype=bool)
    disjoint = True
    for p in pieces.values():
        if np.any(seen[p.index]):
            disjoint = False
        seen[p.index] = True
    mol_ok = all(r.choice.eps_achieved <= family.epsilon_used for r in recs.values())
    cos_ok = all(r.choice.cos_mass >= r.E.sum() * cell / 3.0 - 1e-15 for r in recs.values())
    sectors_ok = all(family.sectors.contains_lifted_ball(r.tau, r.choice.k, r.choice.R)
                     for r in recs.values())
    # tree estimate and the L1 mass of sum |F_w|
    sumabs = np.zeros((n, n))
    Fs = {}
    for w, p in pieces.items():
        F = p.samples(n).real * recs[w].E
        Fs[w] = F
        sumabs += np.abs(F)
    order = sorted(pieces, key=lambda w: -recs[w].tau)
    acc = np.zeros((n, n))
    sup = np.zeros((n, n))
    for w in order:
        acc += Fs[w]
        np.maximum(sup, np.abs(acc), out=sup)
    del Fs
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(sumabs > 0, sup / np.where(sumabs > 0, sumabs, 1.0), np.inf)
    tree_min = float(ratio.min())
    tree_ok = bool(np.all(sup >= sumabs / 3.0 - 1e-13))
    l1 = float(sumabs.sum() * cell)
    sup_f = _partial_sums_sup(pieces, n, family.M)
    sup_ratio = float(np.sqrt(np.sum(sup_f**2) * cell)) / f.norm()
    return TreeReport(
        partition_exact=partition, norm_sq=norm_sq, norm_sq_bound=2.0 + norm_slack,
        pythagoras_error=pyth, mollifier_ok=mol_ok, cos_mass_ok=cos_ok,
        tree_min_ratio=tree_min, tree_ok=tree_ok, l1_sum_abs_F=l1,
        l1_bound=math.sqrt(mu) / 4.0,
        sup_ratio=sup_ratio, sup_bound_100=math.sqrt(mu) / 100.0, sup_bound_50=math.sqrt(mu) / 50.0,
        spectra_disjoint=disjoint, sign_structure_ok=sign_ok, sectors_ok=sectors_ok,
        eps_used=family.epsilon_used)


# ---- the lower-bound experiment ------------------------------------------------------

class PreconditionError(ValueError):
    pass


def lifted_multiplier(ev, piece: Piece, rec: WordRecord, u: float) -> np.ndarray:
    """m(xi_1, u xi_2) at the lifted frequencies 2 pi (k_w + delta) of the piece's cluster."""
    k1, k2 = rec.choice.k
    d = piece.offsets
    lk1, lk2 = math.log(k1), math.log(k2)
    # k + delta = k (1 + delta/k), with delta/k computed in log space for huge k
    a = math.log(TWO_PI) + lk1 + np.log1p(d[:, 0] * math.exp(-lk1))
    c = math.log(TWO_PI) + lk2 + np.log1p(d[:, 1] * math.exp(-lk2)) + math.log(u)
    return ev.from_log(1.0, 1.0, a, c)


@dataclass
class LowerBoundReport:
    R: float
    estimate: float  # ||sup_j |H^(u_j) f|||_2 / ||f||_2
    max_scaled_error_axis: float   # max M ||(H + pi i) f_w|| / ||f_w|| over tau(w) >= j
    max_scaled_error_vertical: float  # max M ||(H - rho) f_w|| / ||f_w|| over tau(w) < j
    worst_pair: tuple
    bounds_ok: bool
    M: int
    rho: complex

    def to_dict(self) -> dict:
        return {"R": self.R, "estimate": self.estimate,
                "max_scaled_error_axis": self.max_scaled_error_axis,
                "max_scaled_error_vertical": self.max_scaled_error_vertical,
                "worst_pair": list(self.worst_pair), "bounds_ok": self.bounds_ok, "M": self.M,
                "rho": [self.rho.real, self.rho.imag]}


def lower_bound_experiment(family: KaragulyanFamily, f: GridFunction2D, pieces: dict, ev,
                           require: bool = True) -> LowerBoundReport:
    n, M = family.n, family.M
    rho = complex(ev.rho_const)
    horiz = -1j * math.pi
    recs = family.records
    worst_a = worst_v = 0.0
    worst_pair = ("", 0, 0.0)
    sup_shift = np.zeros((n, n))
    sup_abs = np.zeros((n, n))
    fs = f.samples
    for j in range(1, M + 1):
        u = family.sectors.u_list[j - 1]
        spec = np.zeros(n * n, dtype=complex)
        for w, p in pieces.items():
            m = lifted_multiplier(ev, p, recs[w], u)
            target = horiz if recs[w].tau >= j else rho
            num = np.sqrt(np.sum(np.abs((m - target) * p.coef) ** 2))
            den = np.sqrt(np.sum(np.abs(p.coef) ** 2))
            scaled = M * num / den if den > 0 else 0.0
            if recs[w].tau >= j:
                worst_a = max(worst_a, scaled)
            else:
                worst_v = max(worst_v, scaled)
            if scaled >= max(worst_a, worst_v):
                worst_pair = (word_str(w), j, scaled)
            spec[p.index] += m * p.coef
        h = np.fft.ifft2(spec.reshape(n, n))
        np.maximum(sup_shift, np.abs(h - rho * fs), out=sup_shift)
        np.maximum(sup_abs, np.abs(h), out=sup_abs)
    ok = worst_a <= 1.0 and worst_v <= 1.0
    if require and not ok:
        raise PreconditionError(
            f"per-piece error bound violated at (word, j) = {worst_pair[:2]}: "
            f"M * relative deviation = {worst_pair[2]:.4g} > 1")
    fn = f.norm()
    cell = 1.0 / (n * n)
    R_val = float(np.sqrt(np.sum(sup_shift**2) * cell)) / (math.sqrt(family.mu) * fn)
    est = float(np.sqrt(np.sum(sup_abs**2) * cell)) / fn
    return LowerBoundReport(R_val, est, worst_a, worst_v, worst_pair, ok, M, rho)


# ---- persistence ---------------------------------------------------------------------

def save_family(family: KaragulyanFamily, directory) -> None:
    """family.json (metadata) and masks.bin (bit-packed E_w, breadth-first word order)."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "family.json").write_text(json.dumps(family.metadata(), indent=1, sort_keys=True))
    with open(d / "masks.bin", "wb") as fh:
        for w in words(family.mu):
            fh.write(np.packbits(family.records[w].E.ravel()).tobytes())


def load_family(directory) -> KaragulyanFamily:
    d = Path(directory)
    meta = json.loads((d / "family.json").read_text())
    mu, n = int(meta["mu"]), int(meta["n"])
    params = CurveParams(float(meta["b"]), float(meta["c_plus"]), float(meta["c_minus"]))
    sectors = SectorFamily(params, float(meta["K"]), tuple(float(u) for u in meta["u_list"]))
    raw = np.frombuffer((d / "masks.bin").read_bytes(), dtype=np.uint8)
    per = n * n // 8
    if raw.size != per * (2**mu - 1):
        raise ValueError("mask file size does not match the metadata")
    by_word = {m["word"]: m for m in meta["words"]}
    records = {}
    for i, w in enumerate(words(mu)):
        m = by_word[word_str(w)]
        E = np.unpackbits(raw[i * per:(i + 1) * per]).astype(bool).reshape(n, n)
        ch = FrequencyChoice(tuple(int(x) for x in m["residue"]), (int(m["k"][0]), int(m["k"][1])),
                             float(m["R"]), float(m["eps_achieved"]), float(m["cos_mass"]))
        records[w] = WordRecord(w, int(m["tau"]), E, ch)
    return KaragulyanFamily(params, sectors, mu, n, records, tuple(meta["radii"]),
                            float(meta["eps_target"]), float(meta["epsilon_used"]))
