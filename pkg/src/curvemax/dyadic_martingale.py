"""Exact dyadic martingales on [0,1]^d, d in {1, 2}, and the good-lambda inequality.

A DyadicFunction is a step function on the depth-J dyadic cells, so every
expectation, square function and level-set measure below is computed exactly
(cell counts times cell volume); no quadrature enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class DyadicFunction:
    dim: int
    J: int
    values: np.ndarray

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.J < 0:
            raise ValueError("depth must be nonnegative")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (2**self.J,) * self.dim:
            raise ValueError(f"values have shape {v.shape}, expected {(2**self.J,) * self.dim}")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        self.values = v

    def like(self, values) -> "DyadicFunction":
        return DyadicFunction(self.dim, self.J, values)

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (-self.J * self.dim)

    def measure(self, mask) -> float:
        return float(np.count_nonzero(mask)) * self.cell_volume

    def integral(self) -> float:
        return float(self.values.sum()) * self.cell_volume


def _check_level(f: DyadicFunction, j: int, lo: int = 0):
    if not lo <= j <= f.J:
        raise ValueError(f"level {j} outside [{lo}, {f.J}]")


def _block_mean(v: np.ndarray, j: int, J: int, axes) -> np.ndarray:
    """Average over blocks of side 2^{J-j} along the given axes, expanded back."""
    s = 2 ** (J - j)
    if s == 1:
        return v.copy()
    shape, red = [], []
    for ax, n in enumerate(v.shape):
        if ax in axes:
            shape += [n // s, s]
            red.append(len(shape) - 1)
        else:
            shape.append(n)
    m = v.reshape(shape).mean(axis=tuple(red), keepdims=True)
    return np.broadcast_to(m, shape).reshape(v.shape).copy()


def _axes(f: DyadicFunction, axis: Optional[int]):
    if axis is None:
        return tuple(range(f.dim))
    if axis == 2 and f.dim == 2:
        return (1,)
    raise ValueError("axis must be None or 2 (two-dimensional functions only)")


def expectation(f: DyadicFunction, j: int, axis: Optional[int] = None) -> DyadicFunction:
    _check_level(f, j)
    return f.like(_block_mean(f.values, j, f.J, _axes(f, axis)))


def martingale_difference(f: DyadicFunction, j: int, axis: Optional[int] = None) -> DyadicFunction:
    if not 0 <= j < f.J:
        raise ValueError(f"difference level {j} outside [0, {f.J})")
    ax = _axes(f, axis)
    return f.like(_block_mean(f.values, j + 1, f.J, ax) - _block_mean(f.values, j, f.J, ax))


def _all_expectations(f: DyadicFunction, axis=None):
    ax = _axes(f, axis)
    return [_block_mean(f.values, j, f.J, ax) for j in range(f.J + 1)]


def square_function(f: DyadicFunction, m: int = 0, axis: Optional[int] = None) -> DyadicFunction:
    if not 0 <= m < f.J:
        raise ValueError(f"m = {m} outside [0, {f.J})")
    E = _all_expectations(f, axis)
    acc = np.zeros_like(f.values)
    for j in range(m, f.J):
        acc += (E[j + 1] - E[j]) ** 2
    return f.like(np.sqrt(acc))


def dyadic_maximal(f: DyadicFunction, m: int = 0, axis: Optional[int] = None,
                   form: str = "truncated") -> DyadicFunction:
    """'global': sup_{0<=j<=J} |E_j f|.  'truncated': sup_{j>=m} |E_j f - E_m f|."""
    _check_level(f, m)
    E = _all_expectations(f, axis)
    if form == "global":
        return f.like(np.max(np.abs(np.stack(E)), axis=0))
    if form == "truncated":
        return f.like(np.max(np.abs(np.stack(E[m:]) - E[m]), axis=0))
    raise ValueError(f"unknown maximal form {form!r}")


# ---- good-lambda inequality -------------------------------------------------

def cww_factor_B(eps: float) -> float:
    return 2.0 * math.exp(-((1.0 - eps) ** 2) / (2.0 * eps**2))


def cww_factor_A(eps: float) -> float:
    return 4.0 * math.exp(-1.0 / (8.0 * eps**2))


@dataclass(frozen=True)
class CwwReport:
    form: str
    lam: float
    epsilon: float
    lhs_measure: float
    rhs_measure: float
    bound_factor: float
    passed: bool

    def to_dict(self) -> dict:
        return {"form": self.form, "lambda": self.lam, "epsilon": self.epsilon,
                "lhs_measure": self.lhs_measure, "rhs_measure": self.rhs_measure,
                "bound_factor": self.bound_factor, "pass": self.passed}


@dataclass
class CwwData:
    """Pointwise quantities shared by every (lambda, epsilon) query on one function."""

    dev0: np.ndarray      # |f - E_0 f|
    S0: np.ndarray        # square function from level 0
    M0: np.ndarray        # truncated maximal function from level 0
    absf: np.ndarray      # |f| on the cube
    S_full: np.ndarray    # square function of the zero extension
    M_full: np.ndarray    # global maximal function on the cube
    mean: float
    dim: int
    volume: float


def cww_data(f: DyadicFunction) -> CwwData:
    """The zero extension of f to R^d sees the coarse levels j < 0 as well.

    For x in the cube, E_{-k} f(x) = I 2^{-kd} with I the integral of f, so the
    coarse differences add I^2 (1 - 2^{-d}) / (1 + 2^{-d}) to (Sf)^2. Outside the
    cube f = 0; there Mf exceeds lambda exactly on the cubes [0, 2^k)^d minus
    [0,1)^d with |I| 2^{-kd} > lambda, which is accounted for in cww_verify.
    """
    E = _all_expectations(f)
    d = f.dim
    I = f.integral()
    acc = np.zeros_like(f.values)
    for j in range(f.J):
        acc += (E[j + 1] - E[j]) ** 2
    S0 = np.sqrt(acc)
    coarse = I * I * (1.0 - 2.0**-d) / (1.0 + 2.0**-d)
    stack = np.stack(E)
    return CwwData(
        dev0=np.abs(f.values - E[0]), S0=S0, M0=np.max(np.abs(stack - E[0]), axis=0),
        absf=np.abs(f.values), S_full=np.sqrt(acc + coarse),
        M_full=np.max(np.abs(stack), axis=0), mean=I, dim=d, volume=f.cell_volume)


def _exterior_max_measure(mean: float, lam: float, d: int) -> float:
    # largest k >= 1 with |I| 2^{-kd} > lambda; exterior measure is 2^{kd} - 1
    if abs(mean) <= lam:
        return 0.0
    k = math.floor(math.log2(abs(mean) / lam) / d)
    while k >= 1 and abs(mean) * 2.0 ** (-k * d) <= lam:
        k -= 1
    while abs(mean) * 2.0 ** (-(k + 1) * d) > lam:
        k += 1
    return 2.0 ** (k * d) - 1.0 if k >= 1 else 0.0


def cww_from_data(D: CwwData, lam: float, eps: float, form: str = "B") -> CwwReport:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if form == "B":
        if not 0 < eps < 1:
            raise ValueError("epsilon must lie in (0, 1) for form B")
        lhs = np.count_nonzero((D.dev0 > 2 * lam) & (D.S0 <= eps * lam)) * D.volume
        rhs = np.count_nonzero(D.M0 > lam) * D.volume
        factor = cww_factor_B(eps)
    elif form == "A":
        if not 0 < eps < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2) for form A")
        lhs = np.count_nonzero((D.absf > 4 * lam) & (D.S_full <= eps * lam)) * D.volume
        rhs = (np.count_nonzero(D.M_full > lam) * D.volume
               + _exterior_max_measure(D.mean, lam, D.dim))
        factor = cww_factor_A(eps)
    else:
        raise ValueError(f"unknown form {form!r}")
    return CwwReport(form, float(lam), float(eps), float(lhs), float(rhs), factor,
                     bool(lhs <= factor * rhs))


def cww_verify(f: DyadicFunction, lam: float, eps: float, form: str = "B") -> CwwReport:
    """Form B: the truncated unit-cube statement. Form A: the statement with thresholds
    4 lambda and constants (1/8, 4), for f extended by zero to R^d."""
    return cww_from_data(cww_data(f), lam, eps, form)


# ---- product martingale -------------------------------------------------------

def martingale_product_identity(f: DyadicFunction, cell, m: int, t: float) -> float:
    """Average over the cell I_n of exp(t(E_m f - E_n f)) / prod_{j=n}^{m-1} E_j(exp(t D_j f)).

    ``cell`` is a tuple of integer coordinates at depth n = len-independent level
    given as (n, i) in 1-D or (n, i, k) in 2-D. In one dimension E_j(exp(t D_j f))
    is cosh(t D_j f); in two dimensions it is the average over the 2^d children.
    """
    n, idx = int(cell[0]), tuple(int(c) for c in cell[1:])
    if len(idx) != f.dim:
        raise ValueError("cell index does not match the dimension")
    if not 0 <= n <= m <= f.J:
        raise ValueError("need 0 <= n <= m <= J")
    if any(not 0 <= c < 2**n for c in idx):
        raise ValueError("cell index out of range")
    s = 2 ** (f.J - n)
    sl = tuple(slice(c * s, (c + 1) * s) for c in idx)
    E = _all_expectations(f)
    log_den = np.zeros_like(f.values)
    for j in range(n, m):
        D = E[j + 1] - E[j]
        if f.dim == 1:
            # |D| is constant on each depth-j cell, so the two-child average is cosh
            log_den += np.log(np.cosh(t * D))
        else:
            log_den += np.log(_block_mean(np.exp(t * D), j, f.J, (0, 1)))
    expo = t * (E[m] - E[n]) - log_den
    return float(np.mean(np.exp(expo[sl])))


# ---- random inputs -------------------------------------------------------------

def random_martingale(J: int, rng: np.random.Generator, dim: int = 1,
                      kind: str = "uniform") -> DyadicFunction:
    """Martingale with bounded increments.

    'uniform': at every node the child increments are i.i.d. uniform, recentred,
    and scaled by a factor depending on the node (so the scaling is
    E_j-measurable). 'rademacher': +-a_j cascades with deterministic a_j.
    'bump': a single nonzero difference level.
    """
    ch = 2**dim
    vals = np.full((1,) * dim, rng.normal())
    kinds = ("uniform", "rademacher", "bump")
    if kind not in kinds:
        raise ValueError(f"kind must be one of {kinds}")
    bump_level = int(rng.integers(0, J)) if J > 0 else 0
    for j in range(J):
        shape = (2**j,) * dim
        if kind == "uniform":
            scale = rng.uniform(0.0, 1.0, size=shape) * rng.choice([0.2, 1.0, 3.0])
            inc = rng.uniform(-1.0, 1.0, size=shape + (ch,))
        elif kind == "rademacher":
            scale = np.full(shape, rng.uniform(0.1, 1.0))
            inc = rng.choice([-1.0, 1.0], size=shape + (ch,))
        else:
            scale = np.full(shape, 2.0 if j == bump_level else 0.0)
            inc = rng.choice([-1.0, 1.0], size=shape + (ch,))
        inc = inc - inc.mean(axis=-1, keepdims=True)
        inc *= scale[..., None]
        if dim == 1:
            new = np.repeat(vals, 2) + inc.reshape(-1)
        else:
            up = np.repeat(np.repeat(vals, 2, axis=0), 2, axis=1)
            blk = inc.reshape(shape + (2, 2)).transpose(0, 2, 1, 3).reshape(2 ** (j + 1), 2 ** (j + 1))
            new = up + blk
        vals = new
    return DyadicFunction(dim, J, vals)
