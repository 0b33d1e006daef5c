"""Homogeneous curves, anisotropic dilations and parameter-set bookkeeping."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class CurveParams:
    """Curve t -> (t, gamma_b(t)) with gamma_b(t) = c_plus t^b (t > 0), c_minus (-t)^b (t < 0)."""

    b: float
    c_plus: float
    c_minus: float

    def __post_init__(self):
        if not (self.b > 1):
            raise ValueError(f"exponent b must exceed 1, got {self.b}")
        if self.c_plus == 0 or self.c_minus == 0:
            raise ValueError("coefficients c_plus and c_minus must be nonzero")
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "c_plus", float(self.c_plus))
        object.__setattr__(self, "c_minus", float(self.c_minus))

    def coefficient(self, sign: int) -> float:
        return self.c_plus if sign > 0 else self.c_minus

    def to_dict(self) -> dict:
        return {"b": self.b, "c_plus": self.c_plus, "c_minus": self.c_minus}


@dataclass(frozen=True)
class ParamSet:
    """Finite, strictly increasing set of positive dilation parameters."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("parameter set must be nonempty")
        if any(not math.isfinite(v) or v <= 0 for v in vals):
            raise ValueError("parameters must be finite and positive")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("parameters must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_iterable(cls, values: Iterable[float]) -> "ParamSet":
        """Build from arbitrary positive values (sorted, duplicates dropped)."""
        return cls(tuple(sorted(set(float(v) for v in values))))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def to_json(self) -> str:
        return json.dumps(list(self.values))


def param_set_from_descriptor(desc) -> ParamSet:
    """Decode a JSON array or a ``lacunary`` / ``explicit`` descriptor."""
    if isinstance(desc, str):
        desc = json.loads(desc)
    if isinstance(desc, (list, tuple)):
        return ParamSet.from_iterable(desc)
    kind = desc.get("type")
    if kind == "explicit":
        return ParamSet.from_iterable(desc["values"])
    if kind == "lacunary":
        start, ratio, count = float(desc["start"]), float(desc["ratio"]), int(desc["count"])
        if start <= 0 or ratio <= 1 or count < 1:
            raise ValueError("lacunary descriptor needs start > 0, ratio > 1, count >= 1")
        return ParamSet(tuple(start * ratio**k for k in range(count)))
    raise ValueError(f"unknown parameter-set descriptor: {desc!r}")


@dataclass(frozen=True)
class SeparatedSelection:
    u_list: tuple
    K: float
    M: int
    mu: int
    C_circ: float
    source_N: int = 0
    log2_ratio_floor: float = field(default=0.0)

    def verify(self) -> bool:
        """Re-check both selection invariants."""
        if self.M + 1 != 2**self.mu or len(self.u_list) != self.M:
            return False
        need = math.log2(16.0) + 2.0 * math.log2(self.K)
        logs = [math.log2(u) for u in self.u_list]
        return all(b - a >= need - 1e-12 for a, b in zip(logs, logs[1:]))


def gamma_eval(params: CurveParams, t):
    t = np.asarray(t, dtype=float)
    out = np.where(t > 0, params.c_plus * np.abs(t) ** params.b,
                   params.c_minus * np.abs(t) ** params.b)
    out = np.where(t == 0, 0.0, out)
    return out if out.ndim else float(out)


def anisotropic_dilate(params: CurveParams, s: float, x):
    if not s > 0:
        raise ValueError(f"dilation factor must be positive, got {s}")
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[..., 0] = s * x[..., 0]
    out[..., 1] = s**params.b * x[..., 1]
    return out


def dyadic_indices(U: ParamSet) -> list[int]:
    """All n with [2^n, 2^{n+1}] meeting U (closed intervals)."""
    hits = set()
    for u in U:
        n = math.floor(math.log2(u))
        # guard against rounding in log2 near powers of two
        while 2.0**n > u:
            n -= 1
        while 2.0 ** (n + 1) <= u:
            n += 1
        hits.add(n)
        if u == 2.0**n:
            hits.add(n - 1)
    return sorted(hits)


def covering_number(U: ParamSet) -> int:
    return 1 + len(dyadic_indices(U))


def lacunary_check(U: ParamSet, kappa: float) -> bool:
    if not kappa > 1:
        raise ValueError(f"lacunarity constant must exceed 1, got {kappa}")
    v = U.values
    return all(b >= kappa * a for a, b in zip(v, v[1:]))


def skim_to_dyadic_representatives(U: ParamSet) -> ParamSet:
    """Keep the smallest point of U in each half-open interval [2^n, 2^{n+1})."""
    kept, seen = [], set()
    for u in U:
        n = math.floor(math.log2(u))
        while 2.0**n > u:
            n -= 1
        while 2.0 ** (n + 1) <= u:
            n += 1
        if n not in seen:
            seen.add(n)
            kept.append(u)
    return ParamSet(tuple(kept))


def _largest_mersenne_at_most(q: float) -> int:
    mu = int(math.floor(math.log2(q + 1.0)))
    while 2 ** (mu + 1) - 1 <= q:
        mu += 1
    while mu > 0 and 2**mu - 1 > q:
        mu -= 1
    return mu


def separated_subsequence(U: ParamSet, C_circ: float, b: float) -> SeparatedSelection:
    """Pick M well separated parameters from U following the lower-bound recipe.

    The index gap is widened to ``n2 - n1 >= ceil(log2(16 K^2)) + 1`` so that the
    ratio bound u_{j+1}/u_j >= 16 K^2 holds for any choice of points inside the
    closed intervals.
    """
    if C_circ < 1:
        raise ValueError("C_circ must be at least 1")
    N = covering_number(U)
    log2K = 2.0 * b * math.log2(C_circ * N)
    K = 2.0**log2K
    log2_need = 4.0 + 2.0 * log2K
    q = N / log2_need
    if q < 1:
        raise ValueError(
            f"covering number {N} too small: N/log2(16K^2) = {q:.4g} < 1, so M < 1")
    mu = _largest_mersenne_at_most(q)
    M = 2**mu - 1
    gap = math.ceil(log2_need) + 1
    chosen: list[int] = []
    for n in dyadic_indices(U):
        if not chosen or n - chosen[-1] >= gap:
            chosen.append(n)
    if len(chosen) < M:
        raise ValueError(
            f"only {len(chosen)} separated dyadic intervals available, need M = {M}")
    vals = np.asarray(U.values)
    u_list = []
    for n in chosen[:M]:
        inside = vals[(vals >= 2.0**n) & (vals <= 2.0 ** (n + 1))]
        u_list.append(float(inside.min()))
    sel = SeparatedSelection(tuple(u_list), K, M, mu, float(C_circ), N, log2_need)
    if not sel.verify():
        raise AssertionError("separated selection failed its own ratio check")
    return sel


def lacunary_selection(params: CurveParams, mu: int, C_circ: float,
                       center: float = 1.0) -> SeparatedSelection:
    """Selection of M = 2^mu - 1 parameters with K computed from the selected family.

    Here the covering number entering K is that of the returned family itself
    (M + 1 = 2^mu), and the parameters are spaced by a factor slightly above
    16 K^2, centred geometrically around ``center``. The parameters avoid exact
    powers of two so every point meets exactly one closed dyadic interval.
    """
    if mu < 1:
        raise ValueError("mu must be at least 1")
    if C_circ < 1:
        raise ValueError("C_circ must be at least 1")
    M = 2**mu - 1
    N = M + 1
    log2K = 2.0 * params.b * math.log2(C_circ * N)
    log2_step = math.ceil(4.0 + 2.0 * log2K) + 1.0
    offset = (M - 1) / 2.0
    logs = [math.log2(center) + (j - offset) * log2_step + 0.5 for j in range(M)]
    u_list = tuple(2.0**v for v in logs)
    if any(not math.isfinite(u) or u == 0 for u in u_list):
        raise OverflowError("parameter spacing exceeds double precision range")
    sel = SeparatedSelection(u_list, 2.0**log2K, M, mu, float(C_circ), N, log2_step)
    assert covering_number(ParamSet(u_list)) == N
    if not sel.verify():
        raise AssertionError("lacunary selection failed its own ratio check")
    return sel
