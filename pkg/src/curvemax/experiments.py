"""Experiment drivers shared by the command line and the demos."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .curve_model import CurveParams, covering_number, lacunary_selection, ParamSet
from .dyadic_martingale import cww_data, cww_from_data, random_martingale
from .grid_transform import (GridFunction2D, MikhlinMultiplier1D, cotlar_check,
                             maximal_over_params, random_test_function_1d)
from .karagulyan import assemble, build_family, lower_bound_experiment, verify_family
from .multiplier import (MultiplierEvaluator, decomposition_values, hoelder_verify,
                         m_point, residual_sum)
from .oscillatory import PLUS, PhaseBranch, kappa_leading, phi0_residual, sigma_hat
from .quadrature import QuadratureConfig

DEFAULT_SEED = 20240607


@dataclass
class ExperimentConfig:
    curve: dict = field(default_factory=lambda: {"b": 2.0, "c_plus": 1.0, "c_minus": 1.0})
    grid: dict = field(default_factory=lambda: {"n1": 64, "n2": 64, "L1": 1.0, "L2": 1.0})
    quadrature: dict = field(default_factory=dict)
    param_set: dict = field(default_factory=lambda: {"type": "lacunary", "start": 1.0,
                                                     "ratio": 4.0, "count": 4})
    seed: int = DEFAULT_SEED
    growth: dict = field(default_factory=lambda: {"N_list": [2, 4, 8, 16, 32], "n": 1024,
                                                  "C_circ": None, "baseline_n": 128})
    cww: dict = field(default_factory=lambda: {"samples": 500, "depth": 10, "lambdas": 20,
                                               "epsilons": [0.1, 0.2, 0.3, 0.4]})
    cotlar: dict = field(default_factory=lambda: {"n": 1024, "family_size": 50, "r": 0.5,
                                                  "delta": 0.05})
    kara: dict = field(default_factory=lambda: {"mu": 3, "n": 512, "eps": None, "C_circ": None})
    hoelder: dict = field(default_factory=lambda: {"eta_grid": [1e-1, 1e-2, 1e-3, 1e-4,
                                                                1e-5, 1e-6]})
    multiplier: dict = field(default_factory=lambda: {"points": 16})
    decompose: dict = field(default_factory=lambda: {"points": 20, "check_residual": True})
    symbol: dict = field(default_factory=lambda: {"R_list": [100, 200, 400, 800]})

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        base = cls()
        for k, v in d.items():
            cur = getattr(base, k)
            if isinstance(cur, dict):
                if not isinstance(v, dict):
                    raise ValueError(f"config block {k!r} must be an object")
                merged = dict(cur)
                merged.update(v)
                setattr(base, k, merged)
            else:
                setattr(base, k, v)
        base.validate()
        return base

    def validate(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        self.curve_params()
        self.quadrature_config()

    def curve_params(self) -> CurveParams:
        c = self.curve
        return CurveParams(float(c["b"]), float(c["c_plus"]), float(c["c_minus"]))

    def quadrature_config(self) -> QuadratureConfig:
        return QuadratureConfig(**self.quadrature)

    def to_dict(self) -> dict:
        return asdict(self)


# ---- the growth experiment ------------------------------------------------------

@dataclass(frozen=True)
class GrowthRow:
    N: int
    estimate: float
    mu: int
    runtime_ms: int
    baseline: float
    R: float
    max_scaled_error: float

    def __post_init__(self):
        if self.N < 2 or self.estimate < 0:
            raise ValueError("growth rows need N >= 2 and a nonnegative estimate")

    def payload(self) -> dict:
        """Deterministic part of the row (runtime excluded)."""
        d = asdict(self)
        d.pop("runtime_ms")
        return d


def measured_C_circ(params: CurveParams, eta_grid=None, cfg=QuadratureConfig()) -> float:
    eta_grid = eta_grid or [10.0**-k for k in range(1, 7)]
    return hoelder_verify(params, eta_grid, cfg).C_circ_estimate


def baseline_ratio(ev, U, n: int, seed: int) -> float:
    """||H^U g||_2 / ||g||_2 for a random band-limited g on an n x n grid."""
    rng = np.random.default_rng(seed)
    k = np.fft.fftfreq(n, d=1.0 / n)
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    band = np.hypot(K1, K2) <= n / 8
    spec = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) * band
    g = GridFunction2D(n, n, 1.0, 1.0, np.fft.ifft2(spec).real)
    out = maximal_over_params(g, ev, U)
    return float(np.sqrt(np.sum(out**2)) / np.sqrt(np.sum(np.abs(g.samples) ** 2)))


def growth_row(params, ev, mu: int, n: int, C_circ: float, baseline_n: int, seed: int) -> GrowthRow:
    t0 = time.perf_counter()
    sel = lacunary_selection(params, mu, C_circ)
    N = covering_number(ParamSet(sel.u_list))
    fam = build_family(params, sel, mu, n)
    f, pieces, _ = assemble(fam)
    lb = lower_bound_experiment(fam, f, pieces, ev)
    base = baseline_ratio(ev, sel.u_list, baseline_n, seed + mu)
    ms = int(round(1000 * (time.perf_counter() - t0)))
    return GrowthRow(N, lb.estimate, mu, ms, base, lb.R,
                     float(max(lb.max_scaled_error_axis, lb.max_scaled_error_vertical)))


def run_growth(config: ExperimentConfig, ev: MultiplierEvaluator = None) -> list:
    params = config.curve_params()
    g = config.growth
    ev = ev or MultiplierEvaluator(params, config.quadrature_config())
    C = g.get("C_circ") or measured_C_circ(params, None, config.quadrature_config())
    rows = []
    for N in sorted(int(x) for x in g["N_list"]):
        mu = int(round(math.log2(N)))
        if 2**mu != N:
            raise ValueError(f"N = {N} is not a power of two (N = M + 1 = 2^mu)")
        try:
            rows.append(growth_row(params, ev, mu, int(g["n"]), C, int(g["baseline_n"]), config.seed))
        except Exception as exc:
            raise RuntimeError(f"growth row N = {N}: {exc}") from exc
    return rows


def growth_fit(rows) -> dict:
    x = np.sqrt(np.log([r.N for r in rows]))
    y = np.array([r.estimate for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    corr = float(np.corrcoef(x, y)[0, 1]) if len(rows) > 2 else float("nan")
    return {"slope": float(slope), "intercept": float(intercept), "correlation": corr,
            "nondecreasing": bool(np.all(np.diff(y) >= 0))}


# ---- sweeps used by the subcommands ---------------------------------------------

def multiplier_rows(params, cfg, count: int, seed: int) -> list:
    """Sample m at random sphere points with the direct quadrature."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(count):
        th = rng.uniform(0, 2 * np.pi)
        s = 10 ** rng.uniform(-1, 2)
        xi = (s * math.cos(th), s**params.b * math.sin(th))
        v = m_point(params, xi, cfg, full_output=True)
        rows.append({"xi1": xi[0], "xi2": xi[1], "re": v.value.real, "im": v.value.imag,
                     "abs_err_est": v.quad_err + v.tail_bound})
    return rows


def symbol_rows(params, cfg, R_list) -> list:
    rows, prev = [], None
    branch = PhaseBranch(PLUS, params)
    for R in R_list:
        xi = (-2.0 * R, float(R))
        s = sigma_hat(branch, xi, cfg)
        k = kappa_leading(branch, xi)
        err = abs(s - k) / abs(k)
        res = abs(phi0_residual(params, xi, cfg))
        row = {"R": R, "sigma_re": s.real, "sigma_im": s.imag, "kappa_re": k.real,
               "kappa_im": k.imag, "rel_err": err, "residual_abs": res,
               "err_ratio": err / prev[0] if prev else float("nan"),
               "residual_ratio": res / prev[1] if prev else float("nan")}
        rows.append(row)
        prev = (err, res)
    return rows


def random_decomposition_point(params, rng):
    """A point on the anisotropic unit sphere, dilated to |xi| in roughly [1, 1000]."""
    q = rng.uniform(-1, 1)
    s2 = rng.choice([-1.0, 1.0]) * (1 - abs(q)) ** params.b
    lam = 10 ** rng.uniform(0, 3 / params.b)
    return (lam * q, lam**params.b * s2 if s2 != 0 else lam**params.b), 2.0 ** rng.uniform(-2, 2)


def decompose_rows(params, cfg, count: int, seed: int, check_residual: bool = True) -> list:
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(count):
        xi, u = random_decomposition_point(params, rng)
        d = decomposition_values(params, u, xi, cfg)
        m = m_point(params, (xi[0], u * xi[1]), cfg)
        S = residual_sum(params, u, xi, cfg) if check_residual else d.S
        rows.append({"xi1": xi[0], "xi2": xi[1], "u": u, "m_re": m.real, "m_im": m.imag,
                     "S_re": S.real, "S_im": S.imag, "Tp_re": d.T_plus.real,
                     "Tp_im": d.T_plus.imag, "Tm_re": d.T_minus.real, "Tm_im": d.T_minus.imag,
                     "identity_error": abs(S + d.T_plus + d.T_minus - m),
                     "truncation_error": d.truncation_error})
    return rows


def cww_rows(samples: int, depth: int, n_lambda: int, epsilons, seed: int, dim: int = 1):
    """One row per (sample, lambda, epsilon, form)."""
    rng = np.random.default_rng(seed)
    kinds = ("uniform", "rademacher", "bump")
    rows = []
    for s in range(samples):
        f = random_martingale(depth, rng, dim, kinds[s % 3])
        D = cww_data(f)
        top = max(float(D.M_full.max()), 1e-12)
        for lam in top * np.logspace(-3, 0, n_lambda):
            for eps in epsilons:
                for form in ("B", "A"):
                    if form == "A" and not eps < 0.5:
                        continue
                    r = cww_from_data(D, float(lam), float(eps), form)
                    rows.append({"sample": s, "lambda": r.lam, "epsilon": r.epsilon, "form": form,
                                 "lhs": r.lhs_measure, "rhs": r.rhs_measure,
                                 "factor": r.bound_factor, "pass": r.passed})
    return rows


def cotlar_family_constant(mm: MikhlinMultiplier1D, n: int, size: int, seed: int,
                           r: float = 0.5, delta: float = 0.05) -> float:
    """Largest pointwise fitted constant over a random family of test functions."""
    rng = np.random.default_rng(seed)
    return max(cotlar_check(random_test_function_1d(n, rng), mm, r, delta).fitted_constant
               for _ in range(size))


def cotlar_rows(n: int, size: int, seed: int, r: float, delta: float) -> list:
    rows = []
    for mm in (MikhlinMultiplier1D.hilbert(), MikhlinMultiplier1D.imaginary_power(1.0)):
        a = cotlar_family_constant(mm, n, size, seed, r, delta)
        b = cotlar_family_constant(mm, n, size, seed + 1, r, delta)
        rows.append({"multiplier": mm.name, "family_1": a, "family_2": b,
                     "ratio": max(a, b) / min(a, b) if min(a, b) > 0 else float("inf")})
    return rows


def kara_pipeline(params, mu: int, n: int, C_circ: float, eps=None):
    sel = lacunary_selection(params, mu, C_circ)
    fam = build_family(params, sel, mu, n, eps)
    f, pieces, tree = assemble(fam)
    return sel, fam, f, pieces, tree


# ---- self test --------------------------------------------------------------------

def run_selftest(level: str = "fast", out=print) -> int:
    from . import selftest
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    results = selftest.run(level)
    width = max(len(name) for name, _, _ in results)
    out(f"{'check'.ljust(width)}  status  seconds")
    for name, ok, secs in results:
        out(f"{name.ljust(width)}  {'ok' if ok else 'FAIL':6}  {secs:7.2f}")
    failed = [name for name, ok, _ in results if not ok]
    out(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0
