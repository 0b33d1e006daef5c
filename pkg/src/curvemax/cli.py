"""curvemax <subcommand> --config <path.json> --out <dir>"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
from scipy import fft as sfft

from . import experiments as ex
from .curve_model import param_set_from_descriptor
from .grid_transform import (GridFunction2D, hilbert_along_curve, maximal_over_params,
                             read_snapshot, write_snapshot)
from .karagulyan import assemble, load_family, lower_bound_experiment, save_family, verify_family
from .multiplier import MultiplierEvaluator, hoelder_verify


def worker_count() -> int:
    raw = os.environ.get("CURVEMAX_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def _write_csv(path: Path, rows: list) -> None:
    if not rows:
        path.write_text("")
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=1, sort_keys=True) + "\n")


def _write_dat(path: Path, columns: list, rows: list) -> None:
    """gnuplot-friendly whitespace table."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# " + " ".join(columns) + "\n")
        for r in rows:
            fh.write(" ".join(repr(float(r[c])) for c in columns) + "\n")


def _maybe_svg(path: Path, x, ys: dict, xlabel: str, enabled: bool) -> None:
    if not enabled:
        return
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping SVG output", file=sys.stderr)
        return
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, y in ys.items():
        ax.plot(x, y, marker="o", label=label)
    ax.set_xlabel(xlabel)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# ---- subcommands -------------------------------------------------------------------

def cmd_multiplier_eval(cfg, out, args):
    rows = ex.multiplier_rows(cfg.curve_params(), cfg.quadrature_config(),
                              int(cfg.multiplier["points"]), cfg.seed)
    _write_csv(out / "multiplier.csv", rows)
    return 0


def cmd_hoelder(cfg, out, args):
    rep = hoelder_verify(cfg.curve_params(), cfg.hoelder["eta_grid"], cfg.quadrature_config())
    _write_json(out / "hoelder.json", rep.to_dict())
    rows = [{"eta": e, "dev_xi2_axis": a, "dev_xi1_axis": b}
            for e, a, b in zip(rep.eta_grid, rep.deviations_xi2_axis, rep.deviations_xi1_axis)]
    _write_dat(out / "hoelder.dat", ["eta", "dev_xi2_axis", "dev_xi1_axis"], rows)
    _maybe_svg(out / "hoelder.svg", np.log10(rep.eta_grid),
               {"log10 dev (xi2 axis)": np.log10(rep.deviations_xi2_axis),
                "log10 dev (xi1 axis)": np.log10(rep.deviations_xi1_axis)}, "log10 eta", args.svg)
    return 0


def cmd_symbol_check(cfg, out, args):
    rows = ex.symbol_rows(cfg.curve_params(), cfg.quadrature_config(), cfg.symbol["R_list"])
    _write_csv(out / "symbol.csv", rows)
    bad = [r for r in rows[1:] if not (r["err_ratio"] <= 0.7 and r["residual_ratio"] <= 0.7)]
    return 1 if bad else 0


def cmd_decompose_check(cfg, out, args):
    d = cfg.decompose
    rows = ex.decompose_rows(cfg.curve_params(), cfg.quadrature_config(), int(d["points"]),
                             cfg.seed, bool(d.get("check_residual", True)))
    _write_csv(out / "decompose.csv", rows)
    worst = max(r["identity_error"] for r in rows)
    trunc = max(r["truncation_error"] for r in rows)
    _write_json(out / "decompose.json", {"max_identity_error": worst, "max_truncation_error": trunc,
                                         "bound": 1e-6, "pass": worst <= 1e-6 and trunc <= 1e-8})
    return 0 if worst <= 1e-6 else 1


def cmd_transform(cfg, out, args):
    params = cfg.curve_params()
    if args.input:
        f = read_snapshot(args.input)
    else:
        g = cfg.grid
        rng = np.random.default_rng(cfg.seed)
        f = GridFunction2D(int(g["n1"]), int(g["n2"]), float(g["L1"]), float(g["L2"]),
                           rng.normal(size=(int(g["n1"]), int(g["n2"]))))
        write_snapshot(out / "input.bin", f)
    ev = MultiplierEvaluator(params, cfg.quadrature_config())
    if args.u is not None:
        h = hilbert_along_curve(f, ev, float(args.u))
        write_snapshot(out / "transform.bin", h)
        ratio = h.norm() / f.norm() if f.norm() > 0 else 0.0
        _write_json(out / "transform.json", {"mode": "single", "u": float(args.u), "norm_ratio": ratio})
    else:
        U = param_set_from_descriptor(cfg.param_set)
        mx = maximal_over_params(f, ev, U)
        write_snapshot(out / "transform.bin", f.like(mx.astype(complex)))
        ratio = float(np.sqrt(np.sum(mx**2) * f.cell_area)) / f.norm() if f.norm() > 0 else 0.0
        _write_json(out / "transform.json", {"mode": "maximal", "U": list(U.values),
                                             "norm_ratio": ratio})
    return 0


def cmd_cww(cfg, out, args):
    c = cfg.cww
    rows = ex.cww_rows(int(c["samples"]), int(c["depth"]), int(c["lambdas"]), c["epsilons"], cfg.seed)
    _write_csv(out / "cww.csv", rows)
    return 0 if all(r["pass"] for r in rows) else 1


def cmd_cotlar(cfg, out, args):
    c = cfg.cotlar
    rows = ex.cotlar_rows(int(c["n"]), int(c["family_size"]), cfg.seed, float(c["r"]),
                          float(c["delta"]))
    _write_csv(out / "cotlar.csv", rows)
    return 0 if all(r["ratio"] <= 2 for r in rows) else 1


def _kara_c_circ(cfg):
    k = cfg.kara
    if k.get("C_circ"):
        return float(k["C_circ"])
    return ex.measured_C_circ(cfg.curve_params(), cfg.hoelder["eta_grid"], cfg.quadrature_config())


def cmd_kara_build(cfg, out, args):
    k = cfg.kara
    C = _kara_c_circ(cfg)
    sel, fam, f, pieces, _ = ex.kara_pipeline(cfg.curve_params(), int(k["mu"]), int(k["n"]), C,
                                              k.get("eps"))
    target = out / "family"
    save_family(fam, target)
    write_snapshot(out / "family_f.bin", f)
    print(f"family with mu = {fam.mu} written to {target}")
    return 0


def _load_or_build(cfg, out, args):
    src = Path(args.family) if args.family else out / "family"
    if (src / "family.json").exists():
        fam = load_family(src)
    else:
        k = cfg.kara
        _, fam, _, _, _ = ex.kara_pipeline(cfg.curve_params(), int(k["mu"]), int(k["n"]),
                                           _kara_c_circ(cfg), k.get("eps"))
    f, pieces, _ = assemble(fam)
    return fam, f, pieces


def cmd_kara_verify(cfg, out, args):
    fam, f, pieces = _load_or_build(cfg, out, args)
    rep = verify_family(fam, f, pieces)
    _write_json(out / "kara_verify.json", rep.to_dict())
    return 0 if rep.passed else 1


def cmd_kara_lower(cfg, out, args):
    fam, f, pieces = _load_or_build(cfg, out, args)
    ev = MultiplierEvaluator(fam.params, cfg.quadrature_config())
    rep = lower_bound_experiment(fam, f, pieces, ev, require=False)
    _write_json(out / "kara_lower.json", rep.to_dict())
    return 0 if rep.bounds_ok else 1


def cmd_growth(cfg, out, args):
    rows = ex.run_growth(cfg)
    _write_csv(out / "growth.csv", [r.payload() for r in rows])
    _write_csv(out / "growth_timing.csv", [{"N": r.N, "runtime_ms": r.runtime_ms} for r in rows])
    fit = ex.growth_fit(rows)
    _write_json(out / "growth.json", {"rows": [r.payload() for r in rows], "fit": fit})
    _write_dat(out / "growth.dat", ["N", "estimate", "baseline"],
               [{"N": r.N, "estimate": r.estimate, "baseline": r.baseline} for r in rows])
    x = np.sqrt(np.log([r.N for r in rows]))
    _maybe_svg(out / "growth.svg", x, {"adversarial f": [r.estimate for r in rows],
                                      "random g": [r.baseline for r in rows]},
               "sqrt(log N)", args.svg)
    return 0 if fit["nondecreasing"] else 1


def cmd_selftest(cfg, out, args):
    return ex.run_selftest(args.level)


COMMANDS = {
    "multiplier-eval": (cmd_multiplier_eval, "sample m at random points (CSV)"),
    "hoelder": (cmd_hoelder, "Hoelder quotients of m at both axes"),
    "symbol-check": (cmd_symbol_check, "stationary-phase decay ratios"),
    "decompose-check": (cmd_decompose_check, "S + T_plus + T_minus identity sweep"),
    "transform": (cmd_transform, "apply H^(u) or the maximal operator to a grid snapshot"),
    "cww": (cmd_cww, "good-lambda inequality sweep over random martingales"),
    "cotlar": (cmd_cotlar, "Cotlar constant stability study"),
    "kara-build": (cmd_kara_build, "build and save the tree family"),
    "kara-verify": (cmd_kara_verify, "verify the tree family"),
    "kara-lower": (cmd_kara_lower, "lower-bound experiment on the tree family"),
    "growth": (cmd_growth, "lower estimates against the covering number"),
    "selftest": (cmd_selftest, "run the invariant suites"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curvemax", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", type=Path, help="JSON configuration file")
        s.add_argument("--out", type=Path, default=Path("curvemax_out"), help="output directory")
        s.add_argument("--seed", type=int, help="override the configured seed")
        s.add_argument("--svg", action="store_true", help="also render SVG plots")
        if name == "transform":
            s.add_argument("--input", type=Path, help="input grid snapshot")
            s.add_argument("--u", type=float, help="single parameter; default is the maximal operator")
        if name in ("kara-verify", "kara-lower"):
            s.add_argument("--family", type=Path, help="directory written by kara-build")
        if name == "selftest":
            s.add_argument("--level", choices=("fast", "full"), default="fast")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    raw = json.loads(args.config.read_text()) if args.config else {}
    if args.seed is not None:
        raw["seed"] = args.seed
    cfg = ex.ExperimentConfig.from_dict(raw)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    fn = COMMANDS[args.command][0]
    with sfft.set_workers(worker_count()):
        return int(fn(cfg, out, args))


if __name__ == "__main__":
    sys.exit(main())
