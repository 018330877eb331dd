"""Command-line experiment runner.

Each subcommand runs one named experiment, writes its CSV artifacts plus a
summary.json pairing every checked claim with a pass flag, and exits 0 only
if all claims pass (1 = claim failure, 2 = usage error, 3 = solver failure).
Options may come from a flat `key = value` config file; explicit flags
override it.  Serial runs are byte-reproducible; with --jobs > 1 rows are
computed in parallel but sorted before writing, so file contents do not
change.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics, cone, curvature, geodesy
from .warp import WarpParams, h_profile

__all__ = ["ExperimentConfig", "run", "main", "load_config"]

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3


def _int_list(text):
    return [int(x) for x in str(text).replace(",", " ").split()]


def _float_list(text):
    return [float(x) for x in str(text).replace(",", " ").split()]


# option name -> (type converter, default) per experiment
_COMMON_OPTIONS = {
    "alpha": (float, 0.5),
    "p": (str, "auto"),
    "seed": (int, 0),
    "jobs": (int, 0),          # 0 = use available cores
    "out_dir": (str, "out"),
}

_EXPERIMENT_OPTIONS = {
    "curvature-scan": {
        "r_min": (float, 1e-3),
        "r_max": (float, 1e4),
        "n_grid": (int, 500),
    },
    "growth": {
        "l_min": (int, 100),
        "l_max": (int, 1_000_000),
        "n_l": (int, 9),
        "fit_l_min": (float, 1000.0),
        "slope_tol": (float, 0.03),
    },
    "lemma-bounds": {
        "l_min": (int, 100),
        "l_max": (int, 1_000_000),
        "n_l": (int, 5),
    },
    "far-loop": {
        "s_list": (_float_list, [1e3, 1e4]),
        "eps_list": (_float_list, [0.3, 0.1, 0.03]),
    },
    "orbit-dimension": {
        "l_ref": (int, 10_000),
        "n_samples": (int, 60),
        "dim_tol": (float, 0.1),
    },
    "halfline": {
        "s_list": (_float_list, [1e3, 1e4, 1e5]),
    },
    "flatness": {
        "s": (float, 1e3),
        "rho_list": (_float_list, [0.1, 0.05, 0.025]),
        "n_points": (int, 64),
    },
    "oracle-check": {
        "l_list": (_int_list, [1, 3]),
        "mesh_nodes": (int, 250_000),
        "connectivity": (int, 16),
    },
}


@dataclass
class ExperimentConfig:
    """A fully resolved experiment invocation."""

    experiment: str
    alpha: float
    p: object = "auto"
    out_dir: str = "out"
    seed: int = 0
    jobs: int = 0
    options: dict = field(default_factory=dict)

    def resolve_params(self) -> WarpParams:
        if self.p == "auto" or self.p is None:
            return WarpParams(self.alpha, curvature.dimension_threshold(self.alpha))
        return WarpParams(self.alpha, int(self.p))


def load_config(path) -> dict:
    """Read a flat `key = value` config file (# starts a comment)."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


# ---------------------------------------------------------------------------
# deterministic artifact writing

def _fmt_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, fieldnames, rows):
    rows = sorted(rows, key=lambda r: tuple(r[f] for f in fieldnames))
    lines = [",".join(fieldnames)]
    for row in rows:
        lines.append(",".join(_fmt_cell(row[f]) for f in fieldnames))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _claim(text, ok, **details):
    return {"claim": text, "pass": bool(ok), "details": details}


# ---------------------------------------------------------------------------
# experiments

def _geometric_integers(lo, hi, n):
    vals = np.unique(np.rint(np.geomspace(lo, hi, n)).astype(np.int64))
    return [int(v) for v in vals]


def _growth_worker(task):
    alpha, p, l = task
    plane = geodesy.WarpedPlane(WarpParams(alpha, p))
    return l, geodesy.cover_distance(plane, 0.0, l)


def _map_tasks(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _sample_growth_parallel(params, ls, jobs):
    pairs = _map_tasks(_growth_worker, [(params.alpha, params.p, l) for l in ls], jobs)
    pairs.sort()
    return [asymptotics.DistanceSample(l=l, D=d) for l, d in pairs]


def _exp_curvature_scan(cfg: ExperimentConfig, params: WarpParams):
    opts = cfg.options
    grid = curvature.default_scan_grid(opts["r_min"], opts["r_max"], opts["n_grid"])
    scan = curvature.positivity_scan(params, grid)
    ric_H, ric_U, ric_V = curvature.ricci_components(params, grid)
    rows = [
        {
            "r": float(r),
            "ric_H": float(hh),
            "ric_U": float(uu),
            "ric_V": float(vv),
            "bound_rhs_H": float(bh),
            "bound_rhs_V": float(bv),
        }
        for r, hh, uu, vv, bh, bv in zip(
            grid, ric_H, ric_U, ric_V,
            curvature.bound_rhs_radial(params, grid),
            curvature.bound_rhs_circle(params, grid),
        )
    ]
    claims = [
        _claim(
            "diagonal Ricci curvature is positive at every grid point",
            scan.all_positive,
            min_ric_H=scan.min_ric_H, min_ric_U=scan.min_ric_U,
            min_ric_V=scan.min_ric_V,
            nonpositive_components=scan.nonpositive_components,
        ),
        _claim(
            "closed-form radial and circle lower bounds hold strictly",
            scan.bounds_ok,
            min_margin_bound_H=scan.min_margin_bound_H,
            min_margin_bound_V=scan.min_margin_bound_V,
        ),
        _claim(
            "p meets the positivity threshold max(4a+3, 16a^2+8a+1)",
            scan.threshold_ok,
            p=params.p, threshold=curvature.dimension_threshold(params.alpha),
        ),
    ]
    artifacts = {
        "ricci_grid.csv": (
            ["r", "ric_H", "ric_U", "ric_V", "bound_rhs_H", "bound_rhs_V"], rows,
        ),
    }
    extras = {"scan_report.json": scan.to_dict()}
    return artifacts, extras, claims


def _exp_growth(cfg: ExperimentConfig, params: WarpParams):
    opts = cfg.options
    ls = _geometric_integers(opts["l_min"], opts["l_max"], opts["n_l"])
    samples = _sample_growth_parallel(params, ls, cfg.jobs)
    q = params.growth_exponent
    c_lo = asymptotics.growth_lower_constant(params.alpha)
    rows = [
        {
            "l": s.l,
            "D": s.D,
            "lower_bound": c_lo * s.l ** q - 2.0,
            "upper_bound": asymptotics.growth_upper_constant() * s.l ** q,
        }
        for s in samples
    ]
    claims = []
    window = (opts["fit_l_min"], float(opts["l_max"]))
    fit = asymptotics.fit_exponent(samples, window)
    claims.append(_claim(
        "log-log slope of D(l) matches the exponent 1/(1+2*alpha)",
        abs(fit.slope - q) <= opts["slope_tol"],
        slope=fit.slope, expected=q, tolerance=opts["slope_tol"],
        r_squared=fit.r_squared, window=list(window),
    ))
    increasing = all(b.D > a.D for a, b in zip(samples, samples[1:]))
    claims.append(_claim(
        "cover distance increases with the winding count",
        increasing,
    ))
    artifacts = {"growth.csv": (["l", "D", "lower_bound", "upper_bound"], rows)}
    return artifacts, {}, claims


def _exp_lemma_bounds(cfg: ExperimentConfig, params: WarpParams):
    opts = cfg.options
    ls = _geometric_integers(opts["l_min"], opts["l_max"], opts["n_l"])
    samples = _sample_growth_parallel(params, ls, cfg.jobs)
    report = asymptotics.check_lemma_bounds(params, samples)
    rows = [
        {
            "l": c.l,
            "D": c.D,
            "lower": c.lower,
            "upper": c.upper,
            "sharper_upper": c.sharper_upper,
            "sigma_min": c.sigma_min,
            "in_range": c.in_range,
            "ok": c.ok,
        }
        for c in report.checks
    ]
    claims = [
        _claim(
            "distance sandwich and competitor bounds hold for every "
            "winding count above threshold",
            report.all_ok,
            l_threshold=report.l_threshold, n_in_range=report.n_in_range,
        ),
    ]
    artifacts = {
        "bounds.csv": (
            ["l", "D", "lower", "upper", "sharper_upper", "sigma_min",
             "in_range", "ok"], rows,
        ),
    }
    return artifacts, {}, claims


def _exp_far_loop(cfg: ExperimentConfig, params: WarpParams):
    opts = cfg.options
    rows = []
    length_ok = True
    ratios_ok = True
    details = []
    for s in opts["s_list"]:
        eps_sorted = sorted(opts["eps_list"], reverse=True)
        prev_ratio = None
        for pt in asymptotics.ratio_curve(params, s, eps_sorted):
            rows.append({
                "s": s,
                "epsilon": pt.epsilon,
                "l": pt.l,
                "length": pt.length,
                "size": pt.size,
                "ratio": pt.ratio,
                "analytic_ceiling": pt.analytic_ceiling,
            })
            norm = pt.length / (pt.epsilon * s)
            lo = asymptotics.far_lower_constant(params.alpha)
            length_ok &= lo <= norm <= 2.0 * math.pi * (1.0 + 1e-12)
            ratios_ok &= pt.ratio <= pt.analytic_ceiling
            if prev_ratio is not None:
                ratios_ok &= pt.ratio <= prev_ratio * (1.0 + 1e-9)
            prev_ratio = pt.ratio
            details.append({"s": s, "eps": pt.epsilon, "length_over_eps_s": norm})
    claims = [
        _claim(
            "far-loop length lies in [C*eps*s, 2*pi*eps*s]",
            length_ok, normalized_lengths=details,
        ),
        _claim(
            "size/length stays below the analytic ceiling and "
            "does not increase as eps shrinks",
            ratios_ok,
        ),
    ]
    artifacts = {
        "farloop.csv": (
            ["s", "epsilon", "l", "length", "size", "ratio", "analytic_ceiling"],
            rows,
        ),
    }
    return artifacts, {}, claims


def _exp_orbit_dimension(cfg: ExperimentConfig, params: WarpParams):
    opts = cfg.options
    metric = cone.build_orbit_metric(params, L_ref=opts["l_ref"], n_samples=opts["n_samples"])
    c1, c2 = cone.holder_scan(metric)
    q = params.growth_exponent
    orbit_rows = [
        {
            "b": float(b),
            "dhat": float(dh),
            "lower_band": c1 * float(b) ** q,
            "upper_band": c2 * float(b) ** q,
        }
        for b, dh in zip(metric.b, metric.dhat)
    ]
    scales = cone.default_box_scales(metric)
    box = cone.box_dimension(metric, scales)
    box_rows = [
        {"delta": float(d), "N": int(n), "fit_dimension": box.dimension}
        for d, n in zip(box.scales, box.counts)
    ]
    expected = 1.0 + 2.0 * params.alpha
    claims = [
        _claim(
            "orbit box-counting dimension matches 1 + 2*alpha",
            abs(box.dimension - expected) <= opts["dim_tol"],
            dimension=box.dimension, expected=expected, tolerance=opts["dim_tol"],
        ),
        _claim(
            "empirical power-law constants fall inside the sandwich band",
            asymptotics.growth_lower_constant(params.alpha) <= c1
            and c2 <= asymptotics.competitor_upper_constant(),
            C1_emp=c1, C2_emp=c2,
        ),
    ]
    cal_details = []
    cal_ok = True
    for theta in (1.0, 0.5, 1.0 / 3.0, 0.25):
        cal = cone.snowflake_oracle(theta, np.geomspace(0.02, 0.5, 20))
        cal_ok &= abs(cal.dimension - 1.0 / theta) <= 0.05
        cal_details.append({"theta": theta, "dimension": cal.dimension})
    claims.append(_claim(
        "snowflake oracle calibrates the estimator to 1/theta within 0.05",
        cal_ok, calibration=cal_details,
    ))
    artifacts = {
        "orbit.csv": (["b", "dhat", "lower_band", "upper_band"], orbit_rows),
        "boxcount.csv": (["delta", "N", "fit_dimension"], box_rows),
    }
    return artifacts, {}, claims


def _exp_halfline(cfg: ExperimentConfig, params: WarpParams):
    opts = cfg.options
    report = cone.halfline_limit_check(params, sorted(opts["s_list"]))
    rows = [
        {"s": s, "max_deviation": d, "circumference_bound": b}
        for s, d, b in zip(report.scales, report.max_deviation,
                           report.circumference_bound)
    ]
    claims = [
        _claim(
            "rescaled far distances collapse to the half-line metric",
            report.max_deviation[-1] <= 1e-2,
            max_deviation=list(report.max_deviation),
        ),
        _claim(
            "deviation shrinks monotonically with the scale",
            report.shrinking,
        ),
    ]
    artifacts = {
        "halfline.csv": (["s", "max_deviation", "circumference_bound"], rows),
    }
    return artifacts, {}, claims


def _exp_flatness(cfg: ExperimentConfig, params: WarpParams):
    opts = cfg.options
    rows = []
    for rho in sorted(opts["rho_list"], reverse=True):
        res = cone.flatness_off_orbit(
            params, opts["s"], rho, n_points=opts["n_points"], seed=cfg.seed,
        )
        rows.append({
            "s": res.s, "rho": res.rho,
            "normalized_distortion": res.normalized_distortion,
        })
    decreasing = all(
        a["normalized_distortion"] > b["normalized_distortion"]
        for a, b in zip(rows, rows[1:])
    )
    claims = [
        _claim(
            "chart distortion decreases as the ball shrinks",
            decreasing,
            distortions=[r["normalized_distortion"] for r in rows],
        ),
    ]
    artifacts = {
        "flatness.csv": (["s", "rho", "normalized_distortion"], rows),
    }
    return artifacts, {}, claims


def _exp_oracle_check(cfg: ExperimentConfig, params: WarpParams):
    opts = cfg.options
    plane = geodesy.WarpedPlane(params)
    rows = []
    all_ok = True
    for l in sorted(opts["l_list"]):
        arc = geodesy.solve_winding(plane, 0.0, 2.0 * math.pi * l)
        oracle, limit = geodesy.design_cover_oracle(
            params, l, n_nodes=opts["mesh_nodes"],
            connectivity=opts["connectivity"],
        )
        od = geodesy.oracle_distance(
            oracle, plane, (0.0, 0.0), (0.0, 2.0 * math.pi * l), limit=limit,
        )
        gap = abs(od - arc.length) / arc.length
        all_ok &= gap <= 0.03
        rows.append({
            "l": l, "alpha": params.alpha, "base_r": 0.0, "c": arc.c,
            "r_star": arc.r_star, "length": arc.length, "delta_t": arc.delta_t,
            "oracle_length": od, "rel_gap": gap,
        })
    claims = [
        _claim(
            "shortest-path oracle agrees with the geodesic solver within 3%",
            all_ok,
            gaps=[{"l": r["l"], "rel_gap": r["rel_gap"]} for r in rows],
            mesh_nodes=opts["mesh_nodes"], connectivity=opts["connectivity"],
        ),
    ]
    artifacts = {
        "oracle.csv": (
            ["l", "alpha", "base_r", "c", "r_star", "length", "delta_t",
             "oracle_length", "rel_gap"], rows,
        ),
    }
    return artifacts, {}, claims


_RUNNERS = {
    "curvature-scan": _exp_curvature_scan,
    "growth": _exp_growth,
    "lemma-bounds": _exp_lemma_bounds,
    "far-loop": _exp_far_loop,
    "orbit-dimension": _exp_orbit_dimension,
    "halfline": _exp_halfline,
    "flatness": _exp_flatness,
    "oracle-check": _exp_oracle_check,
}


def run(config: ExperimentConfig) -> int:
    """Run one experiment, write artifacts, and return the process exit code."""
    if config.experiment not in _RUNNERS:
        print(f"unknown experiment: {config.experiment}", file=sys.stderr)
        return EXIT_USAGE
    try:
        params = config.resolve_params()
    except (ValueError, TypeError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        artifacts, extras, claims = _RUNNERS[config.experiment](config, params)
    except (ValueError, TypeError) as exc:
        print(f"invalid experiment options: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except geodesy.SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        _write_json(out_dir / "summary.json", {
            "experiment": config.experiment,
            "alpha": config.alpha,
            "error": str(exc),
            "pass": False,
        })
        return EXIT_SOLVER

    for name, (fields, rows) in artifacts.items():
        _write_csv(out_dir / name, fields, rows)
    for name, payload in extras.items():
        _write_json(out_dir / name, payload)
    summary = {
        "experiment": config.experiment,
        "alpha": params.alpha,
        "p": params.p,
        "seed": config.seed,
        "parameters": {k: v for k, v in sorted(config.options.items())},
        "claims": claims,
        "pass": all(c["pass"] for c in claims),
    }
    _write_json(out_dir / "summary.json", summary)
    for c in claims:
        print(("PASS" if c["pass"] else "FAIL") + f"  {c['claim']}")
    return EXIT_PASS if summary["pass"] else EXIT_FAIL


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="warped-limit-lab",
        description="Run desk-scale experiments on the collapsing warped geometry.",
    )
    sub = parser.add_subparsers(dest="experiment")
    for name, schema in _EXPERIMENT_OPTIONS.items():
        p = sub.add_parser(name, help=f"{name} experiment")
        for key, (conv, default) in {**_COMMON_OPTIONS, **schema}.items():
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, dest=key, default=None,
                           help=f"default: {default}")
        p.add_argument("--config", default=None, help="flat key = value file")
    return parser


def _coerce(conv, value):
    if isinstance(value, str):
        return conv(value)
    return value


def build_config(argv=None) -> ExperimentConfig:
    """Parse argv (plus optional config file) into an ExperimentConfig."""
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if ns.experiment is None:
        parser.error("an experiment subcommand is required")
    file_cfg = load_config(ns.config) if getattr(ns, "config", None) else {}
    schema = {**_COMMON_OPTIONS, **_EXPERIMENT_OPTIONS[ns.experiment]}
    merged = {}
    for key, (conv, default) in schema.items():
        cli_val = getattr(ns, key, None)
        if cli_val is not None:
            merged[key] = _coerce(conv, cli_val)
        elif key in file_cfg:
            merged[key] = _coerce(conv, file_cfg[key])
        else:
            merged[key] = default
    unknown = set(file_cfg) - set(schema)
    if unknown:
        raise ValueError(f"unknown config keys for {ns.experiment}: {sorted(unknown)}")
    jobs = merged.pop("jobs")
    if jobs == 0:
        jobs = os.cpu_count() or 1
    p_raw = merged.pop("p")
    return ExperimentConfig(
        experiment=ns.experiment,
        alpha=merged.pop("alpha"),
        p="auto" if p_raw == "auto" else int(p_raw),
        out_dir=merged.pop("out_dir"),
        seed=merged.pop("seed"),
        jobs=jobs,
        options=merged,
    )


def main(argv=None) -> int:
    try:
        config = build_config(argv)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
