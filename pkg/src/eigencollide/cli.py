"""Batch CLI: experiment dispatch, result persistence, reproducibility metadata.

Result files (results.csv or results.jsonl) are a pure function of (config,
seed): no timestamps, no worker counts, floats printed with 17 significant
digits, rows in a fixed order. Run metadata that legitimately varies between
runs (timestamps, thread count, host info) goes to manifest.json instead, so
result files stay bit-identical across worker counts.

Flag > environment > config file > default, with environment variables
EIGENCOLLIDE_CONFIG, EIGENCOLLIDE_SEED, EIGENCOLLIDE_REPLICAS,
EIGENCOLLIDE_THREADS, EIGENCOLLIDE_OUT, EIGENCOLLIDE_FORMAT.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .capacity import (
    box_counting_dim,
    capacity_lower_bound,
    collision_regime,
    energy_integral,
    f_alpha,
    uniform_unit_interval,
)
from .config import ExperimentConfig, config_to_dict, parse_config
from .ensembles import n_beta
from .experiments import (
    degenerate_point_cloud,
    flattened_degenerate_sampler,
    gap_exponent_fit,
    oracle_vector_reduction,
    phase_sweep,
    refinement_study,
)
from .fields import covariance_matrix, fbm_model, interval, sample_field_exact
from .spectral import eigenprojection_contour, ordered_eigenvalues
from .streams import substream

_SUBCOMMANDS = ("simulate", "sweep", "gapfit", "capacity", "boxdim", "selfcheck")
_ENV_PREFIX = "EIGENCOLLIDE_"


def _fmt(v) -> str:
    """One CSV/JSON token; floats at 17 significant digits (exact round trip)."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return str(v)


def _json_token(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if np.isnan(v):
            return "NaN"  # python json convention; json.loads accepts it
        if np.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        return f"{v:.17g}"
    if v is None:
        return "null"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_json_token(x) for x in v) + "]"
    return json.dumps(str(v))


def _write_results(out_dir: str, fmt: str, records: list) -> str:
    os.makedirs(out_dir, exist_ok=True)
    if fmt == "csv":
        path = os.path.join(out_dir, "results.csv")
        # union of keys in first-seen order; record kinds may differ per row
        header = list(dict.fromkeys(k for rec in records for k in rec))
        lines = [",".join(header)]
        for rec in records:
            lines.append(",".join(_fmt(rec[k]) if k in rec else "" for k in header))
        body = "\n".join(lines) + "\n"
    else:
        path = os.path.join(out_dir, "results.jsonl")
        lines = []
        for rec in records:
            lines.append(
                "{"
                + ",".join(f"{json.dumps(k)}:{_json_token(v)}" for k, v in rec.items())
                + "}"
            )
        body = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(body)
    return path


def _write_manifest(out_dir, subcommand, config, seed, threads, fmt, started, finished):
    manifest = {
        "subcommand": subcommand,
        "artifact_version": __version__,
        "master_seed": seed,
        "worker_count": threads,
        "format": fmt,
        "started": started,
        "finished": finished,
        "config": config_to_dict(config),
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _resolve(flag_val, env_key, file_val, default, cast):
    if flag_val is not None:
        return cast(flag_val)
    env = os.environ.get(_ENV_PREFIX + env_key)
    if env is not None:
        return cast(env)
    if file_val is not None:
        return cast(file_val)
    return cast(default)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _stats_record(kind, config, hurst, st, **extra):
    rec = {
        "kind": kind,
        "beta": config.beta,
        "d": config.d,
        "hurst": float(hurst),
        "a": st.interval[0],
        "b": st.interval[1],
        "mesh_cells": st.intervals,
        "delta": st.delta,
        "replicas": st.replicas,
        "hits": st.hits,
        "p_hat": st.p_hat,
        "wilson_lo": st.wilson_lo,
        "wilson_hi": st.wilson_hi,
        "regime": collision_regime(config.beta, (hurst,)),
    }
    rec.update(extra)
    return rec


def _cmd_simulate(config: ExperimentConfig, threads: int) -> list:
    study = refinement_study(config, config.ladder(), threads=threads)
    (hurst,) = config.hurst
    return [
        _stats_record(
            "simulate",
            config,
            hurst,
            st,
            trend_last_over_first=study.trend_last_over_first,
            trend_top_pair=study.trend_top_pair,
        )
        for st in study.stats
    ]


def _cmd_sweep(config: ExperimentConfig, threads: int) -> list:
    section = config.extras.get("sweep", {})
    hurst_values = section.get("hurst_values")
    if not hurst_values:
        raise ValueError("sweep: config needs sweep.hurst_values (list of H)")
    result = phase_sweep(hurst_values, config, config.ladder(), threads=threads)
    records = []
    for h, regime, study in zip(result.hurst_values, result.regimes, result.studies):
        for st in study.stats:
            records.append(
                _stats_record(
                    "sweep",
                    config,
                    h,
                    st,
                    trend_last_over_first=study.trend_last_over_first,
                    trend_top_pair=study.trend_top_pair,
                    separation_ratio=result.separation_ratio,
                )
            )
    return records


def _cmd_gapfit(config: ExperimentConfig, threads: int) -> list:
    section = config.extras.get("gapfit", {})
    t0 = float(section.get("t0", 1.0))
    samples = int(section.get("samples", 100_000))
    default_window = (0.1, 0.5) if config.beta == 1 else (0.25, 0.9)
    window = tuple(section.get("window", default_window))
    fit = gap_exponent_fit(
        config.beta, config.d, t0, samples, window, config.seed,
        hurst=config.hurst[0],
    )
    return [
        {
            "kind": "gapfit",
            "beta": config.beta,
            "d": config.d,
            "t0": t0,
            "samples": samples,
            "window_lo": window[0],
            "window_hi": window[1],
            "slope": fit.slope,
            "stderr": fit.stderr,
            "expected_slope": float(config.beta + 1),
        }
    ]


def _cmd_capacity(config: ExperimentConfig, threads: int) -> list:
    section = config.extras.get("capacity", {})
    alpha = float(section.get("alpha", 0.5))
    pairs = int(section.get("pairs", 200_000))
    div_alpha = float(section.get("divergent_alpha", 1.5))
    oracle_pairs = int(section.get("oracle_pairs", 1_000_000))
    records = []
    est = energy_integral(uniform_unit_interval, 0.5, oracle_pairs, config.seed)
    ref = 8.0 / 3.0
    records.append(
        {
            "kind": "energy_unit_interval",
            "alpha": 0.5,
            "pairs": oracle_pairs,
            "value": est.value,
            "stderr": est.stderr,
            "divergent_pairs": est.divergent_pairs,
            "reference": ref,
            "z_score": (est.value - ref) / est.stderr if est.stderr > 0 else np.nan,
        }
    )
    sampler = flattened_degenerate_sampler(config.d, config.beta)
    for a in (alpha, div_alpha):
        cb = capacity_lower_bound(sampler, a, pairs, config.seed)
        records.append(
            {
                "kind": "degenerate_chart_bound",
                "alpha": a,
                "pairs": pairs,
                "value": cb.bound,
                "stderr": cb.energy.stderr,
                "divergent_pairs": cb.energy.divergent_pairs,
                "energy": cb.energy.value,
                "divergent": cb.divergent,
            }
        )
    return records


def _cmd_boxdim(config: ExperimentConfig, threads: int) -> list:
    section = config.extras.get("boxdim", {})
    npoints = int(section.get("points", 4000))
    nscales = int(section.get("nscales", 6))
    cloud = degenerate_point_cloud(npoints, config.d, config.beta, config.seed)
    span = float(np.linalg.norm(cloud.max(axis=0) - cloud.min(axis=0)))
    scales = np.geomspace(span / 256, span / 4, nscales)
    res = box_counting_dim(cloud, scales)
    return [
        {
            "kind": "boxdim_degenerate",
            "beta": config.beta,
            "d": config.d,
            "points": npoints,
            "nscales": nscales,
            "slope": res.slope,
            "fit_residual": res.residual,
            "expected_slope": float(n_beta(1, config.d) - 2) if config.beta == 1 else float(n_beta(2, config.d) - 3),
        }
    ]


def _cmd_selfcheck(config: ExperimentConfig, threads: int) -> list:
    """Quick composition of the documented checks; small sizes, fixed seeds."""
    records = []

    # covariance exactness of the reference sampler
    grid = interval(1.0, 2.0, 8)
    model = fbm_model(0.5)
    sample = sample_field_exact(grid, model, config.seed, 2000)
    R = covariance_matrix(grid, model)
    S = sample.values.T @ sample.values / sample.replicas
    se = np.sqrt((np.outer(np.diag(R), np.diag(R)) + R**2) / sample.replicas)
    cov_err = float(np.max(np.abs(S - R) / (5.0 * se)))
    records.append(
        {
            "kind": "selfcheck",
            "name": "covariance_exactness",
            "statistic": cov_err,
            "threshold": 1.0,
            "passed": cov_err <= 1.0,
        }
    )

    # d = 2 closed-form oracle against the eigensolver pipeline
    for beta in (1, 2):
        cfg = config.replace(
            beta=beta, d=2, hurst=(0.3,), interval=(1.0, 2.0),
            intervals=256, replicas=100, shift=None,
        )
        disc = oracle_vector_reduction(beta, cfg, threads=threads)
        records.append(
            {
                "kind": "selfcheck",
                "name": f"d2_oracle_beta{beta}",
                "statistic": disc,
                "threshold": 1e-10,
                "passed": disc <= 1e-10,
            }
        )

    # contour projector idempotence and solver agreement
    rng = substream(config.seed, 99)
    worst_frob = 0.0
    worst_idem = 0.0
    done = 0
    while done < 50:
        G = rng.standard_normal((4, 4))
        M = 0.5 * (G + G.T)
        lam = ordered_eigenvalues(M)
        if lam[0] - lam[1] < 0.2:
            continue
        proj = eigenprojection_contour(M, (0,))
        P = proj.matrix
        _, V = np.linalg.eigh(M)
        top = V[:, -1:]
        direct = top @ top.T
        worst_frob = max(worst_frob, float(np.linalg.norm(P - direct)))
        worst_idem = max(worst_idem, float(np.linalg.norm(P @ P - P)))
        done += 1
    records.append(
        {
            "kind": "selfcheck",
            "name": "projector_vs_solver",
            "statistic": worst_frob,
            "threshold": 1e-8,
            "passed": worst_frob <= 1e-8,
        }
    )
    records.append(
        {
            "kind": "selfcheck",
            "name": "projector_idempotence",
            "statistic": worst_idem,
            "threshold": 1e-6,
            "passed": worst_idem <= 1e-6,
        }
    )
    return records


_DISPATCH = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "gapfit": _cmd_gapfit,
    "capacity": _cmd_capacity,
    "boxdim": _cmd_boxdim,
    "selfcheck": _cmd_selfcheck,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigencollide",
        description="Eigenvalue-collision Monte Carlo for matrix-valued fractional Gaussian processes",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config path")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--replicas", type=int, help="replica count override")
        p.add_argument("--threads", type=int, help="worker threads (default 1)")
        p.add_argument("--out", help="output directory (default .)")
        p.add_argument("--format", choices=("csv", "jsonl"), help="results format")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    t0 = time.monotonic()
    try:
        config_path = args.config or os.environ.get(_ENV_PREFIX + "CONFIG")
        config = parse_config(config_path) if config_path else ExperimentConfig()
        seed = _resolve(args.seed, "SEED", config.seed, config.seed, int)
        replicas = _resolve(args.replicas, "REPLICAS", config.replicas, config.replicas, int)
        threads = _resolve(args.threads, "THREADS", None, 1, int)
        out_dir = _resolve(args.out, "OUT", None, ".", str)
        fmt = _resolve(args.format, "FORMAT", None, "csv", str)
        if fmt not in ("csv", "jsonl"):
            raise ValueError(f"format: must be csv or jsonl, got {fmt}")
        config = config.replace(seed=seed, replicas=replicas)
        records = _DISPATCH[args.subcommand](config, threads)
        path = _write_results(out_dir, fmt, records)
        finished = datetime.datetime.now(datetime.timezone.utc).isoformat()
        _write_manifest(out_dir, args.subcommand, config, seed, threads, fmt, started, finished)
    except (ValueError, NotImplementedError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    elapsed = time.monotonic() - t0
    failed = [r for r in records if r.get("passed") is False]
    if args.subcommand == "selfcheck":
        for r in records:
            status = "PASS" if r["passed"] else "FAIL"
            print(f"{status}  {r['name']}: statistic {r['statistic']:.3g} vs {r['threshold']:.3g}")
    print(f"{args.subcommand}: {len(records)} record(s) -> {path} ({elapsed:.1f}s)")
    if failed:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
