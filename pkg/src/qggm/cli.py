"""Batch front-end: simulate / fit / evaluate / roc / diagnose / check-prior / bench.

Stages hand off through plain files (CSV for data and plot-ready tables,
JSON for nested reports, a small binary for retained samples), so every
stage is restartable and diffable.  All science outputs are deterministic
under a fixed seed; wall-clock timing goes to its own file so reruns leave
summaries byte-identical.

Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import version_string
from .diagonal import estimate_diagonal
from .errors import ArtifactError, NumericalError, ValidationError
from .gibbs import GibbsConfig, run_chain
from .metrics import (
    EvalReport,
    contraction_rates,
    default_roc_levels,
    frobenius_error,
    gelman_rubin,
    monitored_scalars,
    roc_sweep,
    select_edges,
    tpr_fpr,
)
from .prior import PriorConditionSpec, check_concentration, check_thickness
from .rng import RngStream
from .sampio import (
    read_json,
    read_matrix_csv,
    read_samples,
    write_json,
    write_matrix_csv,
    write_samples,
)
from .simgen import PATTERN_KINDS, GroundTruth, PatternSpec, generate_pattern, sample_mvn
from .symmetrize import operator_l1_norm, resolve_symmetrize_mode, spectral_norm, symmetrize_l1

__all__ = ["main", "run_simulate", "run_fit", "run_evaluate", "run_roc", "run_diagnose"]


def _default_jobs() -> int:
    env = os.environ.get("QGGM_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"QGGM_JOBS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _resolved_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    for k, v in cfg.items():
        if isinstance(v, Path):
            cfg[k] = str(v)
        if isinstance(v, (list, tuple)):
            cfg[k] = [str(x) if isinstance(x, Path) else x for x in v]
    return cfg


def _meta(args) -> dict:
    return {"version": version_string(), "config": _resolved_config(args)}


def _csv_header_lines(args) -> str:
    return (
        f"# {version_string()}\n"
        f"# config: {json.dumps(_resolved_config(args), sort_keys=True)}\n"
    )


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _pattern_spec_from_args(args) -> PatternSpec:
    kw = {}
    if args.edge_prob is not None:
        kw["edge_prob"] = args.edge_prob
    if args.group_size is not None:
        kw["hub_group_size"] = args.group_size
    if args.clique_groups is not None:
        kw["clique_groups"] = args.clique_groups
    return PatternSpec(kind=args.pattern, p=args.p, seed=args.seed, **kw)


def run_simulate(args) -> Path:
    spec = _pattern_spec_from_args(args)  # validate before touching the disk
    out = Path(args.out)
    if out.exists() and any(out.iterdir()) and not args.force:
        raise ArtifactError(f"output directory {out} is not empty (use --force)")
    truth = generate_pattern(spec)
    out.mkdir(parents=True, exist_ok=True)

    files = []
    for r in range(args.reps):
        Y = sample_mvn(truth, args.n, RngStream(args.seed + r, 0))
        name = f"Y_{r:03d}.csv"
        write_matrix_csv(out / name, Y)
        files.append(name)

    write_json(out / "truth.json", {
        **_meta(args),
        "kind": spec.kind,
        "p": spec.p,
        "omega_star": truth.omega_star,
        "support": [list(ij) for ij in truth.support],
        "min_eig": truth.min_eig,
    })
    write_json(out / "manifest.json", {
        **_meta(args),
        "pattern_spec": spec.to_dict(),
        "n": args.n,
        "reps": args.reps,
        "seed": args.seed,
        "min_eig": truth.min_eig,
        "support_size": len(truth.support),
        "files": files,
    })
    return out


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def _load_truth(path) -> GroundTruth:
    doc = read_json(path)
    return GroundTruth(
        omega_star=np.asarray(doc["omega_star"], dtype=np.float64),
        support=tuple(tuple(ij) for ij in doc["support"]),
        min_eig=float(doc["min_eig"]),
    )


def fit_one(
    Y: np.ndarray,
    *,
    config: GibbsConfig,
    known_diag: bool,
    folds: int,
    levels: tuple,
    symmetrize_mode: str,
    omega_ref: np.ndarray | None,
    diag_jobs: int = 1,
):
    """Diagonal plug-in (unless known), chains, and symmetrization."""
    p = Y.shape[1]
    if known_diag:
        diag = np.ones(p)
        diag_est = None
    else:
        diag_est = estimate_diagonal(Y, folds=folds, seed=config.seed, jobs=diag_jobs)
        diag = diag_est.omega
    summary = run_chain(Y, diag, config, credible_levels=levels, omega_ref=omega_ref)
    mode_used = resolve_symmetrize_mode(p, symmetrize_mode)
    sym = symmetrize_l1(summary.mean, mode=mode_used)
    objective = operator_l1_norm(sym - summary.mean)
    return summary, diag_est, sym, mode_used, objective


def _summary_payload(args, summary, diag_est, sym, mode_used, objective, input_path, n):
    return {
        **_meta(args),
        "input": str(input_path),
        "truth": str(args.truth) if args.truth else None,
        "n": n,
        "p": summary.p,
        "n_chains": summary.n_chains,
        "n_kept_per_chain": summary.n_kept_per_chain,
        "diag_source": "ones" if diag_est is None else "estimated",
        "diag": summary.diag,
        "diag_estimate": diag_est.to_dict() if diag_est is not None else None,
        "levels": list(summary.levels),
        "posterior_mean": summary.mean,
        "symmetrized": sym,
        "symmetrize": {
            "requested": args.symmetrize,
            "used": mode_used,
            "objective": objective,
        },
        "lower": {repr(l): summary.lower[l] for l in summary.levels},
        "upper": {repr(l): summary.upper[l] for l in summary.levels},
        "ref_kind": summary.ref_kind,
        "frob_trace": summary.frob_trace,
        "tau2_trace": summary.tau2_trace,
        "monitored": monitored_scalars(summary, seed=args.seed),
        "samples_file": None if args.no_samples else "samples.bin",
    }


def _fit_single_input(args, input_path: Path, out_dir: Path, seed: int,
                      omega_ref, diag_jobs: int):
    Y = read_matrix_csv(input_path)
    config = GibbsConfig(
        n_iter=args.iters,
        burn_in=args.burn_in,
        thin=args.thin,
        seed=seed,
        n_chains=args.chains,
        column_parallel=args.column_parallel,
    )
    t0 = time.perf_counter()
    summary, diag_est, sym, mode_used, objective = fit_one(
        Y,
        config=config,
        known_diag=args.known_diag,
        folds=args.folds,
        levels=tuple(args.level),
        symmetrize_mode=args.symmetrize,
        omega_ref=omega_ref,
        diag_jobs=diag_jobs,
    )
    wall = time.perf_counter() - t0
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = _summary_payload(args, summary, diag_est, sym, mode_used,
                               objective, input_path, Y.shape[0])
    payload["config"]["seed"] = seed  # per-replicate seed actually used
    write_json(out_dir / "summary.json", payload)
    if not args.no_samples:
        write_samples(out_dir / "samples.bin", summary.samples)
    write_json(out_dir / "timing.json", {
        "wall_seconds": wall,
        "wall_minutes": wall / 60.0,
        "version": version_string(),
    })
    return out_dir


def run_fit(args) -> list:
    inputs = [Path(x) for x in args.input]
    omega_ref = _load_truth(args.truth).omega_star if args.truth else None
    out = Path(args.out)
    jobs = args.jobs

    if len(inputs) == 1:
        return [_fit_single_input(args, inputs[0], out, args.seed, omega_ref, jobs)]

    tasks = [
        (path, out / f"fit_{r:03d}", args.seed + r)
        for r, path in enumerate(inputs)
    ]
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futs = [
                pool.submit(_fit_single_input, args, path, dest, seed, omega_ref, 1)
                for path, dest, seed in tasks
            ]
            return [f.result() for f in futs]
    return [
        _fit_single_input(args, path, dest, seed, omega_ref, 1)
        for path, dest, seed in tasks
    ]


# ---------------------------------------------------------------------------
# evaluate / roc / diagnose
# ---------------------------------------------------------------------------

def _load_fit_summary(fit_dir: Path) -> dict:
    return read_json(Path(fit_dir) / "summary.json")


def _interval_matrices(doc: dict, level: float):
    key = repr(float(level))
    if key not in doc["lower"]:
        raise ValidationError(
            f"fit stores credible levels {list(doc['lower'])}, not {key}; "
            "re-run fit with --level or use roc on the sample stack"
        )
    return (
        np.asarray(doc["lower"][key], dtype=np.float64),
        np.asarray(doc["upper"][key], dtype=np.float64),
    )


def _select_from_doc(doc: dict, level: float) -> np.ndarray:
    lo, hi = _interval_matrices(doc, level)
    excludes = (lo > 0.0) | (hi < 0.0)
    sel = excludes | excludes.T
    np.fill_diagonal(sel, False)
    return sel


def evaluate_fit(fit_dir, truth: GroundTruth, level: float) -> EvalReport:
    """EvalReport for one fit directory against the generating truth."""
    doc = _load_fit_summary(fit_dir)
    sym = np.asarray(doc["symmetrized"], dtype=np.float64)
    p = sym.shape[0]
    sel = _select_from_doc(doc, level)
    tpr, fpr = tpr_fpr(sel, truth.support, p)
    eps_n, rate_sp = contraction_rates(p, int(doc["n"]), truth.support)
    rhat = None
    if int(doc["n_chains"]) >= 2:
        rhat = {
            name: gelman_rubin(np.asarray(series, dtype=np.float64))
            for name, series in doc["monitored"].items()
        }
    return EvalReport(
        frob_error=frobenius_error(sym, truth.omega_star),
        spectral_error=spectral_norm(sym - truth.omega_star),
        tpr=tpr,
        fpr=fpr,
        level=level,
        epsilon_n=eps_n,
        rate_spectral=rate_sp,
        gelman_rubin=rhat,
        tpr_defined=not math.isnan(tpr),
    )


def _read_wall_minutes(fit_dir: Path) -> float:
    timing = Path(fit_dir) / "timing.json"
    if timing.exists():
        return float(read_json(timing)["wall_minutes"])
    return math.nan


def run_evaluate(args) -> Path:
    truth = _load_truth(args.truth)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fits = [Path(f) for f in args.fits]

    reports = []
    method = args.method
    for k, fit_dir in enumerate(fits):
        doc = _load_fit_summary(fit_dir)
        if method is None:
            method = "quasiGHS-diag" if doc["diag_source"] == "ones" else "quasiGHS"
        rep = evaluate_fit(fit_dir, truth, args.level)
        payload = {**_meta(args), "fit_dir": str(fit_dir), **rep.to_dict(),
                   "wall_minutes": _read_wall_minutes(fit_dir)}
        write_json(out / f"report_{k:03d}.json", payload)
        reports.append(payload)

    pattern = args.pattern or read_json(args.truth).get("kind", "unknown")
    frob = np.array([r["frob_error"] for r in reports])
    tpr = np.array([r["tpr"] for r in reports])
    fpr = np.array([r["fpr"] for r in reports])
    wall = np.array([r["wall_minutes"] for r in reports])
    sd = lambda v: float(np.std(v, ddof=1)) if len(v) > 1 else 0.0

    lines = [_csv_header_lines(args).rstrip("\n")]
    lines.append(
        "pattern,method,n_fits,frob_mean,frob_sd,tpr_mean,tpr_sd,"
        "fpr_mean,fpr_sd,wall_minutes_mean"
    )
    cells = [
        float(frob.mean()), sd(frob),
        float(np.nanmean(tpr)), sd(tpr),
        float(np.nanmean(fpr)), sd(fpr),
        float(np.nanmean(wall)),
    ]
    lines.append(
        f"{pattern},{method},{len(reports)}," + ",".join(repr(c) for c in cells)
    )
    (out / "table.csv").write_text("\n".join(lines) + "\n")
    return out


def run_roc(args) -> Path:
    fit_dir = Path(args.fit)
    doc = _load_fit_summary(fit_dir)
    samples_file = doc.get("samples_file")
    if not samples_file:
        raise ArtifactError(
            f"fit at {fit_dir} was run with --no-samples; roc needs {fit_dir / 'samples.bin'}"
        )
    samples = read_samples(fit_dir / samples_file)
    if args.per_sample_symmetrize:
        samples = np.stack([symmetrize_l1(s, mode="heuristic") for s in samples])
    truth = _load_truth(args.truth)
    levels = default_roc_levels(args.num_levels)

    # carry only what roc_sweep needs
    from .gibbs import PosteriorSummary

    summary = PosteriorSummary(
        mean=samples.mean(axis=0),
        samples=samples,
        lower={},
        upper={},
        frob_trace=np.zeros((1, 1)),
        tau2_trace=np.zeros((1, 1)),
        kept_frob_norm=np.zeros((1, 1)),
        kept_tau2=np.zeros((1, 1)),
        diag=np.diagonal(samples[0]).copy(),
        levels=(),
        ref_kind="none",
        n_chains=int(doc["n_chains"]),
    )
    curve = roc_sweep(summary, truth.support, levels)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    header = _csv_header_lines(args)
    header += f"# columns: fpr,tpr at {args.num_levels} log-spaced levels in [0.01, 0.9999]\n"
    rows = "\n".join(f"{fpr!r},{tpr!r}" for _, fpr, tpr in curve)
    out.write_text(header + rows + "\n")
    return out


def run_diagnose(args) -> Path:
    fit_dir = Path(args.fit)
    doc = _load_fit_summary(fit_dir)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name in ("frob_trace", "tau2_trace"):
        trace = np.asarray(doc[name], dtype=np.float64)
        lines = [_csv_header_lines(args).rstrip("\n")]
        lines.append("iteration," + ",".join(f"chain_{c}" for c in range(trace.shape[0])))
        for t in range(trace.shape[1]):
            lines.append(str(t + 1) + "," + ",".join(repr(float(v)) for v in trace[:, t]))
        (out / f"{name}.csv").write_text("\n".join(lines) + "\n")

    rhat = None
    if int(doc["n_chains"]) >= 2:
        rhat = {
            name: gelman_rubin(np.asarray(series, dtype=np.float64))
            for name, series in doc["monitored"].items()
        }
    write_json(out / "rhat.json", {
        **_meta(args),
        "fit_dir": str(fit_dir),
        "n_chains": doc["n_chains"],
        "rhat": rhat,
        "pass_criterion": "rhat < 1.1 for all monitored scalars",
    })
    return out


# ---------------------------------------------------------------------------
# check-prior / bench
# ---------------------------------------------------------------------------

def run_check_prior(args) -> dict:
    spec = PriorConditionSpec(
        a_n=args.a_n, E_n=args.e_n, p=args.p, u=args.u, c=args.c, alpha=args.alpha
    )
    mass_outside, ok_a = check_concentration(spec, tol=args.tol)
    inf_density, ok_b = check_thickness(spec, tol=args.tol)
    record = {
        "alpha": spec.alpha,
        "a_n": spec.a_n,
        "E_n": spec.E_n,
        "p": spec.p,
        "u": spec.u,
        "c": spec.c,
        "mass_outside": mass_outside,
        "inf_density": inf_density,
        "passes_7a": ok_a,
        "passes_7b": ok_b,
    }
    if args.out:
        write_json(args.out, {**_meta(args), **record})
    else:
        print(json.dumps(record, indent=2, sort_keys=True))
    return record


def run_bench(args) -> dict:
    spec = PatternSpec(kind=args.pattern, p=args.p, seed=args.seed)
    truth = generate_pattern(spec)
    Y = sample_mvn(truth, args.n, RngStream(args.seed, 0))
    config = GibbsConfig(
        n_iter=args.iters, burn_in=args.burn_in, thin=args.thin,
        seed=args.seed, n_chains=args.chains,
        column_parallel=args.column_parallel,
    )
    t0 = time.perf_counter()
    fit_one(
        Y,
        config=config,
        known_diag=args.known_diag,
        folds=args.folds,
        levels=(0.5,),
        symmetrize_mode=args.symmetrize,
        omega_ref=truth.omega_star,
        diag_jobs=args.jobs,
    )
    wall = time.perf_counter() - t0
    record = {
        "pattern": args.pattern,
        "p": args.p,
        "n": args.n,
        "iters": args.iters,
        "chains": args.chains,
        "known_diag": args.known_diag,
        "wall_seconds": wall,
        "wall_minutes": wall / 60.0,
    }
    if args.out:
        write_json(args.out, {**_meta(args), **record})
    print(f"bench: fit completed in {wall / 60.0:.2f} minutes ({wall:.1f} s)")
    return record


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _add_common(sp):
    sp.add_argument("--seed", type=int, default=0, help="master seed")
    sp.add_argument("--config", type=str, default=None,
                    help="key = value file; command-line flags override it")
    sp.add_argument("--jobs", type=int, default=_default_jobs(),
                    help="worker pool size (env QGGM_JOBS, default: logical cores)")


def _add_chain_flags(sp):
    sp.add_argument("--iters", type=int, default=6000)
    sp.add_argument("--burn-in", type=int, default=1000, dest="burn_in")
    sp.add_argument("--thin", type=int, default=10)
    sp.add_argument("--chains", type=int, default=1)
    sp.add_argument("--column-parallel", action="store_true", dest="column_parallel")
    sp.add_argument("--known-diag", action="store_true", dest="known_diag",
                    help="skip plug-in estimation and use a unit diagonal")
    sp.add_argument("--folds", type=int, default=5, help="CV folds for the diagonal lasso")
    sp.add_argument("--symmetrize", choices=("exact", "heuristic", "auto"), default="auto")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qggm", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("simulate", help="generate pattern truth + datasets")
    sp.add_argument("--pattern", choices=PATTERN_KINDS, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--reps", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.add_argument("--force", action="store_true")
    sp.add_argument("--edge-prob", type=float, default=None, dest="edge_prob")
    sp.add_argument("--group-size", type=int, default=None, dest="group_size")
    sp.add_argument("--clique-groups", type=int, default=None, dest="clique_groups")
    _add_common(sp)
    sp.set_defaults(func=run_simulate)

    sp = sub.add_parser("fit", help="run the sampler on one or more data CSVs")
    sp.add_argument("--input", nargs="+", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--truth", default=None,
                    help="truth.json anchoring the Frobenius trace")
    sp.add_argument("--level", type=float, nargs="+", default=[0.5],
                    help="credible levels to store")
    sp.add_argument("--no-samples", action="store_true", dest="no_samples")
    _add_chain_flags(sp)
    _add_common(sp)
    sp.set_defaults(func=run_fit)

    sp = sub.add_parser("evaluate", help="join fits with truth into a results table")
    sp.add_argument("--fits", nargs="+", required=True)
    sp.add_argument("--truth", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--level", type=float, default=0.5)
    sp.add_argument("--pattern", default=None)
    sp.add_argument("--method", default=None)
    _add_common(sp)
    sp.set_defaults(func=run_evaluate)

    sp = sub.add_parser("roc", help="credible-level sweep to a plot-ready CSV")
    sp.add_argument("--fit", required=True)
    sp.add_argument("--truth", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--num-levels", type=int, default=200, dest="num_levels")
    sp.add_argument("--per-sample-symmetrize", action="store_true",
                    dest="per_sample_symmetrize",
                    help="heuristic-symmetrize each retained draw first")
    _add_common(sp)
    sp.set_defaults(func=run_roc)

    sp = sub.add_parser("diagnose", help="trace CSVs and Gelman-Rubin report")
    sp.add_argument("--fit", required=True)
    sp.add_argument("--out", required=True)
    _add_common(sp)
    sp.set_defaults(func=run_diagnose)

    sp = sub.add_parser("check-prior", help="concentration/thickness checks for alpha")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--a-n", type=float, required=True, dest="a_n")
    sp.add_argument("--e-n", type=float, required=True, dest="e_n")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--u", type=float, required=True)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--out", default=None)
    _add_common(sp)
    sp.set_defaults(func=run_check_prior)

    sp = sub.add_parser("bench", help="time a full fit end to end")
    sp.add_argument("--pattern", choices=PATTERN_KINDS, default="cliques")
    sp.add_argument("--p", type=int, default=100)
    sp.add_argument("--n", type=int, default=150)
    sp.add_argument("--out", default=None)
    _add_chain_flags(sp)
    _add_common(sp)
    sp.set_defaults(func=run_bench)

    return ap


def _read_config_file(path: str) -> list:
    """key = value lines -> CLI tokens (booleans toggle store_true flags)."""
    p = Path(path)
    if not p.exists():
        raise ArtifactError(f"config file {p} does not exist")
    tokens = []
    for lineno, raw in enumerate(p.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{p}: line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                tokens.append(flag)
        else:
            tokens.extend([flag, *value.split()])
    return tokens


def _inject_config(argv: list) -> list:
    if "--config" not in argv:
        return argv
    k = argv.index("--config")
    if k + 1 >= len(argv):
        raise ValidationError("--config requires a file path")
    tokens = _read_config_file(argv[k + 1])
    # config tokens go right after the subcommand so explicit flags win
    return argv[:1] + tokens + argv[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _inject_config(argv)
        args = build_parser().parse_args(argv)
        args.func(args)
        return 0
    except ValidationError as exc:
        print(f"qggm: validation error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"qggm: numerical failure: {exc}", file=sys.stderr)
        return 3
    except ArtifactError as exc:
        print(f"qggm: i/o error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"qggm: i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
