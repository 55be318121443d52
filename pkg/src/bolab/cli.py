"""Batch front door: simulate / actions / certificate / sweep / validate.

Exit codes: 0 success, 1 runtime failure (blowup, missing inputs), 2
configuration error.  Every command that writes results drops a
manifest.json with the full config echo so a directory can be re-run
from its manifest alone, and renders a PNG report next to the delimited
output.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import lax, pde, storage
from . import resonance as rs
from .birkhoff import ReferenceTorus
from .config import ExperimentConfig, load_config
from .errors import BlowupDetected, BolabError, ConfigError


def _manifest_doc(cfg: ExperimentConfig, command: str, epsilon: float,
                  wall_time: float, extra: dict | None = None) -> dict:
    doc = {
        "command": command,
        "version": __version__,
        "epsilon_used": epsilon,
        "wall_time_s": wall_time,
        "config": cfg.to_dict(),
    }
    doc.update(extra or {})
    return doc


def _say(quiet: bool, *parts) -> None:
    if not quiet:
        print(*parts)


def cmd_simulate(cfg: ExperimentConfig, out_dir: Path, quiet: bool = False,
                 epsilon: float | None = None, figures: bool = True) -> Path:
    """Run one simulation; write trajectory CSV, coefficient dumps, manifest."""
    from .figures import save_trajectory_figure

    out_dir.mkdir(parents=True, exist_ok=True)
    epsilon = cfg.epsilon[0] if epsilon is None else epsilon
    pert = cfg.perturbation_for(epsilon)
    u0 = cfg.initial_state()
    integ = pde.IntegratorConfig(dt=cfg.dt, T=cfg.T, grid=cfg.grid,
                                 sample_stride=cfg.sample_stride)
    started = time.perf_counter()
    try:
        traj = pde.evolve(u0, pert, integ)
    except BlowupDetected as err:
        storage.write_manifest(out_dir / "manifest.json", _manifest_doc(
            cfg, "simulate", epsilon, time.perf_counter() - started,
            {"blowup_time": err.time, "blowup_peak": err.max_coeff, "ok": False}))
        raise
    G = integ.grid_for(u0.M)
    rows = [pde.observables(traj.state(i), pert, G) for i in range(len(traj))]
    storage.write_trajectory_csv(out_dir / "trajectory.csv", traj.times, rows)
    storage.write_run_dumps(out_dir, traj)
    h0 = rows[0]["H_total"] or 1.0
    drift = max(abs(r["H_total"] - rows[0]["H_total"]) for r in rows) / abs(h0)
    storage.write_manifest(out_dir / "manifest.json", _manifest_doc(
        cfg, "simulate", epsilon, time.perf_counter() - started,
        {"ok": True, "samples": len(traj), "H_total_rel_drift": drift}))
    if figures:
        save_trajectory_figure(traj.times, rows, out_dir / "trajectory.png")
    _say(quiet, f"simulate: {len(traj)} samples, H_total relative drift {drift:.3e} -> {out_dir}")
    return out_dir


def reference_from_state(state: pde.RealState, cfg: ExperimentConfig,
                         epsilon: float) -> tuple[ReferenceTorus, rs.StabilityCertificate]:
    """Certificate pipeline at a measured state; its resonant torus is the reference."""
    est = lax.extract_gaps(state, cfg.n_max, M_L=cfg.M_L)
    gamma0 = est.gaps[: cfg.N]
    n = np.arange(1, cfg.n_max + 1)
    tail_energy = float(np.sum((n * n * est.gaps)[cfg.N:]))
    cert = rs.full_certificate(
        gamma0, tail_energy, epsilon, cfg.E_m, cfg.E_M,
        rs.CertificateConstants(**cfg.constants))
    gamma_ref = np.asarray(cert.gammaStar)
    if not cert.torus_valid or np.any(gamma_ref <= 0.0):
        gamma_ref = gamma0  # degenerate approximant: measure against the initial torus
    return ReferenceTorus.from_gaps(gamma_ref), cert


def cmd_actions(cfg: ExperimentConfig, run_dir: Path, quiet: bool = False,
                jobs: int = 1, figures: bool = True) -> dict:
    """Extract the action trajectory of a finished run directory."""
    from .figures import save_actions_figure

    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise BolabError(f"missing manifest.json under {run_dir}; run simulate first")
    manifest = storage.read_manifest(manifest_path)
    epsilon = manifest.get("epsilon_used", cfg.epsilon[0])
    traj = storage.read_run_dumps(run_dir)
    started = time.perf_counter()
    ref, cert = reference_from_state(traj.state(0), cfg, epsilon)
    actions = lax.actions_along(traj, ref, n_max=cfg.n_max, M_L=cfg.M_L, jobs=jobs)
    actions.to_csv(run_dir / "actions.csv")
    summary = actions.summary()
    summary.update({"epsilon": epsilon, "Rsq": cert.Rsq, "q": cert.q,
                    "wall_time_s": time.perf_counter() - started})
    (run_dir / "actions_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if figures:
        save_actions_figure(actions, run_dir / "actions.png")
    _say(quiet, f"actions: max drift {summary['max_drift']:.3e}, "
                f"tail max {summary['tail_max']:.3e} -> {run_dir}")
    return summary


def cmd_certificate(cfg: ExperimentConfig, out_dir: Path, quiet: bool = False) -> rs.StabilityCertificate:
    """Evaluate the stability certificate for configured target gaps."""
    if "target_gaps" not in cfg.initial_data:
        raise ConfigError("certificate needs initial_data.target_gaps")
    out_dir.mkdir(parents=True, exist_ok=True)
    gamma0 = cfg.initial_data["target_gaps"]
    if len(gamma0) != cfg.N:
        raise ConfigError(f"expected {cfg.N} target gaps, got {len(gamma0)}")
    cert = rs.full_certificate(gamma0, cfg.tail_energy, cfg.epsilon[0], cfg.E_m,
                               cfg.E_M, rs.CertificateConstants(**cfg.constants))
    (out_dir / "certificate.json").write_text(cert.to_json() + "\n")
    if not quiet:
        print(f"certificate: q={cert.q} Q={cert.Q:.6g} R^2={cert.Rsq:.6g} "
              f"eps2={cert.eps2:.6g} mu={cert.mu:.6g}")
        print(f"  T_normalform={cert.time_estimate_normalform:.6g} "
              f"T_theorem={cert.time_estimate_theorem:.6g} (constants configurable)")
        width = max(len(k) for k in cert.hypothesis_flags)
        for name, flag in cert.hypothesis_flags.items():
            mark = "pass" if flag["passed"] else "FAIL"
            rel = "<" if flag["strict"] else "<="
            print(f"  {name:<{width}}  {mark}  {flag['lhs']:.6g} {rel} {flag['rhs']:.6g}")
    return cert


def _sweep_one(args) -> dict:
    cfg_doc, out_dir, index, epsilon, quiet = args
    from .config import config_from_dict

    cfg = config_from_dict(cfg_doc)
    run_dir = Path(out_dir) / f"eps_{index:02d}"
    try:
        cmd_simulate(cfg, run_dir, quiet=True, epsilon=epsilon, figures=False)
        summary = cmd_actions(cfg, run_dir, quiet=True, figures=False)
        summary.update({"ok": True, "index": index, "dir": str(run_dir)})
    except BolabError as err:
        summary = {"ok": False, "index": index, "epsilon": epsilon,
                   "dir": str(run_dir), "error": str(err)}
    if not quiet:
        print(f"  eps={epsilon:g}: " + (
            f"max drift {summary['max_drift']:.3e}" if summary["ok"]
            else f"FAILED ({summary['error']})"))
    return summary


def cmd_sweep(cfg: ExperimentConfig, out_dir: Path, quiet: bool = False,
              jobs: int = 1, figures: bool = True) -> dict:
    """Simulate + extract for every epsilon; fit and check the scaling law."""
    from .figures import save_sweep_figure

    if len(cfg.epsilon) < 3:
        raise ConfigError("sweep needs at least 3 epsilon values")
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    tasks = [(cfg.to_dict(), str(out_dir), i, float(e), quiet)
             for i, e in enumerate(cfg.epsilon)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_sweep_one, tasks))
    else:
        runs = [_sweep_one(t) for t in tasks]

    exponent = 1.0 / (2.0 * (cfg.N + 1))
    ok_runs = [r for r in runs if r["ok"]]
    notes = [f"run {r['index']} failed: {r['error']}" for r in runs if not r["ok"]]
    report = {"exponent": exponent, "runs": runs, "notes": notes, "slope": None,
              "slopes": [], "bound_check": None, "C_drift": None, "C_tail": None}
    if ok_runs:
        eps = np.array([r["epsilon"] for r in ok_runs])
        drift = np.array([r["max_drift"] for r in ok_runs])
        tail = np.array([r["tail_max"] for r in ok_runs])
        if np.allclose(eps, eps[0]):
            notes.append("DegenerateSweep: all epsilon equal, slope fit rejected")
        else:
            logeps = np.log(eps)
            logdrift = np.log(np.maximum(drift, 1e-300))
            slope = float(np.polyfit(logeps, logdrift, 1)[0])
            report["slope"] = slope
            order = np.argsort(eps)
            report["slopes"] = [
                float((logdrift[order][i + 1] - logdrift[order][i])
                      / (logeps[order][i + 1] - logeps[order][i]))
                for i in range(len(order) - 1)]
            big = int(np.argmax(eps))
            C_drift = drift[big] / eps[big] ** exponent
            C_tail = tail[big] / eps[big] ** exponent
            report["C_drift"] = float(C_drift)
            report["C_tail"] = float(C_tail)
            report["bound_check"] = bool(
                np.all(drift <= C_drift * eps**exponent * (1 + 1e-12))
                and np.all(tail <= C_tail * eps**exponent * (1 + 1e-12)))
            order = np.argsort(eps)
            report["monotone"] = bool(np.all(np.diff(drift[order]) >= -1e-15))
    report["wall_time_s"] = time.perf_counter() - started
    (out_dir / "sweep_report.json").write_text(json.dumps(report, indent=2) + "\n")
    if figures:
        save_sweep_figure(report, out_dir / "sweep.png")
    _say(quiet, f"sweep: slope={report['slope']}, bound_check={report['bound_check']}, "
                f"notes={notes or 'none'} -> {out_dir}")
    return report


def cmd_validate(names=None, quiet: bool = False) -> bool:
    from .validate import run_checks

    results = run_checks(names)
    width = max(len(name) for name, _, _ in results)
    all_ok = True
    for name, ok, detail in results:
        all_ok &= ok
        _say(quiet, f"{name:<{width}}  {'pass' if ok else 'FAIL'}  {detail}")
    return all_ok


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bolab",
        description="Benjamin-Ono numerical laboratory: simulation, action "
                    "extraction, and stability certificates.")
    parser.add_argument("--config", help="experiment config JSON")
    parser.add_argument("--out", help="output directory (overrides config out_dir)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel runs/eigensolves")
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", help="integrate the configured equation")
    p_act = sub.add_parser("actions", help="extract actions from a run directory")
    p_act.add_argument("rundir", nargs="?", help="simulate output dir (default: out dir)")
    sub.add_parser("certificate", help="evaluate the stability certificate")
    sub.add_parser("sweep", help="scaling sweep over the epsilon list")
    p_val = sub.add_parser("validate", help="run the fast built-in property suite")
    p_val.add_argument("--only", help="comma-separated subset of checks")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            names = args.only.split(",") if args.only else None
            try:
                ok = cmd_validate(names, quiet=args.quiet)
            except KeyError as err:
                print(f"error: {err}", file=sys.stderr)
                return 2
            return 0 if ok else 1

        if not args.config:
            print("error: --config is required for this command", file=sys.stderr)
            return 2
        cfg = load_config(args.config)
        out_dir = Path(args.out or cfg.out_dir)
        if args.command == "simulate":
            cmd_simulate(cfg, out_dir, quiet=args.quiet)
        elif args.command == "actions":
            cmd_actions(cfg, Path(args.rundir or out_dir), quiet=args.quiet, jobs=args.jobs)
        elif args.command == "certificate":
            cmd_certificate(cfg, out_dir, quiet=args.quiet)
        elif args.command == "sweep":
            cmd_sweep(cfg, out_dir, quiet=args.quiet, jobs=args.jobs)
        return 0
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except BolabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
