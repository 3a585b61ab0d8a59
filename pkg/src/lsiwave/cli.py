"""Command-line entry point.

Exit status: 0 when every check is within tolerance, 1 on a tolerance
violation or a failed run, 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import (ConfigError, ExperimentConfig, StabilityReport, load_config, perturb,
                          run_check, run_stability, run_sweep, trajectory, write_summary_csv,
                          write_trajectory_csv)
from .model import residual_cs1, solitary_state, write_profile
from .spectral import write_field_csv

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
PROFILE_TOL = 1e-8


def _table(rows):
    width = max((len(k) for k, _ in rows), default=0)
    for k, v in rows:
        if isinstance(v, float):
            v = f"{v:.6e}"
        elif isinstance(v, (list, tuple)):
            v = ", ".join(f"{x:.3e}" if isinstance(x, float) else str(x) for x in v)
        print(f"  {k:<{width}}  {v}")


def _outdir(args, cfg) -> Path:
    d = Path(args.out or cfg.outputs.dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _cmd_soliton(args, cfg):
    profile = cfg.profile()
    out = _outdir(args, cfg)
    csv_path, json_path = write_profile(out / "profile", profile)
    res = residual_cs1(profile)
    print("solitary-wave profile")
    _table([("csv", str(csv_path)), ("json", str(json_path)), ("Omega", profile.params.Omega),
            ("gamma", profile.params.gamma), ("ode residuals", res)])
    return EXIT_OK if max(res) < PROFILE_TOL else EXIT_VIOLATION


def _snapshot_writer(out):
    def write(state):
        tag = f"{state.t:.6g}"
        for name in ("phi", "psi", "w"):
            write_field_csv(out / f"snapshot_t{tag}_{name}.csv", state.grid, getattr(state, name))
    return write


def _cmd_evolve(args, cfg):
    profile = cfg.profile()
    out = _outdir(args, cfg)
    state, _ = perturb(solitary_state(profile), profile, cfg.perturbation)
    _, rows, failure = trajectory(state, profile, cfg, snapshot=_snapshot_writer(out))
    write_trajectory_csv(out / "trajectory.csv", rows)
    last = rows[-1]
    print("evolution")
    _table([("trajectory", str(out / "trajectory.csv")), ("records", len(rows)),
            ("final t", last["t"]), ("final rho", last["rho"]),
            ("status", "ok" if failure is None else f"blow-up at t={failure.t:.6g}")])
    return EXIT_OK if failure is None else EXIT_VIOLATION


def _report_rows(rep: StabilityReport):
    return [("delta", rep.delta), ("kind", rep.kind), ("seed", rep.seed),
            ("sup rho", rep.sup_rho), ("final rho", rep.final_rho),
            ("sup w dist (shared x0)", rep.sup_w_dist), ("sup w dist (own x0)", rep.sup_w_dist_min),
            ("drifts I1..I4", rep.invariant_drifts), ("drift L", rep.L_drift),
            ("delta L(0)", rep.delta_L0), ("runtime s", rep.runtime_s),
            ("status", rep.summary()["status"])]


def _report_json(rep: StabilityReport) -> dict:
    return {"delta": rep.delta, "kind": rep.kind, "seed": rep.seed, "sup_rho": rep.sup_rho,
            "final_rho": rep.final_rho, "sup_w_dist": rep.sup_w_dist,
            "sup_w_dist_min": rep.sup_w_dist_min, "invariant_drifts": list(rep.invariant_drifts),
            "L_drift": rep.L_drift, "mean_w_drift": rep.mean_w_drift, "delta_L0": rep.delta_L0,
            "initial_distance": rep.initial_distance, "runtime_s": rep.runtime_s,
            "failure_time": rep.failure_time, "ok": rep.ok}


def _cmd_stability(args, cfg):
    out = _outdir(args, cfg)
    rep = run_stability(cfg)
    write_trajectory_csv(out / "trajectory.csv", rep.rows)
    (out / "report.json").write_text(json.dumps(_report_json(rep), indent=2))
    print("stability run")
    _table(_report_rows(rep))
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def _cmd_sweep(args, cfg):
    out = _outdir(args, cfg)
    reports, fit = run_sweep(cfg, threads=args.threads)
    write_summary_csv(out / "sweep_summary.csv", reports)
    (out / "sweep_fit.json").write_text(json.dumps(fit, indent=2))
    print(f"sweep over {len(reports)} deltas ({cfg.perturbation.kind})")
    print(f"  {'delta':>10} {'sup_rho':>12} {'final_rho':>12} {'sup_w_dist':>12} {'delta_L0':>12}  status")
    summaries = [r.summary() if isinstance(r, StabilityReport) else r for r in reports]
    for s in summaries:
        print(f"  {s['delta']:>10.3e} {s['sup_rho']:>12.4e} {s['final_rho']:>12.4e} "
              f"{s['sup_w_dist']:>12.4e} {s['delta_L0']:>12.4e}  {s['status']}")
    _table([("quadratic coefficient a1", fit["a1"]), ("log-log slope", fit["loglog_slope"])])
    ok = all(s["status"] == "ok" for s in summaries)
    if reports and cfg.perturbation.preserve_mass and not fit["all_positive"]:
        ok = False
    return EXIT_OK if ok else EXIT_VIOLATION


def _cmd_check(args, cfg):
    out = _outdir(args, cfg)
    report = run_check(cfg)
    text = json.dumps(report, indent=2)
    (out / "check.json").write_text(text)
    print(text)
    return EXIT_OK if report["ok"] else EXIT_VIOLATION


COMMANDS = {
    "soliton": (_cmd_soliton, "write the solitary-wave profile (CSV + JSON)"),
    "evolve": (_cmd_evolve, "evolve the (perturbed) solitary wave; trajectory CSV and snapshots"),
    "stability": (_cmd_stability, "single perturbed-soliton stability run"),
    "sweep": (_cmd_sweep, "stability runs over sweep.deltas with summary CSV"),
    "check": (_cmd_check, "profile, operator and functional identity report (JSON)"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsiwave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", metavar="PATH", help="experiment config (key = value, dotted sections)")
        p.add_argument("--out", metavar="DIR", help="output directory (default outputs.dir)")
        p.add_argument("--seed", type=int, help="override perturbation.seed")
        p.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            cfg = cfg.with_overrides(perturbation={"seed": args.seed})
        return COMMANDS[args.command][0](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
