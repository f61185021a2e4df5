"""Command-line entry: run scenarios, batch over seeds, verify runs, serve live.

Summaries are reproducible: everything except wall time is a pure function of
(config, seed), and a trace replayed through `verify` yields the same numbers.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from pathlib import Path
from statistics import median

import numpy as np

from . import analysis, trace_io
from .scenario import ScenarioConfig, ScenarioError, load_scenario, reference_scenario
from .simulate import SimulationResult, replay_result, run_scenario

SUMMARY_SCHEMA = 1

# hard-failure threshold for the recursion identities on noiseless runs;
# healthy runs sit near float precision (<= 1e-9), so 1e-6 means real breakage
RESIDUAL_HARD_LIMIT = 1e-6


def _load(scenario: str | None) -> ScenarioConfig:
    if scenario is None:
        return reference_scenario()
    return load_scenario(scenario)


def build_summary(result: SimulationResult, metrics_window: int | None = None) -> dict:
    """Assemble the machine-readable run summary (wall time reported apart)."""
    cfg = result.config
    gates = analysis.evaluate_gates(cfg)
    est_residual = analysis.verify_estimator_recursion(result)
    as_report = analysis.verify_as_recursion(result)
    gain_dev = analysis.verify_gain_identity(result)

    n_rev = cfg.controller.period_steps
    excitation = None
    within = None
    b_check = np.full((2, 2), np.inf)  # no window: bound constants stay unbounded
    if len(result.records) >= n_rev:
        exc = analysis.excitation_from_result(result)
        within = analysis.cov_inv_within_bounds(result, exc)
        b_check = exc.b_check
        excitation = {
            "N": n_rev,
            "theta_hat": exc.theta_hat,
            "theta_check": exc.theta_check,
            "b_hat_min_eig": float(np.min(np.linalg.eigvalsh(exc.b_hat))),
            "b_check_max_eig": (float(np.max(np.linalg.eigvalsh(exc.b_check)))
                                if np.all(np.isfinite(exc.b_check)) else float("inf")),
        }
    bounds = analysis.theoretical_bounds(cfg, b_check)

    window = metrics_window if metrics_window is not None \
        else min(len(result.records), max(1, len(result.records) - 50))
    metrics = analysis.encirclement_metrics(
        result.records, window=window, exclude_after_impulse=cfg.target.gap_min)
    mdict = metrics.to_dict()
    mdict["recovery_ticks"] = [t if t is not None else -1 for t in mdict["recovery_ticks"]]

    return {
        "schema": SUMMARY_SCHEMA,
        "config_digest": cfg.digest(),
        "seed": result.seed,
        "steps": len(result.records),
        "noiseless": cfg.range_noise_std == 0.0,
        "gates": gates.to_dict(),
        "residuals": {
            "estimator_recursion": est_residual,
            "as_recursion": as_report.max_residual,
            "as_steps_checked": as_report.steps_checked,
            "as_steps_excluded": as_report.steps_excluded,
            "gain_identity": gain_dev,
        },
        "excitation": excitation,
        "cov_inv_within_bounds": within,
        "bounds": bounds.to_dict(),
        "metrics": mdict,
    }


def _print_gates(gates: dict, out) -> None:
    for name, chk in gates.items():
        print(f"  {name:24s} {chk['verdict']:4s}  value={chk['value']:.6g}  "
              f"[{chk['condition']}]", file=out)


def _print_summary(summary: dict, wall_time: float, out) -> None:
    print(f"run: digest={summary['config_digest']} seed={summary['seed']} "
          f"steps={summary['steps']} wall={wall_time:.3f}s", file=out)
    _print_gates(summary["gates"], out)
    r = summary["residuals"]
    print(f"  residuals: estimator={r['estimator_recursion']:.3e} "
          f"as={r['as_recursion']:.3e} (checked {r['as_steps_checked']}, "
          f"excluded {r['as_steps_excluded']}) gain_identity={r['gain_identity']:.3e}",
          file=out)
    m = summary["metrics"]
    print(f"  tail window {m['window']}: max|est err|={m['max_est_err']:.4f} "
          f"max|as err|={m['max_as_err']:.4f} radii=({m['median_radius1']:.3f}, "
          f"{m['median_radius2']:.3f}) antipodal={m['median_antipodal_angle']:.3f} rad",
          file=out)
    if summary["cov_inv_within_bounds"] is not None:
        print(f"  cov_inv within excitation bounds: {summary['cov_inv_within_bounds']}",
              file=out)


def cmd_run(args) -> int:
    cfg = _load(args.scenario)
    result = run_scenario(cfg, seed=args.seed)
    out_path = Path(args.out)
    trace_io.write_trace(out_path, result, fmt=args.format)
    summary = build_summary(result)
    summary_path = Path(args.summary) if args.summary else out_path.with_suffix(
        out_path.suffix + ".summary.json")
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _print_summary(summary, result.wall_time, sys.stdout)
    print(f"trace -> {out_path}\nsummary -> {summary_path}")
    return 0


def _parse_seeds(spec: str) -> list[int]:
    seeds: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ScenarioError(f"no seeds in spec {spec!r}")
    return seeds


def _one_batch_run(cfg: ScenarioConfig, seed: int) -> dict:
    result = run_scenario(cfg, seed=seed)
    summary = build_summary(result)
    summary["wall_time_s"] = result.wall_time
    return summary


def cmd_batch(args) -> int:
    cfg = _load(args.scenario)
    seeds = _parse_seeds(args.seeds)
    rows: dict[int, dict] = {}
    failures: dict[int, str] = {}
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {pool.submit(_one_batch_run, cfg, seed): seed for seed in seeds}
            for fut in concurrent.futures.as_completed(futures):
                seed = futures[fut]
                try:
                    rows[seed] = fut.result()
                except Exception as exc:  # noqa: BLE001 - reported per seed
                    failures[seed] = str(exc)
    else:
        for seed in seeds:
            try:
                rows[seed] = _one_batch_run(cfg, seed)
            except Exception as exc:  # noqa: BLE001
                failures[seed] = str(exc)

    ok = [rows[s] for s in seeds if s in rows]
    aggregate = {
        "schema": SUMMARY_SCHEMA,
        "config_digest": cfg.digest(),
        "seeds": seeds,
        "failed_seeds": sorted(failures),
        "runs": len(ok),
    }
    if ok:
        aggregate["median_max_est_err"] = median(r["metrics"]["max_est_err"] for r in ok)
        aggregate["median_max_as_err"] = median(r["metrics"]["max_as_err"] for r in ok)
        aggregate["max_estimator_residual"] = max(
            r["residuals"]["estimator_recursion"] for r in ok)
        aggregate["max_as_residual"] = max(r["residuals"]["as_recursion"] for r in ok)
        recoveries = [t for r in ok for t in r["metrics"]["recovery_ticks"] if t >= 0]
        aggregate["impulses_observed"] = sum(
            len(r["metrics"]["impulse_ticks"]) for r in ok)
        aggregate["median_recovery_ticks"] = median(recoveries) if recoveries else None

    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for seed, row in rows.items():
            (out_dir / f"seed-{seed}.summary.json").write_text(
                json.dumps(row, indent=2, sort_keys=True) + "\n")
        (out_dir / "aggregate.json").write_text(
            json.dumps(aggregate, indent=2, sort_keys=True) + "\n")

    print(json.dumps(aggregate, indent=2, sort_keys=True))
    for seed, msg in sorted(failures.items()):
        print(f"seed {seed} FAILED: {msg}", file=sys.stderr)
    return 1 if failures else 0


def cmd_verify(args) -> int:
    if args.trace:
        cfg, seed, records = trace_io.read_trace(args.trace)
        result = replay_result(cfg, seed, records)
        result.wall_time = 0.0
    else:
        cfg = _load(args.scenario)
        result = run_scenario(cfg, seed=args.seed)
    summary = build_summary(result)
    _print_summary(summary, result.wall_time, sys.stdout)

    failures: list[str] = []
    if summary["gates"]["gain_condition"]["verdict"] != "pass":
        failures.append("gain condition failed")
    if summary["noiseless"]:
        for key in ("estimator_recursion", "as_recursion", "gain_identity"):
            if summary["residuals"][key] > RESIDUAL_HARD_LIMIT:
                failures.append(f"{key} residual {summary['residuals'][key]:.3e} "
                                f"> {RESIDUAL_HARD_LIMIT:.0e}")
    for msg in failures:
        print(f"FAIL: {msg}", file=sys.stderr)
    if not failures:
        print("verify: all hard checks passed")
    return 1 if failures else 0


def cmd_serve(args) -> int:
    from . import serve as serve_mod  # deferred: pulls in asyncio/websockets
    cfg = _load(args.scenario)
    host, _, port = args.bind.rpartition(":")
    return serve_mod.run_server(cfg, seed=args.seed, host=host or "127.0.0.1",
                                port=int(port), tick_hz=args.tick_hz,
                                max_manual_speed=args.max_manual_speed,
                                ui_dir=args.ui)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="encirclesim",
        description="Two-agent target encirclement: simulate, analyze, steer.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario, write trace + summary")
    p_run.add_argument("--scenario", help="scenario config file (default: built-in)")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default="trace.csv", help="trace output path")
    p_run.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p_run.add_argument("--summary", default=None, help="summary JSON path")
    p_run.set_defaults(func=cmd_run)

    p_batch = sub.add_parser("batch", help="run many seeds, aggregate the metrics")
    p_batch.add_argument("--scenario", help="scenario config file (default: built-in)")
    p_batch.add_argument("--seeds", default="0..19",
                         help="comma list and/or lo..hi ranges, e.g. 0..19 or 1,2,9")
    p_batch.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_batch.add_argument("--out", default=None, help="directory for per-seed summaries")
    p_batch.set_defaults(func=cmd_batch)

    p_verify = sub.add_parser("verify", help="gates + recursion identities; exit 1 on hard failure")
    p_verify.add_argument("--scenario", help="scenario to run and verify")
    p_verify.add_argument("--trace", help="existing trace file to replay and verify")
    p_verify.add_argument("--seed", type=int, default=None)
    p_verify.set_defaults(func=cmd_verify)

    p_serve = sub.add_parser("serve", help="live loop over WebSocket for the steering UI")
    p_serve.add_argument("--scenario", help="scenario config file (default: built-in)")
    p_serve.add_argument("--seed", type=int, default=None)
    p_serve.add_argument("--bind", default="127.0.0.1:8765", help="host:port (port 0 = ephemeral)")
    p_serve.add_argument("--tick-hz", type=float, default=20.0)
    p_serve.add_argument("--max-manual-speed", type=float, default=None,
                         help="cap on operator velocity, m/tick (default drift_amp*25)")
    p_serve.add_argument("--ui", default=None, help="directory of static UI assets to serve")
    p_serve.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, trace_io.TraceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
