"""Command-line runner: ``calibrate``, ``detect``, ``reachset`` and ``wdist``.

Every subcommand writes into one run directory (``--out``) and records the
files it produced, with their SHA-256, in ``manifest.json``.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .attacks import AttackPolicy
from .calibration import epsilon_radius, threshold
from .detector import alarm_rate, classify_trace, detect_stream, simulate_attacked, write_alarm_csv
from .empirical import EmpiricalDistribution, read_samples_csv, write_samples_csv
from .lti_core import AugmentedState, NoiseSpec, collect_benchmark, collect_noise_benchmark
from .reach import SupportRegion, cover_support, monte_carlo_reach, sweep_a, unclamped_reach
from .transport import wasserstein


def _json_dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _record(out: Path, command: str, seed: int, files: list[str]) -> None:
    manifest_path = out / "manifest.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {"runs": {}}
    manifest["runs"][command] = {
        "seed": seed,
        "files": {name: _sha256(out / name) for name in sorted(files)},
    }
    _json_dump(manifest_path, manifest)


def _load_config(args) -> cfgmod.ExperimentConfig:
    cfg = cfgmod.load(args.config) if args.config else cfgmod.ExperimentConfig()
    if args.seed is not None:
        cfg.seed = int(args.seed)
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------- subcommands


def cmd_calibrate(cfg: cfgmod.ExperimentConfig, out: Path) -> dict:
    plant = cfg.plant.build()
    w_spec, v_spec = cfg.noise.build()
    d = cfg.detection
    profile = cfg.profile.build()
    streams = cfg.rng_streams()
    plan = threshold(profile, d.N, d.T, d.beta, d.Delta)
    bench = collect_benchmark(plant, (w_spec, v_spec), d.burn_in, d.N, d.gap, streams["benchmark"])
    noise_bench = collect_noise_benchmark(w_spec, cfg.reach.noise_samples, streams["noise_benchmark"])
    eps_w = epsilon_radius(profile.with_dim(w_spec.dim), cfg.reach.noise_samples, d.beta)
    write_samples_csv(out / "benchmark.csv", bench)
    write_samples_csv(out / "noise_benchmark.csv", noise_bench)
    report = {
        "N": d.N, "T": d.T, "beta": d.beta, "Delta": d.Delta,
        "eps_B": plan.eps_B, "eps_D": plan.eps_D, "alpha": plan.alpha,
        "branch_B": plan.branch_B, "branch_D": plan.branch_D,
        "eps_w": eps_w, "noise_samples": cfg.reach.noise_samples,
    }
    _json_dump(out / "calibration.json", report)
    (out / "effective_config.json").write_text(cfg.dumps())
    _record(out, "calibrate", cfg.seed,
            ["benchmark.csv", "noise_benchmark.csv", "calibration.json", "effective_config.json"])
    return report


def _attack_policy(cfg: cfgmod.ExperimentConfig, bench: np.ndarray) -> AttackPolicy:
    a = cfg.attack
    kw = dict(kind=a.kind, jitter=a.jitter, start=a.start, end=a.end)
    if a.kind == "additive_fixed":
        kw["vector"] = np.asarray(a.vector, dtype=float)
    elif a.kind == "additive_noise":
        kw["noise"] = NoiseSpec.from_config(a.noise)
    elif a.kind == "stealthy_resample":
        kw["source"] = EmpiricalDistribution(bench)
    return AttackPolicy(**kw)


def _load_samples(path: Path, what: str) -> np.ndarray:
    if not path.exists():
        raise FileNotFoundError(f"{what} not found at {path}; run `calibrate` first or pass its path")
    return read_samples_csv(path)


def cmd_detect(cfg: cfgmod.ExperimentConfig, out: Path, benchmark_path: Path) -> dict:
    bench = _load_samples(benchmark_path, "benchmark")
    plant = cfg.plant.build()
    noise = cfg.noise.build()
    d = cfg.detection
    plan = threshold(cfg.profile.build(), d.N, d.T, d.beta, d.Delta)
    streams = cfg.rng_streams()
    policy = _attack_policy(cfg, bench)
    benchmark = EmpiricalDistribution(bench)
    rng, attack_rng = streams["detection"], streams["attack"]
    state = None
    if d.burn_in > 0:
        from .attacks import NO_ATTACK

        warm = simulate_attacked(plant, noise, NO_ATTACK, d.burn_in, rng, attack_rng)
        state = AugmentedState(warm.final_state.x, warm.final_state.e, 0)
    run = simulate_attacked(plant, noise, policy, d.steps, rng, attack_rng, state)
    records = detect_stream(benchmark, run.residuals, d.T, plan.alpha, cfg.profile.q)
    write_alarm_csv(out / "alarms.csv", records)
    files = ["alarms.csv", "detect_summary.json"]
    if policy.stealthy:
        gb = run.gamma_bar[~np.isnan(run.gamma_bar).any(axis=1)]
        write_samples_csv(out / "gamma_bar.csv", gb)
        files.append("gamma_bar.csv")
    summary = {
        "steps": d.steps, "T": d.T, "alpha": plan.alpha, "attack": cfg.attack.kind,
        "records": len(records), "alarms": int(sum(r.alarm for r in records)),
        "alarm_rate": alarm_rate(records),
    }
    if records:
        v = classify_trace(records)
        summary["verdict"] = v.kind
        summary["M"] = v.M
    else:
        summary["verdict"] = None
        summary["notice"] = f"warming up: fewer than T={d.T} residuals, no detector output"
    _json_dump(out / "detect_summary.json", summary)
    _record(out, "detect", cfg.seed, files)
    return summary


def cmd_reachset(cfg: cfgmod.ExperimentConfig, out: Path, benchmark_path: Path, noise_path: Path) -> dict:
    bench = _load_samples(benchmark_path, "benchmark")
    noise_bench = _load_samples(noise_path, "noise benchmark")
    plant = cfg.plant.build()
    w_spec, _ = cfg.noise.build()
    d, r = cfg.detection, cfg.reach
    profile = cfg.profile.build()
    plan = threshold(profile, d.N, d.T, d.beta, d.Delta)
    eps_w = epsilon_radius(profile.with_dim(noise_bench.shape[1]), noise_bench.shape[0], d.beta)
    w_region = SupportRegion.from_eps(noise_bench, eps_w, r.s)
    g_region = SupportRegion.from_eps(bench, plan.alpha, r.s)
    E_w, E_g = cover_support(w_region), cover_support(g_region)
    _json_dump(out / "ellipsoid_w.json", E_w.to_json())
    _json_dump(out / "ellipsoid_gamma.json", E_g.to_json())

    xi0 = np.zeros(2 * plant.n)
    sweep = sweep_a(plant.H, plant.G, E_w, E_g, r.a_grid, xi0, None, a1_grid=r.a1_fractions)
    cells = [{"a": s.a, "feasible": s.feasible, "status": s.status,
              "objective": s.objective if s.feasible else None} for s in sweep.solutions]
    files = ["ellipsoid_w.json", "ellipsoid_gamma.json", "sdp.json", "reach_report.json"]
    report = {"a_grid": list(r.a_grid), "cells": cells, "infeasible_a": sweep.infeasible}
    if sweep.best is None:
        report["status"] = "infeasible"
        report["message"] = "the SDP is infeasible for every a in the grid"
        _json_dump(out / "sdp.json", {"status": "infeasible"})
        _json_dump(out / "reach_report.json", report)
        _record(out, "reachset", cfg.seed, files)
        return report

    best = sweep.best
    _json_dump(out / "sdp.json", {
        "status": best.status, "a": best.a, "a1": best.a1, "a2": best.a2,
        "objective": best.objective, "margin": best.margin, "gap_bound": best.gap_bound,
        "Q": best.Q.tolist(),
    })
    _json_dump(out / "reach_xi.json", sweep.xi_ellipsoid.to_json())
    _json_dump(out / "reach_x.json", sweep.x_ellipsoid.to_json())
    mc = cfg.rng_streams()["monte_carlo"]
    cloud = monte_carlo_reach(plant, (w_region, g_region), xi0, r.M, r.trials, mc, covers=(E_w, E_g))
    write_samples_csv(out / "cloud.csv", cloud)
    free = unclamped_reach(plant, w_spec, bench, cfg.attack.jitter, xi0, r.M, r.trials, mc)
    Ex = sweep.x_ellipsoid
    report.update({
        "status": "ok", "a": best.a, "a1": best.a1, "a2": best.a2, "level": Ex.level,
        "log_volume_x": Ex.log_volume(), "log_volumes": {str(k): v for k, v in sweep.log_volumes.items()},
        "trials": r.trials, "M": r.M,
        "containment_rate": float(np.mean(Ex.contains(cloud))),
        "unclamped_containment_rate": float(np.mean(Ex.contains(free))),
    })
    _json_dump(out / "reach_report.json", report)
    files += ["reach_xi.json", "reach_x.json", "cloud.csv"]
    _record(out, "reachset", cfg.seed, files)
    return report


def cmd_wdist(file_a: Path, file_b: Path, q: float) -> float:
    A, B = read_samples_csv(file_a), read_samples_csv(file_b)
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    return wasserstein(A, B, q)


# ---------------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wassdetect", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="experiment JSON (defaults to the reference setup)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", type=Path, default=Path("run"), help="run directory")

    common(sub.add_parser("calibrate", help="compute the threshold and record benchmarks"))
    p = sub.add_parser("detect", help="run the online detector")
    common(p)
    p.add_argument("--benchmark", type=Path, help="residual benchmark CSV (default: OUT/benchmark.csv)")
    p = sub.add_parser("reachset", help="SDP reach ellipsoid plus Monte Carlo check")
    common(p)
    p.add_argument("--benchmark", type=Path)
    p.add_argument("--noise-benchmark", type=Path)
    p = sub.add_parser("wdist", help="Wasserstein distance between two sample CSVs")
    p.add_argument("file_a", type=Path)
    p.add_argument("file_b", type=Path)
    p.add_argument("--q", type=float, default=1.0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "wdist":
            print(repr(cmd_wdist(args.file_a, args.file_b, args.q)))
            return 0
        cfg = _load_config(args)
        out = _out_dir(args)
        if args.command == "calibrate":
            result = cmd_calibrate(cfg, out)
        elif args.command == "detect":
            result = cmd_detect(cfg, out, args.benchmark or out / "benchmark.csv")
        else:
            result = cmd_reachset(cfg, out, args.benchmark or out / "benchmark.csv",
                                  args.noise_benchmark or out / "noise_benchmark.csv")
    except (cfgmod.ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for key in sorted(result):
        if not isinstance(result[key], (list, dict)):
            print(f"{key}: {result[key]}")
    if args.command == "reachset" and result.get("status") != "ok":
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
