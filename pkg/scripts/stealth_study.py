"""No-alarm frequency of the resampling attacker as its jitter grows.

    python3 scripts/stealth_study.py --jitters 0 0.02 0.04 0.08 0.16 --steps 2000
"""
import argparse

import numpy as np

from wassdetect import config as cfgmod
from wassdetect.attacks import AttackPolicy, sample_gamma_bar, stealth_margin
from wassdetect.calibration import stealth_probability_bound, threshold
from wassdetect.detector import alarm_rate, run_detection
from wassdetect.empirical import from_samples
from wassdetect.lti_core import collect_benchmark


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/reference.json")
    ap.add_argument("--jitters", type=float, nargs="+", default=[0.0, 0.02, 0.04, 0.08, 0.16, 0.32])
    ap.add_argument("--steps", type=int, default=2000)
    args = ap.parse_args()

    cfg = cfgmod.load(args.config)
    plant, noise = cfg.plant.build(), cfg.noise.build()
    d = cfg.detection
    plan = threshold(cfg.profile.build(), d.N, d.T, d.beta, d.Delta)
    s = cfg.rng_streams()
    bench = from_samples(collect_benchmark(plant, noise, d.burn_in, d.N, d.gap, s["benchmark"]))
    print(f"eps_B={plan.eps_B:.4f} alpha={plan.alpha:.4f} nominal bound={stealth_probability_bound(d.beta, d.Delta):.4f}")
    print("jitter  margin  within  no_alarm")
    for j in args.jitters:
        pol = AttackPolicy("stealthy_resample", source=bench, jitter=j)
        proxy = sample_gamma_bar(pol, s["attack"], 10 * d.N)
        margin, within = stealth_margin(proxy, bench, cfg.profile.q, plan.eps_B)
        recs = run_detection(plant, noise, bench, pol, args.steps + d.T - 1, d.T, plan.alpha, cfg.profile.q,
                             s["detection"], s["attack"], burn_in=d.burn_in)
        print(f"{j:6.3f}  {margin:.4f}  {str(within):6s}  {1 - alarm_rate(recs):.4f}")


if __name__ == "__main__":
    main()
