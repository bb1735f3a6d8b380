"""Worst-case, average and median per-round delay for each delay profile.

Shows how far tau_max sits above tau_avg and tau_median once a few clients are stragglers.
"""
import argparse

from fadas.core import config_to_dict, config_from_dict
from fadas.experiments import straggler_config
from fadas.sim import delay_stats, run_async


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--T", type=int, default=1000)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    for profile in ("MILD", "LARGE_WORST_CASE"):
        raw = config_to_dict(straggler_config("FADAS", args.seed, args.T))
        raw.update(delay_profile=profile, gamma=args.gamma)
        s = delay_stats(run_async(config_from_dict(raw)))
        print(f"{profile:17s} tau_max={s['tau_max']:4d}  tau_avg={s['tau_avg']:6.2f}  tau_median={s['tau_median']}")


if __name__ == "__main__":
    main()
