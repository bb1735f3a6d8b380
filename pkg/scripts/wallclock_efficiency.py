"""Simulated time to reach a target train loss: async FADAS vs synchronous FedAMS (mild delays).

    python scripts/wallclock_efficiency.py --seeds 0-9 --target 0.35
"""
import argparse

from fadas.experiments import WALLCLOCK_TARGET_LOSS, time_to_target, wallclock_config
from fadas.sim import build_problem, run_async, run_sync


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", default="0-9")
    p.add_argument("--target", type=float, default=WALLCLOCK_TARGET_LOSS)
    args = p.parse_args()
    lo, _, hi = args.seeds.partition("-")

    wins = 0
    seeds = range(int(lo), int(hi or lo) + 1)
    for seed in seeds:
        problem = build_problem(wallclock_config("FADAS", seed))
        fadas = run_async(wallclock_config("FADAS", seed), problem=problem)
        fedams = run_sync(wallclock_config("FEDAMS", seed), problem=problem)
        ta, ts = time_to_target(fadas, args.target), time_to_target(fedams, args.target)
        wins += ta < ts
        print(f"seed {seed}: FADAS {ta:8.1f}   FedAMS {ts:8.1f}   (x10 s)")
    print(f"FADAS faster in {wins}/{len(seeds)} seeds")


if __name__ == "__main__":
    main()
