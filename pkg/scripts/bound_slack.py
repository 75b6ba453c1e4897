"""Empirical worst efficacy of A^k on random instances against the upper bound."""
import argparse
from dataclasses import dataclass

import numpy as np

from fairsched import mechanisms as mech
from fairsched.core import canonicalize, gen_uniform
from fairsched.metrics import bound_lower, bound_upper


@dataclass
class Config:
    instances: int = 500
    max_n: int = 50
    seed: int = 0
    bins: int = 8


def run(cfg: Config) -> None:
    rng = np.random.default_rng(cfg.seed)
    edges = np.geomspace(0.01, 1.0, cfg.bins + 1)
    worst = np.zeros(cfg.bins)
    for _ in range(cfg.instances):
        inst = canonicalize(gen_uniform(int(rng.integers(2, cfg.max_n + 1)), 10.0, int(rng.integers(2**31))))
        opt = mech.optimal_cost(inst)
        prof = mech.epsilon_profile(inst)
        for k in range(1, inst.n):
            b = np.searchsorted(edges, prof[k], side="right") - 1
            if 0 <= b < cfg.bins:
                cost = mech.social_cost(mech.expected_completions(inst, mech.pareto_schedule(inst, k)))
                worst[b] = max(worst[b], cost / opt)
    print(f"{'eps range':>17} {'worst seen':>11} {'lower(lo)':>10} {'upper(lo)':>10}")
    for lo, hi, w in zip(edges, edges[1:], worst):
        print(f"[{lo:.3f}, {hi:.3f}) {w:>11.4f} {bound_lower(lo, clamp=True):>10.4f} {bound_upper(lo):>10.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(Config()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=int, default=default)
    run(Config(**vars(ap.parse_args())))
