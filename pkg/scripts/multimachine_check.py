"""Fairness and efficacy of the block-matching mechanism on random instances."""
import argparse
from dataclasses import dataclass

import numpy as np

from fairsched.core import gen_uniform
from fairsched.metrics import bound_upper
from fairsched.multimachine import evaluate_multi


@dataclass
class Config:
    instances: int = 200
    machines: int = 2
    max_tau: int = 4
    seed: int = 0


def run(cfg: Config) -> None:
    rng = np.random.default_rng(cfg.seed)
    print(f"{'eps':>5} {'max fairness':>13} {'1+eps':>6} {'max efficacy':>13} {'upper':>7}")
    for eps in (0.1, 0.25, 0.5):
        f_worst = e_worst = 0.0
        for _ in range(cfg.instances):
            n = int(rng.integers(2, cfg.machines * cfg.max_tau + 1))
            r = evaluate_multi(gen_uniform(n, 10.0, int(rng.integers(2**31))), cfg.machines, eps)
            f_worst = max(f_worst, r.fairness_ratio)
            e_worst = max(e_worst, r.efficacy_ratio)
        print(f"{eps:>5} {f_worst:>13.4f} {1 + eps:>6.2f} {e_worst:>13.4f} {bound_upper(eps):>7.3f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(Config()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=int, default=default)
    run(Config(**vars(ap.parse_args())))
