"""Efficacy of the target rule on the two-size worst-case family as D grows."""
import argparse
from dataclasses import dataclass, field

from fairsched.core import gen_lower_bound
from fairsched.metrics import bound_lower, bound_upper, evaluate


@dataclass
class Config:
    eps: float = 0.1
    totals: list = field(default_factory=lambda: [10**3, 10**4, 10**5, 10**6])


def run(cfg: Config) -> None:
    print(f"eps={cfg.eps}: lower bound {bound_lower(cfg.eps):.6f}, upper bound {bound_upper(cfg.eps):.6f}")
    print(f"{'D':>10} {'k':>8} {'efficacy':>10} {'gap to lower':>13}")
    for D in cfg.totals:
        r = evaluate(gen_lower_bound(cfg.eps, D), f"target:{cfg.eps}")
        print(f"{D:>10} {r.k:>8} {r.efficacy_ratio:>10.6f} {bound_lower(cfg.eps) - r.efficacy_ratio:>13.2e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=Config.eps)
    ap.add_argument("--totals", type=int, nargs="+", default=Config().totals)
    run(Config(**vars(ap.parse_args())))
