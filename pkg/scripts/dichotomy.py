"""Random versus Smith order on instances with one huge job.

The efficacy ratio of the random rule approaches (n+1)/2 as the large job grows.
"""
import argparse
from dataclasses import dataclass, field

from fairsched.core import gen_example_i
from fairsched.metrics import evaluate


@dataclass
class Config:
    ns: list = field(default_factory=lambda: [2, 5, 10, 20, 50, 100])
    scale: float = 1e6


def run(cfg: Config) -> None:
    print(f"{'n':>5} {'efficacy':>10} {'(n+1)/2':>8} {'smith max f':>12}")
    for n in cfg.ns:
        inst = gen_example_i(n, cfg.scale * n)
        rand = evaluate(inst, "random")
        smith = evaluate(inst, "smith")
        print(f"{n:>5} {rand.efficacy_ratio:>10.4f} {(n + 1) / 2:>8.1f} {smith.fairness_ratio:>12.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", type=int, nargs="+", default=Config().ns)
    ap.add_argument("--scale", type=float, default=Config.scale)
    run(Config(**vars(ap.parse_args())))
