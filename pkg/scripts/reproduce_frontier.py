"""Fairness/cost trade-off of the Pareto schedules on the powers-of-two instance.

Writes the full CSV and prints the rows at size-class boundaries.
"""
import argparse
from dataclasses import dataclass
from pathlib import Path

from fairsched.core import gen_powers
from fairsched.frontier import export_frontier_csv, frontier_points, size_class_boundaries


@dataclass
class Config:
    p: int = 9
    out: Path = Path("frontier_powers.csv")


def run(cfg: Config) -> None:
    inst = gen_powers(cfg.p)
    pts = frontier_points(inst)
    export_frontier_csv(pts, cfg.out)
    print(f"n={inst.n}, wrote {len(pts)} rows to {cfg.out}")
    print(f"{'k':>6} {'eps_k':>10} {'fairness':>10} {'efficacy':>10} frontier")
    for k in size_class_boundaries(inst):
        pt = pts[k]
        print(f"{k:>6} {pt.epsilon_k:>10.4f} {pt.fairness_ratio:>10.4f} {pt.efficacy_ratio:>10.4f} {pt.on_frontier}")
    print(f"dominated schedules overall: {sum(not pt.on_frontier for pt in pts)}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=Config.p)
    ap.add_argument("--out", type=Path, default=Config.out)
    run(Config(**vars(ap.parse_args())))
