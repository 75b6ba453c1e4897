"""The fairness/cost trade-off traced by the Pareto schedules ``A^0 .. A^{n-1}``."""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import mechanisms as mech
from .core import Instance, canonicalize
from .errors import DegenerateInstanceError, ParameterError
from .metrics import efficacy_ratio, per_job_fairness

__all__ = [
    "FrontierPoint",
    "frontier_points",
    "dominance_filter",
    "size_class_boundaries",
    "export_frontier_csv",
    "read_frontier_csv",
    "CSV_HEADER",
]

CSV_HEADER = ("k", "epsilon", "fairness_ratio", "social_cost", "efficacy_ratio", "on_frontier")


@dataclass(frozen=True)
class FrontierPoint:
    k: int
    epsilon_k: float
    fairness_ratio: float
    social_cost: float
    efficacy_ratio: float
    on_frontier: bool


def dominance_filter(points: Sequence[tuple[float, float]]) -> list[bool]:
    """Flag each ``(fairness, cost)`` pair that no other pair dominates.

    Domination means no worse in both coordinates and strictly better in one;
    exact duplicates therefore keep each other alive.
    """
    order = sorted(range(len(points)), key=lambda i: points[i])
    flags = [True] * len(points)
    best_before = float("inf")  # min cost over strictly smaller fairness
    i = 0
    while i < len(order):
        f = points[order[i]][0]
        j = i
        while j < len(order) and points[order[j]][0] == f:
            j += 1
        group_min = points[order[i]][1]
        for idx in order[i:j]:
            c = points[idx][1]
            if best_before <= c or group_min < c:
                flags[idx] = False
        best_before = min(best_before, group_min)
        i = j
    return flags


def frontier_points(inst: Instance) -> list[FrontierPoint]:
    """Evaluate every ``A^k`` and flag the non-dominated ones."""
    if inst.D <= 0:
        raise DegenerateInstanceError("frontier needs positive total size")
    canon = canonicalize(inst)
    eps = mech.epsilon_profile(canon)
    fair = mech.fairest_completions(canon)
    opt = mech.optimal_cost(canon)
    raw = []
    for k in range(canon.n):
        comp = mech.expected_completions(canon, mech.pareto_schedule(canon, k))
        cost = mech.social_cost(comp)
        f = float(per_job_fairness(canon, comp, fair).max())
        raw.append((k, float(eps[k]), f, cost, efficacy_ratio(canon, cost, opt)))
    flags = dominance_filter([(r[2], r[3]) for r in raw])
    return [FrontierPoint(*r, on_frontier=flag) for r, flag in zip(raw, flags)]


def size_class_boundaries(inst: Instance) -> list[int]:
    """Values of ``k`` that never split jobs of equal size across sections."""
    sizes = canonicalize(inst).sizes
    return [k for k in range(len(sizes)) if k == 0 or sizes[k - 1] != sizes[k]]


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def export_frontier_csv(points: Sequence[FrontierPoint], destination=None) -> bytes:
    """Write the frontier as CSV to a path, a text stream, or nowhere.

    Returns the encoded CSV.  Paths are written through a temporary file and
    renamed into place.
    """
    if not points:
        raise ParameterError("no frontier points to export")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in sorted(points, key=lambda p: p.k):
        w.writerow(
            [
                p.k,
                _fmt(p.epsilon_k),
                _fmt(p.fairness_ratio),
                _fmt(p.social_cost),
                _fmt(p.efficacy_ratio),
                "true" if p.on_frontier else "false",
            ]
        )
    text = buf.getvalue()
    if destination is None:
        pass
    elif isinstance(destination, (str, os.PathLike)):
        path = Path(destination)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text)
        os.replace(tmp, path)
    else:
        destination.write(text)
    return text.encode()


def read_frontier_csv(source) -> list[FrontierPoint]:
    if isinstance(source, bytes):
        source = source.decode()
    if isinstance(source, os.PathLike) or (isinstance(source, str) and "\n" not in source):
        source = Path(source).read_text()
    text = source if isinstance(source, str) else source.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ParameterError("not a frontier CSV (header mismatch)")
    return [
        FrontierPoint(int(r[0]), float(r[1]), float(r[2]), float(r[3]), float(r[4]), r[5] == "true")
        for r in rows[1:]
    ]
