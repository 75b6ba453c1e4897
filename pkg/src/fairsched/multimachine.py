"""Identical parallel machines: block decomposition, optimum and the fair mechanism.

Jobs are padded with zero-size dummies to ``m * tau`` jobs, sorted, and cut
into ``tau`` consecutive blocks of ``m``.  Any assignment that spreads every
block over all ``m`` machines is optimal.  The fair mechanism draws each
block's matching uniformly at random and then runs the single-machine target
rule on every machine separately.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import mechanisms as mech
from . import oracle
from .core import Instance, canonicalize, lsum
from .errors import DegenerateInstanceError, ParameterError
from .metrics import EvaluationReport, bound_lower, bound_upper, build_report
from .oracle import OracleConfig

__all__ = [
    "BlockStructure",
    "MachineAssignment",
    "pad_and_blocks",
    "optimal_multi_cost",
    "greedy_assign",
    "sample_block_matching",
    "multi_fairest_completions",
    "FairMultiMechanism",
    "fair_multi_mechanism",
    "evaluate_multi",
]


@dataclass(frozen=True)
class BlockStructure:
    m: int
    tau: int
    dummy_count: int
    blocks: tuple[tuple[int, ...], ...]
    block_totals: tuple[float, ...]
    instance: Instance  # padded and canonical

    @property
    def dummy_ids(self) -> tuple[int, ...]:
        return self.instance.meta.get("dummy_ids", ())


@dataclass(frozen=True)
class MachineAssignment:
    instance: Instance
    machine_of: dict[int, int]
    machines: tuple[tuple[int, ...], ...]

    def spreads_blocks(self, bs: BlockStructure) -> bool:
        """True when every block occupies ``m`` distinct machines."""
        return all(len({self.machine_of[j] for j in b}) == len(b) for b in bs.blocks)


def pad_and_blocks(inst: Instance, m: int) -> BlockStructure:
    if m < 1:
        raise ParameterError(f"machine count must be >= 1, got {m}")
    dummy_count = (-inst.n) % m
    base = min(min(inst.ids), 0)
    dummy_ids = tuple(base - 1 - i for i in range(dummy_count))
    padded = canonicalize(
        Instance(inst.ids + dummy_ids, inst.sizes + (0.0,) * dummy_count, {"dummy_ids": dummy_ids})
    )
    blocks = tuple(padded.ids[r : r + m] for r in range(0, padded.n, m))
    totals = tuple(lsum(padded.size_of[j] for j in b) for b in blocks)
    return BlockStructure(m, len(blocks), dummy_count, blocks, totals, padded)


def optimal_multi_cost(bs: BlockStructure) -> float:
    """``sum_r (tau - r + 1) * M_r``: each block's mass delays itself and all later blocks."""
    return math.fsum((bs.tau - r) * M for r, M in enumerate(bs.block_totals))


def greedy_assign(inst: Instance, m: int) -> tuple[MachineAssignment, np.ndarray, float]:
    """Sorted jobs, each onto the least loaded machine.

    Load ties go to the machine holding fewer jobs, then to the lowest
    index; counting jobs keeps zero-size jobs from doubling up within a block.
    Completions are aligned with the padded canonical instance.
    """
    bs = pad_and_blocks(inst, m)
    padded = bs.instance
    heap = [(0.0, 0, i) for i in range(m)]
    machine_of = {}
    machines = [[] for _ in range(m)]
    completions = np.empty(padded.n)
    for pos, (j, d) in enumerate(zip(padded.ids, padded.sizes)):
        load, count, i = heapq.heappop(heap)
        finish = load + d
        machine_of[j] = i
        machines[i].append(j)
        completions[pos] = finish
        heapq.heappush(heap, (finish, count + 1, i))
    assignment = MachineAssignment(padded, machine_of, tuple(map(tuple, machines)))
    return assignment, completions, math.fsum(completions)


def sample_block_matching(bs: BlockStructure, seed: int) -> MachineAssignment:
    """Independent uniform bijection block -> machines for every block."""
    rng = np.random.default_rng(seed)
    machine_of = {}
    machines = [[] for _ in range(bs.m)]
    for block in bs.blocks:
        for job, i in zip(block, rng.permutation(bs.m)):
            machine_of[job] = int(i)
            machines[i].append(job)
    return MachineAssignment(bs.instance, machine_of, tuple(map(tuple, machines)))


def multi_fairest_completions(inst: Instance, m: int) -> np.ndarray:
    """Random machine, random order: ``(D - d_i) / (2m) + d_i``."""
    if m < 1:
        raise ParameterError(f"machine count must be >= 1, got {m}")
    if inst.D <= 0:
        raise DegenerateInstanceError("instance has zero total size")
    d = inst.sizes_array
    return (inst.D - d) / (2 * m) + d


@dataclass(frozen=True)
class FairMultiMechanism:
    """Random block matching, then ``A^k`` per machine with ``k`` picked on that machine."""

    m: int
    target_eps: float
    blocks: BlockStructure

    def machine_rule(self, sub: Instance) -> mech.PrioritySchedule:
        if sub.D <= 0:
            return mech.random_schedule(sub)
        return mech.pareto_schedule(sub, mech.select_k(sub, self.target_eps))

    def realize(self, seed: int) -> tuple[MachineAssignment, list[mech.PrioritySchedule]]:
        assignment = sample_block_matching(self.blocks, seed)
        scheds = [self.machine_rule(self.blocks.instance.subset(jobs)) for jobs in assignment.machines]
        return assignment, scheds


def fair_multi_mechanism(inst: Instance, m: int, target_eps: float) -> FairMultiMechanism:
    if inst.D <= 0:
        raise DegenerateInstanceError("instance has zero total size")
    if target_eps < 0:
        raise ParameterError(f"target eps must be non-negative, got {target_eps}")
    return FairMultiMechanism(m, target_eps, pad_and_blocks(inst, m))


def evaluate_multi(
    inst: Instance,
    m: int,
    target_eps: float,
    mode: str = "exact",
    cfg: OracleConfig | None = None,
) -> EvaluationReport:
    """Evaluate the fair multi-machine mechanism at fairness target ``target_eps``.

    ``exact`` enumerates every block matching; ``mc`` samples
    ``cfg.mc_samples`` of them.  Either way each machine's schedule is
    evaluated in closed form.  Fairness is measured against
    :func:`multi_fairest_completions`, efficacy against
    :func:`optimal_multi_cost`, and the bounds are taken at ``target_eps``.
    Dummy jobs are left out of the per-job table.
    """
    cfg = cfg or OracleConfig()
    fm = fair_multi_mechanism(inst, m, target_eps)
    bs = fm.blocks
    if mode == "exact":
        res = oracle.exact_multi_evaluation(inst, m, fm.machine_rule, cfg)
    elif mode == "mc":
        res = oracle.mc_multi_evaluation(inst, m, fm.machine_rule, cfg)
    else:
        raise ParameterError(f"mode must be 'exact' or 'mc', got {mode!r}")
    padded = res.instance
    keep = res.real_mask
    fair_real = dict(zip(inst.ids, multi_fairest_completions(inst, m)))
    fair = np.array([fair_real.get(j, 1.0) for j in padded.ids])
    k = mech.select_k(inst, target_eps) if m == 1 else None
    report = build_report(
        padded,
        f"target:{target_eps!r}",
        k,
        res.max_machine_eps,
        res.completions,
        fair,
        optimal_multi_cost(bs),
        math.fsum(fair[keep]),
        bound_eps=0.0,
        keep=keep,
    )
    if target_eps > 0:
        report.bound_upper = bound_upper(target_eps)
        report.bound_lower = bound_lower(target_eps, clamp=True)
        report.bound_lower_raw = bound_lower(target_eps)
    report.extra.update(
        {
            "m": m,
            "tau": bs.tau,
            "dummy_count": bs.dummy_count,
            "mode": mode,
            "outcomes": res.outcomes,
        }
    )
    if mode == "mc":
        report.extra["samples"] = res.outcomes
        report.extra["std_errors"] = [float(s) for s, kp in zip(res.std_errors, keep) if kp]
    report.extra["expected_colocated_load"] = [
        float(v) for v, kp in zip(res.colocated_load, keep) if kp
    ]
    return report
