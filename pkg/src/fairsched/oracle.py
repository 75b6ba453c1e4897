"""Brute-force and Monte Carlo references for the closed forms.

Nothing here is clever on purpose.  Single-machine expectations are averaged
over every group-consistent permutation, multi-machine ones over every block
matching, and optima over every job-to-machine assignment.  Enumeration is
lazy, so memory stays linear in ``n`` while the outcome count is capped by
:class:`OracleConfig`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import mechanisms as mech
from .core import Instance, canonicalize, lsum
from .errors import InfeasibleError, ParameterError
from .mechanisms import PrioritySchedule

__all__ = [
    "OracleConfig",
    "count_orders",
    "exact_completions_by_enumeration",
    "mc_completions",
    "enumerate_priority_mechanisms",
    "ordered_partitions",
    "MultiOracleResult",
    "exact_multi_evaluation",
    "mc_multi_evaluation",
    "brute_multi_completions",
    "mc_multi_brute",
    "exact_multi_fairest",
    "brute_force_optimal_multi",
    "worker_seeds",
]

MAX_PARTITION_N = 9
_CHUNK = 4096

MachineRule = Callable[[Instance], PrioritySchedule]


@dataclass(frozen=True)
class OracleConfig:
    max_exact_outcomes: int = 10**7
    mc_samples: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.max_exact_outcomes < 1 or self.mc_samples < 1:
            raise ParameterError("oracle caps must be positive")


def worker_seeds(seed: int, n_workers: int) -> list[np.random.SeedSequence]:
    """Independent child seeds, a pure function of ``(seed, worker index)``."""
    return np.random.SeedSequence(seed).spawn(n_workers)


def _check_cap(outcomes: int, cfg: OracleConfig, what: str) -> None:
    if outcomes > cfg.max_exact_outcomes:
        shown = str(outcomes) if outcomes < 10**15 else f"~10^{len(str(outcomes)) - 1}"
        raise InfeasibleError(
            f"{what}: {shown} outcomes exceed the exact cap of {cfg.max_exact_outcomes}; "
            "use Monte Carlo instead",
            outcomes,
            cfg.max_exact_outcomes,
        )


def _lazy_product(pools: list) -> Iterator[tuple]:
    """Like ``itertools.product(*map(itertools.permutations, pools))`` but lazy."""
    if not pools:
        yield ()
        return
    head, rest = pools[0], pools[1:]
    for p in itertools.permutations(head):
        for tail in _lazy_product(rest):
            yield p + tail


def count_orders(sched: PrioritySchedule) -> int:
    return math.prod(math.factorial(len(g)) for g in sched.groups)


# ---------------------------------------------------------------------------
# Single machine
# ---------------------------------------------------------------------------


def exact_completions_by_enumeration(
    inst: Instance, sched: PrioritySchedule, cfg: OracleConfig | None = None
) -> np.ndarray:
    """Average completion per job over all orders the schedule allows."""
    cfg = cfg or OracleConfig()
    sched.validate(inst)
    outcomes = count_orders(sched)
    _check_cap(outcomes, cfg, "permutation enumeration")
    sizes = inst.sizes_array
    pools = [[inst.index_of[j] for j in g] for g in sched.groups]
    totals = np.zeros(inst.n)
    buf = []
    for order in _lazy_product(pools):
        buf.append(order)
        if len(buf) == _CHUNK:
            totals += _completion_sums(np.array(buf), sizes, inst.n)
            buf.clear()
    if buf:
        totals += _completion_sums(np.array(buf), sizes, inst.n)
    return totals / outcomes


def _completion_sums(orders: np.ndarray, sizes: np.ndarray, n: int) -> np.ndarray:
    finish = np.cumsum(sizes[orders], axis=1)
    return np.bincount(orders.ravel(), weights=finish.ravel(), minlength=n)


def mc_completions(
    inst: Instance, sched: PrioritySchedule, cfg: OracleConfig | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and standard error of each job's completion.

    Samples are drawn in chunks, chunk ``c`` seeded by child ``c`` of
    ``SeedSequence(cfg.seed)``.
    """
    cfg = cfg or OracleConfig()
    sched.validate(inst)
    sizes = inst.sizes_array
    pools = [np.array([inst.index_of[j] for j in g]) for g in sched.groups]
    n_chunks = -(-cfg.mc_samples // _CHUNK)
    s1 = np.zeros(inst.n)
    s2 = np.zeros(inst.n)
    remaining = cfg.mc_samples
    for child in worker_seeds(cfg.seed, n_chunks):
        rng = np.random.default_rng(child)
        batch = min(_CHUNK, remaining)
        remaining -= batch
        parts = [
            np.broadcast_to(p, (batch, len(p))) if len(p) == 1
            else rng.permuted(np.tile(p, (batch, 1)), axis=1)
            for p in pools
        ]
        orders = np.concatenate(parts, axis=1)
        finish = np.cumsum(sizes[orders], axis=1)
        by_job = np.empty_like(finish)
        np.put_along_axis(by_job, orders, finish, axis=1)
        s1 += by_job.sum(axis=0)
        s2 += (by_job**2).sum(axis=0)
    S = cfg.mc_samples
    mean = s1 / S
    if S > 1:
        var = np.maximum(s2 - S * mean**2, 0.0) / (S - 1)
    else:
        var = np.zeros(inst.n)
    return mean, np.sqrt(var / S)


def ordered_partitions(items: tuple) -> Iterator[tuple[tuple, ...]]:
    """Every ordered set partition of ``items`` (ordered Bell many)."""
    if not items:
        yield ()
        return
    n = len(items)
    for mask in range(1, 2**n):
        head = tuple(items[i] for i in range(n) if mask >> i & 1)
        rest = tuple(items[i] for i in range(n) if not mask >> i & 1)
        for tail in ordered_partitions(rest):
            yield (head,) + tail


def enumerate_priority_mechanisms(
    inst: Instance, max_n: int = MAX_PARTITION_N
) -> Iterator[tuple[PrioritySchedule, float, float]]:
    """Yield ``(schedule, social cost, fairness ratio)`` for every priority mechanism."""
    if inst.n > max_n:
        raise InfeasibleError(
            f"{inst.n} jobs exceed the ordered-partition limit of {max_n}", None, max_n
        )
    size_of = inst.size_of
    D = inst.D
    for groups in ordered_partitions(tuple(canonicalize(inst).ids)):
        offset = 0.0
        cost = 0.0
        worst = -math.inf
        for g in groups:
            total = sum(size_of[j] for j in g)
            for j in g:
                c = offset + 0.5 * (total + size_of[j])
                cost += c
                worst = max(worst, c / (0.5 * (D + size_of[j])))
            offset += total
        yield PrioritySchedule(groups), cost, worst


# ---------------------------------------------------------------------------
# Multiple machines
# ---------------------------------------------------------------------------


def _pad(inst: Instance, m: int) -> tuple[Instance, list[tuple[int, ...]]]:
    if m < 1:
        raise ParameterError(f"machine count must be >= 1, got {m}")
    dummies = (-inst.n) % m
    base = min(min(inst.ids), 0)
    dummy_ids = tuple(base - 1 - i for i in range(dummies))
    padded = canonicalize(
        Instance(inst.ids + dummy_ids, inst.sizes + (0.0,) * dummies, {"dummy_ids": dummy_ids})
    )
    blocks = [padded.ids[r : r + m] for r in range(0, padded.n, m)]
    return padded, blocks


@dataclass
class MultiOracleResult:
    """Per-job expectations over the block-matching distribution.

    Arrays are aligned with ``instance.ids`` (the padded, canonical instance;
    dummy ids sit below every real id and are listed in ``meta["dummy_ids"]``).
    """

    instance: Instance
    completions: np.ndarray
    colocated_load: np.ndarray
    outcomes: int
    max_machine_eps: float
    std_errors: np.ndarray | None = None

    @property
    def real_mask(self) -> np.ndarray:
        dummies = set(self.instance.meta.get("dummy_ids", ()))
        return np.array([j not in dummies for j in self.instance.ids])

    def by_id(self, values=None) -> dict[int, float]:
        values = self.completions if values is None else values
        return {j: float(v) for j, v in zip(self.instance.ids, values)}


def _machine_eps(sub: Instance, sched: PrioritySchedule) -> float:
    if sub.D <= 0:
        return 0.0
    prefix = lsum(sub.size_of[g[0]] for g in sched.groups[:-1])
    return prefix / sub.D


def _realize(padded: Instance, machines: list[list[int]], rule: MachineRule, per_job, load):
    """Closed-form per-machine expectations for one matching realization."""
    worst_eps = 0.0
    for jobs in machines:
        sub = padded.subset(jobs)
        sched = rule(sub)
        comp = mech.expected_completions(sub, sched)
        worst_eps = max(worst_eps, _machine_eps(sub, sched))
        for j, c in zip(sub.ids, comp):
            idx = padded.index_of[j]
            per_job[idx] = c
            load[idx] = sum(sub.size_of[o] for o in sub.ids if o != j)
    return worst_eps


def exact_multi_evaluation(
    inst: Instance, m: int, rule: MachineRule, cfg: OracleConfig | None = None
) -> MultiOracleResult:
    """Exact expectation over all ``(m!)**tau`` block matchings.

    Within one realization each machine is scheduled by ``rule`` applied to its
    own job set, and evaluated in closed form.
    """
    cfg = cfg or OracleConfig()
    padded, blocks = _pad(inst, m)
    tau = len(blocks)
    outcomes = math.factorial(m) ** tau
    _check_cap(outcomes, cfg, "block-matching enumeration")
    totals = np.zeros(padded.n)
    load_totals = np.zeros(padded.n)
    per_job = np.zeros(padded.n)
    load = np.zeros(padded.n)
    worst_eps = 0.0
    for machines in _all_matchings(blocks, m):
        worst_eps = max(worst_eps, _realize(padded, machines, rule, per_job, load))
        totals += per_job
        load_totals += load
    return MultiOracleResult(padded, totals / outcomes, load_totals / outcomes, outcomes, worst_eps)


def mc_multi_evaluation(
    inst: Instance, m: int, rule: MachineRule, cfg: OracleConfig | None = None
) -> MultiOracleResult:
    """Monte Carlo over block matchings; per-machine stages stay in closed form."""
    cfg = cfg or OracleConfig()
    padded, blocks = _pad(inst, m)
    S = cfg.mc_samples
    s1 = np.zeros(padded.n)
    s2 = np.zeros(padded.n)
    load_totals = np.zeros(padded.n)
    per_job = np.zeros(padded.n)
    load = np.zeros(padded.n)
    worst_eps = 0.0
    rng = np.random.default_rng(worker_seeds(cfg.seed, 1)[0])
    for _ in range(S):
        machines = [[] for _ in range(m)]
        for block in blocks:
            for pos, machine in enumerate(rng.permutation(m)):
                machines[machine].append(block[pos])
        worst_eps = max(worst_eps, _realize(padded, machines, rule, per_job, load))
        s1 += per_job
        s2 += per_job**2
        load_totals += load
    mean = s1 / S
    var = np.maximum(s2 - S * mean**2, 0.0) / (S - 1) if S > 1 else np.zeros(padded.n)
    return MultiOracleResult(padded, mean, load_totals / S, S, worst_eps, np.sqrt(var / S))


def _all_matchings(blocks, m) -> Iterator[list[list[int]]]:
    for flat in _lazy_product([tuple(range(m))] * len(blocks)):
        machines = [[] for _ in range(m)]
        for r, block in enumerate(blocks):
            for pos, job in enumerate(block):
                machines[flat[r * m + pos]].append(job)
        yield machines


def brute_multi_completions(
    inst: Instance, m: int, rule: MachineRule, cfg: OracleConfig | None = None
) -> np.ndarray:
    """Expected completions by enumerating matchings *and* run orders.

    No closed form is used anywhere: each machine's expectation comes from
    :func:`exact_completions_by_enumeration`.  Aligned with the padded
    canonical instance.
    """
    cfg = cfg or OracleConfig()
    padded, blocks = _pad(inst, m)
    n_match = math.factorial(m) ** len(blocks)
    _check_cap(n_match, cfg, "block-matching enumeration")
    totals = np.zeros(padded.n)
    for machines in _all_matchings(blocks, m):
        for jobs in machines:
            sub = padded.subset(jobs)
            comp = exact_completions_by_enumeration(sub, rule(sub), cfg)
            for j, c in zip(sub.ids, comp):
                totals[padded.index_of[j]] += c
    return totals / n_match


def mc_multi_brute(
    inst: Instance, m: int, rule: MachineRule, cfg: OracleConfig | None = None
) -> tuple[Instance, np.ndarray, np.ndarray]:
    """Monte Carlo over matchings *and* run orders; no closed form involved.

    Returns the padded instance with per-job sample means and standard errors.
    """
    cfg = cfg or OracleConfig()
    padded, blocks = _pad(inst, m)
    S = cfg.mc_samples
    rng = np.random.default_rng(worker_seeds(cfg.seed, 1)[0])
    s1 = np.zeros(padded.n)
    s2 = np.zeros(padded.n)
    row = np.zeros(padded.n)
    for _ in range(S):
        machines = [[] for _ in range(m)]
        for block in blocks:
            for pos, machine in enumerate(rng.permutation(m)):
                machines[machine].append(block[pos])
        for jobs in machines:
            sub = padded.subset(jobs)
            t = 0.0
            for g in rule(sub).groups:
                for idx in rng.permutation(len(g)):
                    j = g[idx]
                    t += sub.size_of[j]
                    row[padded.index_of[j]] = t
        s1 += row
        s2 += row**2
    mean = s1 / S
    var = np.maximum(s2 - S * mean**2, 0.0) / (S - 1) if S > 1 else np.zeros(padded.n)
    return padded, mean, np.sqrt(var / S)


def exact_multi_fairest(inst: Instance, m: int, cfg: OracleConfig | None = None) -> np.ndarray:
    """Uniform machine per job, uniform order per machine: exact average.

    Aligned with ``inst.ids``.
    """
    cfg = cfg or OracleConfig()
    n = inst.n
    _check_cap(m**n * math.factorial(n), cfg, "fair-assignment enumeration")
    sizes = inst.sizes
    totals = np.zeros(n)
    for assign in itertools.product(range(m), repeat=n):
        for machine in range(m):
            jobs = [i for i in range(n) if assign[i] == machine]
            if not jobs:
                continue
            perms = list(itertools.permutations(jobs))
            for order in perms:
                t = 0.0
                for i in order:
                    t += sizes[i]
                    totals[i] += t / len(perms)
    return totals / m**n


def brute_force_optimal_multi(inst: Instance, m: int, cfg: OracleConfig | None = None) -> float:
    """Minimum total completion time over all ``m**n`` assignments."""
    cfg = cfg or OracleConfig()
    if m < 1:
        raise ParameterError(f"machine count must be >= 1, got {m}")
    n = inst.n
    _check_cap(m**n, cfg, "assignment enumeration")
    sizes = inst.sizes
    best = math.inf
    for assign in itertools.product(range(m), repeat=n):
        cost = 0.0
        for machine in range(m):
            t = 0.0
            for d in sorted(sizes[i] for i in range(n) if assign[i] == machine):
                t += d
                cost += t
        best = min(best, cost)
    return best
