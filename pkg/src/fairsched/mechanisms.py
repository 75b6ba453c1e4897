"""Priority scheduling mechanisms on a single machine.

A priority mechanism splits the jobs into ordered groups: every job of group
``g`` runs before any job of group ``g + 1`` and each group is run in a
uniformly random order.  Smith's rule (all singletons, by size) and the
random rule (one group) are the two extremes; the Pareto schedules ``A^k``
put the ``k`` smallest jobs first as singletons and randomize the rest.

All expectations here are exact closed forms.  A job ``i`` in a group that
starts at offset ``A`` and has total size ``G`` completes on average at
``A + (G + d_i) / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Instance, canonicalize, lsum
from .errors import DegenerateInstanceError, ParameterError

__all__ = [
    "PrioritySchedule",
    "GroupStats",
    "smith_schedule",
    "random_schedule",
    "pareto_schedule",
    "epsilon_k",
    "epsilon_profile",
    "select_k",
    "group_stats",
    "tail_decomposition",
    "expected_completions",
    "social_cost",
    "optimal_cost",
    "fairest_completions",
    "fairest_cost",
    "sample_order",
]


@dataclass(frozen=True)
class PrioritySchedule:
    """Ordered groups of job ids."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(int(j) for j in g) for g in self.groups)
        if not groups or any(len(g) == 0 for g in groups):
            raise ParameterError("priority groups must be non-empty")
        flat = [j for g in groups for j in g]
        if len(flat) != len(set(flat)):
            raise ParameterError("priority groups overlap")
        object.__setattr__(self, "groups", groups)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def last_group(self) -> tuple[int, ...]:
        return self.groups[-1]

    def job_ids(self) -> list[int]:
        return [j for g in self.groups for j in g]

    def group_of(self) -> dict[int, int]:
        return {j: gi for gi, g in enumerate(self.groups) for j in g}

    def validate(self, inst: Instance) -> None:
        """Raise unless the groups partition exactly the jobs of ``inst``."""
        if set(self.job_ids()) != set(inst.ids):
            raise ParameterError("priority groups do not cover the instance's jobs")

    def is_pareto_form(self, inst: Instance) -> bool:
        """All groups but the last are singletons and follow canonical order."""
        if any(len(g) != 1 for g in self.groups[:-1]):
            return False
        canon = canonicalize(inst).ids
        k = self.n_groups - 1
        return tuple(g[0] for g in self.groups[:-1]) == canon[:k] and set(
            self.last_group
        ) == set(canon[k:])


@dataclass(frozen=True)
class GroupStats:
    start_offset: float
    group_total: float


def smith_schedule(inst: Instance) -> PrioritySchedule:
    return PrioritySchedule(tuple((j,) for j in canonicalize(inst).ids))


def random_schedule(inst: Instance) -> PrioritySchedule:
    return PrioritySchedule((canonicalize(inst).ids,))


def pareto_schedule(inst: Instance, k: int) -> PrioritySchedule:
    """``A^k``: the ``k`` smallest jobs as singletons, the rest as one group."""
    if not 0 <= k <= inst.n - 1:
        raise ParameterError(f"k must lie in [0, {inst.n - 1}], got {k}")
    ids = canonicalize(inst).ids
    return PrioritySchedule(tuple((j,) for j in ids[:k]) + (ids[k:],))


def epsilon_profile(inst: Instance) -> np.ndarray:
    """``eps_k`` for every ``k`` in ``0..n-1`` (prefix mass over total)."""
    if inst.D <= 0:
        raise DegenerateInstanceError("instance has zero total size")
    canon = canonicalize(inst)
    prefix = np.empty(inst.n)
    acc = 0.0
    for k in range(inst.n):
        prefix[k] = acc
        acc += canon.sizes[k]
    return prefix / inst.D


def epsilon_k(inst: Instance, k: int) -> float:
    if not 0 <= k <= inst.n - 1:
        raise ParameterError(f"k must lie in [0, {inst.n - 1}], got {k}")
    if inst.D <= 0:
        raise DegenerateInstanceError("instance has zero total size")
    canon = canonicalize(inst)
    return lsum(canon.sizes[:k]) / inst.D


def select_k(inst: Instance, target_eps: float) -> int:
    """Largest ``k`` whose ``eps_k`` does not exceed ``target_eps``."""
    if target_eps < 0:
        raise ParameterError(f"target eps must be non-negative, got {target_eps}")
    eps = epsilon_profile(inst)
    # eps is non-decreasing, so the admissible k form a prefix
    return int(np.searchsorted(eps, target_eps, side="right")) - 1


def group_stats(inst: Instance, sched: PrioritySchedule) -> list[GroupStats]:
    sched.validate(inst)
    out = []
    offset = 0.0
    for g in sched.groups:
        total = lsum(inst.size_of[j] for j in g)
        out.append(GroupStats(offset, total))
        offset += total
    return out


def tail_decomposition(inst: Instance, sched: PrioritySchedule) -> tuple[float, float, float]:
    """``(A, B, L)``: mass before the penultimate group, in it, and in the last group."""
    stats = group_stats(inst, sched)
    last = stats[-1].group_total
    if len(stats) == 1:
        return 0.0, 0.0, last
    return stats[-2].start_offset, stats[-2].group_total, last


def expected_completions(inst: Instance, sched: PrioritySchedule) -> np.ndarray:
    """Exact expected completion per job, aligned with ``inst.ids``."""
    sched.validate(inst)
    size_of, index_of = inst.size_of, inst.index_of
    out = np.empty(inst.n)
    offset = 0.0
    for g in sched.groups:
        sizes = [size_of[j] for j in g]
        total = lsum(sizes)
        for j, d in zip(g, sizes):
            out[index_of[j]] = offset + 0.5 * (total + d)
        offset += total
    return out


def social_cost(completions) -> float:
    return math.fsum(completions)


def optimal_cost(inst: Instance) -> float:
    """Cost of Smith's rule, i.e. ``sum_i (n - i + 1) d_i`` in size order."""
    acc = 0.0
    prefix = []
    for d in canonicalize(inst).sizes:
        acc += d
        prefix.append(acc)
    return math.fsum(prefix)


def fairest_completions(inst: Instance) -> np.ndarray:
    return 0.5 * (inst.D + inst.sizes_array)


def fairest_cost(inst: Instance) -> float:
    return 0.5 * inst.D * (inst.n + 1)


def sample_order(sched: PrioritySchedule, seed: int) -> list[int]:
    """One concrete run order: each group shuffled by ``np.random.default_rng(seed)``."""
    rng = np.random.default_rng(seed)
    order = []
    for g in sched.groups:
        if len(g) == 1:
            order.append(g[0])
        else:
            order.extend(g[i] for i in rng.permutation(len(g)))
    return order
