"""Fairness and efficacy measures, bound functions and instance reductions.

Fairness of a job is its expected completion divided by its completion under
the random rule; the fairness ratio of a mechanism is the worst such value.
Efficacy is social cost over optimal (Smith) cost.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import mechanisms as mech
from .core import Instance, canonicalize, lsum
from .errors import DegenerateInstanceError, ParameterError

__all__ = [
    "MechanismSpec",
    "parse_mechanism",
    "resolve_k",
    "PerJob",
    "EvaluationReport",
    "per_job_fairness",
    "fairness_ratio",
    "efficacy_ratio",
    "price_of_fairness",
    "bound_upper",
    "bound_lower",
    "reduce_instance",
    "evaluate",
]


@dataclass(frozen=True)
class MechanismSpec:
    """``smith``, ``random``, ``pareto:K`` or ``target:EPS``."""

    kind: str
    k: int | None = None
    eps: float | None = None

    def __str__(self):
        if self.kind == "pareto":
            return f"pareto:{self.k}"
        if self.kind == "target":
            return f"target:{self.eps!r}"
        return self.kind


def parse_mechanism(text: str | MechanismSpec) -> MechanismSpec:
    if isinstance(text, MechanismSpec):
        return text
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    if kind in ("smith", "random") and not arg:
        return MechanismSpec(kind)
    if kind == "pareto" and arg:
        try:
            k = int(arg)
        except ValueError:
            raise ParameterError(f"pareto:K needs an integer K, got {arg!r}") from None
        if k < 0:
            raise ParameterError(f"pareto:K needs K >= 0, got {k}")
        return MechanismSpec("pareto", k=k)
    if kind == "target" and arg:
        try:
            eps = float(arg)
        except ValueError:
            raise ParameterError(f"target:EPS needs a number, got {arg!r}") from None
        if not (math.isfinite(eps) and eps >= 0):
            raise ParameterError(f"target:EPS needs EPS >= 0, got {arg!r}")
        return MechanismSpec("target", eps=eps)
    raise ParameterError(f"unknown mechanism {text!r}")


def resolve_k(inst: Instance, spec: MechanismSpec) -> int:
    """The Pareto index ``k`` realized by ``spec`` on ``inst``."""
    if spec.kind == "smith":
        return inst.n - 1
    if spec.kind == "random":
        return 0
    if spec.kind == "pareto":
        if not 0 <= spec.k <= inst.n - 1:
            raise ParameterError(f"k must lie in [0, {inst.n - 1}], got {spec.k}")
        return spec.k
    return mech.select_k(inst, spec.eps)


def per_job_fairness(inst: Instance, completions, fair_completions=None) -> np.ndarray:
    """``c_i / c_i(fair)``; the default denominator is the random rule's ``(D + d_i) / 2``."""
    if inst.D <= 0:
        raise DegenerateInstanceError("fairness is undefined when every job has size 0")
    if fair_completions is None:
        fair_completions = mech.fairest_completions(inst)
    return np.asarray(completions, dtype=float) / np.asarray(fair_completions, dtype=float)


def fairness_ratio(fairness: Iterable[float]) -> float:
    return float(max(fairness))


def efficacy_ratio(inst: Instance, social_cost: float, optimal: float | None = None) -> float:
    if optimal is None:
        optimal = mech.optimal_cost(inst)
    if optimal <= 0:
        raise DegenerateInstanceError("optimal cost is zero; efficacy ratio undefined")
    return social_cost / optimal


def bound_upper(eps: float) -> float:
    """Efficacy guarantee of ``A^k`` at fairness level ``eps``: ``1/(4 eps) + 1 + eps/4``."""
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    return 1.0 / (4.0 * eps) + 1.0 + eps / 4.0


def bound_lower(eps: float, clamp: bool = False) -> float:
    """Worst-case efficacy lower bound ``1/(4 eps) + 1/2``; ``clamp`` floors it at 1."""
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    value = 1.0 / (4.0 * eps) + 0.5
    return max(value, 1.0) if clamp else value


def _efficacy_of(inst: Instance, spec: MechanismSpec) -> float:
    sched = mech.pareto_schedule(inst, resolve_k(inst, spec))
    cost = mech.social_cost(mech.expected_completions(inst, sched))
    return efficacy_ratio(inst, cost)


def price_of_fairness(mechanism, instances: Iterable[Instance]) -> float:
    """Empirical worst efficacy ratio of ``mechanism`` over ``instances``."""
    spec = parse_mechanism(mechanism)
    worst = None
    for inst in instances:
        r = _efficacy_of(inst, spec)
        worst = r if worst is None else max(worst, r)
    if worst is None:
        raise ParameterError("price of fairness needs at least one instance")
    return worst


def reduce_instance(inst: Instance, k: int) -> Instance:
    """Worst-case-preserving simplification of ``inst`` for ``A^k``.

    Sizes are rescaled so that the first job of the random group has size 1.
    Jobs strictly smaller than that become 0; jobs strictly larger collapse to
    1 except the largest, which absorbs their mass so the large total is
    unchanged.  ``meta["scale"]`` holds the factor applied before the rewrite.
    If that first job has size 0 nothing can be rescaled and the canonical
    instance is returned with scale 1.
    """
    if not 0 <= k <= inst.n - 1:
        raise ParameterError(f"k must lie in [0, {inst.n - 1}], got {k}")
    if inst.D <= 0:
        raise DegenerateInstanceError("instance has zero total size")
    canon = canonicalize(inst)
    unit = canon.sizes[k]
    if unit == 0:
        return Instance(canon.ids, canon.sizes, {"scale": 1.0, "reduced_from_k": k})
    scale = 1.0 / unit
    sizes = [d * scale for d in canon.sizes]
    # the unit job itself may drift off 1.0 by rounding; pin it
    sizes = [1.0 if d == unit else s for d, s in zip(canon.sizes, sizes)]
    large = [i for i, d in enumerate(canon.sizes) if d > unit]
    out = [0.0 if d < unit else s for d, s in zip(canon.sizes, sizes)]
    if large:
        total_large = lsum(sizes[i] for i in large)
        for i in large[:-1]:
            out[i] = 1.0
        out[large[-1]] = total_large - (len(large) - 1)
    return canonicalize(
        Instance(canon.ids, tuple(out), {"scale": scale, "reduced_from_k": k})
    )


@dataclass(frozen=True)
class PerJob:
    id: int
    size: float
    expected_completion: float
    fair_completion: float
    fairness: float


@dataclass
class EvaluationReport:
    mechanism: str
    k: int | None
    epsilon_k: float
    per_job: list[PerJob]
    fairness_ratio: float
    social_cost: float
    optimal_cost: float
    fairest_cost: float
    efficacy_ratio: float
    bound_upper: float | None
    bound_lower: float | None
    bound_lower_raw: float | None = None
    extra: dict = field(default_factory=dict)

    def fairness_array(self) -> np.ndarray:
        return np.array([p.fairness for p in self.per_job])

    def completions_by_id(self) -> dict[int, float]:
        return {p.id: p.expected_completion for p in self.per_job}

    def argmax_job(self) -> PerJob:
        return max(self.per_job, key=lambda p: p.fairness)

    def to_dict(self) -> dict:
        out = {
            "mechanism": self.mechanism,
            "k": self.k,
            "epsilon_k": self.epsilon_k,
            "per_job": [asdict(p) for p in self.per_job],
            "fairness_ratio": self.fairness_ratio,
            "social_cost": self.social_cost,
            "optimal_cost": self.optimal_cost,
            "fairest_cost": self.fairest_cost,
            "efficacy_ratio": self.efficacy_ratio,
            "bound_upper": self.bound_upper,
            "bound_lower": self.bound_lower,
            "bound_lower_raw": self.bound_lower_raw,
        }
        out.update(self.extra)
        return out


def _bounds(eps: float) -> tuple[float | None, float | None, float | None]:
    if eps > 0:
        return bound_upper(eps), bound_lower(eps, clamp=True), bound_lower(eps)
    return None, None, None


def build_report(
    inst: Instance,
    mechanism: str,
    k: int | None,
    eps: float,
    completions: Sequence[float],
    fair: Sequence[float],
    optimal: float,
    fairest: float,
    bound_eps: float,
    keep=None,
) -> EvaluationReport:
    """Assemble a report; ``keep`` masks which jobs count as agents."""
    completions = np.asarray(completions, dtype=float)
    fair = np.asarray(fair, dtype=float)
    keep = np.ones(inst.n, dtype=bool) if keep is None else np.asarray(keep, dtype=bool)
    fairness = completions / fair
    per_job = [
        PerJob(j, d, float(c), float(fc), float(f))
        for j, d, c, fc, f, kp in zip(inst.ids, inst.sizes, completions, fair, fairness, keep)
        if kp
    ]
    cost = mech.social_cost(completions[keep])
    upper, lower, lower_raw = _bounds(bound_eps)
    return EvaluationReport(
        mechanism=mechanism,
        k=k,
        epsilon_k=eps,
        per_job=per_job,
        fairness_ratio=float(np.max(fairness[keep])),
        social_cost=cost,
        optimal_cost=optimal,
        fairest_cost=fairest,
        efficacy_ratio=efficacy_ratio(inst, cost, optimal),
        bound_upper=upper,
        bound_lower=lower,
        bound_lower_raw=lower_raw,
    )


def evaluate(inst: Instance, mechanism) -> EvaluationReport:
    """Evaluate a single-machine mechanism exactly."""
    spec = parse_mechanism(mechanism)
    if inst.D <= 0:
        raise DegenerateInstanceError("cannot evaluate ratios on a zero-size instance")
    k = resolve_k(inst, spec)
    sched = mech.pareto_schedule(inst, k)
    eps = mech.epsilon_k(inst, k)
    completions = mech.expected_completions(inst, sched)
    return build_report(
        inst,
        str(spec),
        k,
        eps,
        completions,
        mech.fairest_completions(inst),
        mech.optimal_cost(inst),
        mech.fairest_cost(inst),
        bound_eps=eps,
    )
