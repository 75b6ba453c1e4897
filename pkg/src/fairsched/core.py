"""Job instances: representation, (de)serialization and named generators.

An :class:`Instance` is an immutable multiset of non-negative job sizes, each
carrying a stable integer id.  Ids survive reordering, so schedules can refer
to jobs by id and never by position.

>>> inst = Instance.from_sizes([3, 1, 2])
>>> canonicalize(inst).ids
(2, 3, 1)
>>> inst.D
6.0
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InstanceParseError, InstanceValidationError, ParameterError

__all__ = [
    "Instance",
    "lsum",
    "load_instance",
    "serialize",
    "canonicalize",
    "gen_example_i",
    "gen_lower_bound",
    "gen_powers",
    "gen_uniform",
]

POWERS_MAX_P = 20


def lsum(values: Iterable[float]) -> float:
    """Plain left-to-right float summation.

    Used for every total in the package so that equal sums computed along
    different code paths agree bit for bit.
    """
    total = 0.0
    for v in values:
        total += v
    return total


@dataclass(frozen=True)
class Instance:
    """Jobs as parallel tuples of ids and sizes, in their current order."""

    ids: tuple[int, ...]
    sizes: tuple[float, ...]
    meta: dict = field(default_factory=dict, compare=False, hash=False, repr=False)
    D: float = field(init=False, compare=False)

    def __post_init__(self):
        ids = tuple(int(i) for i in self.ids)
        sizes = tuple(float(s) for s in self.sizes)
        if len(ids) != len(sizes):
            raise InstanceValidationError("ids and sizes differ in length")
        if not sizes:
            raise InstanceValidationError("an instance needs at least one job")
        if len(set(ids)) != len(ids):
            raise InstanceValidationError("job ids must be unique")
        for idx, s in enumerate(sizes):
            if not math.isfinite(s):
                raise InstanceValidationError(f"job {idx + 1}: size {s!r} is not finite", idx + 1)
            if s < 0:
                raise InstanceValidationError(f"job {idx + 1}: size {s!r} is negative", idx + 1)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "sizes", sizes)
        order = sorted(range(len(ids)), key=lambda j: (sizes[j], ids[j]))
        object.__setattr__(self, "D", lsum(sizes[j] for j in order))

    @classmethod
    def from_sizes(cls, sizes: Iterable[float], meta: dict | None = None) -> Instance:
        sizes = tuple(sizes)
        return cls(tuple(range(1, len(sizes) + 1)), sizes, dict(meta or {}))

    @property
    def n(self) -> int:
        return len(self.ids)

    @cached_property
    def size_of(self) -> dict[int, float]:
        return dict(zip(self.ids, self.sizes))

    @cached_property
    def index_of(self) -> dict[int, int]:
        return {job: pos for pos, job in enumerate(self.ids)}

    @property
    def sizes_array(self) -> np.ndarray:
        return np.asarray(self.sizes, dtype=float)

    def is_canonical(self) -> bool:
        keys = list(zip(self.sizes, self.ids))
        return all(a <= b for a, b in zip(keys, keys[1:]))

    def subset(self, job_ids: Iterable[int]) -> Instance:
        """The sub-instance made of ``job_ids`` (ids preserved)."""
        job_ids = tuple(job_ids)
        return Instance(job_ids, tuple(self.size_of[j] for j in job_ids))

    def scaled(self, factor: float) -> Instance:
        return Instance(self.ids, tuple(s * factor for s in self.sizes), dict(self.meta))


def canonicalize(inst: Instance) -> Instance:
    """Sort jobs by size, ties broken by ascending id."""
    order = sorted(range(inst.n), key=lambda j: (inst.sizes[j], inst.ids[j]))
    return Instance(
        tuple(inst.ids[j] for j in order),
        tuple(inst.sizes[j] for j in order),
        dict(inst.meta),
    )


# ---------------------------------------------------------------------------
# Ingestion and serialization
# ---------------------------------------------------------------------------


def _check_sizes(values: Sequence, *, line_of=None) -> list[float]:
    sizes = []
    for idx, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InstanceValidationError(f"job {idx + 1}: size {v!r} is not a number", idx + 1)
        v = float(v)
        if not math.isfinite(v):
            raise InstanceValidationError(f"job {idx + 1}: size {v!r} is not finite", idx + 1)
        if v < 0:
            raise InstanceValidationError(f"job {idx + 1}: size {v!r} is negative", idx + 1)
        sizes.append(v)
    if not sizes:
        raise InstanceValidationError("an instance needs at least one job")
    return sizes


def _parse_json(text: str) -> list[float]:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(obj, dict) or "sizes" not in obj:
        raise InstanceParseError('JSON instance must be an object with key "sizes"', 1, 1)
    if not isinstance(obj["sizes"], list):
        raise InstanceParseError('"sizes" must be an array of numbers', 1, 1)
    return _check_sizes(obj["sizes"])


def _parse_text(text: str) -> list[float]:
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        col = 0
        for tok in line.split():
            col = line.index(tok, col)
            try:
                values.append(float(tok))
            except ValueError:
                raise InstanceParseError(f"not a number: {tok!r}", lineno, col + 1) from None
            col += len(tok)
    return _check_sizes(values)


def load_instance(source: bytes, format: str = "auto") -> Instance:
    """Decode an instance from UTF-8 bytes.

    ``format`` is ``"json"`` (``{"sizes": [...]}``), ``"text"`` (whitespace
    separated numbers, ``#`` comment lines) or ``"auto"``, which tries JSON
    first and falls back to text.  Ids are assigned ``1..n`` in input order.
    """
    if isinstance(source, str):
        text = source
    else:
        try:
            text = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InstanceParseError(f"input is not UTF-8: {exc.reason}", None, exc.start) from None
    if format == "json":
        sizes = _parse_json(text)
    elif format == "text":
        sizes = _parse_text(text)
    elif format == "auto":
        try:
            sizes = _parse_json(text)
        except InstanceParseError as json_err:
            if text.lstrip().startswith(("{", "[")):
                raise json_err
            sizes = _parse_text(text)
    else:
        raise ParameterError(f"unknown instance format {format!r}")
    return Instance.from_sizes(sizes)


def _number(x: float):
    if x.is_integer() and abs(x) < 2**53:
        return int(x)
    return x


def serialize(inst: Instance, format: str = "json") -> bytes:
    """Encode sizes in current job order; inverse of :func:`load_instance`."""
    if format == "json":
        return (json.dumps({"sizes": [_number(s) for s in inst.sizes]}) + "\n").encode()
    if format == "text":
        return "".join(f"{_number(s)!r}\n" for s in inst.sizes).encode()
    raise ParameterError(f"unknown instance format {format!r}")


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def gen_example_i(n: int, large: float) -> Instance:
    """``n - 1`` unit jobs followed by one job of size ``large``."""
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if not large > 1:
        raise ParameterError(f"large must exceed 1, got {large}")
    return Instance.from_sizes([1.0] * (n - 1) + [float(large)], {"generator": "example-i"})


def gen_lower_bound(eps: float, D_target: float) -> Instance:
    """Tight instance for the efficacy lower bound.

    ``round(2 * eps * D_target)`` unit jobs plus one large job carrying the
    remaining mass.  Under target fairness ``eps`` exactly half of the unit
    jobs land in the Smith-ordered prefix.
    """
    if not 0 < eps < 0.5:
        raise ParameterError(f"eps must lie in (0, 1/2), got {eps}")
    m_count = int(round(2 * eps * D_target))
    if m_count < 1:
        raise ParameterError(f"2*eps*D rounds to {m_count}; need at least one unit job")
    large = D_target - m_count
    if not large > 1:
        raise ParameterError(f"large job would have size {large}; must exceed 1")
    meta = {
        "generator": "lower-bound",
        "eps": eps,
        "achieved_eps": m_count / 2 / D_target,
    }
    return Instance.from_sizes([1.0] * m_count + [float(large)], meta)


def gen_powers(p: int) -> Instance:
    """``2**(p - l)`` jobs of size ``2**l`` for every ``l`` in ``0..p``."""
    if not isinstance(p, (int, np.integer)) or isinstance(p, bool) or not 0 <= p <= POWERS_MAX_P:
        raise ParameterError(f"p must be an integer in [0, {POWERS_MAX_P}], got {p!r}")
    sizes = []
    for ell in range(p + 1):
        sizes.extend([float(2**ell)] * (2 ** (p - ell)))
    return Instance.from_sizes(sizes, {"generator": "powers", "p": int(p)})


def gen_uniform(n: int, max_size: float, seed: int) -> Instance:
    """``n`` sizes i.i.d. uniform on ``(0, max_size]`` (numpy PCG64 stream)."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if not max_size > 0:
        raise ParameterError(f"max_size must be positive, got {max_size}")
    rng = np.random.default_rng(seed)
    sizes = max_size * (1.0 - rng.random(n))
    return Instance.from_sizes(sizes.tolist(), {"generator": "uniform", "seed": seed})
