"""Search-space definition, validation, and unit-cube encoding.

Tuners work on genomes: vectors in [0, 1]^dim. Decoding to typed parameter
values happens only when a trial is dispatched, so every tuner sees one
uniform geometry regardless of parameter types.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    DuplicateNameError,
    InvalidRangeError,
    PopulationTooSmallError,
    SchemaError,
)

Genome = np.ndarray
Configuration = dict[str, Union[float, int, str]]

MIN_POPULATION = 4  # rand-to-p-best/1 needs 3 distinct partners plus the target


@dataclass(frozen=True)
class Continuous:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidRangeError(f"continuous range requires lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class LogContinuous:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo <= 0:
            raise InvalidRangeError(f"log_continuous requires lo > 0, got lo={self.lo}")
        if not self.lo < self.hi:
            raise InvalidRangeError(f"log_continuous range requires lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Integer:
    lo: int
    hi: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidRangeError(f"integer range requires lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Categorical:
    choices: tuple[str, ...]

    def __post_init__(self):
        if len(self.choices) < 2:
            raise InvalidRangeError("categorical requires at least 2 choices")


ParamKind = Union[Continuous, LogContinuous, Integer, Categorical]

_TYPE_NAMES = {
    Continuous: "continuous",
    LogContinuous: "log_continuous",
    Integer: "integer",
    Categorical: "categorical",
}


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: ParamKind

    def __post_init__(self):
        if not self.name:
            raise SchemaError("parameter name must be non-empty")


@dataclass(frozen=True)
class SearchSpace:
    params: tuple[ParamSpec, ...]

    def __post_init__(self):
        if len(self.params) < 1:
            raise SchemaError("search space needs at least one parameter")
        seen = set()
        for p in self.params:
            if p.name in seen:
                raise DuplicateNameError(f"duplicate parameter name {p.name!r}")
            seen.add(p.name)

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)


def _kind_from_dict(entry: dict) -> ParamKind:
    try:
        type_name = entry["type"]
    except KeyError:
        raise SchemaError(f"parameter entry missing 'type': {entry!r}") from None
    if type_name == "categorical":
        choices = entry.get("choices")
        if not isinstance(choices, list):
            raise SchemaError(f"categorical parameter needs a 'choices' list: {entry!r}")
        return Categorical(tuple(str(c) for c in choices))
    try:
        lo, hi = entry["lo"], entry["hi"]
    except KeyError as exc:
        raise SchemaError(f"parameter entry missing {exc}: {entry!r}") from None
    if type_name == "continuous":
        return Continuous(float(lo), float(hi))
    if type_name == "log_continuous":
        return LogContinuous(float(lo), float(hi))
    if type_name == "integer":
        return Integer(int(lo), int(hi))
    raise SchemaError(f"unknown parameter type {type_name!r}")


def space_from_dict(doc: dict) -> SearchSpace:
    """Build a SearchSpace from an already-parsed JSON document."""
    if not isinstance(doc, dict) or not isinstance(doc.get("params"), list):
        raise SchemaError("search space document must be {'params': [...]}")
    specs = []
    for entry in doc["params"]:
        if not isinstance(entry, dict):
            raise SchemaError(f"parameter entry must be an object: {entry!r}")
        name = entry.get("name")
        if not isinstance(name, str):
            raise SchemaError(f"parameter entry missing string 'name': {entry!r}")
        specs.append(ParamSpec(name=name, kind=_kind_from_dict(entry)))
    return SearchSpace(params=tuple(specs))


def space_to_dict(space: SearchSpace) -> dict:
    """Inverse of space_from_dict; used when journaling an experiment."""
    params = []
    for p in space.params:
        entry: dict = {"name": p.name, "type": _TYPE_NAMES[type(p.kind)]}
        if isinstance(p.kind, Categorical):
            entry["choices"] = list(p.kind.choices)
        else:
            entry["lo"] = p.kind.lo
            entry["hi"] = p.kind.hi
        params.append(entry)
    return {"params": params}


def parse_space(text: str) -> SearchSpace:
    """Parse and validate a search-space JSON document.

    Raises json.JSONDecodeError on malformed JSON, SchemaError (or a
    subclass) on structural and range problems.
    """
    return space_from_dict(json.loads(text))


def _round_half_away(x: float) -> float:
    return math.copysign(math.floor(abs(x) + 0.5), x)


def decode(space: SearchSpace, genome: Genome) -> Configuration:
    """Map a unit-cube genome to concrete parameter values."""
    if len(genome) != space.dim:
        raise DimensionMismatchError(f"genome length {len(genome)} != space dim {space.dim}")
    values: Configuration = {}
    for u, p in zip(genome, space.params):
        u = float(u)
        kind = p.kind
        if isinstance(kind, Continuous):
            # clamp: rounding at u near 1 must not escape the range
            values[p.name] = min(max(kind.lo + u * (kind.hi - kind.lo), kind.lo), kind.hi)
        elif isinstance(kind, LogContinuous):
            raw = math.exp(math.log(kind.lo) + u * (math.log(kind.hi) - math.log(kind.lo)))
            values[p.name] = min(max(raw, kind.lo), kind.hi)
        elif isinstance(kind, Integer):
            raw = _round_half_away(kind.lo + u * (kind.hi - kind.lo))
            values[p.name] = int(min(max(raw, kind.lo), kind.hi))
        else:
            k = len(kind.choices)
            values[p.name] = kind.choices[min(int(math.floor(u * k)), k - 1)]
    return values


def encode(space: SearchSpace, config: Configuration) -> Genome:
    """Map concrete parameter values back into the unit cube.

    Categorical values land on their bucket center, so decode(encode(c))
    round-trips every parameter kind.
    """
    coords = np.empty(space.dim)
    for j, p in enumerate(space.params):
        try:
            v = config[p.name]
        except KeyError:
            raise DimensionMismatchError(f"configuration missing parameter {p.name!r}") from None
        kind = p.kind
        if isinstance(kind, Continuous):
            coords[j] = (float(v) - kind.lo) / (kind.hi - kind.lo)
        elif isinstance(kind, LogContinuous):
            coords[j] = (math.log(float(v)) - math.log(kind.lo)) / (math.log(kind.hi) - math.log(kind.lo))
        elif isinstance(kind, Integer):
            coords[j] = (float(v) - kind.lo) / (kind.hi - kind.lo)
        else:
            idx = kind.choices.index(str(v))
            coords[j] = (idx + 0.5) / len(kind.choices)
    return np.clip(coords, 0.0, 1.0)


def _first_primes(n: int) -> list[int]:
    primes: list[int] = []
    candidate = 2
    while len(primes) < n:
        if all(candidate % p for p in primes):
            primes.append(candidate)
        candidate += 1
    return primes


def _radical_inverse(index: int, base: int) -> float:
    inv, denom = 0.0, 1.0
    while index > 0:
        index, digit = divmod(index, base)
        denom *= base
        inv += digit / denom
    return inv


def halton_point(index: int, dim: int) -> Genome:
    """Point number `index` (1-based) of the dim-dimensional Halton sequence.

    Coordinate j is the radical inverse of the index in the j-th prime base,
    so every coordinate falls strictly inside (0, 1).
    """
    if index < 1:
        raise ValueError("halton index starts at 1")
    bases = _first_primes(dim)
    return np.array([_radical_inverse(index, b) for b in bases])


def init_population(space: SearchSpace, n: int, scheme: str = "uniform",
                    seed=None) -> list[Genome]:
    """Generate the initial population of genomes.

    halton: consecutive low-discrepancy points, shifted by a seeded random
    start index in [1, 10^4] so repeated experiments do not reuse identical
    populations (offset 0 when seed is None). uniform: i.i.d. points from
    the seeded generator.
    """
    if n < MIN_POPULATION:
        raise PopulationTooSmallError(f"population size {n} < {MIN_POPULATION}")
    if scheme == "uniform":
        rng = np.random.default_rng(seed)
        return [rng.uniform(size=space.dim) for _ in range(n)]
    if scheme == "halton":
        offset = 0
        if seed is not None:
            offset = int(np.random.default_rng(seed).integers(1, 10_000, endpoint=True))
        return [halton_point(offset + i, space.dim) for i in range(1, n + 1)]
    raise ValueError(f"unknown init scheme {scheme!r}")
