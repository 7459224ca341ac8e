"""Typed hyperparameter search spaces over the unit cube.

Optimizers only ever see positions in ``[0, 1]^d``; :func:`decode` maps a
position to concrete hyperparameter values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

__all__ = [
    "ParamSpec",
    "SearchSpace",
    "decode",
    "continuous",
    "integer",
    "categorical",
    "preset_segmentation_space",
    "preset_classification_space",
    "box_space",
]

KINDS = ("continuous", "integer", "categorical")


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    lower: float | None = None
    upper: float | None = None
    choices: tuple = ()

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise ValueError("parameter name must be a nonempty string")
        if self.kind not in KINDS:
            raise ValueError(f"unknown parameter kind {self.kind!r}, expected one of {KINDS}")
        if self.kind == "categorical":
            choices = tuple(self.choices)
            if not choices:
                raise ValueError(f"{self.name}: categorical choices must be nonempty")
            if len(set(choices)) != len(choices):
                raise ValueError(f"{self.name}: categorical choices contain duplicates")
            object.__setattr__(self, "choices", choices)
        else:
            if self.lower is None or self.upper is None:
                raise ValueError(f"{self.name}: lower and upper bounds are required")
            if not self.lower < self.upper:
                raise ValueError(f"{self.name}: need lower < upper, got [{self.lower}, {self.upper}]")

    def decode(self, u: float):
        if self.kind == "categorical":
            n = len(self.choices)
            return self.choices[min(int(math.floor(u * n)), n - 1)]
        value = self.lower + u * (self.upper - self.lower)
        if self.kind == "integer":
            # round half away from zero, then clamp
            value = int(math.floor(abs(value) + 0.5)) * (1 if value >= 0 else -1)
            return int(min(max(value, math.ceil(self.lower)), math.floor(self.upper)))
        return float(value)

    def contains(self, value) -> bool:
        if self.kind == "categorical":
            return value in self.choices
        if self.kind == "integer" and int(value) != value:
            return False
        return self.lower <= value <= self.upper

    def to_dict(self) -> dict:
        if self.kind == "categorical":
            return {"kind": self.kind, "choices": list(self.choices)}
        return {"kind": self.kind, "lower": self.lower, "upper": self.upper}


def continuous(name, lower, upper):
    return ParamSpec(name, "continuous", float(lower), float(upper))


def integer(name, lower, upper):
    return ParamSpec(name, "integer", lower, upper)


def categorical(name, choices):
    return ParamSpec(name, "categorical", choices=tuple(choices))


@dataclass(frozen=True)
class SearchSpace:
    params: tuple[ParamSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        params = tuple(self.params)
        if not params:
            raise ValueError("a search space needs at least one parameter")
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names in {names}")
        object.__setattr__(self, "params", params)

    @property
    def dimension(self) -> int:
        return len(self.params)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def decode(self, position) -> dict[str, Any]:
        return decode(position, self)

    def contains(self, assignment: Mapping[str, Any]) -> bool:
        return set(assignment) == set(self.names) and all(
            p.contains(assignment[p.name]) for p in self.params
        )

    def to_dict(self) -> dict:
        return {p.name: p.to_dict() for p in self.params}

    @classmethod
    def from_dict(cls, spec: Mapping[str, Mapping[str, Any]]) -> "SearchSpace":
        """Build a space from ``{name: {kind, lower, upper} | {kind, choices}}``."""
        params = []
        for name, d in spec.items():
            kind = d.get("kind")
            if kind == "categorical":
                params.append(categorical(name, d.get("choices", ())))
            elif kind == "integer":
                params.append(integer(name, d.get("lower"), d.get("upper")))
            else:
                params.append(ParamSpec(name, kind, d.get("lower"), d.get("upper")))
        return cls(tuple(params))


def decode(position: Sequence[float], space: SearchSpace) -> dict[str, Any]:
    """Map a unit-cube position to a parameter assignment.

    Parameters
    ----------
    position : array_like
        Vector of length ``space.dimension`` with components in [0, 1].
    space : SearchSpace

    Returns
    -------
    dict
        Parameter name to decoded value, in the space's parameter order.
    """
    u = np.asarray(position, dtype=float).ravel()
    if u.size != space.dimension:
        raise ValueError(f"position has length {u.size}, space has dimension {space.dimension}")
    if not np.all(np.isfinite(u)):
        raise ValueError("position contains non-finite values")
    u = np.clip(u, 0.0, 1.0)
    return {p.name: p.decode(float(ui)) for p, ui in zip(space.params, u)}


def preset_segmentation_space() -> SearchSpace:
    """Hidden units (filters), epochs and steps per epoch of the segmenter."""
    return SearchSpace((
        integer("hidden", 5, 255),
        integer("epochs", 5, 50),
        integer("steps", 300, 1000),
    ))


def preset_classification_space() -> SearchSpace:
    """Hidden units, epochs and batch size of the classifier."""
    return SearchSpace((
        integer("hidden", 5, 255),
        integer("epochs", 5, 50),
        categorical("batch", (2, 4, 8, 16, 32, 64)),
    ))


def box_space(dimension: int, lower: float, upper: float, prefix: str = "x") -> SearchSpace:
    """Continuous hyper-rectangle ``[lower, upper]^dimension``."""
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    return SearchSpace(tuple(continuous(f"{prefix}{i}", lower, upper) for i in range(dimension)))
