"""Generic linear model container."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Literal

__all__ = ["Constraint", "MilpModel", "ModelError", "Variable"]

Sense = Literal["<=", ">=", "="]


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float = 0.0
    ub: float = math.inf
    integer: bool = False
    implied: bool = False  # integral whenever the branching variables are

    @property
    def binary(self) -> bool:
        return self.integer and self.lb == 0.0 and self.ub == 1.0


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: tuple[tuple[str, float], ...]
    sense: Sense
    rhs: float

    def activity(self, values: dict[str, float]) -> float:
        return sum(c * values[v] for v, c in self.coeffs)

    def satisfied(self, values: dict[str, float], tol: float = 1e-9) -> bool:
        a = self.activity(values)
        scale = tol * max(1.0, abs(self.rhs))
        if self.sense == "<=":
            return a <= self.rhs + scale
        if self.sense == ">=":
            return a >= self.rhs - scale
        return abs(a - self.rhs) <= scale


@dataclass
class MilpModel:
    name: str
    variables: dict[str, Variable] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    sense: Literal["min", "max"] = "min"
    metadata: dict[str, Any] = field(default_factory=dict)

    def add_var(self, name: str, lb: float = 0.0, ub: float = math.inf, integer: bool = False, implied: bool = False) -> str:
        if name in self.variables:
            raise ModelError(f"variable {name} declared twice")
        if len(name) > 255:
            raise ModelError(f"variable name longer than 255 characters: {name[:40]}...")
        self.variables[name] = Variable(name, lb, ub, integer, implied)
        return name

    def add_binary(self, name: str, implied: bool = False) -> str:
        return self.add_var(name, 0.0, 1.0, True, implied)

    def add_constraint(self, name: str, coeffs: dict[str, float] | list[tuple[str, float]], sense: Sense, rhs: float) -> None:
        items = list(coeffs.items()) if isinstance(coeffs, dict) else list(coeffs)
        merged: dict[str, float] = {}
        for v, c in items:
            if v not in self.variables:
                raise ModelError(f"constraint {name} references undeclared variable {v}")
            merged[v] = merged.get(v, 0.0) + c
        self.constraints.append(Constraint(name, tuple((v, c) for v, c in merged.items() if c != 0.0), sense, float(rhs)))

    def family(self, prefix: str) -> list[Constraint]:
        return [c for c in self.constraints if c.name.split("_", 1)[0] == prefix]

    def objective_value(self, values: dict[str, float]) -> float:
        return sum(c * values[v] for v, c in self.objective.items())

    def violations(self, values: dict[str, float], tol: float = 1e-9) -> list[str]:
        out = []
        for v in self.variables.values():
            x = values[v.name]
            if x < v.lb - tol or x > v.ub + tol:
                out.append(f"bound of {v.name}: {x}")
            if v.integer and abs(x - round(x)) > tol:
                out.append(f"integrality of {v.name}: {x}")
        out += [f"row {c.name}" for c in self.constraints if not c.satisfied(values, tol)]
        return out
