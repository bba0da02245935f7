"""CPLEX LP text export."""

from __future__ import annotations

import math
from collections.abc import Iterable

from .model import MilpModel

__all__ = ["export_lp"]

_WRAP = 8  # terms per physical line


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _terms(items: Iterable[tuple[str, float]]) -> list[str]:
    out = []
    for name, c in items:
        sign = "-" if c < 0 else "+"
        out.append(f"{sign} {_num(abs(c))} {name}")
    return out


def _wrapped(head: str, terms: list[str], tail: str = "") -> list[str]:
    if not terms:
        terms = ["+ 0"]
    lines = []
    for k in range(0, len(terms), _WRAP):
        chunk = " ".join(terms[k : k + _WRAP])
        lines.append((f" {head} " if k == 0 else "   ") + chunk)
    if tail:
        lines[-1] += f" {tail}"
    return lines


def export_lp(model: MilpModel) -> str:
    """Deterministic LP text (declaration order is preserved everywhere)."""
    out = [f"\\ Problem: {model.name}"]
    if "big_m" in model.metadata:
        out.append(f"\\ big-M: {_num(model.metadata['big_m'])}")
    out.append("Minimize" if model.sense == "min" else "Maximize")
    obj = [(v, c) for v, c in model.objective.items() if c != 0.0]
    out += _wrapped("obj:", _terms(obj))
    out.append("Subject To")
    for con in model.constraints:
        op = {"<=": "<=", ">=": ">=", "=": "="}[con.sense]
        out += _wrapped(f"{con.name}:", _terms(con.coeffs), f"{op} {_num(con.rhs)}")
    out.append("Bounds")
    for v in model.variables.values():
        if v.integer and v.lb == 0.0 and v.ub == 1.0:
            continue
        if v.lb == -math.inf and v.ub == math.inf:
            out.append(f" {v.name} free")
        elif v.lb == v.ub:
            out.append(f" {v.name} = {_num(v.lb)}")
        else:
            lo = "-inf" if v.lb == -math.inf else _num(v.lb)
            hi = "+inf" if v.ub == math.inf else _num(v.ub)
            out.append(f" {lo} <= {v.name} <= {hi}")
    binaries = [v.name for v in model.variables.values() if v.binary]
    generals = [v.name for v in model.variables.values() if v.integer and not v.binary]
    if binaries:
        out.append("Binary")
        out += [" " + " ".join(binaries[k : k + _WRAP]) for k in range(0, len(binaries), _WRAP)]
    if generals:
        out.append("General")
        out += [" " + " ".join(generals[k : k + _WRAP]) for k in range(0, len(generals), _WRAP)]
    out.append("End")
    return "\n".join(out) + "\n"
