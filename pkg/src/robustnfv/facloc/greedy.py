"""Scaled dual-fitting greedy for uncapacitated 1-level facility location.

Phase 1 grows client budgets uniformly against facility costs scaled by
``delta``; phase 2 returns to the true costs and keeps opening the facility
with the best saving-to-cost ratio while the total cost drops.
"""

from __future__ import annotations

import math

import numpy as np

from .instance import FacLocInstance, FLSolution

__all__ = ["brute_force_1fl", "greedy_1fl", "grow_budgets"]

_EPS = 1e-12


def _time_to_pay(cost: float, unconnected: np.ndarray, switch_offer: float, now: float) -> float:
    """Earliest t >= now with sum(max(t - c, 0) for c in unconnected) + switch_offer >= cost."""
    need = cost - switch_offer
    if need <= _EPS:
        return now
    cs = np.sort(unconnected)
    if cs.size == 0:
        return math.inf
    prefix = 0.0
    for k, c in enumerate(cs, start=1):
        prefix += c
        # with the k cheapest contributing: k*t - prefix = need
        t = (need + prefix) / k
        nxt = cs[k] if k < cs.size else math.inf
        if t <= nxt + _EPS and t >= c - _EPS:
            return max(t, now)
    return math.inf


def grow_budgets(inst: FacLocInstance, scale: float = 1.0) -> tuple[set[int], list[int]]:
    """Phase 1 on facility costs multiplied by ``scale``; returns (opened, assignment)."""
    f = inst.F * scale
    c = inst.C
    nf, nc = c.shape
    opened: set[int] = set()
    assign = [-1] * nc
    now = 0.0
    while any(a < 0 for a in assign):
        un = [j for j in range(nc) if assign[j] < 0]
        best_t, best_ev = math.inf, None
        # an unconnected client reaches an open facility
        for i in sorted(opened):
            for j in un:
                t = max(c[i, j], now)
                if t < best_t - _EPS:
                    best_t, best_ev = t, ("connect", i, j)
        # a closed facility is fully paid
        for i in range(nf):
            if i in opened:
                continue
            sw = sum(max(c[assign[j], j] - c[i, j], 0.0) for j in range(nc) if assign[j] >= 0)
            t = _time_to_pay(f[i], c[i, un], sw, now)
            if t < best_t - _EPS:
                best_t, best_ev = t, ("open", i, -1)
        assert best_ev is not None, "no event: instance has no facilities"
        now = best_t
        kind, i, j = best_ev
        if kind == "connect":
            assign[j] = i
            continue
        opened.add(i)
        for j in range(nc):
            if assign[j] < 0 and now >= c[i, j] - _EPS:
                assign[j] = i
            elif assign[j] >= 0 and c[i, j] < c[assign[j], j] - _EPS:
                assign[j] = i
    return opened, assign


def _nearest(inst: FacLocInstance, opened: set[int]) -> tuple[int, ...]:
    order = sorted(opened)
    c = inst.C
    return tuple(min(order, key=lambda i: (c[i, j], i)) for j in range(len(inst.clients)))


def greedy_1fl(inst: FacLocInstance, delta: float = 8.67) -> FLSolution:
    if delta < 1:
        raise ValueError("delta must be at least 1")
    if not inst.clients:
        return FLSolution(inst, (), ())
    opened, _ = grow_budgets(inst, delta)
    f, c = inst.F, inst.C
    while True:
        cur = np.array([c[i, j] for j, i in enumerate(_nearest(inst, opened))])
        best, pick = 0.0, None
        for i in range(len(inst.facilities)):
            if i in opened:
                continue
            saving = float(np.maximum(cur - c[i], 0.0).sum()) - f[i]
            if saving <= _EPS:
                continue
            ratio = math.inf if f[i] == 0 else saving / f[i]
            if pick is None or ratio > best:
                best, pick = ratio, i
        if pick is None:
            break
        opened.add(pick)
    return FLSolution(inst, tuple(sorted(opened)), _nearest(inst, opened))


def brute_force_1fl(inst: FacLocInstance, alpha: float = 1.0, beta: float = 1.0, guard: int = 2**20) -> FLSolution:
    """Exact minimizer of alpha*F + beta*C over every nonempty facility subset."""
    nf = len(inst.facilities)
    if 2**nf > guard:
        raise RuntimeError(f"{2**nf} facility subsets exceed the guard {guard}")
    f, c = inst.F, inst.C
    best, best_mask = math.inf, 0
    chunk = 1 << 12
    for lo in range(1, 2**nf, chunk):
        masks = np.arange(lo, min(lo + chunk, 2**nf))
        bits = ((masks[:, None] >> np.arange(nf)[None, :]) & 1).astype(bool)
        conn = np.where(bits[:, :, None], c[None, :, :], np.inf).min(axis=1).sum(axis=1)
        val = alpha * (bits @ f) + beta * conn
        k = int(np.argmin(val))
        if val[k] < best - _EPS:
            best, best_mask = float(val[k]), int(masks[k])
    chosen = tuple(i for i in range(nf) if best_mask >> i & 1)
    return FLSolution(inst, chosen, _nearest(inst, set(chosen)))
