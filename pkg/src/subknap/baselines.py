"""Reference algorithms: exact optimum, budgeted density greedy, partial
enumeration (Sviridenko).

These serve three roles: the exact optimum anchors every verification ratio,
the density-greedy/best-singleton pair provides the constant-factor estimate
the main driver's value grid is built from, and partial enumeration is the
classical (1 - 1/e) baseline the rounded solutions are measured against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .common import FEAS_TOL, CapacityError
from .lazy_greedy import update_cap

BRUTE_FORCE_MAX_N = 24
SVIRIDENKO_MAX_N = 120


@dataclass
class BaselineResult:
    algorithm: str
    selected: frozenset
    value: float
    cost: float
    queries: int

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "selected": sorted(self.selected),
            "value": self.value,
            "cost": self.cost,
            "queries": self.queries,
        }


def brute_force_opt(oracle, *, return_result: bool = False):
    """Exact optimum by depth-first search with cost and value pruning.

    Prunes on the remaining budget and on the monotone upper bound
    f(current | {feasible rest}); ties in value go to the lexicographically
    smallest id tuple. Refuses n > 24.
    """
    inst = oracle.instance
    n = inst.n
    if n > BRUTE_FORCE_MAX_N:
        raise CapacityError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    start_queries = oracle.eval_count
    costs = inst.costs
    best = [0.0, ()]  # value, id tuple

    def consider(ids_tuple, value):
        if value > best[0] or (value == best[0] and ids_tuple < best[1]):
            best[0], best[1] = value, ids_tuple

    def dfs(idx, chosen, cost):
        feasible_rest = [e for e in range(idx, n) if cost + costs[e] <= 1.0 + FEAS_TOL]
        if feasible_rest:
            bound = oracle.eval(chosen + feasible_rest)
            if bound < best[0]:
                return
        for pos, e in enumerate(feasible_rest):
            taken = chosen + [e]
            value = oracle.eval(taken)
            consider(tuple(taken), value)
            dfs(e + 1, taken, cost + costs[e])

    if n:
        dfs(0, [], 0.0)
    opt_set, opt_value = frozenset(best[1]), best[0]
    if return_result:
        return BaselineResult(
            "brute", opt_set, opt_value, inst.total_cost(opt_set), oracle.eval_count - start_queries
        )
    return opt_set, opt_value


def density_greedy_baseline(oracle, eps: float = 0.1) -> BaselineResult:
    """Budget-respecting density greedy with lazy evaluations, or the best
    feasible singleton, whichever is worth more."""
    inst = oracle.instance
    n = inst.n
    start_queries = oracle.eval_count
    if n == 0:
        return BaselineResult("density", frozenset(), 0.0, 0.0, 0)
    costs = inst.costs
    cap = update_cap(n, eps)

    cur_val = oracle.eval([])
    selected: list = []
    budget = 1.0
    heap = []
    updates = {}
    singles = {}
    for e in range(n):
        singles[e] = oracle.eval([e])
        gain = singles[e] - cur_val
        heapq.heappush(heap, (-gain / costs[e], e, gain))
        updates[e] = 0
    while heap:
        _, e, cached = heapq.heappop(heap)
        if costs[e] > budget + FEAS_TOL:
            continue  # can never fit again: budget only shrinks
        fresh = oracle.eval(selected + [e]) - cur_val
        updates[e] += 1
        if fresh <= 0.0:
            continue
        if fresh >= (1.0 - eps) * cached - 1e-12:
            selected.append(e)
            budget -= costs[e]
            cur_val += fresh
        elif updates[e] <= cap:
            heapq.heappush(heap, (-fresh / costs[e], e, fresh))

    best_single = max(singles, key=lambda e: (singles[e], -e))
    if singles[best_single] > cur_val:
        chosen, value = frozenset({best_single}), singles[best_single]
    else:
        chosen, value = frozenset(selected), cur_val
    return BaselineResult(
        "density", chosen, value, inst.total_cost(chosen), oracle.eval_count - start_queries
    )


def sviridenko(oracle) -> BaselineResult:
    """Partial enumeration: complete every feasible seed of size <= 3 with
    discrete density greedy under the residual budget; keep the best."""
    inst = oracle.instance
    n = inst.n
    if n > SVIRIDENKO_MAX_N:
        raise CapacityError(
            f"partial enumeration is O(n^5); refusing n = {n} > {SVIRIDENKO_MAX_N}"
        )
    start_queries = oracle.eval_count
    costs = inst.costs
    best_set: frozenset = frozenset()
    best_val = 0.0

    def complete(seed):
        chosen = list(seed)
        budget = 1.0 - sum(costs[e] for e in chosen)
        value = oracle.eval(chosen)
        remaining = [e for e in range(n) if e not in seed]
        while True:
            best_e, best_density, best_gain = None, 0.0, 0.0
            for e in remaining:
                if costs[e] > budget + FEAS_TOL:
                    continue
                gain = oracle.eval(chosen + [e]) - value
                density = gain / costs[e]
                if gain > 0 and density > best_density:
                    best_e, best_density, best_gain = e, density, gain
            if best_e is None:
                return frozenset(chosen), value
            chosen.append(best_e)
            remaining.remove(best_e)
            budget -= costs[best_e]
            value += best_gain

    for size in range(0, 4):
        for seed in itertools.combinations(range(n), size):
            if sum(costs[e] for e in seed) > 1.0 + FEAS_TOL:
                continue
            s, v = complete(seed)
            if v > best_val or (v == best_val and tuple(sorted(s)) < tuple(sorted(best_set))):
                best_set, best_val = s, v
    return BaselineResult(
        "sviridenko", best_set, best_val, inst.total_cost(best_set), oracle.eval_count - start_queries
    )
