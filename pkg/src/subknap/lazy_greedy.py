"""Density greedy with approximate lazy evaluations.

Candidates sit in a max priority queue keyed by cached density v(e)/c(e).
Each iteration pops the top entry and refreshes its gain on top of the
current selection. If the fresh gain is within a (1 - eps) factor of the
cached one, submodularity guarantees the entry's density is within (1 - eps)
of the best fresh density, so the element is selected. Otherwise the entry is
reinserted with the refreshed gain. An element refreshed more than
floor(2 ln(n/eps) / eps) times is discarded: its gain has decayed to at most
(eps/n)^2 of its initial value and can no longer matter.

The run stops once the cumulative gain reaches the target (compared with
relative slack 1e-9) or the queue is exhausted. There is no budget logic
here; callers that need feasibility filter or post-check themselves.

Elements whose fresh gain is <= 0 are dropped without being selected: a
zero-gain pop would otherwise be accepted (0 >= (1 - eps) * 0), wasting
budget downstream for no value.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .common import REL_TOL, ge
from .multilinear import DEFAULT_SUPPORT_CAP, FractionalPoint, eval_exact


def update_cap(n: int, eps: float) -> int:
    """How often an entry may go stale before it is discarded."""
    return int(math.floor(2.0 * math.log(n / eps) / eps))


@dataclass
class TranscriptRow:
    element: int
    cached_gain: float
    fresh_gain: float
    update_count: int
    action: str  # "accept" | "reinsert" | "discard" | "zero_drop"

    def to_json(self) -> dict:
        return {
            "element": self.element,
            "cached_gain": self.cached_gain,
            "fresh_gain": self.fresh_gain,
            "update_count": self.update_count,
            "action": self.action,
        }


@dataclass
class ShadowCheck:
    element: int
    density: float
    best_density: float


@dataclass
class LazyGreedyResult:
    selected: list
    discarded: dict  # element -> last fresh gain when dropped from the queue
    zero_dropped: list
    gain_achieved: float
    queries_used: int
    transcript: list = field(default_factory=list)
    shadow_checks: list = field(default_factory=list)
    initial_gains: dict = field(default_factory=dict)

    @property
    def selected_set(self) -> frozenset:
        return frozenset(self.selected)

    def shadow_ok(self, eps: float, tol: float = REL_TOL) -> bool:
        return all(
            ge(c.density, (1.0 - eps) * c.best_density, tol) for c in self.shadow_checks
        )

    def to_json(self) -> dict:
        return {
            "selected": list(self.selected),
            "discarded": {str(e): g for e, g in self.discarded.items()},
            "zero_dropped": list(self.zero_dropped),
            "gain_achieved": self.gain_achieved,
            "queries_used": self.queries_used,
            "transcript": [row.to_json() for row in self.transcript],
        }


def run(
    oracle,
    x: FractionalPoint,
    target_gain: float,
    candidates,
    eps: float,
    n: int,
    support_cap: int = DEFAULT_SUPPORT_CAP,
    shadow: bool = False,
) -> LazyGreedyResult:
    """Select elements on top of x until the marginal gain reaches target_gain.

    `candidates` are the eligible elements (already filtered by the caller);
    `n` is the ground-set size used in the staleness cap. With shadow=True,
    every acceptance is audited against unbilled fresh densities of the whole
    queue; shadow evaluations do not touch the query counter.
    """
    if target_gain < 0:
        raise ValueError("target gain must be nonnegative")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    candidates = [int(e) for e in candidates]
    start_queries = oracle.eval_count
    result = LazyGreedyResult([], {}, [], 0.0, 0)
    if not candidates:
        return result

    costs = oracle.instance.costs
    cap = update_cap(n, eps)
    quiet = oracle.quiet_view() if shadow else None

    cur_point = x
    cur_val = eval_exact(oracle, x, support_cap)
    heap = []  # (-density, element, cached gain)
    for e in sorted(candidates):
        gain = eval_exact(oracle, x.join([e]), support_cap) - cur_val
        result.initial_gains[e] = gain
        heapq.heappush(heap, (-gain / costs[e], e, gain))
    updates = {e: 0 for e in candidates}

    gain_total = 0.0
    while not ge(gain_total, target_gain):
        if not heap:
            break
        _, e, cached = heapq.heappop(heap)
        cand_point = cur_point.join([e])
        cand_val = eval_exact(oracle, cand_point, support_cap)
        fresh = cand_val - cur_val
        updates[e] += 1
        if fresh <= 0.0:
            result.zero_dropped.append(e)
            result.transcript.append(TranscriptRow(e, cached, fresh, updates[e], "zero_drop"))
            continue
        if fresh >= (1.0 - eps) * cached - REL_TOL * max(1.0, cached):
            if shadow:
                result.shadow_checks.append(
                    _shadow_audit(quiet, cur_point, cur_val, e, fresh, heap, costs, support_cap)
                )
            result.selected.append(e)
            result.transcript.append(TranscriptRow(e, cached, fresh, updates[e], "accept"))
            gain_total += fresh
            cur_point, cur_val = cand_point, cand_val
        elif updates[e] <= cap:
            result.transcript.append(TranscriptRow(e, cached, fresh, updates[e], "reinsert"))
            heapq.heappush(heap, (-fresh / costs[e], e, fresh))
        else:
            result.discarded[e] = fresh
            result.transcript.append(TranscriptRow(e, cached, fresh, updates[e], "discard"))

    result.gain_achieved = gain_total
    result.queries_used = oracle.eval_count - start_queries
    return result


def _shadow_audit(quiet, cur_point, cur_val, accepted, accepted_gain, heap, costs, support_cap):
    best = accepted_gain / costs[accepted]
    for _, e, _ in heap:
        gain = eval_exact(quiet, cur_point.join([e]), support_cap) - cur_val
        best = max(best, gain / costs[e])
    return ShadowCheck(accepted, accepted_gain / costs[accepted], best)
