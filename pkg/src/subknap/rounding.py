"""Randomized pairwise rounding of the fractional coordinates.

The fractional entries are sorted by cost; each step merges the two
highest-cost entries with branch probabilities that keep every coordinate's
expectation fixed:

  sum <= 1:  one entry absorbs the pair's mass (probability proportional to
             its own mass), the other drops to 0;
  sum > 1:   one entry is rounded up to 1 (probability proportional to the
             complement of the other's mass), the other keeps sum - 1.

Entries reaching 1 join the selected set; entries reaching 0 are removed; a
final lone fractional entry is rounded up. Each iteration removes exactly one
entry, so there are at most k steps. Processing in cost order is what lets
the rounded-up mass be charged against a cost-dominating anchor profile,
which `grouping_certificate` checks: lay the fractional masses (sorted by
nonincreasing cost) on an interval, cut it into unit-mass groups, and require
every group's elements to be cost-dominated by the matching anchor. When the
certificate holds, total rounded-up cost never exceeds the anchor total on
any sample path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .common import FEAS_TOL, SNAP_TOL
from .multilinear import FractionalPoint


@dataclass
class RoundingStep:
    high: int          # element with the higher cost in the merged pair
    low: int
    case: str          # "merge_low" (sum <= 1) | "merge_high" (sum > 1) | "lone"
    prob: float        # probability that `high` won the draw
    draw: float        # uniform variate consumed
    high_after: float
    low_after: float

    def to_json(self) -> dict:
        return self.__dict__.copy()


@dataclass
class RoundingTranscript:
    steps: list = field(default_factory=list)
    rounded_up: list = field(default_factory=list)  # fractional entries that hit 1
    dropped: list = field(default_factory=list)     # fractional entries that hit 0

    def to_json(self) -> dict:
        return {
            "steps": [s.to_json() for s in self.steps],
            "rounded_up": list(self.rounded_up),
            "dropped": list(self.dropped),
        }


def swap_round(point: FractionalPoint, costs: np.ndarray, rng) -> tuple:
    """Round `point` to a set; returns (selected ids, transcript).

    The integral part passes through untouched. `rng` is a numpy Generator;
    one uniform draw is consumed per pairwise merge (lone round-up draws
    nothing), so a transcript replays exactly.
    """
    for _, v in point.frac_items:
        if not 0.0 < v < 1.0:
            raise ValueError("fractional values must lie strictly in (0, 1)")
    # ascending cost, ties by id; the live pair is the last two entries
    entries = sorted(
        [[float(costs[e]), e, v] for e, v in point.frac_items], key=lambda t: (t[0], t[1])
    )
    tr = RoundingTranscript()

    def finalize(entry, up: bool):
        if up:
            tr.rounded_up.append(entry[1])
        else:
            tr.dropped.append(entry[1])

    while entries:
        if len(entries) == 1:
            cost, e, v = entries.pop()
            tr.steps.append(RoundingStep(e, e, "lone", 1.0, 1.0, 1.0, 1.0))
            finalize((cost, e, v), up=True)
            continue
        hi = entries[-1]
        lo = entries[-2]
        s = hi[2] + lo[2]
        u = float(rng.random())
        if s > 1.0:
            prob_hi = (1.0 - lo[2]) / (2.0 - s)
            if u < prob_hi:
                entries.pop()
                finalize(hi, up=True)
                lo[2] = s - 1.0
                step = RoundingStep(hi[1], lo[1], "merge_high", prob_hi, u, 1.0, lo[2])
                survivor = lo
            else:
                del entries[-2]
                finalize(lo, up=True)
                hi[2] = s - 1.0
                step = RoundingStep(hi[1], lo[1], "merge_high", prob_hi, u, hi[2], 1.0)
                survivor = hi
        else:
            prob_hi = hi[2] / s
            if u < prob_hi:
                del entries[-2]
                finalize(lo, up=False)
                hi[2] = s
                step = RoundingStep(hi[1], lo[1], "merge_low", prob_hi, u, s, 0.0)
                survivor = hi
            else:
                entries.pop()
                finalize(hi, up=False)
                lo[2] = s
                step = RoundingStep(hi[1], lo[1], "merge_low", prob_hi, u, 0.0, s)
                survivor = lo
        tr.steps.append(step)
        # integrality sweep: the survivor always sits at the end of the list
        assert entries[-1] is survivor
        if survivor[2] >= 1.0 - SNAP_TOL:
            entries.pop()
            finalize(survivor, up=True)
        elif survivor[2] <= SNAP_TOL:
            entries.pop()
            finalize(survivor, up=False)

    selected = frozenset(point.integral) | frozenset(tr.rounded_up)
    return selected, tr


def replay(point: FractionalPoint, costs: np.ndarray, transcript: RoundingTranscript):
    """Re-run a transcript's draws; returns the reproduced selected set."""
    draws = iter(s.draw for s in transcript.steps if s.case != "lone")

    class _Replay:
        def random(self):
            return next(draws)

    selected, _ = swap_round(point, costs, _Replay())
    return selected


@dataclass
class GroupWitness:
    group: int
    element: int
    element_cost: float
    anchor_cost: float | None


@dataclass
class CertificateResult:
    ok: bool
    total_mass: float
    witness: GroupWitness | None
    groups: list  # per group: list of (element, overlap mass)

    def __bool__(self) -> bool:
        return self.ok


def grouping_certificate(point: FractionalPoint, costs: np.ndarray, anchor_costs) -> CertificateResult:
    """Check the interval grouping of fractional mass against anchor costs.

    Fractional elements are laid on [0, total mass) in nonincreasing cost
    order; group i is whatever overlaps [i-1, i). The certificate holds when
    total mass <= len(anchors) and every element of group i costs at most the
    i-th largest anchor cost. Elements straddle at most two groups because
    each coordinate is below 1.
    """
    anchors = sorted((float(c) for c in anchor_costs), reverse=True)
    items = sorted(point.frac_items, key=lambda t: (-costs[t[0]], t[0]))
    total = float(sum(v for _, v in items))
    groups: list = []
    witness = None
    start = 0.0
    for e, v in items:
        first = int(np.floor(start + 1e-12))
        last = int(np.ceil(start + v - 1e-12))
        for g in range(first, last):
            while len(groups) <= g:
                groups.append([])
            overlap = min(start + v, g + 1) - max(start, g)
            groups[g].append((e, float(overlap)))
            if witness is None:
                if g >= len(anchors):
                    witness = GroupWitness(g + 1, e, float(costs[e]), None)
                elif costs[e] > anchors[g] + SNAP_TOL:
                    witness = GroupWitness(g + 1, e, float(costs[e]), anchors[g])
        start += v
    ok = witness is None and total <= len(anchors) + FEAS_TOL
    if witness is None and total > len(anchors) + FEAS_TOL:
        witness = GroupWitness(len(anchors), -1, float("nan"), None)
    return CertificateResult(ok, total, witness, groups)
