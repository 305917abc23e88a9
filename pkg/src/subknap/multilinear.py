"""Exact and Monte-Carlo evaluation of the multilinear extension.

For a point x with integral part I (coordinates at 1) and fractional support
E = {e : 0 < x_e < 1}, the extension is

    F(x) = sum over T subset of E of  f(I | T) * prod_{e in T} x_e
                                               * prod_{e in E\\T} (1 - x_e),

i.e. the expectation of f over independent inclusion of each fractional
element. With |E| = k this costs exactly 2^k oracle queries, which is the
whole point of keeping k bounded: F is evaluated exactly, never sampled.
Exceeding the support cap raises CapacityError instead of degrading.

Points are immutable; coordinate updates return new points. Values within
1e-12 of 1 snap to the integral part so repeated step increments terminate
cleanly despite float drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .common import SNAP_TOL, CapacityError

DEFAULT_SUPPORT_CAP = 20


@dataclass(frozen=True)
class FractionalPoint:
    integral: frozenset = frozenset()
    frac_items: tuple = ()  # ((id, value), ...) sorted by id, values in (0,1)

    def __post_init__(self):
        ids = [e for e, _ in self.frac_items]
        if ids != sorted(set(ids)):
            raise ValueError("fractional support must be sorted and duplicate-free")
        if any(e in self.integral for e in ids):
            raise ValueError("integral set and fractional support must be disjoint")
        if any(not 0.0 < v < 1.0 for _, v in self.frac_items):
            raise ValueError("fractional values must lie strictly in (0, 1)")

    @classmethod
    def zero(cls) -> "FractionalPoint":
        return cls()

    @classmethod
    def from_set(cls, ids) -> "FractionalPoint":
        return cls(integral=frozenset(int(e) for e in ids))

    @classmethod
    def make(cls, fractional: dict, integral=()) -> "FractionalPoint":
        """Build from a mapping, snapping values within 1e-12 of {0, 1}."""
        integral = set(int(e) for e in integral)
        items = []
        for e, v in fractional.items():
            v = float(v)
            if v < -SNAP_TOL or v > 1 + SNAP_TOL:
                raise ValueError(f"coordinate {v} outside [0, 1]")
            if v >= 1 - SNAP_TOL:
                integral.add(int(e))
            elif v > SNAP_TOL:
                items.append((int(e), v))
        return cls(frozenset(integral), tuple(sorted(items)))

    @cached_property
    def fractional(self) -> dict:
        return dict(self.frac_items)

    @cached_property
    def base_ids(self) -> np.ndarray:
        return np.asarray(sorted(self.integral), dtype=np.int64)

    @cached_property
    def frac_ids(self) -> np.ndarray:
        return np.asarray([e for e, _ in self.frac_items], dtype=np.int64)

    @cached_property
    def frac_vals(self) -> np.ndarray:
        return np.asarray([v for _, v in self.frac_items], dtype=np.float64)

    @property
    def support_size(self) -> int:
        return len(self.frac_items)

    def coordinate(self, e: int) -> float:
        if e in self.integral:
            return 1.0
        return self.fractional.get(e, 0.0)

    def join(self, ids) -> "FractionalPoint":
        """Coordinate-wise max with the indicator of `ids` (sets them to 1)."""
        ids = frozenset(int(e) for e in ids)
        if not ids:
            return self
        return FractionalPoint(
            self.integral | ids,
            tuple((e, v) for e, v in self.frac_items if e not in ids),
        )

    def without(self, e: int) -> "FractionalPoint":
        """Set coordinate e to 0 (drops it from either part)."""
        return FractionalPoint(
            self.integral - {e}, tuple(it for it in self.frac_items if it[0] != e)
        )

    def total_cost(self, costs: np.ndarray) -> float:
        total = float(costs[self.base_ids].sum()) if self.integral else 0.0
        if self.frac_items:
            total += float(costs[self.frac_ids] @ self.frac_vals)
        return total


def increase_coordinate(x: FractionalPoint, e: int, delta: float) -> FractionalPoint:
    """Return x with coordinate e raised by delta; snaps to 1 within 1e-12."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    e = int(e)
    cur = x.coordinate(e)
    new = cur + delta
    if new > 1 + SNAP_TOL:
        raise ValueError(f"coordinate {e} would exceed 1 ({cur} + {delta})")
    rest = tuple(it for it in x.frac_items if it[0] != e)
    if new >= 1 - SNAP_TOL:
        return FractionalPoint(x.integral | {e}, rest)
    return FractionalPoint(x.integral, tuple(sorted(rest + ((e, new),))))


def subset_weights(vals: np.ndarray) -> np.ndarray:
    """Inclusion probabilities of all 2^k subsets, indexed by bitmask."""
    w = np.ones(1)
    for v in vals:
        w = np.concatenate((w * (1.0 - v), w * v))
    return w


def _check_cap(k: int, support_cap: int) -> None:
    if k > support_cap:
        raise CapacityError(
            f"fractional support {k} exceeds the configured cap {support_cap}; "
            "exact evaluation would need 2^k queries"
        )


class SubsetMemo:
    """Optional cross-call cache of f values keyed by the evaluated set.

    Only consulted by the (slower) per-subset path; hits are not billed, so
    the query count reflects actual oracle evaluations.
    """

    def __init__(self):
        self.values: dict = {}
        self.hits = 0

    def eval(self, oracle, ids: frozenset) -> float:
        v = self.values.get(ids)
        if v is None:
            v = oracle.eval(ids)
            self.values[ids] = v
        else:
            self.hits += 1
        return v


def eval_exact(
    oracle,
    x: FractionalPoint,
    support_cap: int = DEFAULT_SUPPORT_CAP,
    exact: bool = False,
    memo: SubsetMemo | None = None,
):
    """F(x) by full expansion over the fractional support (2^k queries).

    With ``exact=True`` the accumulation is done in rational arithmetic
    (weights from the exact binary values of the coordinates, oracle values
    converted exactly), returning a Fraction whose value is independent of
    enumeration order. ``memo`` switches to a per-subset path whose repeated
    subsets are served from the cache and not billed.
    """
    k = x.support_size
    _check_cap(k, support_cap)
    if exact or memo is not None:
        return _eval_by_subsets(oracle, x, exact, memo)
    vals = oracle.eval_subsets(x.base_ids, x.frac_ids)
    return float(subset_weights(x.frac_vals) @ vals)


def _eval_by_subsets(oracle, x: FractionalPoint, exact: bool, memo: SubsetMemo | None):
    ids = [e for e, _ in x.frac_items]
    probs = [Fraction(v) if exact else v for _, v in x.frac_items]
    one = Fraction(1) if exact else 1.0
    total = Fraction(0) if exact else 0.0
    base = frozenset(x.integral)
    k = len(ids)
    for mask in range(1 << k):
        weight = one
        subset = base
        for j in range(k):
            if mask >> j & 1:
                weight *= probs[j]
                subset = subset | {ids[j]}
            else:
                weight *= one - probs[j]
        fval = memo.eval(oracle, subset) if memo is not None else oracle.eval(subset)
        total += weight * (Fraction(fval) if exact else fval)
    return total


def marginal_up(
    oracle,
    x: FractionalPoint,
    e: int,
    support_cap: int = DEFAULT_SUPPORT_CAP,
    memo: SubsetMemo | None = None,
) -> float:
    """F(x v 1_e) - F(x); zero without queries when x_e is already 1."""
    if e in x.integral:
        return 0.0
    up = eval_exact(oracle, x.join([e]), support_cap, memo=memo)
    cur = eval_exact(oracle, x, support_cap, memo=memo)
    return up - cur


def eval_mc(
    oracle,
    x: FractionalPoint,
    samples: int,
    seed: int,
    support_cap: int = DEFAULT_SUPPORT_CAP,
) -> tuple:
    """Unbiased Monte-Carlo estimate of F(x): (mean, standard error).

    Each sample includes fractional element e independently with probability
    x_e. Samples hitting the same inclusion pattern share one oracle
    evaluation, so at most min(samples, 2^k) queries are issued.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    k = x.support_size
    _check_cap(k, support_cap)
    rng = np.random.default_rng(seed)
    if k == 0:
        return oracle.eval(x.integral), 0.0
    bits = rng.random((samples, k)) < x.frac_vals
    masks = bits @ (np.int64(1) << np.arange(k, dtype=np.int64))
    counts = np.bincount(masks, minlength=1 << k)
    hit = np.nonzero(counts)[0]
    vals = np.empty(hit.size)
    base = frozenset(x.integral)
    ids = x.frac_ids
    for i, mask in enumerate(hit):
        subset = base | {int(ids[j]) for j in range(k) if mask >> j & 1}
        vals[i] = oracle.eval(subset)
    weights = counts[hit].astype(np.float64)
    mean = float(weights @ vals / samples)
    if samples == 1:
        return mean, 0.0
    var = float(weights @ (vals - mean) ** 2 / (samples - 1))
    return mean, float(np.sqrt(var / samples))
