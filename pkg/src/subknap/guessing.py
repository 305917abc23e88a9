"""Guessed-value grids and their suppliers.

One run of the phase engine consumes, for each phase p:

  * t step thresholds  v[p][i]  - multiples of eps*M/t in [0, M]; the gain
    level a step increment must clear in iteration i,
  * one tail total     W[p]     - multiple of eps*M in [0, M]; the guessed
    remaining marginal value of the tail of the optimum,
  * tail thresholds    w[p][i]  - multiples of eps^2*W[p]/r in [0, W[p]];
    gain levels for integrally picking large-value tail items.

Grid values are stored as (integer multiplier, step) so "is an exact grid
multiple" is a statement about ints, not about float remainders.

Suppliers:
  * SequenceGuesser replays one precomputed GuessSequence (enumeration mode).
  * AnalysisGuesser computes each value adaptively from a known optimum by
    flooring the current argmax marginal onto the grid, matching selected
    elements against the optimum as it goes. This is the construction used in
    the correctness argument, so running it validates that argument on real
    instances ("analysis-guided" mode).

Also here: the value-greedy ordering of a set (argmax marginal over the
prefix) and the head/tail split of the optimum with the heavy-tail-item
filter.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .common import CapacityError, ProtocolError
from .multilinear import DEFAULT_SUPPORT_CAP, FractionalPoint, eval_exact

_FLOOR_NUDGE = 1e-9


def _floor_mult(value: float, step: float) -> int:
    if step <= 0:
        return 0
    return max(0, int(math.floor(value / step + _FLOOR_NUDGE)))


@dataclass(frozen=True)
class GridValue:
    mult: int
    step: float

    @property
    def value(self) -> float:
        return self.mult * self.step

    def __repr__(self):
        return f"GridValue({self.mult} * {self.step:g} = {self.value:g})"


@dataclass(frozen=True)
class GuessGrid:
    eps: float
    t: int
    r: int
    phases: int
    M: float
    thin_step: int = 1   # grid-thinning factors (practical mode): multiply the
    thin_total: int = 1  # step sizes, shrinking the number of choices
    thin_tail: int = 1

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if min(self.t, self.r, self.phases) < 1:
            raise ValueError("t, r, phases must be >= 1")
        if self.M < 0:
            raise ValueError("M must be nonnegative")
        if min(self.thin_step, self.thin_total, self.thin_tail) < 1:
            raise ValueError("thinning factors must be >= 1")

    @property
    def step_size(self) -> float:
        return self.eps * self.M / self.t * self.thin_step

    @property
    def total_step(self) -> float:
        return self.eps * self.M * self.thin_total

    def tail_step(self, total_value: float) -> float:
        return self.eps * self.eps * total_value / self.r * self.thin_tail

    # choice counts: multiples of the step inside [0, bound]; the ratios are
    # independent of M (it cancels), so counting is float-safe
    @property
    def n_step_choices(self) -> int:
        if self.M <= 0:
            return 1
        return _floor_mult(self.t / self.eps, self.thin_step) + 1

    @property
    def n_total_choices(self) -> int:
        if self.M <= 0:
            return 1
        return _floor_mult(1.0 / self.eps, self.thin_total) + 1

    @property
    def n_tail_choices(self) -> int:
        # for a nonzero tail total; W = 0 collapses the tail grid to {0}
        if self.M <= 0:
            return 1
        return _floor_mult(self.r / (self.eps * self.eps), self.thin_tail) + 1

    def step_value(self, mult: int) -> GridValue:
        return GridValue(mult, self.step_size)

    def total_value(self, mult: int) -> GridValue:
        return GridValue(mult, self.total_step)

    def tail_value(self, mult: int, total: GridValue) -> GridValue:
        return GridValue(mult, self.tail_step(total.value))


@dataclass(frozen=True)
class GuessSequence:
    grid: GuessGrid
    step_mults: tuple   # phases x t
    total_mults: tuple  # phases
    tail_mults: tuple   # phases x (r + 1)

    def step_value(self, p: int, i: int) -> GridValue:
        return self.grid.step_value(self.step_mults[p - 1][i - 1])

    def total_value(self, p: int) -> GridValue:
        return self.grid.total_value(self.total_mults[p - 1])

    def tail_value(self, p: int, i: int) -> GridValue:
        return self.grid.tail_value(self.tail_mults[p - 1][i - 1], self.total_value(p))


def sequence_count(grid: GuessGrid) -> int:
    """Closed-form number of grid sequences enumerate_guesses would yield."""
    vc = grid.n_step_choices
    wc = grid.n_tail_choices
    per_phase = 1 + (grid.n_total_choices - 1) * wc ** (grid.r + 1)
    return vc ** (grid.phases * grid.t) * per_phase**grid.phases


def enumerate_guesses(grid: GuessGrid, limit: int):
    """Yield every grid sequence exactly once, lexicographically.

    Order: step multipliers (phase-major, iteration-minor), then per phase the
    (total, tail row) combination with total ascending and tail rows
    lexicographic. Refuses with the computed count when it exceeds `limit`.
    """
    count = sequence_count(grid)
    if count > limit:
        raise CapacityError(
            f"guess enumeration would produce {count} sequences (limit {limit}); "
            "use practical thinning or analysis mode",
            count=count,
        )
    zeros_row = (0,) * (grid.r + 1)
    phase_combos = [(0, zeros_row)]
    for total_mult in range(1, grid.n_total_choices):
        for tail_row in itertools.product(range(grid.n_tail_choices), repeat=grid.r + 1):
            phase_combos.append((total_mult, tail_row))
    slots = grid.phases * grid.t
    for flat in itertools.product(range(grid.n_step_choices), repeat=slots):
        step_mults = tuple(flat[p * grid.t : (p + 1) * grid.t] for p in range(grid.phases))
        for combo in itertools.product(phase_combos, repeat=grid.phases):
            yield GuessSequence(
                grid,
                step_mults,
                tuple(c[0] for c in combo),
                tuple(c[1] for c in combo),
            )


# -- ordering and splitting a known optimum ---------------------------------


def greedy_order(oracle, opt_set) -> list:
    """Order a set by repeated argmax of the marginal over the prefix."""
    remaining = sorted(int(e) for e in opt_set)
    if not remaining:
        raise ValueError("cannot order an empty set")
    order = []
    prefix_value = oracle.eval([])
    while remaining:
        best, best_gain = None, -math.inf
        for o in remaining:
            gain = oracle.eval(order + [o]) - prefix_value
            if gain > best_gain:
                best, best_gain = o, gain
        order.append(best)
        remaining.remove(best)
        prefix_value += best_gain
    return order


@dataclass(frozen=True)
class OptSplit:
    head: tuple   # first min(t, |opt|) elements in greedy order
    tail: tuple   # the rest, minus overweight items
    dropped: tuple
    head_cost: float
    tail_cost: float


def split_optimum(oracle, order, eps: float, t: int) -> OptSplit:
    """Head/tail split with the heavy-item filter on the tail.

    Tail items costing more than eps^2 * (1 - cost(head)) are dropped: there
    can be few of them and each has negligible marginal on top of the head.
    """
    costs = oracle.instance.costs
    head = tuple(order[: min(t, len(order))])
    rest = order[len(head) :]
    head_cost = float(sum(costs[e] for e in head))
    threshold = eps * eps * (1.0 - head_cost)
    dropped = tuple(o for o in rest if costs[o] > threshold)
    tail = tuple(o for o in rest if costs[o] <= threshold)
    return OptSplit(head, tail, dropped, head_cost, float(sum(costs[e] for e in tail)))


# -- suppliers ---------------------------------------------------------------


class SequenceGuesser:
    """Replays a precomputed GuessSequence; ignores observations."""

    def __init__(self, seq: GuessSequence):
        self.seq = seq

    def _check(self, p, i, i_max):
        g = self.seq.grid
        if not (1 <= p <= g.phases and 1 <= i <= i_max):
            raise ProtocolError(f"guess request out of range: phase {p}, index {i}")

    def step_threshold(self, p, i, y):
        self._check(p, i, self.seq.grid.t)
        return self.seq.step_value(p, i)

    def observe_step(self, p, i, element):
        pass

    def tail_total(self, p, z):
        self._check(p, 1, 1)
        return self.seq.total_value(p)

    def tail_threshold(self, p, i, z):
        self._check(p, i, self.seq.grid.r + 1)
        return self.seq.tail_value(p, i)

    def observe_tail(self, p, i, element):
        pass


@dataclass
class HeadGuessRow:
    phase: int
    index: int
    skipped: bool
    candidate: int | None  # argmax over the unmatched head
    marginal: float | None
    mult: int | None
    selected: int | None = None
    matched: int | None = None

    def to_json(self):
        return self.__dict__.copy()


@dataclass
class TotalGuessRow:
    phase: int
    marginal: float
    mult: int

    def to_json(self):
        return self.__dict__.copy()


@dataclass
class TailGuessRow:
    phase: int
    index: int
    eligible: tuple  # tail items meeting the density cut, unmatched
    candidate: int | None
    marginal: float | None
    mult: int
    density_cut: float
    selected: int | None = None
    matched: int | None = None

    def to_json(self):
        d = self.__dict__.copy()
        d["eligible"] = list(self.eligible)
        return d


@dataclass
class AnalysisTrace:
    head_rows: list = field(default_factory=list)
    total_rows: list = field(default_factory=list)
    tail_rows: list = field(default_factory=list)

    def matched_head(self, p: int) -> list:
        return [r.matched for r in self.head_rows if r.phase == p and r.matched is not None]

    def matched_tail(self, p: int) -> list:
        return [r.matched for r in self.tail_rows if r.phase == p and r.matched is not None]

    def to_json(self):
        return {
            "head": [r.to_json() for r in self.head_rows],
            "total": [r.to_json() for r in self.total_rows],
            "tail": [r.to_json() for r in self.tail_rows],
        }


class AnalysisGuesser:
    """Supplies the grid values defined from a known optimum.

    Step thresholds floor the marginal of the best unmatched head element;
    the tail total floors the tail's joint marginal; tail thresholds floor
    the best marginal among unmatched tail items whose density clears
    (1 - 5 eps) times the tail's average density. Selected elements are
    matched against the optimum (the selection itself when it belongs to the
    unmatched pool, the argmax candidate otherwise), which is exactly what
    makes cost-domination checks possible afterwards.
    """

    def __init__(self, oracle, split: OptSplit, grid: GuessGrid, support_cap=DEFAULT_SUPPORT_CAP):
        self.oracle = oracle
        self.split = split
        self.grid = grid
        self.support_cap = support_cap
        self.trace = AnalysisTrace()
        self._phase = 0
        self._head_remaining: list = []
        self._tail_matched: list = []
        self._pending_step: tuple | None = None
        self._pending_tail: TailGuessRow | None = None
        self._W: GridValue | None = None

    def _F(self, point: FractionalPoint) -> float:
        return eval_exact(self.oracle, point, self.support_cap)

    def _start_phase(self, p):
        if p != self._phase + 1:
            raise ProtocolError(f"expected phase {self._phase + 1}, got {p}")
        self._phase = p
        self._head_remaining = list(self.split.head)
        self._tail_matched = []
        self._pending_step = None
        self._pending_tail = None
        self._W = None

    def step_threshold(self, p, i, y):
        if i == 1 and p == self._phase + 1:
            self._start_phase(p)
        if p != self._phase or self._pending_step is not None:
            raise ProtocolError("step threshold requested out of order")
        if not self._head_remaining:
            row = HeadGuessRow(p, i, True, None, None, None)
            self.trace.head_rows.append(row)
            self._pending_step = (p, i, row, None)
            return None
        base = self._F(y)
        best, best_marg = None, -math.inf
        for o in self._head_remaining:
            marg = self._F(y.join([o])) - base
            if marg > best_marg:
                best, best_marg = o, marg
        mult = _floor_mult(best_marg, self.grid.step_size)
        row = HeadGuessRow(p, i, False, best, best_marg, mult)
        self.trace.head_rows.append(row)
        self._pending_step = (p, i, row, best)
        return self.grid.step_value(mult)

    def observe_step(self, p, i, element):
        if self._pending_step is None or self._pending_step[:2] != (p, i):
            raise ProtocolError("observation without a matching step threshold")
        _, _, row, candidate = self._pending_step
        self._pending_step = None
        row.selected = element
        if row.skipped:
            return
        matched = element if element in self._head_remaining else candidate
        row.matched = matched
        self._head_remaining.remove(matched)

    def tail_total(self, p, z):
        if p != self._phase or self._pending_step is not None:
            raise ProtocolError("tail total requested out of order")
        if not self.split.tail:
            mult = 0
            marg = 0.0
        else:
            marg = self._F(z.join(self.split.tail)) - self._F(z)
            mult = _floor_mult(marg, self.grid.total_step)
        self.trace.total_rows.append(TotalGuessRow(p, marg, mult))
        self._W = self.grid.total_value(mult)
        return self._W

    def tail_threshold(self, p, i, z):
        if p != self._phase or self._W is None:
            raise ProtocolError("tail threshold requested out of order")
        self._pending_tail = None
        step = self.grid.tail_step(self._W.value)
        pool = [o for o in self.split.tail if o not in self._tail_matched]
        base = self._F(z)
        tail_marg = self._F(z.join(self.split.tail)) - base
        cut = (1.0 - 5.0 * self.eps) * tail_marg / self.split.tail_cost if self.split.tail else 0.0
        eligible = []
        margs = {}
        for o in pool:
            margs[o] = self._F(z.join([o])) - base
            if margs[o] / self.oracle.instance.costs[o] >= cut:
                eligible.append(o)
        if not eligible:
            row = TailGuessRow(p, i, (), None, None, 0, cut)
            self.trace.tail_rows.append(row)
            self._pending_tail = row
            return GridValue(0, step)
        best = max(eligible, key=lambda o: (margs[o], -o))
        mult = _floor_mult(margs[best], step)
        row = TailGuessRow(p, i, tuple(eligible), best, margs[best], mult, cut)
        self.trace.tail_rows.append(row)
        self._pending_tail = row
        return GridValue(mult, step)

    def observe_tail(self, p, i, element):
        row = self._pending_tail
        if row is None or (row.phase, row.index) != (p, i):
            raise ProtocolError("observation without a matching tail threshold")
        self._pending_tail = None
        row.selected = element
        if element is None:
            return
        matched = element if element in row.eligible else row.candidate
        if matched is not None:
            row.matched = matched
            self._tail_matched.append(matched)

    @property
    def eps(self) -> float:
        return self.grid.eps
