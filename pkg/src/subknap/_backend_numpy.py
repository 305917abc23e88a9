"""Pure numpy/Python evaluation backend.

Reference implementations of the two kernel operations:

  eval_set(compiled, ids)            -> f(ids)
  subset_values(compiled, base, frac) -> array of f(base | T) for every
                                         T a subset of frac, indexed by the
                                         bitmask of T (bit j <-> frac[j])

subset_values walks the inclusion tree depth-first with apply/undo state per
objective family, so memory stays O(state) instead of O(2^k * state).
"""

from __future__ import annotations

import math

import numpy as np

from .objectives import KIND_CONCAVE, KIND_COVERAGE, KIND_FACILITY, KIND_TABLE


def eval_set(comp, ids: np.ndarray) -> float:
    kind, data = comp.kind, comp.data
    if kind == KIND_COVERAGE:
        indptr, indices, uw = data
        if ids.size == 0:
            return 0.0
        covered = np.concatenate([indices[indptr[e] : indptr[e + 1]] for e in ids])
        if covered.size == 0:
            return 0.0
        return float(uw[np.unique(covered)].sum())
    if kind == KIND_FACILITY:
        (sim,) = data
        if ids.size == 0 or sim.shape[0] == 0:
            return 0.0
        return float(sim[:, ids].max(axis=1).sum())
    if kind == KIND_CONCAVE:
        indptr, gidx, gwts, scales = data
        sums = np.zeros(scales.shape[0])
        for e in ids:
            sl = slice(indptr[e], indptr[e + 1])
            np.add.at(sums, gidx[sl], gwts[sl])
        return float(scales @ np.sqrt(sums))
    if kind == KIND_TABLE:
        (values,) = data
        mask = 0
        for e in ids:
            mask |= 1 << int(e)
        return float(values[mask])
    raise ValueError(f"unknown objective kind {kind}")


class _CoverState:
    def __init__(self, data, base):
        self.indptr, self.indices, self.uw = data
        self.counts = np.zeros(self.uw.shape[0], dtype=np.int64)
        self.total = 0.0
        for e in base:
            self.apply(e)

    def apply(self, e):
        row = self.indices[self.indptr[e] : self.indptr[e + 1]]
        fresh = row[self.counts[row] == 0]
        old_total = self.total
        self.counts[row] += 1
        self.total += float(self.uw[fresh].sum())
        return (row, old_total)

    def undo(self, token):
        row, old_total = token
        self.counts[row] -= 1
        self.total = old_total

    def current(self):
        return self.total


class _FacilityState:
    def __init__(self, data, base):
        (self.sim,) = data
        self.cur = np.zeros(self.sim.shape[0])
        self.total = 0.0
        for e in base:
            self.apply(e)

    def apply(self, e):
        col = self.sim[:, e]
        idx = np.nonzero(col > self.cur)[0]
        saved = self.cur[idx].copy()
        old_total = self.total
        self.cur[idx] = col[idx]
        self.total += float((col[idx] - saved).sum())
        return (idx, saved, old_total)

    def undo(self, token):
        idx, saved, old_total = token
        self.cur[idx] = saved
        self.total = old_total

    def current(self):
        return self.total


class _ConcaveState:
    def __init__(self, data, base):
        self.indptr, self.gidx, self.gwts, self.scales = data
        self.sums = np.zeros(self.scales.shape[0])
        self.total = 0.0
        for e in base:
            self.apply(e)

    def apply(self, e):
        sl = slice(self.indptr[e], self.indptr[e + 1])
        groups, wts = self.gidx[sl], self.gwts[sl]
        old = self.sums[groups].copy()
        old_total = self.total
        self.sums[groups] = old + wts
        self.total += float(self.scales[groups] @ (np.sqrt(old + wts) - np.sqrt(old)))
        return (groups, old, old_total)

    def undo(self, token):
        # restore saved state exactly; arithmetic inverses would drift and
        # sqrt is unforgiving near zero
        groups, old, old_total = token
        self.sums[groups] = old
        self.total = old_total

    def current(self):
        return self.total


class _TableState:
    def __init__(self, data, base):
        (self.values,) = data
        self.mask = 0
        for e in base:
            self.mask |= 1 << int(e)

    def apply(self, e):
        bit = 1 << int(e)
        self.mask |= bit
        return bit

    def undo(self, bit):
        self.mask ^= bit

    def current(self):
        return float(self.values[self.mask])


_STATES = {
    KIND_COVERAGE: _CoverState,
    KIND_FACILITY: _FacilityState,
    KIND_CONCAVE: _ConcaveState,
    KIND_TABLE: _TableState,
}


def subset_values(comp, base: np.ndarray, frac: np.ndarray) -> np.ndarray:
    state = _STATES[comp.kind](comp.data, base)
    k = int(frac.size)
    out = np.empty(1 << k)

    def rec(depth, mask):
        if depth == k:
            out[mask] = state.current()
            return
        rec(depth + 1, mask)
        token = state.apply(frac[depth])
        rec(depth + 1, mask | (1 << depth))
        state.undo(token)

    rec(0, 0)
    return out
