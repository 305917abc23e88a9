"""Numba-accelerated evaluation kernels.

Same contract as the numpy backend: eval_set and subset_values per objective
family. subset_values enumerates the 2^k inclusion patterns of the fractional
support; coverage/concave/table walk masks in Gray-code order with O(1) state
toggles per step, facility location uses a per-user DP over masks
(value[mask] = max(value[mask minus lowest bit], column of that bit)).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .objectives import KIND_CONCAVE, KIND_COVERAGE, KIND_FACILITY, KIND_TABLE


@njit(cache=True)
def _cov_eval(indptr, indices, uw, ids):
    seen = np.zeros(uw.shape[0], dtype=np.uint8)
    total = 0.0
    for i in range(ids.shape[0]):
        e = ids[i]
        for j in range(indptr[e], indptr[e + 1]):
            u = indices[j]
            if seen[u] == 0:
                seen[u] = 1
                total += uw[u]
    return total


@njit(cache=True)
def _cov_subsets(indptr, indices, uw, base, frac):
    counts = np.zeros(uw.shape[0], dtype=np.int64)
    total = 0.0
    for i in range(base.shape[0]):
        e = base[i]
        for j in range(indptr[e], indptr[e + 1]):
            u = indices[j]
            if counts[u] == 0:
                total += uw[u]
            counts[u] += 1
    k = frac.shape[0]
    out = np.empty(1 << k)
    out[0] = total
    cur = 0
    for i in range(1, 1 << k):
        b = 0
        ii = i
        while ii & 1 == 0:
            b += 1
            ii >>= 1
        bit = 1 << b
        cur ^= bit
        e = frac[b]
        if cur & bit:
            for j in range(indptr[e], indptr[e + 1]):
                u = indices[j]
                if counts[u] == 0:
                    total += uw[u]
                counts[u] += 1
        else:
            for j in range(indptr[e], indptr[e + 1]):
                u = indices[j]
                counts[u] -= 1
                if counts[u] == 0:
                    total -= uw[u]
        out[cur] = total
    return out


@njit(cache=True)
def _fac_eval(sim, ids):
    total = 0.0
    for u in range(sim.shape[0]):
        m = 0.0
        for i in range(ids.shape[0]):
            v = sim[u, ids[i]]
            if v > m:
                m = v
        total += m
    return total


@njit(cache=True)
def _fac_subsets(sim, base, frac):
    k = frac.shape[0]
    size = 1 << k
    out = np.zeros(size)
    buf = np.empty(size)
    for u in range(sim.shape[0]):
        bm = 0.0
        for i in range(base.shape[0]):
            v = sim[u, base[i]]
            if v > bm:
                bm = v
        buf[0] = bm
        for i in range(1, size):
            b = 0
            ii = i
            while ii & 1 == 0:
                b += 1
                ii >>= 1
            prev = buf[i ^ (1 << b)]
            v = sim[u, frac[b]]
            buf[i] = v if v > prev else prev
        for i in range(size):
            out[i] += buf[i]
    return out


@njit(cache=True)
def _conc_eval(indptr, gidx, gwts, scales, ids):
    sums = np.zeros(scales.shape[0])
    for i in range(ids.shape[0]):
        e = ids[i]
        for j in range(indptr[e], indptr[e + 1]):
            sums[gidx[j]] += gwts[j]
    total = 0.0
    for g in range(scales.shape[0]):
        total += scales[g] * math.sqrt(sums[g])
    return total


@njit(cache=True)
def _conc_subsets(indptr, gidx, gwts, scales, base, frac):
    # member counts per group let an emptied group's sum reset to exactly 0;
    # otherwise sqrt amplifies 1e-17 residuals into 1e-8 value errors
    sums = np.zeros(scales.shape[0])
    members = np.zeros(scales.shape[0], dtype=np.int64)
    for i in range(base.shape[0]):
        e = base[i]
        for j in range(indptr[e], indptr[e + 1]):
            sums[gidx[j]] += gwts[j]
            members[gidx[j]] += 1
    total = 0.0
    for g in range(scales.shape[0]):
        total += scales[g] * math.sqrt(sums[g])
    k = frac.shape[0]
    out = np.empty(1 << k)
    out[0] = total
    cur = 0
    for i in range(1, 1 << k):
        b = 0
        ii = i
        while ii & 1 == 0:
            b += 1
            ii >>= 1
        bit = 1 << b
        cur ^= bit
        e = frac[b]
        if cur & bit:
            for j in range(indptr[e], indptr[e + 1]):
                g = gidx[j]
                total -= scales[g] * math.sqrt(sums[g])
                sums[g] += gwts[j]
                members[g] += 1
                total += scales[g] * math.sqrt(sums[g])
        else:
            for j in range(indptr[e], indptr[e + 1]):
                g = gidx[j]
                total -= scales[g] * math.sqrt(sums[g])
                members[g] -= 1
                if members[g] == 0:
                    sums[g] = 0.0
                else:
                    sums[g] -= gwts[j]
                    if sums[g] < 0.0:
                        sums[g] = 0.0
                total += scales[g] * math.sqrt(sums[g])
        out[cur] = total
    return out


@njit(cache=True)
def _table_eval(values, ids):
    mask = 0
    for i in range(ids.shape[0]):
        mask |= 1 << ids[i]
    return values[mask]


@njit(cache=True)
def _table_subsets(values, base, frac):
    full = 0
    for i in range(base.shape[0]):
        full |= 1 << base[i]
    k = frac.shape[0]
    out = np.empty(1 << k)
    out[0] = values[full]
    cur = 0
    for i in range(1, 1 << k):
        b = 0
        ii = i
        while ii & 1 == 0:
            b += 1
            ii >>= 1
        bit = 1 << b
        cur ^= bit
        full ^= 1 << frac[b]
        out[cur] = values[full]
    return out


def eval_set(comp, ids: np.ndarray) -> float:
    kind, data = comp.kind, comp.data
    if kind == KIND_COVERAGE:
        return float(_cov_eval(*data, ids))
    if kind == KIND_FACILITY:
        return float(_fac_eval(*data, ids))
    if kind == KIND_CONCAVE:
        return float(_conc_eval(*data, ids))
    if kind == KIND_TABLE:
        return float(_table_eval(*data, ids))
    raise ValueError(f"unknown objective kind {kind}")


def subset_values(comp, base: np.ndarray, frac: np.ndarray) -> np.ndarray:
    kind, data = comp.kind, comp.data
    if kind == KIND_COVERAGE:
        return _cov_subsets(*data, base, frac)
    if kind == KIND_FACILITY:
        return _fac_subsets(*data, base, frac)
    if kind == KIND_CONCAVE:
        return _conc_subsets(*data, base, frac)
    if kind == KIND_TABLE:
        return _table_subsets(*data, base, frac)
    raise ValueError(f"unknown objective kind {kind}")


def warmup() -> None:
    """Force-compile every kernel on tiny inputs (kept out of timed sections)."""
    ids = np.array([0], dtype=np.int64)
    empty = np.empty(0, dtype=np.int64)
    indptr = np.array([0, 1], dtype=np.int64)
    indices = np.array([0], dtype=np.int64)
    uw = np.array([1.0])
    _cov_eval(indptr, indices, uw, ids)
    _cov_subsets(indptr, indices, uw, empty, ids)
    sim = np.array([[0.5]])
    _fac_eval(sim, ids)
    _fac_subsets(sim, empty, ids)
    gw = np.array([1.0])
    _conc_eval(indptr, indices, gw, uw, ids)
    _conc_subsets(indptr, indices, gw, uw, empty, ids)
    table = np.array([0.0, 1.0])
    _table_eval(table, ids)
    _table_subsets(table, empty, ids)
