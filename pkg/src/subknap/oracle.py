"""Value-oracle access to an instance's objective, with query counting.

A CountingOracle bills exactly one query per set-function evaluation; the
batched expansion `eval_subsets` bills 2^k for its 2^k evaluations. The
counter is lock-protected so concurrent read-only users can share one oracle.
`eval_quiet` evaluates without billing and exists for debug shadow checks
only — algorithm code must never use it.

`check_monotone_submodular` exhaustively verifies monotonicity and the
diminishing-returns property on small ground sets (n <= 16) via the
equivalent pairwise condition
    f(S + e1) + f(S + e2) >= f(S + e1 + e2) + f(S)
and reports the first violating triple as an (S, T, e) witness.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import backend
from .common import CapacityError
from .objectives import Instance

_HARD_SUPPORT_CAP = 25  # 2^25 doubles ~ 256 MB; refuse beyond


def as_ids(ids) -> np.ndarray:
    arr = np.asarray(sorted(int(e) for e in ids), dtype=np.int64)
    return arr


class CountingOracle:
    """Wraps an instance's objective; transparent except for the counter."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self._count = 0
        self._lock = threading.Lock()

    def _bill(self, k: int) -> None:
        with self._lock:
            self._count += k

    @property
    def eval_count(self) -> int:
        return self._count

    def reset_count(self) -> None:
        with self._lock:
            self._count = 0

    def _check_ids(self, arr: np.ndarray) -> None:
        if arr.size and (arr[0] < 0 or arr[-1] >= self.instance.n):
            raise ValueError("element id out of range")

    def eval(self, ids) -> float:
        arr = as_ids(ids)
        self._check_ids(arr)
        self._bill(1)
        return backend.eval_set(self.instance.compiled, arr)

    def eval_quiet(self, ids) -> float:
        """Unbilled evaluation; debug/shadow checks only."""
        arr = as_ids(ids)
        self._check_ids(arr)
        return backend.eval_set(self.instance.compiled, arr)

    def _subset_values(self, base, frac) -> tuple:
        base_arr = as_ids(base)
        frac_arr = np.asarray([int(e) for e in frac], dtype=np.int64)
        self._check_ids(base_arr)
        if frac_arr.size:
            self._check_ids(np.sort(frac_arr))
            if np.intersect1d(base_arr, frac_arr).size:
                raise ValueError("base and fractional support must be disjoint")
        k = int(frac_arr.size)
        if k > _HARD_SUPPORT_CAP:
            raise CapacityError(f"fractional support {k} exceeds hard cap {_HARD_SUPPORT_CAP}")
        return backend.subset_values(self.instance.compiled, base_arr, frac_arr), k

    def eval_subsets(self, base, frac) -> np.ndarray:
        """f(base | T) for every T of the fractional support.

        Returned array is indexed by the bitmask of T, bit j <-> frac[j].
        Bills 2^len(frac) queries.
        """
        values, k = self._subset_values(base, frac)
        self._bill(1 << k)
        return values

    def quiet_view(self) -> "QuietOracle":
        """Oracle facade that never bills; for debug shadow checks only."""
        return QuietOracle(self)


class QuietOracle:
    def __init__(self, oracle: CountingOracle):
        self._oracle = oracle
        self.instance = oracle.instance

    def eval(self, ids) -> float:
        return self._oracle.eval_quiet(ids)

    def eval_subsets(self, base, frac) -> np.ndarray:
        values, _ = self._oracle._subset_values(base, frac)
        return values


@dataclass
class SubmodularityWitness:
    kind: str  # "monotonicity" or "submodularity"
    S: tuple
    T: tuple
    e: int
    violation: float


@dataclass
class SubmodularityReport:
    ok: bool
    monotone_ok: bool
    submodular_ok: bool
    zero_at_empty: bool
    witness: SubmodularityWitness | None

    def __bool__(self) -> bool:
        return self.ok


def _mask_ids(mask: int, n: int) -> tuple:
    return tuple(e for e in range(n) if mask >> e & 1)


def check_monotone_submodular(instance: Instance, tol: float = 1e-9) -> SubmodularityReport:
    n = instance.n
    if n > 16:
        raise CapacityError(f"exhaustive check limited to n <= 16, got {n}")
    oracle = CountingOracle(instance)
    values = oracle.eval_subsets([], np.arange(n)) if n else np.array([oracle.eval([])])
    scale = tol * max(1.0, float(np.abs(values).max()) if values.size else 1.0)
    zero_at_empty = abs(float(values[0])) <= scale

    masks = np.arange(1 << n, dtype=np.int64)
    witness = None
    monotone_ok = True
    for e in range(n):
        bit = 1 << e
        without = masks[(masks & bit) == 0]
        bad = np.nonzero(values[without | bit] < values[without] - scale)[0]
        if bad.size:
            m = int(without[bad[0]])
            witness = SubmodularityWitness(
                "monotonicity",
                _mask_ids(m, n),
                _mask_ids(m | bit, n),
                e,
                float(values[m] - values[m | bit]),
            )
            monotone_ok = False
            break

    submodular_ok = True
    if monotone_ok:
        for e1 in range(n):
            b1 = 1 << e1
            for e2 in range(e1 + 1, n):
                b2 = 1 << e2
                without = masks[(masks & (b1 | b2)) == 0]
                lhs = values[without | b1] + values[without | b2]
                rhs = values[without | b1 | b2] + values[without]
                bad = np.nonzero(lhs < rhs - scale)[0]
                if bad.size:
                    m = int(without[bad[0]])
                    # translate the local violation into S subset-of T, e not in T:
                    # marginal of e1 on S=m is below its marginal on T=m+e2
                    witness = SubmodularityWitness(
                        "submodularity",
                        _mask_ids(m, n),
                        _mask_ids(m | b2, n),
                        e1,
                        float(rhs[bad[0]] - lhs[bad[0]]),
                    )
                    submodular_ok = False
                    break
            if not submodular_ok:
                break

    ok = monotone_ok and submodular_ok and zero_at_empty
    return SubmodularityReport(ok, monotone_ok, submodular_ok, zero_at_empty, witness)
