"""Ground-set instances and built-in monotone submodular objective families.

Elements are dense integer ids in [0, n). Each element e carries a cost
c_e in (0, 1]; the budget is always 1 after normalization (the loader divides
costs by the declared capacity). Elements with normalized cost above 1 can
never be part of a feasible set and are dropped when a file is loaded.

Objective families:
  * WeightedCoverage    f(S) = sum of weights of universe items covered by S
  * FacilityLocation    f(S) = sum over users u of max_{e in S} sim[u][e]
  * ConcaveModular      f(S) = sum over groups j of a_j * sqrt(sum_{e in S} w[j][e])
  * ExplicitTable       f(S) read from a 2^n table (testing hook, not part of
                        the JSON schema; it need not be submodular)

The first three are monotone and submodular with f(empty) = 0 by construction.
Evaluation is dispatched through a compiled array form (see backend module).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .common import FEAS_TOL

# family codes used by the evaluation backends
KIND_COVERAGE = 0
KIND_FACILITY = 1
KIND_CONCAVE = 2
KIND_TABLE = 3


@dataclass(frozen=True, eq=False)
class CompiledObjective:
    """Array form of an objective, consumed by the evaluation kernels."""

    kind: int
    data: tuple


@dataclass(frozen=True, eq=False)
class WeightedCoverage:
    universe_weights: np.ndarray  # (U,), nonnegative
    covers: tuple  # per element: sorted unique np.int64 array of universe ids

    json_type = "coverage"

    def validate(self, n: int) -> None:
        if len(self.covers) != n:
            raise ValueError("covers must have one entry per element")
        if np.any(self.universe_weights < 0):
            raise ValueError("universe weights must be nonnegative")
        u = len(self.universe_weights)
        for row in self.covers:
            if row.size and (row.min() < 0 or row.max() >= u):
                raise ValueError("covered universe id out of range")
            if row.size and np.any(np.diff(row) <= 0):
                raise ValueError("cover rows must be sorted and duplicate-free")

    def restrict(self, keep: np.ndarray) -> "WeightedCoverage":
        return WeightedCoverage(self.universe_weights, tuple(self.covers[i] for i in keep))

    def compile(self) -> CompiledObjective:
        indptr = np.zeros(len(self.covers) + 1, dtype=np.int64)
        for i, row in enumerate(self.covers):
            indptr[i + 1] = indptr[i] + row.size
        indices = (
            np.concatenate(self.covers) if self.covers else np.empty(0, dtype=np.int64)
        ).astype(np.int64)
        return CompiledObjective(
            KIND_COVERAGE, (indptr, indices, np.asarray(self.universe_weights, dtype=np.float64))
        )

    def to_json(self) -> dict:
        return {
            "type": self.json_type,
            "universe_weights": [float(w) for w in self.universe_weights],
            "covers": [[int(u) for u in row] for row in self.covers],
        }


@dataclass(frozen=True, eq=False)
class FacilityLocation:
    similarity: np.ndarray  # (U, n), nonnegative

    json_type = "facility"

    def validate(self, n: int) -> None:
        if self.similarity.ndim != 2 or self.similarity.shape[1] != n:
            raise ValueError("similarity must be a (users, n) matrix")
        if np.any(self.similarity < 0):
            raise ValueError("similarities must be nonnegative")

    def restrict(self, keep: np.ndarray) -> "FacilityLocation":
        return FacilityLocation(self.similarity[:, keep])

    def compile(self) -> CompiledObjective:
        return CompiledObjective(
            KIND_FACILITY, (np.ascontiguousarray(self.similarity, dtype=np.float64),)
        )

    def to_json(self) -> dict:
        return {
            "type": self.json_type,
            "similarity": [[float(v) for v in row] for row in self.similarity],
        }


@dataclass(frozen=True, eq=False)
class ConcaveModular:
    scales: np.ndarray  # (G,), nonnegative
    weights: np.ndarray  # (G, n), nonnegative

    json_type = "concave_modular"

    def validate(self, n: int) -> None:
        if self.weights.ndim != 2 or self.weights.shape[1] != n:
            raise ValueError("weights must be a (groups, n) matrix")
        if self.weights.shape[0] != self.scales.shape[0]:
            raise ValueError("scales and weights disagree on the number of groups")
        if np.any(self.scales < 0) or np.any(self.weights < 0):
            raise ValueError("scales and weights must be nonnegative")

    def restrict(self, keep: np.ndarray) -> "ConcaveModular":
        return ConcaveModular(self.scales, self.weights[:, keep])

    def compile(self) -> CompiledObjective:
        # per-element CSR of (group, weight) pairs so kernels touch only
        # groups the toggled element participates in
        g, n = self.weights.shape
        indptr = np.zeros(n + 1, dtype=np.int64)
        groups = []
        wts = []
        for e in range(n):
            nz = np.nonzero(self.weights[:, e] > 0)[0]
            indptr[e + 1] = indptr[e] + nz.size
            groups.append(nz.astype(np.int64))
            wts.append(self.weights[nz, e].astype(np.float64))
        gidx = np.concatenate(groups) if groups else np.empty(0, dtype=np.int64)
        gwts = np.concatenate(wts) if wts else np.empty(0, dtype=np.float64)
        return CompiledObjective(
            KIND_CONCAVE, (indptr, gidx, gwts, np.asarray(self.scales, dtype=np.float64))
        )

    def to_json(self) -> dict:
        return {
            "type": self.json_type,
            "scales": [float(a) for a in self.scales],
            "weights": [[float(v) for v in row] for row in self.weights],
        }


@dataclass(frozen=True, eq=False)
class ExplicitTable:
    """Set-function values indexed by bitmask (bit e <-> element e).

    Testing hook for injecting arbitrary (possibly non-submodular) functions;
    not expressible in the instance JSON schema.
    """

    values: np.ndarray  # (2**n,)

    json_type = "table"

    def validate(self, n: int) -> None:
        if n > 20:
            raise ValueError("table objectives are limited to n <= 20")
        if self.values.shape != (1 << n,):
            raise ValueError("table must have 2**n entries")

    def restrict(self, keep: np.ndarray) -> "ExplicitTable":
        raise ValueError("table objectives do not support element dropping")

    def compile(self) -> CompiledObjective:
        return CompiledObjective(KIND_TABLE, (np.asarray(self.values, dtype=np.float64),))

    def to_json(self) -> dict:
        raise ValueError("table objectives are not part of the JSON schema")


def _objective_from_json(obj: dict):
    kind = obj.get("type")
    if kind == "coverage":
        covers = tuple(
            np.unique(np.asarray(row, dtype=np.int64)) for row in obj["covers"]
        )
        return WeightedCoverage(np.asarray(obj["universe_weights"], dtype=np.float64), covers)
    if kind == "facility":
        return FacilityLocation(np.asarray(obj["similarity"], dtype=np.float64))
    if kind == "concave_modular":
        return ConcaveModular(
            np.asarray(obj["scales"], dtype=np.float64),
            np.asarray(obj["weights"], dtype=np.float64),
        )
    raise ValueError(f"unknown objective type: {kind!r}")


@dataclass(frozen=True, eq=False)
class Instance:
    """A ground set with element costs, a unit budget, and an objective."""

    n: int
    costs: np.ndarray
    objective: object
    source_ids: tuple = ()  # original ids of kept elements, when loading dropped any

    def __post_init__(self):
        costs = np.asarray(self.costs, dtype=np.float64)
        object.__setattr__(self, "costs", costs)
        if costs.shape != (self.n,):
            raise ValueError("costs must have one entry per element")
        if np.any(costs <= 0):
            raise ValueError("every cost must be positive")
        if np.any(costs > 1 + FEAS_TOL):
            raise ValueError("costs above the unit budget must be dropped at load time")
        self.objective.validate(self.n)

    @cached_property
    def compiled(self) -> CompiledObjective:
        return self.objective.compile()

    @cached_property
    def cost_order(self) -> np.ndarray:
        """Element ids sorted by (cost, id): the deterministic scan order."""
        return np.lexsort((np.arange(self.n), self.costs)).astype(np.int64)

    def total_cost(self, ids) -> float:
        ids = list(ids)
        return float(self.costs[ids].sum()) if ids else 0.0

    def feasible(self, ids) -> bool:
        return self.total_cost(ids) <= 1.0 + FEAS_TOL

    # -- JSON round trip ----------------------------------------------------

    @classmethod
    def from_json(cls, doc: dict) -> "Instance":
        n = int(doc["n"])
        capacity = float(doc.get("capacity", 1.0))
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        costs = np.asarray(doc["costs"], dtype=np.float64) / capacity
        if costs.shape != (n,):
            raise ValueError("costs must have n entries")
        objective = _objective_from_json(doc["objective"])
        keep = np.nonzero(costs <= 1 + FEAS_TOL)[0]
        if keep.size < n:
            objective = objective.restrict(keep)
            costs = costs[keep]
        return cls(
            n=int(keep.size),
            costs=costs,
            objective=objective,
            source_ids=tuple(int(i) for i in keep),
        )

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "capacity": 1.0,
            "costs": [float(c) for c in self.costs],
            "objective": self.objective.to_json(),
        }

    @classmethod
    def load(cls, path) -> "Instance":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def save(self, path) -> None:
        Path(path).write_text(dumps_canonical(self.to_json()))


def dumps_canonical(doc: dict) -> str:
    """Deterministic JSON encoding (same content -> identical bytes)."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
