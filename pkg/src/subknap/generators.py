"""Random instance generators for the three objective families.

Costs are drawn uniformly from (0, c_max]. In adversarial mode the cost of an
element is tied to its singleton value (rank-graded with noise), which makes
cheap high-value picks scarce; the Pearson correlation between cost and
singleton value is then well above 0.5 for moderate n.

Generation is deterministic per seed.
"""

from __future__ import annotations

import numpy as np

from .objectives import ConcaveModular, FacilityLocation, Instance, WeightedCoverage

FAMILIES = ("coverage", "facility", "concave_modular")


def _costs(rng, n, c_max, adversarial, singleton_values):
    if not 0 < c_max <= 1:
        raise ValueError("c_max must lie in (0, 1]")
    if not adversarial:
        return c_max * (1.0 - rng.random(n))  # uniform on (0, c_max]
    v = np.asarray(singleton_values, dtype=np.float64)
    spread = v.std()
    noise = rng.standard_normal(n) * (spread if spread > 0 else 1.0)
    score = 0.75 * v + 0.25 * noise
    order = np.argsort(np.argsort(score))  # rank of each element
    return c_max * (order + 1.0) / n


def gen_coverage(
    n: int,
    seed: int,
    universe: int | None = None,
    cover_size: int = 4,
    weight_max: float = 1.0,
    c_max: float = 0.5,
    adversarial: bool = False,
) -> Instance:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    u = universe if universe is not None else max(4, n)
    weights = weight_max * rng.random(u)
    covers = []
    for _ in range(n):
        size = 1 + int(rng.integers(0, max(1, 2 * cover_size - 1)))
        covers.append(np.unique(rng.integers(0, u, size=min(size, u))))
    singles = np.array([weights[c].sum() for c in covers])
    costs = _costs(rng, n, c_max, adversarial, singles)
    return Instance(n, costs, WeightedCoverage(weights, tuple(covers)))


def gen_facility(
    n: int,
    seed: int,
    users: int | None = None,
    c_max: float = 0.5,
    adversarial: bool = False,
) -> Instance:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    u = users if users is not None else max(4, n)
    # planted positions on a line give similarity structure with real overlap
    fpos = rng.random(n)
    upos = rng.random(u)
    sim = np.clip(1.0 - 2.0 * np.abs(upos[:, None] - fpos[None, :]), 0.0, None)
    sim *= 0.5 + rng.random(n)[None, :]
    singles = sim.sum(axis=0)
    costs = _costs(rng, n, c_max, adversarial, singles)
    return Instance(n, costs, FacilityLocation(sim))


def gen_concave_modular(
    n: int,
    seed: int,
    groups: int | None = None,
    density: float = 0.5,
    c_max: float = 0.5,
    adversarial: bool = False,
) -> Instance:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    g = groups if groups is not None else max(2, n // 2)
    weights = rng.random((g, n)) * (rng.random((g, n)) < density)
    # ensure every element participates somewhere
    for e in range(n):
        if not weights[:, e].any():
            weights[int(rng.integers(0, g)), e] = rng.random() + 0.1
    scales = 0.5 + rng.random(g)
    singles = scales @ np.sqrt(weights)
    costs = _costs(rng, n, c_max, adversarial, singles)
    return Instance(n, costs, ConcaveModular(scales, weights))


def generate(family: str, n: int, seed: int, **params) -> Instance:
    if family == "coverage":
        return gen_coverage(n, seed, **params)
    if family == "facility":
        return gen_facility(n, seed, **params)
    if family == "concave_modular":
        return gen_concave_modular(n, seed, **params)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
