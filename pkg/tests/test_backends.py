"""Parity between the numba kernels and the numpy/Python fallback."""

import subprocess
import sys

import numpy as np
import pytest

from subknap import backend
from subknap.generators import generate
from subknap.oracle import as_ids

from .conftest import random_point


@pytest.fixture
def both_backends():
    if backend._numba_impl is None:
        pytest.skip("numba unavailable")
    yield
    backend.select_backend("auto")


def test_eval_set_parity(both_backends):
    rng = np.random.default_rng(3)
    for family in ("coverage", "facility", "concave_modular"):
        inst = generate(family, 12, seed=8)
        comp = inst.compiled
        for _ in range(30):
            ids = as_ids(rng.choice(12, rng.integers(0, 13), replace=False))
            backend.select_backend("numba")
            a = backend.eval_set(comp, ids)
            backend.select_backend("numpy")
            b = backend.eval_set(comp, ids)
            assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_subset_values_parity(both_backends):
    rng = np.random.default_rng(4)
    for family in ("coverage", "facility", "concave_modular"):
        inst = generate(family, 12, seed=9)
        comp = inst.compiled
        for _ in range(10):
            x = random_point(rng, 12, support=int(rng.integers(0, 7)))
            backend.select_backend("numba")
            a = backend.subset_values(comp, x.base_ids, x.frac_ids)
            backend.select_backend("numpy")
            b = backend.subset_values(comp, x.base_ids, x.frac_ids)
            np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-12)


def test_env_flag_selects_fallback():
    code = "import subknap.backend as b; print(b.active_backend())"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"PATH": "/usr/bin:/bin", "SUBKNAP_BACKEND": "numpy"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        backend.select_backend("gpu")
    backend.select_backend("auto")
