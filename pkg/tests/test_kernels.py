import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from becphase import kernels

needs_cython = pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="extension not built")

PY = kernels.BACKENDS["python"]
CY = kernels.BACKENDS.get("cython")


def _cvec(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


@needs_cython
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(0, 10), eta=st.sampled_from([1, -1]))
def test_exact_branch_agrees(seed, m, eta):
    rng = np.random.default_rng(seed)
    amps = _cvec(rng, m + 1)
    args = (amps, m, 20.0, 15.0, complex(*rng.normal(size=2)), complex(*rng.normal(size=2)),
            float(rng.uniform(0, 6.3)), eta)
    (o1, n1), (o2, n2) = PY.exact_branch(*args), CY.exact_branch(*args)
    np.testing.assert_allclose(o1, o2, rtol=1e-13, atol=1e-13)
    assert n1 == pytest.approx(n2, rel=1e-13)


@needs_cython
@given(seed=st.integers(0, 2**32 - 1), steps=st.integers(1, 12))
def test_exact_sequence_agrees(seed, steps):
    rng = np.random.default_rng(seed)
    ua, vb = _cvec(rng, steps), _cvec(rng, steps)
    phi = rng.uniform(0, 6.3, steps)
    u = rng.random(steps)
    forced = rng.choice([0, 0, 1, -1], steps).astype(np.int64)
    a = PY.exact_sequence(np.ones(1, complex), 0, 8.0, 9.0, ua, vb, phi, u, forced)
    b = CY.exact_sequence(np.ones(1, complex), 0, 8.0, 9.0, ua, vb, phi, u, forced)
    assert a[5] == b[5] and a[6] == b[6]
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_allclose(a[2], b[2], rtol=1e-12)
    assert a[3] == pytest.approx(b[3], rel=1e-12, abs=1e-12)


@needs_cython
@given(seed=st.integers(0, 2**32 - 1), steps=st.integers(1, 30))
def test_lambda_sequence_agrees(seed, steps):
    rng = np.random.default_rng(seed)
    K = 128
    grid = 2 * np.pi * np.arange(K) / K
    vis = rng.uniform(0, 1, steps)
    off = rng.uniform(0, 6.3, steps)
    u = rng.random(steps)
    forced = rng.choice([0, 1, -1], steps).astype(np.int64)
    w = np.full(K, 1.0 / K)
    a = PY.lambda_sequence(w, np.cos(grid), np.sin(grid), vis, off, u, forced)
    b = CY.lambda_sequence(w, np.cos(grid), np.sin(grid), vis, off, u, forced)
    assert a[6] == b[6] and a[7] == b[7]
    np.testing.assert_array_equal(a[0], b[0])
    for i in (1, 2, 3, 4, 5):
        np.testing.assert_allclose(a[i], b[i], rtol=1e-12, atol=1e-14)


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_env_var_forces_fallback():
    code = "from becphase import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, BECPHASE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "python"
