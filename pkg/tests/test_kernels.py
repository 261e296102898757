"""Both kernel backends must agree and preserve exact zeros."""

import numpy as np
import pytest

from viderex.kernels import _numba, _numpy


@pytest.mark.parametrize("impl", [_numba, _numpy], ids=["numba", "numpy"])
def test_sum_sq_diff_agrees_with_dot(impl):
    rng = np.random.default_rng(120)
    a = rng.random((13, 29))
    b = rng.random((13, 29))
    d = (a - b).ravel()
    assert impl.sum_sq_diff(a, b) == pytest.approx(float(d @ d), abs=1e-12)
    assert impl.sum_sq_diff(a, a) == 0.0


@pytest.mark.parametrize("impl", [_numba, _numpy], ids=["numba", "numpy"])
def test_batch_preserves_exact_zero_rows(impl):
    rng = np.random.default_rng(121)
    stack = rng.random((40, 64))
    q = np.ascontiguousarray(stack[9])
    out = impl.batch_sum_sq_diff(stack, q)
    assert out[9] == 0.0
    assert np.argmin(out) == 9


def test_backends_agree_batch():
    rng = np.random.default_rng(122)
    stack = rng.random((300, 128))
    q = rng.random(128)
    a = _numba.batch_sum_sq_diff(stack, q)
    b = _numpy.batch_sum_sq_diff(stack, q)
    np.testing.assert_allclose(a, b, atol=1e-10, rtol=0)


def test_backends_agree_ridf():
    rng = np.random.default_rng(123)
    cur = rng.random((9, 33))
    snap = rng.random((9, 33))
    for step in (1, 2, 5):
        a = _numba.ridf_sum_sq(cur, snap, step)
        b = _numpy.ridf_sum_sq(cur, snap, step)
        np.testing.assert_allclose(a, b, atol=1e-10, rtol=0)
        assert a.size == len(range(0, 33, step))


def test_env_flag_selects_backend():
    import subprocess
    import sys

    for flag, want in [("numpy", "numpy"), ("numba", "numba"), ("auto", "numba")]:
        out = subprocess.run(
            [sys.executable, "-c", "from viderex import kernels; print(kernels.BACKEND)"],
            capture_output=True, text=True, env={"VIDEREX_KERNELS": flag, "PATH": "/usr/bin:/bin"},
        )
        assert out.stdout.strip() == want, out.stderr
