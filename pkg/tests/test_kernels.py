import os
import subprocess
import sys

import numpy as np
import pytest
import sympy

from nmfid import _kernels_py, kernels

BACKENDS = ["python"]
try:
    kernels.get_backend("compiled")
    BACKENDS.append("compiled")
except ImportError:
    pass


@pytest.mark.parametrize("backend", BACKENDS)
def test_int_rank_matches_sympy(backend, rng):
    k = kernels.get_backend(backend)
    for _ in range(40):
        m, n = rng.integers(1, 7, size=2)
        r = rng.integers(0, min(m, n) + 1)
        a = rng.integers(-4, 5, size=(m, r)) @ rng.integers(-4, 5, size=(r, n))
        rows = a.tolist()
        assert k.int_rank(rows) == sympy.Matrix(rows).rank()


@pytest.mark.parametrize("backend", BACKENDS)
def test_int_rank_overflow_falls_back(backend):
    big = 2**62
    rows = [[big, big - 1, 3], [big - 1, big, 5], [1, 2, big]]
    assert kernels.get_backend(backend).int_rank(rows) == sympy.Matrix(rows).rank()


def test_backends_agree_on_mu(rng):
    if "compiled" not in BACKENDS:
        pytest.skip("compiled extension not built")
    S = rng.random((7, 9))
    W0, H0 = 1.0 - rng.random((7, 3)), 1.0 - rng.random((3, 9))
    a = kernels.get_backend("python").mu_run(S, W0, H0, 200, 1e-12, 0.0)
    c = kernels.get_backend("compiled").mu_run(S, W0, H0, 200, 1e-12, 0.0)
    assert a[3] == c[3]
    assert np.allclose(a[0], c[0], rtol=1e-9, atol=1e-12)
    assert np.allclose(a[4], c[4], rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_mu_loss_is_monotone(backend, rng):
    S = rng.random((6, 8))
    W0, H0 = 1.0 - rng.random((6, 2)), 1.0 - rng.random((2, 8))
    hist = kernels.get_backend(backend).mu_run(S, W0, H0, 300, 1e-12, 0.0)[4]
    assert np.all(np.diff(hist) <= 1e-12 * hist[0])


def test_mu_does_not_mutate_inputs(rng):
    S = rng.random((4, 5))
    W0, H0 = rng.random((4, 2)), rng.random((2, 5))
    W_copy, H_copy = W0.copy(), H0.copy()
    for b in BACKENDS:
        kernels.get_backend(b).mu_run(S, W0, H0, 10, 1e-12, 0.0)
        assert np.array_equal(W0, W_copy) and np.array_equal(H0, H_copy)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("NMFID_THREADS", "4")
    assert kernels.thread_cap() == 4
    monkeypatch.setenv("NMFID_THREADS", "junk")
    assert kernels.thread_cap() == 1
    monkeypatch.delenv("NMFID_THREADS")
    assert kernels.thread_cap() == 1


def test_python_kernel_is_reference():
    assert _kernels_py.int_rank([[0, 0], [0, 0]]) == 0
    assert _kernels_py.int_rank([]) == 0


def test_env_forces_python_backend():
    env = dict(os.environ, NMFID_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import nmfid; print(nmfid.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
