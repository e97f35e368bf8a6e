"""Backend selection and agreement between the compiled and NumPy kernels."""

import os
import subprocess
import sys

import numpy as np
import pytest

from tubeflood._kernels import BACKEND, _ref

try:
    from tubeflood._kernels import _fast
except ImportError:
    _fast = None

NODES, WEIGHTS = np.polynomial.legendre.leggauss(4)


def test_backend_is_reported():
    assert BACKEND in ("cython", "numpy")


@pytest.mark.skipif(_fast is None, reason="compiled kernel not built")
def test_backends_agree_uniform_grid():
    grid = np.linspace(0.0, 10.0, 301)
    a = _ref.t_matrix(grid, 0.5, NODES, WEIGHTS)
    b = _fast.t_matrix(grid, 0.5, NODES, WEIGHTS)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-15)


@pytest.mark.skipif(_fast is None, reason="compiled kernel not built")
def test_backends_agree_nonuniform_grid():
    rng = np.random.default_rng(12)
    grid = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 9.0, 199)), [10.0]])
    a = _ref.t_matrix(grid, 0.3, NODES, WEIGHTS)
    b = _fast.t_matrix(grid, 0.3, NODES, WEIGHTS)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-15)


def test_matrix_is_scale_invariant_on_uniform_grids():
    # one unit-grid matrix serves every alpha_max
    unit = _ref.t_matrix(np.linspace(0.0, 1.0, 201), 0.5, NODES, WEIGHTS)
    scaled = _ref.t_matrix(np.linspace(0.0, 7.3, 201), 0.5, NODES, WEIGHTS)
    assert np.allclose(unit, scaled, rtol=1e-12, atol=1e-15)


def test_last_row_is_zero():
    m = _ref.t_matrix(np.linspace(0.0, 1.0, 51), 0.5, NODES, WEIGHTS)
    assert np.all(m[-1] == 0.0)
    assert np.all(m[0] == 0.0)  # alpha = 0 kills the kernel


def test_environment_override_forces_numpy():
    env = dict(os.environ, TUBEFLOOD_NO_EXTENSION="1")
    out = subprocess.run(
        [sys.executable, "-c", "from tubeflood._kernels import BACKEND; print(BACKEND)"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    assert out.stdout.strip() == "numpy"
