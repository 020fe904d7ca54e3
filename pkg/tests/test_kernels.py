import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wild_euler import kernels


def test_contract3_matches_brute_force(backend):
    rng = np.random.default_rng(1)
    F = rng.standard_normal((7, 5, 6))
    a, b, c = rng.standard_normal(7), rng.standard_normal(5), rng.standard_normal(6)
    brute = sum(F[i, j, k] * a[i] * b[j] * c[k]
                for i in range(7) for j in range(5) for k in range(6))
    assert backend.contract3(F, a, b, c) == pytest.approx(brute, rel=1e-13)


def test_contract3_strided_view(backend):
    rng = np.random.default_rng(2)
    F = rng.standard_normal((10, 8, 9))[2:7, :, 1:8]
    a, b, c = rng.standard_normal(5), rng.standard_normal(8), rng.standard_normal(7)
    assert backend.contract3(F, a, b, c) == pytest.approx(np.einsum("ijk,i,j,k", F, a, b, c),
                                                          rel=1e-13)


def test_contract3_shape_mismatch(backend):
    with pytest.raises(ValueError):
        backend.contract3(np.zeros((2, 2, 2)), np.ones(3), np.ones(2), np.ones(2))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 5), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_energy_field_is_largest_eigenvalue(rho, mr, mz, u, w):
    M = np.array([[mr * mr / rho - u, mr * mz / rho - w],
                  [mr * mz / rho - w, mz * mz / rho + u]])
    ref = np.linalg.eigvalsh(M)[-1]
    for k in (kernels._pykernels, kernels._impl):
        got = float(k.energy_field(np.array([rho]), np.array([mr]), np.array([mz]),
                                   np.array([u]), np.array([w]))[0])
        assert got == pytest.approx(ref, abs=1e-12 * (1 + abs(ref)))


def test_backends_agree_on_fields():
    rng = np.random.default_rng(3)
    shape = (9, 4, 5)
    rho = rng.uniform(0.5, 2, shape)
    args = [rho] + list(rng.standard_normal((4,) + shape))
    ref = kernels._pykernels.energy_field(*args)
    assert np.allclose(kernels.energy_field(*args), ref, rtol=1e-14, atol=1e-14)


def test_environment_forces_fallback():
    env = dict(os.environ, WILD_EULER_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import wild_euler; print(wild_euler.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
