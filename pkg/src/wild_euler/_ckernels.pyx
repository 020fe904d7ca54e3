# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Mirrors ``_pykernels`` exactly in semantics."""
from libc.math cimport sqrt, hypot

import numpy as np


def contract3(const double[:, :, :] F, const double[:] a, const double[:] b,
              const double[:] c):
    """Return sum_ijk F[i,j,k] a[i] b[j] c[k]."""
    cdef Py_ssize_t ni = F.shape[0], nj = F.shape[1], nk = F.shape[2]
    cdef Py_ssize_t i, j, k
    cdef double total = 0.0, row, inner
    if a.shape[0] != ni or b.shape[0] != nj or c.shape[0] != nk:
        raise ValueError("contract3: shape mismatch")
    for i in range(ni):
        if a[i] == 0.0:
            continue
        row = 0.0
        for j in range(nj):
            if b[j] == 0.0:
                continue
            inner = 0.0
            for k in range(nk):
                inner += F[i, j, k] * c[k]
            row += inner * b[j]
        total += row * a[i]
    return total


def energy_field(rho, mr, mz, u, w):
    """Largest eigenvalue of m (x) m / rho - U, elementwise."""
    rho_, mr_, mz_, u_, w_ = np.broadcast_arrays(
        np.asarray(rho, dtype=np.float64), np.asarray(mr, dtype=np.float64),
        np.asarray(mz, dtype=np.float64), np.asarray(u, dtype=np.float64),
        np.asarray(w, dtype=np.float64))
    shape = rho_.shape
    cdef double[:] R = np.ascontiguousarray(rho_).ravel()
    cdef double[:] MR = np.ascontiguousarray(mr_).ravel()
    cdef double[:] MZ = np.ascontiguousarray(mz_).ravel()
    cdef double[:] UU = np.ascontiguousarray(u_).ravel()
    cdef double[:] WW = np.ascontiguousarray(w_).ravel()
    out = np.empty(R.shape[0], dtype=np.float64)
    cdef double[:] O = out
    cdef Py_ssize_t n = R.shape[0], i
    cdef double inv, a, b, c
    for i in range(n):
        inv = 1.0 / R[i]
        a = MR[i] * MR[i] * inv - UU[i]
        b = MR[i] * MZ[i] * inv - WW[i]
        c = MZ[i] * MZ[i] * inv + UU[i]
        O[i] = 0.5 * (a + c) + hypot(0.5 * (a - c), b)
    return out.reshape(shape)
