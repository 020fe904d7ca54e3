"""Pure numpy implementations of the hot kernels (fallback backend)."""
import numpy as np


def contract3(F, a, b, c):
    """Return sum_ijk F[i,j,k] a[i] b[j] c[k]."""
    F = np.asarray(F, dtype=np.float64)
    if F.shape != (len(a), len(b), len(c)):
        raise ValueError("contract3: shape mismatch")
    return float(np.einsum("ijk,i,j,k->", F, a, b, c, optimize=True))


def energy_field(rho, mr, mz, u, w):
    """Largest eigenvalue of m (x) m / rho - U, elementwise."""
    rho = np.asarray(rho, dtype=np.float64)
    a = mr * mr / rho - u
    b = mr * mz / rho - w
    c = mz * mz / rho + u
    return 0.5 * (a + c) + np.hypot(0.5 * (a - c), b)
