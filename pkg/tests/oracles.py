"""Independent reference computations used only by the tests."""

from fractions import Fraction

import mpmath
import numpy as np


def charpoly_exact(a):
    """Characteristic polynomial coefficients (highest degree first) by
    Faddeev–LeVerrier in exact rational arithmetic."""
    n = len(a)
    a = [[Fraction(float(x)) for x in row] for row in a]
    eye = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    coeffs = [Fraction(1)]
    m = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        am = [[sum(a[i][l] * m[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        m = [[am[i][j] + coeffs[-1] * eye[i][j] for j in range(n)] for i in range(n)]
        amk = [[sum(a[i][l] * m[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        coeffs.append(-sum(amk[i][i] for i in range(n)) / k)
    return coeffs


def eigenvalues_oracle(a, dps=50):
    """Eigenvalues from exact characteristic polynomial roots, sorted ascending."""
    coeffs = charpoly_exact(a)
    with mpmath.workdps(dps):
        roots = mpmath.polyroots([mpmath.mpf(c.numerator) / c.denominator for c in coeffs],
                                 maxsteps=400, extraprec=400)
        return np.sort(np.array([float(mpmath.re(r)) for r in roots]))


def power_iteration_top_singular(a, iters=5000, seed=0):
    """Largest singular value of ``a`` by power iteration on ``aᵀa``."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = a.T @ (a @ v)
        v = w / np.linalg.norm(w)
    return float(np.linalg.norm(a @ v))
