"""Independent reference computations used to freeze derived test values.

Nothing here imports the package under test.
"""
from fractions import Fraction

import numpy as np


def charpoly(A):
    """Characteristic polynomial coefficients by the Faddeev-LeVerrier recursion."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(A)
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(A @ M) / k)
    return np.array(coeffs)


def charpoly_eigs(A):
    return np.sort_complex(np.roots(charpoly(A)).astype(complex))


def charpoly_exact(A):
    """Faddeev-LeVerrier in rational arithmetic for integer (or rational) matrices."""
    A = [[Fraction(v).limit_denominator() for v in row] for row in np.asarray(A).tolist()]
    n = len(A)

    def mul(X, Y):
        return [[sum(X[i][k] * Y[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    coeffs = [Fraction(1)]
    M = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        AM = mul(A, M)
        M = [[AM[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        AM = mul(A, M)
        coeffs.append(-sum(AM[i][i] for i in range(n)) / k)
    return coeffs


def integer_roots(coeffs):
    """All integer roots with multiplicity of a monic integer polynomial, by synthetic division."""
    c = [int(v) for v in coeffs]
    roots = []
    while len(c) > 1:
        if c[-1] == 0:
            roots.append(0)
            c = c[:-1]
            continue
        for r in sorted({d for k in range(1, abs(c[-1]) + 1) if c[-1] % k == 0 for d in (k, -k)}):
            acc = [c[0]]
            for v in c[1:]:
                acc.append(v + r * acc[-1])
            if acc[-1] == 0:
                roots.append(r)
                c = acc[:-1]
                break
        else:
            raise ValueError("polynomial has non-integer roots")
    return sorted(roots)


def central_grad(f, p, h=1e-6):
    p = np.asarray(p, dtype=float)
    g = np.empty_like(p)
    for i in range(p.size):
        e = np.zeros_like(p)
        e[i] = h * (1 + abs(p[i]))
        g[i] = (f(p + e) - f(p - e)) / (2 * e[i])
    return g


def central_hess(f, p, h=1e-4):
    p = np.asarray(p, dtype=float)
    n = p.size
    H = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h
            ej[j] = h
            H[i, j] = (f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej) + f(p - ei - ej)) / (4 * h * h)
    return H


def strong_quasi_grid(f, lo, hi, grid=50, n_lambda=21):
    """Brute-force fitted s on a 1-D grid, fully vectorized."""
    g = np.linspace(lo, hi, grid)
    lam = np.linspace(0, 1, n_lambda)[1:-1]
    u, v, l = np.meshgrid(g, g, lam, indexing="ij")
    mask = u != v
    u, v, l = u[mask], v[mask], l[mask]
    top = np.maximum(f(u), f(v))
    ratio = (top - f(l * u + (1 - l) * v)) / (l * (1 - l) * (u - v) ** 2)
    return float(ratio.min())


# Closed forms of the catalog functions, written out independently.
def F_aug(p):
    x1, x2, x3, z = p
    return (x1 + x2 + x3) ** 2 + z * (x1 - x2) + (x1 - x2) ** 2


def F_lag(p):
    x1, x2, x3, z = p
    return (x1 + x2 + x3) ** 2 + z * (x1 - x2)


def F_quasi(p):
    x, z = p
    return (2 - np.exp(-x * x)) * (1 + np.exp(-z * z))


def F_ring(p):
    x = np.asarray(p[:3])
    return (np.sqrt(x @ x) - 1) ** 2 + p[3] * (p[2] - 0.5)


def F_quartic(p):
    x = np.asarray(p[:2])
    r = np.sqrt(x @ x)
    return (r - 1) ** 4 - p[2] ** 2 * r * r


def F_xzz(p):
    return p[0] * p[1] ** 2


CLOSED_FORMS = {
    "augmented_lagrangian": F_aug,
    "lagrangian": F_lag,
    "quasi": F_quasi,
    "ring_lagrangian": F_ring,
    "quartic_ring": F_quartic,
    "xz_squared": F_xzz,
}
