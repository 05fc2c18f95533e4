"""Scalar helpers shared across the package.

All kinematic formulas are written against these wrappers so that the same
code path runs in complex double precision (the default) and in mpmath
arbitrary precision (used by the high-precision mode and by test oracles).
"""

from __future__ import annotations

import cmath

import mpmath
import numpy as np

#: Tolerance tiers, matching the identity class they gate.
TOL_CLOSED_FORM = 1e-12
TOL_ALGEBRA = 1e-10
TOL_INTERTWINER = 1e-9
TOL_COMPOSITE = 1e-8


def is_mp(*values) -> bool:
    """True if any argument is an mpmath scalar."""
    return any(isinstance(v, (mpmath.mpf, mpmath.mpc)) for v in values)


def sqrt(x):
    """Principal square root, dispatching on scalar type."""
    if is_mp(x):
        return mpmath.sqrt(x)
    return cmath.sqrt(x)


def log(x):
    """Principal logarithm, dispatching on scalar type."""
    if is_mp(x):
        return mpmath.log(x)
    return cmath.log(x)


def qint(n: int, q):
    """q-number [n]_q = (q^n - q^-n)/(q - q^-1), with the q=1 value n."""
    if q == 1:
        return 1.0 * n if not is_mp(q) else mpmath.mpf(n)
    return (q**n - q**-n) / (q - 1 / q)


def qfac(n: int, q):
    """q-factorial [n]_q!."""
    out = 1.0 if not is_mp(q) else mpmath.mpf(1)
    for j in range(2, n + 1):
        out = out * qint(j, q)
    return out


def fnorm(a) -> float:
    """Frobenius norm that also accepts object (mpmath) arrays."""
    a = np.asarray(a)
    if a.dtype == object:
        return float(mpmath.sqrt(sum(abs(x) ** 2 for x in a.flat)))
    return float(np.linalg.norm(a))


def rel_residual(lhs, rhs) -> float:
    """Frobenius-relative residual ||L - R|| / max(1, ||L||, ||R||)."""
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    return fnorm(lhs - rhs) / max(1.0, fnorm(lhs), fnorm(rhs))


def mdot(a, b):
    """Matrix product working for both complex128 and object arrays."""
    return np.dot(a, b)


def minv(a):
    """Matrix inverse; object arrays go through mpmath to keep precision."""
    a = np.asarray(a)
    if a.dtype == object:
        m = mpmath.matrix(a.shape[0], a.shape[1])
        for i in range(a.shape[0]):
            for j in range(a.shape[1]):
                m[i, j] = a[i, j]
        inv = m**-1
        out = np.empty(a.shape, dtype=object)
        for i in range(a.shape[0]):
            for j in range(a.shape[1]):
                out[i, j] = inv[i, j]
        return out
    return np.linalg.inv(a)


def to_complex(a):
    """Downcast an object (mpmath) array or scalar to complex128."""
    if np.isscalar(a) or isinstance(a, (mpmath.mpf, mpmath.mpc)):
        return complex(a)
    a = np.asarray(a)
    if a.dtype == object:
        return np.array([[complex(x) for x in row] for row in a])
    return a.astype(complex)
