"""Complex dense linear algebra, seeded randomness, and extended precision.

Hardware scalars are plain ``complex`` / ``numpy.complex128``; vectors and
matrices are dense numpy arrays.  Extended precision, used only by the
refinement stage, comes from mpmath at a fixed working precision.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

from .errors import DimensionMismatch, SingularMatrix

# Working precision for refinement arithmetic.  106 bits (double-double) is
# the floor needed for 30-digit output; 160 leaves headroom for Newton.
EXTENDED_PREC_BITS = 160

# Scalar type of refined coordinates.
ExtendedComplex = mpmath.mpc

_PIVOT_RTOL = 1e-14


class Rng:
    """Seeded deterministic random stream (PCG64).

    Identical seeds give identical streams.  ``fork`` derives an independent
    child stream whose seed is drawn from the parent, so a fixed master seed
    reproduces every downstream random choice.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size=size)

    def integers(self, high: int) -> int:
        return int(self._gen.integers(0, high))

    def unit_complex(self, size=None):
        """Unit-modulus complex samples with argument uniform on [0, 2*pi)."""
        angles = self._gen.uniform(0.0, 2.0 * np.pi, size=size)
        return np.exp(1j * angles)

    def fork(self) -> "Rng":
        return Rng(int(self._gen.integers(0, 2**63)))


def random_unit_complex(rng: Rng) -> complex:
    """One unit-modulus complex number (the gamma of the gamma trick)."""
    return complex(rng.unit_complex())


def vec_inf_norm(v) -> float:
    v = np.asarray(v)
    return float(np.max(np.abs(v))) if v.size else 0.0


def mat_inf_norm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(a), axis=1)))


def lu_factor(a):
    """LU factorization with partial pivoting.

    Raises SingularMatrix as soon as a pivot magnitude falls below
    1e-14 times the infinity norm of the input, so near-singular systems
    fail loudly instead of returning garbage steps.
    """
    lu = np.array(a, dtype=complex)
    if lu.ndim != 2 or lu.shape[0] != lu.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {lu.shape}")
    n = lu.shape[0]
    anorm = mat_inf_norm(lu)
    piv = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= _PIVOT_RTOL * anorm:
            raise SingularMatrix(
                f"pivot {abs(lu[p, k]):.3e} below {_PIVOT_RTOL:.0e} * anorm"
            )
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            piv[[k, p]] = piv[[p, k]]
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, piv


def lu_solve(lu, piv, b):
    """Solve with a factorization from lu_factor.  b may be 1-D or 2-D."""
    x = np.array(b, dtype=complex)[piv]
    n = lu.shape[0]
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


def lin_solve(a, b):
    """Solve the square complex system A x = b.

    Raises SingularMatrix when elimination meets a pivot below the
    relative threshold; upstream tracking treats that as path failure.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"A is {a.shape}, b has length {b.shape[0]}")
    lu, piv = lu_factor(a)
    return lu_solve(lu, piv, b)


def condition_estimate(a) -> float:
    """Infinity-norm condition number ||A|| * ||A^-1||, or +inf if singular.

    Matrices here are tiny (n <= ~50), so the inverse is computed outright
    rather than estimated.
    """
    a = np.asarray(a, dtype=complex)
    try:
        lu, piv = lu_factor(a)
    except SingularMatrix:
        return math.inf
    inv = lu_solve(lu, piv, np.eye(a.shape[0], dtype=complex))
    return max(float(mat_inf_norm(a) * mat_inf_norm(inv)), 1.0)


def extended_precision():
    """Context manager entering the refinement working precision."""
    return mpmath.workprec(EXTENDED_PREC_BITS)


def to_extended(z) -> mpmath.mpc:
    """Convert a hardware complex (or decimal string pair) losslessly."""
    if isinstance(z, mpmath.mpc):
        return z
    if isinstance(z, tuple):
        return mpmath.mpc(mpmath.mpf(z[0]), mpmath.mpf(z[1]))
    z = complex(z)
    return mpmath.mpc(z.real, z.imag)
