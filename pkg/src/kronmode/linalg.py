"""Small dense matrix helpers: products, solves, norms and the exponential."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, ShapeError, SingularMatrixError

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover - optional speedup only
    threadpool_limits = None

__all__ = ["matexp", "matmul", "one_norm", "solve"]

# below this size BLAS threading gains nothing for the exponential, and
# serializing it avoids thread-pool thrash when many small exponentials
# interleave with batched mode products
_SINGLE_THREAD_EXP_DIM = 256


def _as_matrix(a, name):
    a = np.asarray(a)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be two-dimensional, got ndim={a.ndim}")
    return a


def matmul(a, b):
    """Matrix product with an explicit inner-dimension check."""
    a = _as_matrix(a, "left operand")
    b = _as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def one_norm(a):
    """Maximum absolute column sum."""
    a = _as_matrix(a, "matrix")
    return float(np.abs(a).sum(axis=0).max())


def solve(a, b):
    """Solve ``a @ x = b`` by LU factorization with partial pivoting."""
    a = _as_matrix(a, "coefficient matrix")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"coefficient matrix must be square, got {a.shape}")
    b = np.asarray(b)
    if b.ndim not in (1, 2) or b.shape[0] != a.shape[0]:
        raise ShapeError(f"right-hand side of shape {b.shape} does not match {a.shape}")
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"linear solve failed: {exc}") from exc


def matexp(a):
    """Matrix exponential by diagonal Pade approximation with scaling and squaring.

    Real input yields real output; ``matexp(0) == I`` exactly.
    """
    a = _as_matrix(a, "matrix")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"matrix exponential needs a square matrix, got {a.shape}")
    if not np.isfinite(a).all():
        raise InvalidInputError("matrix exponential of non-finite entries")
    if threadpool_limits is not None and a.shape[0] <= _SINGLE_THREAD_EXP_DIM:
        with threadpool_limits(limits=1):
            return scipy.linalg.expm(a)
    return scipy.linalg.expm(a)
