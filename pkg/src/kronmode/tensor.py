"""Dense order-d tensor kernels: fibers, mu-mode products, Tucker operator, norms.

A tensor is a plain ``numpy.ndarray`` whose entry ``(i_1, ..., i_d)`` sits at
linear position ``i_1 + n_1*i_2 + n_1*n_2*i_3 + ...`` (0-based), i.e. the
column-major vectorization ``ravel(order="F")``.  Direction indices ``mu``
are 1-based; direction 1 varies fastest in memory.

Mode products are evaluated as batched matrix-matrix multiplications acting
directly on the stored array.  No globally transposed copy of the operand is
formed: direction 1 is a single multiplication against the first unfolding,
every other direction is a batch of strided multiplications over the trailing
indices.
"""

from __future__ import annotations

from contextlib import contextmanager
from math import prod

import numpy as np

from .errors import ConfigurationError, InvalidDirectionError, ShapeError

__all__ = [
    "FlopCounter",
    "count_flops",
    "mu_fiber_count",
    "mu_mode_product",
    "norm",
    "tucker",
]


class FlopCounter:
    """Multiply-add tally of the mode products executed while armed."""

    __slots__ = ("macs",)

    def __init__(self):
        self.macs = 0


_active_counters: list[FlopCounter] = []


@contextmanager
def count_flops():
    """Arm a :class:`FlopCounter` for mode products run inside the block.

    One ``m x n_mu`` product applied to a tensor with ``N/n_mu`` fibers adds
    ``m * (N/n_mu) * n_mu`` multiply-adds, so a propagator step with square
    factors adds ``sum_mu N*n_mu``.
    """
    counter = FlopCounter()
    _active_counters.append(counter)
    try:
        yield counter
    finally:
        _active_counters.remove(counter)


def _check_direction(ndim, mu):
    if not isinstance(mu, (int, np.integer)):
        raise InvalidDirectionError(f"direction index must be an integer, got {mu!r}")
    if not 1 <= mu <= ndim:
        raise InvalidDirectionError(f"direction {mu} outside 1..{ndim}")


def mu_fiber_count(shape, mu):
    """Number of mu-fibers of a tensor with the given extents, ``N / n_mu``."""
    dims = tuple(int(n) for n in shape)
    if not dims:
        raise ShapeError("shape must have at least one extent")
    if any(n < 1 for n in dims):
        raise ShapeError(f"extents must be positive, got {dims}")
    _check_direction(len(dims), mu)
    return prod(dims) // dims[mu - 1]


def mu_mode_product(u, mat, mu):
    """Multiply ``mat`` onto every mu-fiber of ``u``.

    Parameters
    ----------
    u : ndarray
        Order-d tensor with extent ``n_mu`` along direction ``mu``.
    mat : ndarray
        ``m x n_mu`` matrix.
    mu : int
        1-based direction index.

    Returns
    -------
    ndarray
        Fortran-ordered tensor of shape ``(n_1, ..., m, ..., n_d)`` with
        entries ``S[..., i, ...] = sum_j mat[i, j] * u[..., j, ...]``.
        Real and complex operands mix by the usual numpy promotion rules.
    """
    u = np.asarray(u)
    mat = np.asarray(mat)
    _check_direction(u.ndim, mu)
    if mat.ndim != 2:
        raise ShapeError(f"operator for direction {mu} must be a matrix, got ndim={mat.ndim}")
    ax = mu - 1
    shp = u.shape
    n_mu = shp[ax]
    m = mat.shape[0]
    if mat.shape[1] != n_mu:
        raise ShapeError(
            f"direction {mu}: matrix has {mat.shape[1]} columns, tensor extent is {n_mu}"
        )

    out_dtype = np.result_type(u.dtype, mat.dtype)
    for counter in _active_counters:
        counter.macs += m * n_mu * (u.size // n_mu)

    uf = u if u.flags.f_contiguous else np.asfortranarray(u)
    if uf.dtype != out_dtype:
        uf = uf.astype(out_dtype, order="F")
    if mat.dtype != out_dtype:
        mat = mat.astype(out_dtype)
    out_shape = shp[:ax] + (m,) + shp[ax + 1 :]

    if ax == 0:
        # One multiplication against the mode-1 unfolding.  The C-ordered
        # (N/n_1, m) product is the F-ordered transposed result, so no
        # reordering copy is needed.
        unfold = uf.reshape((n_mu, -1), order="F")
        tmp = np.matmul(unfold.T, mat.T)
        return tmp.T.reshape(out_shape, order="F")

    n_left = prod(shp[:ax])
    n_right = prod(shp[ax + 1 :])
    cube = uf.reshape((n_left, n_mu, n_right), order="F")
    out = np.empty((n_left, m, n_right), dtype=out_dtype, order="F")
    for r in range(n_right):
        # cube[:, :, r].T and out[:, :, r].T are C-contiguous views, so each
        # batch entry is a single direct matrix-matrix multiplication.
        np.matmul(mat, cube[:, :, r].T, out=out[:, :, r].T)
    return out.reshape(out_shape, order="F")


def tucker(u, mats):
    """Apply one matrix per direction: ``u x_1 mats[0] x_2 ... x_d mats[d-1]``.

    ``None`` entries are skipped.  Distinct directions commute, so the fixed
    ascending application order is a reproducibility choice, not a
    mathematical one.
    """
    u = np.asarray(u)
    if len(mats) != u.ndim:
        raise ShapeError(f"expected {u.ndim} matrix slots, got {len(mats)}")
    for mu, mat in enumerate(mats, start=1):
        if mat is None:
            continue
        mat = np.asarray(mat)
        if mat.ndim != 2 or mat.shape[1] != u.shape[mu - 1]:
            raise ShapeError(
                f"direction {mu}: matrix of shape {mat.shape} does not act on extent "
                f"{u.shape[mu - 1]}"
            )
    out = u
    for mu, mat in enumerate(mats, start=1):
        if mat is not None:
            out = mu_mode_product(out, mat, mu)
    return out


def norm(u, kind="two", weights=None):
    """Tensor norm: ``max`` entry modulus, Euclidean ``two``, or ``weighted_two``.

    For ``weighted_two``, ``weights`` is one positive vector per direction and
    the result is ``sqrt(sum_i w(i) |u(i)|^2)`` with ``w(i)`` the product of
    the per-direction weights.
    """
    u = np.asarray(u)
    if kind == "max":
        return float(np.max(np.abs(u)))
    if kind == "two":
        return float(np.linalg.norm(u.ravel(order="K")))
    if kind == "weighted_two":
        if weights is None:
            raise ConfigurationError("weighted_two norm requires per-direction weights")
        if len(weights) != u.ndim:
            raise ShapeError(f"expected {u.ndim} weight vectors, got {len(weights)}")
        wvecs = []
        for mu, w in enumerate(weights, start=1):
            w = np.asarray(w, dtype=float)
            if w.shape != (u.shape[mu - 1],):
                raise ShapeError(
                    f"direction {mu}: weight vector of shape {w.shape} does not match "
                    f"extent {u.shape[mu - 1]}"
                )
            wvecs.append(w)
        acc = np.abs(u) ** 2
        for w in reversed(wvecs):
            acc = acc @ w
        return float(np.sqrt(acc))
    raise ConfigurationError(f"unknown norm kind {kind!r}")
