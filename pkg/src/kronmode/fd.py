"""One-dimensional grids, finite-difference matrices and experiment factors.

Boundary closures work through ghost nodes: periodic grids wrap indices,
homogeneous Dirichlet drops the ghost contribution (the ghost value is zero),
homogeneous Neumann reflects the ghost value evenly about the boundary node.
All n grid points stay in the state regardless of the closure, which keeps
the per-direction factors uniformly sized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidGridError
from .kron import KroneckerOp

__all__ = [
    "BoundaryCondition",
    "DIRICHLET_BC",
    "DIRICHLET_ZERO",
    "Grid1D",
    "NEUMANN_BC",
    "NEUMANN_ZERO",
    "PERIODIC",
    "PERIODIC_BC",
    "diff_matrix",
    "fd_weights",
    "fourier_second_derivative",
    "gpe_weighted_factors",
    "heat_factors",
    "nonuniform_grid",
    "pipeflow_factors",
    "pipeflow_grids",
    "pipeflow_velocity",
    "sinh_clustered_grid",
    "trapezoid_weights",
    "uniform_grid",
    "uniform_periodic_grid",
]

UNIFORM_PERIODIC = "uniform_periodic"
UNIFORM = "uniform"
NONUNIFORM = "nonuniform"

PERIODIC = "periodic"
DIRICHLET_ZERO = "dirichlet_zero"
NEUMANN_ZERO = "neumann_zero"
_BC_KINDS = (PERIODIC, DIRICHLET_ZERO, NEUMANN_ZERO)


@dataclass(frozen=True)
class Grid1D:
    """Strictly increasing coordinates plus the grid kind.

    ``period`` is the interval length b - a for ``uniform_periodic`` grids,
    whose points cover [a, b) with spacing (b - a)/n.
    """

    points: np.ndarray
    kind: str
    period: float | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 1:
            raise InvalidGridError("grid needs a one-dimensional list of points")
        if pts.size > 1 and not np.all(np.diff(pts) > 0):
            raise InvalidGridError("grid points must be strictly increasing")
        if self.kind not in (UNIFORM_PERIODIC, UNIFORM, NONUNIFORM):
            raise ConfigurationError(f"unknown grid kind {self.kind!r}")
        if self.kind == UNIFORM_PERIODIC and (self.period is None or self.period <= 0):
            raise ConfigurationError("periodic grids need a positive period")
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.size

    @property
    def spacing(self):
        """Spacing h for the uniform kinds."""
        if self.kind == UNIFORM_PERIODIC:
            return self.period / self.n
        if self.kind == UNIFORM:
            return (self.points[-1] - self.points[0]) / (self.n - 1)
        raise ConfigurationError("a nonuniform grid has no single spacing")


def uniform_periodic_grid(a, b, n):
    """n equispaced points covering [a, b), spacing (b - a)/n."""
    h = (b - a) / n
    return Grid1D(a + h * np.arange(n), UNIFORM_PERIODIC, period=b - a)


def uniform_grid(a, b, n):
    """n equispaced points covering [a, b] inclusive."""
    if n < 2:
        raise ConfigurationError("a bounded uniform grid needs at least two points")
    return Grid1D(np.linspace(a, b, n), UNIFORM)


def nonuniform_grid(points):
    return Grid1D(np.asarray(points, dtype=float), NONUNIFORM)


def sinh_clustered_grid(n, half_width=20.0, strength=2.0):
    """Nonuniform grid on [-half_width, half_width] clustered around the origin.

    Image of a uniform grid under x -> half_width * sinh(strength*x) /
    sinh(strength); larger ``strength`` clusters harder.
    """
    if strength <= 0:
        raise ConfigurationError("clustering strength must be positive")
    xi = np.linspace(-1.0, 1.0, n)
    return nonuniform_grid(half_width * np.sinh(strength * xi) / np.sinh(strength))


@dataclass(frozen=True)
class BoundaryCondition:
    """Closure kind per endpoint; periodic applies to both ends or neither."""

    left: str
    right: str

    def __post_init__(self):
        for side in (self.left, self.right):
            if side not in _BC_KINDS:
                raise ConfigurationError(f"unknown boundary kind {side!r}")
        if (self.left == PERIODIC) != (self.right == PERIODIC):
            raise ConfigurationError("periodic closure must apply to both ends or neither")

    @property
    def is_periodic(self):
        return self.left == PERIODIC


PERIODIC_BC = BoundaryCondition(PERIODIC, PERIODIC)
DIRICHLET_BC = BoundaryCondition(DIRICHLET_ZERO, DIRICHLET_ZERO)
NEUMANN_BC = BoundaryCondition(NEUMANN_ZERO, NEUMANN_ZERO)


def fd_weights(nodes, center, deriv_order):
    """Finite-difference weights on arbitrary distinct nodes.

    Returns coefficients c with ``sum_j c[j] f(nodes[j])`` approximating the
    ``deriv_order``-th derivative of f at ``center``, exact for polynomials
    up to degree ``len(nodes) - 1`` (the classical recursive
    interpolation-weight construction).
    """
    x = np.asarray(nodes, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidGridError("stencil nodes must be a non-empty vector")
    if np.unique(x).size != x.size:
        raise InvalidGridError("stencil nodes must be distinct")
    m = int(deriv_order)
    if m < 0:
        raise ConfigurationError("derivative order must be nonnegative")
    if m >= x.size:
        raise ConfigurationError(
            f"derivative order {m} needs more than {x.size} stencil nodes"
        )
    n = x.size
    weights = np.zeros((n, m + 1))
    weights[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - center
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - center
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    weights[i, k] = c1 * (k * weights[i - 1, k - 1] - c5 * weights[i - 1, k]) / c2
                weights[i, 0] = -c1 * c5 * weights[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                weights[j, k] = (c4 * weights[j, k] - k * weights[j, k - 1]) / c3
            weights[j, 0] = c4 * weights[j, 0] / c3
        c1 = c2
    return weights[:, m]


def diff_matrix(grid, deriv_order, accuracy_order, bc):
    """Differentiation matrix of the requested derivative and accuracy order.

    Each row is a centered stencil of ``accuracy_order + 1`` nodes; the
    boundary closure folds ghost nodes per ``bc`` as described in the module
    docstring.  Nonuniform grids support ``accuracy_order == 2`` only.
    """
    if deriv_order not in (1, 2):
        raise ConfigurationError(f"derivative order {deriv_order} not supported")
    p = int(accuracy_order)
    if p <= 0 or p % 2 != 0:
        raise ConfigurationError(f"accuracy order must be a positive even integer, got {p}")
    n = grid.n
    if p + 1 > n:
        raise ConfigurationError(f"accuracy order {p} needs at least {p + 1} of {n} points")
    if bc.is_periodic != (grid.kind == UNIFORM_PERIODIC):
        raise ConfigurationError("periodic closure requires a periodic grid and vice versa")
    if grid.kind == NONUNIFORM and p != 2:
        raise ConfigurationError("nonuniform grids support accuracy order 2 only")
    half = p // 2

    if bc.is_periodic:
        h = grid.spacing
        offsets = h * (np.arange(p + 1) - half)
        w = fd_weights(offsets, 0.0, deriv_order)
        rows = np.arange(n)
        mat = np.zeros((n, n))
        for s in range(p + 1):
            mat[rows, (rows + s - half) % n] += w[s]
        return mat

    x = grid.points
    ghost_left = 2 * x[0] - x[half:0:-1]
    ghost_right = 2 * x[-1] - x[-2 : -half - 2 : -1]
    extended = np.concatenate([ghost_left, x, ghost_right])
    mat = np.zeros((n, n))
    for i in range(n):
        window = extended[i : i + p + 1]
        w = fd_weights(window, x[i], deriv_order)
        for s in range(p + 1):
            j = i + s - half
            if 0 <= j < n:
                mat[i, j] += w[s]
            elif j < 0:
                if bc.left == NEUMANN_ZERO:
                    mat[i, -j] += w[s]
                # dirichlet_zero: ghost value is zero, term dropped
            else:
                if bc.right == NEUMANN_ZERO:
                    mat[i, 2 * (n - 1) - j] += w[s]
    return mat


def fourier_second_derivative(n):
    """Dense second-derivative differentiation matrix on the periodic unit circle.

    Standard closed form for an even number of points on [0, 2*pi).
    """
    if n < 2 or n % 2 != 0:
        raise ConfigurationError("the spectral differentiation matrix needs an even point count")
    h = 2 * np.pi / n
    idx = np.arange(n)
    diff = idx[:, None] - idx[None, :]
    mat = np.full((n, n), -np.pi**2 / (3 * h * h) - 1.0 / 6.0)
    off = diff != 0
    mat[off] = -((-1.0) ** diff[off]) / (2 * np.sin(diff[off] * h / 2) ** 2)
    return mat


def heat_factors(n, p):
    """Three identical periodic second-derivative factors on [0, 2*pi)^3.

    ``p`` is the even finite-difference accuracy order; ``p = inf`` selects
    the dense spectral differentiation matrix.
    """
    if np.isinf(p):
        a = fourier_second_derivative(n)
    else:
        if int(p) != p or int(p) % 2 != 0:
            raise ConfigurationError(f"accuracy order must be even or inf, got {p}")
        grid = uniform_periodic_grid(0.0, 2 * np.pi, n)
        a = diff_matrix(grid, 2, int(p), PERIODIC_BC)
    return KroneckerOp((a, a, a))


_PIPE_DIFFUSIVITY = 1.0 / 90.0
_PIPE_RHO_MIN = 0.1
_PIPE_RHO_MAX = 5.0
_PIPE_Z_MAX = 8.0


def pipeflow_velocity(z):
    """Axial flow speed profile of the radially symmetric pipe model."""
    z = np.asarray(z, dtype=float)
    return 2.0 + np.tanh(4.0 * (z - 5.0 / 2.0)) - np.tanh(4.0 * (z - 5.0))


def pipeflow_grids(n):
    """Radial and axial grids of the pipe model, n points each."""
    return (
        uniform_grid(_PIPE_RHO_MIN, _PIPE_RHO_MAX, n),
        uniform_grid(0.0, _PIPE_Z_MAX, n),
    )


def pipeflow_factors(n):
    """Per-direction generators of the pipe diffusion-advection model.

    Radial: diffusion plus the 1/rho drift, zero-flux closure at both walls.
    Axial: diffusion minus velocity advection, zero value at the inlet and
    zero flux at the outlet.
    """
    if n < 8:
        raise ConfigurationError(f"pipe flow factors need n >= 8, got {n}")
    rho_grid, z_grid = pipeflow_grids(n)
    alpha = _PIPE_DIFFUSIVITY

    d2_rho = diff_matrix(rho_grid, 2, 2, NEUMANN_BC)
    d1_rho = diff_matrix(rho_grid, 1, 2, NEUMANN_BC)
    a_rho = alpha * (d2_rho + (1.0 / rho_grid.points)[:, None] * d1_rho)

    bc_z = BoundaryCondition(DIRICHLET_ZERO, NEUMANN_ZERO)
    d2_z = diff_matrix(z_grid, 2, 2, bc_z)
    d1_z = diff_matrix(z_grid, 1, 2, bc_z)
    a_z = alpha * d2_z - pipeflow_velocity(z_grid.points)[:, None] * d1_z

    return KroneckerOp((a_rho, a_z))


def trapezoid_weights(points):
    """Trapezoidal quadrature weights of a strictly increasing grid."""
    pts = np.asarray(points, dtype=float)
    gaps = np.diff(pts)
    if pts.size < 2 or not np.all(gaps > 0):
        raise InvalidGridError("trapezoidal weights need a strictly increasing grid")
    w = np.empty(pts.size)
    w[0] = gaps[0] / 2
    w[-1] = gaps[-1] / 2
    w[1:-1] = (gaps[:-1] + gaps[1:]) / 2
    return w


def gpe_weighted_factors(grids):
    """Symmetrized half-Laplacian factors plus quadrature weights per direction.

    For each grid the raw zero-flux second-derivative matrix D2 is
    conjugated with the square root of the diagonal trapezoidal weight
    matrix, ``W^(1/2) (D2/2) W^(-1/2)``.  The raw matrix is self-adjoint with
    respect to those weights, so the returned factor is symmetric up to
    rounding; its spectrum equals the raw one.  The weights are returned for
    norms and for undoing the variable change in pointwise terms.
    """
    factors = []
    weights = []
    for grid in grids:
        raw = diff_matrix(grid, 2, 2, NEUMANN_BC)
        w = trapezoid_weights(grid.points)
        sqrt_w = np.sqrt(w)
        factors.append(sqrt_w[:, None] * (0.5 * raw) / sqrt_w[None, :])
        weights.append(w)
    return KroneckerOp(tuple(factors)), weights
