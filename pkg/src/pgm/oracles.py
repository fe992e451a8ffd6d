"""Independent ground truth: Hermite functions, quadrature, finite differences.

Nothing here touches the generating-functional code path; these routines
exist so the series engine can be checked against machinery that shares no
formulas with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import QuadratureConvergenceError
from .model import ModelParams, potential_dimensionless

__all__ = [
    "hermite_u",
    "hermite_u_table",
    "QuadratureGrid",
    "gauss_hermite_grid",
    "quad_element_potential",
    "quad_potential_block",
    "kinetic_element_exact",
    "kinetic_matrix_exact",
    "FiniteDifferenceGrid",
    "fd_bound_states",
    "fd_bound_states_refined",
]

_PI_QUARTER = math.pi ** -0.25


def hermite_u_table(xi, n_max: int) -> np.ndarray:
    """Oscillator eigenfunctions u_0..u_n_max at the points ``xi``.

    Uses the weighted three-term recurrence

        u_{n+1} = sqrt(2/(n+1)) xi u_n - sqrt(n/(n+1)) u_{n-1},

    which keeps every value bounded (no polynomial overflow even for
    n ~ 200, |xi| ~ 20).  Returns shape ``(len(xi), n_max+1)``.
    """
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    U = np.zeros((x.size, n_max + 1))
    U[:, 0] = _PI_QUARTER * np.exp(-0.5 * x * x)
    if n_max >= 1:
        U[:, 1] = math.sqrt(2.0) * x * U[:, 0]
    for n in range(2, n_max + 1):
        U[:, n] = math.sqrt(2.0 / n) * x * U[:, n - 1] - math.sqrt((n - 1) / n) * U[:, n - 2]
    return U


def hermite_u(n: int, xi):
    """Single eigenfunction u_n(xi); scalar in, scalar out."""
    if n < 0:
        raise ValueError("n must be >= 0")
    arr = np.asarray(xi, dtype=float)
    vals = hermite_u_table(arr, n)[:, n]
    if arr.ndim == 0:
        return float(vals[0])
    return vals


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and total weights t_i with  integral f = sum_i t_i f(x_i).

    The weights absorb exp(+x_i^2), so the rule applies to the plain
    integrand; it is exact (to rounding) for poly(deg <= 2Q-1) * exp(-x^2).
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "gauss-hermite"

    @property
    def size(self) -> int:
        return self.nodes.size


@lru_cache(maxsize=32)
def gauss_hermite_grid(size: int) -> QuadratureGrid:
    """Gauss-Hermite rule of the given size.

    Nodes come from the symmetric tridiagonal Jacobi matrix; the total
    weights from the Christoffel identity w_i e^{x_i^2} = 1 / sum_k u_k(x_i)^2.
    Raw Hermite weights underflow past Q ~ 360, this form never does.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    off = np.sqrt(np.arange(1, size) / 2.0)
    nodes = eigh_tridiagonal(np.zeros(size), off, eigvals_only=True)
    U = hermite_u_table(nodes, size - 1)
    weights = 1.0 / np.sum(U * U, axis=1)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureGrid(nodes=nodes, weights=weights)


def _potential_block_on_grid(params: ModelParams, dim: int, grid: QuadratureGrid) -> np.ndarray:
    U = hermite_u_table(grid.nodes, dim - 1)
    w = potential_dimensionless(params, grid.nodes)
    return U.T @ (U * (grid.weights * w)[:, None])


def quad_potential_block(
    params: ModelParams,
    dim: int,
    start_size: int = 128,
    tol: float = 1e-11,
    max_size: int = 4096,
) -> np.ndarray:
    """All potential elements <m|W|n> for m, n < dim by self-refining quadrature.

    The grid is doubled until two successive rules agree entrywise to
    ``tol * max(1, |entry|)``; failure to stabilize raises.
    """
    size = max(start_size, 2 * dim)
    prev = _potential_block_on_grid(params, dim, gauss_hermite_grid(size))
    while size <= max_size:
        size *= 2
        cur = _potential_block_on_grid(params, dim, gauss_hermite_grid(size))
        if np.all(np.abs(cur - prev) <= tol * np.maximum(1.0, np.abs(cur))):
            return cur
        prev = cur
    raise QuadratureConvergenceError(
        f"quadrature did not stabilize to {tol:g} at size {max_size} "
        f"for params {params}, dim {dim}"
    )


def quad_element_potential(
    params: ModelParams,
    m: int,
    n: int,
    grid: QuadratureGrid | None = None,
    tol: float = 1e-11,
    max_size: int = 4096,
) -> float:
    """One element <m|W|n> by Gauss-Hermite quadrature.

    With an explicit ``grid`` the result is checked against the doubled
    grid and the refined value returned; a mismatch beyond ``tol`` raises
    QuadratureConvergenceError (grid too small).  Without a grid the rule
    is auto-refined from 128 points.
    """
    if m < 0 or n < 0:
        raise ValueError("m, n must be >= 0")

    def element(size: int) -> float:
        g = gauss_hermite_grid(size)
        U = hermite_u_table(g.nodes, max(m, n))
        w = potential_dimensionless(params, g.nodes)
        return float(np.sum(g.weights * w * U[:, m] * U[:, n]))

    if grid is not None:
        coarse = element(grid.size)
        fine = element(2 * grid.size)
        if abs(fine - coarse) > tol * max(1.0, abs(fine)):
            raise QuadratureConvergenceError(
                f"grid of size {grid.size} too small for element ({m},{n}): "
                f"doubling moved it by {abs(fine - coarse):.3e}"
            )
        return fine

    size = 128
    prev = element(size)
    while size <= max_size:
        size *= 2
        cur = element(size)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise QuadratureConvergenceError(
        f"element ({m},{n}) did not stabilize to {tol:g} at size {max_size}"
    )


def kinetic_element_exact(m: int, n: int) -> float:
    """Closed-form <m|-d^2/dxi^2|n> in the oscillator basis."""
    if m < 0 or n < 0:
        raise ValueError("m, n must be >= 0")
    if m == n:
        return n + 0.5
    if m == n + 2:
        return -math.sqrt((n + 1) * (n + 2)) / 2.0
    if m == n - 2:
        return -math.sqrt(n * (n - 1)) / 2.0
    return 0.0


def kinetic_matrix_exact(dim: int) -> np.ndarray:
    K = np.zeros((dim, dim))
    n = np.arange(dim)
    K[n, n] = n + 0.5
    for m in range(2, dim):
        K[m, m - 2] = K[m - 2, m] = kinetic_element_exact(m, m - 2)
    return K


@dataclass(frozen=True)
class FiniteDifferenceGrid:
    """Uniform Dirichlet grid on [-half_width, half_width] with ``points`` nodes."""

    half_width: float
    points: int

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be > 0")
        if self.points < 3:
            raise ValueError("points must be >= 3")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.points - 1)


def fd_bound_states(
    params: ModelParams,
    grid: FiniteDifferenceGrid | None = None,
    threshold: float = 1e-6,
) -> np.ndarray:
    """Bound eigenvalues of -d^2/dxi^2 + W on a finite-difference grid.

    Second-order central differences with Dirichlet walls; eigenvalues in
    [min W - 1, -threshold) are extracted by bisection on the symmetric
    tridiagonal matrix (LAPACK value-range selection).  The list may be
    empty; values sit above the true ones by O(h^2).
    """
    if grid is None:
        grid = FiniteDifferenceGrid(12.0, 4001)
    x = np.linspace(-grid.half_width, grid.half_width, grid.points)
    w = potential_dimensionless(params, x[1:-1])
    h2 = grid.spacing ** 2
    diag = 2.0 / h2 + w
    off = np.full(grid.points - 3, -1.0 / h2)
    lo = float(w.min()) - 1.0
    if lo >= -threshold:
        return np.empty(0)
    vals = eigh_tridiagonal(
        diag, off, select="v", select_range=(lo, -threshold), eigvals_only=True
    )
    return np.sort(vals)


def fd_bound_states_refined(
    params: ModelParams,
    half_width: float = 24.0,
    points: int = 8001,
    threshold: float = 1e-6,
) -> np.ndarray:
    """Richardson-extrapolated bound states (h^2 error removed).

    Solves with ``points`` and ``2*points - 1`` nodes at fixed box size and
    combines (4*fine - coarse)/3.  If the two grids disagree on the level
    count the finer list is returned as-is.
    """
    coarse = fd_bound_states(params, FiniteDifferenceGrid(half_width, points), threshold)
    fine = fd_bound_states(params, FiniteDifferenceGrid(half_width, 2 * points - 1), threshold)
    if coarse.size != fine.size:
        return fine
    return (4.0 * fine - coarse) / 3.0
