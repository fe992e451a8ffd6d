"""Pseudo-Gaussian model parameters, coefficients and potentials.

A model (lam, mu)^r is the dimensionless potential

    W(xi) = (lam + sum_{k=1..r} C_k xi^(2k)) * exp(-mu xi^2)

with the C_k chosen so that W(xi) = lam + xi^2 + O(xi^(2r+2)) near the
origin.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = [
    "ModelParams",
    "PhysicalScales",
    "compute_coefficients",
    "potential_dimensionless",
    "potential_physical",
    "taylor_remainder",
    "potential_minimum",
]

# exp(-t) underflows to exactly 0 past ~745.1; beyond this the potential is 0
_EXP_UNDERFLOW = 745.0


@dataclass(frozen=True)
class ModelParams:
    """Parameter triple (lam, mu)^r identifying one pseudo-Gaussian model.

    Parameters
    ----------
    lam : float
        Value of the potential at the origin; negative values give wells,
        nonnegative values barriers.
    mu : float
        Gaussian decay rate, strictly positive.
    order_r : int
        Order of the polynomial prefactor; 0 is the plain Gaussian
        ``lam * exp(-mu xi^2)``.
    """

    lam: float
    mu: float
    order_r: int

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "order_r", int(self.order_r))
        if not math.isfinite(self.lam):
            raise ValueError(f"lam must be finite, got {self.lam}")
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise ValueError(f"mu must be finite and > 0, got {self.mu}")
        if self.order_r < 0:
            raise ValueError(f"order_r must be >= 0, got {self.order_r}")


@dataclass(frozen=True)
class PhysicalScales:
    """Energy/length scales tying the dimensionless model to physical units.

    All five fields are stored; they must satisfy epsilon = hbar*omega and
    length_a = hbar / sqrt(mass*epsilon) to rounding.
    """

    epsilon: float
    length_a: float
    mass: float
    omega: float
    hbar: float

    def __post_init__(self):
        for name in ("epsilon", "length_a", "mass", "omega", "hbar"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        if not math.isclose(self.epsilon, self.hbar * self.omega, rel_tol=1e-12):
            raise ValueError("inconsistent scales: epsilon != hbar*omega")
        a = self.hbar / math.sqrt(self.mass * self.epsilon)
        if not math.isclose(self.length_a, a, rel_tol=1e-12):
            raise ValueError("inconsistent scales: length_a != hbar/sqrt(mass*epsilon)")

    @classmethod
    def from_mass_omega(cls, mass: float, omega: float, hbar: float = 1.0) -> "PhysicalScales":
        epsilon = hbar * omega
        return cls(epsilon, hbar / math.sqrt(mass * epsilon), mass, omega, hbar)

    @classmethod
    def from_epsilon(cls, epsilon: float, mass: float = 1.0, hbar: float = 1.0) -> "PhysicalScales":
        """Scales from the energy quantum alone; mass/hbar default to 1."""
        omega = epsilon / hbar
        return cls(epsilon, hbar / math.sqrt(mass * epsilon), mass, omega, hbar)


def compute_coefficients(params: ModelParams) -> np.ndarray:
    """Prefactor coefficients C_k = (lam*mu + k) mu^(k-1) / k!, k = 1..r.

    Returns an array of length ``params.order_r`` (empty for order 0).
    """
    r = params.order_r
    out = np.empty(r)
    t = 1.0  # mu^(k-1)/k! built iteratively to avoid factorial overflow
    for k in range(1, r + 1):
        out[k - 1] = (params.lam * params.mu + k) * t
        t *= params.mu / (k + 1)
    return out


def _prefactor(params: ModelParams, s: np.ndarray) -> np.ndarray:
    """Polynomial lam + sum C_k s^k by Horner in s = xi^2."""
    C = compute_coefficients(params)
    pref = np.zeros_like(s)
    for k in range(params.order_r, 0, -1):
        pref = (pref + C[k - 1]) * s
    return pref + params.lam


def potential_dimensionless(params: ModelParams, xi) -> np.ndarray | float:
    """Evaluate W(xi); accepts scalars or arrays.

    The prefactor and the Gaussian are evaluated separately and the product
    is forced to 0 wherever exp(-mu xi^2) underflows, so large arguments
    return 0.0 rather than NaN.
    """
    arr = np.asarray(xi, dtype=float)
    # xi^2 may hit inf (masked to 0) and exp may gradually underflow (by design)
    with np.errstate(over="ignore", under="ignore"):
        s = arr * arr
        t = params.mu * s
        out = np.zeros_like(arr)
        mask = t < _EXP_UNDERFLOW
        if mask.any():
            sm = s[mask] if arr.ndim else s
            out_m = _prefactor(params, sm) * np.exp(-(t[mask] if arr.ndim else t))
            if arr.ndim:
                out[mask] = out_m
            else:
                out = out_m
    if arr.ndim == 0:
        return float(out)
    return out


def potential_physical(params: ModelParams, scales: PhysicalScales, x) -> np.ndarray | float:
    """Physical potential V(x) = (epsilon/2) W(x/a)."""
    return 0.5 * scales.epsilon * potential_dimensionless(params, np.asarray(x, float) / scales.length_a)


def _tail_coefficients(params: ModelParams, m_max: int) -> np.ndarray:
    """Taylor coefficients w_m of W for m = 0..m_max (coefficient of xi^(2m)).

    w_m = sum_{k=0..min(m,r)} C_k (-mu)^(m-k) / (m-k)!  with C_0 = lam; by
    construction w_0 = lam, w_1 = 1 and w_2..w_r = 0.
    """
    r = params.order_r
    C = np.concatenate(([params.lam], compute_coefficients(params)))
    e = np.empty(m_max + 1)  # (-mu)^j / j!
    e[0] = 1.0
    for j in range(1, m_max + 1):
        e[j] = e[j - 1] * (-params.mu) / j
    w = np.zeros(m_max + 1)
    for m in range(m_max + 1):
        k_hi = min(m, r)
        w[m] = np.dot(C[: k_hi + 1], e[m - k_hi : m + 1][::-1])
    return w


def taylor_remainder(params: ModelParams, xi) -> np.ndarray | float:
    """Remainder R(xi) = W(xi) - lam - xi^2, of order O(xi^(2r+2)).

    For mu*xi^2 <= 1 the remainder is summed from the exact Taylor tail of
    W; the direct difference there loses all significant digits once r > 2
    because |R| falls below |lam|*eps.  For larger arguments the plain
    difference is accurate and is used instead.
    """
    arr = np.asarray(xi, dtype=float)
    s = arr * arr
    out = np.empty_like(arr)
    near = params.mu * s <= 1.0

    if near.any():
        r = params.order_r
        s_near = np.atleast_1d(s[near] if arr.ndim else s)
        # sum w_m s^m for m >= r+1; factorial decay makes ~80 terms plenty
        m_hi = r + 80
        w = _tail_coefficients(params, m_hi)
        acc = np.zeros_like(s_near)
        term = s_near ** (r + 1)
        for m in range(r + 1, m_hi + 1):
            acc += w[m] * term
            term *= s_near
        if arr.ndim:
            out[near] = acc
        else:
            out = acc[0]

    far = ~near
    if arr.ndim and far.any():
        out[far] = potential_dimensionless(params, arr[far]) - params.lam - s[far]
    elif not arr.ndim and not near:
        out = potential_dimensionless(params, float(arr)) - params.lam - float(s)

    if arr.ndim == 0:
        return float(out)
    return out


@lru_cache(maxsize=128)
def potential_minimum(params: ModelParams, samples: int = 4001) -> tuple[float, float]:
    """Numerical global minimum of W.

    Returns ``(w_min, xi_min)``.  W is even, so only xi >= 0 is scanned; a
    coarse grid bracket is refined by bounded scalar minimization.  For
    wells the minimum usually sits at the origin with w_min = lam, but this
    is not assumed.
    """
    # beyond mu*xi^2 ~ r + 50 every term of W has decayed away
    xi_hi = math.sqrt((params.order_r + 50.0) / params.mu)
    grid = np.linspace(0.0, xi_hi, samples)
    vals = potential_dimensionless(params, grid)
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, samples - 1)]
    res = minimize_scalar(
        lambda x: potential_dimensionless(params, float(x)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    w_res = float(res.fun)
    if w_res <= vals[i]:
        return w_res, float(res.x)
    return float(vals[i]), float(grid[i])
