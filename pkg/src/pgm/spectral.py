"""Truncated-block spectra: assembly, diagonalization, classification, scans.

Diagonalizing the leading D x D block of the dimensionless Hamiltonian
matrix plays the role of a perturbation procedure; accuracy improves as D
grows.  Eigenvalues nu convert to energies via E = epsilon * nu / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EigenSolveError, NumericalError
from .model import ModelParams, PhysicalScales, potential_minimum
from .series import assemble_Z, extraction_factor

__all__ = [
    "MatrixBlock",
    "SpectrumResult",
    "LevelTrack",
    "ConvergenceReport",
    "assemble_matrix",
    "eigen_sym",
    "classify_bound",
    "convergence_scan",
    "inflexion_scan",
    "BOUND_THRESHOLD",
]

# eigenvalues above this (in nu units) are treated as discretized continuum
BOUND_THRESHOLD = 1e-6

_SYMMETRY_LIMIT = 1e-10


@dataclass(frozen=True)
class MatrixBlock:
    """Symmetric truncation of the dimensionless Hamiltonian matrix."""

    dim: int
    entries: np.ndarray
    params: ModelParams
    symmetry_defect: float
    degree: int  # series truncation degree used for assembly


def assemble_matrix(params: ModelParams, dim: int, method: str = "factored") -> MatrixBlock:
    """Entries <m|N|n> for m, n < dim, symmetrized after extraction.

    The series only needs per-variable degree dim-1 because extraction for
    (m, n) reads a single coefficient.  The asymmetry before symmetrization
    is recorded; anything above 1e-10 of the entry scale means the
    assembly itself went wrong and raises.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    factors = extraction_factor(np.arange(dim)[:, None], np.arange(dim)[None, :])
    if not np.isfinite(factors).all():
        raise NumericalError(
            f"extraction factors overflow double precision at dim {dim}; "
            "blocks beyond ~190 are not representable"
        )
    assembly = assemble_Z(params, dim - 1, method=method)
    raw = assembly.z_total.coeffs[:dim, :dim] * factors
    defect = float(np.max(np.abs(raw - raw.T)))
    scale = float(np.max(np.abs(raw)))
    if scale > 0.0 and defect > _SYMMETRY_LIMIT * scale:
        raise NumericalError(
            f"assembled block asymmetric: defect {defect:.3e} vs scale {scale:.3e}"
        )
    return MatrixBlock(
        dim=dim,
        entries=0.5 * (raw + raw.T),
        params=params,
        symmetry_defect=defect,
        degree=dim - 1,
    )


def eigen_sym(block: MatrixBlock, vectors: bool = False):
    """All eigenvalues of the block, ascending; optionally eigenvectors.

    A non-converging LAPACK iteration surfaces as EigenSolveError rather
    than silently bad numbers.
    """
    try:
        if vectors:
            vals, vecs = np.linalg.eigh(block.entries)
            return vals, vecs
        return np.linalg.eigvalsh(block.entries)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveError(f"symmetric eigensolver failed: {exc}") from exc


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues of a truncated block split into bound levels and artifacts.

    Bound levels satisfy min W - tol <= nu < -threshold; everything at or
    above the continuum onset (nu = 0) is a truncation artifact, not a
    physical prediction.  Energies are attached when scales are given.
    """

    nu_values: np.ndarray
    bound: np.ndarray
    min_w: float
    params: ModelParams
    scales: PhysicalScales | None = None
    continuum_threshold: float = 0.0

    @property
    def lambda_floor(self) -> float:
        """The paper's well floor in nu units (W at the origin)."""
        return self.params.lam

    @property
    def energies(self) -> np.ndarray | None:
        if self.scales is None:
            return None
        return 0.5 * self.scales.epsilon * self.nu_values

    @property
    def bound_energies(self) -> np.ndarray | None:
        if self.scales is None:
            return None
        return 0.5 * self.scales.epsilon * self.bound

    @property
    def floor_energy(self) -> float | None:
        if self.scales is None:
            return None
        return 0.5 * self.scales.epsilon * self.params.lam

    @property
    def numeric_floor_energy(self) -> float | None:
        if self.scales is None:
            return None
        return 0.5 * self.scales.epsilon * self.min_w


def classify_bound(
    nu_values: np.ndarray,
    params: ModelParams,
    scales: PhysicalScales | None = None,
    threshold: float = BOUND_THRESHOLD,
    floor_tol: float = 1e-8,
) -> SpectrumResult:
    """Split sorted eigenvalues into bound levels and continuum artifacts.

    The well floor is the numerically minimized W, not the nominal lam;
    both are reported on the result.
    """
    nu = np.asarray(nu_values, dtype=float)
    min_w, _ = potential_minimum(params)
    bound = nu[(nu < -threshold) & (nu >= min_w - floor_tol)]
    return SpectrumResult(
        nu_values=nu, bound=bound, min_w=min_w, params=params, scales=scales
    )


@dataclass
class LevelTrack:
    """One bound level followed across block dimensions."""

    values: list[float]          # nu at each dim, NaN where absent
    appeared_at: int             # index into dims where first seen

    def drifts(self) -> list[float]:
        out = []
        for a, b in zip(self.values, self.values[1:]):
            out.append(abs(b - a) if not (math.isnan(a) or math.isnan(b)) else math.nan)
        return out


@dataclass
class ConvergenceReport:
    """Bound-level positions across a schedule of block dimensions."""

    dims: list[int]
    tracks: list[LevelTrack]
    tol: float
    params: ModelParams
    truncated: bool = False      # some dim was too small to hold every level
    converged: list[bool] = field(default_factory=list)


def _match_levels(prev: list[float], new: np.ndarray) -> dict[int, int]:
    """Greedy nearest matching of new levels onto previous track values.

    A pairing is rejected when the gap exceeds half the local spacing of
    the previous levels, so continuum artifacts drifting through cannot
    steal a track.
    """
    pairs = []
    spacing = np.inf
    if len(prev) > 1:
        spacing = float(np.min(np.diff(sorted(prev))))
    for ti, pv in enumerate(prev):
        for ni, nv in enumerate(new):
            gap = abs(nv - pv)
            if gap <= 0.5 * spacing:
                pairs.append((gap, ti, ni))
    pairs.sort()
    used_t, used_n, out = set(), set(), {}
    for _, ti, ni in pairs:
        if ti in used_t or ni in used_n:
            continue
        used_t.add(ti)
        used_n.add(ni)
        out[ti] = ni
    return out


def convergence_scan(
    params: ModelParams,
    dims,
    tol: float = 1e-6,
    threshold: float = BOUND_THRESHOLD,
    method: str = "factored",
) -> ConvergenceReport:
    """Track bound levels over an ascending schedule of block dimensions.

    Levels are matched dimension-to-dimension by nearest value; levels
    that only become resolvable at larger D start new tracks.  A track is
    flagged converged when its last two drifts both fall below ``tol``.
    Variational monotonicity is visible in the data but not asserted.
    """
    dims = [int(d) for d in dims]
    if len(dims) < 2 or any(b <= a for a, b in zip(dims, dims[1:])):
        raise ValueError("dims must be ascending with at least two entries")
    min_w, _ = potential_minimum(params)
    bound_sets = []
    for d in dims:
        nu = eigen_sym(assemble_matrix(params, d, method=method))
        bound_sets.append(nu[(nu < -threshold) & (nu >= min_w - 1e-8)])

    tracks: list[LevelTrack] = []
    alive: list[int] = []
    for i, levels in enumerate(bound_sets):
        if i == 0:
            for v in levels:
                tracks.append(LevelTrack(values=[float(v)], appeared_at=0))
            alive = list(range(len(tracks)))
        else:
            prev_vals = [tracks[t].values[-1] for t in alive]
            match = _match_levels(prev_vals, levels)
            matched_new = set(match.values())
            next_alive = []
            for pos, t in enumerate(alive):
                if pos in match:
                    tracks[t].values.append(float(levels[match[pos]]))
                    next_alive.append(t)
                else:
                    tracks[t].values.append(math.nan)
            for ni, v in enumerate(levels):
                if ni not in matched_new:
                    tracks.append(
                        LevelTrack(values=[math.nan] * i + [float(v)], appeared_at=i)
                    )
                    next_alive.append(len(tracks) - 1)
            alive = next_alive
    tracks.sort(key=lambda t: next(v for v in t.values if not math.isnan(v)))

    truncated = any(len(b) < len(bound_sets[-1]) for b in bound_sets)
    converged = []
    for t in tracks:
        d = t.drifts()
        ok = len(d) >= 2 and not math.isnan(d[-1]) and not math.isnan(d[-2])
        converged.append(bool(ok and d[-1] < tol and d[-2] < tol))
    return ConvergenceReport(
        dims=dims, tracks=tracks, tol=tol, params=params,
        truncated=truncated, converged=converged,
    )


def inflexion_scan(nu_values) -> int | None:
    """Locate a curvature flip of nu as a function of the level index.

    Computes second differences d2(n) = nu(n+1) - 2 nu(n) + nu(n-1) and
    looks for adjacent d2 of strictly opposite sign; among such positions
    the one nearest the continuum onset (the eigenvalue closest to 0) is
    chosen, ties going to the smaller index.  Returns the level index n of
    the first member of the flipping pair, or None when the curvature
    never changes sign (a linear ladder gives d2 = 0 throughout, which
    counts as no change).  Exploratory diagnostic, not a hard claim.
    """
    nu = np.asarray(nu_values, dtype=float)
    if nu.size < 4:
        raise ValueError("need at least 4 eigenvalues")
    d2 = nu[2:] - 2.0 * nu[1:-1] + nu[:-2]  # d2[k] is curvature at level k+1
    cands = [k + 1 for k in range(d2.size - 1) if d2[k] * d2[k + 1] < 0.0]
    if not cands:
        return None
    boundary = int(np.argmin(np.abs(nu)))
    return min(cands, key=lambda n: (abs(n - boundary), n))
