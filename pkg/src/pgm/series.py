"""Generating-functional machinery in the harmonic-oscillator basis.

Matrix elements <m|X|n> of the model Hamiltonian are read off a truncated
bivariate power series Z(sigma, tau) via

    <m|X|n> = z[m][n] * sqrt(m! n! / 2^(m+n)),

so a (D x D) block only ever needs the series up to per-variable degree
D-1.  The mu-derivatives required by the polynomial-times-Gaussian part of
the potential are realized exactly with truncated Taylor (jet) arithmetic
in the mu direction.

Two assembly routes are provided.  The "literal" route multiplies the
reduced functional by exp(2*sigma*tau) as a final step; its convolution
alternates in sign and loses roughly (2/(2-2a))^((m+n)/2) digits with
a = mu/(mu+1), which is fatal in double precision for large mu and block
indices.  The default "factored" route expands

    exp(2 s t - a (s+t)^2) = exp(-a s^2) exp((2-2a) s t) exp(-a t^2)

whose coefficients combine with one sign per entry; it tracks a 60-digit
reference to ~1e-12 over the whole supported range.

All functions are pure; series objects are safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import SeriesDegreeError
from .model import ModelParams, compute_coefficients

__all__ = [
    "BivariateSeries",
    "MuJet",
    "FunctionalAssembly",
    "series_from_exp_bilinear",
    "series_exp_neg_a_square",
    "series_mul",
    "kinetic_functional",
    "gaussian_functional",
    "gaussian_functional_jet",
    "ho_functional",
    "assemble_Z",
    "extraction_factor",
    "extract_element",
    "highprec_block",
]

_LN2 = math.log(2.0)


# --------------------------------------------------------------------------
# jets: truncated Taylor expansions d[k] = f^(k)(mu)/k!
# --------------------------------------------------------------------------

def _jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: len(a)]


def _jet_power(g: np.ndarray, alpha: float) -> np.ndarray:
    """Jet of g**alpha via the standard recurrence; needs g[0] != 0."""
    if g[0] == 0.0:
        raise ValueError("jet power requires a nonzero leading coefficient")
    n = len(g)
    f = np.zeros(n)
    f[0] = g[0] ** alpha
    for k in range(1, n):
        s = 0.0
        for j in range(k):
            s += (alpha * (k - j) - j) * f[j] * g[k - j]
        f[k] = s / (k * g[0])
    return f


def _jet_exp(g: np.ndarray) -> np.ndarray:
    n = len(g)
    f = np.zeros(n)
    f[0] = math.exp(g[0])
    for k in range(1, n):
        s = 0.0
        for j in range(1, k + 1):
            s += j * g[j] * f[k - j]
        f[k] = s / k
    return f


class MuJet:
    """Truncated Taylor expansion in the mu direction.

    ``derivs[k]`` holds the k-th derivative divided by k!, so arithmetic on
    jets is plain truncated power-series arithmetic.
    """

    __slots__ = ("derivs",)

    def __init__(self, derivs):
        d = np.asarray(derivs, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise ValueError("derivs must be a nonempty 1-d array")
        self.derivs = d

    @classmethod
    def constant(cls, value: float, order: int) -> "MuJet":
        d = np.zeros(order + 1)
        d[0] = value
        return cls(d)

    @classmethod
    def variable(cls, value: float, order: int) -> "MuJet":
        """The identity function mu -> mu expanded at ``value``."""
        d = np.zeros(order + 1)
        d[0] = value
        if order >= 1:
            d[1] = 1.0
        return cls(d)

    @property
    def order(self) -> int:
        return self.derivs.size - 1

    @property
    def value(self) -> float:
        return float(self.derivs[0])

    def derivative(self, k: int) -> float:
        """k-th derivative of the represented function at the expansion point."""
        if not 0 <= k <= self.order:
            raise SeriesDegreeError(f"derivative order {k} exceeds jet order {self.order}")
        return float(self.derivs[k]) * math.factorial(k)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, MuJet):
            if other.order != self.order:
                raise ValueError("jet orders differ")
            return other.derivs
        d = np.zeros_like(self.derivs)
        d[0] = float(other)
        return d

    def __add__(self, other) -> "MuJet":
        return MuJet(self.derivs + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> "MuJet":
        return MuJet(self.derivs - self._coerce(other))

    def __rsub__(self, other) -> "MuJet":
        return MuJet(self._coerce(other) - self.derivs)

    def __neg__(self) -> "MuJet":
        return MuJet(-self.derivs)

    def __mul__(self, other) -> "MuJet":
        if isinstance(other, MuJet):
            if other.order != self.order:
                raise ValueError("jet orders differ")
            return MuJet(_jet_mul(self.derivs, other.derivs))
        return MuJet(self.derivs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "MuJet":
        if isinstance(other, MuJet):
            return self * other.power(-1.0)
        return MuJet(self.derivs / float(other))

    def power(self, alpha: float) -> "MuJet":
        return MuJet(_jet_power(self.derivs, alpha))

    def reciprocal(self) -> "MuJet":
        return self.power(-1.0)

    def rsqrt(self) -> "MuJet":
        return self.power(-0.5)

    def exp(self) -> "MuJet":
        return MuJet(_jet_exp(self.derivs))

    def __repr__(self) -> str:
        return f"MuJet({self.derivs!r})"


def _base_jets(mu: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Jets of (1+mu)^(-1/2) and a(mu) = mu/(1+mu) at ``mu``."""
    denom = np.zeros(order + 1)
    denom[0] = 1.0 + mu
    if order >= 1:
        denom[1] = 1.0
    u = _jet_power(denom, -0.5)
    t = np.zeros(order + 1)
    t[0] = mu
    if order >= 1:
        t[1] = 1.0
    a = _jet_mul(t, _jet_power(denom, -1.0))
    return u, a


# --------------------------------------------------------------------------
# truncated bivariate series
# --------------------------------------------------------------------------

class BivariateSeries:
    """Dense truncated power series sum_{i,j<=M} z[i][j] sigma^i tau^j."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        z = np.asarray(coeffs, dtype=float)
        if z.ndim != 2 or z.shape[0] != z.shape[1]:
            raise ValueError(f"coefficient table must be square, got shape {z.shape}")
        if not np.isfinite(z).all():
            raise ValueError("coefficient table contains non-finite entries")
        self.coeffs = z

    @classmethod
    def zero(cls, max_degree: int) -> "BivariateSeries":
        return cls(np.zeros((max_degree + 1, max_degree + 1)))

    @property
    def max_degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def __add__(self, other: "BivariateSeries") -> "BivariateSeries":
        self._check_degree(other)
        return BivariateSeries(self.coeffs + other.coeffs)

    def __sub__(self, other: "BivariateSeries") -> "BivariateSeries":
        self._check_degree(other)
        return BivariateSeries(self.coeffs - other.coeffs)

    def __mul__(self, other):
        if isinstance(other, BivariateSeries):
            return series_mul(self, other)
        return BivariateSeries(self.coeffs * float(other))

    __rmul__ = __mul__

    def _check_degree(self, other: "BivariateSeries") -> None:
        if other.max_degree != self.max_degree:
            raise ValueError(
                f"series degrees differ: {self.max_degree} vs {other.max_degree}"
            )

    def to_csv(self, path) -> None:
        """Debug dump: rows are sigma powers i, columns tau powers j."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            M = self.max_degree
            fh.write("i\\j," + ",".join(str(j) for j in range(M + 1)) + "\n")
            for i in range(M + 1):
                fh.write(str(i) + "," + ",".join(repr(float(v)) for v in self.coeffs[i]) + "\n")

    def __repr__(self) -> str:
        return f"BivariateSeries(max_degree={self.max_degree})"


def series_from_exp_bilinear(c: float, max_degree: int) -> BivariateSeries:
    """Series of exp(c*sigma*tau): z[n][n] = c^n/n!, zero elsewhere."""
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    z = np.zeros((max_degree + 1, max_degree + 1))
    v = 1.0
    for n in range(max_degree + 1):
        z[n, n] = v
        v *= c / (n + 1)
    return BivariateSeries(z)


def series_exp_neg_a_square(a: float, max_degree: int) -> BivariateSeries:
    """Series of exp(-a (sigma+tau)^2).

    z[i][j] = (-a)^p/p! * C(2p, i) with 2p = i+j; entries of odd total
    degree vanish identically.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    M = max_degree
    z = np.zeros((M + 1, M + 1))
    cp = 1.0  # (-a)^p / p!
    for p in range(0, M + 1):
        if p > 0:
            cp *= -a / p
        for i in range(max(0, 2 * p - M), min(2 * p, M) + 1):
            z[i, 2 * p - i] = cp * float(math.comb(2 * p, i))
    return BivariateSeries(z)


def series_mul(lhs: BivariateSeries, rhs: BivariateSeries) -> BivariateSeries:
    """Cauchy product truncated to the common per-variable degree.

    Every retained coefficient is exact (up to rounding): a product term
    can only land inside the window if both factor indices already lie in
    it, so truncation error is confined to discarded degrees.
    """
    lhs._check_degree(rhs)
    M = lhs.max_degree
    # drive the convolution from the sparser factor
    a, b = lhs.coeffs, rhs.coeffs
    if np.count_nonzero(b) > np.count_nonzero(a):
        a, b = b, a
    out = np.zeros_like(a)
    for i, j in np.argwhere(b):
        out[i:, j:] += b[i, j] * a[: M + 1 - i, : M + 1 - j]
    return BivariateSeries(out)


def _mul_exp_bilinear(z: np.ndarray, c: float) -> np.ndarray:
    """Multiply a raw coefficient table by the diagonal series exp(c s t)."""
    M = z.shape[0] - 1
    out = np.zeros_like(z)
    e = 1.0
    for d in range(M + 1):
        out[d:, d:] += e * z[: M + 1 - d, : M + 1 - d]
        e *= c / (d + 1)
    return out


def kinetic_functional(max_degree: int) -> BivariateSeries:
    """Series of the kinetic-term functional [1/2 - (sigma-tau)^2] exp(2 sigma tau)."""
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    M = max_degree
    E = series_from_exp_bilinear(2.0, M).coeffs
    K = 0.5 * E
    if M >= 2:
        K[2:, :] -= E[: M - 1, :]
        K[:, 2:] -= E[:, : M - 1]
    if M >= 1:
        K[1:, 1:] += 2.0 * E[:M, :M]
    return BivariateSeries(K)


def ho_functional(lam: float, max_degree: int) -> BivariateSeries:
    """Series of (1 + lam + 4 sigma tau) exp(2 sigma tau).

    Extraction over this series gives the exact harmonic-oscillator matrix
    (2n + lam + 1) delta_mn.
    """
    M = max_degree
    poly = BivariateSeries.zero(M)
    poly.coeffs[0, 0] = 1.0 + lam
    if M >= 1:
        poly.coeffs[1, 1] = 4.0
    return series_mul(poly, series_from_exp_bilinear(2.0, M))


# --------------------------------------------------------------------------
# Gaussian part and full assembly
# --------------------------------------------------------------------------

def _gaussian_jet_tensor(mu: float, order: int, max_degree: int) -> np.ndarray:
    """Jet components of the full Gaussian functional of exp(-mu xi^2).

    Returns ``G`` of shape (order+1, M+1, M+1) where ``G[k]`` is the k-th
    normalized mu-derivative of

        (1+mu)^(-1/2) exp(-a s^2) exp((2-2a) s t) exp(-a t^2),

    i.e. of the functional *including* the exp(2 s t) factor.  Each series
    entry receives contributions of one sign only, which is what keeps the
    default assembly well conditioned.
    """
    M = max_degree
    n = order + 1
    u, a = _base_jets(mu, order)
    c_quad = -a
    c_mix = -2.0 * a
    c_mix[0] += 2.0

    nq = M // 2 + 1
    P = np.zeros((nq, n))  # jets of (-a)^q / q!
    P[0, 0] = 1.0
    for q in range(1, nq):
        P[q] = _jet_mul(P[q - 1], c_quad) / q
    Q = np.zeros((M + 1, n))  # jets of (2-2a)^d / d!
    Q[0, 0] = 1.0
    for d in range(1, M + 1):
        Q[d] = _jet_mul(Q[d - 1], c_mix) / d

    U = np.zeros((n, nq, nq))
    for t1 in range(n):
        for t2 in range(n - t1):
            U[t1 + t2] += np.outer(P[:, t1], P[:, t2])

    S = np.zeros((n, M + 1, M + 1))
    for t3 in range(n):
        qcol = Q[:, t3]
        for tu in range(n - t3):
            Ut = U[tu]
            dst = S[t3 + tu]
            for d in range(M + 1):
                qv = qcol[d]
                if qv == 0.0:
                    continue
                m = (M - d) // 2 + 1
                dst[d : d + 2 * m : 2, d : d + 2 * m : 2] += qv * Ut[:m, :m]

    G = np.zeros_like(S)
    for t1 in range(n):
        if u[t1] == 0.0:
            continue
        for t2 in range(n - t1):
            G[t1 + t2] += u[t1] * S[t2]
    return G


def gaussian_functional(mu: float, max_degree: int) -> BivariateSeries:
    """Series of the generating functional of the unit Gaussian exp(-mu xi^2)."""
    if mu <= 0:
        raise ValueError("mu must be > 0")
    return BivariateSeries(_gaussian_jet_tensor(mu, 0, max_degree)[0])


def _operator_weights(params: ModelParams) -> np.ndarray:
    """Weights applying [lam + sum_k (-1)^k C_k d^k/dmu^k] to a jet.

    ``weights[k]`` multiplies the normalized jet component d[k]; the k!
    restores a true derivative from d[k] = f^(k)/k!.
    """
    r = params.order_r
    C = compute_coefficients(params)
    w = np.empty(r + 1)
    w[0] = params.lam
    fact = 1.0
    for k in range(1, r + 1):
        fact *= k
        w[k] = (-1.0) ** k * C[k - 1] * fact
    return w


def gaussian_functional_jet(params: ModelParams, max_degree: int) -> BivariateSeries:
    """Potential part of the reduced functional, without the exp(2 s t) factor.

    Applies the mu-derivative operator to the jet of
    (1+mu)^(-1/2) exp(-a (s+t)^2) coefficientwise over powers of (s+t)^2;
    derivatives act on the prefactor and on a = mu/(mu+1) alike.
    """
    M = max_degree
    if M < 0:
        raise ValueError("max_degree must be >= 0")
    r = params.order_r
    u, a = _base_jets(params.mu, r)
    wts = _operator_weights(params)
    z = np.zeros((M + 1, M + 1))
    Pp = np.zeros(r + 1)  # jet of (-a)^p / p!
    Pp[0] = 1.0
    for p in range(0, M + 1):
        if p > 0:
            Pp = _jet_mul(Pp, -a) / p
        val = float(np.dot(wts, _jet_mul(u, Pp)))
        for i in range(max(0, 2 * p - M), min(2 * p, M) + 1):
            z[i, 2 * p - i] = val * float(math.comb(2 * p, i))
    return BivariateSeries(z)


@dataclass(frozen=True)
class FunctionalAssembly:
    """Assembled series of the full model functional Z[N]."""

    params: ModelParams
    max_degree: int
    z_total: BivariateSeries
    method: str = "factored"


def assemble_Z(params: ModelParams, max_degree: int, method: str = "factored") -> FunctionalAssembly:
    """Assemble the functional of N = -d^2/dxi^2 + W(xi), truncated at ``max_degree``.

    method="factored" (default) evaluates the Gaussian part through the
    three-factor expansion with mu-jets per entry; method="literal" builds
    the reduced functional first and multiplies by exp(2 sigma tau) last.
    Both agree to rounding in exact arithmetic, but the literal route
    suffers catastrophic cancellation for large mu and indices and is kept
    for small blocks and cross-checks only.
    """
    M = max_degree
    if M < 1:
        raise ValueError("max_degree must be >= 1")
    if method == "factored":
        r = params.order_r
        G = _gaussian_jet_tensor(params.mu, r, M)
        zw = np.tensordot(_operator_weights(params), G, axes=(0, 0))
        z = kinetic_functional(M).coeffs + zw
    elif method == "literal":
        ztilde = gaussian_functional_jet(params, M).coeffs.copy()
        ztilde[0, 0] += 0.5
        if M >= 2:
            ztilde[2, 0] -= 1.0
            ztilde[0, 2] -= 1.0
        ztilde[1, 1] += 2.0
        z = _mul_exp_bilinear(ztilde, 2.0)
    else:
        raise ValueError(f"unknown assembly method: {method!r}")
    return FunctionalAssembly(params=params, max_degree=M, z_total=BivariateSeries(z), method=method)


# --------------------------------------------------------------------------
# coefficient extraction
# --------------------------------------------------------------------------

def extraction_factor(m, n):
    """sqrt(m! n! / 2^(m+n)) through log-gamma, broadcasting over arrays.

    Stays inside double range up to m = n ~ 190; the series coefficient it
    multiplies shrinks factorially, so the product is well scaled.
    """
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    return np.exp(0.5 * (gammaln(m + 1.0) + gammaln(n + 1.0)) - 0.5 * (m + n) * _LN2)


def extract_element(series: BivariateSeries, m: int, n: int) -> float:
    """Matrix element <m|X|n> encoded in the series of Z[X]."""
    M = series.max_degree
    if not (0 <= m <= M and 0 <= n <= M):
        raise SeriesDegreeError(
            f"element ({m},{n}) needs series degree >= {max(m, n)}, have {M}"
        )
    return float(series.coeffs[m, n] * extraction_factor(m, n))


# --------------------------------------------------------------------------
# high-precision reference (regression guard for extraction conditioning)
# --------------------------------------------------------------------------

def highprec_block(params: ModelParams, dim: int, dps: int = 50) -> np.ndarray:
    """Recompute a small block with mpmath along the literal route.

    Independent of the fast path in both grouping and precision; intended
    for dims up to ~16 where it stays cheap.
    """
    import mpmath as mp

    r = params.order_r
    M = dim - 1
    n = r + 1
    with mp.workdps(dps):
        lam, mu = mp.mpf(params.lam), mp.mpf(params.mu)

        def jmul(a, b):
            return [sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n)]

        def jpow(g, alpha):
            f = [g[0] ** alpha] + [mp.mpf(0)] * (n - 1)
            for k in range(1, n):
                s = mp.mpf(0)
                for j in range(k):
                    s += (alpha * (k - j) - j) * f[j] * g[k - j]
                f[k] = s / (k * g[0])
            return f

        pad = [mp.mpf(0)] * max(0, n - 2)
        denom = ([1 + mu, mp.mpf(1)] + pad)[:n]
        u = jpow(denom, mp.mpf("-0.5"))
        a = jmul(([mu, mp.mpf(1)] + pad)[:n], jpow(denom, mp.mpf(-1)))
        # (-1)^k C_k k! = (-1)^k (lam*mu + k) mu^(k-1)
        wts = [lam] + [(-1) ** k * (lam * mu + k) * mu ** (k - 1) for k in range(1, r + 1)]
        z = [[mp.mpf(0)] * (M + 1) for _ in range(M + 1)]
        Pp = [mp.mpf(1)] + [mp.mpf(0)] * (n - 1)
        for p in range(M + 1):
            if p > 0:
                Pp = [c / p for c in jmul(Pp, [-c for c in a])]
            cp = jmul(u, Pp)
            val = sum(w * c for w, c in zip(wts, cp))
            for i in range(max(0, 2 * p - M), min(2 * p, M) + 1):
                z[i][2 * p - i] += val * mp.binomial(2 * p, i)
        z[0][0] += mp.mpf("0.5")
        if M >= 2:
            z[2][0] -= 1
            z[0][2] -= 1
        z[1][1] += 2
        out = [[mp.mpf(0)] * (M + 1) for _ in range(M + 1)]
        for d in range(M + 1):
            e = mp.mpf(2) ** d / mp.factorial(d)
            for i in range(M + 1 - d):
                for j in range(M + 1 - d):
                    out[i + d][j + d] += e * z[i][j]
        block = np.zeros((dim, dim))
        for mm in range(dim):
            for nn in range(dim):
                fac = mp.sqrt(mp.factorial(mm) * mp.factorial(nn) / mp.mpf(2) ** (mm + nn))
                block[mm, nn] = float(out[mm][nn] * fac)
        return block
