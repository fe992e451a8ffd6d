"""Tests for model parameters, coefficients and potential evaluation."""

import math

import numpy as np
import pytest

from pgm import (
    ModelParams,
    PhysicalScales,
    compute_coefficients,
    potential_dimensionless,
    potential_minimum,
    potential_physical,
    taylor_remainder,
)


class TestModelParams:
    def test_rejects_nonpositive_mu(self):
        with pytest.raises(ValueError):
            ModelParams(1.0, 0.0, 1)
        with pytest.raises(ValueError):
            ModelParams(1.0, -0.5, 1)

    def test_rejects_negative_order(self):
        with pytest.raises(ValueError):
            ModelParams(1.0, 1.0, -1)

    def test_rejects_nonfinite_lambda(self):
        with pytest.raises(ValueError):
            ModelParams(math.inf, 1.0, 1)
        with pytest.raises(ValueError):
            ModelParams(math.nan, 1.0, 1)

    def test_order_zero_is_pure_gaussian(self):
        p = ModelParams(-3.0, 0.5, 0)
        assert compute_coefficients(p).size == 0
        xi = 1.7
        assert potential_dimensionless(p, xi) == pytest.approx(-3.0 * math.exp(-0.5 * xi**2), rel=1e-15)


class TestCoefficients:
    def test_well_r2(self):
        C = compute_coefficients(ModelParams(-8.0, 0.2, 2))
        assert C == pytest.approx([-0.6, 0.04], abs=1e-15)

    def test_unit_case(self):
        C = compute_coefficients(ModelParams(0.0, 1.0, 1))
        assert C == pytest.approx([1.0], abs=0)

    def test_barrier_r3(self):
        C = compute_coefficients(ModelParams(8.0, 0.2, 3))
        assert C == pytest.approx([2.6, 0.36, (1.6 + 3.0) * 0.04 / 6.0], rel=1e-14)

    def test_length_matches_order(self):
        for r in range(7):
            assert compute_coefficients(ModelParams(2.0, 0.3, r)).size == r

    def test_closed_form_random_params(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            lam = rng.uniform(-10, 10)
            mu = rng.uniform(0.05, 3.0)
            r = int(rng.integers(1, 9))
            C = compute_coefficients(ModelParams(lam, mu, r))
            expected = [(lam * mu + k) * mu ** (k - 1) / math.factorial(k) for k in range(1, r + 1)]
            assert C == pytest.approx(expected, rel=1e-13)


class TestPotential:
    def test_origin_equals_lambda_exactly(self):
        for lam in (-8.0, 0.0, 3.5, 8.0):
            assert potential_dimensionless(ModelParams(lam, 0.2, 1), 0.0) == lam

    def test_gaussian_point(self):
        # (0 + 1*xi^2) e^{-xi^2} at xi=1
        assert potential_dimensionless(ModelParams(0.0, 1.0, 1), 1.0) == pytest.approx(
            math.exp(-1.0), rel=1e-15
        )

    def test_parity_random(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            p = ModelParams(rng.uniform(-9, 9), rng.uniform(0.05, 2.0), int(rng.integers(0, 7)))
            xi = rng.uniform(0, 8, size=64)
            np.testing.assert_array_equal(
                potential_dimensionless(p, xi), potential_dimensionless(p, -xi)
            )

    def test_decay_bound(self):
        p = ModelParams(-8.0, 0.2, 4)
        C = np.abs(compute_coefficients(p))
        xi = np.linspace(0.0, 30.0, 301)
        W = np.abs(potential_dimensionless(p, xi))
        env = (abs(p.lam) + sum(c * xi ** (2 * k) for k, c in enumerate(C, start=1))) * np.exp(
            -p.mu * xi**2
        )
        assert np.all(W <= env * (1 + 1e-12) + 1e-300)

    def test_overflow_safe_large_argument(self):
        p = ModelParams(-8.0, 0.2, 3)
        with np.errstate(all="raise"):
            vals = potential_dimensionless(p, np.array([60.0, 1e3, 1e160, 1e308]))
        assert not np.isnan(vals).any()
        assert vals[2] == 0.0 and vals[3] == 0.0
        assert potential_dimensionless(p, 1e308) == 0.0

    def test_scalar_in_scalar_out(self):
        v = potential_dimensionless(ModelParams(1.0, 1.0, 1), 0.3)
        assert isinstance(v, float)


class TestPhysicalScales:
    def test_consistency_from_constructors(self):
        s = PhysicalScales.from_mass_omega(mass=2.0, omega=3.0, hbar=1.5)
        assert s.epsilon == pytest.approx(4.5, rel=1e-15)
        assert s.length_a == pytest.approx(1.5 / math.sqrt(2.0 * 4.5), rel=1e-15)
        s2 = PhysicalScales.from_epsilon(4.5, mass=2.0, hbar=1.5)
        assert s2.omega == pytest.approx(3.0, rel=1e-15)
        assert s2.length_a == pytest.approx(s.length_a, rel=1e-15)

    def test_inconsistent_fields_rejected(self):
        with pytest.raises(ValueError):
            PhysicalScales(epsilon=1.0, length_a=1.0, mass=1.0, omega=2.0, hbar=1.0)

    def test_physical_potential_floor(self):
        p = ModelParams(-8.0, 0.2, 1)
        s = PhysicalScales.from_epsilon(2.0)
        assert potential_physical(p, s, 0.0) == pytest.approx(-8.0, rel=1e-15)
        # arbitrary lam: V(0) = epsilon*lam/2
        p2 = ModelParams(3.0, 0.5, 2)
        s2 = PhysicalScales.from_epsilon(0.4)
        assert potential_physical(p2, s2, 0.0) == pytest.approx(0.2 * 3.0, rel=1e-15)

    def test_gaussian_tail_negligible(self):
        p = ModelParams(-8.0, 0.2, 1)
        s = PhysicalScales.from_epsilon(1.0)
        x = 50.0 * s.length_a
        assert abs(potential_physical(p, s, x)) < 1e-200 * s.epsilon


def _remainder_oracle_lam1_mu1_r1(s: float) -> float:
    """Taylor tail of (1 + 2 s) e^{-s} past the s term, summed directly."""
    total = 0.0
    for m in range(2, 60):
        c = (-1.0) ** m / math.factorial(m) + 2.0 * (-1.0) ** (m - 1) / math.factorial(m - 1)
        total += c * s**m
    return total


class TestTaylorRemainder:
    def test_zero_at_origin(self):
        assert taylor_remainder(ModelParams(-8.0, 0.2, 3), 0.0) == 0.0

    def test_leading_coefficient_lam1_mu1_r1(self):
        p = ModelParams(1.0, 1.0, 1)
        for xi in (0.2, 0.1, 0.05, 0.02):
            assert taylor_remainder(p, xi) == pytest.approx(
                _remainder_oracle_lam1_mu1_r1(xi * xi), rel=1e-12
            )
        # R/xi^4 -> -3/2 as xi -> 0
        xi = 1e-3
        assert taylor_remainder(p, xi) / xi**4 == pytest.approx(-1.5, rel=1e-5)

    def test_matches_direct_difference_where_benign(self):
        # away from the cancellation regime both evaluations must agree
        p = ModelParams(-8.0, 0.2, 2)
        for xi in (1.5, 2.0, 4.0, 9.0):
            direct = potential_dimensionless(p, xi) - p.lam - xi * xi
            assert taylor_remainder(p, xi) == pytest.approx(direct, rel=1e-10)

    @pytest.mark.parametrize("lam", [-8.0, 8.0])
    @pytest.mark.parametrize("r", [1, 2, 3, 4, 5, 6])
    def test_loglog_slope_is_2r_plus_2(self, lam, r):
        p = ModelParams(lam, 0.2, r)
        xi = np.logspace(-2, -1, 25)
        R = np.abs(taylor_remainder(p, xi))
        slope = np.polyfit(np.log(xi), np.log(R), 1)[0]
        assert slope == pytest.approx(2 * r + 2, abs=0.1)

    def test_r3_slope_quoted_window(self):
        p = ModelParams(-8.0, 0.2, 3)
        xi = np.logspace(-2, -1, 40)
        slope = np.polyfit(np.log(xi), np.log(np.abs(taylor_remainder(p, xi))), 1)[0]
        assert slope == pytest.approx(8.0, abs=0.1)


class TestOscillatorLimits:
    def test_large_r_pointwise(self):
        # fixed xi <= 1: the deviation from lam + xi^2 shrinks with r
        lam, mu = -8.0, 0.2
        xi = 1.0
        errs = []
        for r in range(1, 13):
            w = potential_dimensionless(ModelParams(lam, mu, r), xi)
            errs.append(abs(w - (lam + xi * xi)))
        assert all(b <= a * (1 + 1e-12) for a, b in zip(errs, errs[1:]))
        assert errs[-1] < 1e-6

    def test_small_mu_pointwise(self):
        lam, r, xi = -8.0, 1, 0.8
        errs = []
        for mu in (1e-3, 1e-4, 1e-5):
            w = potential_dimensionless(ModelParams(lam, mu, r), xi)
            errs.append(abs(w - (lam + xi * xi)))
        # at order 1 the deviation is ~ mu * xi^4 at leading order
        assert errs[0] / errs[1] == pytest.approx(10.0, rel=0.2)
        assert errs[1] / errs[2] == pytest.approx(10.0, rel=0.2)

    def test_small_mu_bounded_by_mu_any_order(self):
        # higher orders converge even faster; C*mu stays an upper envelope
        # (mu small enough to probe the limit, large enough to stay above
        # the |lam|*eps rounding floor of the direct evaluation)
        lam, xi = -8.0, 0.8
        for r in (2, 3):
            errs = [
                abs(potential_dimensionless(ModelParams(lam, mu, r), xi) - (lam + xi * xi))
                for mu in (1e-2, 1e-3, 1e-4)
            ]
            assert errs[0] > errs[1] > errs[2]
            C = errs[0] / 1e-2
            assert errs[1] <= C * 1e-3 and errs[2] <= C * 1e-4


class TestPotentialMinimum:
    def test_well_minimum_at_origin(self):
        w_min, xi_min = potential_minimum(ModelParams(-8.0, 0.2, 1))
        assert w_min == pytest.approx(-8.0, abs=1e-10)
        assert abs(xi_min) < 1e-3

    def test_barrier_minimum_is_asymptotic_zero(self):
        # lam >= 0 makes every C_k positive, so W > 0 and inf W = 0 at infinity
        w_min, _ = potential_minimum(ModelParams(8.0, 0.2, 1))
        assert 0.0 <= w_min < 1e-12

    def test_minimum_never_above_lambda_for_wells(self):
        for r in range(0, 7):
            w_min, _ = potential_minimum(ModelParams(-8.0, 0.2, r))
            assert w_min <= -8.0 + 1e-12
