import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from annulus_nematics.of_strong import (
    AnnulusGeometry,
    DomainError,
    ElasticParams,
    NoSpiralBranch,
    RadialProfile,
    SubcriticalInput,
    defect_free_energy,
    delta1_stability_coefficient,
    delta_n,
    eigenmode,
    pitchfork_amplitude,
    second_variation_radial,
    spiral_energy,
    spiral_ode_residual,
    spiral_solve,
)


def radial_eigenprofile(b, n=1, n_nodes=200_001):
    r = np.linspace(b, 1.0, n_nodes)
    return RadialProfile("r", r, eigenmode(b, n, r))


class TestClosedForms:
    def test_defect_free_energy(self):
        g = AnnulusGeometry(1.0 / math.e)
        assert abs(defect_free_energy(g, ElasticParams(0.0, 1.0)) - math.pi) < 1e-14
        assert abs(defect_free_energy(AnnulusGeometry(0.2), ElasticParams(0.3, 2.0))
                   - 2.0 * math.pi * math.log(5.0)) < 1e-12
        assert defect_free_energy(AnnulusGeometry(1.0 - 1e-9), ElasticParams(0.0)) \
            == pytest.approx(0.0, abs=1e-8)

    def test_delta_n_values(self):
        assert abs(delta_n(math.exp(-math.pi), 1) - 0.5) < 1e-14
        assert delta_n(0.2, 1) == pytest.approx(
            math.pi ** 2 / (math.pi ** 2 + math.log(0.2) ** 2), abs=1e-15)
        assert abs(delta_n(0.2, 1) - 0.79211) < 5e-6
        assert delta_n(0.3, 500) > 1.0 - 1e-4

    @given(b=st.floats(0.02, 0.98), n=st.integers(1, 20))
    @settings(deadline=None, max_examples=80)
    def test_delta_n_range_and_monotone(self, b, n):
        d = delta_n(b, n)
        assert 0.0 < d < 1.0
        assert delta_n(b, n + 1) > d

    def test_delta_n_limits(self):
        assert delta_n(1e-12, 1) < 0.05
        assert delta_n(1.0 - 1e-12, 1) > 0.999999

    def test_eigenmode_boundary_zeros(self):
        for b in (0.2, 0.5, 0.8):
            assert abs(eigenmode(b, 1, b)) < 1e-12
            assert abs(eigenmode(b, 1, 1.0)) < 1e-12
            assert abs(eigenmode(b, 1, math.sqrt(b)) - 1.0) < 1e-12

    def test_eigenmode_satisfies_euler_ode(self):
        # r f' + r^2 f'' + delta/(1-delta) f with analytic derivatives
        b, n = 0.35, 2
        d = delta_n(b, n)
        r = np.linspace(b + 0.01, 0.99, 500)
        k = math.pi * n / math.log(b)
        f = np.sin(k * np.log(r))
        fp = k * np.cos(k * np.log(r)) / r
        fpp = (-k * k * np.sin(k * np.log(r)) - k * np.cos(k * np.log(r))) / r ** 2
        res = r * fp + r ** 2 * fpp + d / (1.0 - d) * f
        assert np.max(np.abs(res)) < 1e-10


class TestSecondVariation:
    def test_positive_at_zero_anisotropy(self):
        eta = radial_eigenprofile(0.4, n_nodes=3001)
        assert second_variation_radial(eta, 0.0, 0.4) > 0.0

    def test_full_anisotropy_matches_identity(self):
        # at delta = 1 the form collapses to -2 pi int eta^2 / r dr
        b = 0.3
        eta = radial_eigenprofile(b, n_nodes=100_001)
        got = second_variation_radial(eta, 1.0, b)
        expect = -2.0 * math.pi * np.trapezoid(eta.values ** 2 / eta.nodes, eta.nodes)
        assert got < 0.0
        assert abs(got - expect) < 1e-6

    def test_null_mode_at_criticality(self):
        for b in (0.2, 0.6):
            eta = radial_eigenprofile(b)
            val = second_variation_radial(eta, delta_n(b, 1), b)
            assert abs(val) < 1e-8

    def test_sign_change_at_delta1(self):
        b = 0.45
        eta = radial_eigenprofile(b, n_nodes=20001)
        d1 = delta_n(b, 1)
        assert second_variation_radial(eta, d1 - 1e-3, b) > 0.0
        assert second_variation_radial(eta, d1 + 1e-3, b) < 0.0

    def test_random_profiles_positive_below_critical(self):
        b = 0.5
        d = 0.9 * delta_n(b, 1)
        rng = np.random.default_rng(3)
        r = np.linspace(b, 1.0, 4001)
        s = (r - b) / (1.0 - b)
        for _ in range(12):
            coef = rng.standard_normal(6)
            v = sum(c * np.sin((j + 1) * math.pi * s) for j, c in enumerate(coef))
            assert second_variation_radial(RadialProfile("r", r, v), d, b) > 0.0


class TestPitchfork:
    def test_amplitude_values(self):
        b = 0.2
        d1 = delta_n(b, 1)
        assert abs(pitchfork_amplitude(d1 + 0.01, b)
                   - math.sqrt(0.02 / d1)) < 1e-14
        assert abs(pitchfork_amplitude(d1 + 0.01, b) - 0.15891) < 5e-5
        # amplitude vanishes continuously at the bifurcation point
        assert pitchfork_amplitude(d1 + 1e-12, b) < 2e-6

    def test_subcritical_raises(self):
        b = 0.2
        with pytest.raises(SubcriticalInput):
            pitchfork_amplitude(delta_n(b, 1), b)
        with pytest.raises(SubcriticalInput):
            pitchfork_amplitude(0.1, b)


class TestSpiral:
    def test_exact_solution_at_full_anisotropy(self):
        for b in (0.2, 0.5):
            state = spiral_solve(1.0, b, n_profile=1025)
            t = state.profile.nodes
            g = b / (b + 1.0) * np.exp(t) + 1.0 / (b + 1.0) * np.exp(-t)
            exact = np.arccos(np.clip(g, -1.0, 1.0))
            assert np.max(np.abs(state.profile.values - exact)) < 1e-6
            assert abs(math.cos(state.u_max) - 2.0 * math.sqrt(b) / (1.0 + b)) < 1e-9

    def test_profile_symmetry(self):
        state = spiral_solve(0.9, 0.25, n_profile=513)
        v = state.profile.values
        assert np.max(np.abs(v - v[::-1])) < 1e-6
        assert v[0] == 0.0 and v[-1] == 0.0
        assert abs(np.max(v) - state.u_max) < 1e-12

    def test_single_interior_maximum(self):
        state = spiral_solve(0.95, 0.2, n_profile=513)
        dv = np.diff(state.profile.values)
        sign_flips = np.sum(np.diff(np.sign(dv[dv != 0])) != 0)
        assert sign_flips == 1

    def test_near_critical_matches_pitchfork_mode(self):
        b = 0.2
        d = delta_n(b, 1) + 1e-4
        state = spiral_solve(d, b, n_profile=513)
        amp = pitchfork_amplitude(d, b)
        t = state.profile.nodes
        mode = amp * np.sin(math.pi * t / math.log(1.0 / b))
        assert np.max(np.abs(state.profile.values - mode)) < 0.05 * amp

    def test_ode_residual_small(self):
        state = spiral_solve(0.95, 0.2, n_profile=16385)
        assert spiral_ode_residual(state) < 1e-6

    def test_ode_residual_at_delta_one(self):
        state = spiral_solve(1.0, 0.2, n_profile=8193)
        assert spiral_ode_residual(state, interior_margin=0.05) < 1e-6

    def test_no_branch_below_critical(self):
        b = 0.2
        with pytest.raises(NoSpiralBranch):
            spiral_solve(delta_n(b, 1) - 1e-6, b)


def zero_offset_state(b, t):
    from annulus_nematics.of_strong import SpiralState
    return SpiralState(AnnulusGeometry(b), 0.9, 0.0,
                       RadialProfile("t", t, np.zeros_like(t)))


class TestSpiralEnergy:
    def test_closed_form_at_delta_one(self):
        for b in (0.2, 0.5):
            state = spiral_solve(1.0, b, n_profile=4097)
            e = spiral_energy(state, ElasticParams(1.0, 1.0))
            exact = 2.0 * math.pi * (1.0 - b) / (1.0 + b)
            assert abs(e - exact) < 0.005 * exact

    def test_zero_offset_reduces_to_defect_free(self):
        b = 0.3
        t = np.linspace(0.0, math.log(1.0 / b), 257)
        state = zero_offset_state(b, t)
        e = spiral_energy(state, ElasticParams(0.5, 1.3))
        assert abs(e - math.pi * 1.3 * math.log(1.0 / b)) < 1e-10

    def test_below_defect_free_above_critical(self):
        b = 0.2
        free = math.pi * math.log(5.0)
        for d in (0.85, 0.95, 1.0):
            state = spiral_solve(d, b, n_profile=2049)
            assert spiral_energy(state, ElasticParams(d, 1.0)) < free


class TestGeometryTypes:
    def test_annulus_geometry_validation(self):
        AnnulusGeometry(0.5, n_sectors=4, eps=0.1)
        with pytest.raises(ValueError):
            AnnulusGeometry(1.2)
        with pytest.raises(ValueError):
            AnnulusGeometry(0.5, eps=0.2)  # core must stay below b/4
        with pytest.raises(ValueError):
            AnnulusGeometry(0.5, n_sectors=0)

    def test_elastic_params_derived_constant(self):
        p = ElasticParams(0.3, 2.0)
        assert abs(p.k1 - 0.7 * 2.0) < 1e-15
        with pytest.raises(ValueError):
            ElasticParams(1.2)
        with pytest.raises(ValueError):
            ElasticParams(0.5, k3=0.0)

    def test_radial_profile_validation(self):
        with pytest.raises(ValueError):
            RadialProfile("q", np.array([0.0, 1.0]), np.zeros(2))
        with pytest.raises(ValueError):
            RadialProfile("r", np.array([1.0, 0.5]), np.zeros(2))


class TestStabilityCoefficient:
    def test_midpoint_equals_one(self):
        for b in (0.2, 0.5, 0.8):
            t_mid = 0.5 * math.log(1.0 / b)
            assert abs(delta1_stability_coefficient(b, t_mid) - 1.0) < 1e-12

    def test_interior_point_above_one(self):
        assert delta1_stability_coefficient(0.5, 0.3) > 1.0

    def test_grid_minimum_at_least_one(self):
        for b in (0.2, 0.5, 0.9):
            t = np.linspace(0.0, math.log(1.0 / b), 1002)[1:-1]
            vals = delta1_stability_coefficient(b, t)
            assert np.min(vals) >= 1.0 - 1e-9

    def test_domain_error_at_endpoints(self):
        with pytest.raises(DomainError):
            delta1_stability_coefficient(0.5, 0.0)
        with pytest.raises(DomainError):
            delta1_stability_coefficient(0.5, math.log(2.0))
