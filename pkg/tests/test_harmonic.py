import math

import numpy as np
import pytest

from annulus_nematics.harmonic import (
    DefectStateSpec,
    InvalidTiling,
    SeriesTruncation,
    SlowConvergence,
    canonical_f,
    canonical_f_exact,
    crossover_N,
    director,
    director_gradient,
    energy_quadrature_oracle,
    normalized_energy,
    series_s,
    state_coefficients,
    total_energy,
)
from annulus_nematics.of_strong import defect_free_energy, AnnulusGeometry, ElasticParams


def stencil_laplacian(fn, u0, p0, h=5e-4):
    c = fn(math.exp(u0), p0)
    return (fn(math.exp(u0 + h), p0) + fn(math.exp(u0 - h), p0)
            + fn(math.exp(u0), p0 + h) + fn(math.exp(u0), p0 - h) - 4.0 * c) / h ** 2


class TestCanonicalFunctions:
    def test_vanishes_on_first_edge(self):
        # every series term carries sin(q*0) = 0
        assert canonical_f(1, 4, 0.5, 0.7, 0.0) == 0.0
        assert canonical_f(3, 3, 0.3, 0.6, 0.0) == 0.0

    def test_harmonic_by_stencil(self):
        N, b = 4, 0.5
        for i in (1, 2, 3, 4):
            lap = stencil_laplacian(
                lambda r, p: canonical_f_exact(i, N, b, r, p),
                0.5 * math.log(b), math.pi / N)
            assert abs(lap) < 1e-6

    def test_stencil_residual_second_order(self):
        # residual of the harmonicity stencil shrinks like h^2
        N, b = 4, 0.5
        laps = [abs(stencil_laplacian(
            lambda r, p: canonical_f_exact(2, N, b, r, p),
            0.5 * math.log(b), 0.9, h=h)) for h in (2e-3, 1e-3)]
        assert laps[0] / laps[1] > 3.0

    def test_harmonic_by_stencil_series_route(self):
        N, b = 4, 0.5
        trunc = SeriesTruncation(n_terms=400, tail_bound=1e-100)
        lap = stencil_laplacian(
            lambda r, p: canonical_f(1, N, b, r, p, trunc),
            0.5 * math.log(b), math.pi / N)
        assert abs(lap) < 1e-6

    def test_series_matches_exact_at_midline(self):
        N, b = 4, 0.5
        trunc = SeriesTruncation(n_terms=600, tail_bound=1e-100)
        r = np.array([0.65, 0.707, 0.75])
        phi = np.array([0.4, 0.9, 1.3])
        for i in (1, 2, 3, 4):
            s = canonical_f(i, N, b, r, phi, trunc)
            e = canonical_f_exact(i, N, b, r, phi)
            assert np.max(np.abs(s - e)) < 1e-11

    def test_superposed_circle_data(self):
        # f1 + f3 carries unit data on both circles; compare the dense
        # partial sums of the two separately computed series
        N, b = 2, 0.4
        trunc = SeriesTruncation(n_terms=600, tail_bound=1e-100)
        r, phi = math.sqrt(b), math.pi / N
        combo = canonical_f(1, N, b, r, phi, trunc) + canonical_f(3, N, b, r, phi, trunc)
        exact = canonical_f_exact(1, N, b, r, phi) + canonical_f_exact(3, N, b, r, phi)
        assert abs(combo - exact) < 1e-10

    def test_boundary_data_recovered_near_edges(self):
        N, b = 4, 0.5
        phi = 0.8
        assert abs(canonical_f_exact(1, N, b, 1.0 - 1e-8, phi) - 1.0) < 1e-5
        assert abs(canonical_f_exact(2, N, b, 1.0 - 1e-8, phi) - phi) < 1e-5
        assert abs(canonical_f_exact(3, N, b, b * (1 + 1e-8), phi) - 1.0) < 1e-5
        assert abs(canonical_f_exact(4, N, b, b * (1 + 1e-8), phi) - phi) < 1e-5
        assert abs(canonical_f_exact(1, N, b, b * (1 + 1e-8), phi)) < 1e-5

    def test_slow_convergence_warning_near_corner(self):
        N, b = 4, 0.5
        trunc = SeriesTruncation.for_geometry(N, b)
        with pytest.warns(SlowConvergence):
            canonical_f(1, N, b, 0.999, 0.01, trunc)

    def test_truncation_bound(self):
        trunc = SeriesTruncation.for_geometry(4, 0.5)
        assert trunc.tail_bound <= 1e-10
        rate = 2.0 * abs(math.log(0.5))
        assert math.exp(-rate * trunc.n_terms) / trunc.n_terms <= 1e-10


class TestStateCoefficients:
    def test_u1_at_two_sectors(self):
        spec = state_coefficients("U1", 2)
        a0, a1, a2, a3, a4 = spec.coefficients
        assert a0 == 2.0 and a2 == -1.0 and a4 == -1.0
        assert abs(a1) == abs(a3) == 0.5 * math.pi

    def test_u2_rotation_coefficient(self):
        # the rotation term must reproduce the (N-2)^2/(4N) energy weight;
        # the edge offset fixes its sign to (2-N)/2
        for N in (1, 2, 4, 6):
            spec = state_coefficients("U2", N)
            a0 = spec.coefficients[0]
            assert a0 == 0.5 * (2 - N)
            assert a0 ** 2 / N == pytest.approx((N - 2) ** 2 / (4.0 * N))
            assert spec.coefficients[2] == spec.coefficients[4] == 1.0 - a0

    def test_u3_and_diagonal_sign_pattern(self):
        u3 = state_coefficients("U3", 4)
        d = state_coefficients("D", 4)
        assert u3.coefficients[0] == d.coefficients[0] == 1.0
        # opposite tangent offsets for U3 (defects on one straight edge),
        # equal ones for the diagonal state: pinned by the energy oracle
        assert u3.coefficients[1] == -u3.coefficients[3]
        assert d.coefficients[1] == d.coefficients[3]

    def test_corner_strengths_sum_to_zero(self):
        for kind in ("U1", "U2", "U3", "D"):
            spec = state_coefficients(kind, 4)
            assert sum(spec.corner_strengths) == 0
            assert all(m in (-1, 1) for m in spec.corner_strengths)

    def test_invalid_tiling_odd_sectors(self):
        with pytest.raises(InvalidTiling):
            state_coefficients("U3", 3)
        with pytest.raises(InvalidTiling):
            state_coefficients("D", 5)
        state_coefficients("D", 3, full_annulus=False)


class TestDirector:
    def test_zero_on_first_edge(self):
        spec = state_coefficients("U2", 4)
        assert abs(director(spec, 0.5, 0.7, 1e-9)) < 1e-5

    def test_tangent_data_on_circles(self):
        b = 0.5
        for kind in ("U1", "U2", "U3", "D"):
            spec = state_coefficients(kind, 4)
            a1, a3 = spec.coefficients[1], spec.coefficients[3]
            phi = 0.7
            outer = director(spec, b, 1.0 - 1e-9, phi)
            inner = director(spec, b, b * (1 + 1e-9), phi)
            assert abs(outer - (phi + a1)) < 1e-5
            assert abs(inner - (phi + a3)) < 1e-5

    def test_end_edge_offset(self):
        b, N = 0.5, 4
        phi_end = 2.0 * math.pi / N
        for kind, offset in (("U1", math.pi), ("U2", -math.pi), ("D", 0.0)):
            spec = state_coefficients(kind, N)
            val = director(spec, b, 0.7, phi_end - 1e-9)
            assert abs(val - (phi_end + offset)) < 1e-5

    def test_harmonic_interior(self):
        spec = state_coefficients("U2", 4)
        lap = stencil_laplacian(lambda r, p: director(spec, 0.5, r, p),
                                0.5 * math.log(0.5), 0.6, h=2e-4)
        assert abs(lap) < 1e-6

    def test_corner_windings_match_strengths(self):
        # the angle swept along a small quarter-arc around each corner is
        # the defect strength times the pi/2 interior angle
        b, N = 0.5, 4
        rho = 1e-3
        phi_end = 2.0 * math.pi / N
        arcs = {  # corner -> (center_x, center_p, psi of the two edge rays)
            0: (math.log(b), 0.0, (0.0, 0.5 * math.pi)),
            1: (0.0, 0.0, (math.pi, 0.5 * math.pi)),
            2: (0.0, phi_end, (math.pi, 1.5 * math.pi)),
            3: (math.log(b), phi_end, (0.0, -0.5 * math.pi)),
        }
        for kind in ("U1", "U2", "U3", "D"):
            spec = state_coefficients(kind, N)
            for idx, (cx, cp, (psi0, psi1)) in arcs.items():
                psi = np.linspace(psi0, psi1, 40)[1:-1]
                x = cx + rho * np.cos(psi)
                p = cp + rho * np.sin(psi)
                theta = director(spec, b, np.exp(x), p)
                swept = theta[-1] - theta[0]
                m = spec.corner_strengths[idx]
                expect = m * (psi1 - psi0) * (37.0 / 39.0)
                assert abs(swept - expect) < 0.05, (kind, idx)

    def test_gradient_consistency(self):
        spec = state_coefficients("D", 4)
        b, r0, p0 = 0.5, 0.72, 0.9
        h = 1e-6
        du_fd = (director(spec, b, r0 * math.exp(h), p0)
                 - director(spec, b, r0 * math.exp(-h), p0)) / (2 * h)
        dp_fd = (director(spec, b, r0, p0 + h)
                 - director(spec, b, r0, p0 - h)) / (2 * h)
        du, dp = director_gradient(spec, b, r0, p0)
        assert abs(du - du_fd) < 1e-8
        assert abs(dp - dp_fd) < 1e-8


class TestSeriesS:
    def test_all_negative(self):
        for N in (1, 2, 4, 8):
            for b in (0.1, 0.5, 0.9):
                for i in (1, 2, 3, 4):
                    assert series_s(i, N, b) < 0.0

    def test_even_index_below_odd_subset(self):
        # s4 sums every harmonic, s2 only the odd ones, all terms negative
        for N, b in ((2, 0.5), (4, 0.3)):
            assert series_s(4, N, b) <= series_s(2, N, b)

    def test_vanish_at_small_b(self):
        # leading csch term scales like b**(N/2), coth like b**N
        for i in (1, 2, 3, 4):
            assert abs(series_s(i, 2, 1e-8)) < 1e-6
            assert abs(series_s(i, 2, 1e-8)) < abs(series_s(i, 2, 1e-3))


class TestNormalizedEnergy:
    def test_rotated_pair_identity(self):
        for N in (1, 2, 4, 7):
            for b in (0.2, 0.5, 0.8):
                gap = normalized_energy("U1", N, b) - normalized_energy("U2", N, b)
                assert abs(gap - 2.0 * math.log(1.0 / b)) < 1e-12

    def test_diagonal_pair_identity(self):
        for N in (2, 4, 6):
            for b in (0.2, 0.5, 0.8):
                gap = normalized_energy("U3", N, b) - normalized_energy("D", N, b)
                assert abs(gap + series_s(2, N, b) / 2.0) < 1e-12

    def test_u2_minimal_small_n(self):
        for b in (0.3, 0.5, 0.7):
            for N in (2, 4):
                e = {k: normalized_energy(k, N, b) for k in ("U1", "U2", "U3", "D")}
                assert e["U2"] == min(e.values())

    def test_diagonal_minimal_large_n(self):
        for b in (0.3, 0.5):
            e = {k: normalized_energy(k, 40, b) for k in ("U1", "U2", "U3", "D")}
            assert e["D"] == min(e.values())


class TestTotalEnergy:
    def test_core_shrink_adds_log_two(self):
        e1 = total_energy("U2", 2, 0.5, 0.01, K=1.0)
        e2 = total_energy("U2", 2, 0.5, 0.005, K=1.0)
        assert abs((e2 - e1) - math.pi * math.log(2.0)) < 1e-12

    def test_defect_free_wins_small_core(self):
        b, eps = 0.3, 0.002
        free = defect_free_energy(AnnulusGeometry(b), ElasticParams(0.0, 1.0))
        assert free < total_energy("U2", 1, b, eps, K=1.0)
        for kind in ("U1", "U2", "U3", "D"):
            for N in (2, 4, 6):
                assert free < total_energy(kind, N, b, eps, K=1.0)

    def test_matches_quadrature_oracle(self):
        b, eps, N = 0.5, 1e-3, 4
        spec = state_coefficients("U2", N)
        oracle = energy_quadrature_oracle(spec, b, eps)
        closed = total_energy("U2", N, b, eps, K=2.0)
        assert abs(closed - 2.0 * oracle) < 0.01 * abs(closed)


class TestEnergyOracle:
    def test_all_kinds_within_one_percent(self):
        N, b, eps = 4, 0.5, 1e-3
        for kind in ("U1", "U2", "U3", "D"):
            spec = state_coefficients(kind, N)
            tilde = energy_quadrature_oracle(spec, b, eps) / math.pi \
                - math.log(1.0 / eps)
            closed = normalized_energy(kind, N, b)
            assert abs(tilde - closed) < 0.01 * abs(closed), kind

    def test_pure_rotation_reduces_to_defect_free(self):
        spec = DefectStateSpec(kind="D", N=1, coefficients=(1.0, 0.0, 0.0, 0.0, 0.0),
                               corner_strengths=(1, -1, 1, -1))
        b = 0.4
        for eps in (1e-3, 2e-3):
            val = energy_quadrature_oracle(spec, b, eps)
            assert abs(val - math.pi * math.log(1.0 / b)) < 1e-3

    def test_rotated_pair_gap(self):
        N, b, eps = 4, 0.5, 1e-3
        e1 = energy_quadrature_oracle(state_coefficients("U1", N), b, eps)
        e2 = energy_quadrature_oracle(state_coefficients("U2", N), b, eps)
        gap = (e1 - e2) / math.pi
        assert abs(gap - 2.0 * math.log(2.0)) < 0.01 * 2.0 * math.log(2.0)

    def test_rotation_part_decouples(self):
        # Dirichlet energy = rotation part + canonical part: the canonical
        # functions vanish on the straight edges where the rotation flux
        # lives, and the rotation has no radial flux on the circles
        N, b, eps = 2, 0.4, 1e-3
        full = state_coefficients("U2", N)
        a0 = full.coefficients[0]
        f_only = DefectStateSpec(kind="U2", N=N,
                                 coefficients=(0.0,) + full.coefficients[1:],
                                 corner_strengths=full.corner_strengths)
        e_full = energy_quadrature_oracle(full, b, eps)
        e_f = energy_quadrature_oracle(f_only, b, eps)
        rotation = 0.5 * a0 ** 2 * (2.0 * math.pi / N) * math.log(1.0 / b)
        assert abs(e_full - rotation - e_f) < 0.005 * abs(e_full)


class TestCrossover:
    def test_exists_and_positive(self):
        nc = crossover_N(0.5, 60)
        assert nc is not None and nc % 2 == 0 and nc > 2

    def test_nondecreasing_in_b(self):
        values = [crossover_N(b, 200) for b in (0.3, 0.5, 0.7)]
        assert all(v is not None for v in values)
        assert values[0] <= values[1] <= values[2]

    def test_absent_when_capped(self):
        nc = crossover_N(0.5, 60)
        assert crossover_N(0.5, nc - 2) is None
