"""Heat-kernel coefficient machinery and the intrinsic sphere oracle."""

import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hmlab.errors import FitIllConditioned
from hmlab.geometry import constant_curvature_geometry, curvature_jet
from hmlab.heatinv import (P3_WEIGHTS, alpha2_cross_difference,
                           alpha_beta_parts, a2_integrand,
                           a2_integrand_from_traces, averaged_boundary_r3,
                           boundary_decomposition, boundary_polynomials,
                           p3_rank_check, sphere_intrinsic_curvature,
                           sphere_intrinsic_oracle, structural_p_decompositions,
                           structural_r3_table)
from hmlab.invariants import point_invariants, sphere_average, beta_tensor
from hmlab.radial import (density_series, harmonic_trace_c6, jacobi_series,
                          shape_trace_series)


def test_interior_coefficient_dual_routes(all_spaces):
    """The scalar-curvature route and the trace route must agree exactly."""
    for geo in all_spaces.values():
        inv = point_invariants(geo)
        assert_allclose(a2_integrand(inv), a2_integrand_from_traces(inv),
                        rtol=1e-12)


def test_interior_coefficient_frozen_values(hh2, ns12):
    assert_allclose(a2_integrand(point_invariants(hh2)), 14.0, rtol=1e-10)
    assert_allclose(a2_integrand(point_invariants(ns12)), 49.4, rtol=1e-10)


def test_alpha_beta_averages(ns12, hh3):
    u = np.eye(12)[0]
    ab = alpha_beta_parts(ns12, u)
    n = 12
    pi = point_invariants(ns12)
    assert_allclose(ab.average_alpha2_direction,
                    3.0 * pi.grad_r_sq / (16 * n * (n + 2) * (n + 4)),
                    rtol=1e-12)
    # dual route for the beta average: exact pairing of the quartic tensor
    avg_beta_pairing = (4.0 / 9.0) * sphere_average(beta_tensor(ns12))
    assert_allclose(ab.average_beta2_direction, avg_beta_pairing, rtol=1e-9)
    # symmetric member: no direction dependence at all
    ab_sym = alpha_beta_parts(hh3, u)
    assert_allclose(ab_sym.average_alpha2_direction, 0.0, atol=1e-12)
    assert_allclose(ab_sym.alpha2_direction, 0.0, atol=1e-10)


def test_alpha_direction_part_has_the_right_average(ns12, rng):
    """Monte Carlo over directions must reproduce the exact average."""
    vals = []
    for _ in range(150):
        u = rng.standard_normal(12)
        u /= np.linalg.norm(u)
        vals.append(alpha_beta_parts(ns12, u).alpha2_direction)
    vals = np.array(vals)
    exact = alpha_beta_parts(ns12, np.eye(12)[0]).average_alpha2_direction
    se = vals.std() / math.sqrt(len(vals))
    assert abs(vals.mean() - exact) < 5 * se


def test_structural_table_is_exact_rationals():
    table = structural_r3_table(12)
    assert table["cube"]["C3"] == Fraction(-1, 27)
    assert table["cube"]["CH"] == Fraction(2 * 11, 45)
    assert table["cube"]["L"] == Fraction(-121, 5040)
    assert table["mixed"]["CH"] == Fraction(-1, 135)
    assert table["mixed"]["L"] == Fraction(11, 3780)
    assert table["pure_cube"]["L"] == Fraction(1, 30240)
    assert table["pure_cube"]["TrRpRp"] == Fraction(-1, 96)
    assert table["curv_sigma"]["L"] == Fraction(-1, 1440)
    assert table["curv_sigma"]["TrRpRp"] == Fraction(1, 96)


def test_p_weights_and_rank():
    assert P3_WEIGHTS["p3_dirichlet"] == (Fraction(40, 21), Fraction(-88, 7),
                                          Fraction(320, 21))
    assert P3_WEIGHTS["p3_neumann"] == (Fraction(40, 3), Fraction(8),
                                        Fraction(32, 3))
    assert p3_rank_check() == 2


def test_p2_structural_slope_is_one_sixth():
    decomp = structural_p_decompositions(12)
    assert decomp["p2"]["TrRpRp"] == Fraction(1, 6)
    assert decomp["p3_dirichlet"]["TrRpRp"] == Fraction(-10, 63)
    assert decomp["p3_neumann"]["TrRpRp"] == Fraction(-1, 9)


def test_boundary_fit_snaps_to_structural_slopes(ns12):
    fits = boundary_decomposition(ns12, n_directions=12, seed=2)
    expected = {"p2": Fraction(1, 6), "p3_dirichlet": Fraction(-10, 63),
                "p3_neumann": Fraction(-1, 9)}
    for key, fit in fits.items():
        assert fit.slope_snapped == expected[key]
        assert fit.fit_residual < 1e-9
        assert_allclose(fit.intercept_fitted, fit.intercept_structural,
                        rtol=1e-8)
        assert_allclose(fit.slope_fitted, float(expected[key]), rtol=1e-8)


def test_boundary_fit_degenerates_on_symmetric_member(hh3):
    with pytest.raises(FitIllConditioned):
        boundary_decomposition(hh3, n_directions=8, seed=0)


def test_averaged_boundary_r3_distinguishes_the_pair(hh3, ns12):
    sym = averaged_boundary_r3(hh3)
    mixed = averaged_boundary_r3(ns12)
    # C, H, L agree across the pair, so the offsets are the slope times the
    # average of tr R'R', which vanishes only on the symmetric member
    n = 12
    avg_p = 3.0 * point_invariants(ns12).grad_r_sq / (n * (n + 2) * (n + 4))
    slopes = {"p2": Fraction(1, 6), "p3_dirichlet": Fraction(-10, 63),
              "p3_neumann": Fraction(-1, 9)}
    for key in sym:
        assert_allclose(mixed[key] - sym[key], float(slopes[key]) * avg_p,
                        rtol=1e-7)
        assert abs(mixed[key] - sym[key]) > 1e-3


def test_normalized_mode_with_matching_density_is_raw(hh2):
    """Dividing by the direction's own density must undo the multiplication."""
    u = np.eye(8)[2]
    inv = point_invariants(hh2)
    jet = curvature_jet(hh2, u, order=3)
    dens = density_series(jacobi_series(jet, order=5),
                          trace_c6=harmonic_trace_c6(jet))
    shape = shape_trace_series(dens.a_series, jet, r4_trace=0.0)
    raw = boundary_polynomials(shape, jet, inv, mode="normalized")
    cooked = boundary_polynomials(shape, jet, inv, mode="normalized",
                                  density=dens.normalized,
                                  averaged_density=dens.normalized)
    for key in raw.r3:
        assert_allclose(cooked.r3[key], raw.r3[key], rtol=1e-10)
    natural = boundary_polynomials(shape, jet, inv, mode="natural",
                                   density=dens.normalized)
    assert natural.decomposition == {}
    assert raw.decomposition != {}


def test_flat_space_sphere_curvature_is_exact():
    geo = constant_curvature_geometry(3, 0.0)
    u = np.array([1.0, 0.0, 0.0])
    sample = sphere_intrinsic_curvature(geo, u, 0.5, steps_per_unit=512)
    # round 2-sphere of radius 1/2: |Ric|^2 = 2/r^4, |R|^2 = 4/r^4
    assert_allclose(sample.ric_sq, 32.0, rtol=1e-10)
    assert_allclose(sample.riem_sq, 64.0, rtol=1e-10)


def test_round_sphere_distance_spheres():
    geo = constant_curvature_geometry(4, 1.0)
    u = np.eye(4)[0]
    r = 0.7
    sample = sphere_intrinsic_curvature(geo, u, r, steps_per_unit=2048)
    # distance sphere in S^4 is round S^3 of intrinsic curvature 1/sin^2 r
    expected_ric = 12.0 / math.sin(r) ** 4
    assert_allclose(sample.ric_sq, expected_ric, rtol=1e-9)


def test_flat_oracle_reads_off_the_inverse_quartic():
    geo = constant_curvature_geometry(4, 0.0)
    u = np.eye(4)[0]
    fit = sphere_intrinsic_oracle(geo, u, radii=np.geomspace(0.1, 0.5, 6),
                                  powers=(-4, -2, 0), steps_per_unit=512)
    # S^3(r): |Ric|^2 = 12/r^4, |R|^2 = 12/r^4
    assert_allclose(fit["ric_sq"][0], 12.0, rtol=1e-7)
    assert_allclose(fit["riem_sq"][0], 12.0, rtol=1e-7)
    assert_allclose(fit["ric_sq"][1:], 0.0, atol=1e-5)


def test_oracle_rejects_underdetermined_fit(ns12):
    with pytest.raises(FitIllConditioned):
        sphere_intrinsic_oracle(ns12, np.eye(12)[0], radii=np.array([0.1, 0.2]),
                                powers=(-4, -2, 0))


def test_cross_direction_difference_recovers_alpha2(ns12):
    """Differencing two directions cancels the isotropic terms, leaving the
    (1/16) tr R'R' difference as the r^2 slope."""
    rng = np.random.default_rng(11)
    u1, u2 = rng.standard_normal((2, 12))
    u1 /= np.linalg.norm(u1)
    u2 /= np.linalg.norm(u2)
    fitted, predicted = alpha2_cross_difference(ns12, u1, u2)
    assert abs(predicted) > 1e-3   # the pair actually separates directions
    assert abs(fitted - predicted) < 0.05 * abs(predicted)
