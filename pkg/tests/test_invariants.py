"""Direction traces, curvature scalars and exact sphere averages."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hmlab.errors import DegreeTooHigh
from hmlab.geometry import geometry_from_algebra, scale_bracket
from hmlab.invariants import (beta_tensor, direction_constants,
                              grad_quad_tensor, gradient_adjusted_cubics,
                              mc_average, point_invariants, r_cube_tensor,
                              random_directions, sphere_average,
                              verify_average_identities,
                              verify_einstein_identities, verify_harmonicity)


def test_round_sphere_direction_traces(sphere6):
    """On the unit sphere the Jacobi operator is the transverse projection."""
    u = np.eye(6)[2]
    dc = direction_constants(sphere6, u)
    assert_allclose(dc.c, 5.0, atol=1e-14)
    assert_allclose(dc.h, 5.0, atol=1e-14)
    assert_allclose(dc.l, 160.0, atol=1e-13)   # 32 tr R_u^3, derivative part absent
    assert_allclose(dc.odd_first, 0.0, atol=1e-14)
    assert_allclose(dc.even_second, 0.0, atol=1e-14)


def test_round_sphere_cubic_scalars(sphere6):
    pi = point_invariants(sphere6)
    n = 6
    assert_allclose(pi.norm_r_sq, 2 * n * (n - 1), atol=1e-12)
    assert_allclose(pi.r_hat, 4 * n * (n - 1), atol=1e-11)
    assert_allclose(pi.r_ring, n * (n - 1) * (n - 2), atol=1e-11)
    assert_allclose(pi.grad_r_sq, 0.0, atol=1e-12)


def test_family_point_invariants(all_spaces):
    expected_c = {"ch2": -1.5, "hh2": -4.0, "hh3": -5.0, "ns12": -5.0}
    for key, geo in all_spaces.items():
        pi = point_invariants(geo)
        assert_allclose(pi.c, expected_c[key], rtol=1e-12)


def test_gradient_separates_the_twelve_dimensional_pair(hh3, ns12):
    sym = point_invariants(hh3)
    mixed = point_invariants(ns12)
    assert abs(sym.grad_r_sq) < 1e-10
    assert_allclose(mixed.grad_r_sq, 576.0, rtol=1e-9)


def test_adjusted_cubics_agree_across_the_pair(hh3, ns12):
    """R_hat and R_ring differ between the members; the two gradient-adjusted
    combinations coincide, which is what makes the pair interesting."""
    a = gradient_adjusted_cubics(point_invariants(hh3))
    b = gradient_adjusted_cubics(point_invariants(ns12))
    for key in a:
        assert_allclose(a[key], b[key], rtol=1e-9)
    raw_a = point_invariants(hh3)
    raw_b = point_invariants(ns12)
    assert abs(raw_a.r_hat - raw_b.r_hat) > 1.0
    assert abs(raw_a.r_ring - raw_b.r_ring) > 1.0


def test_harmonicity_battery(all_spaces):
    for geo in all_spaces.values():
        report = verify_harmonicity(geo, n_directions=20, seed=7)
        assert report.passed, report.as_dict()


def test_harmonicity_battery_trips_on_detuned_bracket(ch2):
    geo = geometry_from_algebra(scale_bracket(ch2.algebra, 0, 1, 1.3))
    report = verify_harmonicity(geo, n_directions=20, seed=7, tol=1e-8)
    assert not report.passed


def test_einstein_identity_battery(all_spaces):
    for geo in all_spaces.values():
        report = verify_einstein_identities(geo)
        assert report.passed, report.as_dict()
        names = [row.identity for row in report.rows]
        assert names == ["einstein", "norm-r-quadratic", "l-from-cubics",
                         "lichnerowicz"]


def test_average_identity_battery(ch2, hh2, ns12):
    # hh3 is covered by the acceptance suite; the degree-6 pairing sums on a
    # second 12-dimensional space would double the cost for no new code path
    for geo in (ch2, hh2, ns12):
        report = verify_average_identities(geo)
        assert report.passed, report.as_dict()


def test_sphere_average_against_isotropic_moment_formula(rng):
    """Degree-4 pairing sum must reproduce the delta-delta moment formula."""
    n = 5
    t = rng.standard_normal((n, n, n, n))
    eye = np.eye(n)
    pair = (np.einsum('ab,cd->abcd', eye, eye)
            + np.einsum('ac,bd->abcd', eye, eye)
            + np.einsum('ad,bc->abcd', eye, eye))
    expected = float(np.einsum('abcd,abcd->', t, pair)) / (n * (n + 2))
    assert_allclose(sphere_average(t), expected, rtol=1e-12)


def test_sphere_average_odd_degree_is_zero(rng):
    assert sphere_average(rng.standard_normal((4, 4, 4))) == 0.0


def test_sphere_average_degree_cap():
    with pytest.raises(DegreeTooHigh):
        sphere_average(np.zeros((2,) * 10))


def test_sphere_average_matches_montecarlo_for_quadratic(rng):
    """Cross-check the pairing engine against brute-force directions."""
    n = 6
    t = rng.standard_normal((n, n))
    t = t + t.T
    exact = sphere_average(t)
    dirs = random_directions(n, 200_000, rng)
    est = float(np.mean(np.einsum('ka,ab,kb->k', dirs, t, dirs)))
    assert_allclose(est, exact, atol=6 * abs(exact) / np.sqrt(200_000) + 1e-3)


@pytest.mark.parametrize("quantity,tensor_builder,scale_power",
                         [("beta", beta_tensor, 2),
                          ("grad_quad", grad_quad_tensor, 3)])
def test_mc_average_within_errorbars(ns12, quantity, tensor_builder, scale_power):
    exact = sphere_average(tensor_builder(ns12))
    mean, se = mc_average(ns12, quantity, n_samples=100_000, seed=3)
    assert se > 0
    assert abs(mean - exact) < 5 * se


def test_cube_average_tensor_consistency(ns12):
    """The degree-6 pairing of the R_u^3 trace tensor matches direct sampling."""
    t = r_cube_tensor(ns12)
    exact = sphere_average(t)
    rng = np.random.default_rng(11)
    dirs = random_directions(12, 4000, rng)
    ru = np.einsum('iabj,ka,kb->kij', ns12.r, dirs, dirs)
    vals = np.einsum('kij,kjl,kli->k', ru, ru, ru)
    est = float(np.mean(vals))
    se = float(np.std(vals)) / np.sqrt(len(vals))
    assert abs(est - exact) < 5 * se


def test_random_directions_are_unit(rng):
    dirs = random_directions(7, 50, rng)
    assert dirs.shape == (50, 7)
    assert_allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-12)
