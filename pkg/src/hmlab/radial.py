"""Radial expansions: Jacobi endomorphism, volume density, shape traces.

The normalized Jacobi endomorphism solves A'' + R(r) A = 0 with A(0) = 0,
A'(0) = id, written A = r * a(r); a(r) is computed on the full tangent
space (every jet matrix kills the direction, so the radial line carries the
exact factor r).  The volume density theta = det A / r and its normalized
form Theta = det a drive everything else.

Series are carried one order past the jet where a trace-only closure is
available: on a harmonic candidate the r^6 coefficient of a(r) enters the
density and the shape traces only through its trace, which is determined
by tr R^3 and tr R'R' alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import OrderUnsupported, StepFailure, ZeroLeadingCoefficient
from .series import TruncatedSeries


def jacobi_series(jet, order=5, convention="jacobi"):
    """Normalized Jacobi endomorphism a(r) through r**order (order <= 5).

    ``convention`` names the sign convention of the supplied jet matrices:
    'jacobi' means the Jacobi equation reads A'' + R A = 0 with these
    matrices; 'reversed' means they carry the opposite sign and are negated
    on entry.  The recursion (j+2)(j+1) a_{j+2} = -sum R_i a_m is run on
    Taylor coefficients R_i = R^(i)/i!.
    """
    if convention not in ("jacobi", "reversed"):
        raise ValueError(f"unknown convention {convention!r}")
    if order < 0 or order > 5:
        raise OrderUnsupported(f"jacobi series order {order} outside 0..5")
    if order > jet.order + 2:
        raise OrderUnsupported(
            f"series order {order} needs jet order >= {order - 2}, got {jet.order}")
    taylor = [jet.taylor_coefficient(k) for k in range(jet.order + 1)]
    if convention == "reversed":
        taylor = [-m for m in taylor]
    dim = taylor[0].shape[0]
    zero = np.zeros((dim, dim))
    a = [zero, np.eye(dim)]
    for j in range(order):
        acc = zero.copy()
        for i, ri in enumerate(taylor):
            m = j - i
            if 0 <= m < len(a):
                acc = acc + ri @ a[m]
        a.append(-acc / ((j + 2) * (j + 1)))
    coeffs = a[1:order + 2]
    return TruncatedSeries(coeffs, offset=0)


def harmonic_trace_c6(jet):
    """Trace of the r^6 coefficient of a(r) on a harmonic candidate.

    Valid when tr R(r)^2 is constant along geodesics (so tr R R'' =
    -tr R'R') and tr R'''' vanishes; both follow from constancy of the
    direction traces.
    """
    r0 = jet.matrices[0]
    r1 = jet.matrices[1]
    tr_cube = float(np.trace(r0 @ r0 @ r0))
    p = float(np.trace(r1 @ r1))
    return -(tr_cube + 3.0 * p) / 5040.0


def extend_with_trace(a_series, trace_c6):
    """Append an r^6 coefficient carrying only a trace.

    The appended matrix is (trace/n) id; determinants and total traces
    through r^6 come out exactly right, but the individual matrix entries
    at r^5 of derived quotients are not meaningful.
    """
    if a_series.top != 5:
        raise OrderUnsupported("trace closure extends an order-5 series only")
    dim = a_series.coeffs[0].shape[0]
    coeffs = [c.copy() for c in a_series.coeffs]
    while len(coeffs) < 6:
        coeffs.append(np.zeros((dim, dim)))
    coeffs.append((trace_c6 / dim) * np.eye(dim))
    return TruncatedSeries(coeffs, offset=a_series.offset)


@dataclass
class RadialDensity:
    """Volume density data along one direction."""

    dim: int
    normalized: TruncatedSeries   # Theta = det a(r), starts at 1
    density: TruncatedSeries      # theta = r^(n-1) Theta
    a_series: TruncatedSeries

    def coefficient(self, k):
        return float(self.normalized.coefficient(k))


def density_series(a_series, trace_c6=None):
    """Volume density series from the normalized Jacobi endomorphism.

    With ``trace_c6`` the order-5 endomorphism is closed through r^6 first.
    """
    if trace_c6 is not None:
        a_series = extend_with_trace(a_series, trace_c6)
    dim = a_series.coeffs[0].shape[0]
    theta = a_series.det()
    return RadialDensity(dim=dim, normalized=theta,
                         density=theta.shift(dim - 1), a_series=a_series)


def radial_density(geometry, u=None, order=6):
    """Density series for one direction, with the harmonic r^6 closure."""
    from .geometry import curvature_jet
    if u is None:
        u = np.ones(geometry.dim) / math.sqrt(geometry.dim)
    if order < 0 or order > 6:
        raise OrderUnsupported(f"density order {order} outside 0..6")
    jet = curvature_jet(geometry, u, order=3)
    a_series = jacobi_series(jet, order=min(order, 5))
    trace_c6 = harmonic_trace_c6(jet) if order == 6 else None
    return density_series(a_series, trace_c6=trace_c6)


# -- shape operator traces ---------------------------------------------------


@dataclass
class ShapeTraces:
    """Transverse traces of the distance-sphere shape operator.

    The radial eigenvalue contributes exactly 1/r**k to tr sigma^k and is
    subtracted; tr(R_nu sigma) is clean because the Jacobi operator kills
    the radial direction.
    """

    tr_sigma: TruncatedSeries
    tr_sigma_sq: TruncatedSeries
    tr_sigma_cube: TruncatedSeries
    tr_curv_sigma: TruncatedSeries
    sigma: TruncatedSeries


def shape_trace_series(a_series, jet, r4_trace=0.0):
    """Shape operator traces from the endomorphism series and the jet.

    ``r4_trace`` closes the r^3 coefficient of tr(R_nu sigma): the missing
    fourth Taylor coefficient of R(r) enters only through its trace, which
    vanishes on a harmonic candidate.
    """
    dim = a_series.coeffs[0].shape[0]
    a_full = a_series.shift(1)
    sigma = a_full.derivative() * a_full.inverse()
    tr_sigma = sigma.trace() - TruncatedSeries.monomial(1.0, -1)
    sigma_sq = sigma * sigma
    tr_sigma_sq = sigma_sq.trace() - TruncatedSeries.monomial(1.0, -2)
    tr_sigma_cube = (sigma_sq * sigma).trace() - TruncatedSeries.monomial(1.0, -3)
    r_coeffs = [jet.taylor_coefficient(k) for k in range(jet.order + 1)]
    if jet.order >= 3:
        r_coeffs.append((r4_trace / dim) * np.eye(dim))
    r_series = TruncatedSeries(r_coeffs, offset=0)
    tr_curv_sigma = (r_series * sigma).trace()
    return ShapeTraces(tr_sigma=tr_sigma, tr_sigma_sq=tr_sigma_sq,
                       tr_sigma_cube=tr_sigma_cube, tr_curv_sigma=tr_curv_sigma,
                       sigma=sigma)


def harmonic_shape_expectations(n, c, h, l, p):
    """Frozen transverse-trace coefficients of a harmonic space.

    Keyed by series power; derived once from the density coefficients and
    reproduced by the cotangent series on the round sphere.
    """
    return {
        "tr_sigma": {-1: float(n - 1), 1: -c / 3.0, 3: -h / 45.0, 5: -l / 15120.0},
        "tr_sigma_sq": {-2: float(n - 1), 0: -2.0 * c / 3.0, 2: h / 15.0,
                        4: l / 3024.0},
        "tr_sigma_cube": {-3: float(n - 1), -1: -c, 1: 4.0 * h / 15.0,
                          3: l / 30240.0 - p / 96.0},
        "tr_curv_sigma": {-1: c, 1: -h / 3.0, 3: -l / 1440.0 + p / 96.0},
    }


# -- volume of geodesic balls and spheres ------------------------------------


def volume_series(normalized_density, dim):
    """Sphere-area and ball-volume series, per unit solid angle.

    The true area is omega_{n-1} times the first series; the quotient
    ball/area is normalization free.
    """
    area = normalized_density.shift(dim - 1)
    ball_coeffs = [c / (dim + k) for k, c in enumerate(normalized_density.coeffs)]
    ball = TruncatedSeries(ball_coeffs, offset=dim, exact=normalized_density.exact)
    return area, ball


def vk_recursion(a_coeffs, dim, count):
    """Quotient coefficients V_k of vol(ball)/vol(sphere) = sum V_k r^{k+1}.

    Exact over Fractions: A0 V_k = A_k/(n+k) - sum_{j>=1} A_j V_{k-j}.
    """
    a = [Fraction(x) for x in a_coeffs]
    if not a or a[0] == 0:
        raise ZeroLeadingCoefficient("density series must start with a nonzero constant")
    out = []
    for k in range(count):
        acc = (a[k] if k < len(a) else Fraction(0)) / (dim + k)
        for j in range(1, k + 1):
            if j < len(a):
                acc -= a[j] * out[k - j]
        out.append(acc / a[0])
    return out


# -- numerical Jacobi flow ---------------------------------------------------


@dataclass
class OdeResult:
    radii: np.ndarray
    theta_normalized: np.ndarray
    a_final: np.ndarray


def _flow_derivative(geometry, state):
    u, q, a, b = state
    gamma = geometry.gamma
    du = -np.einsum('i,ijm,j->m', u, gamma, u)
    g = np.einsum('i,imd->dm', u, gamma)
    dq = -g @ q
    r4 = np.einsum('aefd,e,f->ad', geometry.r, u, u)
    r_par = q.T @ r4 @ q
    return du, dq, b, -r_par @ a


def ode_oracle(geometry, u, radii, steps_per_unit=2048):
    """Normalized density by integrating the Jacobi flow (fixed-step RK4).

    State: direction and parallel frame in the left-invariant trivialization
    plus the Jacobi endomorphism and its derivative.  Structure constants are
    frame-constant, so the curvature entering the flow is the frozen tensor
    conjugated by the frame.
    """
    n = geometry.dim
    u = np.asarray(u, dtype=float)
    radii = np.sort(np.asarray(radii, dtype=float))
    thetas = []
    a_final = None
    for r_target in radii:
        steps = max(16, int(math.ceil(r_target * steps_per_unit)))
        h = r_target / steps
        state = (u.copy(), np.eye(n), np.zeros((n, n)), np.eye(n))
        for _ in range(steps):
            k1 = _flow_derivative(geometry, state)
            s2 = tuple(x + 0.5 * h * k for x, k in zip(state, k1))
            k2 = _flow_derivative(geometry, s2)
            s3 = tuple(x + 0.5 * h * k for x, k in zip(state, k2))
            k3 = _flow_derivative(geometry, s3)
            s4 = tuple(x + h * k for x, k in zip(state, k3))
            k4 = _flow_derivative(geometry, s4)
            state = tuple(x + (h / 6.0) * (p + 2 * q2 + 2 * q3 + q4)
                          for x, p, q2, q3, q4 in zip(state, k1, k2, k3, k4))
        a = state[2]
        if not np.all(np.isfinite(a)):
            raise StepFailure(f"non-finite Jacobi endomorphism at r = {r_target}")
        det = float(np.linalg.det(a))
        thetas.append(det / r_target ** n)
        a_final = a
    return OdeResult(radii=radii, theta_normalized=np.array(thetas), a_final=a_final)


def peel_coefficients(values, radii, powers):
    """Sequentially extract series coefficients from sampled residuals.

    ``values[k]`` is f(radii[k]) with f(0) = 0 after the caller removed the
    constant term; the powers must be increasing and of one parity gap so
    that Richardson extrapolation in r^2 applies.
    """
    radii = np.asarray(radii, dtype=float)
    residual = np.asarray(values, dtype=float).copy()
    ts = radii ** 2
    out = []
    for p in powers:
        f = residual / radii ** p
        est = _neville_at_zero(ts, f)
        out.append(est)
        residual = residual - est * radii ** p
    return out


def _neville_at_zero(ts, fs):
    vals = list(fs)
    n = len(vals)
    for level in range(1, n):
        nxt = []
        for i in range(n - level):
            t0, t1 = ts[i], ts[i + level]
            nxt.append((t1 * vals[i] - t0 * vals[i + 1]) / (t1 - t0))
        vals = nxt
    return vals[0]
