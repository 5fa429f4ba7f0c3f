"""Heat-coefficient integrands on geodesic spheres and their decompositions.

Interior coefficient: the pointwise combination (5 scal^2 - 2|Ric|^2 +
2|R|^2)/360, rewritten through the direction constants on an Einstein
harmonic space.  Boundary coefficients: the polynomial combinations of
shape-operator traces whose r^3 coefficients decompose over the basis
(C^3, CH, L, tr R'R'); the tr R'R' slope is recovered by a per-direction
linear fit instead of being synthesized, and the structural rationals come
from exact series bookkeeping.  The hatted constants of the sphere
expansions are never synthesized; only the direction-dependent parts and
their averages are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import FitIllConditioned
from .geometry import curvature_jet
from .invariants import point_invariants, random_directions
from .radial import (density_series, harmonic_trace_c6, jacobi_series,
                     shape_trace_series)
from .series import TruncatedSeries


def a2_integrand(inv):
    """Pointwise second interior heat coefficient integrand.

    (5 scal^2 - 2|Ric|^2 + 2|R|^2)/360 with scal = nC and |Ric|^2 = nC^2 on
    an Einstein space.
    """
    n, c = inv.dim, inv.c
    scal = n * c
    ric_sq = n * c * c
    return (5.0 * scal * scal - 2.0 * ric_sq + 2.0 * inv.norm_r_sq) / 360.0


def a2_integrand_from_traces(inv):
    """Same combination with |R|^2 folded through the H identity."""
    n, c, h = inv.dim, inv.c, inv.h
    return (5.0 * (n * c) ** 2 - 2.0 * n * c * c
            + (4.0 * n / 3.0) * ((n + 2) * h - c * c)) / 360.0


@dataclass
class AlphaBeta:
    """Direction-dependent parts of the sphere-expansion coefficients.

    The constant ("hatted") parts are deliberately absent: they are not
    displayed in closed form anywhere we trust, so cross-member comparison
    happens through fit intercepts.  ``average_*`` are the exact sphere
    averages of the direction parts.
    """

    direction: np.ndarray
    alpha2_direction: float
    beta2_direction: float
    average_alpha2_direction: float
    average_beta2_direction: float


def alpha_beta_parts(geometry, u):
    """Direction parts (1/16) tr R'R' and (4/9) beta along ``u``."""
    u = np.asarray(u, dtype=float)
    jet = curvature_jet(geometry, u, order=1)
    r1 = jet.matrices[1]
    alpha_dir = float(np.trace(r1 @ r1)) / 16.0
    ru = jet.matrices[0]
    beta = float(np.einsum('jiqm,qi,mj->', geometry.r, ru, ru))
    beta_dir = 4.0 * beta / 9.0
    pi = point_invariants(geometry)
    n = geometry.dim
    avg_alpha = 3.0 * pi.grad_r_sq / (16.0 * n * (n + 2) * (n + 4))
    avg_beta = (4.0 / 9.0) * (n * pi.c ** 3 + 2.0 * pi.r_ring - 0.25 * pi.r_hat) \
        / (n * (n + 2))
    return AlphaBeta(direction=u, alpha2_direction=alpha_dir,
                     beta2_direction=beta_dir,
                     average_alpha2_direction=avg_alpha,
                     average_beta2_direction=avg_beta)


# -- boundary polynomials ------------------------------------------------------


def structural_r3_table(n):
    """Exact r^3 coefficients of the trace brackets over (C3, CH, L, trR'R').

    Derived from the frozen transverse-trace series; the sphere reproduces
    every entry through the cotangent expansions.
    """
    n = int(n)
    f = Fraction
    return {
        "cube": {"C3": f(-1, 27), "CH": f(2 * (n - 1), 45),
                 "L": f(-(n - 1) ** 2, 5040), "TrRpRp": f(0)},
        "mixed": {"C3": f(0), "CH": f(-1, 135), "L": f(n - 1, 3780),
                  "TrRpRp": f(0)},
        "pure_cube": {"C3": f(0), "CH": f(0), "L": f(1, 30240),
                      "TrRpRp": f(-1, 96)},
        "curv_sigma": {"C3": f(0), "CH": f(0), "L": f(-1, 1440),
                       "TrRpRp": f(1, 96)},
    }


def _combine(table_rows, weights):
    out = {"C3": Fraction(0), "CH": Fraction(0), "L": Fraction(0),
           "TrRpRp": Fraction(0)}
    for row, w in zip(table_rows, weights):
        for key in out:
            out[key] += w * row[key]
    return out


def structural_p_decompositions(n):
    """r^3 decompositions of P2 and the two cubic boundary polynomials."""
    n = int(n)
    t = structural_r3_table(n)
    f = Fraction
    # P2 = (20n - 8) C tr(sigma) + 16 tr(R_nu sigma); tr(sigma)'s r^3
    # coefficient is -H/45, so the C-weighted term lands in CH.
    p2 = _combine([t["curv_sigma"]], [f(16)])
    p2["CH"] += f(-(20 * n - 8), 45)
    p3_d = _combine([t["cube"], t["mixed"], t["pure_cube"]],
                    [f(40, 21), f(-88, 7), f(320, 21)])
    p3_n = _combine([t["cube"], t["mixed"], t["pure_cube"]],
                    [f(40, 3), f(8), f(32, 3)])
    return {"p2": p2, "p3_dirichlet": p3_d, "p3_neumann": p3_n}


P3_WEIGHTS = {
    "p3_dirichlet": (Fraction(40, 21), Fraction(-88, 7), Fraction(320, 21)),
    "p3_neumann": (Fraction(40, 3), Fraction(8), Fraction(32, 3)),
}


@dataclass
class BoundaryPolynomials:
    """Boundary coefficient series for one direction.

    ``p1`` is the constant interior-style combination; the r-dependent
    series keep powers -3..3.  ``r3`` maps each polynomial to its r^3
    coefficient; ``decomposition`` holds the structural rationals.
    """

    condition: str
    mode: str
    p1: float
    p2: TruncatedSeries
    p3_dirichlet: TruncatedSeries
    p3_neumann: TruncatedSeries
    r3: dict
    decomposition: dict = field(default_factory=dict)

    @property
    def p3(self):
        return self.p3_dirichlet if self.condition == "dirichlet" else self.p3_neumann


def boundary_polynomials(shape, jet, inv, condition="dirichlet",
                         mode="normalized", density=None, averaged_density=None):
    """Assemble the boundary polynomials from transverse trace series.

    ``mode='natural'`` multiplies each series by the direction's normalized
    density before coefficient extraction; 'normalized' divides the natural
    series by the averaged density, which collapses to the raw traces when
    the density is a radial function (the harmonic case).  The structural
    decomposition is attached in normalized mode only, where the frozen
    rationals apply.
    """
    if condition not in ("dirichlet", "neumann"):
        raise ValueError(f"unknown boundary condition {condition!r}")
    if mode not in ("natural", "normalized"):
        raise ValueError(f"unknown mode {mode!r}")
    n = inv.dim
    c = inv.c
    tr1 = shape.tr_sigma
    p2 = tr1.scale((20.0 * n - 8.0) * c) + shape.tr_curv_sigma.scale(16.0)
    cube = tr1 * tr1 * tr1
    mixed = tr1 * shape.tr_sigma_sq
    pure = shape.tr_sigma_cube
    series = {"p2": p2}
    for name, (w1, w2, w3) in P3_WEIGHTS.items():
        series[name] = cube.scale(float(w1)) + mixed.scale(float(w2)) \
            + pure.scale(float(w3))
    if mode == "natural":
        if density is None:
            raise ValueError("natural mode needs the direction's density series")
        series = {k: (s * density).truncate(3) for k, s in series.items()}
    elif density is not None and averaged_density is not None:
        factor = density * averaged_density.inverse()
        series = {k: (s * factor).truncate(3) for k, s in series.items()}
    r3 = {k: float(s.coefficient(3)) for k, s in series.items()}
    decomposition = structural_p_decompositions(n) if mode == "normalized" else {}
    return BoundaryPolynomials(condition=condition, mode=mode,
                               p1=a2_integrand(inv),
                               p2=series["p2"],
                               p3_dirichlet=series["p3_dirichlet"],
                               p3_neumann=series["p3_neumann"],
                               r3=r3, decomposition=decomposition)


@dataclass
class DecompositionFit:
    """Per-direction linear fit of an r^3 coefficient against tr R'R'.

    The slope is reported raw and snapped to a small rational; the
    structural intercept is the exact (C^3, CH, L) combination.
    """

    quantity: str
    degree: int
    basis: dict
    slope_fitted: float
    slope_snapped: Fraction
    intercept_fitted: float
    intercept_structural: float
    fit_residual: float

    def as_dict(self):
        return {
            "quantity": self.quantity,
            "degree": self.degree,
            "basis": {k: [v.numerator, v.denominator] for k, v in self.basis.items()},
            "slope_fitted": self.slope_fitted,
            "slope_snapped": [self.slope_snapped.numerator,
                              self.slope_snapped.denominator],
            "intercept_fitted": self.intercept_fitted,
            "intercept_structural": self.intercept_structural,
            "fit_residual": self.fit_residual,
        }


def _shape_data(geometry, u):
    jet = curvature_jet(geometry, u, order=3)
    a5 = jacobi_series(jet, order=5)
    dens = density_series(a5, trace_c6=harmonic_trace_c6(jet))
    shape = shape_trace_series(dens.a_series, jet, r4_trace=0.0)
    return jet, dens, shape


def boundary_decomposition(geometry, n_directions=16, seed=0,
                           mode="normalized", snap_limit=10000):
    """Fit the r^3 coefficients of P2/P3 against tr R'R' over directions.

    On a harmonic space only tr R'R' varies with direction, so each r^3
    coefficient is affine in it; the design degenerates on symmetric
    members (tr R'R' identically zero), which raises FitIllConditioned.
    """
    inv = point_invariants(geometry)
    rng = np.random.default_rng(seed)
    dirs = random_directions(geometry.dim, n_directions, rng)
    rows = {"p2": [], "p3_dirichlet": [], "p3_neumann": []}
    ps = []
    avg_density = None
    per_dir = []
    for u in dirs:
        jet, dens, shape = _shape_data(geometry, u)
        per_dir.append((jet, dens, shape, u))
        ps.append(float(np.trace(jet.matrices[1] @ jet.matrices[1])))
    if mode == "normalized":
        avg_coeffs = [np.mean([float(d.normalized.coefficient(k))
                               for _, d, _, _ in per_dir]) for k in range(7)]
        avg_density = TruncatedSeries(avg_coeffs, offset=0)
    for jet, dens, shape, u in per_dir:
        bp = boundary_polynomials(shape, jet, inv, mode=mode,
                                  density=dens.normalized,
                                  averaged_density=avg_density)
        for key in rows:
            rows[key].append(bp.r3[key])
    ps = np.asarray(ps)
    spread = ps.max() - ps.min()
    scale = max(abs(ps).max(), 1.0)
    if spread <= 1e-12 * scale:
        raise FitIllConditioned(
            "tr R'R' constant over sampled directions; slope unidentifiable")
    structural = structural_p_decompositions(geometry.dim)
    c3 = Fraction(inv.c).limit_denominator(10 ** 9) ** 3
    ch = Fraction(inv.c).limit_denominator(10 ** 9) \
        * Fraction(inv.h).limit_denominator(10 ** 9)
    lfrac = Fraction(inv.l).limit_denominator(10 ** 9)
    fits = {}
    design = np.stack([np.ones_like(ps), ps], axis=1)
    for key, values in rows.items():
        sol, *_ = np.linalg.lstsq(design, np.asarray(values), rcond=None)
        intercept, slope = float(sol[0]), float(sol[1])
        predicted = design @ sol
        resid = float(np.max(np.abs(predicted - np.asarray(values))))
        basis = structural[key] if structural else {}
        if basis:
            struct_intercept = float(basis["C3"] * c3 + basis["CH"] * ch
                                     + basis["L"] * lfrac)
        else:
            struct_intercept = math.nan
        fits[key] = DecompositionFit(
            quantity=key, degree=3, basis=basis,
            slope_fitted=slope,
            slope_snapped=Fraction(slope).limit_denominator(snap_limit),
            intercept_fitted=intercept,
            intercept_structural=struct_intercept,
            fit_residual=resid)
    return fits


def averaged_boundary_r3(geometry):
    """Direction-averaged r^3 coefficients of the boundary polynomials.

    Averaging the affine dependence on tr R'R' replaces it by its exact
    sphere average, so the result needs no fitting and exists on symmetric
    members where the per-direction fit degenerates.
    """
    inv = point_invariants(geometry)
    n = geometry.dim
    avg_p = 3.0 * inv.grad_r_sq / (n * (n + 2) * (n + 4))
    values = {"C3": inv.c ** 3, "CH": inv.c * inv.h, "L": inv.l,
              "TrRpRp": avg_p}
    struct = structural_p_decompositions(n)
    return {name: sum(float(coef) * values[slot]
                      for slot, coef in table.items())
            for name, table in struct.items()}


def p3_rank_check():
    """Exact rank of the Dirichlet/Neumann weight vectors (must be 2)."""
    from .exactlinalg import rank
    rows = [list(P3_WEIGHTS["p3_dirichlet"]), list(P3_WEIGHTS["p3_neumann"])]
    return rank(rows)


# -- intrinsic geodesic-sphere oracle -----------------------------------------


@dataclass
class SphereCurvatureSample:
    radius: float
    ric_sq: float
    riem_sq: float


def sphere_intrinsic_curvature(geometry, u, radius, steps_per_unit=4096):
    """|Ric|^2 and |R|^2 of the geodesic sphere through exp(r u).

    Integrates the Jacobi flow for the shape operator and conjugates the
    ambient curvature into the parallel frame, then applies the Gauss
    equation on the tangent space of the sphere (the orthogonal complement
    of the radial direction).
    """
    u = np.asarray(u, dtype=float)
    state = _integrate_full(geometry, u, radius, steps_per_unit)
    u_end, q_end, a_end, b_end = state
    sigma = b_end @ np.linalg.inv(a_end)
    # tangent basis of the sphere: complement of the (constant) radial
    # direction in the parallel frame
    basis = _complement_basis(u)
    frame = basis @ q_end.T
    rt = _conjugate4(geometry.r, frame)
    st = basis @ sigma @ basis.T
    gauss = rt + np.einsum('ad,bc->abcd', st, st) - np.einsum('ac,bd->abcd', st, st)
    ric = np.einsum('cabc->ab', gauss)
    return SphereCurvatureSample(radius=radius,
                                 ric_sq=float(np.sum(ric * ric)),
                                 riem_sq=float(np.sum(gauss * gauss)))


def _conjugate4(tensor, m):
    out = np.tensordot(m, tensor, axes=([1], [0]))
    out = np.tensordot(m, out, axes=([1], [1]))
    out = np.tensordot(m, out, axes=([1], [2]))
    out = np.tensordot(m, out, axes=([1], [3]))
    return out.transpose(3, 2, 1, 0)


def _integrate_full(geometry, u, r_target, steps_per_unit):
    from .radial import _flow_derivative
    n = geometry.dim
    steps = max(16, int(math.ceil(r_target * steps_per_unit)))
    h = r_target / steps
    state = (np.asarray(u, dtype=float).copy(), np.eye(n), np.zeros((n, n)),
             np.eye(n))
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
    return state


def _complement_basis(u):
    n = u.shape[0]
    full = np.eye(n)
    idx = int(np.argmax(np.abs(u)))
    cols = [full[i] for i in range(n) if i != idx]
    basis = []
    for v in cols:
        w = v - (v @ u) * u
        for b in basis:
            w = w - (w @ b) * b
        w = w / np.linalg.norm(w)
        basis.append(w)
    return np.stack(basis)


def alpha2_cross_difference(geometry, u1, u2, radii=None, powers=(2, 3, 4, 5),
                            steps_per_unit=1024):
    """Difference of the r^2 coefficients of |Ric^S|^2 across two directions.

    On a harmonic space the 1/r^4, 1/r^2 and constant parts of the sphere
    curvature norm are direction independent, so subtracting the sampled
    curves cancels them exactly and leaves the direction signal starting
    at r^2; fitting the difference sidesteps the dynamic-range problem of
    per-direction fits.  Returns (fitted difference, jet prediction), the
    prediction being (tr R'R'(u1) - tr R'R'(u2))/16.
    """
    if radii is None:
        radii = np.geomspace(0.08, 0.45, 8)
    radii = np.asarray(radii, dtype=float)
    delta = []
    for r in radii:
        s1 = sphere_intrinsic_curvature(geometry, u1, r, steps_per_unit)
        s2 = sphere_intrinsic_curvature(geometry, u2, r, steps_per_unit)
        delta.append(s1.ric_sq - s2.ric_sq)
    design = np.stack([radii ** p for p in powers], axis=1)
    coeffs, *_ = np.linalg.lstsq(design, np.asarray(delta), rcond=None)
    fitted = float(coeffs[powers.index(2)])
    jet1 = curvature_jet(geometry, np.asarray(u1, float), order=1).matrices[1]
    jet2 = curvature_jet(geometry, np.asarray(u2, float), order=1).matrices[1]
    predicted = (float(np.trace(jet1 @ jet1)) - float(np.trace(jet2 @ jet2))) / 16.0
    return fitted, predicted


def sphere_intrinsic_oracle(geometry, u, radii=None, powers=(-4, -2, 0, 1, 2, 3),
                            steps_per_unit=4096):
    """Fit the radial expansion of the intrinsic sphere curvature norms.

    Returns fitted coefficients of |Ric^S|^2 and |R^S|^2 at the given
    powers; the r^2 coefficient's direction-dependent part is the oracle
    for (1/16) tr R'R' (compare across directions, which cancels the
    unknown constant part).
    """
    if radii is None:
        radii = np.geomspace(0.05, 0.4, 6)
    radii = np.asarray(radii, dtype=float)
    if len(radii) < len(powers):
        raise FitIllConditioned("fewer radii than fitted powers")
    samples = [sphere_intrinsic_curvature(geometry, u, r, steps_per_unit)
               for r in radii]
    design = np.stack([radii ** p for p in powers], axis=1)
    cond = np.linalg.cond(design)
    if not np.isfinite(cond) or cond > 1e12:
        raise FitIllConditioned(f"fit design condition number {cond:.2e}")
    ric_coeffs, *_ = np.linalg.lstsq(design, [s.ric_sq for s in samples], rcond=None)
    riem_coeffs, *_ = np.linalg.lstsq(design, [s.riem_sq for s in samples], rcond=None)
    return {"powers": list(powers),
            "ric_sq": [float(x) for x in ric_coeffs],
            "riem_sq": [float(x) for x in riem_coeffs]}
