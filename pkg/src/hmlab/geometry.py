"""Left-invariant metric geometry from structure constants.

Everything lives in a fixed orthonormal frame.  Structure constants
``c[i, j, m]`` give the e_m-component of [e_i, e_j]; the connection
``gamma[i, j, m]`` gives the e_m-component of the covariant derivative of
e_j along e_i.  Curvature sign convention: the Jacobi operator of a unit
sphere is the (nonnegative) projection orthogonal to the direction, so
solvable Damek-Ricci groups get negative Ricci.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clifford import build_j_map
from .errors import NotHType, OrderUnsupported


@dataclass
class MetricLieAlgebra:
    """Structure constants of a metric Lie algebra in an orthonormal frame."""

    c: np.ndarray

    @property
    def dim(self):
        return self.c.shape[0]

    def bracket(self, x, y):
        return np.einsum('i,j,ijm->m', x, y, self.c)


@dataclass
class DirectionalCurvatureJet:
    """Taylor matrices of the Jacobi operator along the geodesic from ``u``.

    ``matrices[k]`` is the k-th derivative (not divided by k!) of the
    operator in a parallel frame at arc length zero.
    """

    u: np.ndarray
    matrices: list

    @property
    def order(self):
        return len(self.matrices) - 1

    def taylor_coefficient(self, k):
        """Matrix coefficient of r**k in the operator's Taylor series."""
        out = self.matrices[k].copy()
        for j in range(2, k + 1):
            out /= j
        return out


def jacobi_defect(c):
    """Largest violation of the Jacobi identity; zero for a Lie algebra."""
    t = np.einsum('ijm,mkl->ijkl', c, c)
    cyc = t + np.einsum('jkil->ijkl', t) + np.einsum('kijl->ijkl', t)
    return float(np.max(np.abs(cyc)))


def clifford_defect(j_list):
    """Largest violation of J_a J_b + J_b J_a = -2 delta_ab id."""
    worst = 0.0
    dim = j_list[0].shape[0]
    eye = np.eye(dim)
    for a, ja in enumerate(j_list):
        for b, jb in enumerate(j_list):
            target = -2.0 * eye if a == b else 0.0 * eye
            worst = max(worst, float(np.max(np.abs(ja @ jb + jb @ ja - target))))
    return worst


def build_htype_algebra(jmap):
    """Two-step nilpotent algebra of Heisenberg type from a J-map.

    Basis order: the ``k`` module directions, then the ``l`` center
    directions.  Raises :class:`NotHType` when the J-matrices fail the
    Clifford relations.
    """
    j_list = jmap.all_j()
    if clifford_defect(j_list) > 1e-12:
        raise NotHType("J-matrices do not satisfy the Clifford relations")
    k = jmap.total_dim
    l = jmap.center_dim
    n = k + l
    c = np.zeros((n, n, n))
    for a, ja in enumerate(j_list):
        # <[X_i, X_j], Z_a> = <J_a X_i, X_j> = (J_a)[j, i]
        c[:k, :k, k + a] = ja.T
    return MetricLieAlgebra(c=c)


def build_damek_ricci(jmap):
    """Solvable rank-one extension of the H-type algebra of ``jmap``.

    Adds a unit generator A (last basis slot) with [A, X] = X/2 on the
    module part and [A, Z] = Z on the center.
    """
    nil = build_htype_algebra(jmap)
    k = jmap.total_dim
    l = jmap.center_dim
    n = k + l + 1
    c = np.zeros((n, n, n))
    c[:k + l, :k + l, :k + l] = nil.c
    a_idx = n - 1
    for i in range(k):
        c[a_idx, i, i] = 0.5
        c[i, a_idx, i] = -0.5
    for z in range(k, k + l):
        c[a_idx, z, z] = 1.0
        c[z, a_idx, z] = -1.0
    return MetricLieAlgebra(c=c)


def scale_bracket(algebra, i, j, factor):
    """Copy of ``algebra`` with the single bracket [e_i, e_j] rescaled.

    Rescaling a module-module bracket of an H-type algebra preserves the
    Jacobi identity (the scaled bracket lands in the center, which brackets
    trivially with the module) but destroys the Clifford relations.
    """
    c = algebra.c.copy()
    c[i, j, :] *= factor
    c[j, i, :] *= factor
    return MetricLieAlgebra(c=c)


def levi_civita(algebra):
    """Connection coefficients of the left-invariant metric.

    gamma[i, j, m] = (c[i,j,m] - c[j,m,i] + c[m,i,j]) / 2; antisymmetric in
    (j, m) by metric compatibility, and gamma[i,j] - gamma[j,i] recovers c.
    """
    c = algebra.c
    return 0.5 * (c - np.einsum('jmi->ijm', c) + np.einsum('mij->ijm', c))


def curvature(gamma, c):
    """Curvature tensor R[i, j, a, d] = <R(e_i, e_j) e_a, e_d>.

    Frame-constant coefficients, so the derivative terms of the usual
    formula drop and only the quadratic and bracket terms remain.
    """
    r = np.einsum('jam,imd->ijad', gamma, gamma)
    r -= np.einsum('iam,jmd->ijad', gamma, gamma)
    r -= np.einsum('ijm,mad->ijad', c, gamma)
    return r


def ricci(r):
    return np.einsum('cabc->ab', r)


def sectional(r, x, y):
    """Sectional curvature of the plane spanned by orthonormal x, y."""
    return float(np.einsum('ijcd,i,j,c,d->', r, x, y, y, x))


def covariant_derivative(gamma, tensor):
    """One covariant derivative of a frame-constant covariant tensor.

    Output slot 0 is the derivative direction; the frame-constant component
    functions contribute nothing, so each slot picks up a -gamma correction.
    """
    rank = tensor.ndim
    out = np.zeros((gamma.shape[0],) + tensor.shape)
    for s in range(rank):
        t = np.tensordot(gamma, tensor, axes=([2], [s]))
        out -= np.moveaxis(t, 1, s + 1)
    return out


class Geometry:
    """A homogeneous geometry probed through one base point.

    Bundles the connection and curvature in the frame at the base point and
    caches the first two full covariant derivatives of curvature.  For
    group geometries these are built from structure constants; the constant
    curvature model prescribes curvature directly with a parallel frame.
    """

    def __init__(self, gamma, r, algebra=None, name="geometry"):
        self.gamma = np.asarray(gamma)
        self.r = np.asarray(r)
        self.algebra = algebra
        self.name = name
        self._s1 = None
        self._s2 = None

    @property
    def dim(self):
        return self.r.shape[0]

    @property
    def nabla_r(self):
        if self._s1 is None:
            self._s1 = covariant_derivative(self.gamma, self.r)
        return self._s1

    @property
    def nabla2_r(self):
        if self._s2 is None:
            self._s2 = covariant_derivative(self.gamma, self.nabla_r)
        return self._s2

    def jacobi_operator(self, u):
        return np.einsum('iabj,a,b->ij', self.r, u, u)


def geometry_from_algebra(algebra, name="group"):
    gamma = levi_civita(algebra)
    return Geometry(gamma=gamma, r=curvature(gamma, algebra.c),
                    algebra=algebra, name=name)


def constant_curvature_geometry(dim, kappa=1.0, name=None):
    """Space form model: prescribed curvature, parallel frame along rays."""
    eye = np.eye(dim)
    r = kappa * (np.einsum('bc,ad->abcd', eye, eye) - np.einsum('ac,bd->abcd', eye, eye))
    if name is None:
        name = f"space-form(kappa={kappa})"
    return Geometry(gamma=np.zeros((dim, dim, dim)), r=r, name=name)


def damek_ricci_geometry(center_dim, pos, neg, name=None):
    """Damek-Ricci geometry for a center of dimension ``center_dim`` and
    module multiplicity (pos, neg)."""
    jmap = build_j_map(center_dim, pos, neg)
    algebra = build_damek_ricci(jmap)
    if name is None:
        name = f"DR(l={center_dim}; {pos},{neg})"
    geo = geometry_from_algebra(algebra, name=name)
    geo.jmap = jmap
    geo.module_dim = jmap.total_dim
    geo.center_dim = center_dim
    return geo


def curvature_jet(geometry, u, order=3):
    """Derivatives of the Jacobi operator along the geodesic from ``u``.

    Returns matrices [R, R', R'', R'''][:order+1] in a parallel frame.  The
    third derivative is assembled directionally from the second covariant
    derivative so the rank-seven array never materializes.
    """
    if order < 0 or order > 3:
        raise OrderUnsupported(f"jet order {order} outside supported range 0..3")
    u = np.asarray(u, dtype=float)
    mats = [geometry.jacobi_operator(u)]
    if order >= 1:
        s1 = geometry.nabla_r
        mats.append(np.einsum('ciabj,c,a,b->ij', s1, u, u, u))
    if order >= 2:
        s2 = geometry.nabla2_r
        mats.append(np.einsum('cdiabj,c,d,a,b->ij', s2, u, u, u, u))
    if order >= 3:
        s2 = geometry.nabla2_r
        gamma = geometry.gamma
        gu = np.einsum('g,gbm->bm', u, gamma)
        v = np.einsum('a,am->m', u, gu)
        # u . (third covariant derivative), contracted on the two earlier
        # derivative slots, without building the rank-7 tensor
        u2 = np.einsum('cdiabj,c,d->iabj', s2, u, u)
        t3 = np.zeros_like(u2)
        for s in range(4):
            t = np.tensordot(gu, u2, axes=([1], [s]))
            t3 -= np.moveaxis(t, 0, s)
        t3 -= np.einsum('m,d,mdiabj->iabj', v, u, s2)
        t3 -= np.einsum('c,m,cmiabj->iabj', u, v, s2)
        mats.append(np.einsum('iabj,a,b->ij', t3, u, u))
    return DirectionalCurvatureJet(u=u, matrices=mats)
