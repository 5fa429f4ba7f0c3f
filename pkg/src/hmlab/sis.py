"""Exact rational bookkeeping for curvature-identity vectors.

Identities among the cubic curvature scalars live in a fixed six-slot
coordinate system B = (C^3, CH, L, R_hat, R_ring, |grad R|^2).  The first
three slots are spectrally determined constants, the last three carry the
genuinely new content; reports surface that split.  All linear algebra is
over Fraction, so ranks and memberships are exact, never thresholded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (DegenerateGram, DegreeMismatch, DegreeTooHigh,
                     SymbolAbsent)
from .exactlinalg import rank, rref, solve

BASIS = ("C3", "CH", "L", "R_hat", "R_ring", "grad_R_sq")
_INDEX = {name: i for i, name in enumerate(BASIS)}
CONST_SLOTS = 3


def _fr(x):
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class IdentityVector:
    """One linear identity over the six-slot basis.

    ``degree`` is the radial expansion degree the identity came from, when
    it has one; sphere-derived degrees are even, ball-derived odd (the
    family members have even dimension, which fixes the parity).  ``origin``
    is 'sphere' or 'ball' for graded bookkeeping.
    """

    name: str
    coeffs: tuple
    degree: object = None
    origin: str = "sphere"
    provenance: str = "canonical"

    def __post_init__(self):
        if len(self.coeffs) != len(BASIS):
            raise ValueError(f"expected {len(BASIS)} coefficients")
        object.__setattr__(self, "coeffs", tuple(_fr(c) for c in self.coeffs))
        if self.degree is not None:
            parity = self.degree % 2
            expected = 0 if self.origin == "sphere" else 1
            if parity != expected:
                raise ValueError(
                    f"{self.origin} identity {self.name!r} must have "
                    f"{'even' if expected == 0 else 'odd'} degree, got {self.degree}")

    @property
    def const_terms(self):
        return self.coeffs[:CONST_SLOTS]

    @property
    def main_terms(self):
        return self.coeffs[CONST_SLOTS:]

    def evaluate(self, values):
        """Contract against numeric basis values (dict keyed like BASIS)."""
        return float(sum(float(c) * float(values[name])
                         for c, name in zip(self.coeffs, BASIS)))

    def as_dict(self):
        return {
            "name": self.name,
            "degree": self.degree,
            "origin": self.origin,
            "provenance": self.provenance,
            "coeffs": {name: [c.numerator, c.denominator]
                       for name, c in zip(BASIS, self.coeffs)},
            "const_terms": {name: [c.numerator, c.denominator]
                            for name, c in zip(BASIS[:CONST_SLOTS], self.const_terms)},
        }


@dataclass
class IdentitySpace:
    dim_space: int
    generators: list = field(default_factory=list)

    def add(self, vec):
        self.generators.append(vec)

    def matrix(self):
        return [list(v.coeffs) for v in self.generators]


def density_vector(n):
    """L-degree identity with the quadratic-trace relation folded in.

    Starts life as the sixth normalized-density coefficient being
    spectrally determined; after eliminating |R|^2 the constant block is
    (-64n, 96n(n+2), -n(n+2)(n+4)) against main block (112, -32, -27).
    """
    n = int(n)
    return IdentityVector(
        name="density-r6",
        coeffs=(Fraction(-64 * n), Fraction(96 * n * (n + 2)),
                Fraction(-n * (n + 2) * (n + 4)),
                Fraction(112), Fraction(-32), Fraction(-27)),
        degree=6)


def ricci_square_vector(n):
    """Second-order sphere identity: nC^3 - R_hat/4 + 2 R_ring is determined."""
    n = int(n)
    return IdentityVector(
        name="ricci-square-r2",
        coeffs=(Fraction(n), Fraction(0), Fraction(0),
                Fraction(-1, 4), Fraction(2), Fraction(0)),
        degree=2)


def gradient_square_vector(n):
    """|grad R|^2 itself is second-order spectrally determined."""
    return IdentityVector(
        name="gradient-square-r2",
        coeffs=(Fraction(0),) * 5 + (Fraction(1),),
        degree=2)


def canonical_generators(n):
    space = IdentitySpace(dim_space=int(n))
    space.add(density_vector(n))
    space.add(ricci_square_vector(n))
    space.add(gradient_square_vector(n))
    return space


def lichnerowicz_vector(n):
    """The closed-manifold integral identity, constants folded through H.

    2C|R|^2 - R_hat - 4 R_ring + |grad R|^2 = 0 pointwise on the family;
    substituting |R|^2 = (2n/3)((n+2)H - C^2) puts 2*(2n/3)(n+2) on CH.
    No radial degree: it does not arise as an expansion coefficient.
    """
    n = int(n)
    return IdentityVector(
        name="lichnerowicz",
        coeffs=(Fraction(-4 * n, 3), Fraction(4 * n, 3) * (n + 2), Fraction(0),
                Fraction(-1), Fraction(-4), Fraction(1)),
        degree=None)


def theta_power_vector(n, k):
    """Sixth coefficient of the k-th density power as an identity vector.

    Multinomial bookkeeping: [r^6](theta^k) = k*A6 + k(k-1)*A2*A4
    + binom(k,3)*A2^3, everything expressed over (C^3, CH, L).
    """
    n = int(n)
    k = int(k)
    if k < 1:
        raise ValueError("power must be positive")
    a6 = {"C3": Fraction(-1, 1296), "CH": Fraction(1, 1080),
          "L": Fraction(-1, 90720)}
    a2a4 = {"C3": Fraction(-1, 432), "CH": Fraction(1, 1080), "L": Fraction(0)}
    a2cube = {"C3": Fraction(-1, 216), "CH": Fraction(0), "L": Fraction(0)}
    binom3 = Fraction(k * (k - 1) * (k - 2), 6)
    coeffs = []
    for slot in ("C3", "CH", "L"):
        coeffs.append(k * a6[slot] + k * (k - 1) * a2a4[slot]
                      + binom3 * a2cube[slot])
    coeffs += [Fraction(0), Fraction(0), Fraction(0)]
    return IdentityVector(name=f"density-power-{k}-r6", coeffs=tuple(coeffs),
                          degree=6, provenance=f"theta_power:{k}")


def extended_generators(n, powers=(1, 2, 3)):
    space = canonical_generators(n)
    for k in powers:
        space.add(theta_power_vector(n, k))
    return space


@dataclass
class MembershipReport:
    rank_generators: int
    rank_with_candidate: int
    member: bool
    combination: object
    graded: bool
    pivot_columns: tuple
    main_submatrix: list
    main_submatrix_det: Fraction
    generators_used: list

    def as_dict(self):
        return {
            "rank_generators": self.rank_generators,
            "rank_with_candidate": self.rank_with_candidate,
            "member": self.member,
            "combination": None if self.combination is None else
                [[c.numerator, c.denominator] for c in self.combination],
            "graded": self.graded,
            "pivot_columns": list(self.pivot_columns),
            "main_submatrix": [[[c.numerator, c.denominator] for c in row]
                               for row in self.main_submatrix],
            "main_submatrix_det": [self.main_submatrix_det.numerator,
                                   self.main_submatrix_det.denominator],
            "generators_used": self.generators_used,
        }


def _main_det(rows):
    from .exactlinalg import det
    if len(rows) == 3:
        return det([list(r) for r in rows])
    return Fraction(0)


def rank_and_membership(space, candidate, graded=False):
    """Exact span test of ``candidate`` against the generator rows.

    Graded mode restricts the span to generators sharing the candidate's
    degree and origin; a candidate without a degree is never a graded
    member.  The main-term submatrix over (R_hat, R_ring, |grad R|^2) is
    attached because the determined-modulo-constants argument runs through
    its invertibility.
    """
    gens = list(space.generators)
    if graded:
        usable = [g for g in gens
                  if candidate.degree is not None
                  and g.degree == candidate.degree
                  and g.origin == candidate.origin]
    else:
        usable = gens
    rows = [list(g.coeffs) for g in usable]
    if rows:
        _, pivots = rref([row[:] for row in rows])
    else:
        pivots = ()
    r0 = len(pivots)
    from .exactlinalg import in_span
    if rows:
        member, combo = in_span(rows, list(candidate.coeffs))
    else:
        member, combo = (not any(candidate.coeffs)), None
    r1 = r0 if member else rank(rows + [list(candidate.coeffs)])
    main_rows = [list(g.main_terms) for g in usable]
    return MembershipReport(
        rank_generators=r0,
        rank_with_candidate=r1,
        member=member,
        combination=combo,
        graded=graded,
        pivot_columns=tuple(pivots),
        main_submatrix=main_rows,
        main_submatrix_det=_main_det(main_rows),
        generators_used=[g.name for g in usable])


def eliminate(target, tool, symbol, mode="proper"):
    """Cancel one basis symbol of ``target`` using ``tool``.

    Proper mode insists both vectors carry the same radial degree, which is
    what licenses combining expansion coefficients; rudimentary mode
    combines anyway and stamps the provenance, leaving the degree unset.
    """
    if symbol not in _INDEX:
        raise KeyError(f"unknown symbol {symbol!r}")
    idx = _INDEX[symbol]
    if not tool.coeffs[idx]:
        raise SymbolAbsent(f"tool {tool.name!r} has no {symbol} term")
    if mode == "proper":
        if target.degree is None or tool.degree is None \
                or target.degree != tool.degree:
            raise DegreeMismatch(
                f"cannot properly combine degree {target.degree} with "
                f"degree {tool.degree}")
        degree = target.degree
        provenance = "proper-elimination"
    elif mode == "rudimentary":
        degree = None
        provenance = "rudimentary-elimination"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    lam = target.coeffs[idx] / tool.coeffs[idx]
    coeffs = tuple(t - lam * s for t, s in zip(target.coeffs, tool.coeffs))
    origin = target.origin if target.origin == tool.origin else "mixed"
    if origin == "mixed":
        degree = None
    return IdentityVector(
        name=f"{target.name}-minus-{symbol}-of-{tool.name}",
        coeffs=coeffs, degree=degree, origin=origin if degree is not None
        else target.origin, provenance=provenance)


# -- noise projection ----------------------------------------------------------


def euclidean_gram(vectors):
    return [[sum(a * b for a, b in zip(v.coeffs, w.coeffs)) for w in vectors]
            for v in vectors]


def moment_gram(geometry, vectors):
    """Gram from exact sphere moments of the slot realizations.

    The constant slots realize as constant functions, the (C^3, CH, L)
    slots as degree-six direction polynomials.  Products of two degree-six
    realizations exceed the implemented moment engine, so any pair of
    vectors both touching the constant-block slots is out of reach; a pair
    living purely in the constant realizations collapses to a rank-one
    bilinear form.
    """
    from .invariants import point_invariants
    pi = point_invariants(geometry)
    const_values = {"R_hat": pi.r_hat, "R_ring": pi.r_ring,
                    "grad_R_sq": pi.grad_r_sq}

    def poly_degree(vec):
        return 6 if any(vec.coeffs[:CONST_SLOTS]) else 0

    gram = []
    for v in vectors:
        row = []
        for w in vectors:
            if poly_degree(v) + poly_degree(w) > 8:
                raise DegreeTooHigh(
                    "product of two degree-6 slot realizations needs "
                    "degree-12 sphere moments")
            acc = 0.0
            for ci, ni in zip(v.coeffs, BASIS):
                if not ci:
                    continue
                for cj, nj in zip(w.coeffs, BASIS):
                    if not cj:
                        continue
                    acc += float(ci) * float(cj) \
                        * _realization_product_average(geometry, pi, ni, nj,
                                                       const_values)
            row.append(acc)
        gram.append(row)
    return gram


def _realization_product_average(geometry, pi, ni, nj, const_values):
    if ni in const_values and nj in const_values:
        return const_values[ni] * const_values[nj]
    if ni in const_values or nj in const_values:
        const = const_values[ni] if ni in const_values else const_values[nj]
        poly = nj if ni in const_values else ni
        return const * _poly_average(geometry, poly)
    raise DegreeTooHigh("degree-12 moment requested")


_POLY_AVG_CACHE = {}


def _poly_average(geometry, slot):
    from .invariants import sphere_average, c_tensor, h_tensor
    key = (id(geometry), slot)
    if key in _POLY_AVG_CACHE:
        return _POLY_AVG_CACHE[key]
    if slot == "C3":
        tens = c_tensor(geometry)
        prod = np.einsum('ab,cd,ef->abcdef', tens, tens, tens)
        val = sphere_average(prod)
    elif slot == "CH":
        c2 = c_tensor(geometry)
        h4 = h_tensor(geometry)
        prod = np.einsum('ab,cdef->abcdef', c2, h4)
        val = sphere_average(prod)
    elif slot == "L":
        from .invariants import r_cube_tensor, grad_quad_tensor
        val = 32.0 * sphere_average(r_cube_tensor(geometry)) \
            - 9.0 * sphere_average(grad_quad_tensor(geometry))
    else:
        raise KeyError(slot)
    _POLY_AVG_CACHE[key] = val
    return val


@dataclass
class NoiseReport:
    gram_kind: str
    coefficients: list
    projection: tuple
    residual: tuple
    noise_norm_sq: Fraction

    def as_dict(self):
        return {
            "gram_kind": self.gram_kind,
            "coefficients": [[c.numerator, c.denominator]
                             for c in self.coefficients],
            "projection": {n: [c.numerator, c.denominator]
                           for n, c in zip(BASIS, self.projection)},
            "residual": {n: [c.numerator, c.denominator]
                         for n, c in zip(BASIS, self.residual)},
            "noise_norm_sq": [self.noise_norm_sq.numerator,
                              self.noise_norm_sq.denominator],
        }


def noise_wave(candidate, space, gram=None, gram_kind="euclidean"):
    """Orthogonal split of ``candidate`` against the generator span.

    Normal equations are solved exactly over Fraction; a singular Gram
    matrix raises instead of being regularized, because a pseudo-inverse
    would silently pick a representative the theory cannot justify.
    """
    gens = space.generators
    if gram is None:
        gram = euclidean_gram(gens)
        gram_kind = "euclidean"
    g = [[_fr(x) for x in row] for row in gram]
    from .exactlinalg import det
    if not gens or not det([row[:] for row in g]):
        raise DegenerateGram("generator gram matrix is singular")
    rhs = [sum(a * b for a, b in zip(v.coeffs, candidate.coeffs))
           for v in gens]
    sol = solve([row[:] for row in g], list(rhs))
    if sol is None:
        raise DegenerateGram("normal equations inconsistent")
    projection = [Fraction(0)] * len(BASIS)
    for x, v in zip(sol, gens):
        for i, c in enumerate(v.coeffs):
            projection[i] += x * c
    residual = tuple(c - p for c, p in zip(candidate.coeffs, projection))
    norm_sq = sum(r * r for r in residual)
    return NoiseReport(gram_kind=gram_kind, coefficients=list(sol),
                       projection=tuple(projection), residual=residual,
                       noise_norm_sq=norm_sq)


# -- demo vectors for the elimination transcript -------------------------------


def ball_boundary_vector(n):
    """Sphere-averaged boundary r^3 data cast as a ball-problem identity.

    Uses the structural decomposition of the curvature-weighted trace
    polynomial with tr R'R' replaced by its exact average; lives at the
    odd ball degree n + 1.
    """
    n = int(n)
    avg_p = Fraction(3, n * (n + 2) * (n + 4))
    return IdentityVector(
        name=f"ball-boundary-r{n + 1}",
        coeffs=(Fraction(0), Fraction(-(20 * n - 8), 45), Fraction(-1, 90),
                Fraction(0), Fraction(0), avg_p * Fraction(1, 6)),
        degree=n + 1, origin="ball", provenance="boundary-demo")


def ball_volume_vector(n):
    """Sixth density coefficient relabeled at the ball volume degree n + 5."""
    n = int(n)
    return IdentityVector(
        name=f"ball-volume-r{n + 5}",
        coeffs=(Fraction(-1, 1296), Fraction(1, 1080), Fraction(-1, 90720),
                Fraction(0), Fraction(0), Fraction(0)),
        degree=n + 5, origin="ball", provenance="volume-demo")
