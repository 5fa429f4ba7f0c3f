"""Exception taxonomy shared by all hmlab modules."""


class HmlabError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedCenterDimension(HmlabError):
    """Clifford module requested for a center dimension outside {1, 2, 3}."""


class InvalidMultiplicity(HmlabError):
    """J-map multiplicities (a, b) must be non-negative with a + b >= 1."""


class NotHType(HmlabError):
    """Input algebra violates the Clifford condition J_Z^2 = -|Z|^2 id."""


class OrderUnsupported(HmlabError):
    """Derivative or series order beyond what the jet machinery supplies."""


class DegreeTooHigh(HmlabError):
    """Exact sphere averaging limited to polynomial degree <= 8."""


class SingularSeries(HmlabError):
    """Series inverse/division with a non-invertible leading coefficient."""


class ZeroLeadingCoefficient(HmlabError):
    """Volume recursion requires A_0 != 0."""


class StepFailure(HmlabError):
    """ODE integration diverged or produced non-finite samples."""


class DegreeMismatch(HmlabError):
    """Proper elimination attempted across unequal (or absent) degrees."""


class SymbolAbsent(HmlabError):
    """Elimination tool has zero coefficient for the requested symbol."""


class DegenerateGram(HmlabError):
    """Inner product is singular on the span of the generators."""


class ZeroLatticeVector(HmlabError):
    """Fourier restriction requires a nonzero lattice vector."""


class NotComplexStructure(HmlabError):
    """J_Z^2 != -id, so Z does not induce a complex structure on X."""


class DegenerateBoundary(HmlabError):
    """Robin data (A, B) does not define a boundary condition."""


class ConvergenceFailure(HmlabError):
    """Grid refinement disagrees beyond tolerance."""


class SpectraDiffer(HmlabError):
    """Skew spectra of the two J-maps are not equal as multisets."""


class FamilyMismatch(HmlabError):
    """Operation requires family members sharing (l, a+b)."""


class FitIllConditioned(HmlabError):
    """Radial coefficient fit has a numerically singular design matrix."""
