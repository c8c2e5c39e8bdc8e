"""Exception hierarchy for the toolkit.

Every failure mode named by a module contract maps to one subclass so
callers (and the sweep driver, which converts per-point failures into
flagged rows) can discriminate without string matching.
"""


class SapoptError(Exception):
    """Base class for all toolkit errors."""


class GridMismatchError(SapoptError):
    """Operands live on different grids."""


class DegenerateStateError(SapoptError):
    """State has zero (or numerically zero) norm."""


class DomainError(SapoptError):
    """Requested object does not fit inside the grid / parameter domain."""


class GeometryError(SapoptError):
    """Triple-well structure lost (wells merged, critical points missing)."""


class BoundaryLeakError(SapoptError):
    """Probability reached the grid edge; the box is too small."""


class ConvergenceError(SapoptError):
    """Iteration exhausted its budget without meeting the tolerance."""


class CollapseError(SapoptError):
    """Attractive condensate shrinking below grid resolution."""


class SingularityError(SapoptError):
    """Confinement-induced resonance pole in the 1D coupling constant."""


class SeparationError(SapoptError):
    """Wells not separated enough to assign atoms to individual wells."""


class DivergentBoundError(SapoptError):
    """Adiabaticity bound diverges (tunneling rate below the floor)."""


class ObjectiveError(SapoptError):
    """A cost functional could not be evaluated on the trajectory."""


class SchemaError(SapoptError):
    """Records do not conform to the declared CSV schema."""


class ConfigError(SapoptError):
    """Configuration failed to parse or validate."""


class RunLockError(SapoptError):
    """Output directory is locked by another run."""
