"""Exception types shared across the toolkit."""


class CableMFError(Exception):
    """Base class for all toolkit errors."""


class DegeneratePeriodicity(CableMFError):
    """Core and armor lay lengths coincide; no relative twist exists."""


class NoPeriodicLength(CableMFError):
    """Multi-layer wire-shift search found no admissible cell length."""


class MeshFailure(CableMFError):
    """Cross-section triangulation degenerated at the requested resolution."""


class InvertedElement(CableMFError):
    """Extrusion produced a tetrahedron with non-positive volume."""


class NonCongruentFaces(CableMFError):
    """End faces of a volume mesh do not match under the cell rotation."""

    def __init__(self, message: str, worst_residual: float = float("nan")):
        super().__init__(message)
        self.worst_residual = worst_residual


class ParseError(CableMFError):
    """Malformed input file."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SingularMaterial(CableMFError):
    """Material properties outside the admissible range for assembly."""


class FactorizationFailure(CableMFError):
    """Sparse factorization failed (suspect gauge regularization)."""


class NonConvergence(CableMFError):
    """Fixed-point permeability iteration hit its iteration cap."""

    def __init__(self, message: str, solution=None, iterations: int = 0):
        super().__init__(message)
        self.solution = solution
        self.iterations = iterations


class PointOutsideDomain(CableMFError):
    """Probe point lies outside the physical (non-stretched) domain."""


class PointOnFilament(CableMFError):
    """Field requested on a source filament."""


class OutOfValidityRange(CableMFError):
    """Emission fit evaluated outside its fitted (I, r) envelope."""


class FitDivergence(CableMFError):
    """Nonlinear least squares failed to produce a usable fit."""

    def __init__(self, message: str, stage: int = 0, residual_trace=None):
        super().__init__(message)
        self.stage = stage
        self.residual_trace = residual_trace or []


class ShapeMismatch(CableMFError):
    """Profile sets do not share sample locations."""
