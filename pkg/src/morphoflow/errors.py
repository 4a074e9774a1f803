"""Exception types shared across the package."""


class MorphoflowError(Exception):
    """Base class for all package errors."""


class ParameterError(MorphoflowError, ValueError):
    """A scalar or structural argument is out of its admissible range."""


class InvalidMeshError(MorphoflowError, ValueError):
    """Mesh arrays violate a structural invariant."""


class DegenerateDeformationError(MorphoflowError, RuntimeError):
    """A deformation state stopped being orientation preserving (jac <= 0)."""


class DiffeomorphismError(DegenerateDeformationError):
    """Raised by the simulation loop when a flow step loses invertibility.

    Carries the trajectory computed so far in ``partial_trajectory``.
    """

    def __init__(self, message, partial_trajectory=None):
        super().__init__(message)
        self.partial_trajectory = partial_trajectory


class NumericalError(MorphoflowError, RuntimeError):
    """A linear solve failed or did not reach the required accuracy."""


class AssemblyError(MorphoflowError, RuntimeError):
    """An assembled operator violates a structural property (e.g. SPD)."""


class ConfigError(MorphoflowError, ValueError):
    """Configuration file is missing, malformed, or out of range."""
