"""Exception types shared across the package."""


class PmelabError(Exception):
    """Base class for all pmelab errors."""


class ParameterError(PmelabError, ValueError):
    """A scalar argument is outside its admissible range."""


class DomainError(PmelabError, ValueError):
    """A field value is outside the domain of the requested transform."""


class ShapeError(PmelabError, ValueError):
    """Mismatched array lengths between fields, meshes or vectors."""


class MeshConstructionError(PmelabError):
    """The potential could not be turned into a valid weighted mesh."""


class ConfigError(PmelabError, ValueError):
    """A run configuration is malformed; message carries the field path."""


class ZeroFieldError(PmelabError, ValueError):
    """A log-based functional was requested for an identically zero field."""


class SolverError(PmelabError):
    """A time step failed; carries how far the integration got."""

    def __init__(self, message, t_reached=None, partial=None):
        super().__init__(message)
        self.t_reached = t_reached
        self.partial = partial


class StabilityError(SolverError):
    """An explicit step produced a value below the negativity tolerance."""

    def __init__(self, message, dt=None, cell=None, t_reached=None, partial=None):
        super().__init__(message, t_reached=t_reached, partial=partial)
        self.dt = dt
        self.cell = cell


class NewtonError(SolverError):
    """Newton iteration for an implicit step did not converge."""

    def __init__(self, message, residual=None, iterations=None, t_reached=None, partial=None):
        super().__init__(message, t_reached=t_reached, partial=partial)
        self.residual = residual
        self.iterations = iterations


class ConvergenceError(PmelabError):
    """Eigenvalue iteration stagnated; carries the last Rayleigh quotient."""

    def __init__(self, message, rayleigh=None, iterations=None):
        super().__init__(message)
        self.rayleigh = rayleigh
        self.iterations = iterations
