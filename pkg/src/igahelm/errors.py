"""Exception types shared across the solver."""


class IgaError(Exception):
    """Base class for all solver errors."""


class RefinementError(IgaError):
    """Knot insertion would violate the multiplicity cap or leave (0, 1)."""


class SingularGeometryError(IgaError):
    """The parametrization Jacobian is (numerically) singular at a point."""

    def __init__(self, xi, eta, det):
        self.xi = xi
        self.eta = eta
        self.det = det
        super().__init__(
            f"singular geometry at (xi, eta) = ({xi:.6g}, {eta:.6g}): det = {det:.3e}"
        )


class InterpolationError(IgaError):
    """A boundary collocation system failed to solve to tolerance."""


class SolverError(IgaError):
    """The linear solve did not reach the required residual."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class NetFormatError(IgaError):
    """A control-net file is malformed or violates net invariants."""


class ConstructionError(IgaError):
    """A built-in domain cannot be constructed at the requested size."""


class ConfigError(IgaError):
    """An experiment configuration is invalid."""
