"""Exception hierarchy shared by all modules."""


class NSKError(Exception):
    """Base class for every error raised by the package."""


class DomainError(NSKError, ValueError):
    """Density outside the domain of a pressure law."""


class QuadratureError(NSKError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ParamError(NSKError, ValueError):
    """Viscosity/capillarity coefficients violate the admissibility condition."""


class CaseError(NSKError, ValueError):
    """Operation undefined for the eigenvalue case of the parameters."""


class NodeError(NSKError, ValueError):
    """Too few quadrature nodes requested."""


class ShapeError(NSKError, ValueError):
    """Array or state dimensions are inconsistent."""


class VacuumError(NSKError):
    """Density dropped below the configured floor."""


class RegimeError(NSKError):
    """Parameters outside the global-existence regime and no override given."""


class NonFiniteError(NSKError):
    """A time step produced NaN or Inf."""


class FitError(NSKError, ValueError):
    """Decay fit received invalid samples."""


class FormatError(NSKError):
    """Malformed snapshot file, config file, or digest mismatch."""
