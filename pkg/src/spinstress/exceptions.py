"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: validation problems exit with 2,
symmetry/consistency failures with 3 and numerical failures with 4.
"""


class SpinStressError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 1


class ValidationError(SpinStressError, ValueError):
    """Invalid input: unstable elastic constants, malformed data, bad frames."""

    exit_code = 2


class ContractError(ValidationError):
    """Mismatched pairing, e.g. a strain coupling set used with a stress tensor."""


class IdentifiabilityError(ValidationError):
    """The design matrix of a fit does not determine every parameter."""

    def __init__(self, message, unresolved=()):
        super().__init__(message)
        self.unresolved = tuple(unresolved)


class SymmetryError(SpinStressError):
    """The elastic tensor is incompatible with the C3v coupling form in this frame."""

    exit_code = 3

    def __init__(self, message, residual=None, report=None):
        super().__init__(message)
        self.residual = residual
        self.report = report


class NumericalError(SpinStressError, ArithmeticError):
    """Singular or badly conditioned linear algebra."""

    exit_code = 4
