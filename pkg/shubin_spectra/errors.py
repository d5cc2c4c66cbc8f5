"""Exception hierarchy for shubin-spectra.

Every failure raised by the library derives from ShubinSpectraError so the CLI
can map it to an exit code. Hypothesis failures (the operator is not normal or
not globally elliptic) share the HypothesisError base and map to exit code 2.
"""


class ShubinSpectraError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(ShubinSpectraError, ValueError):
    """An argument is outside its documented domain."""


class InvalidInputError(ShubinSpectraError):
    """Input data (samples, CSV tables, coefficient files) is malformed or non-finite."""


class PreconditionError(ShubinSpectraError):
    """A structural precondition of an operation does not hold."""


class ResourceLimitError(ShubinSpectraError):
    """A size, order or index cap would be exceeded."""


class ConfigError(ShubinSpectraError):
    """A job configuration field is missing or invalid."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class HypothesisError(ShubinSpectraError):
    """The operator violates a standing hypothesis of the theory."""


class NotNormalError(HypothesisError):
    """The operator (or its matrix) does not commute with its adjoint."""

    def __init__(self, discrepancy, message=None):
        self.discrepancy = float(discrepancy)
        super().__init__(message or f"operator is not normal (discrepancy {self.discrepancy:.3e})")


class NotEllipticError(HypothesisError):
    """The principal symbol vanishes (numerically) on the unit sphere."""

    def __init__(self, min_modulus, argmin):
        self.min_modulus = float(min_modulus)
        self.argmin = tuple(argmin)
        super().__init__(
            f"principal symbol not elliptic: min |p_m| = {self.min_modulus:.3e} at {self.argmin}"
        )


class UnsolvableError(ShubinSpectraError):
    """Right-hand side has a component on the kernel of the operator."""

    def __init__(self, index, coefficient):
        self.index = int(index)
        self.coefficient = complex(coefficient)
        super().__init__(
            f"kernel obstruction at eigen-index j={self.index}: |a_j| = {abs(self.coefficient):.3e}"
        )


class NotInDualError(ShubinSpectraError):
    """Dual coefficient sequence grows faster than the weights allow."""

    def __init__(self, index, message=None):
        self.index = int(index)
        super().__init__(message or f"dual sequence fails the growth screen near j={self.index}")
