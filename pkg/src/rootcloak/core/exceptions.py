"""
Custom exceptions for rootcloak.
Every failure of the construction or of a verification run maps to one of these,
so the CLI can turn it into a readable message and an exit code.
"""


class RootCloakError(Exception):
    """Base exception class for rootcloak errors"""

    def __init__(self, message: str, details: str = "") -> None:
        self.message = message
        self.details = details
        super().__init__(f"{message}\n\n{details}" if details else message)


class ConfigInvalid(RootCloakError):
    """Raised when a configuration field is missing, malformed or out of range
    Example: n = 1, or an amplitude list whose length is not N
    """

    def __init__(self, message: str, details: str = "", field: str | None = None) -> None:
        self.field = field
        super().__init__(message, details)


class AmplitudeDegenerate(ConfigInvalid):
    """Raised when a_{kl} = a_k - a_l for some pair, which cancels the non-flatness obstruction
    Example: amplitudes [1.0, 0.4, 0.6] for n = 2
    """

    def __init__(self, message: str, details: str = "", pair: tuple[int, int] | None = None) -> None:
        self.pair = pair
        super().__init__(message, details, field="amplitudes")


class GroupClosureError(RootCloakError):
    """Raised when the reflection closure does not stop at (n+1)! elements"""

    def __init__(self, message: str, details: str = "") -> None:
        super().__init__(message, details)


class SingularSystem(RootCloakError):
    """Raised when the pointwise linear system for H is numerically singular
    Usually epsilon is too large for the bump data.
    """

    def __init__(self, message: str, details: str = "", condition_number: float | None = None) -> None:
        self.condition_number = condition_number
        super().__init__(message, details)


class NotPositiveDefinite(RootCloakError):
    """Raised when the solved H has a non-positive eigenvalue"""

    def __init__(self, message: str, details: str = "", min_eigenvalue: float | None = None) -> None:
        self.min_eigenvalue = min_eigenvalue
        super().__init__(message, details)


class ThresholdNotFound(RootCloakError):
    """Raised when no admissible epsilon exists even at the bottom of the search range"""

    def __init__(self, message: str, details: str = "") -> None:
        super().__init__(message, details)


class StepFailure(RootCloakError):
    """Raised when the integrator step size underflows"""

    def __init__(self, message: str, details: str = "") -> None:
        super().__init__(message, details)


class EscapeFailure(RootCloakError):
    """Raised when a geodesic does not leave the bounding sphere before the parameter cap"""

    def __init__(self, message: str, details: str = "") -> None:
        super().__init__(message, details)


class GeometryInvalid(RootCloakError):
    """Raised when the ball layout violates the small-ball conditions
    Invisibility is only claimed when validate_geometry passes.
    """

    def __init__(self, message: str, details: str = "") -> None:
        super().__init__(message, details)
