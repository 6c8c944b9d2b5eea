"""Exception hierarchy shared by the minram modules."""

from typing import Any, List, Optional


class MinramError(Exception):
    """Base class for every error raised by minram."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(self.message)


class PresentationError(MinramError):
    """Raised when a pc-presentation is malformed or inconsistent."""


class ArithmeticDomainError(MinramError):
    """Raised when an arithmetic primitive is called outside its domain."""


class FieldDataError(MinramError):
    """Raised for malformed field data or a non-fundamental discriminant."""


class ClassOrderError(MinramError):
    """Raised when an ideal class does not have the order an operation needs."""

    def __init__(self, order: int, expected: int, message: Optional[str] = None):
        self.order = order
        self.expected = expected
        super().__init__(message or f"Ideal class has order {order}, expected {expected}")


class TorsionClashError(MinramError):
    """Raised when the base field contains a primitive l-th root of unity."""

    def __init__(self, l: int, field: str):
        self.l = l
        self.field = field
        super().__init__(f"zeta_{l} lies in {field}; the construction needs gcd(|G|, |mu_K|) = 1")


class SearchLimitExceeded(MinramError):
    """Raised when a bounded prime scan finds no candidate below its bound."""

    def __init__(self, bound: int, conditions: List[str], message: Optional[str] = None):
        self.bound = bound
        self.conditions = list(conditions)
        super().__init__(
            message
            or f"No prime below {bound} satisfies: {'; '.join(self.conditions) or 'no conditions'}"
        )


class CertificateError(MinramError):
    """Raised when a certificate cannot be built or is malformed.

    `partial` holds whatever was assembled before the failure, for diagnosis.
    """

    def __init__(self, message: str, partial: Any = None):
        self.partial = partial
        super().__init__(message)
