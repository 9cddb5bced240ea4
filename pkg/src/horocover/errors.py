"""Exception hierarchy shared by every module."""


class HorocoverError(Exception):
    """Base class for all library errors."""


class InvalidInputError(HorocoverError, ValueError):
    """A caller supplied arguments outside an operation's domain."""


class InvalidElementError(InvalidInputError):
    """A group element is not a canonical form of the model it was given to."""


class DomainError(InvalidInputError):
    """A level or parameter lies outside the range an operation accepts."""


class ElementOverflowError(HorocoverError, OverflowError):
    """Group arithmetic left the signed 64-bit range."""


class SizeCapError(HorocoverError):
    """A construction would exceed its configured size cap."""

    def __init__(self, message, radius=None):
        super().__init__(message)
        self.radius = radius


class ExactnessError(HorocoverError):
    """A computation needs distances that are not certified exact."""


class CertificateInvalidError(HorocoverError):
    """A cover certificate failed verification."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
