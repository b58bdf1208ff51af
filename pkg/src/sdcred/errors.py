"""Exception hierarchy shared by every module."""


class SDError(Exception):
    """Base class for all errors raised by sdcred."""


class EncodingError(SDError, ValueError):
    pass


class DecodeError(SDError, ValueError):
    """Bytes are not a canonical encoding of the expected object."""


class EmptyTreeError(SDError, ValueError):
    pass


class MalformedProofError(SDError, ValueError):
    """Proof is structurally invalid (as opposed to merely not verifying)."""


class EmptyAggregateError(SDError, ValueError):
    pass


class OutOfRangeError(SDError, ValueError):
    pass


class UnsupportedBitWidthError(SDError, ValueError):
    pass


class AttributeTypeError(SDError, TypeError):
    """Operation not defined for the attribute's declared type."""


class FormatError(SDError, ValueError):
    pass


class ImmutableFormatError(FormatError):
    pass


class UnknownFormatError(SDError, LookupError):
    pass


class InvalidCredentialError(SDError, ValueError):
    pass


class ParameterError(SDError, ValueError):
    pass


class RogueKeyError(SDError, ValueError):
    """A public key was offered without a valid proof of possession."""


class UntrustedKeyError(SDError, LookupError):
    pass


class DuplicateRootError(SDError, ValueError):
    pass


class RegistryLockedError(SDError, OSError):
    pass
