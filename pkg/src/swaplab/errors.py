"""Exception hierarchy shared by every swaplab module."""


class SwaplabError(Exception):
    """Base class for all errors raised by swaplab."""


class InvalidDimensionError(SwaplabError, ValueError):
    pass


class DimensionCapError(SwaplabError):
    """Total Hilbert-space dimension exceeds the configured cap."""


class SlotMismatchError(SwaplabError, ValueError):
    pass


class NotUnitaryError(SwaplabError, ValueError):
    pass


class SystemMismatchError(SwaplabError, ValueError):
    pass


class NonFiniteError(SwaplabError, ValueError):
    pass


class TruncationError(SwaplabError):
    """Encoding state loses too much weight above the Fock cutoff."""


class IllConditionedBasisError(SwaplabError):
    """Logical basis vectors are too close to linearly dependent."""


class InternalConsistencyError(SwaplabError):
    """A self-check inside a simulated circuit failed."""


class RetryCapExceeded(SwaplabError):
    pass


class UnsupportedGateError(SwaplabError):
    """Gate/scheme combination rejected in strict mode."""


class CircuitSchemaError(SwaplabError, ValueError):
    pass


class TruncationWarning(UserWarning):
    pass
