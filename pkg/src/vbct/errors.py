"""Exception types shared across the package."""


class VBCTError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(VBCTError, ValueError):
    """A numeric or structural parameter is outside its allowed range."""


class ContractError(VBCTError, ValueError):
    """A caller violated an operation's precondition (shapes, references, completeness)."""
