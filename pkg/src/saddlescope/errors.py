"""Exception hierarchy shared by all saddlescope modules."""


class SaddleScopeError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SaddleScopeError, ValueError):
    """A point lies outside the region where a function or field is defined."""


class NumericError(SaddleScopeError, ArithmeticError):
    """A computation produced non-finite values or failed to converge."""


class CapabilityError(SaddleScopeError, TypeError):
    """The object lacks a capability the operation needs (e.g. second derivatives)."""


class ContractError(SaddleScopeError, ValueError):
    """Inputs violate an operation's documented preconditions."""
