"""Exception types shared across the package."""


class QuillError(Exception):
    """Base class for all package errors."""


class DomainError(QuillError, ValueError):
    """A quantity is undefined for the given input (non-physical state, zero denominator)."""


class ParameterError(QuillError, ValueError):
    """Invalid or inconsistent scenario / configuration parameters."""


class NumericError(QuillError, ArithmeticError):
    """A numerical computation left its trusted regime."""
