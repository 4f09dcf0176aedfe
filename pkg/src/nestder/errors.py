"""Exception hierarchy.

Input errors are the caller's fault. Consistency errors mean a map pair fails
a gate it was expected to pass (for example, a pair without the zero-product
property handed to ``gamma_from``). Theorem violations mean either the
mathematics or this implementation is wrong, and carry a repro bundle.
"""


class InputError(ValueError):
    pass


class MembershipError(InputError):
    """An element or matrix lies outside the algebra it was claimed to be in."""


class ConsistencyError(ArithmeticError):
    def __init__(self, message, unit=None):
        super().__init__(message)
        self.unit = unit


class TheoremViolation(RuntimeError):
    def __init__(self, message, bundle=None):
        super().__init__(message)
        self.bundle = bundle or {}
