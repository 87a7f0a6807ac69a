"""Exception types shared across the package.

CLI exit-code mapping: ParameterError / FormatError / NotAProjectionError
exit with 2 (validation), ResourceLimitError exits with 3 (resource).
"""


class ParameterError(ValueError):
    """A parameter violates a documented precondition or validity region."""


class FormatError(ValueError):
    """A text-format file is malformed (bad header, arity, range, duplicate)."""


class NotAProjectionError(ValueError):
    """The input graph has no (weighted) hypergraph preimage."""


class ResourceLimitError(RuntimeError):
    """An exact search exceeded its node budget.

    Carries the size of the component that blew up so experiment drivers
    can report it without re-deriving anything.
    """

    def __init__(self, message: str, component_size: int = 0):
        super().__init__(message)
        self.component_size = component_size
