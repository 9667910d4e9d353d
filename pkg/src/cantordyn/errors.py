"""Exception hierarchy shared by every layer of the package."""


class CantorDynError(Exception):
    """Base class for all errors raised by cantordyn."""


class AlphabetError(CantorDynError, ValueError):
    """A letter is out of range, or two objects use different alphabets."""


class MachineError(CantorDynError, ValueError):
    """A machine description violates an invariant (invertibility, codes)."""


class MachineClassError(CantorDynError, TypeError):
    """Transducers and prefix exchanges were mixed in one operation."""


class BudgetExceeded(CantorDynError):
    """A configured size cap was hit.

    ``partial`` carries whatever was computed before the cap was reached and
    ``reached`` the radius (or level) completed at that point.
    """

    def __init__(self, message, partial=None, reached=None):
        super().__init__(message)
        self.partial = partial
        self.reached = reached


class InsufficientRadius(CantorDynError):
    """An element or word length lies outside the enumerated ball."""


class PreconditionError(CantorDynError, ValueError):
    """An operation was called outside its domain."""


class InternalConsistencyError(CantorDynError, AssertionError):
    """Computed data contradicts itself; indicates a bug, not bad input."""


class SchemaError(CantorDynError, ValueError):
    """A system description does not match the schema.

    ``path`` locates the offending field, e.g. ``generators[1].lambda[0]``.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
