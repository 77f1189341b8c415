"""Exception types shared across the toolkit."""


class BicontactLabError(Exception):
    """Base class for toolkit errors."""


class PreconditionError(BicontactLabError, ValueError):
    """A scenario or operation parameter violates a documented precondition."""


class GluingError(BicontactLabError, ValueError):
    """Boundary data of a candidate is not compatible with the monodromy.

    Carries the angular defect (radians) so callers can report how far the
    boundary angles are from gluing.
    """

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class DegeneratePlaneError(BicontactLabError, RuntimeError):
    """The two plane fields coincide (transversality margin below the floor).

    ``where`` is the chart point, ``time`` the orbit time if raised during
    integration.
    """

    def __init__(self, message, where=None, time=None):
        super().__init__(message)
        self.where = where
        self.time = time
