"""Exception hierarchy shared by all modules."""


class ReeError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(ReeError, ValueError):
    """Shapes or subsystem dimensions are inconsistent."""


class InputError(ReeError, ValueError):
    """An argument is outside its admissible range."""


class NotPSDError(InputError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""


class SingularityError(InputError):
    """A spectral function is undefined on a singular input."""


class NotAStateError(ReeError, ValueError):
    """A matrix fails the density-matrix invariants.

    Attributes
    ----------
    invariant : str
        Which invariant failed (``"hermitian"``, ``"trace"`` or ``"psd"``).
    amount : float
        Size of the violation.
    """

    def __init__(self, invariant, amount, message=None):
        self.invariant = invariant
        self.amount = float(amount)
        if message is None:
            message = f"not a state: {invariant} violated by {self.amount:.3g}"
        super().__init__(message)


class SupportError(ReeError, ValueError):
    """supp(rho) is not contained in supp(sigma)."""

    def __init__(self, message, t=None):
        self.t = t
        super().__init__(message)


class ParseError(InputError):
    """A state file is malformed."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
