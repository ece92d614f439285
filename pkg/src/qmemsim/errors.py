"""Exception types raised across the package."""


class QMemError(Exception):
    pass


class InvalidSize(QMemError, ValueError):
    """Lattice size below the minimum of 3."""


class OutOfValidatedRange(QMemError, ValueError):
    """Size outside the range where the two-qubit criterion is known to hold."""


class DegenerateCodeSpace(QMemError):
    """Computed number of logical qubits differs from the expected one."""


class AmbiguousBox(QMemError):
    """Two equally long gaps on one axis give two candidate enclosing boxes."""


class SectorMismatch(QMemError, ValueError):
    pass


class FrozenState(QMemError):
    """Total transition rate is zero; no move can be drawn."""


class InsufficientData(QMemError):
    pass


class QTooSmall(QMemError, ValueError):
    pass


class DoesNotFit(QMemError, ValueError):
    """Requested structure does not fit in the lattice without wrapping."""
