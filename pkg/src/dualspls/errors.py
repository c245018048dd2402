"""Exception types raised by the solvers and I/O helpers."""


class DualSPLSError(Exception):
    """Base class for every error raised by this package."""


class SingularMatrix(DualSPLSError, ArithmeticError):
    """A symmetric system could not be factored within the pivot tolerance."""


class DegenerateThreshold(DualSPLSError, ArithmeticError):
    """Thresholding zeroed every coordinate, so no weight direction survives."""


class EmptyGrid(DualSPLSError):
    """Every grid combination of group magnitudes zeroes the whole weight."""


class RankExhausted(DualSPLSError):
    """The deflated matrix carries no more signal to build a new component."""

    def __init__(self, message, n_valid=0):
        super().__init__(message)
        self.n_valid = n_valid


class NoConvergence(DualSPLSError):
    """An iterative solver hit its iteration cap; ``beta`` holds the last iterate."""

    def __init__(self, message, beta=None, n_iter=0):
        super().__init__(message)
        self.beta = beta
        self.n_iter = n_iter


class ParseError(DualSPLSError, ValueError):
    def __init__(self, message, line=None, column=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.column = column
