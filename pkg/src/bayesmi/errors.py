"""Exception hierarchy.

Input errors (bad tables, bad priors, unsupported layouts, parse failures)
map to CLI exit code 2; numerical-domain errors map to exit code 3.
"""


class BayesMIError(Exception):
    """Base class for all package errors."""


class InputError(BayesMIError, ValueError):
    pass


class InvalidTableError(InputError):
    pass


class InvalidPriorError(InputError):
    pass


class UnsupportedInputError(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.row = row
        self.column = column


class NumericalDomainError(BayesMIError, ArithmeticError):
    pass


class DomainError(NumericalDomainError, ValueError):
    """Argument outside the domain of a special function."""


class ZeroCellError(NumericalDomainError):
    def __init__(self, cell):
        super().__init__(f"cell {cell} has zero count; apply a positive prior first")
        self.cell = cell


class UndefinedDistributionError(NumericalDomainError):
    pass


class ConvergenceError(NumericalDomainError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class InfeasibleFitError(NumericalDomainError):
    pass


class SingularMatrixError(NumericalDomainError):
    pass
