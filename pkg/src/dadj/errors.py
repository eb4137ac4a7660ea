"""Exception hierarchy shared by all modules."""


class DadjError(Exception):
    """Base class for every error raised by the package."""


class MalformedExpressionError(DadjError):
    pass


class SubstitutionSingularError(DadjError):
    pass


class EvaluationSingularError(DadjError):
    """A denominator evaluated to zero.

    ``expr`` is the offending denominator; ``index`` is the lattice point
    when the evaluation happened on a grid.
    """

    def __init__(self, message, expr=None, index=None):
        super().__init__(message)
        self.expr = expr
        self.index = index


class InternalConsistencyError(DadjError):
    """Two independent routes disagreed; indicates a bug, never user error."""


class ParseError(DadjError):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class NotForwardNormalizedError(DadjError):
    pass


class ReductionDepthError(DadjError):
    pass


class IndeterminateError(DadjError):
    pass


class MissingRemainderError(DadjError):
    pass


class NotDecomposableError(DadjError):
    pass


class InvalidSubstitutionError(DadjError):
    pass


class SingularOrbitError(DadjError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularAdjointError(SingularOrbitError):
    pass
