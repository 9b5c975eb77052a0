"""Exception hierarchy.

Every error carries the name of the module that raised it so the CLI can print
a module-qualified one-line diagnostic.
"""


class PriorShiftError(ValueError):
    module = "core"


class NegativeEntry(PriorShiftError):
    pass


class SumNotOne(PriorShiftError):
    def __init__(self, total):
        self.total = total
        super().__init__(f"entries sum to {total!r}, expected 1")


class TooFewClasses(PriorShiftError):
    pass


class RowSumOutOfTolerance(PriorShiftError):
    def __init__(self, row, total):
        self.row = row
        self.total = total
        super().__init__(f"row {row} sums to {total!r}, outside tolerance")


class EmptyMatrix(PriorShiftError):
    pass


class DimensionMismatch(PriorShiftError):
    pass


class EmptyInput(PriorShiftError):
    module = "evaluation"


class ParseError(PriorShiftError):
    module = "io"

    def __init__(self, line, column, message, path=None):
        self.line = line
        self.column = column
        self.path = path
        where = f"{path}:" if path else ""
        super().__init__(f"{where}{line}:{column}: {message}")


class NonFiniteInput(PriorShiftError):
    module = "simplex"


class AbsoluteContinuityViolation(PriorShiftError):
    module = "simplex"


class DegenerateRow(PriorShiftError):
    module = "correction"

    def __init__(self, row):
        self.row = row
        super().__init__(
            f"row {row}: weighted posterior sum underflows; test prior has no "
            "mass where the posterior is supported"
        )


class ConfigError(PriorShiftError):
    module = "estimation"


class NonFiniteGradient(PriorShiftError):
    module = "estimation"


class SplitTooSmall(PriorShiftError):
    module = "estimation"


class BadSeparability(PriorShiftError):
    module = "synthesis"
