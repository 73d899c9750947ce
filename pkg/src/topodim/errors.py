"""Exception hierarchy shared by every module.

The CLI maps :class:`ResourceLimitError` to exit status 2 and every other
:class:`TopoDimError` to exit status 1.
"""


class TopoDimError(Exception):
    kind = "error"


class InvalidInputError(TopoDimError, ValueError):
    kind = "invalid-input"


class InvalidArgumentError(TopoDimError, ValueError):
    kind = "invalid-argument"


class DegenerateInputError(InvalidInputError):
    kind = "degenerate-input"


class DegenerateFitError(DegenerateInputError):
    kind = "degenerate-fit"


class NonEstimableError(TopoDimError, ArithmeticError):
    kind = "non-estimable"


class LoadError(InvalidInputError):
    kind = "load-error"

    def __init__(self, path, reason, row=None):
        self.path = str(path)
        self.row = row
        self.reason = reason
        where = self.path if row is None else f"{self.path}:{row}"
        super().__init__(f"{where}: {reason}")


class ResourceLimitError(TopoDimError, MemoryError):
    kind = "resource-limit"

    def __init__(self, message, count=None):
        self.count = count
        super().__init__(message)
