"""Exception hierarchy shared by the whole toolkit.

The CLI maps these onto distinct exit codes (see landsvm.cli).
"""


class ToolkitError(Exception):
    """Base class of every error raised by landsvm."""


class InputError(ToolkitError):
    """Invalid argument: dimension mismatch, out-of-range value, bad grid."""


class ConfigError(ToolkitError):
    """Invalid run configuration (config file or CLI flags)."""


class ParseError(ToolkitError):
    """A file did not parse. Carries the path and, when known, the byte offset."""

    def __init__(self, message, path=None, offset=None):
        self.path = path
        self.offset = offset
        where = ""
        if path is not None:
            where += f"{path}: "
        if offset is not None:
            where += f"byte {offset}: "
        super().__init__(where + message)


class DegenerateTrainingError(ToolkitError):
    """Training data contains only one class."""


class ConvergenceError(ToolkitError):
    """The solver hit its hard iteration cap before satisfying the
    optimality conditions. Carries the worst remaining violation."""

    def __init__(self, message, worst_violation=None):
        self.worst_violation = worst_violation
        if worst_violation is not None:
            message += f" (worst KKT violation {worst_violation:.3e})"
        super().__init__(message)


class UndefinedKappaError(ToolkitError):
    """Kappa is undefined because chance agreement equals 1."""


class DegenerateVarianceError(ToolkitError):
    """Two kappas differ but both variance estimates are zero."""


class IncompleteGridError(ToolkitError):
    """A comparison was requested before every kernel/strategy cell exists."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        cells = ", ".join(f"{s}/{k}" for s, k in self.missing)
        super().__init__(f"incomplete comparison grid, missing: {cells}")
