"""
Exception hierarchy for the imputation toolkit.

Every error raised on purpose derives from ImputationError, which is a
ValueError so callers that only know about bad input still catch it.
"""


class ImputationError(ValueError):
    """Root of all domain errors."""


class SchemaConfigError(ImputationError):
    """Schema or alias file is unreadable, garbled or has unknown fields."""

    def __init__(self, message, pointer=""):
        self.pointer = pointer
        if pointer:
            message = f"{message} (at {pointer})"
        super().__init__(message)


class SchemaValidationError(ImputationError):
    """A warehouse model breaks the structural invariants."""

    def __init__(self, report):
        self.report = report
        lines = "; ".join(v.describe() for v in report.violations)
        super().__init__(f"schema has {len(report.violations)} violation(s): {lines}")


class UnknownParameterError(ImputationError):
    pass


class UnknownAttributeError(ImputationError):
    pass


class UnknownColumnError(ImputationError):
    pass


class TableFormatError(ImputationError):
    """CSV file does not have the shape of an instance table."""


class RaggedRowError(TableFormatError):

    def __init__(self, path, line, expected, found):
        self.line = line
        super().__init__(
            f"{path}: line {line} has {found} field(s), header has {expected}"
        )


class DuplicateColumnError(TableFormatError):
    pass


class MatchError(ImputationError):
    pass


class StaleLinkError(ImputationError):
    """A cross-dimension link was discovered against a different schema."""


class IneligibleAttributeError(ImputationError):
    pass


class InjectionError(ImputationError):
    pass


class ProtocolError(ImputationError):
    """The imputer touched a cell that was never injected."""


class SyntheticSpecError(ImputationError):
    pass
