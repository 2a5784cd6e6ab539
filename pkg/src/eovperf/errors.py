"""Exception types raised across the package."""


class UnstableQueue(ValueError):
    """A queue is offered at least as much work as it can serve."""

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.stage = stage


class DegenerateLoad(ValueError):
    """Zero arrival rate supplied where the M/D/c correction is singular."""


class FanoutNotSupported(ValueError):
    pass


class EmptyTrace(ValueError):
    pass


class InsufficientSamples(ValueError):
    pass


class ZeroMean(ValueError):
    pass


class ScenarioError(ValueError):
    """Base class for scenario file problems."""


class ParseError(ScenarioError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field


class ValidationError(ScenarioError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field
