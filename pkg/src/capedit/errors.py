"""Exception types shared across the package."""


class CapEditError(Exception):
    """Base class for all capedit errors."""


class LengthMismatchError(CapEditError):
    """An edit script does not consume its source exactly."""


class PolicyContractError(CapEditError):
    """A policy returned labels or words violating the editing contract."""


class MissingScoreError(CapEditError):
    """A score table lookup required by an active filter is absent."""

    def __init__(self, kind: str, a: str, b: str):
        super().__init__(f"missing {kind} score for pair ({a!r}, {b!r})")
        self.kind = kind
        self.pair = (a, b)


class ZeroEditStepsError(CapEditError):
    """Per-step gain is undefined when the mean editing-step count is zero."""


class RecordError(CapEditError):
    """A malformed input record, with its source location."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
        self.message = message
