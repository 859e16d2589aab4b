"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """Inputs break a documented precondition (shape, sign, definiteness)."""


class InvalidInterval(ValueError):
    """A time interval is empty or reversed."""


class IllConditioned(ValueError):
    """A requested solve is too badly conditioned to trust."""


class ScenarioError(ValueError):
    """A scenario or geometry document is malformed."""
