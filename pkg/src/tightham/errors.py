"""Exception types shared across the package.

Two kinds of failure are kept apart on purpose: ``Fail`` is the algorithm's
probabilistic "halt with failure" outcome (the harness counts it), while
``InvalidArgument``/``StructuralError``/``DisciplineViolation`` signal caller
bugs or broken invariants and abort a trial.
"""


class InvalidArgument(ValueError):
    """A precondition of an operation was violated by the caller."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StructuralError(RuntimeError):
    """A path-like structure is incomplete or inconsistent."""


class DisciplineViolation(RuntimeError):
    """An r-set would have its randomness consumed a second time."""

    def __init__(self, rset, base=None):
        self.rset = tuple(sorted(rset))
        self.base = None if base is None else tuple(sorted(base))
        super().__init__(f"r-set {self.rset} already decided (new base {self.base})")


class Fail(RuntimeError):
    """Probabilistic failure of a stage; ``stage`` names where it happened."""

    def __init__(self, stage: str, reason: str = ""):
        self.stage = stage
        self.reason = reason
        super().__init__(f"{stage}: {reason}" if reason else stage)
