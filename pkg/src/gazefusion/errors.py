"""Exception hierarchy shared across the pipeline.

Every error raised on a user-facing path derives from GazeError so the CLI
can surface it as a single-line ``error:`` message with exit status 1.
"""


class GazeError(Exception):
    """Base class for all pipeline errors."""


# -- corpus ----------------------------------------------------------------

class MalformedRow(GazeError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class TargetOutOfRange(GazeError):
    pass


class MissingTargets(GazeError):
    pass


class DuplicateKey(GazeError):
    pass


class NonContiguousWordIds(GazeError):
    pass


class EmptyCorpus(GazeError):
    pass


# -- features --------------------------------------------------------------

class EmptyWord(GazeError):
    pass


# -- embedding store / checkpoints ----------------------------------------

class MissingEmbedding(GazeError):
    pass


class DimMismatch(GazeError):
    pass


class NonFiniteValue(GazeError):
    pass


class BadMagic(GazeError):
    pass


class UnsupportedVersion(GazeError):
    pass


class TruncatedFile(GazeError):
    pass


class ChecksumMismatch(GazeError):
    pass


class IoFailure(GazeError):
    pass


class UnknownDataset(GazeError):
    pass


# -- models / training -----------------------------------------------------

class ShapeMismatch(GazeError):
    pass


class StaleCache(GazeError):
    pass


class SingularSystem(GazeError):
    pass


class NonFiniteLoss(GazeError):
    pass


class ConfigError(GazeError):
    pass


# -- evaluation ------------------------------------------------------------

class LengthMismatch(GazeError):
    pass


class EmptyInput(GazeError):
    pass
