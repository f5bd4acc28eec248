"""Exception types shared across the package."""


class RfadvError(Exception):
    """Base class for all rfadv errors."""


class ConfigurationError(RfadvError):
    """A parameter or config file value is out of contract."""


class CorruptFileError(RfadvError):
    """A container file failed its magic/version/length checks."""


class ShapeMismatchError(RfadvError):
    """An array shape is incompatible with the model or dataset."""


class TrainingDivergedError(RfadvError):
    """Training loss became NaN/inf; carries step diagnostics in args."""


class DegenerateGradientError(RfadvError):
    """The input gradient vanished; callers fall back to a fixed direction."""


class BracketError(RfadvError):
    """Bisection endpoints do not bracket a sign change."""


class CsvParseError(RfadvError):
    """A sweep CSV is malformed; .line holds the 1-based offending line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
