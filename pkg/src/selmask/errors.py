"""Exception hierarchy.

``ConfigError`` and ``DataFormatError`` map to distinct CLI exit codes;
``CalibrationError`` covers unreachable mask-rate targets.
"""


class SelmaskError(Exception):
    pass


class ConfigError(SelmaskError, ValueError):
    pass


class DataFormatError(SelmaskError, ValueError):
    pass


class LexiconError(DataFormatError):
    pass


class EmbeddingFormatError(DataFormatError):
    pass


class VocabError(DataFormatError):
    pass


class TrainingError(DataFormatError):
    pass


class CalibrationError(SelmaskError, ValueError):
    def __init__(self, message, lower=None, upper=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class FixtureError(SelmaskError):
    pass
