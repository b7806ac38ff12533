"""Exception hierarchy shared across the toolkit."""


class FragileError(Exception):
    """Base class for every error raised by this package."""


class ParseError(FragileError, ValueError):
    pass


class EmptyInput(FragileError, ValueError):
    pass


class EmptyGroup(FragileError, ValueError):
    pass


class DimensionMismatch(FragileError, ValueError):
    pass


class UnknownWord(FragileError, KeyError):
    def __str__(self):
        return f"unknown word: {self.args[0]!r}" if self.args else "unknown word"


class AllWordsOOV(FragileError, ValueError):
    pass


class EmptySentence(FragileError, ValueError):
    pass


class ClassOutOfRange(FragileError, IndexError):
    pass


class EmptyCorpus(FragileError, ValueError):
    pass


class ZeroMass(FragileError, ArithmeticError):
    pass


class LengthMismatch(FragileError, ValueError):
    pass


class TooShort(FragileError, ValueError):
    pass


class DegenerateFit(FragileError, ArithmeticError):
    pass


class NoCandidates(FragileError):
    pass


class SchemeMismatch(FragileError, ValueError):
    pass


class ConfigError(FragileError, ValueError):
    pass
