"""Exception types shared across the package."""


class ParaQDError(Exception):
    """Base class for all errors raised by this package."""


class EmptyText(ParaQDError):
    pass


class OutOfRange(ParaQDError):
    pass


class UnknownUnit(ParaQDError):
    pass


class SingletonCategory(ParaQDError):
    pass


class LexiconError(ParaQDError):
    pass


class NoCandidates(ParaQDError):
    pass


class OperatorSkip(ParaQDError):
    """An operator does not apply to this question; callers may pick another."""


class NoPhrases(OperatorSkip):
    pass


class TooShort(OperatorSkip):
    pass


class NoEntities(OperatorSkip):
    pass


class NoNumbers(OperatorSkip):
    pass


class NoUnits(OperatorSkip):
    pass


class AllOpsSkipped(ParaQDError):
    pass


class ProviderUnavailable(ParaQDError):
    pass


class ProviderMalformedResponse(ParaQDError):
    pass


class ZeroVector(ParaQDError):
    pass


class CheckpointError(ParaQDError):
    pass


class NonFiniteLoss(ParaQDError):
    pass


class UnlabelledPair(ParaQDError):
    pass


class EmptyVocabulary(ParaQDError):
    pass


class ParseError(ParaQDError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateId(ParaQDError):
    pass
