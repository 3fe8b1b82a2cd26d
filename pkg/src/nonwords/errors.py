"""Exception types shared across the toolkit."""


class NonwordsError(Exception):
    """Base class for all toolkit errors."""


class InputFormatError(NonwordsError):
    """An input stream or file could not be decoded or parsed."""


class ModelFormatError(InputFormatError):
    """A model file is corrupt or has an unsupported version."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TransliterationError(NonwordsError):
    """A character had no rule and could not be passed through."""

    def __init__(self, char: str, offset: int):
        self.char = char
        self.offset = offset
        super().__init__(f"unmapped character {char!r} at offset {offset}")


class TrainingError(NonwordsError):
    """Model training was given unusable input."""


class ScoringError(NonwordsError):
    """A word cannot be scored under the given model."""


class RankingError(NonwordsError):
    """One or more candidates could not be ranked."""

    def __init__(self, message: str, offenders: list[str] | None = None):
        self.offenders = offenders or []
        super().__init__(message)


class GenerationExhaustedError(NonwordsError):
    """Stochastic generation hit its restart or attempt budget."""


class PartialBatchError(GenerationExhaustedError):
    """A batch ran out of attempts; carries what was generated so far."""

    def __init__(self, message: str, generated: list):
        self.generated = generated
        super().__init__(message)


class SelectionError(NonwordsError):
    """A ranking ran out of unclaimed items during disjoint top-k selection."""


class StudyConstructionError(NonwordsError):
    """Study list inputs violate the design's structural requirements."""


class AnalysisError(NonwordsError):
    """Trial-log analysis cannot proceed (e.g. no raters remain)."""


class MissingCellError(AnalysisError):
    """A rater lacks a mean for a group required by normalization."""

    def __init__(self, rater: str, group: str):
        self.rater = rater
        self.group = group
        super().__init__(f"rater {rater!r} has no mean for group {group!r}")
