"""Exception types shared across the toolkit."""


class CorpusForgeError(Exception):
    """Base class for all toolkit errors."""


class MalformedRecordError(CorpusForgeError):
    """A corpus file record could not be parsed or violates an invariant.

    Carries the 1-based line number of the offending record.
    """

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class UndefinedMetricError(CorpusForgeError):
    """A metric was requested on a degenerate input (never returns NaN)."""


class ScoringError(CorpusForgeError):
    """Perplexity scoring failed for a sentence; carries the sentence id."""

    def __init__(self, message: str, sentence_id: str | None = None):
        self.sentence_id = sentence_id
        if sentence_id is not None:
            message = f"sentence {sentence_id!r}: {message}"
        super().__init__(message)


class TransportError(CorpusForgeError):
    """A remote backend could not be reached or returned a bad response."""


class EmptyResponseError(TransportError):
    """A generation backend returned no usable content for a prompt."""


class DimensionMismatchError(CorpusForgeError):
    """An embedding backend returned vectors of inconsistent dimension."""


class ConfigError(CorpusForgeError):
    """Pipeline configuration is invalid; message includes field paths."""


class MissingPrerequisiteError(CorpusForgeError):
    """A pipeline stage needs an artifact produced by an earlier command."""

    def __init__(self, message: str, run_first: str):
        self.run_first = run_first
        super().__init__(f"{message} (run '{run_first}' first)")


class AudioFormatError(CorpusForgeError):
    """A WAV file has a malformed header or an unsupported codec."""


class DurationLookupError(CorpusForgeError):
    """Measured-duration mode has no audio duration for a sentence."""
