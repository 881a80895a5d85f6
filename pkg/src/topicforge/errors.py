"""Exception hierarchy shared across the package.

Everything raised on bad *data* (malformed files, unknown titles, violated
preconditions) derives from :class:`TopicForgeError`, so the CLI can map it
to exit code 2 while genuine usage errors stay at exit code 1.
"""


class TopicForgeError(Exception):
    """Base class for data and state errors raised by topicforge."""


class EdgeParseError(TopicForgeError):
    """A line of an edge file could not be parsed; carries the line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class IndexFileError(TopicForgeError):
    """Base class for persisted-index load failures."""


class NotAnIndexError(IndexFileError):
    pass


class TruncatedIndexError(IndexFileError):
    pass


class IndexVersionError(IndexFileError):
    pass


class UnknownTitleError(TopicForgeError):
    def __init__(self, title: str):
        super().__init__(f"unknown title: {title!r}")
        self.title = title


class DegenerateGraphError(TopicForgeError):
    """min(|A|, |B|) equals the article count, so the score denominator is 0."""


class CorpusError(TopicForgeError):
    """Invalid sentence records, samples, or label sets."""


class GlossaryError(TopicForgeError):
    pass


class ModelError(TopicForgeError):
    """Classifier training/prediction precondition failures."""


class EvaluationError(TopicForgeError):
    pass


class SessionError(TopicForgeError):
    """Labeling-session lifecycle and submission errors."""

    def __init__(self, message: str, code: str = "session_error"):
        super().__init__(message)
        self.code = code
