class DomainError(ValueError):
    """Raised when an operation is called outside of its mathematical domain."""


class QuadratureError(ArithmeticError):
    """Raised when a numerical integral does not settle under refinement."""


class SequenceFileError(Exception):
    """Base for failures while reading a sequence file."""

    code = "sequence-file"

    def __init__(self, path: str, detail: str) -> None:
        super().__init__(f"{path}: {detail} [{self.code}]")
        self.path = path
        self.detail = detail


class MissingSequenceFile(SequenceFileError):
    code = "missing-file"


class MalformedSequenceRow(SequenceFileError):
    code = "malformed-row"


class NonIncreasingColumn(SequenceFileError):
    code = "non-increasing-column"
