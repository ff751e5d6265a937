"""Exception types shared across the package."""


class XfmrAgingError(Exception):
    """Base class for all package errors."""


class DomainError(XfmrAgingError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InputError(XfmrAgingError, ValueError):
    """A dataset or collection argument has the wrong size or shape."""


class IngestionError(XfmrAgingError, ValueError):
    """A CSV file failed validation.

    ``problems`` holds one ``(row, message)`` pair per defect; ``row`` is the
    1-based line number in the file (header is line 1), or ``None`` for
    file-level problems such as missing columns.
    """

    def __init__(self, path, problems):
        self.path = str(path)
        self.problems = list(problems)
        lines = [
            f"  row {row}: {msg}" if row is not None else f"  {msg}"
            for row, msg in self.problems
        ]
        super().__init__(f"{self.path}: {len(self.problems)} problem(s)\n" + "\n".join(lines))


class BadDataError(XfmrAgingError, ValueError):
    """Pre-processing flagged more rows than the policy allows."""


class DegenerateDataError(XfmrAgingError, ValueError):
    """Clustering input carries no spread (all points identical)."""


class TrainingError(XfmrAgingError, RuntimeError):
    """Training produced a non-finite loss."""


class ModelFileError(XfmrAgingError, ValueError):
    """A model file is truncated, malformed or of the wrong kind."""


class ModelVersionError(ModelFileError):
    """A model file carries an unsupported schema version."""
