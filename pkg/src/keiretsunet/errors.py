"""Exception hierarchy shared by the pipeline stages.

Two families map onto the command-line exit codes: :class:`InputError`
(bad files or configuration, exit 2) and :class:`DegenerateAnalysisError`
(valid input that cannot support the analysis, exit 3).
"""

from __future__ import annotations

from dataclasses import dataclass


class KeiretsuNetError(Exception):
    """Base class for all package errors."""


class InputError(KeiretsuNetError, ValueError):
    """Malformed input data or configuration."""


@dataclass(frozen=True)
class RowError:
    row: int
    field: str
    message: str

    def __str__(self) -> str:
        return f"row {self.row}, field {self.field!r}: {self.message}"


class ParseError(InputError):
    """One or more rows of a delimited file failed validation.

    ``errors`` holds every offending row, not only the first one.
    """

    def __init__(self, errors: list[RowError], source: str = "input"):
        self.errors = list(errors)
        self.source = source
        lines = "\n".join(f"  {e}" for e in self.errors[:20])
        more = f"\n  ... {len(self.errors) - 20} more" if len(self.errors) > 20 else ""
        super().__init__(f"{len(self.errors)} invalid row(s) in {source}:\n{lines}{more}")


class DegenerateAnalysisError(KeiretsuNetError):
    """The data parsed fine but cannot support the requested analysis."""


class DegenerateAllocationError(DegenerateAnalysisError, ValueError):
    """A capital allocation vector has zero norm."""
