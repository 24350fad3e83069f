"""Exception hierarchy shared across the package.

Every error that callers are expected to branch on gets its own class;
the service and CLI map these onto HTTP status codes and exit codes.
"""

from __future__ import annotations


class CmxError(Exception):
    """Base class for all errors raised by this package."""


class IngestError(CmxError):
    """A schema or records source failed validation during ingest.

    Carries the individual violations so callers can report all of them
    at once instead of failing on the first.
    """

    def __init__(self, violations: list[str] | str):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UnknownNodeError(CmxError):
    """A hierarchy node name does not exist in the dimension's tree."""


class DistributionError(CmxError):
    """An algebra operation was called with incompatible arguments."""


class ZeroMassError(CmxError):
    """A condition matched no probability mass.

    Renormalizing an empty distribution is undefined, so this is a
    distinct error rather than a silently empty result.
    """


class SpecParseError(CmxError):
    """A spec document is syntactically or structurally invalid."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        super().__init__(message)


class SpecValidationError(CmxError):
    """A structurally valid spec does not resolve against a dataset."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
