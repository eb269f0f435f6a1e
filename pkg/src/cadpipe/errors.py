"""Exception hierarchy shared across the pipeline.

Exit-code mapping in the CLI: ConfigError -> 1, DataError and
IntegrityError -> 2.
"""


class CadpipeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CadpipeError):
    """Invalid configuration or command usage."""


class DataError(CadpipeError):
    """Malformed or contract-violating data (parse failures, bad schema,
    shape mismatches, degenerate class layouts)."""


class IntegrityError(CadpipeError):
    """A stage artifact disagrees with what the run manifest recorded."""
