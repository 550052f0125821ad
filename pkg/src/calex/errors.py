"""Exception types; the CLI maps these onto exit codes."""


class CalexError(Exception):
    """Base class for calex errors."""


class ConfigError(CalexError):
    """Invalid configuration or parameters (CLI exit code 1)."""


class DataError(CalexError):
    """Bad input data: ingestion, schema, or split problems (CLI exit code 2)."""
