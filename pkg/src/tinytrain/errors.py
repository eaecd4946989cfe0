"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Dimension or rank mismatch between arrays."""


class ConfigError(ValueError):
    """Invalid configuration value or combination."""


class FormatError(ValueError):
    """Malformed data file (bad magic, truncated, wrong record size)."""


class ContractError(RuntimeError):
    """API misuse: stale cache, double normalization, mismatched structures."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""
