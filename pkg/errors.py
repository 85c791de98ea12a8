class DimensionError(ValueError):
    """Operator or register sizes do not match."""


class ConfigurationError(ValueError):
    """Invalid register, molecule file, pulse file, gate spec or optimizer settings."""


class StateParseError(ValueError):
    """State expression could not be parsed."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class FitError(ValueError):
    """Spectral fit cannot be carried out (axis mismatch, rank deficiency)."""


class AlgebraError(ValueError):
    """Lie-algebra input or consistency failure."""
