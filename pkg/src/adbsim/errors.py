"""Exception types shared across the package."""


class DomainError(ValueError):
    """A numerical argument lies outside the domain of a function."""


class ConfigError(ValueError):
    """An experiment or simulation configuration is invalid.

    ``key`` names the offending field when one can be singled out.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key

    def __str__(self) -> str:
        msg = super().__str__()
        return f"{self.key}: {msg}" if self.key else msg
