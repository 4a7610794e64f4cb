"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when user-supplied data, text or configuration is unusable."""


class ParseError(InputError):
    """Malformed expression text.

    ``position`` is the 0-based character offset where parsing failed.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ArtifactMissingError(FileNotFoundError):
    """An upstream pipeline artifact (dataset, archive, model set...) is absent."""
