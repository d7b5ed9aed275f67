"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Input violates a documented precondition or schema."""


class DataFormatError(ValidationError):
    """A file's content cannot be parsed (bad row, bad header, bad key)."""


class ModelFileError(ValidationError):
    """A serialized model file is unreadable, truncated or of the wrong kind."""
