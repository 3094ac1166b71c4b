class ConfigError(Exception):
    """An experiment config failed to load or validate.

    ``errors`` carries the serializer's error dict when there is one.
    """

    def __init__(self, message: str, errors: dict | list | None = None) -> None:
        super().__init__(message)
        self.errors = errors if errors is not None else {"detail": message}


class EstimatorFileError(ConfigError):
    """A serialized estimator could not be read."""