from banded.exceptions import SpectralRenormError


class ConfigError(SpectralRenormError):
    """Exception raised when an experiment configuration is inconsistent with the requested kind."""
    pass
