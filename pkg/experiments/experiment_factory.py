import logging

from .exceptions import ConfigError
from .runners import (
    CmvRunner,
    CoveringRunner,
    IdentitiesRunner,
    LipschitzRunner,
    MeasureRunner,
    PolynomialRenormRunner,
    RationalRenormRunner,
)

KINDS = ("validate_covering", "renorm_iterate", "renorm_poly", "verify_identities", "cmv", "measure", "lipschitz")


class ExperimentFactory:
    """Factory class to create the runner of an experiment kind."""

    def get_runner(self, kind, config):
        """
        Get the runner for an experiment kind.

        Args:
            kind (str): One of KINDS.
            config (dict): The validated experiment configuration.

        Returns:
            BaseRunner: An instance of a runner class.
        """
        logging.info(f"[experiment_factory][{kind}] Creating runner")

        if kind == "validate_covering":
            return CoveringRunner(config)
        elif kind == "renorm_iterate":
            return RationalRenormRunner(config)
        elif kind == "renorm_poly":
            return PolynomialRenormRunner(config)
        elif kind == "verify_identities":
            return IdentitiesRunner(config)
        elif kind == "cmv":
            return CmvRunner(config)
        elif kind == "measure":
            return MeasureRunner(config)
        elif kind == "lipschitz":
            return LipschitzRunner(config)
        else:
            raise ConfigError(f"Unknown experiment kind '{kind}', expected one of {', '.join(KINDS)}.")
