# experiments/__init__.py
__version__ = "0.1.1"

from .exceptions import ConfigError
from .experiment_factory import KINDS, ExperimentFactory
from .experiment_runner import ExperimentRunner
