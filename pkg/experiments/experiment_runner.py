import logging
import time

import numpy as np

from banded.exceptions import SpectralRenormError
from .exceptions import ConfigError
from .experiment_factory import ExperimentFactory
from .runners.base_runner import Check, Report
from .schemas import validate_config


class ExperimentRunner:
    """
    ExperimentRunner executes one experiment from its configuration and turns the outcome into a Report.

    Execution:
    ----------
    - The config is validated against the schema of its kind before anything runs; schema
      violations are raised to the caller (the CLI maps them to exit code 2).
    - `ExperimentFactory` picks the runner for the kind.

    Error Handling:
    ---------------
    - Library errors raised while the runner works (non-convergence, invalid branches, singular
      systems) and LAPACK failures do not abort the report: they become a failed `<kind>.error`
      check and the checks recorded before the failure are kept.
    - `ConfigError`, raised when the runner rejects a parameter value, propagates like a schema
      violation.

    Time Budget:
    ------------
    - Every kind has a wall-time budget. Exceeding it is logged as a warning and recorded as a
      finding, it never fails the run.
    """

    time_budgets = {
        "validate_covering": 5.0,
        "renorm_iterate": 10.0,
        "renorm_poly": 60.0,
        "verify_identities": 120.0,
        "cmv": 30.0,
        "measure": 60.0,
        "lipschitz": 60.0,
    }

    def __init__(self, version):
        self.version = version

    def _check_timeout(self, kind, elapsed_time):
        """Check if the experiment exceeded its time budget."""
        return elapsed_time > self.time_budgets.get(kind, float("inf"))

    def _error_message(self, kind, exception):
        """Generate an error message for a failed experiment."""
        error_message = f"An error occurred while running the experiment. Exception: {type(exception).__name__}: {exception}"
        logging.info(f"[experiment_runner][{kind}] Error: {error_message}")
        return error_message

    def run_experiment(self, config, kind):
        """Validate, run and report one experiment."""
        validate_config(config, kind)
        start_time = time.time()
        runner = ExperimentFactory().get_runner(kind, config)
        errors = []
        try:
            runner.run()
        except ConfigError:
            raise
        except (SpectralRenormError, np.linalg.LinAlgError) as e:
            errors.append(self._error_message(kind, e))
            runner.checks.append(Check(f"{kind}.error", errors[-1], None, False))

        elapsed_time = time.time() - start_time
        if self._check_timeout(kind, elapsed_time):
            logging.warning(f"[experiment_runner][{kind}] Exceeded the time budget of {self.time_budgets[kind]:.0f} seconds.")
            runner.finding(f"{kind}.time_budget_exceeded", round(elapsed_time, 2))

        report = Report(kind, config, self.version, list(runner.checks), dict(runner.artifacts), elapsed_time)
        logging.info(
            f"[experiment_runner][{kind}] Finished experiment in {elapsed_time:.2f} seconds. "
            f"{len(report.checks)} checks. {len(report.failed_checks)} failed. {len(errors)} errors."
        )
        return report
