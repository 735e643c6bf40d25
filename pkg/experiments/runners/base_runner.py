import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from tabulate import tabulate

from banded.exceptions import InvalidInputError
from banded.window import JacobiCoeffs
from covering.maps import ExpandingPolynomial, SignVector
from ..exceptions import ConfigError


@dataclass(frozen=True)
class Check:
    """One named result of an experiment. Informational findings carry no tolerance and always pass."""
    name: str
    value: object
    tolerance: Optional[float] = None
    passed: bool = True

    def to_dict(self):
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance, "pass": self.passed}


@dataclass
class Report:
    """Everything an experiment produced: config echo, checks and tabular artifacts for CSV output."""
    kind: str
    config: dict
    version: str
    checks: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    @property
    def failed_checks(self):
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self):
        return {
            "kind": self.kind,
            "config": self.config,
            "tool_version": self.version,
            "checks": [check.to_dict() for check in self.checks],
            "pass": self.passed,
            "artifacts": sorted(self.artifacts),
        }

    def table(self):
        rows = [[c.name, c.value, "" if c.tolerance is None else c.tolerance, "ok" if c.passed else "FAIL"] for c in self.checks]
        return tabulate(rows, headers=["check", "value", "tolerance", "pass"], tablefmt="github")


class BaseRunner:
    """
    BaseRunner is the common ground of all experiment runners. A runner receives a validated
    configuration, executes one experiment kind and records named checks and artifacts.

    Initialization:
    ---------------
    - `parameters`: the kind-specific parameter object of the config (defaults are applied by
      the runner reading them, `parameters.get(name, default)` style).
    - `seed`: 64-bit seed; `rng` is the single numpy generator derived from it.

    Checks:
    -------
    - `check_max`: passes when value <= tolerance (residuals, drifts, errors).
    - `check_below`: passes when value < bound, strict (contraction ratios).
    - `check_min`: passes when value >= threshold (sensitivity checks).
    - `check_true`: boolean condition, no tolerance.
    - `finding`: informational value, always passes.
    Non-finite values never pass a numeric check.

    Artifacts:
    ----------
    - `add_artifact(name, header, rows)`: a table that the publisher writes as `<name>.csv`.

    Subclasses implement `run()`.
    """

    kind = "base"

    def __init__(self, config):
        self.config = config
        self.parameters = config.get("parameters", {})
        self.seed = int(config.get("seed", 0))
        self.rng = np.random.default_rng(self.seed)
        self.checks = []
        self.artifacts = {}

    def run(self):
        """Abstract method to be implemented by subclasses."""
        pass

    def _record(self, name, value, tolerance, passed):
        check = Check(name, value, tolerance, bool(passed))
        self.checks.append(check)
        level = logging.DEBUG if check.passed else logging.WARNING
        logging.log(level, f"[{self.kind}_runner] {name} = {value!r} (tolerance {tolerance!r}) {'ok' if check.passed else 'FAILED'}")
        return check

    def check_max(self, name, value, tolerance):
        value = float(value)
        return self._record(name, value, tolerance, math.isfinite(value) and value <= tolerance)

    def check_below(self, name, value, bound):
        value = float(value)
        return self._record(name, value, bound, math.isfinite(value) and value < bound)

    def check_min(self, name, value, threshold):
        value = float(value)
        return self._record(name, value, threshold, math.isfinite(value) and value >= threshold)

    def check_true(self, name, condition, value=None):
        return self._record(name, bool(condition) if value is None else value, None, bool(condition))

    def finding(self, name, value):
        return self._record(name, value, None, True)

    def add_artifact(self, name, header, rows):
        self.artifacts[name] = {"header": list(header), "rows": [list(r) for r in rows]}

    # shared parameter parsing

    def from_config(self, build, *args, **kwargs):
        """Build an object from config values. Values the library rejects are config errors."""
        try:
            return build(*args, **kwargs)
        except InvalidInputError as e:
            raise ConfigError(f"Invalid parameters for '{self.kind}': {e}") from e

    def _polynomial(self, default_coeffs, default_xi=1.0):
        return self.from_config(
            ExpandingPolynomial, tuple(self.parameters.get("T_coeffs", default_coeffs)), self.parameters.get("xi", default_xi)
        )

    def _delta(self, T):
        signs = self.parameters.get("delta")
        delta = SignVector.minus(T.degree) if signs is None else self.from_config(SignVector, tuple(signs))
        self.from_config(delta.check_length, T)
        return delta

    def _jacobi(self, default_p, default_q):
        doc = self.parameters.get("jt", {"p": default_p, "q": default_q})
        return self.from_config(JacobiCoeffs.periodic, doc["p"], doc["q"])
