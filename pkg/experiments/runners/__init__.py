from .base_runner import BaseRunner, Check, Report
from .cmv_runner import CmvRunner
from .covering_runner import CoveringRunner
from .identities_runner import IdentitiesRunner
from .lipschitz_runner import LipschitzRunner
from .measure_runner import MeasureRunner
from .polynomial_runner import PolynomialRenormRunner
from .rational_runner import RationalRenormRunner
