import math

from banded.window import WHOLE_LINE
from renorm.darboux import darboux_lipschitz
from renorm.lipschitz import empirical_lipschitz, random_periodic_pairs
from .base_runner import BaseRunner


class LipschitzRunner(BaseRunner):
    """Measured Lipschitz ratios of the polynomial renormalization and of the Darboux transform."""

    kind = "lipschitz"

    def run(self):
        T = self._polynomial([1.0, 0.0, -12.0])
        self.finding("lipschitz.expanding_margin", T.check_regime())
        delta = self._delta(T)
        pairs = random_periodic_pairs(self.rng, self.parameters.get("pairs", 20), self.parameters.get("period", 2))

        result = empirical_lipschitz(T, pairs, delta, self.parameters.get("blocks", 200))
        self.add_artifact(
            "lipschitz_ratios",
            ["pair", "ratio"],
            [[i, "" if ratio is None else ratio] for i, ratio in enumerate(result["per_pair"])],
        )
        self.finding("lipschitz.max_ratio", result["max_ratio"])
        self.check_true("lipschitz.all_pairs_valid", result["invalid"] == 0, result["invalid"])
        if self.parameters.get("expect_contraction", "T_coeffs" not in self.parameters):
            for i, ratio in enumerate(result["per_pair"]):
                if ratio is not None:
                    self.check_below(f"lipschitz.ratio[{i}]", ratio, 1.0)

        self._darboux()

    def _darboux(self):
        n = self.parameters.get("darboux_n", 300)
        windows = [
            (first.window(0, n, WHOLE_LINE), second.window(0, n, WHOLE_LINE))
            for first, second in random_periodic_pairs(self.rng, 5)
        ]
        results = darboux_lipschitz(self.parameters.get("rho_values", [3.0, 4.0, 6.0]), windows)
        rows = []
        for entry in results:
            rho = entry["rho"]
            self.check_true(f"lipschitz.darboux[rho={rho:g}].max_ratio_finite", math.isfinite(entry["max_ratio"]), entry["max_ratio"])
            self.finding(f"lipschitz.darboux[rho={rho:g}].shape", entry["shape"])
            rows.append([rho, entry["max_ratio"], entry["shape"]])
        self.add_artifact("darboux_ratios", ["rho", "max_ratio", "shape"], rows)
