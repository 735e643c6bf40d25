from covering.branching import BranchingData, equivalent, sigma_infinity, validate
from .base_runner import BaseRunner

DEFAULT_BRANCHING = {"d": 2, "points": [[-1.0, 0.0], [1.0, 0.0]], "sigmas": [[2, 1], [2, 1]]}


class CoveringRunner(BaseRunner):
    """Validates a branching divisor: connectivity, the cycle type at infinity and the genus."""

    kind = "validate_covering"

    def run(self):
        data = self.from_config(BranchingData.from_dict, self.parameters.get("branching", DEFAULT_BRANCHING))
        result = validate(data)
        infinity = sigma_infinity(data)
        self.finding("covering.sigma_infinity", [image + 1 for image in infinity.array_form])
        self.check_true("covering.connected", result["connected"])
        self.finding("covering.infinity_orbits", result["infinity_orbits"])
        self.finding("covering.genus", result["genus"])

        expected_genus = self.parameters.get("expected_genus", 0 if "branching" not in self.parameters else None)
        if expected_genus is not None:
            self.check_true("covering.genus_matches", result["genus"] == expected_genus, result["genus"])

        if "compare_with" in self.parameters:
            other = self.from_config(BranchingData.from_dict, self.parameters["compare_with"])
            same = equivalent(data, other)
            self.finding("covering.equivalent", same)
            if same:
                self.check_true("covering.equivalent_validate_agrees", validate(other) == result)
