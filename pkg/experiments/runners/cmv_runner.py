import numpy as np

from cmv.operator import VerblunskySeq, build_cmv, five_diagonal_check
from cmv.schur_flow import schur_flow_step
from .base_runner import BaseRunner


class CmvRunner(BaseRunner):
    """CMV assembly checks and a Schur-flow trajectory of the Verblunsky coefficients."""

    kind = "cmv"

    def run(self):
        seq = self._sequence()
        cmv = build_cmv(seq)
        self.check_max("cmv.unitary_defect", cmv.unitary_defect, 1e-13)
        circle = float(np.max(np.abs(np.abs(np.linalg.eigvals(cmv.window.to_dense())) - 1.0)))
        self.check_max("cmv.spectrum_on_circle", circle, 1e-10)

        residuals = five_diagonal_check(cmv, seq)
        for name in ("diag", "first", "second", "outside_band"):
            self.check_max(f"cmv.five_diagonal.{name}", residuals[name], 1e-12)
        self.check_max("cmv.third_superdiagonal", residuals["third_superdiagonal"], 1e-14)
        self.finding("cmv.second_superdiagonal_min", residuals["second_superdiagonal_min"])

        dt = self.parameters.get("dt", 1e-3)
        n_steps = max(1, int(round(self.parameters.get("t_final", 1.0) / dt)))
        projection = self.parameters.get("projection", "skew")
        record_every = self.parameters.get("record_every", max(1, n_steps // 20))
        trajectory = schur_flow_step(seq, dt, n_steps, projection, record_every)

        header = ["t", "unitary_defect", "spectral_drift"] + [f"a{k}_{part}" for k in range(seq.n) for part in ("re", "im")]
        rows = []
        for entry in trajectory:
            values = [v for pair in entry["seq"].to_pairs() for v in pair]
            rows.append([entry["t"], entry["unitary_defect"], entry["spectral_drift"]] + values)
        self.add_artifact("schur_flow", header, rows)

        t_final = trajectory[-1]["t"]
        drift = max(entry["spectral_drift"] for entry in trajectory)
        self.check_max("cmv.schur_flow.spectral_drift", drift, 1e-6 * max(1.0, t_final))
        self.check_max("cmv.schur_flow.unitary_defect", max(entry["unitary_defect"] for entry in trajectory), 1e-10)
        moved = float(np.max(np.abs(trajectory[-1]["seq"].a - seq.a)))
        self.finding("cmv.schur_flow.coefficient_change", moved)

    def _sequence(self):
        if "a" in self.parameters:
            return self.from_config(VerblunskySeq.from_pairs, self.parameters["a"])
        n = self.parameters.get("n", 64)
        radius = self.rng.uniform(0.0, self.parameters.get("max_abs", 0.5), n)
        if self.parameters.get("real", False):
            return VerblunskySeq(radius * self.rng.choice([-1.0, 1.0], n))
        return VerblunskySeq(radius * np.exp(2j * np.pi * self.rng.uniform(0.0, 1.0, n)))
