import datetime
import logging
import os
from typing import Dict, List

from utils.file_utils import canonical_json, config_hash, ensure_dir, write_csv, write_text


class ReportPublisher:
    """
    Writes experiment reports to an output directory.

    File names embed the kind and a hash of the config and tool version, so reruns of the same
    config land on the same files and different configs never overwrite each other. The report
    itself carries no timestamps; wall time and the UTC run time go to a `.timing.json` sidecar.
    """

    def __init__(self, output_dir: str):
        self.output_dir = output_dir

    def _stem(self, report) -> str:
        h = config_hash(report.config, report.version)
        return f"report-{report.kind}-{h[:12]}"

    def emit_plotdata(self, report) -> List[str]:
        """One CSV per report artifact, rows in the order the runner produced them."""
        ensure_dir(self.output_dir)
        stem = self._stem(report)
        paths = []
        for name in sorted(report.artifacts):
            artifact = report.artifacts[name]
            path = os.path.join(self.output_dir, f"{stem}-{name}.csv")
            paths.append(write_csv(path, artifact["header"], artifact["rows"]))
        return paths

    def publish(self, report) -> Dict[str, object]:
        ensure_dir(self.output_dir)
        stem = self._stem(report)
        report_path = write_text(os.path.join(self.output_dir, f"{stem}.json"), canonical_json(report.to_dict(), indent=2) + "\n")
        timing = {
            "wall_time_seconds": round(report.wall_time, 3),
            "finished_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        }
        timing_path = write_text(os.path.join(self.output_dir, f"{stem}.timing.json"), canonical_json(timing, indent=2) + "\n")
        csv_paths = self.emit_plotdata(report)
        logging.info(f"[report_publisher][{report.kind}] Wrote {report_path} and {len(csv_paths)} CSV files.")
        return {"report": report_path, "timing": timing_path, "csv": csv_paths}
