import argparse
import json
import logging
import os
import sys
import time

import jsonschema
from dotenv import load_dotenv

from experiments import KINDS, ConfigError, ExperimentRunner, __version__
from publisher.report_publisher import ReportPublisher

EXIT_PASS = 0
EXIT_FAILED_CHECKS = 1
EXIT_INVALID_CONFIG = 2

DEFAULT_OUTPUT_DIR = "reports"


def _load_config(path, kind, seed, output_dir):
    """Read the config file and apply command line overrides. A missing file means an empty config."""
    config = {}
    if path:
        with open(path, "r", encoding="utf-8") as f:
            config = json.load(f)
        if not isinstance(config, dict):
            raise ConfigError("The config file must contain a JSON object.")
    if config.get("kind", kind) != kind:
        raise ConfigError(f"Config is for kind '{config['kind']}' but the command is '{kind}'.")
    config["kind"] = kind
    if seed is not None:
        config["seed"] = seed
    config.setdefault("seed", 0)
    if output_dir:
        config["output_dir"] = output_dir
    return config


def run(kind, config_path=None, seed=None, output_dir=None):
    """
    Runs one experiment end to end and returns the process exit code.

    Exit codes:
    -----------
    - 0: every check passed.
    - 1: at least one check failed, numerical failures included (the failing checks are logged by name).
    - 2: the config could not be read, does not match the schema of its kind, or holds values the
      runner rejects as parameters.
    """
    try:
        config = _load_config(config_path, kind, seed, output_dir)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError, ConfigError) as e:
        logging.error(f"[renorm_app][{kind}] Invalid config: {e}")
        return EXIT_INVALID_CONFIG
    try:
        report = ExperimentRunner(__version__).run_experiment(config, kind)
    except jsonschema.exceptions.ValidationError as e:
        logging.error(f"[renorm_app][{kind}] Invalid config: {e.message} at {'/'.join(str(p) for p in e.absolute_path) or '<root>'}")
        return EXIT_INVALID_CONFIG
    except ConfigError as e:
        logging.error(f"[renorm_app][{kind}] Invalid config: {e}")
        return EXIT_INVALID_CONFIG

    publisher = ReportPublisher(config.get("output_dir", DEFAULT_OUTPUT_DIR))
    paths = publisher.publish(report)
    logging.info(f"[renorm_app][{kind}] Checks:\n{report.table()}")
    logging.info(f"[renorm_app][{kind}] Report written to {paths['report']}")
    if not report.passed:
        logging.error(f"[renorm_app][{kind}] Failed checks: {', '.join(report.failed_checks)}")
        return EXIT_FAILED_CHECKS
    return EXIT_PASS


def main(argv=None):
    load_dotenv()
    logging.basicConfig(
        level=os.getenv("SPECTRAL_RENORM_LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    parser = argparse.ArgumentParser(
        prog="spectral-renorm",
        description="Renormalization experiments for Jacobi, CMV and banded operators.",
    )
    parser.add_argument("kind", choices=KINDS, help="Experiment kind")
    parser.add_argument("-c", "--config", help="Experiment config JSON file")
    parser.add_argument("-s", "--seed", type=int, help="Seed overriding the config")
    parser.add_argument("-o", "--out", help="Output directory overriding the config")
    parser.add_argument("-V", "--version", action="version", version=f"%(prog)s {__version__}")
    args = parser.parse_args(argv)

    start_time = time.time()
    code = run(args.kind, args.config, args.seed, args.out)
    elapsed_time = time.time() - start_time
    logging.info(f"[renorm_app][{args.kind}] Finished in {elapsed_time:.2f} seconds with exit code {code}.")
    return code


if __name__ == "__main__":
    sys.exit(main())
