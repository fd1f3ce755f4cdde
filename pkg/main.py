#!/usr/bin/env python3
"""
popdyn: predator-prey and competition ODE toolkit

Runs one analysis command against a scenario file or a bundled preset and
writes a JSON summary plus CSV tables.
"""

import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from pipeline.orchestrator import COMMANDS, ScenarioRunner, load_scenario
from utils.config_loader import apply_overrides, load_config, read_scenario_file
from utils.exceptions import ConfigurationError, NumericalError, PopdynError, TheoremPreconditionError
from utils.logging_config import configure_library_logging, setup_logging

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIGURATION = 2
EXIT_NUMERICAL = 3
EXIT_PRECONDITION = 4


def parse_arguments(argv=None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description="Predator-prey and competition ODE analysis",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s equilibria ej311                      # Equilibria of a bundled preset
  %(prog)s hopf --scenario fig48.toml            # Hopf threshold and transversality
  %(prog)s sweep fig44 --jobs 8 --out out/fig44  # Invasion outcome grid
  %(prog)s chaos ch5_chaos --seed 7              # Chaos diagnostics with another seed
  %(prog)s simulate ej311 --override integrator.t_end=500

Exit codes: 0 ok, 2 invalid scenario or configuration, 3 numerical failure,
4 hypothesis of a threshold result not satisfied, 1 anything else.
        """
    )

    parser.add_argument(
        "command",
        choices=COMMANDS,
        help="Analysis to run"
    )

    parser.add_argument(
        "scenario_path",
        nargs="?",
        help="Scenario file or preset name (same as --scenario)"
    )

    parser.add_argument(
        "--scenario",
        help="Scenario file (.toml, .json, .yaml) or preset name"
    )

    parser.add_argument(
        "--out",
        type=Path,
        default=Path("out"),
        help="Directory for summaries and tables (default: ./out)"
    )

    parser.add_argument(
        "--jobs",
        type=int,
        help="Worker pool size for sweeps and diagnostics"
    )

    parser.add_argument(
        "--seed",
        type=int,
        help="Seed of the randomised diagnostics"
    )

    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a scenario value, e.g. model.m=0.3 (repeatable)"
    )

    parser.add_argument(
        "--config",
        type=Path,
        help="Path to config file (default: config.yaml next to this script)"
    )

    parser.add_argument(
        "--verbose", "-v",
        action="store_true",
        help="Enable verbose logging"
    )

    return parser.parse_args(argv)


def main(argv=None) -> int:
    """Main entry point."""
    try:
        args = parse_arguments(argv)
        source = args.scenario or args.scenario_path
        if not source:
            raise ConfigurationError("No scenario given; pass a path or preset name")
        if args.jobs is not None and args.jobs < 1:
            raise ConfigurationError("--jobs must be at least 1")

        config_path = args.config or Path(__file__).parent / "config.yaml"
        config = load_config(config_path)

        log_level = "DEBUG" if args.verbose else config["logging"]["level"]
        log_file = config["logging"].get("file")
        logger = setup_logging(log_level, Path(log_file) if log_file else None)
        configure_library_logging()

        data = apply_overrides(read_scenario_file(source), args.override)
        scenario = load_scenario(data)
        logger.info(f"Scenario '{scenario.name}' from {source}")

        runner = ScenarioRunner(config, args.out, max_workers=args.jobs, seed=args.seed)
        summary = runner.run(args.command, scenario)
        print(json.dumps(summary, indent=2, sort_keys=True))
        return EXIT_OK

    except KeyboardInterrupt:
        print("\nOperation cancelled by user.", file=sys.stderr)
        return EXIT_FAILURE
    except (ConfigurationError, ValidationError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIGURATION
    except NumericalError as e:
        print(f"Numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except TheoremPreconditionError as e:
        print(f"Hypothesis not satisfied: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except PopdynError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as e:
        print(f"Unexpected error: {e!r}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
