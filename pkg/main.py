#!/usr/bin/env python3
"""
TABS - Trajectory-adaptive beam shaping simulator
Main entry point for the command-line experiments
"""

import sys
import os
import argparse

# Add project root to Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from core.exceptions import ScenarioError, TabsError
from utils import config
from utils.logging_config import setup_logging, get_logger, log_error

logger = get_logger('tabs.cli')

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_SCENARIO = 2
EXIT_NUMERICAL = 3


def print_summary(command: str, summary: dict):
    """Print the command summary"""
    print("\n" + "=" * 50)
    print(f"{command.upper()} RESULTS")
    print("=" * 50)
    if command == 'design':
        print(f"Method: {summary['method']}")
        print(f"Elements: {summary['num_elements']}")
        print(f"Design wall time: {summary['design_seconds']:.6f} s")
        print(f"Operation count (O(N)): {summary['operation_count']}")
    elif command == 'fieldmap':
        print(f"Grid: {summary['nx']}x{summary['nz']} ({summary['threads']} threads)")
        print(f"Peak intensity: {summary['peak_intensity']:.6g}")
        if 'ridge_rms' in summary:
            print(f"Ridge deviation: rms={summary['ridge_rms']:.4g}, max={summary['ridge_max_abs']:.4g}")
    elif command == 'reliability':
        for method, values in summary['reliability'].items():
            pairs = ", ".join(f"{g:g}:{v:.4f}" for g, v in zip(summary['gammas'], values))
            print(f"  {method}: {pairs}")
        if 'multipoint' in summary:
            print(f"  multipoint K=1..{len(summary['multipoint'])}: "
                  + ", ".join(f"{v:.4f}" for v in summary['multipoint']))
    elif command == 'compare':
        for i, method in enumerate(summary['method']):
            print(f"  {method}: min I={summary['min_intensity'][i]:.6g}, "
                  f"switches={summary['switch_count'][i]}")
    print("=" * 50)


def run_command(command: str, scenario_path: str, out: str = None, threads: int = None,
                samples: int = None) -> int:
    """Load the scenario, run one command and map failures to exit codes"""
    from simulation.runner import COMMANDS, resolve_settings
    from simulation.scenario import load_scenario

    try:
        scenario = load_scenario(scenario_path)
        settings = resolve_settings(scenario, out=out, threads=threads, samples=samples)
        logger.info(f"Running {command} for scenario {scenario.name}",
                    output_dir=str(settings.output_dir), threads=settings.threads)
        summary = COMMANDS[command](scenario, settings)
    except ScenarioError as e:
        log_error('cli', e, {'command': command})
        print(f"Scenario error: {e}", file=sys.stderr)
        return EXIT_SCENARIO
    except TabsError as e:
        log_error('cli', e, {'command': command})
        print(f"Numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as e:
        log_error('cli', e, {'command': command, 'unexpected': True})
        print(f"Unexpected error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_UNEXPECTED

    print_summary(command, summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='TABS - Trajectory-adaptive beam shaping simulator')
    parser.add_argument('command', choices=['design', 'fieldmap', 'reliability', 'compare'],
                        help='Experiment: design (phase profile), fieldmap (intensity grid), '
                             'reliability (R_S sweep per method), compare (profiles and switch counts)')
    parser.add_argument('--scenario', required=True, help='Scenario JSON file')
    parser.add_argument('--out', default=None, help='Output directory (overrides the scenario)')
    parser.add_argument('--threads', type=int, default=None, help='Worker threads for grid evaluation')
    parser.add_argument('--samples', type=int, default=None, help='Trajectory sample count')
    parser.add_argument('--log-level', default=config.TABS_LOG_LEVEL,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='Logging level')
    parser.add_argument('--log-file', default=None, help='Additional log file')
    return parser


def main(argv=None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)

    # Setup logging
    setup_logging(args.log_level, log_file=args.log_file)

    try:
        return run_command(args.command, args.scenario, out=args.out,
                           threads=args.threads, samples=args.samples)
    except KeyboardInterrupt:
        logger.info("Run interrupted by user")
        return 130


if __name__ == "__main__":
    sys.exit(main())
