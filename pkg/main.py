#!/usr/bin/env python3
"""
Coalgebra Engine - Main Application Entry Point

Batch front end for the comodule/contramodule engine:
1. Scenario validation
2. Scenario runs with structured and human-readable reports
3. Seeded fuzz campaigns with shrinking and a regression corpus
4. Re-rendering stored structured reports

Usage:
    python main.py validate scenarios/ktt-two-term.json
    python main.py run scenarios/sandbox-s3.json --seed 1 --out reports/s3.json
    python main.py fuzz adjunction --seed 1 --count 100
    python main.py fuzz coalgebra-axioms --mutate
    python main.py formats reports/s3.json --format human
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict

from config.config import Config
from src.algebra.errors import EngineError, ScenarioError
from src.database.database import DatabaseManager
from src.reports.report_generator import ReportGenerator
from src.scenarios.scenario import load_scenario
from src.services.fuzz_runner import FAMILIES, run_fuzz
from src.services.task_runner import TaskRunner

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_INVALID = 2


def setup_logging(verbose: bool = False):
    """Configure logging for the application"""
    os.makedirs(os.path.dirname(Config.LOG_FILE) or '.', exist_ok=True)

    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, Config.LOG_LEVEL),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(Config.LOG_FILE),
            logging.StreamHandler(sys.stderr)
        ]
    )


def _emit(report: Dict[str, Any], out: str = None, fmt: str = 'structured'):
    generator = ReportGenerator()
    if out:
        generator.write(report, out)
    else:
        sys.stdout.write(generator.render(report, fmt))


def run_validate_mode(path: str) -> Dict[str, Any]:
    """Check a scenario file without running its tasks"""
    logger = logging.getLogger(__name__)
    try:
        runner = TaskRunner(load_scenario(path))
        diagnostics = runner.validate()
        for d in diagnostics:
            print(f"{d['path']}: {d['message']}")
        if not diagnostics:
            print(f"{path}: ok ({len(runner.scenario.tasks)} tasks)")
        return {'success': not diagnostics, 'diagnostics': diagnostics}
    except (OSError, EngineError) as e:
        logger.error(f"Validation failed: {e}")
        return {'success': False, 'error': str(e)}


def run_scenario_mode(path: str, seed: int = None, cap: int = None, depth: int = None, out: str = None,
                      fmt: str = 'structured', use_corpus: bool = True) -> Dict[str, Any]:
    """Run every task of a scenario and emit its report"""
    logger = logging.getLogger(__name__)
    try:
        scenario = load_scenario(path)
        report = TaskRunner(scenario, seed, cap, depth).run()
        _emit(report, out, fmt)
        summary = report['report_data']['summary']
        if use_corpus:
            db = DatabaseManager()
            digest = ReportGenerator().digest(report)
            previous = db.previous_digest(scenario.name, report['report_metadata']['seed'])
            if previous and previous != digest:
                logger.warning(f"Report for {scenario.name} differs from the previous corpus run")
            db.save_run('scenario', scenario.name, report['report_metadata']['seed'], digest, summary['success'])
        logger.info(f"Scenario {scenario.name}: {summary['passed']} passed, {summary['failed']} failed, "
                    f"{summary['errors']} errors")
        return {'success': summary['success'], 'report': report,
                'invalid': 'diagnostics' in report['report_data']}
    except (OSError, ScenarioError) as e:
        logger.error(f"Run failed: {e}")
        return {'success': False, 'invalid': True, 'error': str(e)}


def run_fuzz_mode(family: str, seed: int, count: int, mutate: bool = False, cap: int = None, out: str = None,
                  fmt: str = 'structured', use_corpus: bool = True) -> Dict[str, Any]:
    """Seeded property campaign over one family"""
    logger = logging.getLogger(__name__)
    try:
        db = DatabaseManager() if use_corpus else None
        report = run_fuzz(family, seed, count, mutate, cap if cap is not None else Config.DEFAULT_CAP, db)
        _emit(report, out, fmt)
        return {'success': report['report_data']['summary']['success'], 'report': report}
    except EngineError as e:
        logger.error(f"Fuzz campaign failed: {e}")
        return {'success': False, 'invalid': True, 'error': str(e)}


def run_formats_mode(path: str, fmt: str = 'human', out: str = None) -> Dict[str, Any]:
    """Render a stored structured report"""
    logger = logging.getLogger(__name__)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            report = json.load(f)
        rendered = ReportGenerator().render(report, fmt)
        if out:
            with open(out, 'w', encoding='utf-8') as f:
                f.write(rendered)
        else:
            sys.stdout.write(rendered)
        return {'success': True}
    except (OSError, ValueError, KeyError) as e:
        logger.error(f"Rendering failed: {e}")
        return {'success': False, 'invalid': True, 'error': str(e)}


def main():
    """Main application entry point"""
    parser = argparse.ArgumentParser(
        description='Coalgebra Engine - comodule/contramodule computations over finite fields',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__
    )
    parser.add_argument('verb', choices=['validate', 'run', 'fuzz', 'formats'], help='Operation to perform')
    parser.add_argument('target', help='Scenario file, fuzz family or stored report')
    parser.add_argument('--seed', type=int, help='Seed for generated instances and randomized searches')
    parser.add_argument('--count', type=int, default=Config.DEFAULT_COUNT, help='Fuzz instance count')
    parser.add_argument('--depth', type=int, help='Tower depth for stabilization searches')
    parser.add_argument('--cap', type=int, help='Resolution length cap for derived functors')
    parser.add_argument('--out', help='Write the report here (markdown goes next to it)')
    parser.add_argument('--format', choices=['structured', 'human'], default=None, help='Rendering on stdout')
    parser.add_argument('--mutate', action='store_true', help='Fuzz coalgebra axioms with single-entry mutations')
    parser.add_argument('--no-corpus', action='store_true', help='Do not record the run in the regression corpus')
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable verbose logging')

    args = parser.parse_args()
    setup_logging(args.verbose)

    if args.verb == 'validate':
        result = run_validate_mode(args.target)
    elif args.verb == 'run':
        result = run_scenario_mode(args.target, args.seed, args.cap, args.depth, args.out,
                                   args.format or 'structured', not args.no_corpus)
    elif args.verb == 'fuzz':
        if args.target not in FAMILIES:
            parser.error(f"unknown fuzz family {args.target}, expected one of {', '.join(FAMILIES)}")
        result = run_fuzz_mode(args.target, args.seed if args.seed is not None else Config.DEFAULT_SEED,
                               args.count, args.mutate, args.cap, args.out, args.format or 'structured',
                               not args.no_corpus)
    else:
        result = run_formats_mode(args.target, args.format or 'human', args.out)

    if result.get('success'):
        sys.exit(EXIT_OK)
    sys.exit(EXIT_INVALID if result.get('invalid') or args.verb == 'validate' else EXIT_FAILURES)


if __name__ == "__main__":
    main()
