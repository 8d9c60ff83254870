"""
relgas - command-line front end.

    python -m relgas simulate         --config run.cfg --out out/
    python -m relgas verify-el        --config run.cfg
    python -m relgas check-noether    --config run.cfg --seed 3
    python -m relgas classify-entropy --config run.cfg
    python -m relgas diagnose         --config run.cfg --threads 4
    python -m relgas to-euler         --config run.cfg

Logs go to stderr; stdout carries exactly one JSON object.  Exit codes:
0 ok, 1 invalid input, 2 runtime guard tripped, 3 verification failure.
"""

import os


# Thread count for numpy's BLAS backends (override with RELGAS_THREADS).
def _configure_threads():
    desired = os.environ.get('RELGAS_THREADS')
    try:
        threads = int(desired) if desired else min(4, max(1, (os.cpu_count() or 2)))
    except ValueError:
        threads = min(4, max(1, (os.cpu_count() or 2)))
    for var in ['OPENBLAS_NUM_THREADS', 'OMP_NUM_THREADS']:
        if not os.environ.get(var):
            os.environ[var] = str(threads)
    return threads


_configure_threads()

import argparse
import logging
import sys
import traceback

from .config import load_config
from .errors import GUARD_ERRORS, RelGasError, VerificationFailure
from .pipeline.pipeline import RelGasPipeline
from .tools.artifact_export import dumps

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s',
    handlers=[logging.StreamHandler(sys.stderr)]
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_GUARD = 2
EXIT_VERIFICATION = 3

COMMANDS = {
    'simulate': ('simulate', 'Run the solver and write snapshots, diagnostics and a summary'),
    'verify-el': ('verify_el', 'Check the Euler-Lagrange form against the main equation'),
    'check-noether': ('check_noether', 'Tabulate Noether verdicts for every generator'),
    'classify-entropy': ('classify', 'Classify the configured entropy profile'),
    'diagnose': ('diagnose', 'Conservation diagnostics and refinement study'),
    'to-euler': ('to_euler', 'Map to Eulerian fields and check the Eulerian residuals'),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Path to a key = value configuration file')
    common.add_argument('--out', help='Output directory for artifacts (overrides "out")')
    common.add_argument('--seed', type=int, help='Random seed (overrides "seed")')
    common.add_argument('--threads', type=int, help='Worker threads (overrides "threads")')

    parser = argparse.ArgumentParser(prog='relgas', description='Relativistic Lagrangian gas dynamics checks')
    sub = parser.add_subparsers(dest='command', required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def exit_code(report: dict) -> int:
    if report.get('failure'):
        return EXIT_GUARD
    if report.get('passed') is False:
        return EXIT_VERIFICATION
    return EXIT_OK


def _fail(code: int, exc: BaseException) -> int:
    print(dumps({
        'status': 'error',
        'error': type(exc).__name__,
        'message': str(exc),
        'exit_code': code,
    }))
    sys.stdout.flush()
    return code


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    method, _ = COMMANDS[args.command]
    logger.info(f"relgas {args.command}")

    try:
        config = load_config(args.config).with_overrides(out=args.out, seed=args.seed, threads=args.threads)
    except (RelGasError, ValueError) as e:
        logger.error(f"Invalid configuration: {e}")
        return _fail(EXIT_INVALID, e)

    try:
        pipeline = RelGasPipeline(config)
        report = getattr(pipeline, method)()
    except GUARD_ERRORS as e:
        logger.error(f"Runtime guard tripped: {e}")
        return _fail(EXIT_GUARD, e)
    except VerificationFailure as e:
        logger.error(f"Verification failed: {e}")
        return _fail(EXIT_VERIFICATION, e)
    except (RelGasError, ValueError) as e:
        logger.error(f"Invalid input: {e}")
        return _fail(EXIT_INVALID, e)
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        logger.debug(traceback.format_exc())
        return _fail(EXIT_INVALID, e)

    code = exit_code(report)
    report['status'] = {EXIT_OK: 'ok', EXIT_GUARD: 'guard', EXIT_VERIFICATION: 'failed'}[code]
    report['exit_code'] = code
    print(dumps(report))
    sys.stdout.flush()
    logger.info(f"{args.command} finished with exit code {code}")
    return code


def main(argv=None):
    sys.exit(run(argv))

