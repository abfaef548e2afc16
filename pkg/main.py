"""RankSpike - zeros of elliptic-curve and quadratic-character L-functions, and their statistics."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import config
from core.errors import ValidationError
from core.runner import PREDICTION_KINDS, JobConfig, parse_range, run


def setup_logging(verbose: bool = False):
    """Configure application logging."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stdout)
        ],
        force=True
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--output', '-o', type=Path, help="Artifact path (default: timestamped name)")
    common.add_argument('--cache-dir', type=Path, default=None,
                        help=f"a(p) cache and run history (default: {config.CACHE_DIR})")
    common.add_argument('--no-cache', action='store_true', help="Do not read or write the a(p) cache")
    common.add_argument('--parallelism', '-j', type=int, default=config.DEFAULT_PARALLELISM)
    common.add_argument('--extended', action='store_true', help="Allow hours-scale runs past the EXTENDED_MAX_* limits in config.py")
    common.add_argument('--pdf', action='store_true', help="Also write a one-page PDF summary")
    common.add_argument('--verbose', '-v', action='store_true')

    parser = argparse.ArgumentParser(prog='rankspike', description=__doc__)
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('aptable', parents=[common], help="a(p) table of a curve")
    p.add_argument('--curve', help="Alias (E1..E7, E11, E24, C15) or '[a1,a2,a3,a4,a6] N=.. r=..'")
    p.add_argument('--curve-file', type=Path, help="One curve per line; writes one row per curve")
    p.add_argument('--X', type=int, required=True)
    p.add_argument('--naive', action='store_true', help="Character sums only, no baby-step/giant-step")

    p = sub.add_parser('bias', parents=[common], help="Bias statistics of sum log(p) a(p)")
    p.add_argument('--curve', required=True)
    p.add_argument('--X', type=int, required=True)
    p.add_argument('--zeros', type=Path, help="Zero table of L(E, s) for the explicit-formula check")
    p.add_argument('--rank', type=int)
    p.add_argument('--naive', action='store_true')

    p = sub.add_parser('zplot', parents=[common], help="Hardy Z on a grid")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument('--zeta', action='store_true')
    source.add_argument('--disc', type=int)
    source.add_argument('--curve')
    p.add_argument('--t', required=True, help="a:b:step")
    p.add_argument('--uncorrected', action='store_true',
                   help="Divide by 1/|zeta(1+it)|^r instead of the local-corrected prediction")

    p = sub.add_parser('zeros', parents=[common], help="Certified zero lists")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument('--zeta', action='store_true')
    source.add_argument('--disc', type=int)
    source.add_argument('--curve')
    source.add_argument('--disc-range', help="A:B, all fundamental d with A < d < B")
    p.add_argument('--T', type=float)
    p.add_argument('--count', type=int)
    p.add_argument('--sign', choices=('both', 'positive', 'negative'), default='both')

    p = sub.add_parser('density', parents=[common], help="One-level density against prediction")
    p.add_argument('--disc-range', required=True)
    p.add_argument('--sign', choices=('positive', 'negative'), default='positive')
    p.add_argument('--mode', choices=('raw', 'rescaled'), default='raw')
    p.add_argument('--bin-width', type=float)
    p.add_argument('--lo', type=float)
    p.add_argument('--hi', type=float)

    p = sub.add_parser('paircorr', parents=[common], help="Pair correlation of zeta zeros")
    p.add_argument('--zeros', type=Path, help="Zero table (one ordinate per line)")
    p.add_argument('--T', type=float)
    p.add_argument('--count', type=int)
    p.add_argument('--mode', choices=('raw', 'montgomery'), default='raw')
    p.add_argument('--bin-width', type=float)
    p.add_argument('--lo', type=float)
    p.add_argument('--hi', type=float)
    p.add_argument('--main-term-only', action='store_true')

    p = sub.add_parser('predict', parents=[common], help="Prediction curves")
    p.add_argument('--kind', choices=PREDICTION_KINDS, default='rank-ratio')
    p.add_argument('--curve')
    p.add_argument('--rank', type=int)
    p.add_argument('--uncorrected', action='store_true')
    p.add_argument('--disc', type=int)
    p.add_argument('--disc-range')
    p.add_argument('--sign', choices=('positive', 'negative'), default='positive')
    p.add_argument('--t', help="a:b:step")
    p.add_argument('--T', type=float)
    p.add_argument('--bin-width', type=float)
    p.add_argument('--lo', type=float)
    p.add_argument('--hi', type=float)
    p.add_argument('--kernel', choices=('gue', 'symplectic'), default='gue')
    p.add_argument('--main-term-only', action='store_true')

    p = sub.add_parser('discriminants', parents=[common], help="Count fundamental discriminants")
    p.add_argument('--disc-range', required=True)
    p.add_argument('--sign', choices=('both', 'positive', 'negative'), default='positive')
    p.add_argument('--prime-window', action='store_true', help="Count d = +-p for primes p in [A, B)")

    sub.add_parser('history', parents=[common], help="Run history statistics")
    return parser


def build_config(args: argparse.Namespace) -> JobConfig:
    """Map parsed arguments onto a JobConfig."""
    def get(name, default=None):
        return getattr(args, name, default)

    cache_dir = None if args.no_cache else (args.cache_dir or config.CACHE_DIR)
    return JobConfig(
        command=args.command,
        curve=get('curve'),
        curve_file=get('curve_file'),
        zeta=bool(get('zeta', False)),
        disc=get('disc'),
        disc_range=parse_range(args.disc_range, 2, int) if get('disc_range') else None,
        zeros_file=get('zeros'),
        X=get('X'),
        T=get('T'),
        count=get('count'),
        t_range=parse_range(args.t, 3) if get('t') else None,
        bin_width=get('bin_width'),
        lo=get('lo'),
        hi=get('hi'),
        mode=get('mode', 'raw'),
        kind=get('kind', 'rank-ratio'),
        kernel=get('kernel', 'gue'),
        rank=get('rank'),
        uncorrected=bool(get('uncorrected', False)),
        lower_terms=not get('main_term_only', False),
        sign=get('sign', 'positive'),
        prime_window=bool(get('prime_window', False)),
        output=args.output,
        pdf=args.pdf,
        cache_dir=cache_dir,
        parallelism=args.parallelism,
        extended=args.extended,
        accelerate=not get('naive', False),
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point."""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    logger = logging.getLogger(__name__)
    logger.info(f"Starting RankSpike {args.command}...")

    try:
        cfg = build_config(args)
    except ValidationError as e:
        logger.error(f"Invalid arguments [{e.code}]: {e.message}")
        return e.exit_status

    result = run(cfg)
    for path in result.artifacts:
        logger.info(f"Wrote {path}")
    if result.exit_status != 0:
        logger.error(f"Exit status {result.exit_status} ({result.error_code}): {result.message}")
    return result.exit_status


if __name__ == "__main__":
    sys.exit(main())
