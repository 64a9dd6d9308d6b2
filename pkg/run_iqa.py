#!/usr/bin/env python3
"""
Command line interface for the full-reference image quality engine.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from bench.distortions import distortion_kinds
from bench.datasets import DATASET_ADAPTERS
from commands.config import OUTPUT_FORMATS, RunConfig, parse_axis, resolve_config
from commands.handlers import (
    cmd_ablate, cmd_bench, cmd_distort, cmd_features, cmd_import, cmd_score, cmd_summary,
    cmd_sweep, cmd_trend,
)
from model.center_surround import MODES
from model.errors import ConfigError, IQAError
from model.wavelet_bank import BOUNDARY_MODES

logger = logging.getLogger(__name__)

EPILOG = """
Examples:
  python run_iqa.py score ref.png dist.png                      # Score one pair at K1=31, K2=3
  python run_iqa.py bench manifest.csv --k1 31 --k2 3 --jobs 4  # Correlation report for a dataset
  python run_iqa.py sweep manifest.csv --k1 29:35:2 --k2 1:7:2  # 4x4 grid as CSV
  python run_iqa.py ablate manifest.csv --format csv            # Center-surround vs single windows
  python run_iqa.py distort ref.png gaussian_noise 5 --seed 7 --out ladder/
  python run_iqa.py features img.png --out img.ciiqf --scaling-csv scaling.csv
"""


def setup_logging(verbose: bool = False):
    """Log to stderr so stdout carries only the command's payload."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


class IQAArgumentParser(argparse.ArgumentParser):
    """Reports bad flags as configuration errors instead of exiting."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _common_flags(scalar_k: bool = True) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    if scalar_k:
        common.add_argument('--k1', type=float, help='Scaling offset K1 (default: 31)')
        common.add_argument('--k2', type=float, help='Scaling gain K2 (default: 3)')
    common.add_argument('--cr-threshold', type=float, help='Color ratio threshold (default: 0.25)')
    common.add_argument('--sigma-floor', type=float, help='Lower bound on deviations in scaling (default: 1e-6)')
    common.add_argument('--mode', choices=MODES, help='Normalization mode: cs, win3, win5 or win7 (default: cs)')
    common.add_argument('--boundary', choices=BOUNDARY_MODES, help='Wavelet boundary handling (default: symmetric)')
    common.add_argument('--no-approximation', dest='include_approximation', action='store_const',
                        const=False, help='Leave the approximation map out of the feature vector')
    common.add_argument('--jobs', '-j', type=int, help='Worker threads for dataset scoring (default: 1)')
    common.add_argument('--out', '-o', type=str, help='Write output to this path instead of stdout')
    common.add_argument('--format', '-f', choices=OUTPUT_FORMATS, help='Output format (default: json)')
    common.add_argument('--config', '-c', type=str, help='key=value file with run settings')
    common.add_argument('--verbose', '-v', action='store_true', help='Enable verbose logging')
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = IQAArgumentParser(
        description="Full-reference image quality assessment with wavelet feature distances",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    common = _common_flags()
    sub = parser.add_subparsers(dest='command', required=True)

    score = sub.add_parser('score', parents=[common], help='Score one reference/distorted pair')
    score.add_argument('ref')
    score.add_argument('dist')

    features = sub.add_parser('features', parents=[common], help='Dump the feature vector of one image')
    features.add_argument('image')
    features.add_argument('--normalized-png', type=str, help='Also write the normalized L reconstruction')
    features.add_argument('--scaling-csv', type=str, help='Also write per-map sigma and delta')

    bench = sub.add_parser('bench', parents=[common], help='Correlation report for a manifest')
    bench.add_argument('manifest')
    bench.add_argument('--plcc-raw', action='store_const', const=True, help='Also report PLCC on raw scores')
    bench.add_argument('--plot', type=str, help='Write a scatter plot with the fitted curve (HTML)')

    sweep = sub.add_parser('sweep', parents=[_common_flags(scalar_k=False)], help='K1/K2 grid of SRCC')
    sweep.add_argument('manifest')
    sweep.add_argument('--k1', type=str, default='31', help='K1 axis, start:stop:step or list (default: 31)')
    sweep.add_argument('--k2', type=str, default='3', help='K2 axis, start:stop:step or list (default: 3)')
    sweep.add_argument('--plot', type=str, help='Write an SRCC heatmap (HTML)')

    ablate = sub.add_parser('ablate', parents=[common], help='Center-surround against single windows')
    ablate.add_argument('manifest')
    ablate.add_argument('--windows', type=str, default='3,5,7', help='Window sizes (default: 3,5,7)')

    distort = sub.add_parser('distort', parents=[common], help='Write a seeded distortion ladder')
    distort.add_argument('ref')
    distort.add_argument('kind', choices=distortion_kinds())
    distort.add_argument('levels', type=int)
    distort.add_argument('--seed', type=int, help='Noise seed (default: 0)')
    distort.add_argument('--manifest', type=str, help='Also write a manifest with this file name')

    trend = sub.add_parser('trend', parents=[common], help='Per-level detail deviation of images')
    trend.add_argument('images', nargs='+')
    trend.add_argument('--plot', type=str, help='Write the deviation curves (HTML)')

    summary = sub.add_parser('summary', parents=[common], help='Cross-dataset summary of bench reports')
    summary.add_argument('reports', nargs='+')

    importer = sub.add_parser('import-dataset', parents=[common], help='Manifest from a public dataset layout')
    importer.add_argument('dataset', choices=sorted(DATASET_ADAPTERS))
    importer.add_argument('root')

    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        'cr_threshold': args.cr_threshold,
        'sigma_floor': args.sigma_floor,
        'mode': args.mode,
        'boundary': args.boundary,
        'include_approximation': args.include_approximation,
        'jobs': args.jobs,
        'format': args.format,
        'seed': getattr(args, 'seed', None),
        'plcc_raw': getattr(args, 'plcc_raw', None),
    }
    if args.command == 'sweep':
        # Sweep output defaults to the grid CSV.
        overrides['format'] = args.format or 'csv'
    else:
        overrides['k1'] = args.k1
        overrides['k2'] = args.k2
    return resolve_config(args.config, **overrides)


def _windows(text: str) -> List[int]:
    try:
        return [int(w) for w in text.split(',') if w.strip()]
    except ValueError:
        raise ConfigError(f"invalid window list '{text}'")


def run(args: argparse.Namespace) -> str:
    config = _config(args)
    if args.command == 'score':
        return cmd_score(args.ref, args.dist, config)
    if args.command == 'features':
        return cmd_features(args.image, args.out, config, args.normalized_png, args.scaling_csv)
    if args.command == 'bench':
        return cmd_bench(args.manifest, config, args.plot)
    if args.command == 'sweep':
        return cmd_sweep(args.manifest, parse_axis(args.k1), parse_axis(args.k2), config, args.plot)
    if args.command == 'ablate':
        return cmd_ablate(args.manifest, config, _windows(args.windows))
    if args.command == 'distort':
        if not args.out:
            raise ConfigError("distort needs --out for the output directory")
        return cmd_distort(args.ref, args.kind, args.levels, config.seed, args.out, args.manifest)
    if args.command == 'trend':
        return cmd_trend(args.images, config, args.plot)
    if args.command == 'summary':
        return cmd_summary(args.reports, config)
    if args.command == 'import-dataset':
        if not args.out:
            raise ConfigError("import-dataset needs --out for the manifest path")
        return cmd_import(args.dataset, args.root, args.out)
    raise ConfigError(f"Unknown command: {args.command}")


# Commands whose --out names their own artifact; the payload still goes to stdout.
_OWN_OUTPUT = ('features', 'distort', 'import-dataset')


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as e:
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return e.exit_code
    setup_logging(args.verbose)

    try:
        payload = run(args)
    except IQAError as e:
        logger.error(f"{args.command} failed: {e}")
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"{args.command} failed unexpectedly")
        print(json.dumps({'success': False, 'error': str(e), 'type': type(e).__name__}), file=sys.stderr)
        return 1

    if args.out and args.command not in _OWN_OUTPUT:
        with open(args.out, 'w') as f:
            f.write(payload)
        logger.info(f"Wrote {args.command} output to {args.out}")
    else:
        sys.stdout.write(payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
