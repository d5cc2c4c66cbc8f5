"""Command line interface for shubin-spectra.

Subcommands run the stages of a job file (or of a bundled job) and write
report.json plus tables and plots to the output directory.

Exit codes: 0 success, 1 input/config/resource error, 2 hypothesis failure.
"""
import argparse
import json
import logging
import sys
import traceback
from pathlib import Path

from . import __version__
from .analysis import ExpansionCoefficients, classify_decay
from .config import DEFAULT_LAMBDA_GRID, KERNEL_POLICIES, JobConfig
from .errors import ConfigError, HypothesisError, ShubinSpectraError
from .pipeline import SpectraJob
from .reports import read_coefficients_csv, write_json
from .weights import WeightSequence, check_conditions

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_HYPOTHESIS = 2


def _configure_logging(debug):
    level = logging.DEBUG if debug else logging.WARNING
    logging.basicConfig(level=level, format='[%(levelname)s] %(name)s: %(message)s', force=True)


def _load_job(args):
    config = JobConfig.load(args.job, output_dir=getattr(args, 'output', None))
    seed = getattr(args, 'seed', None)
    if seed is not None:
        config.seed = seed
    print(f"📂 Job: {config.source_path}")
    return SpectraJob(config, threads=getattr(args, 'threads', None))


def _finish(job, args):
    out = job.write_outputs(getattr(args, 'output', None))
    print(f"📁 Report written to: {out.resolve()}")
    return EXIT_OK


def _print_verdicts(decay):
    print(f"   lambda* = {decay.lambda_star:g}   C* = {decay.c_star:.6g}")
    print(f"   Roumieu: {'✓' if decay.verdict_roumieu else '❌'}   "
          f"Beurling: {'✓' if decay.verdict_beurling else '❌'}")


def _print_conditions(report):
    marks = {True: '✓', False: '❌'}
    print(f"   (M.1)  {marks[report.m1_ok]}"
          + (f"  first violation at p={report.m1_violation}" if not report.m1_ok else ''))
    print(f"   (M.2)' {marks[report.m2prime_ok]}  A={report.m2prime_A:.4g} H={report.m2prime_H:.4g}")
    print(f"   (M.2)  {marks[report.m2_ok]}  A={report.m2_A:.4g} H={report.m2_H:.4g}")
    print(f"   Roumieu assumption {marks[report.assumption_roumieu]}"
          + (f"  l={report.roumieu_l:.4g}" if report.assumption_roumieu else ''))
    print(f"   Beurling assumption {marks[report.assumption_beurling]}")
    if report.finite_range:
        print("⚠️  Verdicts are checked on a finite index range only")


def cmd_run(args):
    """Run every enabled stage of a job"""
    job = _load_job(args)
    print("\n=== Running job ===")
    try:
        job.run()
    except HypothesisError:
        job.write_outputs(getattr(args, 'output', None))
        raise
    summary = job.report['spectrum']['summary']
    print(f"✓ {summary['trusted']} of {summary['count']} eigenpairs trusted")
    if job.decay is not None:
        _print_verdicts(job.decay)
    return _finish(job, args)


def cmd_check_weights(args):
    """Structural conditions of a weight sequence"""
    if args.weights:
        data = json.loads(Path(args.weights).read_text(encoding='utf-8'))
        weights = WeightSequence.from_dict(data)
        print(f"📂 Weights: {args.weights}")
        report = check_conditions(weights)
        _print_conditions(report)
        if args.output:
            write_json(Path(args.output) / 'report.json', {'weights': report.to_dict()})
        return EXIT_OK
    if not args.job:
        raise ConfigError('job', 'give a job file or --weights')
    job = _load_job(args)
    report = job.check_weights()
    _print_conditions(report)
    return _finish(job, args)


def cmd_check_operator(args):
    """Normality and global ellipticity of the job operator"""
    job = _load_job(args)
    try:
        section = job.check_operator()
    except HypothesisError:
        job.write_outputs(getattr(args, 'output', None))
        raise
    if 'normality' in section:
        print(f"✓ Normal (discrepancy {section['normality']['discrepancy']:.3e})")
    if 'ellipticity' in section:
        print(f"✓ Globally elliptic (min |p_m| = {section['ellipticity']['min_modulus']:.4g})")
    return _finish(job, args)


def cmd_spectrum(args):
    """Eigenpairs and Weyl fit"""
    job = _load_job(args)
    job.build_spectrum()
    summary = job.report['spectrum']['summary']
    print(f"✓ {summary['trusted']} of {summary['count']} eigenpairs trusted")
    if job.weyl is not None:
        print(f"   Weyl: B = {job.weyl.B:.4f}, exponent = {job.weyl.exponent:.4f} "
              f"(expected {job.weyl.expected_exponent:g})")
    return _finish(job, args)


def cmd_classify(args):
    """Decay classification of a test function or a coefficient file"""
    if args.coeffs:
        if not args.weights:
            raise ConfigError('weights', '--coeffs needs --weights')
        weights = WeightSequence.from_dict(json.loads(Path(args.weights).read_text(encoding='utf-8')))
        coeffs = ExpansionCoefficients(read_coefficients_csv(args.coeffs), source=Path(args.coeffs).name)
        grid = tuple(args.lambda_grid) if args.lambda_grid else DEFAULT_LAMBDA_GRID
        print(f"📂 Coefficients: {args.coeffs} ({len(coeffs)} entries)")
        decay = classify_decay(coeffs, weights, args.dim, grid)
        _print_verdicts(decay)
        if args.output:
            write_json(Path(args.output) / 'report.json', {'decay': decay.to_dict()})
            print(f"📁 Report written to: {Path(args.output).resolve()}")
        return EXIT_OK
    if not args.job:
        raise ConfigError('job', 'give a job file or --coeffs')
    job = _load_job(args)
    if args.lambda_grid:
        job.config.lambda_grid = tuple(sorted(args.lambda_grid))
    job.classify()
    _print_verdicts(job.decay)
    return _finish(job, args)


def cmd_norms(args):
    """Iterate, derivative and Sobolev norm families"""
    job = _load_job(args)
    equivalence = job.norms()
    print(f"   iterate norms finite: {'✓' if equivalence.finite_iterate else '❌'}")
    print(f"   derivative norms finite: {'✓' if equivalence.finite_prime else '❌'}")
    if not equivalence.consistent:
        print("⚠️  Iterate and derivative norm families disagree")
    if not equivalence.plain_implies_iterate:
        print(f"⚠️  Plain norms finite where iterate norms at {equivalence.inclusion_scale:.3g}h are not")
    return _finish(job, args)


def cmd_solve(args):
    """Solve P u = f by eigen-division"""
    job = _load_job(args)
    job.solve(kernel_policy=args.kernel_policy)
    section = job.report['solve']
    if section['dropped_mass']:
        print(f"⚠️  Projected away kernel mass {section['dropped_mass']:.3e}")
    print(f"✓ Solution classified (same verdicts as f: {section['same_verdicts']})")
    return _finish(job, args)


def _add_common(parser, job_required=True):
    if job_required:
        parser.add_argument('job', help='Job file (JSON) or name of a bundled job')
    else:
        parser.add_argument('job', nargs='?', help='Job file (JSON) or name of a bundled job')
    parser.add_argument('--output', '-o', help='Output directory (default: from job file)')
    parser.add_argument('--threads', type=int, help='Worker threads (default: SHUBIN_SPECTRA_THREADS or 1)')
    parser.add_argument('--seed', type=int, help='Override the job seed')
    parser.add_argument(
        '--debug',
        action='store_true',
        help='Debug mode: Verbose logging output'
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog='shubin-spectra',
        description='shubin-spectra - spectral analysis of Shubin operators in Gelfand-Shilov classes',
        epilog='Example: shubin-spectra run ho1d_gevrey_half --output out --debug'
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    run_parser = subparsers.add_parser('run', help='Run all enabled stages of a job')
    _add_common(run_parser)
    run_parser.set_defaults(handler=cmd_run)

    weights_parser = subparsers.add_parser('check-weights', help='Check weight sequence conditions')
    _add_common(weights_parser, job_required=False)
    weights_parser.add_argument('--weights', '-w', help='Weight sequence JSON (instead of a job)')
    weights_parser.set_defaults(handler=cmd_check_weights)

    operator_parser = subparsers.add_parser('check-operator', help='Check normality and ellipticity')
    _add_common(operator_parser)
    operator_parser.set_defaults(handler=cmd_check_operator)

    spectrum_parser = subparsers.add_parser('spectrum', help='Compute eigenpairs and the Weyl fit')
    _add_common(spectrum_parser)
    spectrum_parser.set_defaults(handler=cmd_spectrum)

    classify_parser = subparsers.add_parser('classify', help='Classify eigen-coefficient decay')
    _add_common(classify_parser, job_required=False)
    classify_parser.add_argument('--coeffs', help='CSV with re[, im] columns of eigen-coefficients')
    classify_parser.add_argument('--weights', '-w', help='Weight sequence JSON (with --coeffs)')
    classify_parser.add_argument('--dim', type=int, default=1, help='Space dimension n (default: 1)')
    classify_parser.add_argument('--lambda-grid', type=float, nargs='+', help='Lambda values to test')
    classify_parser.set_defaults(handler=cmd_classify)

    norms_parser = subparsers.add_parser('norms', help='Compare the norm families')
    _add_common(norms_parser)
    norms_parser.set_defaults(handler=cmd_norms)

    solve_parser = subparsers.add_parser('solve', help='Solve P u = f by eigen-division')
    _add_common(solve_parser)
    solve_parser.add_argument('--kernel-policy', choices=KERNEL_POLICIES,
                              help='Kernel handling (default: from job file)')
    solve_parser.set_defaults(handler=cmd_solve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_ERROR
    debug = getattr(args, 'debug', False)
    _configure_logging(debug)
    if debug:
        print("[DEBUG] Debug mode enabled")
    try:
        return args.handler(args)
    except HypothesisError as e:
        print(f"❌ Hypothesis failure: {e}")
        return EXIT_HYPOTHESIS
    except (ShubinSpectraError, OSError, json.JSONDecodeError) as e:
        print(f"❌ {e}")
        if debug:
            traceback.print_exc()
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
