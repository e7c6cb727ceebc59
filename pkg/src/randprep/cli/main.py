"""CLI entry point: randprep gen|analyze|sweep|sample|resources subcommands."""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
from collections.abc import Callable
from typing import Any, NoReturn, TextIO, cast

from randprep.amplitudes import AmplitudeVector, partition, write_state
from randprep.bounds import (
    DecayKind,
    DecayModel,
    fit_decay,
    resource_plan,
    t_count_estimate,
)
from randprep.config import LOG_ENV
from randprep.constants import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE
from randprep.ensemble import build_ensemble
from randprep.generators import (
    SyntheticSpec,
    TfimSpec,
    load_state,
    synthetic_state,
    tfim_ground_state,
)
from randprep.metrics import read_observable
from randprep.params import (
    AnalyzeParams,
    ResourcesParams,
    SampleParams,
    SweepParams,
    parse_pauli,
    parse_positive_float,
    parse_tau_list,
    parse_threshold_grid,
    parse_unit_interval,
)
from randprep.reports import (
    analyze_state,
    model_report,
    plan_report,
    sample_report,
    state_summary,
    write_report,
)
from randprep.sampler import estimate_observable, frequency_check, total_variation
from randprep.sweep import (
    coefficient_reduction,
    run_sweep,
    sweep_csv_text,
    sweep_slopes,
    verify_sweep_csv,
)

logger = logging.getLogger(__name__)

CommandFunc = Callable[[argparse.Namespace], int]


class _ArgumentParser(argparse.ArgumentParser):
    """Parser whose usage errors exit with status 1 (2 is reserved for numeric failures)."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f'{self.prog}: error: {message}\n')


def _configure_logging(verbose: bool = False) -> None:
    """Configure logging for CLI (stderr, level from --verbose or RANDPREP_LOG)."""
    level = logging.INFO if verbose else logging.WARNING
    env_level = os.environ.get(LOG_ENV, '').upper()
    if env_level in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
        level = getattr(logging, env_level)
    logging.basicConfig(
        level=level,
        format='%(levelname)s: %(name)s: %(message)s',
        stream=sys.stderr,
    )


def _emit_state(psi: AmplitudeVector, output: str | None) -> None:
    if output is None or output == '-':
        write_state(sys.stdout, psi)
    else:
        write_state(output, psi)
        logger.info('Wrote %d-qubit state to %s', psi.n_qubits, output)


def _gen_tfim_cmd(args: argparse.Namespace) -> int:
    """Write a TFIM ground state (gen tfim)."""
    spec = TfimSpec(n_sites=args.n, coupling_j=args.j, field_h=args.h)
    _emit_state(tfim_ground_state(spec, args.method), args.output)
    return EXIT_OK


def _gen_synthetic_cmd(args: argparse.Namespace) -> int:
    """Write a synthetic decay state (gen synthetic)."""
    spec = SyntheticSpec(
        kind=args.kind, rate=args.rate, dim=args.dim, seed=args.seed, signs=args.signs
    )
    _emit_state(synthetic_state(spec), args.output)
    return EXIT_OK


def _analyze_cmd(args: argparse.Namespace) -> int:
    """Report exact errors and bounds at one threshold (analyze subcommand).

    Returns:
        0 when the mixture distance respects the mixing-lemma bound.
    """
    observable = None
    if args.observable is not None:
        observable = read_observable(args.observable)
    elif args.pauli is not None:
        observable = args.pauli
    params = AnalyzeParams(
        state_path=args.state,
        threshold=args.threshold,
        n_qubits=args.n_qubits,
        oracle=args.oracle,
        members=args.members,
        observable=observable,
    )
    psi = load_state(params.state_path, params.n_qubits)
    report = analyze_state(
        psi,
        params.threshold,
        oracle=params.oracle,
        members=params.members,
        observable=params.observable,
    )
    write_report(report, sys.stdout)
    return EXIT_OK


def _sweep_cmd(args: argparse.Namespace) -> int:
    """Emit a threshold sweep as CSV and re-verify it (sweep subcommand)."""
    params = SweepParams(
        state_path=args.state,
        thresholds=args.thresholds,
        n_qubits=args.n_qubits,
        output=args.output,
        reduction_target=args.reduction_target,
        min_reduction=args.min_reduction,
        threads=args.threads,
    )
    psi = load_state(params.state_path, params.n_qubits)
    rows = run_sweep(psi, params.thresholds, threads=params.threads)
    text = sweep_csv_text(rows)
    if params.output is None or params.output == '-':
        verify_sweep_csv(io.StringIO(text))
        sys.stdout.write(text)
    else:
        with open(params.output, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        checked = verify_sweep_csv(params.output)
        logger.info('Wrote %d rows (%d verified) to %s', len(rows), checked, params.output)
    if sum(1 for r in rows if not r.note) >= 2:
        sweep_slopes(rows)
    if params.reduction_target is not None:
        result = coefficient_reduction(psi, params.reduction_target)
        print(
            f'# reduction at target {result.target:g}: K_det={result.k_det} '
            f'K_rand={result.k_rand} reduction={result.reduction:.4f}',
            file=sys.stderr,
        )
        if params.min_reduction is not None and result.reduction < params.min_reduction:
            raise RuntimeError(
                f'coefficient reduction {result.reduction:.4f} below required '
                f'{params.min_reduction:.4f}'
            )
    return EXIT_OK


def _sample_cmd(args: argparse.Namespace) -> int:
    """Run the sampled protocol and report the estimate (sample subcommand)."""
    observable = args.pauli
    if args.observable is not None:
        observable = read_observable(args.observable)
    params = SampleParams(
        state_path=args.state,
        threshold=args.threshold,
        shots=args.shots,
        seed=args.seed,
        observable=observable,
        n_qubits=args.n_qubits,
        workers=args.workers,
    )
    psi = load_state(params.state_path, params.n_qubits)
    ensemble = build_ensemble(partition(psi, params.threshold), psi)
    run = estimate_observable(
        ensemble, params.observable, params.shots, params.seed, workers=params.workers
    )
    report = sample_report(run)
    report['observable'] = params.observable.label
    report['total_variation'] = total_variation(run, ensemble)
    report['frequency_check'] = frequency_check(run, ensemble)
    write_report(report, sys.stdout)
    return EXIT_OK


def _resources_cmd(args: argparse.Namespace) -> int:
    """Fit or take a decay model and report K_det/K_rand per target (resources subcommand)."""
    params = ResourcesParams(
        taus=args.tau,
        state_path=args.state,
        n_qubits=args.n_qubits,
        kind=args.kind,
        rate=args.rate,
        dim=args.dim,
        threshold=args.threshold,
    )
    psi = load_state(params.state_path, params.n_qubits) if params.state_path else None
    if (params.kind is None) != (params.rate is None):
        raise ValueError('--kind and --rate must be given together')
    if params.kind is not None and params.rate is not None:
        dim = params.dim or (psi.dim if psi is not None else None)
        if dim is None:
            raise ValueError('a prescribed model needs --dim or --state')
        model = DecayModel(cast(DecayKind, params.kind), params.rate, dim=dim)
    elif psi is not None:
        model = fit_decay(psi)
    else:
        raise ValueError('resources needs --state or --kind/--rate/--dim')
    report: dict[str, Any] = {
        'model': model_report(model),
        'plans': [plan_report(resource_plan(model, tau, params.dim)) for tau in params.taus],
    }
    if psi is not None:
        report['state'] = state_summary(psi)
        if params.threshold is not None:
            p = partition(psi, params.threshold)
            report['t_count'] = {
                'threshold': params.threshold,
                **{
                    scheme: t_count_estimate(p, psi, scheme)
                    for scheme in ('deterministic', 'randomized', 'exact')
                },
            }
    write_report(report, sys.stdout)
    return EXIT_OK


def _add_state_args(parser: argparse.ArgumentParser, *, required: bool = True) -> None:
    parser.add_argument(
        '--state', type=str, required=required, help='State file or plain coefficient list'
    )
    parser.add_argument(
        '--n-qubits', type=int, default=None, help='Qubit count (default: from file)'
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog='randprep',
        description='Randomized truncated state preparation: ensembles, errors, and bounds.',
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='Show INFO logs')
    subparsers = parser.add_subparsers(dest='command', required=True)

    gen_parser = subparsers.add_parser('gen', help='Generate a state file')
    gen_sub = gen_parser.add_subparsers(dest='generator', required=True)
    tfim_parser = gen_sub.add_parser('tfim', help='TFIM ground state (periodic chain)')
    tfim_parser.add_argument('--n', type=int, required=True, help='Chain length (3-14)')
    tfim_parser.add_argument('--j', type=float, default=1.0, help='ZZ coupling J')
    tfim_parser.add_argument('--h', type=float, default=1.0, help='Transverse field h')
    tfim_parser.add_argument(
        '--method', choices=['auto', 'dense', 'lanczos'], default='auto', help='Eigensolver'
    )
    tfim_parser.add_argument('-o', '--output', type=str, default=None, help='Output (- = stdout)')
    tfim_parser.set_defaults(func=_gen_tfim_cmd)

    syn_parser = gen_sub.add_parser('synthetic', help='Synthetic decay profile')
    syn_parser.add_argument('--kind', choices=['geometric', 'power_law'], required=True)
    syn_parser.add_argument('--rate', type=float, required=True, help='Decay rate r')
    syn_parser.add_argument('--dim', type=int, required=True, help='Number of amplitudes')
    syn_parser.add_argument('--seed', type=int, default=0, help='Seed for random signs')
    syn_parser.add_argument(
        '--signs', choices=['positive', 'alternate', 'random'], default='positive'
    )
    syn_parser.add_argument('-o', '--output', type=str, default=None, help='Output (- = stdout)')
    syn_parser.set_defaults(func=_gen_synthetic_cmd)

    analyze_parser = subparsers.add_parser('analyze', help='Errors and bounds at a threshold')
    _add_state_args(analyze_parser)
    analyze_parser.add_argument('--threshold', type=parse_positive_float, required=True)
    analyze_parser.add_argument(
        '--oracle', action='store_true', help='Also compute the dense oracle distance (n <= 10)'
    )
    analyze_parser.add_argument(
        '--members', action='store_true', help='Include the ensemble member summary'
    )
    obs_group = analyze_parser.add_mutually_exclusive_group()
    obs_group.add_argument('--observable', type=str, default=None, help='Observable JSON file')
    obs_group.add_argument('--pauli', type=parse_pauli, default=None, help='Pauli, e.g. Z0')
    analyze_parser.set_defaults(func=_analyze_cmd)

    sweep_parser = subparsers.add_parser('sweep', help='Threshold sweep to CSV')
    _add_state_args(sweep_parser)
    sweep_parser.add_argument(
        '--thresholds',
        type=parse_threshold_grid,
        required=True,
        help='Geometric grid t_min:t_max:count, or a single threshold',
    )
    sweep_parser.add_argument('-o', '--output', type=str, default=None, help='CSV (- = stdout)')
    sweep_parser.add_argument('--threads', type=int, default=None, help='Worker threads')
    sweep_parser.add_argument(
        '--reduction-target',
        type=parse_positive_float,
        default=None,
        help='Also compare kept counts reaching this trace distance',
    )
    sweep_parser.add_argument(
        '--min-reduction',
        type=parse_unit_interval,
        default=None,
        help='Fail (exit 2) if the kept-count reduction is below this fraction',
    )
    sweep_parser.set_defaults(func=_sweep_cmd)

    sample_parser = subparsers.add_parser('sample', help='Monte Carlo protocol run')
    _add_state_args(sample_parser)
    sample_parser.add_argument('--threshold', type=parse_positive_float, required=True)
    sample_parser.add_argument('--shots', type=int, required=True, help='Number of draws M')
    sample_parser.add_argument('--seed', type=int, default=0, help='Run seed')
    sample_parser.add_argument('--workers', type=int, default=1, help='Seed streams')
    sample_obs = sample_parser.add_mutually_exclusive_group()
    sample_obs.add_argument('--observable', type=str, default=None, help='Observable JSON file')
    sample_obs.add_argument(
        '--pauli', type=parse_pauli, default=parse_pauli('Z0'), help='Pauli (default Z0)'
    )
    sample_parser.set_defaults(func=_sample_cmd)

    res_parser = subparsers.add_parser('resources', help='K_det / K_rand resource plan')
    _add_state_args(res_parser, required=False)
    res_parser.add_argument(
        '--tau', type=parse_tau_list, required=True, help='Target error(s), comma-separated'
    )
    res_parser.add_argument('--kind', choices=['geometric', 'power_law'], default=None)
    res_parser.add_argument('--rate', type=float, default=None, help='Model rate (skips fit)')
    res_parser.add_argument('--dim', type=int, default=None, help='Model dimension')
    res_parser.add_argument(
        '--threshold', type=parse_positive_float, default=None, help='T-count at threshold'
    )
    res_parser.set_defaults(func=_resources_cmd)
    return parser


def _run(func: CommandFunc, args: argparse.Namespace, err: TextIO) -> int:
    try:
        return func(args)
    except (ValueError, OSError) as e:
        print(f'Error: {e}', file=err)
        return EXIT_USAGE
    except RuntimeError as e:
        print(f'Error: {e}', file=err)
        return EXIT_NUMERIC


def main(argv: list[str] | None = None) -> int:
    """Entry point for the randprep CLI.

    Returns:
        0 on success, 1 on usage or input errors, 2 on numeric or assertion failures.
    """
    parser = _build_parser()
    args = parser.parse_args(argv)
    _configure_logging(verbose=args.verbose)
    return _run(args.func, args, sys.stderr)


def cli_main() -> NoReturn:
    """Entry point for console_scripts; calls main() and exits with its return code."""
    sys.exit(main())


if __name__ == '__main__':
    sys.exit(main())
