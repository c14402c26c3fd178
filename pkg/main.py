"""Command line front end: simulate, test, power and qlines.

Every flag can also be set through the environment as TFBM_<FLAG>
(upper case, dashes as underscores); flags given on the command line win.
Exit codes: 0 on success, 2 on invalid parameters or input files, 3 on
numerical failure.
"""
import argparse
import logging
import os
from pathlib import Path
import sys

from tfbm import settings
from tfbm.covariance import ProcessKind, ProcessSpec
from tfbm.errors import NumericalError, ParameterError
from tfbm.presets import figure_preset, hurst_alternatives, list_presets
from tfbm.qlines import check_probs, quantile_lines
from tfbm.simulate import Method, simulate_process
from tfbm.statistics import StatisticKind, StatisticSpec
from tfbm.testing import NullModel, TestConfig, power_study
from tfbm import utils

logger = settings.logger


def _float_list(text):
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected a comma separated list of numbers, got {text!r}')


def _int_list(text):
    try:
        return [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected a comma separated list of integers, got {text!r}')


def _add_common(parser):
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--threads', type=int, default=settings.NUM_WORKERS)
    parser.add_argument('--out', type=Path, default=settings.OUTPUT_DIR)
    parser.add_argument('--name', help='file name stem for the outputs (defaults to the command)')
    parser.add_argument('--verbose', action='store_true')


def _add_spec(parser, required=True):
    parser.add_argument('--kind', choices=[k.value for k in ProcessKind], required=required)
    parser.add_argument('--hurst', type=float, required=required)
    parser.add_argument('--lambda', dest='lam', type=float, default=0.0)
    parser.add_argument('--lambda-is-tau-star', action='store_true',
                        help='read --lambda of TFBM III as the crossover time tau*')


def _add_method(parser):
    parser.add_argument('--method', choices=[m.value for m in Method], default=Method.AUTO.value)


def build_parser():
    parser = argparse.ArgumentParser(prog='tfbm', description=__doc__.splitlines()[0])
    parser.add_argument('--replay', type=Path, help='re-run the command recorded in a manifest')
    subparsers = parser.add_subparsers(dest='command')

    sim = subparsers.add_parser('simulate', help='simulate trajectories')
    _add_common(sim)
    _add_spec(sim)
    _add_method(sim)
    sim.add_argument('--n', type=int, required=True)
    sim.add_argument('--m', type=int, required=True)
    sim.add_argument('--dt', type=float, default=1.0)

    test = subparsers.add_parser('test', help='test trajectories against a null process')
    _add_common(test)
    _add_spec(test)
    test.add_argument('--input', type=Path, required=True, help='trajectory CSV, one path per row')
    test.add_argument('--stat', choices=[k.value for k in StatisticKind], required=True)
    test.add_argument('--tau', type=int)
    test.add_argument('--significance', type=float, default=settings.SIGNIFICANCE)
    test.add_argument('--null-draws', type=int, default=settings.NULL_DRAWS)
    test.add_argument('--dt', type=float, help='time step of the paths (defaults to the one recorded in --input)')

    power = subparsers.add_parser('power', help='Monte Carlo power study')
    _add_common(power)
    _add_spec(power, required=False)
    _add_method(power)
    power.add_argument('--preset', help=f'one of: {", ".join(list_presets())}')
    power.add_argument('--vary', choices=['hurst', 'lambda'], default='hurst')
    power.add_argument('--alt-kind', action='append', choices=[k.value for k in ProcessKind],
                       help='alternative kinds (repeatable, defaults to all kinds)')
    power.add_argument('--alt-hurst', type=_float_list, help='alternative H values, comma separated')
    power.add_argument('--alt-lambda', type=_float_list, help='alternative lambda values, comma separated')
    power.add_argument('--stat', action='append', choices=[k.value for k in StatisticKind],
                       help='statistics (repeatable, defaults to all three)')
    power.add_argument('--tau', type=int, help='lag for every statistic (defaults per statistic)')
    power.add_argument('--n', type=_int_list, help='sample lengths, comma separated')
    power.add_argument('--m', type=int, default=settings.REPLICATES)
    power.add_argument('--null-draws', type=int, default=settings.NULL_DRAWS)
    power.add_argument('--significance', type=float, default=settings.SIGNIFICANCE)
    power.add_argument('--dt', type=float, help='time step (presets default to horizon / N, otherwise 1)')
    power.add_argument('--plot', action=argparse.BooleanOptionalAction, default=True)

    ql = subparsers.add_parser('qlines', help='quantile lines of simulated trajectories')
    _add_common(ql)
    _add_spec(ql)
    _add_method(ql)
    ql.add_argument('--n', type=int, required=True)
    ql.add_argument('--m', type=int, required=True)
    ql.add_argument('--dt', type=float, default=1.0)
    ql.add_argument('--probs', type=_float_list, default=list(settings.DEFAULT_PROBS))
    ql.add_argument('--plot', action=argparse.BooleanOptionalAction, default=True)

    return parser, subparsers


def _flags(parser):
    for action in parser._actions:
        if action.option_strings and action.dest != 'help':
            yield action


def _env_value(sub, action, name, raw):
    if action.nargs == 0 or isinstance(action, argparse.BooleanOptionalAction):
        return raw.strip().lower() in ('1', 'true', 'yes', 'on')
    if isinstance(action, argparse._AppendAction):
        values = [v.strip() for v in raw.split(',') if v.strip()]
    else:
        try:
            values = action.type(raw) if action.type else raw
        except (ValueError, TypeError, argparse.ArgumentTypeError) as exc:
            raise ParameterError(f'{sub.prog}: bad value {raw!r} in {name}: {exc}') from None
    if action.choices is not None:
        for value in (values if isinstance(values, list) else [values]):
            if value not in action.choices:
                raise ParameterError(f'{sub.prog}: bad value {raw!r} in {name}; '
                                     f'choose from {", ".join(map(str, action.choices))}')
    return values


def apply_env_overrides(subparsers, environ=None):
    """Replace flag defaults with TFBM_<FLAG> environment values."""
    environ = os.environ if environ is None else environ
    for sub in subparsers.choices.values():
        defaults = {}
        for action in _flags(sub):
            flag = action.option_strings[0].lstrip('-')
            name = settings.ENV_PREFIX + flag.upper().replace('-', '_')
            raw = environ.get(name)
            if raw is None:
                continue
            defaults[action.dest] = _env_value(sub, action, name, raw)
            # an env value satisfies a required flag
            action.required = False
        sub.set_defaults(**defaults)


def _token(value):
    if isinstance(value, (list, tuple)):
        return ','.join(_token(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def resolved_argv(subparsers, args):
    """Command line that reproduces ``args`` with every flag spelled out."""
    argv = [args.command]
    for action in _flags(subparsers.choices[args.command]):
        value = getattr(args, action.dest, None)
        if value is None:
            continue
        flag = action.option_strings[0]
        if isinstance(action, argparse.BooleanOptionalAction):
            argv.append(flag if value else '--no-' + flag[2:])
        elif action.nargs == 0:
            if value:
                argv.append(flag)
        elif isinstance(action, argparse._AppendAction):
            for item in value:
                argv += [flag, _token(item)]
        else:
            argv += [flag, _token(value)]
    return argv


def _spec(args):
    return ProcessSpec(args.kind, args.hurst, args.lam, args.lambda_is_tau_star)


def _stem(args):
    return args.name or args.command


def cmd_simulate(args, manifest):
    batch = simulate_process(_spec(args), args.n, args.m, args.method, args.seed, dt=args.dt)
    path = utils.write_trajectories(args.out / f'{_stem(args)}_trajectories.csv', batch)
    manifest.add_output(path)
    print(f'{batch.spec.describe()}: {batch.m} paths of length {batch.n} ({batch.method_used.value})')


def cmd_test(args, manifest):
    batch = utils.read_trajectories(args.input)
    stat = StatisticSpec(args.stat, args.tau)
    dt = args.dt if args.dt is not None else batch.dt
    config = TestConfig(_spec(args), stat, batch.n, args.significance, args.null_draws, args.seed, dt=dt)
    model = NullModel(config)
    outcomes = [model.test(path) for path in batch.values]

    stem = _stem(args)
    manifest.add_output(utils.write_outcomes(args.out / f'{stem}_outcome.csv', outcomes, config, source=args.input))
    manifest.add_output(utils.write_spectrum(args.out / f'{stem}_spectrum.csv', model.spectrum, model.region,
                                             meta=utils.spec_metadata(config.null_spec)))

    print(f'H0: {config.null_spec.describe()}, {stat}, N={config.n}, dt={config.dt:g}, c={config.significance:g}')
    if model.uses_increments:
        print('ACVF test is applied to the increments of the observed paths')
    print(f'acceptance region: [{model.region.lower:.6g}, {model.region.upper:.6g}] '
          f'from {model.region.sample_count} null draws')
    for i, outcome in enumerate(outcomes):
        print(f'path {i}: statistic {outcome.statistic_value:.6g} -> {outcome.decision}')


def _unit_step(n):
    return 1.0


def _power_setup(args):
    if args.preset:
        preset = figure_preset(args.preset)
        logger.info('Preset %s: %s', preset.name, preset.describe())
        null_spec, alternatives, axis = preset.null_spec, list(preset.alternatives), preset.varying
        lengths = args.n or list(preset.sample_lengths)
        stats = args.stat or [k.value for k in preset.statistics]
        return null_spec, alternatives, axis, lengths, stats, preset.dt

    if args.kind is None or args.hurst is None:
        raise ParameterError('power needs either --preset or --kind and --hurst for the null process')
    null_spec = _spec(args)
    if args.vary == 'lambda':
        lams = args.alt_lambda or list(settings.LAMBDA_GRID)
        hursts = args.alt_hurst or [null_spec.hurst]
        kinds = [ProcessKind(k) for k in args.alt_kind] if args.alt_kind else [null_spec.kind]
        alternatives = [ProcessSpec(k, h, lam, args.lambda_is_tau_star) for k in kinds for h in hursts for lam in lams]
    elif args.alt_hurst or args.alt_kind or args.alt_lambda:
        kinds = [ProcessKind(k) for k in args.alt_kind] if args.alt_kind else list(ProcessKind)
        hursts = args.alt_hurst or list(settings.HURST_GRID)
        lams = args.alt_lambda or [null_spec.lam]
        alternatives = [ProcessSpec(k, h, 0.0 if k is ProcessKind.FBM else lam, args.lambda_is_tau_star)
                        for k in kinds for h in hursts for lam in lams]
    else:
        alternatives = list(hurst_alternatives(null_spec.lam))
    lengths = args.n or [settings.SAMPLE_LENGTHS[0]]
    stats = args.stat or [k.value for k in StatisticKind]
    return null_spec, alternatives, args.vary, lengths, stats, _unit_step


def cmd_power(args, manifest):
    if args.m < 1:
        raise ParameterError(f'number of replicates must be positive, got --m {args.m}')
    null_spec, alternatives, axis, lengths, stats, step = _power_setup(args)
    curves = []
    for n in lengths:
        dt = args.dt if args.dt is not None else step(n)
        for kind in stats:
            config = TestConfig(null_spec, StatisticSpec(kind, args.tau), n, args.significance,
                                args.null_draws, args.seed, args.method, dt)
            logger.info('Power of %s test for %s, N=%d, dt=%g, M=%d',
                        config.statistic, null_spec.describe(), n, dt, args.m)
            curves.append(power_study(config, alternatives, args.m, workers=args.threads))

    stem = _stem(args)
    meta = {**utils.spec_metadata(null_spec), 'preset': args.preset or '', 'seed': args.seed,
            'significance': args.significance, 'null_draws': args.null_draws}
    manifest.add_output(utils.write_power(args.out / f'{stem}_power.csv', curves, meta))
    if args.plot:
        title = f'{null_spec.describe()} test power'
        manifest.add_output(utils.plot_power_curves(args.out / f'{stem}_power.svg', curves, axis, title))

    failed = sum(len(c.failures) for c in curves)
    print(f'{len(curves)} power curves over {len(alternatives)} alternatives written'
          + (f' ({failed} failed alternatives marked in the CSV)' if failed else ''))


def cmd_qlines(args, manifest):
    probs = check_probs(args.probs)
    batch = simulate_process(_spec(args), args.n, args.m, args.method, args.seed, dt=args.dt)
    lines = quantile_lines(batch, probs)
    stem = _stem(args)
    manifest.add_output(utils.write_quantile_lines(args.out / f'{stem}_qlines.csv', lines))
    if args.plot:
        manifest.add_output(utils.plot_quantile_lines(args.out / f'{stem}_qlines.svg', lines))
    print(f'{batch.spec.describe()}: {len(probs)} quantile lines over {batch.n} time points')


COMMANDS = {
    'simulate': cmd_simulate,
    'test': cmd_test,
    'power': cmd_power,
    'qlines': cmd_qlines,
}


def _parameters(args):
    return {key: (str(value) if isinstance(value, Path) else value) for key, value in vars(args).items()}


def run(argv, env_overrides=True):
    parser, subparsers = build_parser()
    if env_overrides:
        apply_env_overrides(subparsers)
    args = parser.parse_args(argv)

    if args.replay is not None:
        recorded = utils.RunManifest.load(args.replay)
        logger.info('Replaying %s from %s', recorded.command, args.replay)
        return run(recorded.parameters['argv'], env_overrides=False)
    if args.command is None:
        parser.error('a command is required (simulate, test, power or qlines)')

    if args.verbose:
        logger.setLevel(logging.DEBUG)
    # argv is stored fully resolved so that a replay ignores the environment it runs in
    parameters = {**_parameters(args), 'command_line': list(argv), 'argv': resolved_argv(subparsers, args)}
    manifest = utils.RunManifest(args.command, parameters, args.seed)
    COMMANDS[args.command](args, manifest)
    manifest.finish().save(args.out / f'{_stem(args)}_manifest.json')
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        return run(argv)
    except ParameterError as exc:
        logger.error('%s', exc)
        return 2
    except NumericalError as exc:
        logger.error('%s', exc)
        return 3


if __name__ == '__main__':
    sys.exit(main())
