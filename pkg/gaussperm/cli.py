#! /usr/bin/env python
"""
gaussperm estimates matrix permanents by sampling a Gaussian field.

## Installation
Clone the repo and run

    pip install .

To verify the install, start a new shell and run

    gaussperm -h

## Configuration
The script looks for `~/.config/gaussperm`, `~/.gausspermrc` and
`.gausspermrc` in the current directory. Every option is optional:

```
[oracles]
NAIVE_MAX_M=12
RYSER_MAX_M=30

[sampler]
SEED=0
CHUNK_SIZE=4096
THREADS=1
```

## Usage
    $ gaussperm exact --help
    $ gaussperm estimate --help
    $ gaussperm bound --help
    $ gaussperm wick-check --help
    $ gaussperm bench --help

With `--json` every subcommand prints a single JSON object on stdout; logs
and errors go to stderr. Exit codes: 0 success, 2 usage, 3 parse or
validation, 4 numerical, 5 internal consistency.
"""
from __future__ import absolute_import
from __future__ import division
from __future__ import print_function
from __future__ import unicode_literals
import io
import logging
import logging.config
import sys

import click
import six

from gaussperm import __version__
from gaussperm.utils import bench as bench_utils
from gaussperm.utils import estimator
from gaussperm.utils.config import get_config
from gaussperm.utils.config import get_config_float
from gaussperm.utils.config import get_config_int
from gaussperm.utils.errors import ConsistencyError
from gaussperm.utils.errors import GaussPermError
from gaussperm.utils.errors import SizeLimitError
from gaussperm.utils.formatting import build_run_report
from gaussperm.utils.formatting import format_payload
from gaussperm.utils.formatting import read_matrix
from gaussperm.utils.formatting import report_to_json
from gaussperm.utils.matrix import build_embedding
from gaussperm.utils.matrix import frobenius_norm
from gaussperm.utils.matrix import uniform_matrix
from gaussperm.utils.oracles import permanent
from gaussperm.utils.oracles import permanent_naive
from gaussperm.utils.oracles import permanent_ryser
from gaussperm.utils.oracles import METHODS
from gaussperm.utils.sampler import SamplerConfig
from gaussperm.utils.wick import CovarianceModel
from gaussperm.utils.wick import isserlis_expectation
from gaussperm.utils.wick import perm_via_subfields


logger = logging.getLogger(__name__)
# use to allow -h for for help
CONTEXT_SETTINGS = dict(help_option_names=['-h', '--help'])
AGREEMENT_TOL = 1e-9
WICK_CHECK_MAX_M = 4


def set_logging(ctx, param, level):
    numeric_level = getattr(logging, level.upper(), None)
    if not isinstance(numeric_level, int):
        raise click.BadParameter('Invalid log level: {}'.format(level))

    logging.config.dictConfig({
        'version': 1,
        'disable_existing_loggers': False,
        'formatters': {
            'standard': {
                'format': '[%(levelname)s] %(message)s'
            },
        },
        'handlers': {
            'default': {
                'level': 'DEBUG',
                'formatter': 'standard',
                'class': 'logging.StreamHandler',
                'stream': 'ext://sys.stderr',
            },
        },
        'loggers': {
            '': {
                'handlers': ['default'],
                'level': '{}'.format(level.upper()),
                'propagate': True
            },
        }
    })


def validate_positive_arg(ctx, param, value):
    if value is None:
        return value

    if value <= 0:
        raise click.BadParameter('must be positive, got {}'.format(value))

    return value


def validate_probability_arg(ctx, param, value):
    if value is None:
        return value

    if not 0 < value < 1:
        raise click.BadParameter('must lie in (0, 1), got {}'.format(value))

    return value


def parse_int_list(value, minimum):
    """Parse a comma separated list of integers no smaller than minimum."""
    try:
        items = [int(x) for x in value.split(',') if x.strip()]
    except ValueError:
        raise click.BadParameter('Invalid integer list: {}'.format(value))

    if not items:
        raise click.BadParameter('List must not be empty')

    if any(x < minimum for x in items):
        raise click.BadParameter(
            'List entries must be at least {}'.format(minimum))

    return items


def validate_size_list_arg(ctx, param, value):
    return parse_int_list(value, 0)


def validate_count_list_arg(ctx, param, value):
    return parse_int_list(value, 1)


def fail(error):
    """Report a library error on stderr and exit with its code."""
    click.echo('ERROR: {}'.format(error), err=True)
    if logger.isEnabledFor(logging.DEBUG):
        logger.exception('Command failed')
    sys.exit(error.exit_code)


def command_echo(ctx):
    params = sorted(six.iteritems(ctx.params))
    return [ctx.command_path] + [
        '{}={}'.format(k, v) for k, v in params if v is not None]


def emit(report, as_json):
    if as_json:
        click.echo(report_to_json(report))
    else:
        click.echo(format_payload(report['payload']))


def sampler_options(f):
    f = click.option(
        '--chunk-size', type=int, default=None,
        help='Samples per deterministic stream chunk')(f)
    f = click.option(
        '--threads', type=int, default=None,
        help='Worker threads; never changes the result')(f)
    f = click.option(
        '--seed', type=int, default=None, help='64-bit sampling seed')(f)
    return f


@click.group(context_settings=CONTEXT_SETTINGS)
@click.option(
    '--log',
    default='ERROR', help='Set the log level',
    expose_value=False,
    callback=set_logging,
    type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']))
@click.version_option(__version__)
@click.pass_context
def cli(ctx):
    """CLI main entry point"""
    try:
        config = get_config()
    except GaussPermError as e:
        fail(e)

    ctx.obj = {'config': config}


@cli.command('exact')
@click.argument('matrix_path', type=click.Path(exists=True, dir_okay=False))
@click.option(
    '-m', '--method',
    default='all',
    type=click.Choice(list(METHODS) + ['all']),
    help='Exact method; `all` runs the three and checks agreement')
@click.option('--json', 'as_json', is_flag=True, help='Emit a JSON report')
@click.pass_context
def cmd_exact(ctx, matrix_path, method, as_json):
    """Compute the permanent exactly"""
    try:
        a = read_matrix(matrix_path)
        if method != 'all':
            payload = permanent(a, method).to_dict()
        else:
            values = dict((x, permanent(a, x)) for x in METHODS)
            reference = values['naive'].value
            discrepancy = max(
                abs(v.value - reference) for v in values.values())

            payload = dict(
                (x.replace('-', '_'), v.value)
                for x, v in six.iteritems(values))
            payload['max_discrepancy'] = discrepancy
            payload['ops_performed'] = dict(
                (x.replace('-', '_'), v.ops_performed)
                for x, v in six.iteritems(values))

            if discrepancy > AGREEMENT_TOL * max(1.0, abs(reference)):
                raise ConsistencyError(
                    'Exact methods disagree by {!r}: {}'.format(
                        discrepancy, payload))
    except GaussPermError as e:
        fail(e)

    emit(build_run_report(command_echo(ctx), payload, a), as_json)


def resolve_sample_plan(m, alpha, method, samples, epsilon, c, delta, t):
    """Turn the sample count flags into ``(n, t)``.

    Exactly one of ``samples``, ``epsilon`` or ``c`` (with ``delta``) must be
    set. ``epsilon`` is the ``c`` of the (c, delta) rule with ``delta``
    defaulting to the ``[estimate] DELTA`` config.
    """
    modes = [x is not None for x in (samples, epsilon, c)]
    if sum(modes) != 1:
        raise click.UsageError(
            'Give exactly one of --samples, --epsilon or --c/--delta')

    if samples is not None:
        if delta is not None:
            raise click.UsageError('--delta conflicts with --samples')
        return samples, t

    if t is not None:
        raise click.UsageError('--t only combines with --samples')

    if c is None:
        c = epsilon
        if delta is None:
            delta = get_config_float('estimate', 'DELTA', 0.05)
    elif delta is None:
        raise click.UsageError('--c needs --delta')

    n = estimator.required_samples(m, alpha, c, delta)
    if method == estimator.GAUSSIAN_FIELD:
        t = estimator.error_scale(m, alpha, c)
    else:
        t = estimator.glynn_error_scale(m, alpha, c)
    return n, t


@cli.command('estimate')
@click.argument('matrix_path', type=click.Path(exists=True, dir_okay=False))
@click.option(
    '-n', '--samples', type=int, callback=validate_positive_arg,
    help='Number of samples N')
@click.option(
    '--epsilon', type=float, callback=validate_positive_arg,
    help='Target error epsilon (sqrt(3) alpha)^M')
@click.option(
    '--c', 'c', type=float, callback=validate_positive_arg,
    help='Error multiple c of the (c, delta) rule')
@click.option(
    '--delta', type=float, callback=validate_probability_arg,
    help='Failure probability of the (c, delta) rule')
@click.option(
    '--t', 't', type=float, callback=validate_positive_arg,
    help='Report the Chebyshev bound at this additive error')
@click.option('--alpha', type=float, help='Diagonal shift alpha')
@click.option(
    '--unsafe-alpha', is_flag=True,
    help='Allow alpha below the Frobenius norm')
@click.option(
    '--method',
    default=estimator.GAUSSIAN_FIELD,
    type=click.Choice([estimator.GAUSSIAN_FIELD, estimator.GLYNN_RANDOM]))
@click.option(
    '--check-exact', is_flag=True,
    help='Also report the true error for small M')
@click.option(
    '--log-magnitude', is_flag=True,
    help='Report log-magnitude statistics of the products only')
@click.option(
    '--dense', is_flag=True, help='Disable the diagonal fast path')
@sampler_options
@click.option('--json', 'as_json', is_flag=True, help='Emit a JSON report')
@click.pass_context
def cmd_estimate(ctx, matrix_path, samples, epsilon, c, delta, t, alpha,
                 unsafe_alpha, method, check_exact, log_magnitude, dense,
                 seed, threads, chunk_size, as_json):
    """Estimate the permanent by Monte Carlo sampling"""
    try:
        a = read_matrix(matrix_path)
        config = SamplerConfig.from_config(seed, chunk_size, threads)

        if method == estimator.GAUSSIAN_FIELD:
            scale_alpha = alpha if alpha is not None else frobenius_norm(a)
        else:
            scale_alpha = frobenius_norm(a)
        n, t = resolve_sample_plan(
            a.rows, scale_alpha, method, samples, epsilon, c, delta, t)
        logger.info('Estimating with N={} t={!r}'.format(n, t))

        if log_magnitude:
            payload = dict(estimator.product_magnitude_stats(
                a, n, config, alpha, unsafe_alpha=unsafe_alpha)._asdict())
        elif method == estimator.GAUSSIAN_FIELD:
            payload = estimator.estimate_permanent(
                a, n, config, alpha, unsafe_alpha=unsafe_alpha, t=t,
                fast_path=not dense).to_dict()
        else:
            payload = estimator.glynn_estimate(a, n, config, t=t).to_dict()

        if check_exact and not log_magnitude:
            limit = get_config_int('oracles', 'CHECK_EXACT_MAX_M', 7)
            if a.rows <= limit:
                exact = permanent_ryser(a).value
                payload['exact'] = exact
                payload['abs_error'] = abs(payload['estimate'] - exact)
            else:
                logger.warning('Skip exact check, M={} > {}'.format(
                    a.rows, limit))
    except GaussPermError as e:
        fail(e)

    emit(build_run_report(command_echo(ctx), payload, a), as_json)


@cli.command('bound')
@click.option('--m', 'm', type=int, required=True, help='Dimension M')
@click.option(
    '--alpha', type=float, required=True, callback=validate_positive_arg,
    help='alpha >= operator norm (for glynn-random: the norm bound)')
@click.option('--t', 't', type=float, callback=validate_positive_arg)
@click.option('--n', 'n', type=int, callback=validate_positive_arg)
@click.option('--c', 'c', type=float, callback=validate_positive_arg)
@click.option('--delta', type=float, callback=validate_probability_arg)
@click.option(
    '--method',
    default=estimator.GAUSSIAN_FIELD,
    type=click.Choice([estimator.GAUSSIAN_FIELD, estimator.GLYNN_RANDOM]))
@click.option('--json', 'as_json', is_flag=True, help='Emit a JSON report')
@click.pass_context
def cmd_bound(ctx, m, alpha, t, n, c, delta, method, as_json):
    """Failure probability and sample count bounds"""
    if m < 0:
        raise click.BadParameter('must be non-negative', param_hint='--m')

    has_tn = t is not None and n is not None
    has_cd = c is not None and delta is not None
    if not has_tn and not has_cd:
        raise click.UsageError('Give --t with --n, or --c with --delta')

    payload = {'m': m, 'alpha': alpha, 'method': method}
    try:
        if method == estimator.GAUSSIAN_FIELD:
            payload['variance_bound'] = estimator.variance_bound(m, alpha)
        else:
            payload['variance_bound'] = estimator.glynn_variance_bound(
                m, alpha)

        if has_tn:
            if method == estimator.GAUSSIAN_FIELD:
                bound = estimator.chebyshev_failure_bound(
                    estimator.BoundQuery(m, alpha, t, n))
            else:
                bound = estimator.glynn_failure_bound(m, alpha, t, n)
            payload['chebyshev_bound'] = {'t': t, 'n': n, 'bound': bound}

        if has_cd:
            if method == estimator.GAUSSIAN_FIELD:
                scale = estimator.error_scale(m, alpha, c)
            else:
                scale = estimator.glynn_error_scale(m, alpha, c)
            payload['required_samples'] = {
                'c': c,
                'delta': delta,
                'n': estimator.required_samples(m, alpha, c, delta),
                't': scale,
            }
    except GaussPermError as e:
        fail(e)

    emit(build_run_report(command_echo(ctx), payload), as_json)


@cli.command('wick-check')
@click.option('--m', 'm', type=int, default=3, help='Dimension M (<= 4)')
@click.option('--trials', type=int, default=50, callback=validate_positive_arg)
@click.option('--seed', type=int, default=0)
@click.option('--json', 'as_json', is_flag=True, help='Emit a JSON report')
@click.pass_context
def cmd_wick_check(ctx, m, trials, seed, as_json):
    """Check perm(A) = <X_1 ... X_2M> by exact pairing sums"""
    try:
        if not 0 <= m <= WICK_CHECK_MAX_M:
            raise SizeLimitError(
                'wick-check needs 0 <= M <= {}, got {}'.format(
                    WICK_CHECK_MAX_M, m))

        worst = 0.0
        pairings = 0
        for trial in range(trials):
            a = uniform_matrix(m, [seed, trial])
            embedding = build_embedding(a, frobenius_norm(a) + 0.5)
            model = CovarianceModel.from_embedding(embedding)

            expected = permanent_naive(a).value
            field = isserlis_expectation(model, range(2 * m))
            subfields = perm_via_subfields(
                model, embedding.row_group, embedding.col_group)
            pairings = field.pairings_counted

            discrepancy = max(
                abs(field.value - expected), abs(subfields - expected)
            ) / max(1.0, abs(expected))
            if discrepancy > AGREEMENT_TOL:
                raise ConsistencyError(
                    'Pairing sum {!r} != permanent {!r} for {}'.format(
                        field.value, expected, a.tolist()))
            worst = max(worst, discrepancy)
    except GaussPermError as e:
        fail(e)

    payload = {
        'm': m,
        'trials': trials,
        'seed': seed,
        'max_discrepancy': worst,
        'pairings_counted': pairings,
    }
    emit(build_run_report(command_echo(ctx), payload), as_json)


@cli.command('bench')
@click.option(
    '--m-list', default='4', callback=validate_size_list_arg,
    help='Comma separated matrix sizes')
@click.option(
    '--n-list', default='100000,200000,400000,800000',
    callback=validate_count_list_arg,
    help='Comma separated sample counts')
@click.option('--repeats', type=int, default=3, callback=validate_positive_arg)
@sampler_options
@click.option(
    '-o', '--out',
    help='Write OUT.csv and OUT.json next to the stdout report')
@click.option('--json', 'as_json', is_flag=True, help='Emit a JSON report')
@click.pass_context
def cmd_bench(ctx, m_list, n_list, repeats, seed, threads, chunk_size, out,
              as_json):
    """Time the estimator over an (M, N) grid"""
    try:
        config = SamplerConfig.from_config(seed, chunk_size, threads)
        grid = bench_utils.run_bench(
            m_list, n_list, config.seed, config.threads, config.chunk_size,
            repeats=repeats)
    except GaussPermError as e:
        fail(e)

    report = build_run_report(command_echo(ctx), grid.to_dict())

    if out:
        try:
            bench_utils.write_bench_csv(grid, '{}.csv'.format(out))
            with io.open('{}.json'.format(out), 'w', encoding='utf-8') as f:
                f.write(report_to_json(report))
        except (IOError, OSError) as e:
            click.echo('ERROR: {}'.format(e), err=True)
            sys.exit(3)
        logger.info('Wrote {0}.csv and {0}.json'.format(out))

    if as_json:
        click.echo(report_to_json(report))
    else:
        click.echo(bench_utils.bench_csv(grid), nl=False)


if __name__ == '__main__':
    cli()
