import json
import math

from click.testing import CliRunner
import pytest

from gaussperm.cli import cli


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def matrix_file(tmp_path):
    def write(text, name='matrix.txt'):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def payload_of(result):
    assert result.exit_code == 0, result.output
    report = json.loads(result.output.strip().splitlines()[-1])
    return report['payload']


def test_exact_all(runner, matrix_file):
    path = matrix_file(u'1, 2\n3, 4\n')
    payload = payload_of(runner.invoke(cli, ['exact', path, '--json']))
    assert payload['naive'] == pytest.approx(10.0)
    assert payload['ryser'] == pytest.approx(10.0)
    assert payload['glynn_enum'] == pytest.approx(10.0)
    assert payload['max_discrepancy'] < 1e-9


def test_exact_single_method(runner, matrix_file):
    path = matrix_file(u'1, 2\n3, 4\n')
    payload = payload_of(
        runner.invoke(cli, ['exact', path, '-m', 'ryser', '--json']))
    assert payload['method'] == 'ryser'
    assert payload['value'] == pytest.approx(10.0)


def test_exact_text_output(runner, matrix_file):
    path = matrix_file(u'1, 2\n3, 4\n')
    result = runner.invoke(cli, ['exact', path, '-m', 'naive'])
    assert result.exit_code == 0
    assert 'value: 10.0' in result.output


def test_exact_integer_matrix(runner, matrix_file):
    rows = [[(3 * i + 5 * j) % 7 - 3 for j in range(7)] for i in range(7)]
    text = u''.join(u' '.join(str(x) for x in row) + u'\n' for row in rows)
    payload = payload_of(
        runner.invoke(cli, ['exact', matrix_file(text), '--json']))
    assert payload['naive'] == payload['ryser']


def test_exact_non_square(runner, matrix_file):
    result = runner.invoke(cli, ['exact', matrix_file(u'1, 2\n')])
    assert result.exit_code == 3


def test_exact_parse_error(runner, matrix_file):
    result = runner.invoke(cli, ['exact', matrix_file(u'1, 2\n3, y\n')])
    assert result.exit_code == 3
    assert 'line 2' in result.output


def test_estimate_json(runner, matrix_file):
    path = matrix_file(u'1, 2\n3, 4\n')
    payload = payload_of(runner.invoke(cli, [
        'estimate', path, '--samples', '1000', '--seed', '7', '--json']))
    assert payload['n_samples'] == 1000
    assert payload['variance_bound'] == pytest.approx(8100.0)
    assert payload['alpha'] == pytest.approx(math.sqrt(30))
    assert payload['seed'] == 7
    assert payload['method'] == 'gaussian-field'
    assert payload['chebyshev_bound'] is None


def test_estimate_is_reproducible(runner, matrix_file):
    path = matrix_file(u'1, 2\n3, 4\n')
    args = ['estimate', path, '-n', '5000', '--seed', '3', '--json']
    first = payload_of(runner.invoke(cli, args))
    second = payload_of(runner.invoke(cli, args + ['--threads', '4',
                                                   '--chunk-size', '4096']))
    assert first['estimate'] == second['estimate']


def test_estimate_c_delta_plan(runner, matrix_file):
    path = matrix_file(u'1, 2\n3, 4\n')
    payload = payload_of(runner.invoke(cli, [
        'estimate', path, '--c', '1', '--delta', '0.05', '--json']))
    assert payload['n_samples'] == 20
    assert payload['chebyshev_bound']['t'] == pytest.approx(90.0)
    assert payload['chebyshev_bound']['bound'] == pytest.approx(0.05)


def test_estimate_epsilon_uses_configured_delta(runner, matrix_file,
                                                empty_config):
    empty_config.add_section('estimate')
    empty_config.set('estimate', 'DELTA', '0.25')
    path = matrix_file(u'1, 2\n3, 4\n')
    payload = payload_of(runner.invoke(cli, [
        'estimate', path, '--epsilon', '1', '--json']))
    assert payload['n_samples'] == 4


def test_estimate_check_exact(runner, matrix_file):
    path = matrix_file(u'1, 2\n3, 4\n')
    payload = payload_of(runner.invoke(cli, [
        'estimate', path, '-n', '100', '--check-exact', '--json']))
    assert payload['exact'] == pytest.approx(10.0)
    assert payload['abs_error'] == pytest.approx(
        abs(payload['estimate'] - 10.0))


def test_estimate_glynn(runner, matrix_file):
    path = matrix_file(u'2.5\n')
    payload = payload_of(runner.invoke(cli, [
        'estimate', path, '-n', '100', '--method', 'glynn-random',
        '--json']))
    assert payload['method'] == 'glynn-random'
    assert payload['estimate'] == 2.5


def test_estimate_log_magnitude(runner, matrix_file):
    path = matrix_file(u'1, 2\n3, 4\n')
    payload = payload_of(runner.invoke(cli, [
        'estimate', path, '-n', '100', '--log-magnitude', '--json']))
    assert 0.0 <= payload['positive_fraction'] <= 1.0
    assert 'estimate' not in payload


def test_estimate_alpha_below_norm(runner, matrix_file):
    path = matrix_file(u'1, 2\n3, 4\n')
    result = runner.invoke(cli, [
        'estimate', path, '-n', '10', '--alpha', '1'])
    assert result.exit_code == 3


def test_estimate_unsafe_alpha_not_psd(runner, matrix_file):
    path = matrix_file(u'1, 2\n3, 4\n')
    result = runner.invoke(cli, [
        'estimate', path, '-n', '10', '--alpha', '1', '--unsafe-alpha'])
    assert result.exit_code == 4


@pytest.mark.parametrize('flags', [
    [],
    ['--samples', '10', '--epsilon', '1'],
    ['--samples', '10', '--delta', '0.1'],
    ['--c', '1'],
    ['--epsilon', '1', '--t', '2'],
    ['--samples', '0'],
])
def test_estimate_flag_conflicts(runner, matrix_file, flags):
    path = matrix_file(u'1, 2\n3, 4\n')
    result = runner.invoke(cli, ['estimate', path] + flags)
    assert result.exit_code == 2


def test_estimate_overflow(runner, matrix_file):
    path = matrix_file(u'1e150 0 0\n0 1e150 0\n0 0 1e150\n')
    result = runner.invoke(cli, ['estimate', path, '-n', '10'])
    assert result.exit_code == 4


def test_bound_tn(runner):
    payload = payload_of(runner.invoke(cli, [
        'bound', '--m', '1', '--alpha', '2', '--t', '1', '--n', '25',
        '--json']))
    assert payload['variance_bound'] == pytest.approx(12.0)
    assert payload['chebyshev_bound']['bound'] == pytest.approx(0.48)


def test_bound_c_delta(runner):
    payload = payload_of(runner.invoke(cli, [
        'bound', '--m', '5', '--alpha', '1', '--c', '1', '--delta', '0.05',
        '--json']))
    assert payload['required_samples']['n'] == 20
    assert payload['required_samples']['t'] == pytest.approx(
        math.sqrt(3) ** 5)


def test_bound_glynn(runner):
    payload = payload_of(runner.invoke(cli, [
        'bound', '--m', '2', '--alpha', '1', '--t', '1', '--n', '4',
        '--method', 'glynn-random', '--json']))
    assert payload['chebyshev_bound']['bound'] == pytest.approx(0.25)


@pytest.mark.parametrize('args', [
    ['--m', '1', '--alpha', '2', '--t', '0', '--n', '5'],
    ['--m', '1', '--alpha', '2'],
    ['--m', '1', '--alpha', '0', '--t', '1', '--n', '5'],
    ['--m', '-1', '--alpha', '2', '--t', '1', '--n', '5'],
])
def test_bound_usage_errors(runner, args):
    assert runner.invoke(cli, ['bound'] + args).exit_code == 2


@pytest.mark.parametrize('m, pairings', [(1, 1), (3, 15)])
def test_wick_check(runner, m, pairings):
    payload = payload_of(runner.invoke(cli, [
        'wick-check', '--m', str(m), '--trials', '5', '--json']))
    assert payload['max_discrepancy'] < 1e-9
    assert payload['pairings_counted'] == pairings
    assert payload['trials'] == 5


def test_wick_check_size_limit(runner):
    assert runner.invoke(cli, ['wick-check', '--m', '5']).exit_code == 3


def test_bench(runner, tmp_path):
    out = str(tmp_path / 'grid')
    result = runner.invoke(cli, [
        'bench', '--m-list', '2', '--n-list', '100,200', '--repeats', '1',
        '--out', out])
    assert result.exit_code == 0, result.output
    assert result.output.splitlines()[0] == (
        'm,n,setup_ns,sampling_ns,estimate,exact,abs_error,variance_bound')

    with open(out + '.csv') as f:
        assert f.read() == result.output
    with open(out + '.json') as f:
        assert len(json.load(f)['payload']['cells']) == 2


def test_bench_json(runner):
    payload = payload_of(runner.invoke(cli, [
        'bench', '--m-list', '2,3', '--n-list', '50', '--repeats', '1',
        '--json']))
    assert [c['m'] for c in payload['cells']] == [2, 3]


@pytest.mark.parametrize('args', [
    ['--n-list', ''],
    ['--m-list', 'a,b'],
])
def test_bench_bad_lists(runner, args):
    assert runner.invoke(cli, ['bench'] + args).exit_code == 2


@pytest.mark.parametrize('flags', [
    ['--c', '1', '--delta', '0.05'],
    ['--epsilon', '1'],
    ['--samples', '10', '--t', '1'],
    ['--method', 'glynn-random', '--c', '1', '--delta', '0.05'],
    ['--method', 'glynn-random', '--samples', '10', '--t', '1'],
])
def test_estimate_zero_matrix(runner, matrix_file, flags):
    path = matrix_file(u'0 0\n0 0\n')
    payload = payload_of(
        runner.invoke(cli, ['estimate', path, '--json'] + flags))
    assert payload['estimate'] == 0.0
    assert payload['variance_bound'] == 0.0
    assert payload['chebyshev_bound']['bound'] == 0.0


def test_estimate_glynn_overflow(runner, matrix_file):
    path = matrix_file(u'1e200 0\n0 1e200\n')
    result = runner.invoke(cli, [
        'estimate', path, '-n', '10', '--method', 'glynn-random'])
    assert result.exit_code == 4


def test_bound_saturated_json_is_strict(runner):
    result = runner.invoke(cli, [
        'bound', '--m', '400', '--alpha', '1e10', '--c', '1', '--delta',
        '0.05', '--json'])
    assert result.exit_code == 0, result.output

    def reject(token):
        raise ValueError(token)

    line = result.output.strip().splitlines()[-1]
    payload = json.loads(line, parse_constant=reject)['payload']
    assert payload['variance_bound'] == 'inf'
    assert payload['required_samples']['n'] == 20


def test_bench_rejects_zero_sample_count(runner):
    result = runner.invoke(cli, ['bench', '--n-list', '0,100'])
    assert result.exit_code == 2
