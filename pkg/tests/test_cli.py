import json
import math
from fractions import Fraction

import numpy as np
import pytest
from click.testing import CliRunner

from asphalt.integrable import cli
from asphalt.integrable.diffpoly import (
    GridFunction, VectorExpression, curvature_vector, parse_vector)
from asphalt.integrable.flows import soliton


@pytest.fixture
def runner():
    return CliRunner()


def read_json(path):
    with path.open(encoding='utf-8') as f:
        return json.load(f)


@pytest.mark.parametrize('n', [2, 3, 4], ids=['n2', 'n3', 'n4'])
def test_hierarchy_first_member(runner, n):
    result = runner.invoke(cli.main, ['hierarchy', '-n', str(n), '-k', '1'])
    assert result.exit_code == 0, result.output
    u = curvature_vector(n)
    u1 = u.derivative()
    expected = u1.derivative().derivative() + u1.scale(u.dot(u) * Fraction(3, 2))
    assert parse_vector(result.output.splitlines(), n - 1) == expected


def test_hierarchy_seed_member(runner):
    result = runner.invoke(cli.main, ['hierarchy', '-n', '2', '-k', '0'])
    assert result.exit_code == 0
    assert parse_vector(result.output.splitlines(), 1) == curvature_vector(2, 1)


def test_hierarchy_scalar_fifth_order(runner, parse):
    result = runner.invoke(cli.main, ['hierarchy', '-n', '2', '-k', '2'])
    assert result.exit_code == 0, result.output
    expected = parse("u[1]'5 + 5/2*u[1]^2*u[1]'3 + 10*u[1]*u[1]'1*u[1]'2 + 5/2*u[1]'1^3 + "
                     "15/8*u[1]^4*u[1]'1", 1)
    assert parse_vector(result.output.splitlines(), 1) == VectorExpression([expected])


def test_hierarchy_files(runner, tmp_path):
    result = runner.invoke(cli.main, ['hierarchy', '-n', '3', '-k', '1', '--out', str(tmp_path)])
    assert result.exit_code == 0
    assert (tmp_path / 'S_0.txt').is_file()
    assert (tmp_path / 'S_1.txt').read_text('utf-8') == result.output
    assert read_json(tmp_path / 'locality.json') == {'S_0': True, 'S_1': True}
    manifest = read_json(tmp_path / 'hierarchy.manifest.json')
    assert manifest['command'] == 'hierarchy'
    assert manifest['parameters'] == {'n': 3, 'steps': 1}
    assert sorted(manifest['outputs']) == ['S_0', 'S_1', 'locality']
    assert manifest['settings']['max_order'] == 12


def test_manifest_records_settings(runner, tmp_path):
    result = runner.invoke(cli.main, ['--substeps', '3', '--max-order', '10', 'hierarchy',
                                      '-n', '2', '-k', '0', '--out', str(tmp_path)])
    assert result.exit_code == 0, result.output
    settings = read_json(tmp_path / 'hierarchy.manifest.json')['settings']
    assert settings['substeps'] == 3
    assert settings['max_order'] == 10
    assert settings['fd_epsilon'] == 1e-5


def test_hierarchy_too_many_steps(runner):
    result = runner.invoke(cli.main, ['hierarchy', '-k', '5'])
    assert result.exit_code == 2


def test_symbolic_obstruction(runner):
    result = runner.invoke(cli.main, ['--max-order', '2', 'hierarchy', '-n', '3', '-k', '1'])
    assert result.exit_code == 2
    assert 'Error: ' in result.output


def test_bad_setting(runner):
    result = runner.invoke(cli.main, ['--fd-epsilon', '0', 'verify', 'killing'])
    assert result.exit_code == 2
    assert 'fd_epsilon must be positive' in result.output


def test_verify_killing(runner):
    result = runner.invoke(cli.main, ['verify', 'killing', '-n', '3'])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report['check'] == 'killing'
    assert report['verdict'] is True


def test_verify_writes_report(runner, tmp_path):
    result = runner.invoke(cli.main, ['verify', 'lambda', '-n', '3', '--seed', '7',
                                      '--out', str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert read_json(tmp_path / 'report.json') == json.loads(result.output)
    manifest = read_json(tmp_path / 'verify.manifest.json')
    assert manifest['parameters'] == {'check': 'lambda', 'n': 3, 'grid': 256, 'seed': 7}


def test_verify_bad_grid(runner):
    result = runner.invoke(cli.main, ['verify', 'jacobi', '-N', '100'])
    assert result.exit_code == 2
    assert 'must be a power of two and at least 16' in result.output


def test_verify_invalid_dimension(runner):
    result = runner.invoke(cli.main, ['verify', 'killing', '-n', '2'])
    assert result.exit_code == 2
    assert 'the Killing form identity needs n > 2' in result.output


def test_hasimoto_to_natural(runner, tmp_path):
    source = GridFunction.from_function(lambda x: [1.5, 2.0], 64).to_csv(tmp_path / 'frenet.csv')
    target = tmp_path / 'out' / 'natural.csv'
    result = runner.invoke(cli.main, ['hasimoto', 'to-natural', str(source), str(target)])
    assert result.exit_code == 0, result.output
    natural = GridFunction.from_csv(target)
    expected = [1.5 * np.cos(2 * natural.x), 1.5 * np.sin(2 * natural.x)]
    assert np.allclose(natural.samples, expected, rtol=0, atol=1e-8)
    assert (tmp_path / 'out' / 'natural_angles.csv').is_file()
    gauge = read_json(tmp_path / 'out' / 'natural_gauge.json')
    assert gauge['gauge_residual'] < 1e-6
    assert gauge['chain_discrepancy'] < 1e-8
    assert read_json(tmp_path / 'out' / 'hasimoto.manifest.json')['inputs'] == {
        'data': str(source)}


def test_hasimoto_positivity_loss(runner, tmp_path):
    samples = np.ones((2, 16))
    samples[0, 3] = -1
    source = GridFunction(samples, 16.0).to_csv(tmp_path / 'frenet.csv')
    result = runner.invoke(cli.main, ['hasimoto', 'to-natural', str(source),
                                      str(tmp_path / 'natural.csv')])
    assert result.exit_code == 3
    assert 'the first curvature is not positive at x = 3' in result.output


def test_hasimoto_bad_input_file(runner, tmp_path):
    source = tmp_path / 'frenet.csv'
    source.write_text('t,kappa\n0,1\n', 'utf-8')
    result = runner.invoke(cli.main, ['hasimoto', 'to-natural', str(source),
                                      str(tmp_path / 'natural.csv')])
    assert result.exit_code == 4
    assert 'the CSV header must be "x,comp1,..."' in result.output


def test_laxcheck_without_snapshots(runner, tmp_path):
    (tmp_path / 'trajectory.json').write_text('{"times": [0], "dt": 0.1, "kappa_c": 0}',
                                             'utf-8')
    result = runner.invoke(cli.main, ['laxcheck', str(tmp_path)])
    assert result.exit_code == 4
    assert 'no snapshot files found in' in result.output


def test_laxcheck_incomplete_metadata(runner, tmp_path):
    (tmp_path / 'trajectory.json').write_text('{"times": [0]}', 'utf-8')
    result = runner.invoke(cli.main, ['laxcheck', str(tmp_path)])
    assert result.exit_code == 4
    assert 'trajectory.json has no "dt" entry' in result.output


def test_evolve_and_laxcheck_zero_data(runner, tmp_path):
    source = GridFunction.zeros(2, 32).to_csv(tmp_path / 'u0.csv')
    out = tmp_path / 'run'
    result = runner.invoke(cli.main, ['evolve', str(source), '-T', '0.01', '--snapshots', '5',
                                      '--curve', '--out', str(out)])
    assert result.exit_code == 0, result.output
    assert len(list(out.glob('snapshot_*.csv'))) == 5
    assert len(list(out.glob('curve_*.csv'))) == 3
    assert read_json(out / 'trajectory.json')['times'] == pytest.approx(
        [0, 0.0025, 0.005, 0.0075, 0.01])
    assert read_json(out / 'evolve.manifest.json')['parameters']['snapshots'] == 5

    result = runner.invoke(cli.main, ['laxcheck', str(out)])
    assert result.exit_code == 0, result.output
    table = np.loadtxt(out / 'lax_residuals.csv', delimiter=',', skiprows=1, ndmin=2)
    assert table.shape == (3, 4)
    assert np.all(table[:, 3] == 0)
    assert (out / 'laxcheck.manifest.json').is_file()


def test_laxcheck_soliton(runner, tmp_path):
    direction = (math.cos(0.3), math.sin(0.3))
    source = GridFunction.from_function(
        lambda x: soliton(x, 0, 1.0, direction, centre=16.0), 256, 32.0).to_csv(
            tmp_path / 'u0.csv')
    out = tmp_path / 'run'
    result = runner.invoke(cli.main, ['evolve', str(source), '-T', '0.02', '--snapshots', '5',
                                      '--out', str(out)])
    assert result.exit_code == 0, result.output

    result = runner.invoke(cli.main, ['laxcheck', str(out), '-l', '1.0'])
    assert result.exit_code == 0, result.output

    # a mismatched spectral constant breaks the zero curvature condition
    result = runner.invoke(cli.main, ['laxcheck', str(out), '--nu', '1.0'])
    assert result.exit_code == 1


def test_evolve_stability_violation(runner, tmp_path):
    source = GridFunction.zeros(1, 64).to_csv(tmp_path / 'u0.csv')
    result = runner.invoke(cli.main, ['evolve', str(source), '-T', '1', '--dt', '1',
                                      '--out', str(tmp_path / 'run')])
    assert result.exit_code == 3
    assert 'exceeds the stability bound' in result.output
