"""
The ``integrable`` command line tool.

Every command that writes files also writes a manifest describing the run
(``<command>.manifest.json``) into the output directory. Exit codes:

* 0: success
* 1: a verification verdict failed
* 2: a symbolic obstruction (or invalid usage)
* 3: numerical data left the domain of a formula
* 4: an input file could not be read or holds invalid data
"""
import functools
import io
import logging
import time
from pathlib import Path
from typing import Any, Dict

import click
import numpy as np
from asphalt.serialization.serializers.json import JSONSerializer

from asphalt.integrable.api import (
    NumericalDomainError, RunManifest, Settings, SymbolicObstruction)
from asphalt.integrable.component import CHECKS, DIRECTIONS, MAX_HIERARCHY_STEPS, Workbench
from asphalt.integrable.diffpoly.grid import GridFunction
from asphalt.integrable.diffpoly.parser import format_vector
from asphalt.integrable.flows import FlowTrajectory, conserved_report
from asphalt.integrable.hasimoto import chain_discrepancy
from asphalt.integrable.util import atomic_write, is_power_of_two, library_version

logger = logging.getLogger(__name__)

EXIT_FAILED = 1
EXIT_SYMBOLIC = 2
EXIT_NUMERICAL = 3
EXIT_DATA = 4

serializer = JSONSerializer(encoder_options={'sort_keys': True, 'indent': 2})


def write_json(path: Path, data) -> str:
    return str(atomic_write(path, serializer.serialize(data)))


def read_json(path: Path):
    return serializer.deserialize(path.read_bytes())


class InvalidInput(click.ClickException):
    exit_code = EXIT_DATA


def load_grid(path: str) -> GridFunction:
    try:
        return GridFunction.from_csv(path)
    except (OSError, ValueError) as exc:
        raise InvalidInput(str(exc)) from exc


def load_trajectory(directory: Path) -> FlowTrajectory:
    """Read the snapshots and the metadata written by the "evolve" command."""
    try:
        metadata = read_json(directory / 'trajectory.json')
        return FlowTrajectory.from_csv(directory, metadata['times'], dt=metadata['dt'],
                                       kappa_c=metadata['kappa_c'])
    except KeyError as exc:
        raise InvalidInput('%s: trajectory.json has no "%s" entry' %
                           (directory, exc.args[0])) from exc
    except (OSError, ValueError) as exc:
        raise InvalidInput(str(exc)) from exc


class Run:
    """Collects what goes into the manifest of one command invocation."""

    def __init__(self, command: str, parameters: Dict[str, Any], settings: Settings,
                 **inputs: str):
        self.started = time.perf_counter()
        self.command = command
        self.manifest = RunManifest(command, parameters, inputs=inputs,
                                    settings=settings.__getstate__(), version=library_version())

    def finish(self, directory: Path, **outputs: str) -> None:
        self.manifest.outputs.update(outputs)
        self.manifest.wall_time = time.perf_counter() - self.started
        write_json(directory / ('%s.manifest.json' % self.command), self.manifest.__getstate__())


def handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except SymbolicObstruction as exc:
            logger.debug('symbolic obstruction', exc_info=True)
            click.echo('Error: %s' % exc, err=True)
            ctx.exit(EXIT_SYMBOLIC)
        except NumericalDomainError as exc:
            logger.debug('numerical domain error', exc_info=True)
            click.echo('Error: %s' % exc, err=True)
            ctx.exit(EXIT_NUMERICAL)
        except ValueError as exc:
            raise click.UsageError(str(exc), ctx) from exc

    return wrapper


def grid_size(ctx, param, value: int) -> int:
    if value < 16 or not is_power_of_two(value):
        raise click.BadParameter('must be a power of two and at least 16')

    return value


@click.group()
@click.option('-v', '--verbose', count=True, help='Log progress (repeat for debug output).')
@click.option('--max-order', type=click.IntRange(1), help='Maximum jet order.')
@click.option('--substeps', type=click.IntRange(1), help='RK4 steps per grid interval.')
@click.option('--gimbal-tolerance', type=float, help='Smallest allowed |cos(theta)|.')
@click.option('--fd-epsilon', type=float, help='Finite difference step of linearizations.')
@click.option('--stability-factor', type=float, help='Multiplier of the time step bound.')
@click.pass_context
def main(ctx, verbose: int, **overrides):
    """Verify and simulate integrable curve flows."""
    level = logging.DEBUG if verbose > 1 else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')
    try:
        settings = Settings(**{key: value for key, value in overrides.items()
                               if value is not None})
    except ValueError as exc:
        raise click.UsageError(str(exc), ctx) from exc

    ctx.obj = Workbench(settings)


@main.command('hierarchy')
@click.option('-n', 'n', type=click.IntRange(2), default=3, show_default=True,
              help='Ambient dimension.')
@click.option('-k', '--steps', type=click.IntRange(0, MAX_HIERARCHY_STEPS), default=1,
              show_default=True, help='Number of recursion steps.')
@click.option('--out', type=click.Path(file_okay=False), help='Directory for the members.')
@click.pass_obj
@handle_errors
def hierarchy_command(workbench: Workbench, n: int, steps: int, out: str):
    """Generate the vector mKdV hierarchy."""
    run = Run('hierarchy', {'n': n, 'steps': steps}, workbench.settings)
    members = workbench.hierarchy(n, steps)
    click.echo(format_vector(members[-1]), nl=False)
    if out:
        directory = Path(out)
        outputs = {'S_%d' % index: str(atomic_write(directory / ('S_%d.txt' % index),
                                                    format_vector(member)))
                   for index, member in enumerate(members)}
        locality = {'S_%d' % index: member.is_local for index, member in enumerate(members)}
        outputs['locality'] = write_json(directory / 'locality.json', locality)
        run.finish(directory, **outputs)


@main.command('verify')
@click.argument('check', type=click.Choice(sorted(CHECKS)))
@click.option('-n', 'n', type=click.IntRange(2), default=3, show_default=True,
              help='Ambient dimension.')
@click.option('-N', 'grid', type=int, default=256, show_default=True, callback=grid_size,
              help='Grid size.')
@click.option('--seed', type=click.IntRange(0, 2 ** 64 - 1), default=0, show_default=True,
              help='Seed of the PCG64 generator for the random data.')
@click.option('--out', type=click.Path(file_okay=False), help='Directory for the report.')
@click.pass_obj
@handle_errors
def verify_command(workbench: Workbench, check: str, n: int, grid: int, seed: int, out: str):
    """Run a verification suite and print its report as JSON."""
    run = Run('verify', {'check': check, 'n': n, 'grid': grid, 'seed': seed},
              workbench.settings)
    report = workbench.verify(check, n, grid, seed)
    state = report.__getstate__()
    click.echo(serializer.serialize(state).decode('utf-8'))
    if out:
        directory = Path(out)
        run.finish(directory, report=write_json(directory / 'report.json', state))

    if not report.verdict:
        click.get_current_context().exit(EXIT_FAILED)


@main.command('hasimoto')
@click.argument('direction', type=click.Choice(DIRECTIONS))
@click.argument('input_path', metavar='INPUT', type=click.Path(exists=True, dir_okay=False))
@click.argument('output_path', metavar='OUTPUT', type=click.Path(dir_okay=False))
@click.pass_obj
@handle_errors
def hasimoto_command(workbench: Workbench, direction: str, input_path: str, output_path: str):
    """Transform curvatures between the Frenet and the natural frame."""
    run = Run('hasimoto', {'direction': direction}, workbench.settings, data=input_path)
    data = load_grid(input_path)
    result, angles, residual = workbench.hasimoto(data, direction)
    frenet = data if direction == 'to-natural' else result
    output = Path(output_path)
    gauge = {
        'gauge_residual': residual,
        'chain_discrepancy': chain_discrepancy(frenet, angles),
        'error_estimate': angles.error,
        'initial': {'%d%d' % pair: float(value) for pair, value in angles.initial().items()}
    }
    run.finish(output.parent,
               curvatures=str(result.to_csv(output)),
               angles=str(angles.to_grid().to_csv(output.with_name(output.stem +
                                                                   '_angles.csv'))),
               gauge=write_json(output.with_name(output.stem + '_gauge.json'), gauge))
    click.echo('gauge residual: %.3e' % residual)


@main.command('evolve')
@click.argument('input_path', metavar='U0', type=click.Path(exists=True, dir_okay=False))
@click.option('-T', '--duration', type=float, required=True, help='Final time.')
@click.option('--dt', type=float, help='Time step (defaults to a quarter of the bound).')
@click.option('--kappa-c', type=float, default=0.0, show_default=True,
              help='Sectional curvature of the ambient space.')
@click.option('--snapshots', type=click.IntRange(2), default=11, show_default=True,
              help='Number of recorded snapshots.')
@click.option('--curve/--no-curve', default=False,
              help='Also reconstruct the evolving curve (flat space only).')
@click.option('--out', type=click.Path(file_okay=False), required=True,
              help='Directory for the trajectory.')
@click.pass_obj
@handle_errors
def evolve_command(workbench: Workbench, input_path: str, duration: float, dt: float,
                   kappa_c: float, snapshots: int, curve: bool, out: str):
    """Evolve curvature data under the vector mKdV flow."""
    run = Run('evolve', {'duration': duration, 'dt': dt, 'kappa_c': kappa_c,
                         'snapshots': snapshots, 'curve': curve}, workbench.settings,
              u0=input_path)
    trajectory = workbench.evolve(load_grid(input_path), duration, dt, kappa_c,
                                  snapshots)
    directory = Path(out)
    trajectory.to_csv(directory)
    report = conserved_report(trajectory)
    outputs = {
        'snapshots': str(directory),
        'trajectory': write_json(directory / 'trajectory.json', {
            'times': trajectory.times.tolist(), 'dt': trajectory.dt,
            'kappa_c': trajectory.kappa_c}),
        'diagnostics': write_json(directory / 'diagnostics.json', report)
    }
    if curve:
        states = workbench.curve(trajectory)
        rows = []
        for index, state in enumerate(states):
            state.to_csv(directory / ('curve_%04d.csv' % index))
            rows.append({'t': float(state.t), 'arc_length_defect': state.arc_length_defect(),
                         'drift': state.drift})

        outputs['curve'] = write_json(directory / 'curve.json', rows)

    run.finish(directory, **outputs)
    click.echo('mass drift %.3e, energy drift %.3e' % (
        max(row['mass_drift'] for row in report), max(row['energy_drift'] for row in report)))


@main.command('laxcheck')
@click.argument('directory', type=click.Path(exists=True, file_okay=False))
@click.option('-l', '--lambda', 'spectral', type=float, multiple=True,
              default=(0.5, 1.0, 2.0), show_default=True, help='Spectral parameter values.')
@click.option('--nu', type=float, default=0.0, show_default=True,
              help='Spectral constant of the temporal part.')
@click.option('--tolerance', type=float, default=1e-5, show_default=True,
              help='Largest accepted residual.')
@click.pass_obj
@handle_errors
def laxcheck_command(workbench: Workbench, directory: str, spectral, nu: float,
                     tolerance: float):
    """Measure the zero curvature residual along a trajectory written by "evolve"."""
    path = Path(directory)
    run = Run('laxcheck', {'lambda': list(spectral), 'nu': nu, 'tolerance': tolerance},
              workbench.settings, trajectory=directory)
    rows = workbench.laxcheck(load_trajectory(path), spectral, nu)
    table = np.array([[row['n'], row['lambda'], row['t'], row['residual']] for row in rows])
    buffer = io.StringIO()
    np.savetxt(buffer, table, delimiter=',', header='n,lambda,t,residual', comments='',
               fmt=['%d', '%.17g', '%.17g', '%.17g'])
    run.finish(path, residuals=str(atomic_write(path / 'lax_residuals.csv',
                                                buffer.getvalue())))
    worst = max(row['residual'] for row in rows)
    click.echo('largest zero curvature residual: %.3e' % worst)
    if worst >= tolerance:
        click.get_current_context().exit(EXIT_FAILED)
