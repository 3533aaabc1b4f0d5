import math

import numpy as np
import pytest

from asphalt.integrable.api import (
    BlowUp, ConsistencyDrift, Settings, StabilityViolation)
from asphalt.integrable.diffpoly import GridFunction, local_derivative
from asphalt.integrable.flows import (
    FlowTrajectory, conserved_report, evolve_curve, evolve_vmkdv, natural_cartan,
    reconstruct_frame, soliton, stability_bound, time_cartan, translate)


def soliton_data(direction=(1.0,), size=256, length=40.0, t=0.0, k=1.0):
    return GridFunction.from_function(
        lambda x: soliton(x, t, k, direction, centre=length / 2), size, length)


@pytest.fixture(scope='module')
def vector_trajectory():
    u0 = soliton_data((math.cos(0.3), math.sin(0.3)), size=256, length=32.0)
    return evolve_vmkdv(u0, 0.2, snapshots=21)


def test_soliton_direction():
    exc = pytest.raises(ValueError, soliton, np.zeros(4), 0, 1, (1.0, 1.0))
    assert str(exc.value) == 'the soliton direction must be a unit vector'


def test_zero_data_stays_zero():
    trajectory = evolve_vmkdv(GridFunction.zeros(2, 32), 0.01, snapshots=3)
    assert len(trajectory.snapshots) == 3
    assert all(u.max_norm() == 0 for u in trajectory.snapshots)
    assert conserved_report(trajectory)[-1] == {'t': pytest.approx(0.01), 'mass': 0.0,
                                                'energy': 0.0, 'mass_drift': 0.0,
                                                'energy_drift': 0.0}


def test_snapshot_times_are_uniform():
    trajectory = evolve_vmkdv(GridFunction.zeros(1, 32), 0.1, snapshots=5)
    assert np.allclose(trajectory.times, [0, 0.025, 0.05, 0.075, 0.1])
    assert trajectory.dt <= stability_bound(2 * math.pi / 32)


def test_scalar_soliton():
    trajectory = evolve_vmkdv(soliton_data(), 0.5, snapshots=3)
    expected = soliton_data(t=0.5)
    assert trajectory.final.allclose(expected, 1e-5)


def test_mass_is_conserved():
    trajectory = evolve_vmkdv(soliton_data(size=128), 1.0, snapshots=5)
    report = conserved_report(trajectory)
    assert report[0]['mass'] == pytest.approx(8.0, rel=1e-6)
    assert max(row['mass_drift'] for row in report) < 1e-8
    assert max(row['energy_drift'] for row in report) < 1e-6


def test_constant_curvature_is_a_shift():
    u0 = soliton_data((0.6, 0.8))
    flat = evolve_vmkdv(u0, 0.1, snapshots=2)
    curved = evolve_vmkdv(u0, 0.1, kappa_c=0.5, snapshots=2)
    assert curved.kappa_c == 0.5
    assert curved.final.allclose(translate(flat.final, 0.05), 1e-6)


def test_stability_violation():
    u0 = GridFunction.zeros(1, 64, 2 * math.pi)
    bound = stability_bound(u0.dx)
    exc = pytest.raises(StabilityViolation, evolve_vmkdv, u0, 1.0, 2 * bound)
    assert exc.value.bound == bound
    assert str(exc.value) == 'time step %.3e exceeds the stability bound %.3e' % (2 * bound,
                                                                                   bound)


def test_blow_up():
    settings = Settings(blowup_factor=0.5)
    exc = pytest.raises(BlowUp, evolve_vmkdv, soliton_data(size=64), 0.01, settings=settings)
    assert exc.value.norm == pytest.approx(2, rel=1e-2)


@pytest.mark.parametrize('kwargs, message', [
    ({'duration': 0}, 'the duration must be positive'),
    ({'duration': 1, 'snapshots': 1}, 'at least 2 snapshots are required'),
    ({'duration': 1, 'dt': -1.0}, 'the time step must be positive')
], ids=['duration', 'snapshots', 'dt'])
def test_evolve_bad_arguments(kwargs, message):
    exc = pytest.raises(ValueError, evolve_vmkdv, GridFunction.zeros(1, 16), **kwargs)
    assert str(exc.value) == message


def test_trajectory_validation():
    u = GridFunction.zeros(1, 16)
    exc = pytest.raises(ValueError, FlowTrajectory, [0.0, 0.1, 0.3], [u, u, u], dt=0.1)
    assert str(exc.value) == 'snapshot times must be increasing and uniformly spaced'
    exc = pytest.raises(ValueError, FlowTrajectory, [0.0, 0.1], [u], dt=0.1)
    assert str(exc.value) == 'expected one snapshot per time (1 != 2)'


def test_trajectory_csv(tmp_path):
    trajectory = evolve_vmkdv(GridFunction.zeros(2, 16), 0.001, snapshots=3)
    paths = trajectory.to_csv(tmp_path)
    assert [path.name for path in paths] == ['snapshot_0000.csv', 'snapshot_0001.csv',
                                             'snapshot_0002.csv']
    assert GridFunction.from_csv(paths[2]).allclose(trajectory.final)


def test_natural_cartan():
    matrix = natural_cartan([1.0, 2.0])
    assert np.array_equal(matrix, [[0, 1, 2], [-1, 0, 0], [-2, 0, 0]])
    assert natural_cartan(np.ones((2, 5))).shape == (5, 3, 3)


def test_time_cartan_is_skew():
    matrix = time_cartan([1.0, 0.5, -0.2], [0.3, 0.1, 0.4], [0.0, 1.0, 2.0])
    assert np.allclose(matrix, -matrix.T)
    assert matrix[0, 1] == pytest.approx(0.0 + 0.5 * 1.29 * 1.0)
    assert matrix[1, 2] == pytest.approx(0.5 * 0.3 - 1.0 * 0.1)


def test_straight_line():
    state = reconstruct_frame(GridFunction.zeros(2, 32, 4.0))
    assert np.allclose(state.points, np.outer(state.u.x, [1, 0, 0]))
    assert np.allclose(state.frame, np.eye(3))
    assert state.closure_defect() == pytest.approx(4.0)
    assert state.holonomy_defect() == pytest.approx(0.0)


def test_helix():
    u = GridFunction.from_function(lambda x: [np.cos(2 * x), np.sin(2 * x)], 256)
    state = reconstruct_frame(u)
    assert state.orthonormality_defect() < 1e-8
    assert state.arc_length_defect() < 1e-8
    assert state.tangent_defect() < 1e-7
    assert np.allclose(state.curvature_from_curve(), u.samples, rtol=0, atol=1e-6)

    # torsion of the reconstructed helix
    first = state.tangent()
    second = local_derivative(first.T, u.dx).T
    third = local_derivative(second.T, u.dx).T
    cross = np.cross(first, second)
    torsion = np.einsum('ki,ki->k', cross, third) / np.einsum('ki,ki->k', cross, cross)
    assert np.median(torsion) == pytest.approx(2, rel=1e-5)


def test_frame_not_orthonormal():
    exc = pytest.raises(ValueError, reconstruct_frame, GridFunction.zeros(2, 16), None,
                        2 * np.eye(3))
    assert str(exc.value) == 'the initial frame is not orthonormal'


def test_frame_wrong_dimension():
    exc = pytest.raises(ValueError, reconstruct_frame, GridFunction.zeros(2, 16), [0, 0])
    assert str(exc.value) == 'expected a point and a frame in 3 dimensions'


def test_stationary_line():
    trajectory = evolve_vmkdv(GridFunction.zeros(2, 32, 4.0), 0.01, snapshots=3)
    states = evolve_curve(trajectory)
    assert len(states) == 2
    assert np.allclose(states[-1].points, states[0].points)
    assert states[-1].drift < 1e-10


def test_curve_evolution(vector_trajectory):
    states = evolve_curve(vector_trajectory)
    assert len(states) == 11
    assert states[-1].t == pytest.approx(0.2)
    for state in states:
        assert state.orthonormality_defect() < 1e-8
        assert state.arc_length_defect() < 1e-6

    assert max(state.drift for state in states[1:]) < 1e-4


def test_curve_evolution_odd_intervals():
    trajectory = evolve_vmkdv(GridFunction.zeros(2, 16), 0.01, snapshots=4)
    exc = pytest.raises(ValueError, evolve_curve, trajectory)
    assert str(exc.value) == 'an even number of snapshot intervals is required'


def test_curve_evolution_curved_space():
    trajectory = evolve_vmkdv(GridFunction.zeros(2, 16), 0.01, kappa_c=1.0, snapshots=3)
    exc = pytest.raises(ValueError, evolve_curve, trajectory)
    assert str(exc.value) == 'curves are reconstructed in flat space only (kappa_c = 0)'


def test_consistency_drift():
    u0 = soliton_data((0.6, 0.8), size=128, length=20.0)
    trajectory = FlowTrajectory([0.0, 0.01, 0.02], [u0, u0 * 1.5, u0 * 2], dt=0.01)
    exc = pytest.raises(ConsistencyDrift, evolve_curve, trajectory)
    assert exc.value.t == pytest.approx(0.02)
    assert exc.value.drift > 1


def test_trajectory_from_csv(tmp_path):
    trajectory = evolve_vmkdv(soliton_data((0.6, 0.8), size=64, length=20.0), 0.001,
                              snapshots=3)
    trajectory.to_csv(tmp_path)
    loaded = FlowTrajectory.from_csv(tmp_path, list(trajectory.times), dt=trajectory.dt)
    assert loaded.n == 3
    assert len(loaded.snapshots) == 3
    assert loaded.final.allclose(trajectory.final)


def test_trajectory_from_empty_directory(tmp_path):
    exc = pytest.raises(ValueError, FlowTrajectory.from_csv, tmp_path, [0.0, 0.1], dt=0.1)
    assert str(exc.value) == 'no snapshot files found in %s' % tmp_path
