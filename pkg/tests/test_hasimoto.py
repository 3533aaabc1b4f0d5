import math

import numpy as np
import pytest

from asphalt.integrable.api import BranchJump, GimbalLock, PositivityLoss
from asphalt.integrable.diffpoly import GridFunction
from asphalt.integrable.hasimoto import (
    AngleField, angle_pairs, angles_from_natural, chain_discrepancy, chain_quantities,
    constrained_pairs, frenet_from_chain, gauge_residual, hasimoto_n3, natural_from_frenet,
    rotation_field, rotation_matrix)


def smooth_frenet(n: int) -> GridFunction:
    def curvatures(x):
        wave = np.pi * x
        return [1 + 0.3 * np.cos(wave)] + [0.3 / k + 0.1 * np.sin(k * wave)
                                            for k in range(1, n - 1)]

    return GridFunction.from_function(curvatures, 256, 2.0)


def test_angle_pairs():
    assert angle_pairs(4) == [(2, 3), (2, 4), (3, 4)]
    assert constrained_pairs(5) == [(2, 4), (2, 5), (3, 5)]


@pytest.mark.parametrize('n, count', [(3, 0), (4, 1), (5, 3), (6, 6)],
                         ids=['n3', 'n4', 'n5', 'n6'])
def test_constraint_count(n, count):
    assert AngleField.zeros(n, 16).constraint_count == count == (n - 2) * (n - 3) // 2


def test_angle_field_wrong_shape():
    exc = pytest.raises(ValueError, AngleField, 4, np.zeros((2, 16)), 1.0)
    assert str(exc.value) == 'expected 3 angle fields for n = 4'


def test_angle_field_small_dimension():
    exc = pytest.raises(ValueError, AngleField.zeros, 2, 16)
    assert str(exc.value) == 'the Hasimoto transformation needs an ambient dimension of at least 3'


def test_unknown_angle():
    exc = pytest.raises(ValueError, AngleField.zeros(4, 16).angle, 2, 5)
    assert str(exc.value) == 'no angle theta_25 for n = 4'


def test_euler_transformation():
    values = [0.4, -0.3, 0.7]
    row = rotation_matrix(4, values)[1, 1:]
    c23, s23, c24, s24 = math.cos(0.4), math.sin(0.4), math.cos(-0.3), math.sin(-0.3)
    assert row == pytest.approx([c23 * c24, s23 * c24, s24])


def test_rotation_first_row_fixed():
    matrix = rotation_matrix(5, np.linspace(0.1, 0.6, 6))
    assert matrix[0] == pytest.approx([1, 0, 0, 0, 0])
    assert matrix[:, 0] == pytest.approx([1, 0, 0, 0, 0])


def test_constant_space_curve():
    # kappa = 1.5, tau = 2 gives u = 1.5 (cos 2x, sin 2x)
    frenet = GridFunction.from_function(lambda x: [1.5, 2.0], 64)
    natural, angles = natural_from_frenet(frenet)
    x = natural.x
    expected = np.array([1.5 * np.cos(2 * x), 1.5 * np.sin(2 * x)])
    assert np.allclose(natural.samples, expected, rtol=0, atol=1e-8)
    assert np.allclose(angles.angle(2, 3), 2 * x, rtol=0, atol=1e-8)


def test_space_curve_angle_passes_right_angle():
    # no gimbal lock is possible for n = 3
    frenet = GridFunction.from_function(lambda x: [1.0, 1.0], 64)
    _, angles = natural_from_frenet(frenet)
    assert angles.angle(2, 3).max() > math.pi


def test_constant_natural_curvatures():
    u = GridFunction.from_function(lambda x: [1.5 * np.cos(2 * x), 1.5 * np.sin(2 * x)], 256)
    angles, frenet = angles_from_natural(u)
    assert np.allclose(frenet.samples[0], 1.5, rtol=0, atol=1e-8)
    assert np.allclose(frenet.samples[1], 2.0, rtol=0, atol=1e-6)


def test_hasimoto_n3():
    kappa = GridFunction.from_function(lambda x: 1 + 0.2 * np.cos(x), 256)
    tau = GridFunction.from_function(lambda x: 0.5 + 0.3 * np.sin(x), 256)
    phi = hasimoto_n3(kappa, tau)
    natural, _ = natural_from_frenet(GridFunction.stack([kappa, tau]))
    assert phi.is_complex
    assert np.allclose(phi.samples[0].real, natural.samples[0], rtol=0, atol=1e-6)
    assert np.allclose(phi.samples[0].imag, natural.samples[1], rtol=0, atol=1e-6)


def test_hasimoto_n3_components():
    data = GridFunction.zeros(2, 16)
    exc = pytest.raises(ValueError, hasimoto_n3, data, data)
    assert str(exc.value) == 'curvature and torsion must be single component grid functions'


@pytest.mark.parametrize('n', [4, 5], ids=['n4', 'n5'])
def test_round_trip(n):
    frenet = smooth_frenet(n)
    natural, angles = natural_from_frenet(frenet)
    recovered_angles, recovered = angles_from_natural(natural)
    assert np.allclose(recovered.samples, frenet.samples, rtol=0, atol=1e-6)
    assert np.allclose(recovered_angles.values, angles.values, rtol=0, atol=1e-6)


@pytest.mark.parametrize('n', [3, 4, 5], ids=['n3', 'n4', 'n5'])
def test_gauge_residual(n):
    frenet = smooth_frenet(n)
    natural, angles = natural_from_frenet(frenet)
    assert gauge_residual(frenet, natural, angles) < 1e-6


def test_gauge_residual_detects_wrong_curvatures():
    frenet = smooth_frenet(4)
    natural, angles = natural_from_frenet(frenet)
    assert gauge_residual(frenet * 1.1, natural, angles) > 1e-3


def test_gauge_residual_components():
    frenet = smooth_frenet(4)
    natural, angles = natural_from_frenet(frenet)
    exc = pytest.raises(ValueError, gauge_residual, smooth_frenet(3), natural, angles)
    assert str(exc.value) == 'expected curvature data with 3 components'


def test_error_estimate():
    _, angles = natural_from_frenet(smooth_frenet(4))
    assert angles.error < 1e-8


def test_rotations_are_orthogonal():
    _, angles = natural_from_frenet(smooth_frenet(5))
    rotations = rotation_field(angles)
    assert rotations.orthogonality_defect() < 1e-12
    assert np.allclose(rotations.determinants(), 1)


def test_rotation_factors():
    _, angles = natural_from_frenet(smooth_frenet(5))
    rotations = rotation_field(angles)
    factors = rotations.factors()
    assert sorted(factors) == [3, 4, 5]
    product = np.einsum('kij,kjl,klm->kim', factors[5], factors[4], factors[3])
    assert np.allclose(product, rotations.T)


def test_initial_angles():
    frenet = smooth_frenet(4)
    _, angles = natural_from_frenet(frenet, {(3, 4): 0.25})
    assert angles.initial() == {(2, 3): 0.0, (2, 4): 0.0, (3, 4): 0.25}


def test_initial_first_tier_rejected():
    u = GridFunction.from_function(lambda x: [1.0, 0.0, 0.0], 16)
    exc = pytest.raises(ValueError, angles_from_natural, u, {(2, 4): 0.1})
    assert str(exc.value) == 'the angles theta_2j are determined by the curvature vector'


def test_positivity_loss():
    samples = np.ones((2, 16))
    samples[0, 5] = 0
    frenet = GridFunction(samples, 16.0)
    exc = pytest.raises(PositivityLoss, natural_from_frenet, frenet)
    assert exc.value.x == 5.0
    assert str(exc.value) == 'the first curvature is not positive at x = 5'


def test_vanishing_natural_curvature():
    u = GridFunction.zeros(2, 16)
    pytest.raises(PositivityLoss, angles_from_natural, u)


def test_gimbal_lock_at_start():
    exc = pytest.raises(GimbalLock, natural_from_frenet, smooth_frenet(4), {(2, 4): math.pi / 2})
    assert (exc.value.i, exc.value.j, exc.value.x) == (2, 4, 0.0)
    assert str(exc.value) == 'cos(theta_24) vanishes at x = 0'


def test_gimbal_lock_from_natural():
    u = GridFunction.from_function(lambda x: [0.0, 0.0, 1.0], 16)
    exc = pytest.raises(GimbalLock, angles_from_natural, u)
    assert (exc.value.i, exc.value.j) == (2, 4)


def test_branch_jump():
    samples = np.zeros((2, 16))
    samples[0, :8] = 1
    samples[0, 8:] = -1
    exc = pytest.raises(BranchJump, angles_from_natural, GridFunction(samples, 16.0))
    assert (exc.value.i, exc.value.j) == (2, 3)


def test_chain_quantities_space_curve():
    frenet = smooth_frenet(3)
    _, angles = natural_from_frenet(frenet)
    chain = chain_quantities(angles)
    assert np.all(chain[0] == 0)
    assert np.allclose(chain[1], frenet.samples[1])
    assert np.allclose(frenet_from_chain(angles)[0], frenet.samples[1])


@pytest.mark.parametrize('n', [3, 4, 5, 6], ids=['n3', 'n4', 'n5', 'n6'])
def test_chain_predicts_higher_curvatures(n):
    frenet = smooth_frenet(n)
    _, angles = natural_from_frenet(frenet)
    predicted = frenet_from_chain(angles)
    assert predicted.shape == (n - 2, frenet.size)
    assert np.allclose(predicted, frenet.samples[1:], rtol=0, atol=1e-9)
    assert chain_discrepancy(frenet, angles) < 1e-9


def test_chain_discrepancy_dimension():
    _, angles = natural_from_frenet(smooth_frenet(4))
    exc = pytest.raises(ValueError, chain_discrepancy, smooth_frenet(3), angles)
    assert str(exc.value) == 'expected curvature data with 3 components'


def test_chain_quantities_without_rates():
    exc = pytest.raises(ValueError, chain_quantities, AngleField.zeros(3, 16))
    assert str(exc.value) == 'the angle rates are not known'
