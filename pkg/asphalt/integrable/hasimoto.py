"""
The generalized Hasimoto transformation between the Frenet frame and the natural frame.

Both frames are related by ``e_Frenet = R e_natural`` where ``R = 1 (+) T`` is the ordered
product of plane rotations ``R_ij`` (``2 <= i < j <= n``, rows ``i`` and ``j`` rotated by
``theta_ij``)::

    R = R_{n-1,n} ... R_{3,n} ... R_{34} R_{2,n} ... R_{24} R_{23}

The gauge identity ``w_F R - Dx R = R w_N`` between the two Cartan matrices determines the
x-derivatives of all angles. The first row of ``T`` is ``u^T / |u|`` (the Euler transformation).

Curvature data is carried in :class:`~asphalt.integrable.diffpoly.grid.GridFunction` objects with
``n - 1`` components: Frenet curvatures ``(u_F1, ..., u_F{n-1})`` with ``u_F1 > 0``, or natural
curvatures ``(u_1, ..., u_{n-1})``.
"""
import logging
import math
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from asphalt.integrable.api import (
    DEFAULT_SETTINGS, BranchJump, GimbalLock, PositivityLoss, Settings)
from asphalt.integrable.diffpoly.grid import GridFunction, local_derivative, local_interpolate

__all__ = ('angle_pairs', 'constrained_pairs', 'AngleField', 'RotationField', 'rotation_matrix',
           'rotation_field', 'natural_from_frenet', 'angles_from_natural', 'gauge_residual',
           'chain_quantities', 'frenet_from_chain', 'chain_discrepancy', 'hasimoto_n3')

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


def angle_pairs(n: int) -> List[Pair]:
    """Return the index pairs ``(i, j)``, ``2 <= i < j <= n``, in lexicographic order."""
    return [(i, j) for i in range(2, n) for j in range(i + 1, n + 1)]


def constrained_pairs(n: int) -> List[Pair]:
    """Return the pairs with ``j >= i + 2`` (the angles whose cosines the chart divides by)."""
    return [(i, j) for i, j in angle_pairs(n) if j >= i + 2]


def _product_order(n: int) -> List[Pair]:
    # leftmost factor first
    return [(i, j) for i in range(n - 1, 1, -1) for j in range(n, i, -1)]


def _check_dimension(n: int) -> None:
    if n < 3:
        raise ValueError('the Hasimoto transformation needs an ambient dimension of at least 3')


class AngleField:
    """
    The rotation angles ``theta_ij(x)`` in radians.

    :param n: ambient dimension
    :param values: array of shape ``(len(angle_pairs(n)), size)``
    :param length: period length of the grid
    :param rates: x-derivatives of the angles (same shape), if known
    :ivar error: step halving estimate of the integration error, if computed
    """

    __slots__ = 'n', 'values', 'length', 'rates', 'error'

    def __init__(self, n: int, values, length: float, rates=None,
                 error: Optional[float] = None):
        _check_dimension(n)
        values = np.asarray(values, dtype=float)
        expected = len(angle_pairs(n))
        if values.ndim != 2 or values.shape[0] != expected:
            raise ValueError('expected %d angle fields for n = %d' % (expected, n))

        self.n = n
        self.values = values
        self.length = float(length)
        self.rates = None if rates is None else np.asarray(rates, dtype=float)
        self.error = error

    @classmethod
    def zeros(cls, n: int, size: int, length: float = 2 * math.pi) -> 'AngleField':
        return cls(n, np.zeros((len(angle_pairs(n)), size)), length)

    @property
    def size(self) -> int:
        return self.values.shape[1]

    @property
    def x(self) -> np.ndarray:
        return GridFunction.grid_points(self.size, self.length)

    @property
    def constraint_count(self) -> int:
        return len(constrained_pairs(self.n))

    def index(self, i: int, j: int) -> int:
        try:
            return angle_pairs(self.n).index((i, j))
        except ValueError:
            raise ValueError('no angle theta_%d%d for n = %d' % (i, j, self.n)) from None

    def angle(self, i: int, j: int) -> np.ndarray:
        return self.values[self.index(i, j)]

    def initial(self) -> Dict[Pair, float]:
        """Return the angles at ``x = 0``."""
        return {pair: float(self.values[k, 0]) for k, pair in enumerate(angle_pairs(self.n))}

    def to_grid(self) -> GridFunction:
        """Return the angles as a grid function (for CSV export)."""
        return GridFunction(self.values, self.length)

    @classmethod
    def from_grid(cls, n: int, function: GridFunction) -> 'AngleField':
        return cls(n, function.samples, function.length)

    def __repr__(self):
        return '<AngleField (n=%d, size=%d)>' % (self.n, self.size)


def _givens(m: int, i: int, j: int, theta: float, derivative: bool = False) -> np.ndarray:
    a, b = i - 2, j - 2
    c, s = math.cos(theta), math.sin(theta)
    if derivative:
        block = np.zeros((m, m))
        c, s = -s, c
    else:
        block = np.eye(m)

    block[a, a] = block[b, b] = c
    block[a, b] = s
    block[b, a] = -s
    return block


def _gauge_and_jacobian(n: int, values: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Return ``T`` and ``[dT/dtheta_k]`` in the order of :func:`angle_pairs`."""
    m = n - 1
    pairs = angle_pairs(n)
    order = _product_order(n)
    factors = [_givens(m, i, j, values[pairs.index((i, j))]) for i, j in order]
    prefixes = [np.eye(m)]
    for factor in factors:
        prefixes.append(prefixes[-1] @ factor)

    suffixes = [np.eye(m)]
    for factor in reversed(factors):
        suffixes.append(factor @ suffixes[-1])

    suffixes.reverse()
    jacobian: List[np.ndarray] = [None] * len(pairs)
    for position, (i, j) in enumerate(order):
        derivative = _givens(m, i, j, values[pairs.index((i, j))], derivative=True)
        jacobian[pairs.index((i, j))] = prefixes[position] @ derivative @ suffixes[position + 1]

    return prefixes[-1], jacobian


def rotation_matrix(n: int, values) -> np.ndarray:
    """Return ``R = 1 (+) T`` for one set of angles (ordered as :func:`angle_pairs`)."""
    _check_dimension(n)
    result = np.eye(n)
    result[1:, 1:] = _gauge_and_jacobian(n, np.asarray(values, dtype=float))[0]
    return result


class RotationField:
    """
    The gauge rotation ``R(x)`` sampled on a grid.

    :param n: ambient dimension
    :param matrices: array of shape ``(size, n, n)``
    :param angles: the angles the rotations were built from
    """

    __slots__ = 'n', 'matrices', 'angles'

    def __init__(self, n: int, matrices: np.ndarray, angles: AngleField):
        self.n = n
        self.matrices = matrices
        self.angles = angles

    @property
    def T(self) -> np.ndarray:
        return self.matrices[:, 1:, 1:]

    def factors(self) -> Dict[int, np.ndarray]:
        """
        Return the blocks ``B(k)`` of ``R(k) = R_{k-1,k} ... R_{3k} R_{2k}`` for ``k = 3..n``.

        ``T = B(n) B(n-1) ... B(3)``.
        """
        m = self.n - 1
        result = {}
        for k in range(3, self.n + 1):
            blocks = np.empty((self.angles.size, m, m))
            for index in range(self.angles.size):
                block = np.eye(m)
                for i in range(k - 1, 1, -1):
                    block = block @ _givens(m, i, k, self.angles.angle(i, k)[index])

                blocks[index] = block

            result[k] = blocks

        return result

    def orthogonality_defect(self) -> float:
        """Return the largest entry of ``R^T R - I`` over the grid."""
        products = np.einsum('kji,kjl->kil', self.matrices, self.matrices)
        return float(np.max(np.abs(products - np.eye(self.n))))

    def determinants(self) -> np.ndarray:
        return np.linalg.det(self.matrices)


def rotation_field(angles: AngleField) -> RotationField:
    matrices = np.array([rotation_matrix(angles.n, angles.values[:, index])
                         for index in range(angles.size)])
    return RotationField(angles.n, matrices, angles)


def _upper(matrix: np.ndarray) -> np.ndarray:
    rows, columns = np.triu_indices(matrix.shape[0], 1)
    return matrix[rows, columns]


def _frenet_block(m: int, higher: np.ndarray) -> np.ndarray:
    """Return the lower block of the Frenet Cartan matrix from ``u_F2, ..., u_F{n-1}``."""
    block = np.zeros((m, m))
    for k, value in enumerate(higher):
        block[k, k + 1] = value
        block[k + 1, k] = -value

    return block



def _check_gimbal(n: int, values: np.ndarray, x: float, settings: Settings) -> None:
    pairs = angle_pairs(n)
    for i, j in constrained_pairs(n):
        if abs(math.cos(values[pairs.index((i, j))])) < settings.gimbal_tolerance:
            raise GimbalLock(i, j, x)


def _weakest_pair(n: int, values: np.ndarray) -> Pair:
    pairs = angle_pairs(n)
    return min(constrained_pairs(n) or pairs,
               key=lambda pair: abs(math.cos(values[pairs.index(pair)])))


def _angle_rates(n: int, values: np.ndarray, frenet: np.ndarray, x: float,
                 settings: Settings) -> np.ndarray:
    # sum_k (dT/dtheta_k) T^T theta_k' = S(u_F)
    _check_gimbal(n, values, x, settings)
    gauge, jacobian = _gauge_and_jacobian(n, values)
    system = np.column_stack([_upper(derivative @ gauge.T) for derivative in jacobian])
    try:
        return np.linalg.solve(system, _upper(_frenet_block(n - 1, frenet[1:])))
    except np.linalg.LinAlgError:
        raise GimbalLock(*_weakest_pair(n, values), x) from None


def _integrate_angles(frenet: GridFunction, initial: np.ndarray, substeps: int,
                      settings: Settings) -> Tuple[np.ndarray, np.ndarray]:
    n = frenet.components + 1
    size = frenet.size
    fine = local_interpolate(frenet.samples, 2 * substeps)
    step = frenet.dx / substeps
    values = np.empty((len(initial), size))
    rates = np.empty((len(initial), size))
    state = initial.copy()
    for index in range(size):
        x = index * frenet.dx
        values[:, index] = state
        rates[:, index] = _angle_rates(n, state, frenet.samples[:, index], x, settings)
        if index == size - 1:
            break

        for substep in range(substeps):
            base = 2 * (index * substeps + substep)
            t = x + substep * step

            def rhs(offset: int, angles: np.ndarray) -> np.ndarray:
                return _angle_rates(n, angles, fine[:, base + offset], t + offset * step / 2,
                                    settings)

            k1 = rates[:, index] if substep == 0 else rhs(0, state)
            k2 = rhs(1, state + step / 2 * k1)
            k3 = rhs(1, state + step / 2 * k2)
            k4 = rhs(2, state + step * k3)
            state = state + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    return values, rates


def _initial_angles(n: int, initial: Optional[Mapping[Pair, float]]) -> np.ndarray:
    pairs = angle_pairs(n)
    values = np.zeros(len(pairs))
    for pair, value in (initial or {}).items():
        if pair not in pairs:
            raise ValueError('no angle theta_%d%d for n = %d' % (pair + (n,)))

        values[pairs.index(pair)] = value

    return values


def natural_from_frenet(frenet: GridFunction, initial: Mapping[Pair, float] = None, *,
                        settings: Settings = DEFAULT_SETTINGS,
                        estimate_error: bool = True) -> Tuple[GridFunction, AngleField]:
    """
    Transform Frenet curvatures into natural curvatures.

    The angles are integrated from their values at ``x = 0`` with fixed step RK4 (``substeps``
    steps per grid interval); the natural curvatures follow from the Euler transformation
    ``u = u_F1 * (first row of T)``.

    :param frenet: the Frenet curvatures (``u_F1 > 0``)
    :param initial: angles at ``x = 0`` keyed by ``(i, j)`` (missing angles start at 0)
    :param settings: supplies ``substeps`` and the gimbal lock tolerance
    :param estimate_error: repeat the integration with half the step size and store the largest
        difference of the natural curvatures in :attr:`AngleField.error`
    :return: the natural curvatures and the angles
    :raises ~asphalt.integrable.api.PositivityLoss: if ``u_F1`` is not positive
    :raises ~asphalt.integrable.api.GimbalLock: if the chart of angles breaks down

    """
    n = frenet.components + 1
    _check_dimension(n)
    nonpositive = np.flatnonzero(frenet.samples[0] <= 0)
    if nonpositive.size:
        raise PositivityLoss(float(frenet.x[nonpositive[0]]))

    start = _initial_angles(n, initial)
    values, rates = _integrate_angles(frenet, start, settings.substeps, settings)
    natural = _natural(frenet, values)
    error = None
    if estimate_error:
        refined, _ = _integrate_angles(frenet, start, 2 * settings.substeps, settings)
        error = float(np.max(np.abs(_natural(frenet, refined).samples - natural.samples)))
        logger.debug('Hasimoto integration error estimate: %.3e', error)

    return natural, AngleField(n, values, frenet.length, rates, error)


def _natural(frenet: GridFunction, values: np.ndarray) -> GridFunction:
    n = frenet.components + 1
    rows = np.array([_gauge_and_jacobian(n, values[:, index])[0][0]
                     for index in range(frenet.size)])
    return GridFunction(frenet.samples[0] * rows.T, frenet.length)


def _first_tier(u: np.ndarray, du: np.ndarray, x: np.ndarray,
                settings: Settings) -> Tuple[np.ndarray, np.ndarray]:
    """Invert the Euler transformation: angles ``theta_2j`` and their rates."""
    m = u.shape[0]
    # radii[k] = |(u_1, ..., u_{k+2})|
    radii = [np.hypot(u[0], u[1])]
    for k in range(2, m):
        radii.append(np.hypot(radii[-1], u[k]))
        cosine = radii[-2] / radii[-1]
        weakest = int(np.argmin(cosine))
        if cosine[weakest] < settings.gimbal_tolerance:
            raise GimbalLock(2, k + 2, float(x[weakest]))

    values = np.empty((m - 1, u.shape[1]))
    rates = np.empty_like(values)
    values[0] = np.unwrap(np.arctan2(u[1], u[0]))
    jumps = np.abs(np.diff(values[0]))
    if jumps.size and jumps.max() > math.pi / 2:
        raise BranchJump(2, 3, float(x[int(np.argmax(jumps)) + 1]))

    rates[0] = (u[0] * du[1] - u[1] * du[0]) / radii[0] ** 2
    radius_rate = (u[0] * du[0] + u[1] * du[1]) / radii[0]
    for k in range(2, m):
        # theta_{2,k+2} = atan2(u_{k+1}, |u_1..u_k|)
        inner, outer = radii[k - 2], radii[k - 1]
        values[k - 1] = np.arctan2(u[k], inner)
        rates[k - 1] = (inner * du[k] - u[k] * radius_rate) / outer ** 2
        radius_rate = (inner * radius_rate + u[k] * du[k]) / outer

    return values, rates



def _rest_rates(n: int, values: np.ndarray, first_rates: np.ndarray, x: float,
                settings: Settings) -> Tuple[np.ndarray, np.ndarray]:
    """Solve the gauge identity for the rates of the angles ``theta_ij`` (``i >= 3``) and the
    Frenet curvatures ``u_F2, ..., u_F{n-1}``."""
    _check_gimbal(n, values, x, settings)
    m = n - 1
    first = m - 1
    gauge, jacobian = _gauge_and_jacobian(n, values)
    images = [_upper(derivative @ gauge.T) for derivative in jacobian]
    columns = images[first:]
    for k in range(m - 1):
        columns.append(-_upper(_frenet_block(m, np.eye(m - 1)[k])))

    rhs = -sum(image * rate for image, rate in zip(images[:first], first_rates))
    try:
        solution = np.linalg.solve(np.column_stack(columns), rhs)
    except np.linalg.LinAlgError:
        raise GimbalLock(*_weakest_pair(n, values), x) from None

    rest = len(columns) - (m - 1)
    return solution[:rest], solution[rest:]


def _first_index(n: int) -> List[int]:
    return [k for k, (i, _) in enumerate(angle_pairs(n)) if i == 2]


def angles_from_natural(u: GridFunction, initial: Mapping[Pair, float] = None, *,
                        settings: Settings = DEFAULT_SETTINGS) -> Tuple[AngleField, GridFunction]:
    """
    Recover the angles and the Frenet curvatures from natural curvatures.

    ``u_F1 = |u|`` and the angles ``theta_2j`` follow from the spherical coordinates of
    ``u / |u|``; the remaining angles are integrated from their values at ``x = 0`` while the
    gauge identity is solved for the higher Frenet curvatures.

    :param u: the natural curvatures
    :param initial: initial values of the angles ``theta_ij`` with ``i >= 3`` (default 0)
    :param settings: supplies ``substeps`` and the gimbal lock tolerance
    :return: the angles and the Frenet curvatures
    :raises ~asphalt.integrable.api.PositivityLoss: if ``u`` vanishes somewhere
    :raises ~asphalt.integrable.api.BranchJump: if ``theta_23`` cannot be followed continuously
    :raises ~asphalt.integrable.api.GimbalLock: if the chart of angles breaks down

    """
    n = u.components + 1
    _check_dimension(n)
    norm = np.sqrt(np.sum(u.samples ** 2, axis=0))
    weakest = int(np.argmin(norm))
    if norm[weakest] < settings.gimbal_tolerance:
        raise PositivityLoss(float(u.x[weakest]))

    substeps = settings.substeps
    factor = 2 * substeps
    fine_x = GridFunction.grid_points(u.size * factor, u.length)
    if initial and any(i == 2 for i, _ in initial):
        raise ValueError('the angles theta_2j are determined by the curvature vector')

    derivative = local_derivative(u.samples, u.dx)
    fine_values, fine_rates = _first_tier(local_interpolate(u.samples, factor),
                                          local_interpolate(derivative, factor), fine_x, settings)
    first = _first_index(n)
    pairs = angle_pairs(n)
    state = np.delete(_initial_angles(n, initial), first)
    values = np.empty((len(pairs), u.size))
    rates = np.empty_like(values)
    frenet = np.empty((n - 1, u.size))
    frenet[0] = norm
    step = u.dx / substeps

    def assemble(fine_index: int, rest: np.ndarray) -> np.ndarray:
        full = np.empty(len(pairs))
        full[first] = fine_values[:, fine_index]
        full[len(first):] = rest
        return full

    def rhs(fine_index: int, rest: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return _rest_rates(n, assemble(fine_index, rest), fine_rates[:, fine_index],
                           float(fine_x[fine_index]), settings)

    for index in range(u.size):
        base = index * factor
        rest_rate, higher = rhs(base, state)
        values[:, index] = assemble(base, state)
        rates[first, index] = fine_rates[:, base]
        rates[len(first):, index] = rest_rate
        frenet[1:, index] = higher
        if index == u.size - 1 or not len(state):
            continue

        for substep in range(substeps):
            origin = base + 2 * substep
            k1 = rest_rate if substep == 0 else rhs(origin, state)[0]
            k2 = rhs(origin + 1, state + step / 2 * k1)[0]
            k3 = rhs(origin + 1, state + step / 2 * k2)[0]
            k4 = rhs(origin + 2, state + step * k3)[0]
            state = state + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    logger.debug('recovered %d angles for n=%d on %d grid points', len(pairs), n, u.size)
    return AngleField(n, values, u.length, rates), GridFunction(frenet, u.length)


def gauge_residual(frenet: GridFunction, natural: GridFunction, angles: AngleField) -> float:
    """
    Return the sup norm over the grid of ``w_F R - Dx R - R w_N``.

    ``R`` is not periodic in general (it carries the holonomy of the normal bundle), so ``Dx R``
    is taken with high order finite differences instead of spectrally.
    """
    n = angles.n
    if frenet.components != n - 1 or natural.components != n - 1:
        raise ValueError('expected curvature data with %d components' % (n - 1))

    matrices = rotation_field(angles).matrices
    derivative = local_derivative(np.moveaxis(matrices, 0, -1), frenet.dx)
    derivative = np.moveaxis(derivative, -1, 0)
    residual = 0.0
    for index in range(angles.size):
        frenet_cartan = np.zeros((n, n))
        for k, value in enumerate(frenet.samples[:, index]):
            frenet_cartan[k, k + 1] = value
            frenet_cartan[k + 1, k] = -value

        natural_cartan = np.zeros((n, n))
        natural_cartan[0, 1:] = natural.samples[:, index]
        natural_cartan[1:, 0] = -natural.samples[:, index]
        rotation = matrices[index]
        defect = frenet_cartan @ rotation - derivative[index] - rotation @ natural_cartan
        residual = max(residual, float(np.max(np.abs(defect))))

    return residual


def chain_quantities(angles: AngleField) -> np.ndarray:
    """
    Return ``a_1, ..., a_{n-1}`` from ``a_1 = 0`` and
    ``a_i = Dx theta_{i,i+1} + sin(theta_{i-1,i+1}) a_{i-1}``.
    """
    if angles.rates is None:
        raise ValueError('the angle rates are not known')

    n = angles.n
    chain = np.zeros((n - 1, angles.size))
    for i in range(2, n):
        rate = angles.rates[angles.index(i, i + 1)]
        previous = np.sin(angles.angle(i - 1, i + 1)) if i >= 3 else 0.0
        chain[i - 1] = rate + previous * chain[i - 2]

    return chain


def frenet_from_chain(angles: AngleField) -> np.ndarray:
    """
    Return the higher Frenet curvatures predicted by the chain quantities.

    ``u_Fi = prod_{j=i+2..n} cos(theta_ij) / cos(theta_{i+1,j}) * a_i`` for ``i = 2..n-1``.
    """
    n = angles.n
    chain = chain_quantities(angles)
    result = np.empty((n - 2, angles.size))
    for i in range(2, n):
        factor = np.ones(angles.size)
        for j in range(i + 2, n + 1):
            factor = factor * np.cos(angles.angle(i, j)) / np.cos(angles.angle(i + 1, j))

        result[i - 2] = factor * chain[i - 1]

    return result


def chain_discrepancy(frenet: GridFunction, angles: AngleField) -> float:
    """Return the sup norm of the higher Frenet curvatures minus their chain predictions."""
    if frenet.components != angles.n - 1:
        raise ValueError('expected curvature data with %d components' % (angles.n - 1))

    difference = frenet_from_chain(angles) - frenet.samples[1:]
    return float(np.max(np.abs(difference), initial=0.0))


def hasimoto_n3(kappa: GridFunction, tau: GridFunction) -> GridFunction:
    """
    Return the complex curvature ``phi = kappa * exp(i int_0^x tau)``.

    :param kappa: the curvature of a space curve
    :param tau: its torsion
    :return: a complex grid function whose real and imaginary parts are the natural curvatures

    """
    if kappa.components != 1 or tau.components != 1:
        raise ValueError('curvature and torsion must be single component grid functions')

    mean = tau.mean()[0]
    periodic = (tau - mean).antiderivative('zero-mean').samples[0]
    angle = mean * tau.x + periodic - periodic[0]
    return GridFunction(kappa.samples[0] * np.exp(1j * angle), tau.length)
