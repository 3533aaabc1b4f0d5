"""
The ``so(n+1)`` valued Lax pair of the vector mKdV flow.

Matrices act on ``R^(n+1)`` with the basis index ``0`` for the extra direction followed by the
natural frame indices ``1..n``. The generators are ``A_ab = E_ab - E_ba`` and the spatial part of
the pair is ``L = L01 + lambda * L10`` with ``L10 = A_01`` and ``L01 = sum_k u_k A_1,k+1``.
The temporal part is the cubic polynomial ``M = M3 + lambda M2 + lambda^2 M1 + lambda^3 M0``.
The zero curvature condition ``Dx M - Dt L + [L, M] = 0`` holds identically in ``lambda``
exactly when ``u`` solves ``u_t = u_xxx + (nu + 3/2 |u|^2) u_x``.
"""
import logging
from fractions import Fraction
from numbers import Rational, Real
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from asphalt.integrable.api import (
    DEFAULT_SETTINGS, InsufficientSnapshots, Settings, VerificationReport)
from asphalt.integrable.diffpoly.expressions import (
    Expression, VectorExpression, curvature_vector, total_derivative)
from asphalt.integrable.diffpoly.grid import GridEvaluator, GridFunction
from asphalt.integrable.flows import FlowTrajectory

__all__ = ('GRADINGS', 'block_grading', 'SoMatrix', 'LaxPolynomial', 'embed_phi',
           'natural_cartan_pair', 'lax_L', 'build_M', 'vmkdv_velocity',
           'zero_curvature_coefficients', 'lambda_identities', 'killing_form', 'killing_check',
           'flow_coefficient', 'zero_curvature_residual')

logger = logging.getLogger(__name__)

#: Tags of the double block grading: (index 0 vs 1..n, indices {0, 1} vs {2..n})
GRADINGS = ('00', '01', '10', '11')

MatrixIndex = Tuple[int, int]


def block_grading(row: int, column: int) -> str:
    """Return the grading tag of the generator ``A_row,column``."""
    first = (row == 0) != (column == 0)
    second = (row < 2) != (column < 2)
    return '%d%d' % (first, second)


class SoMatrix:
    """
    A skew-symmetric matrix whose entries are differential polynomials.

    Only the strictly upper triangle is stored. An entry given at ``(row, column)`` with
    ``row > column`` is stored as the negated entry at ``(column, row)``.

    :param size: the matrix size ``n + 1``
    :param entries: mapping of matrix indices to expressions or rational numbers
    """

    __slots__ = 'size', 'entries'

    def __init__(self, size: int, entries: Mapping[MatrixIndex, object] = None):
        if size < 3:
            raise ValueError('so(n+1) matrices need n >= 2')

        self.size = size
        self.entries: Dict[MatrixIndex, Expression] = {}
        for (row, column), value in (entries or {}).items():
            if not (0 <= row < size and 0 <= column < size):
                raise ValueError('matrix index (%d, %d) is out of range' % (row, column))

            value = Expression.coerce(value)
            if row == column:
                if value:
                    raise ValueError('diagonal entries of a skew-symmetric matrix must vanish')
                continue

            if row > column:
                row, column, value = column, row, -value

            total = self.entries.get((row, column), Expression()) + value
            if total:
                self.entries[(row, column)] = total
            else:
                self.entries.pop((row, column), None)

    @classmethod
    def generator(cls, size: int, row: int, column: int, coefficient=1) -> 'SoMatrix':
        """Return ``coefficient * A_row,column``."""
        return cls(size, {(row, column): coefficient})

    @classmethod
    def zero(cls, size: int) -> 'SoMatrix':
        return cls(size)

    @property
    def n(self) -> int:
        return self.size - 1

    @property
    def is_zero(self) -> bool:
        return not self.entries

    def __getitem__(self, index: MatrixIndex) -> Expression:
        row, column = index
        if row < column:
            return self.entries.get((row, column), Expression())
        elif row > column:
            return -self.entries.get((column, row), Expression())
        else:
            return Expression()

    def rows(self) -> List[List[Expression]]:
        return [[self[row, column] for column in range(self.size)] for row in range(self.size)]

    def _check_size(self, other: 'SoMatrix') -> None:
        if not isinstance(other, SoMatrix):
            raise TypeError('expected a SoMatrix, got %s' % type(other).__name__)
        if other.size != self.size:
            raise ValueError('matrix sizes differ (%d != %d)' % (self.size, other.size))

    def __add__(self, other: 'SoMatrix') -> 'SoMatrix':
        self._check_size(other)
        entries = dict(self.entries)
        for index, value in other.entries.items():
            entries[index] = entries.get(index, Expression()) + value

        return SoMatrix(self.size, entries)

    def __neg__(self) -> 'SoMatrix':
        return SoMatrix(self.size, {index: -value for index, value in self.entries.items()})

    def __sub__(self, other: 'SoMatrix') -> 'SoMatrix':
        return self + (-other)

    def scale(self, factor) -> 'SoMatrix':
        factor = Expression.coerce(factor)
        return SoMatrix(self.size, {index: factor * value
                                    for index, value in self.entries.items()})

    def bracket(self, other: 'SoMatrix') -> 'SoMatrix':
        """Return the commutator ``[self, other] = self * other - other * self``."""
        self._check_size(other)
        first, second = self.rows(), other.rows()
        entries = {}
        for row in range(self.size):
            for column in range(row + 1, self.size):
                value = Expression()
                for middle in range(self.size):
                    if first[row][middle] and second[middle][column]:
                        value = value + first[row][middle] * second[middle][column]
                    if second[row][middle] and first[middle][column]:
                        value = value - second[row][middle] * first[middle][column]

                entries[(row, column)] = value

        return SoMatrix(self.size, entries)

    def derivative(self, max_order: int = None) -> 'SoMatrix':
        return SoMatrix(self.size, {index: total_derivative(value, max_order)
                                    for index, value in self.entries.items()})

    def trace_product(self, other: 'SoMatrix') -> Expression:
        """Return ``tr(self * other)``."""
        self._check_size(other)
        result = Expression()
        for index, value in self.entries.items():
            if index in other.entries:
                result = result - value * other.entries[index] * 2

        return result

    def gradings(self) -> Set[str]:
        """Return the grading tags of the nonzero entries."""
        return {block_grading(row, column) for row, column in self.entries}

    def graded_part(self, tag: str) -> 'SoMatrix':
        if tag not in GRADINGS:
            raise ValueError('unknown grading "%s"' % tag)

        return SoMatrix(self.size, {(row, column): value
                                    for (row, column), value in self.entries.items()
                                    if block_grading(row, column) == tag})

    def evaluate(self, evaluator: GridEvaluator) -> np.ndarray:
        """Return the matrix values at every grid point as an array of shape ``(N, n+1, n+1)``."""
        values = np.zeros((evaluator.template.size, self.size, self.size))
        for (row, column), value in self.entries.items():
            samples = evaluator.expression(value)
            values[:, row, column] = samples
            values[:, column, row] = -samples

        return values

    def __eq__(self, other):
        if not isinstance(other, SoMatrix):
            return NotImplemented

        return self.size == other.size and self.entries == other.entries

    def __hash__(self):
        return hash((self.size, frozenset(self.entries.items())))

    def __str__(self):
        if not self.entries:
            return '0'

        return '\n'.join('[%d,%d] %s' % (row, column, value)
                         for (row, column), value in sorted(self.entries.items()))

    def __repr__(self):
        return '<%s size=%d entries=%d>' % (self.__class__.__name__, self.size, len(self.entries))


class LaxPolynomial:
    """
    A polynomial in the spectral parameter with :class:`SoMatrix` coefficients.

    :param coefficients: the coefficients in increasing powers of ``lambda``
    """

    __slots__ = 'coefficients'

    def __init__(self, coefficients: Iterable[SoMatrix]):
        self.coefficients = tuple(coefficients)
        if not self.coefficients:
            raise ValueError('a Lax polynomial needs at least one coefficient')
        if len({matrix.size for matrix in self.coefficients}) != 1:
            raise ValueError('all coefficients must have the same size')

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def size(self) -> int:
        return self.coefficients[0].size

    @property
    def n(self) -> int:
        return self.size - 1

    def __getitem__(self, power: int) -> SoMatrix:
        if 0 <= power < len(self.coefficients):
            return self.coefficients[power]

        return SoMatrix.zero(self.size)

    def at(self, spectral: Rational) -> SoMatrix:
        """Return the exact value of the polynomial at a rational spectral parameter."""
        result = SoMatrix.zero(self.size)
        for power, matrix in enumerate(self.coefficients):
            result = result + matrix.scale(Fraction(spectral) ** power)

        return result

    def __repr__(self):
        return '<%s degree=%d size=%d>' % (self.__class__.__name__, self.degree, self.size)


def embed_phi(vector: Sequence, block: Sequence[Sequence]) -> SoMatrix:
    """
    Embed a vector ``v`` and a skew block ``omega`` into ``so(n+1)``.

    The result has ``v`` in the first row, ``-v`` in the first column and ``omega`` in the
    lower right ``n x n`` block.
    """
    n = len(vector)
    if len(block) != n or any(len(row) != n for row in block):
        raise ValueError('the block must be %d x %d' % (n, n))

    entries = {(0, index + 1): value for index, value in enumerate(vector)}
    for i in range(n):
        for j in range(i, n):
            upper, lower = Expression.coerce(block[i][j]), Expression.coerce(block[j][i])
            if upper != -lower:
                raise ValueError('the block must be skew-symmetric')
            if i < j:
                entries[(i + 1, j + 1)] = upper

    return SoMatrix(n + 1, entries)


def _curvature_block(vector: VectorExpression) -> List[List[Expression]]:
    n = len(vector) + 1
    block = [[Expression() for _ in range(n)] for _ in range(n)]
    for k in range(1, n):
        block[0][k] = vector[k - 1]
        block[k][0] = -vector[k - 1]

    return block


def natural_cartan_pair(n: int) -> Tuple[List[Expression], List[List[Expression]]]:
    """Return the tangent vector ``e1`` and the natural frame block built from ``u``."""
    tangent = [Expression.constant(1)] + [Expression()] * (n - 1)
    return tangent, _curvature_block(curvature_vector(n))


def lax_L(n: int) -> LaxPolynomial:
    """Return ``L = L01 + lambda L10`` for the ambient dimension ``n``."""
    tangent, block = natural_cartan_pair(n)
    zero_vector = [Expression()] * n
    zero_block = [[Expression()] * n for _ in range(n)]
    return LaxPolynomial([embed_phi(zero_vector, block), embed_phi(tangent, zero_block)])


def build_M(n: int, nu: Rational = 0) -> LaxPolynomial:
    """
    Return the temporal part of the Lax pair.

    The coefficients are ``M0 = -L10``, ``M1 = -L01``, ``M2 = -[L10, Dx L01] + beta L10`` and
    ``M3 = Dx^2 L01 + beta L01 - [L01, Dx L01]`` with ``beta = nu + |u|^2 / 2``.
    """
    L = lax_L(n)
    l01, l10 = L[0], L[1]
    u = curvature_vector(n)
    beta = u.dot(u) * Fraction(1, 2) + Fraction(nu)
    first = l01.derivative()
    m0 = -l10
    m1 = -l01
    m2 = l10.scale(beta) - l10.bracket(first)
    m3 = first.derivative() + l01.scale(beta) - l01.bracket(first)
    return LaxPolynomial([m3, m2, m1, m0])


def vmkdv_velocity(n: int, nu: Rational = 0) -> VectorExpression:
    """Return the right hand side ``u_xxx + (nu + 3/2 |u|^2) u_x`` of the vector mKdV flow."""
    u = curvature_vector(n)
    first = u.derivative()
    coefficient = u.dot(u) * Fraction(3, 2) + Fraction(nu)
    return first.derivative().derivative() + first.scale(coefficient)


def zero_curvature_coefficients(L: LaxPolynomial, M: LaxPolynomial) -> List[SoMatrix]:
    """
    Return the coefficients of ``Dx M + [L, M]`` in increasing powers of ``lambda``.

    The time derivative of ``L`` is not included.
    """
    if L.size != M.size:
        raise ValueError('matrix sizes differ (%d != %d)' % (L.size, M.size))

    coefficients = []
    for power in range(L.degree + M.degree + 1):
        value = M[power].derivative()
        for first in range(max(0, power - M.degree), min(power, L.degree) + 1):
            value = value + L[first].bracket(M[power - first])

        coefficients.append(value)

    return coefficients


def lambda_identities(n: int, nu: Rational = 0, M: Optional[LaxPolynomial] = None
                      ) -> VerificationReport:
    """
    Verify the zero curvature condition order by order in the spectral parameter.

    The report details hold the outcome for every power of ``lambda`` (highest first), the
    bilinear operator identities for ``ad(L01) ad(Dx L01)`` and, on failure, the first failing
    power together with its residual matrix.

    :param n: the ambient dimension
    :param nu: the constant shift of the flow
    :param M: an alternative temporal part (defaults to :func:`build_M`)
    """
    L = lax_L(n)
    M = M or build_M(n, nu)
    coefficients = zero_curvature_coefficients(L, M)
    velocity = vmkdv_velocity(n, nu)
    coefficients[0] = coefficients[0] - embed_phi(
        [Expression()] * n, _curvature_block(velocity))

    orders = {}
    failed = residual = None
    for power in reversed(range(len(coefficients))):
        passed = coefficients[power].is_zero
        orders['lambda^%d' % power] = passed
        if not passed and failed is None:
            failed, residual = power, coefficients[power]

    # ad(L01) ad(Dx L01) acting on L01 and L10
    l01, l10 = L[0], L[1]
    first = l01.derivative()
    u = curvature_vector(n)
    square, mixed = u.dot(u), u.dot(u.derivative())
    bilinear = (l01.bracket(first.bracket(l01)) == first.scale(square) - l01.scale(mixed)
                and l01.bracket(first.bracket(l10)) == l10.scale(-mixed))

    details = {'orders': orders, 'bilinear': bilinear, 'nu': str(Fraction(nu))}
    if failed is not None:
        details['failed'] = 'lambda^%d' % failed
        details['residual'] = str(residual)
        logger.info('zero curvature condition fails at lambda^%d for n = %d', failed, n)

    return VerificationReport('lambda', n, verdict=failed is None and bilinear, details=details)


def killing_form(first: SoMatrix, second: SoMatrix) -> Expression:
    """Return the Killing form ``(n - 2) tr(XY)`` of ``so(n+1)``."""
    return first.trace_product(second) * (first.n - 2)


def killing_check(n: int) -> bool:
    """Check that ``K(L01, L01) = -2 (n - 2) |u|^2``."""
    if n <= 2:
        raise ValueError('the Killing form identity needs n > 2')

    l01 = lax_L(n)[0]
    u = curvature_vector(n)
    return killing_form(l01, l01) == u.dot(u) * (-2 * (n - 2))


def flow_coefficient(n: int, nu: Rational = 0) -> Expression:
    """Return the coefficient of ``u_x`` in the flow written with the Killing form."""
    if n <= 2:
        raise ValueError('the Killing form identity needs n > 2')

    l01 = lax_L(n)[0]
    return Fraction(nu) - killing_form(l01, l01) * Fraction(3, 4 * (n - 2))


def zero_curvature_residual(trajectory: FlowTrajectory,
                            spectral: Sequence[Real] = (0.5, 1.0, 2.0), nu: Real = 0.0, *,
                            settings: Settings = DEFAULT_SETTINGS) -> List[Dict[str, float]]:
    """
    Measure the zero curvature residual along a computed trajectory.

    The time derivative of ``L`` is taken with fourth order central differences, so rows are only
    produced for the snapshots that have two neighbours on either side. The trajectory's constant
    curvature shift is accounted for by the term ``kappa_c Dx L01``.

    :return: one row ``{n, lambda, t, residual}`` per interior snapshot and spectral value, with
        the maximum absolute entry of the residual matrix
    :raises InsufficientSnapshots: if the trajectory has fewer than 5 snapshots
    """
    count = len(trajectory.snapshots)
    if count < 5:
        raise InsufficientSnapshots(count)

    n = trajectory.n
    L = lax_L(n)
    M = build_M(n)
    derivatives = [matrix.derivative() for matrix in M.coefficients]
    first = L[0].derivative()
    dt = float(trajectory.times[1] - trajectory.times[0])

    def evaluator(u: GridFunction) -> GridEvaluator:
        return GridEvaluator({'u': u}, settings=settings)

    l01 = [L[0].evaluate(evaluator(u)) for u in trajectory.snapshots]
    rows = []
    for index in range(2, count - 2):
        grid = evaluator(trajectory.snapshots[index])
        values = [matrix.evaluate(grid) for matrix in M.coefficients]
        slopes = [matrix.evaluate(grid) for matrix in derivatives]
        l10 = L[1].evaluate(grid)
        slope01 = first.evaluate(grid)
        values[0] = values[0] + nu * l01[index]
        values[1] = values[1] + nu * l10
        slopes[0] = slopes[0] + nu * slope01
        time_derivative = (l01[index - 2] - 8 * l01[index - 1] + 8 * l01[index + 1]
                           - l01[index + 2]) / (12 * dt)
        for value in spectral:
            lax = l01[index] + value * l10
            temporal = sum(value ** power * matrix for power, matrix in enumerate(values))
            slope = sum(value ** power * matrix for power, matrix in enumerate(slopes))
            commutator = lax @ temporal - temporal @ lax
            residual = (slope - time_derivative + commutator
                        - trajectory.kappa_c * slope01)
            rows.append({'n': n, 'lambda': float(value), 't': float(trajectory.times[index]),
                         'residual': float(np.abs(residual).max())})

    logger.debug('zero curvature residual for n = %d: %.3e', n,
                 max(row['residual'] for row in rows))
    return rows
