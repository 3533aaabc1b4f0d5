"""
The operators of arc-length preserving curve flows in constant curvature spaces.

For the curvature vector ``u`` of a curve in an ``n`` dimensional space (``n - 1`` components):

* the symplectic operator ``I = Dx + u Dxi u^T``
* the cosymplectic operator ``H = Dx + sum_{i<j} J_ij u Dxi (J_ij u)^T``
* the hereditary recursion operator ``R = H I``, which generates the vector mKdV hierarchy

``J_ij`` runs over the standard basis ``e_i e_j^T - e_j e_i^T`` of skew matrices acting on the
curvature vector. The sums over ``J_ij`` are either expanded generator by generator (``'J'``) or
through the identity ``sum_{i<j} (J_ij a)(J_ij b)^T = <a, b> Id - b a^T`` (``'JR'``); both give
the same normal form.
"""
import logging
from fractions import Fraction
from numbers import Rational
from typing import List, Union

from asphalt.integrable.api import DEFAULT_SETTINGS, NonlocalHierarchyMember, Settings
from asphalt.integrable.diffpoly.calculus import antiderivative, frechet_derivative
from asphalt.integrable.diffpoly.expressions import (
    Expression, VectorExpression, curvature_vector, total_derivative)
from asphalt.integrable.diffpoly.jets import Jet
from asphalt.integrable.operators.weakly_nonlocal import Tail, WeaklyNonlocalOperator

__all__ = ('FORMS', 'skew_generators', 'symplectic_I', 'cosymplectic_H', 'recursion_R',
           'composed_form', 'skew_matrix_J12', 'nls_square', 'nls_square_identity',
           'hierarchy', 'lie_bracket', 'FlowSpec')

logger = logging.getLogger(__name__)

#: Ways of expanding the sums over the skew generators
FORMS = ('JR', 'J')


def _check_dimension(n: int) -> None:
    if n < 2:
        raise ValueError('the ambient dimension must be at least 2')


def _check_form(form: str) -> None:
    if form not in FORMS:
        raise ValueError('unknown form "%s" (must be one of: %s)' % (form, ', '.join(FORMS)))


def _identity(size: int, order: int, coefficient=1) -> dict:
    return {(k, k): {order: coefficient} for k in range(size)}


def skew_generators(size: int, vector: VectorExpression) -> List[VectorExpression]:
    """Return ``J_ij v`` for ``1 <= i < j <= size`` in lexicographic order."""
    images = []
    for i in range(size):
        for j in range(i + 1, size):
            components = [Expression()] * size
            components[i] = vector[j]
            components[j] = -vector[i]
            images.append(VectorExpression(components))

    return images


def _skew_sum(operator: WeaklyNonlocalOperator, a: VectorExpression, b: VectorExpression,
              sign: int, form: str) -> None:
    """Add ``sign * sum_{i<j} J_ij a Dxi (J_ij b)^T`` to the kernel of ``operator``."""
    size = operator.size
    if form == 'J':
        for left, right in zip(skew_generators(size, a), skew_generators(size, b)):
            for row in range(size):
                for column in range(size):
                    operator._add_tail_expression(row, left[row] * sign, column, right[column])
    else:
        # <a, b> Id - b a^T with a to the left of Dxi
        for k in range(size):
            for l in range(size):
                operator._add_tail_expression(k, a[l] * sign, k, b[l])
                operator._add_tail_expression(k, a[l] * -sign, l, b[k])


def symplectic_I(n: int) -> WeaklyNonlocalOperator:
    """Return ``Dx + u Dxi u^T``."""
    _check_dimension(n)
    u = curvature_vector(n)
    return WeaklyNonlocalOperator(n, _identity(n - 1, 1), [Tail(u, u, 1)], name='I')


def cosymplectic_H(n: int, form: str = 'JR') -> WeaklyNonlocalOperator:
    """
    Return the Hamiltonian operator ``Dx + sum_{i<j} J_ij u Dxi (J_ij u)^T``.

    Componentwise ``(H P)_k = P_k' + sum_l u_l Dxi(P_k u_l - u_k P_l)``.

    :param n: ambient dimension
    :param form: ``'JR'`` or ``'J'``

    """
    _check_dimension(n)
    _check_form(form)
    u = curvature_vector(n)
    operator = WeaklyNonlocalOperator(n, _identity(n - 1, 1), name='H')
    _skew_sum(operator, u, u, 1, form)
    return operator


def recursion_R(n: int, form: str = 'JR', *, drop_square: bool = False) -> WeaklyNonlocalOperator:
    """
    Return the recursion operator.

    ``R = Dx^2 + <u, u> + u_1 Dxi u^T - sum_{i<j} J_ij u Dxi (J_ij u_1)^T``

    :param n: ambient dimension
    :param form: ``'JR'`` or ``'J'``
    :param drop_square: leave out the ``<u, u>`` term (a deliberately broken operator used as
        a negative control)

    """
    _check_dimension(n)
    _check_form(form)
    u = curvature_vector(n)
    u1 = curvature_vector(n, 1)
    local = _identity(n - 1, 2)
    if not drop_square:
        for k in range(n - 1):
            local[(k, k)][0] = u.dot(u)

    operator = WeaklyNonlocalOperator(n, local, name='R' if not drop_square else 'R-defective')
    for row in range(n - 1):
        for column in range(n - 1):
            operator._add_tail_expression(row, u1[row], column, u[column])

    _skew_sum(operator, u, u1, -1, form)
    return operator


def composed_form(n: int, form: str = 'JR') -> WeaklyNonlocalOperator:
    """Return the normal form of ``H o I``."""
    return cosymplectic_H(n, form).compose(symplectic_I(n))


def skew_matrix_J12(n: int = 3) -> WeaklyNonlocalOperator:
    """Return the constant skew matrix ``J_12`` as a multiplication operator."""
    _check_dimension(n)
    if n != 3:
        raise ValueError('J_12 is the complex structure of a two component curvature vector '
                         '(n = 3)')

    return WeaklyNonlocalOperator(n, {(0, 1): {0: 1}, (1, 0): {0: -1}}, name='J12')


def nls_square(n: int = 3) -> WeaklyNonlocalOperator:
    """Return ``-(J_12 I)^2``, the square of the nonlinear Schroedinger recursion operator."""
    factor = skew_matrix_J12(n).compose(symplectic_I(n))
    return -factor.compose(factor)


def nls_square_identity(n: int = 3) -> bool:
    """Return ``True`` if ``R`` equals ``-(J_12 I)^2`` as a normal form."""
    identical = nls_square(n) == recursion_R(n)
    logger.debug('NLS square identity for n=%d: %s', n, identical)
    return identical


def hierarchy(n: int, steps: int, *,
              settings: Settings = DEFAULT_SETTINGS) -> List[VectorExpression]:
    """
    Generate the vector mKdV hierarchy ``S_0 = u_1``, ``S_{k+1} = R S_k``.

    :param n: ambient dimension
    :param steps: number of applications of the recursion operator
    :return: ``[S_0, ..., S_steps]``
    :raises ~asphalt.integrable.api.NonlocalHierarchyMember: if a member keeps ``Dxi`` atoms

    """
    _check_dimension(n)
    if steps < 0:
        raise ValueError('the number of steps cannot be negative')

    operator = recursion_R(n)
    members = [curvature_vector(n, 1)]
    for index in range(1, steps + 1):
        member = operator.apply(members[-1], settings.max_order)
        if not member.is_local:
            raise NonlocalHierarchyMember(index, member)

        logger.debug('hierarchy member S_%d has %d terms', index,
                     sum(len(component) for component in member))
        members.append(member)

    return members


def _linearize(expression: Expression, direction: VectorExpression,
               max_order: int) -> Expression:
    def replace(jet: Jet) -> Expression:
        if jet.family != 'P':
            return Expression(jet.symbol)

        image = direction[jet.component - 1]
        for _ in range(jet.order):
            image = total_derivative(image, max_order)

        return image

    return frechet_derivative(expression, 'P', 'u').substitute(replace)


def lie_bracket(first: VectorExpression, second: VectorExpression, *,
                max_order: int = None) -> VectorExpression:
    """
    Return the commutator ``K'[L] - L'[K]`` of two evolutionary vector fields.

    Commuting flows of the hierarchy give zero.
    """
    if len(first) != len(second):
        raise ValueError('vector lengths differ (%d != %d)' % (len(first), len(second)))

    max_order = DEFAULT_SETTINGS.max_order if max_order is None else max_order
    return VectorExpression(
        _linearize(a, second, max_order) - _linearize(b, first, max_order)
        for a, b in zip(first, second))


class FlowSpec:
    """
    An arc-length preserving flow ``u_t = R h - kappa_c h``.

    :param h: the normal velocity coefficients ``(h_2, ..., h_n)``
    :param kappa_c: sectional curvature of the ambient space
    """

    __slots__ = 'h', 'kappa_c'

    def __init__(self, h: VectorExpression, kappa_c: Union[Rational, Fraction] = 0):
        self.h = h
        self.kappa_c = Fraction(kappa_c)

    @property
    def n(self) -> int:
        return len(self.h) + 1

    @property
    def tangential(self) -> Expression:
        """The tangential coefficient ``h_1 = Dxi <u, h>`` (kept as an atom if not local)."""
        return antiderivative(curvature_vector(self.n).dot(self.h))

    def velocity(self) -> VectorExpression:
        return recursion_R(self.n).apply(self.h) - self.h.scale(self.kappa_c)

    def normal_frame_velocity(self) -> VectorExpression:
        """Return ``I h``: the time derivative of the tangent vector in the natural frame."""
        return symplectic_I(self.n).apply(self.h)

    def __repr__(self):
        return '<FlowSpec (n=%d, kappa_c=%s)>' % (self.n, self.kappa_c)
