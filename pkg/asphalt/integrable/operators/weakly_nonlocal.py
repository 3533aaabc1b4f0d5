"""
Matrix differential operators with finitely many ``Dxi`` tails.

An operator acting on vectors of ``m = n - 1`` components is stored in a normal form:

* the local part maps each matrix entry ``(row, column)`` to ``{order: coefficient}`` and means
  ``sum_j coefficient_j Dx^j``
* the nonlocal part is a kernel mapping ``(row, left monomial, column, right monomial)`` to a
  rational number ``k`` and means ``k * left Dxi(right * v[column])`` added to ``row``

Tails are always kept in the form ``a Dxi b`` with no derivatives to the right of ``Dxi`` (they
are integrated by parts away), which makes the normal form unique so operator identities are
decided by comparing dictionaries.
"""
from fractions import Fraction
from math import comb
from numbers import Rational
from typing import Dict, Iterable, List, Mapping, Tuple, Union

import numpy as np

from asphalt.integrable.api import DEFAULT_SETTINGS, NonlocalDepthError, Settings
from asphalt.integrable.diffpoly.calculus import antiderivative, formal_integrate
from asphalt.integrable.diffpoly.expressions import (
    Expression, Monomial, VectorExpression, format_monomial, monomial_key, total_derivative)
from asphalt.integrable.diffpoly.grid import GridEvaluator, GridFunction

__all__ = ('Tail', 'WeaklyNonlocalOperator', 'OperatorChain')

LocalPart = Dict[Tuple[int, int], Dict[int, Expression]]
KernelKey = Tuple[int, Monomial, int, Monomial]


def _dx(expression: Expression, times: int, max_order: int) -> Expression:
    for _ in range(times):
        expression = total_derivative(expression, max_order)

    return expression


def _monomial(monomial: Monomial) -> Expression:
    return Expression(monomial)


class Tail:
    """
    The nonlocal term ``sign * left Dxi <right, .>``.

    :param left: vector multiplying the antiderivative
    :param right: vector paired with the argument
    :param sign: ``1`` or ``-1``
    """

    __slots__ = 'left', 'right', 'sign'

    def __init__(self, left: VectorExpression, right: VectorExpression, sign: int = 1):
        if len(left) != len(right):
            raise ValueError('vector lengths differ (%d != %d)' % (len(left), len(right)))
        if sign not in (1, -1):
            raise ValueError('sign must be 1 or -1')

        self.left = left
        self.right = right
        self.sign = sign

    def __eq__(self, other):
        return (isinstance(other, Tail) and self.left == other.left and
                self.right == other.right and self.sign == other.sign)

    def __repr__(self):
        return 'Tail(%r, %r, %d)' % (self.left, self.right, self.sign)


class WeaklyNonlocalOperator:
    """
    A weakly nonlocal matrix differential operator for an ambient dimension ``n``.

    :param n: ambient dimension (the operator acts on vectors of ``n - 1`` components)
    :param local: mapping of ``(row, column)`` (0-based) to ``{order: coefficient}``
    :param tails: nonlocal terms
    :param name: display name
    """

    __slots__ = 'n', 'local', 'kernel', '_tails', 'name'

    def __init__(self, n: int, local: Mapping[Tuple[int, int], Mapping[int, object]] = None,
                 tails: Iterable[Tail] = (), *, name: str = None,
                 kernel: Mapping[KernelKey, Fraction] = None):
        if n < 2:
            raise ValueError('the ambient dimension must be at least 2')

        self.n = n
        self.name = name
        self.local: LocalPart = {}
        for (row, column), orders in (local or {}).items():
            self._check_index(row, column)
            for order, coefficient in orders.items():
                self._add_local(row, column, order, Expression.coerce(coefficient))

        self._tails = tuple(tails) or None
        self.kernel: Dict[KernelKey, Fraction] = {}
        for tail in self._tails or ():
            if len(tail.left) != self.size:
                raise ValueError('tail vectors must have %d components' % self.size)

            for row, left in enumerate(tail.left):
                for left_monomial, left_coefficient in left.terms.items():
                    for column, right in enumerate(tail.right):
                        for right_monomial, right_coefficient in right.terms.items():
                            self._add_kernel((row, left_monomial, column, right_monomial),
                                             tail.sign * left_coefficient * right_coefficient)

        for key, coefficient in (kernel or {}).items():
            self._add_kernel(key, coefficient)

    @property
    def size(self) -> int:
        return self.n - 1

    def _check_index(self, row: int, column: int) -> None:
        if not (0 <= row < self.size and 0 <= column < self.size):
            raise ValueError('matrix index (%d, %d) is out of range' % (row, column))

    def _add_local(self, row: int, column: int, order: int, coefficient: Expression) -> None:
        if coefficient.is_zero:
            return
        if not coefficient.is_local:
            raise ValueError('operator coefficients must be local')

        entry = self.local.setdefault((row, column), {})
        total = entry.get(order, Expression()) + coefficient
        if total.is_zero:
            entry.pop(order, None)
            if not entry:
                del self.local[(row, column)]
        else:
            entry[order] = total

    def _add_kernel(self, key: KernelKey, coefficient) -> None:
        total = self.kernel.get(key, 0) + coefficient
        if total:
            self.kernel[key] = Fraction(total)
        else:
            self.kernel.pop(key, None)

    def _add_tail_expression(self, row: int, left: Expression, column: int,
                             right: Expression) -> None:
        for left_monomial, left_coefficient in left.terms.items():
            for right_monomial, right_coefficient in right.terms.items():
                self._add_kernel((row, left_monomial, column, right_monomial),
                                 left_coefficient * right_coefficient)

    def _empty(self, name: str = None) -> 'WeaklyNonlocalOperator':
        return WeaklyNonlocalOperator(self.n, name=name)

    @property
    def tails(self) -> Tuple[Tail, ...]:
        """
        The nonlocal terms.

        Operators built from tails report them as given; derived operators group their kernel
        by the paired vector.
        """
        if self._tails is not None:
            return self._tails

        grouped: Dict[Tuple[int, Monomial], List[Expression]] = {}
        for (row, left_monomial, column, right_monomial), coefficient in self.kernel.items():
            left = grouped.setdefault((column, right_monomial),
                                      [Expression() for _ in range(self.size)])
            left[row] = left[row] + Expression.from_terms({left_monomial: coefficient})

        tails = []
        for (column, right_monomial), left in sorted(
                grouped.items(), key=lambda item: (item[0][0], monomial_key(item[0][1]))):
            right = VectorExpression.unit(self.size, column, _monomial(right_monomial))
            tails.append(Tail(VectorExpression(left), right))

        return tuple(tails)

    @property
    def is_local(self) -> bool:
        return not self.kernel

    # Algebra

    def __add__(self, other: 'WeaklyNonlocalOperator') -> 'WeaklyNonlocalOperator':
        self._check_compatible(other)
        result = self._empty()
        for operator in (self, other):
            for (row, column), orders in operator.local.items():
                for order, coefficient in orders.items():
                    result._add_local(row, column, order, coefficient)
            for key, coefficient in operator.kernel.items():
                result._add_kernel(key, coefficient)

        return result

    def __neg__(self) -> 'WeaklyNonlocalOperator':
        return self.scale(-1)

    def __sub__(self, other: 'WeaklyNonlocalOperator') -> 'WeaklyNonlocalOperator':
        return self + (-other)

    def scale(self, factor: Union[Rational, Fraction]) -> 'WeaklyNonlocalOperator':
        result = self._empty()
        for (row, column), orders in self.local.items():
            for order, coefficient in orders.items():
                result._add_local(row, column, order, coefficient * factor)
        for key, coefficient in self.kernel.items():
            result._add_kernel(key, coefficient * factor)

        return result

    def _check_compatible(self, other: 'WeaklyNonlocalOperator') -> None:
        if other.n != self.n:
            raise ValueError('operators act on different dimensions (%d != %d)' %
                             (self.n, other.n))

    def compose(self, other: 'WeaklyNonlocalOperator',
                max_order: int = None) -> 'WeaklyNonlocalOperator':
        """
        Return the composition ``self o other`` in normal form.

        Products of two tails ``a Dxi b^T c Dxi d^T`` are only representable when ``b^T c`` is a
        total derivative ``Dx(F)``, giving ``a F Dxi d^T - a Dxi (F d)^T``.

        :raises ~asphalt.integrable.api.NonlocalDepthError: if a product of tails would need
            nested ``Dxi``

        """
        self._check_compatible(other)
        max_order = DEFAULT_SETTINGS.max_order if max_order is None else max_order
        result = self._empty()

        # local o local: a Dx^i b Dx^k = sum_p C(i, p) a Dx^(i-p)(b) Dx^(p+k)
        for (row, middle), outer in self.local.items():
            for (inner_row, column), inner in other.local.items():
                if inner_row != middle:
                    continue

                for i, a in outer.items():
                    for k, b in inner.items():
                        for p in range(i + 1):
                            result._add_local(row, column, p + k,
                                              a * _dx(b, i - p, max_order) * comb(i, p))

        # local o tail: Dx^i (alpha Dxi beta) = Dx^i(alpha) Dxi beta
        #                                     + sum_{p>=1} C(i, p) Dx^(i-p)(alpha) Dx^(p-1) beta
        for (row, middle), outer in self.local.items():
            for (inner_row, left_monomial, column, right_monomial), coefficient in \
                    other.kernel.items():
                if inner_row != middle:
                    continue

                alpha = Expression.from_terms({left_monomial: coefficient})
                beta = _monomial(right_monomial)
                for i, a in outer.items():
                    result._add_tail_expression(row, a * _dx(alpha, i, max_order), column, beta)
                    for p in range(1, i + 1):
                        factor = a * _dx(alpha, i - p, max_order) * comb(i, p)
                        for q in range(p):
                            result._add_local(row, column, q,
                                              factor * _dx(beta, p - 1 - q, max_order) *
                                              comb(p - 1, q))

        # tail o local: Dxi(g Dx^k v) = sum_{p<k} (-1)^p Dx^p(g) Dx^(k-1-p) v
        #                               + (-1)^k Dxi(Dx^k(g) v)
        for (row, left_monomial, middle, right_monomial), coefficient in self.kernel.items():
            for (inner_row, column), inner in other.local.items():
                if inner_row != middle:
                    continue

                alpha = _monomial(left_monomial)
                for k, b in inner.items():
                    g = b * Expression.from_terms({right_monomial: coefficient})
                    for p in range(k):
                        result._add_local(row, column, k - 1 - p,
                                          alpha * _dx(g, p, max_order) * (-1) ** p)

                    result._add_tail_expression(row, alpha, column,
                                                _dx(g, k, max_order) * (-1) ** k)

        # tail o tail: the middle factors are collected per outer pair of monomials
        middles: Dict[KernelKey, Expression] = {}
        for (row, left_monomial, middle, right_monomial), coefficient in self.kernel.items():
            for (inner_row, inner_left, column, inner_right), inner_coefficient in \
                    other.kernel.items():
                if inner_row != middle:
                    continue

                key = (row, left_monomial, column, inner_right)
                term = Expression.from_terms({right_monomial: coefficient}) * \
                    Expression.from_terms({inner_left: inner_coefficient})
                middles[key] = middles.get(key, Expression()) + term

        for (row, left_monomial, column, right_monomial), middle in middles.items():
            if middle.is_zero:
                continue

            integral = formal_integrate(middle)
            if integral is None:
                raise NonlocalDepthError('Dxi(%s*Dxi(%s))' % (middle, format_monomial(
                    right_monomial) or '1'))

            alpha = _monomial(left_monomial)
            delta = _monomial(right_monomial)
            result._add_tail_expression(row, alpha * integral, column, delta)
            result._add_tail_expression(row, alpha, column, -(integral * delta))

        return result

    __matmul__ = compose

    def adjoint(self, max_order: int = None) -> 'WeaklyNonlocalOperator':
        """
        Return the formal adjoint.

        ``(a Dx^j)^* = (-Dx)^j o a`` (transposed) and ``(a Dxi b^T)^* = -b Dxi a^T``.
        """
        max_order = DEFAULT_SETTINGS.max_order if max_order is None else max_order
        result = self._empty()
        for (row, column), orders in self.local.items():
            for j, a in orders.items():
                for p in range(j + 1):
                    result._add_local(column, row, p,
                                      _dx(a, j - p, max_order) * comb(j, p) * (-1) ** j)

        for (row, left_monomial, column, right_monomial), coefficient in self.kernel.items():
            result._add_kernel((column, right_monomial, row, left_monomial), -coefficient)

        return result

    # Application

    def apply(self, vector: VectorExpression, max_order: int = None) -> VectorExpression:
        """
        Apply the operator to a vector of expressions.

        Every tail argument is integrated exactly where possible; what cannot be integrated is
        kept as ``Dxi`` atoms (see :attr:`VectorExpression.is_local`).
        """
        if len(vector) != self.size:
            raise ValueError('expected a vector of %d components, got %d' %
                             (self.size, len(vector)))

        max_order = DEFAULT_SETTINGS.max_order if max_order is None else max_order
        result = [Expression() for _ in range(self.size)]
        for (row, column), orders in self.local.items():
            for order, coefficient in orders.items():
                result[row] = result[row] + coefficient * _dx(vector[column], order, max_order)

        for (row, left_monomial), argument in self._tail_arguments(
                lambda column, right: Expression(right) * vector[column]).items():
            result[row] = result[row] + _monomial(left_monomial) * antiderivative(argument)

        return VectorExpression(result)

    def _tail_arguments(self, term) -> dict:
        arguments = {}
        for (row, left_monomial, column, right_monomial), coefficient in self.kernel.items():
            key = (row, left_monomial)
            value = term(column, right_monomial) * coefficient
            arguments[key] = value if key not in arguments else arguments[key] + value

        return arguments

    def apply_numeric(self, vector: GridFunction, u: GridFunction, *, anchor: str = 'decaying',
                      settings: Settings = DEFAULT_SETTINGS) -> GridFunction:
        """
        Apply the operator to grid data with the coefficients evaluated at the curvature ``u``.

        :param vector: the argument (``n - 1`` components)
        :param u: the curvature vector
        :param anchor: normalization of the numerical antiderivative
        :param settings: supplies the zero-mean tolerance

        """
        if vector.components != self.size or u.components != self.size:
            raise ValueError('expected grid data with %d components' % self.size)

        evaluator = GridEvaluator({'u': u}, anchor, settings)
        derivatives: Dict[int, np.ndarray] = {}

        def derivative(order: int) -> np.ndarray:
            if order not in derivatives:
                derivatives[order] = vector.derivative(order).samples
            return derivatives[order]

        result = np.zeros((self.size, u.size))
        for (row, column), orders in self.local.items():
            for order, coefficient in orders.items():
                result[row] += evaluator.expression(coefficient) * derivative(order)[column]

        arguments = self._tail_arguments(
            lambda column, right: evaluator.monomial(right) * vector.samples[column])
        for (row, left_monomial), argument in arguments.items():
            integral = GridFunction(argument, u.length).antiderivative(
                anchor, settings.mean_tolerance, label='tail argument')
            result[row] += evaluator.monomial(left_monomial) * integral.samples[0]

        return GridFunction(result, u.length)

    # Comparison and display

    def __eq__(self, other):
        if not isinstance(other, WeaklyNonlocalOperator):
            return NotImplemented

        return self.n == other.n and self.local == other.local and self.kernel == other.kernel

    def __hash__(self):
        return hash((self.n, frozenset(self.kernel.items())))

    def __str__(self):
        lines = []
        for (row, column) in sorted(self.local):
            terms = []
            for order in sorted(self.local[(row, column)]):
                coefficient = self.local[(row, column)][order]
                if order == 0:
                    terms.append('(%s)' % coefficient)
                elif coefficient == 1:
                    terms.append('Dx^%d' % order)
                else:
                    terms.append('(%s)*Dx^%d' % (coefficient, order))

            lines.append('[%d,%d] %s' % (row + 1, column + 1, ' + '.join(terms)))

        for tail in self.tails:
            left = ', '.join(str(component) for component in tail.left)
            right = ', '.join(str(component) for component in tail.right)
            sign = '+' if tail.sign > 0 else '-'
            lines.append('%s (%s) Dxi <(%s), .>' % (sign, left, right))

        return '\n'.join(lines)

    def __repr__(self):
        return '<WeaklyNonlocalOperator (%s, n=%d, local entries=%d, kernel terms=%d)>' % (
            self.name or 'unnamed', self.n, len(self.local), len(self.kernel))


class OperatorChain:
    """
    A composition ``A_1 o A_2 o ... o A_k`` applied factor by factor.

    Used where the normal form of the product does not exist (nested ``Dxi``) but the operator
    is still needed on grid data.
    """

    __slots__ = 'operators'

    def __init__(self, *operators: WeaklyNonlocalOperator):
        if not operators:
            raise ValueError('at least one operator is required')

        self.operators = operators

    @property
    def n(self) -> int:
        return self.operators[0].n

    def adjoint(self) -> 'OperatorChain':
        return OperatorChain(*[operator.adjoint() for operator in reversed(self.operators)])

    def apply_numeric(self, vector: GridFunction, u: GridFunction, *, anchor: str = 'decaying',
                      settings: Settings = DEFAULT_SETTINGS) -> GridFunction:
        for operator in reversed(self.operators):
            vector = operator.apply_numeric(vector, u, anchor=anchor, settings=settings)

        return vector
