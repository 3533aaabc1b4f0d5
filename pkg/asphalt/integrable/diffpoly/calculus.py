"""
Variational calculus on differential polynomials.

The central tool is the reduction modulo total derivatives: every local expression ``e`` splits
uniquely as ``e = Dx(F) + r`` where ``r`` only contains monomials that are not leading
monomials of any total derivative (see :func:`split_divergence`). ``r`` vanishes exactly when
``e`` is a total derivative, which also gives canonical arguments for ``Dxi`` atoms.
"""
import logging
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Optional, Tuple

import sympy

from asphalt.integrable.api import NonlocalArgument, NonlocalDepthError, Undecided
from asphalt.integrable.diffpoly.expressions import (
    Dxi, Expression, Monomial, VectorExpression, monomial_factors, monomial_key,
    to_sympy_rational, total_derivative)
from asphalt.integrable.diffpoly.jets import FAMILIES, Jet

__all__ = ('euler_operator', 'frechet_derivative', 'formal_integrate', 'split_divergence',
           'antiderivative', 'equivalent_mod_divergence', 'is_total_derivative')

logger = logging.getLogger(__name__)


def _working_order(expression: Expression) -> int:
    # intermediate results of the Euler and homotopy operators may temporarily have up to twice
    # the order of their input
    return 2 * expression.max_order() + 2


def _require_local(expression: Expression, operation: str) -> None:
    if not expression.is_local:
        raise NonlocalArgument(operation)


def _minus_dx_power(expression: Expression, power: int, max_order: int) -> Expression:
    for _ in range(power):
        expression = -total_derivative(expression, max_order)

    return expression


def _split_term(monomial: Monomial) -> Tuple[Monomial, List[Tuple[Dxi, int]]]:
    """Separate a monomial into its local factor and its ``Dxi`` atoms with their powers."""
    outer = []
    atoms = []
    for factor, power in monomial_factors(monomial):
        if isinstance(factor, Dxi):
            atoms.append((factor, power))
        else:
            outer.append(factor.symbol ** power)

    return sympy.Mul(*outer), atoms


def euler_operator(expression: Expression, family: str = 'u',
                   length: int = None) -> VectorExpression:
    """
    Return the variational derivative ``E_k(e) = sum_j (-Dx)^j de/du_k^(j)``.

    :param expression: a local expression
    :param family: the dependent variable family to vary
    :param length: number of components in the result (defaults to the highest component of
        ``family`` occurring in the expression)
    :raises ~asphalt.integrable.api.NonlocalArgument: if the expression contains ``Dxi`` atoms

    """
    _require_local(expression, 'the Euler operator')
    jets = [jet for jet in expression.jets() if jet.family == family]
    if length is None:
        length = max((jet.component for jet in jets), default=1)

    max_order = _working_order(expression)
    components = [Expression() for _ in range(length)]
    for jet in jets:
        if jet.component > length:
            raise ValueError('component %d exceeds the vector length %d' %
                             (jet.component, length))

        term = _minus_dx_power(expression.partial(jet), jet.order, max_order)
        components[jet.component - 1] = components[jet.component - 1] + term

    return VectorExpression(components)


def is_total_derivative(expression: Expression) -> bool:
    """
    Return ``True`` if the local expression is ``Dx`` of a differential polynomial.

    The expression must have no constant term and its variational derivative must vanish with
    respect to every family present.
    """
    _require_local(expression, 'the total derivative test')
    if expression.constant_term:
        return False

    return all(euler_operator(expression, family).is_zero
               for family in FAMILIES if family in expression.families())


def frechet_derivative(expression: Expression, direction: str = 'P',
                       source: str = 'u') -> Expression:
    """
    Linearize an expression in the ``source`` family along the ``direction`` family.

    Every ``source`` jet is replaced in turn by the matching ``direction`` jet (Leibniz rule);
    atoms are differentiated through their arguments, ``D[Dxi(f)] = Dxi(D[f])``.
    """
    if direction == source:
        raise ValueError('the direction family must differ from the source family')

    def derive(factor):
        if isinstance(factor, Jet):
            if factor.family == source:
                return Expression(factor.with_family(direction).symbol)
            return Expression()

        return Expression.dxi(frechet_derivative(factor.argument, direction, source))

    return expression.map_factors(derive)


def formal_integrate(expression: Expression) -> Optional[Expression]:
    """
    Integrate a local expression exactly.

    Each homogeneous part of degree ``d`` is mapped through the homotopy operator
    ``(1/d) sum_a sum_j sum_{i<j} u^a_i (-Dx)^(j-i-1) de/du^a_j`` and the candidate is
    verified by differentiation.

    :return: ``F`` with ``Dx(F) = e`` and no constant term, or ``None`` if ``e`` is not a
        total derivative

    """
    _require_local(expression, 'formal integration')
    if expression.is_zero:
        return Expression()
    if expression.constant_term:
        return None

    max_order = _working_order(expression)
    result = Expression()
    for degree, part in expression.homogeneous_parts().items():
        candidate = Expression()
        for jet in part.jets():
            if jet.order == 0:
                continue

            partial = part.partial(jet)
            for lower in range(jet.order):
                factor = Expression.jet(jet.family, jet.component, lower)
                candidate = candidate + factor * _minus_dx_power(
                    partial, jet.order - lower - 1, max_order)

        result = result + candidate * Fraction(1, degree)

    if total_derivative(result, max_order) != expression:
        return None

    return result


def _signature(monomial: Monomial) -> Tuple[tuple, int]:
    labels = []
    weight = 0
    for jet, power in monomial_factors(monomial):
        labels.extend([(jet.family, jet.component)] * power)
        weight += jet.order * power

    return tuple(sorted(labels, key=lambda label: (FAMILIES.index(label[0]), label[1]))), weight


def _pivot_key(monomial: Monomial) -> tuple:
    # eliminate the monomials carrying the highest derivatives first
    return max(jet.order for jet, _ in monomial_factors(monomial)), monomial_key(monomial)


def _order_distributions(count: int, limit: int) -> Iterable[Tuple[int, ...]]:
    # non-decreasing tuples of ``count`` orders summing to at most ``limit``
    for combination in combinations_with_replacement(range(limit + 1), count):
        if sum(combination) <= limit:
            yield combination


def _candidate_monomials(labels: tuple, weight: int) -> List[Monomial]:
    groups: Dict[tuple, int] = {}
    for label in labels:
        groups[label] = groups.get(label, 0) + 1

    partials = [(sympy.S.One, 0)]
    for (family, component), count in groups.items():
        partials = [(monomial * sympy.Mul(*[Jet(family, component, order).symbol
                                            for order in orders]), used + sum(orders))
                    for monomial, used in partials
                    for orders in _order_distributions(count, weight - used)]

    return [monomial for monomial, used in partials if used == weight]


def _reduce_group(terms: Dict[Monomial, Fraction], labels: tuple,
                  weight: int) -> Tuple[Expression, Dict[Monomial, Fraction]]:
    """
    Reduce one group of monomials sharing their factor labels and total order.

    The total derivatives of all candidate monomials of one order less are brought to reduced
    row echelon form, with the columns ordered so that the pivots are the leading monomials.
    An identity block tracks which combination of candidates produced each echelon row.
    """
    if weight == 0 or not labels:
        return Expression(), dict(terms)

    candidates = _candidate_monomials(labels, weight - 1)
    images = [total_derivative(Expression(candidate), weight + 1).terms
              for candidate in candidates]
    columns = sorted(set(terms).union(*images), key=_pivot_key, reverse=True)
    position = {monomial: index for index, monomial in enumerate(columns)}
    width = len(columns)

    augmented = sympy.zeros(len(candidates), width + len(candidates))
    for row, image in enumerate(images):
        for monomial, coefficient in image.items():
            augmented[row, position[monomial]] = to_sympy_rational(coefficient)
        augmented[row, width + row] = 1

    echelon, pivots = augmented.rref()
    remainder = sympy.Matrix([[to_sympy_rational(terms.get(monomial, 0))
                               for monomial in columns]])
    integral = sympy.S.Zero
    for row, pivot in enumerate(pivots):
        if pivot >= width:
            break

        factor = remainder[0, pivot]
        if factor == 0:
            continue

        remainder -= factor * echelon[row, :width]
        integral += factor * sympy.Add(*[echelon[row, width + index] * candidate
                                         for index, candidate in enumerate(candidates)])

    return Expression(integral), {monomial: Fraction(int(value.p), int(value.q))
                                  for monomial, value in zip(columns, remainder) if value != 0}


def split_divergence(expression: Expression) -> Tuple[Expression, Expression]:
    """
    Split a local expression as ``Dx(F) + r`` with ``r`` in canonical form.

    Total derivatives preserve the factor labels and raise the total derivative order by one,
    so the monomials are reduced group by group against an echelon basis of the total
    derivatives of the same group. The remainder ``r`` is unique and zero exactly when the
    expression (minus its constant term) is a total derivative.

    :return: a tuple of ``(F, r)``

    """
    _require_local(expression, 'divergence splitting')
    groups: Dict[tuple, Dict[Monomial, Fraction]] = {}
    for monomial, coefficient in expression.terms.items():
        groups.setdefault(_signature(monomial), {})[monomial] = coefficient

    integral = Expression()
    remainder: Dict[Monomial, Fraction] = {}
    for (labels, weight), terms in groups.items():
        group_integral, group_remainder = _reduce_group(terms, labels, weight)
        integral = integral + group_integral
        remainder.update(group_remainder)

    return integral, Expression.from_terms(remainder)


def _integrate_nonlocal(monomial: Monomial, coefficient: Fraction) -> Expression:
    rest, atoms = _split_term(monomial)
    if len(atoms) == 1:
        atom, power = atoms[0]
        # f^k * Dxi(f)... with the outer factor equal to the argument
        if rest == atom.monomial:
            return Expression.from_terms({atom ** (power + 1): coefficient / (power + 1)})

        outer = formal_integrate(Expression.from_terms({rest: coefficient}))
        if power == 1 and outer is not None:
            # f Dxi(g) = Dx(F Dxi(g)) - F g
            return outer * Expression(atom) - antiderivative(outer * atom.argument)

    raise NonlocalDepthError(Expression.from_terms({monomial: coefficient}))


def antiderivative(expression: Expression) -> Expression:
    """
    Return ``Dxi`` of an expression, integrating exactly as far as possible.

    The local part is reduced with :func:`split_divergence`; only the canonical remainder is
    kept as ``Dxi`` atoms. Nonlocal terms are integrated by parts when their outer factor is a
    total derivative.

    :raises ~asphalt.integrable.api.NonlocalDepthError: if the result would need nested
        ``Dxi``

    """
    local = Expression.from_terms({monomial: coefficient
                                   for monomial, coefficient in expression.terms.items()
                                   if not monomial.has(Dxi)})
    result = formal_integrate(local)
    if result is None:
        integral, remainder = split_divergence(local)
        result = integral + Expression.dxi(remainder)

    for monomial, coefficient in expression.terms.items():
        if monomial.has(Dxi):
            result = result + _integrate_nonlocal(monomial, coefficient)

    return result


def _resolve_atoms(expression: Expression) -> Expression:
    """Replace every atom by the canonical antiderivative of its argument."""
    mapping = {atom: antiderivative(atom.argument).expr for atom in expression.atoms()}
    return Expression(expression.expr.xreplace(mapping))


def _orient(expression: Expression) -> Expression:
    """
    Rewrite every ``c * a * Dxi(b)`` term so that ``b`` precedes ``a``.

    Uses ``a Dxi(b) = -Dxi(a) b`` modulo total derivatives and drops ``a Dxi(a)``.
    """
    terms = []
    for monomial, coefficient in expression.terms.items():
        outer, atoms = _split_term(monomial)
        if len(atoms) == 1 and atoms[0][1] == 1:
            atom = atoms[0][0]
            if outer == atom.monomial:
                continue
            if outer != 1 and monomial_key(outer) < atom.atom_key:
                monomial = atom.monomial * Dxi(outer)
                coefficient = -coefficient

        terms.append(to_sympy_rational(coefficient) * monomial)

    return Expression(sympy.Add(*terms))


def equivalent_mod_divergence(first: Expression, second: Expression,
                              max_passes: int = 4) -> bool:
    """
    Decide whether two expressions differ by a total derivative.

    Nonlocal terms are brought to a canonical form by integration by parts (atoms are resolved
    to canonical arguments and every product ``a Dxi(b)`` is oriented along the monomial
    ordering), outer factors that are total derivatives are integrated away, and the local
    remainder is tested with the Euler operator.

    :raises ~asphalt.integrable.api.Undecided: if nonlocal terms remain that neither cancel nor
        integrate

    """
    difference = first - second
    for _ in range(max_passes):
        rewritten = _orient(_resolve_atoms(difference))
        if rewritten == difference:
            break

        difference = rewritten

    # f Dxi(g) = -F g modulo total derivatives when f = Dx(F)
    local = Expression()
    outer_sums: Dict[Dxi, Dict[Monomial, Fraction]] = {}
    residual = Expression()
    for monomial, coefficient in difference.terms.items():
        outer, atoms = _split_term(monomial)
        if not atoms:
            local = local + Expression.from_terms({monomial: coefficient})
        elif len(atoms) == 1 and atoms[0][1] == 1:
            sums = outer_sums.setdefault(atoms[0][0], {})
            sums[outer] = sums.get(outer, 0) + coefficient
        else:
            residual = residual + Expression.from_terms({monomial: coefficient})

    for atom, outer in outer_sums.items():
        integral, remainder = split_divergence(Expression.from_terms(outer))
        local = local - integral * atom.argument
        residual = residual + remainder * Expression(atom)

    if not residual.is_zero:
        logger.debug('undecided nonlocal residual: %s', residual)
        raise Undecided(residual)

    if local.constant_term:
        return False

    return all(euler_operator(local, family).is_zero
               for family in FAMILIES if family in local.families())
