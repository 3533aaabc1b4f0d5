"""
Verification of the symplectic, Hamiltonian and hereditary properties.

The symplectic property is decided exactly; the Jacobi identity and the hereditary property are
checked on localized grid data with the ``decaying`` antiderivative, under which ``Dxi`` is
exactly skew-adjoint.
"""
import logging
from fractions import Fraction
from typing import Dict, Sequence, Tuple, Union

from asphalt.integrable.api import DEFAULT_SETTINGS, Settings, Undecided, VerificationReport
from asphalt.integrable.diffpoly.calculus import (
    equivalent_mod_divergence, euler_operator, frechet_derivative)
from asphalt.integrable.diffpoly.expressions import (
    Expression, as_vector, curvature_vector, formal_vector)
from asphalt.integrable.diffpoly.grid import GridFunction, evaluate_on_grid, evaluate_vector
from asphalt.integrable.operators.weakly_nonlocal import OperatorChain, WeaklyNonlocalOperator

__all__ = ('cyclic_symplectic_sum', 'check_symplectic', 'jacobi_densities', 'poisson_bracket',
           'check_jacobi_numeric', 'linearized_action', 'nijenhuis_defect',
           'check_hereditary_numeric', 'check_skew_adjoint')

logger = logging.getLogger(__name__)

AnyOperator = Union[WeaklyNonlocalOperator, OperatorChain]

#: Directions of the cyclic sum: (direction of the linearization, argument, paired vector)
_CYCLE = (('P', 'Q', 'h'), ('Q', 'h', 'P'), ('h', 'P', 'Q'))


def cyclic_symplectic_sum(operator: WeaklyNonlocalOperator) -> Expression:
    """
    Return ``<A'[P] Q, h> + <A'[Q] h, P> + <A'[h] P, Q>``.

    ``A'[P]`` is the derivative of the operator coefficients in the direction ``P``. ``A``
    defines a closed two-form exactly when the sum is a total derivative.
    """
    size = operator.size
    total = Expression()
    for direction, argument, paired in _CYCLE:
        image = operator.apply(formal_vector(argument, size))
        linearized = [frechet_derivative(component, direction, 'u') for component in image]
        total = total + formal_vector(paired, size).dot(as_vector(linearized))

    return total


def check_symplectic(operator: WeaklyNonlocalOperator, data: Dict[str, GridFunction] = None, *,
                     settings: Settings = DEFAULT_SETTINGS,
                     tolerance: float = 1e-8) -> VerificationReport:
    """
    Check that the operator defines a closed two-form.

    The cyclic sum is tested modulo total derivatives and, if grid data for ``u``, ``P``, ``Q``
    and ``h`` is given, its integral is evaluated on the grid as well.

    :param operator: the operator to check
    :param data: localized grid data for the families ``u``, ``P``, ``Q`` and ``h``
    :param settings: numerical settings
    :param tolerance: largest allowed absolute value of the grid integral

    """
    total = cyclic_symplectic_sum(operator)
    details = {'terms': len(total)}
    try:
        symbolic = equivalent_mod_divergence(total, Expression())
    except Undecided as exc:
        logger.info('symplectic check undecided: %s', exc)
        symbolic = False
        details['undecided'] = str(exc.residual)

    details['symbolic'] = symbolic
    residual = 0.0
    grid = None
    if data is not None:
        grid = data['u'].size
        values = evaluate_on_grid(total, data, anchor='decaying', settings=settings)
        residual = abs(float(values.integral()[0]))

    verdict = symbolic and residual < tolerance
    logger.debug('symplectic check for %r: symbolic=%s, residual=%.3e', operator, symbolic,
                 residual)
    return VerificationReport('symplectic', operator.n, grid=grid, residual=residual,
                              verdict=verdict, details=details)


def jacobi_densities(n: int) -> Tuple[Expression, Expression, Expression]:
    """Return the densities ``1/2 <u, u>``, ``1/2 <u_1, u_1>`` and ``1/4 <u, u>^2``."""
    u = curvature_vector(n)
    u1 = curvature_vector(n, 1)
    square = u.dot(u)
    return square * Fraction(1, 2), u1.dot(u1) * Fraction(1, 2), square * square * Fraction(1, 4)


def _gradient(density: Expression, u: GridFunction) -> GridFunction:
    return evaluate_vector(euler_operator(density, 'u', u.components), {'u': u})


def poisson_bracket(operator: AnyOperator, first: Expression, second: Expression,
                    u: GridFunction, *, settings: Settings = DEFAULT_SETTINGS) -> float:
    """Return ``{F, G} = int <dF/du, A dG/du> dx`` for the functionals with the given densities."""
    image = operator.apply_numeric(_gradient(second, u), u, settings=settings)
    return float(_gradient(first, u).dot(image).integral()[0])


def _nested_bracket(operator: AnyOperator, adjoint: AnyOperator, outer: Expression,
                    inner: Tuple[Expression, Expression], u: GridFunction,
                    settings: Settings) -> float:
    # {F, Phi} = dPhi[A^* dF/du], by central differences
    direction = adjoint.apply_numeric(_gradient(outer, u), u, settings=settings)
    if direction.norm() == 0:
        return 0.0

    epsilon = settings.fd_epsilon * (u.norm() or 1.0) / direction.norm()
    plus = poisson_bracket(operator, *inner, u + direction * epsilon, settings=settings)
    minus = poisson_bracket(operator, *inner, u - direction * epsilon, settings=settings)
    return (plus - minus) / (2 * epsilon)


def check_jacobi_numeric(operator: AnyOperator, u: GridFunction,
                         densities: Sequence[Expression] = None, *,
                         settings: Settings = DEFAULT_SETTINGS,
                         tolerance: float = 1e-6) -> VerificationReport:
    """
    Check the Jacobi identity of the bracket defined by the operator.

    The residual is ``|{F,{G,H}} + {G,{H,F}} + {H,{F,G}}|`` divided by the sum of the absolute
    values of the three terms.

    :param operator: the (candidate) Hamiltonian operator
    :param u: localized grid data for the curvature vector
    :param densities: three local densities (defaults to :func:`jacobi_densities`)
    :param settings: supplies the finite difference step
    :param tolerance: largest allowed relative residual

    """
    first, second, third = densities or jacobi_densities(operator.n)
    adjoint = operator.adjoint()
    terms = [_nested_bracket(operator, adjoint, outer, inner, u, settings)
             for outer, inner in [(first, (second, third)), (second, (third, first)),
                                  (third, (first, second))]]
    scale = sum(abs(term) for term in terms)
    residual = abs(sum(terms)) / scale if scale else 0.0
    logger.debug('Jacobi terms %s, relative residual %.3e', terms, residual)
    return VerificationReport('jacobi', operator.n, grid=u.size, residual=residual,
                              verdict=residual < tolerance, details={'terms': terms})


def linearized_action(operator: WeaklyNonlocalOperator, u: GridFunction,
                      direction: GridFunction, vector: GridFunction, *,
                      settings: Settings = DEFAULT_SETTINGS) -> GridFunction:
    """Return ``A'[direction] vector`` by central differences in the field ``u``."""
    if direction.norm() == 0:
        return vector * 0.0

    epsilon = settings.fd_epsilon * (u.norm() or 1.0) / direction.norm()
    plus = operator.apply_numeric(vector, u + direction * epsilon, settings=settings)
    minus = operator.apply_numeric(vector, u - direction * epsilon, settings=settings)
    return (plus - minus) / (2 * epsilon)


def _torsion_parts(operator: WeaklyNonlocalOperator, u: GridFunction, first: GridFunction,
                   second: GridFunction, settings: Settings) -> Tuple[GridFunction, GridFunction]:
    outer = operator.apply_numeric(
        linearized_action(operator, u, first, second, settings=settings), u, settings=settings)
    image = operator.apply_numeric(first, u, settings=settings)
    inner = linearized_action(operator, u, image, second, settings=settings)
    return outer, inner


def nijenhuis_defect(operator: WeaklyNonlocalOperator, u: GridFunction, P: GridFunction,
                     Q: GridFunction, *, settings: Settings = DEFAULT_SETTINGS) -> float:
    """
    Return the relative asymmetry of ``N(P, Q) = A A'[P] Q - A'[A P] Q``.

    ``A`` is hereditary exactly when ``N`` is symmetric. The result is
    ``|N(P, Q) - N(Q, P)|`` (sup norm) over the sum of the sup norms of the four parts.
    """
    outer_pq, inner_pq = _torsion_parts(operator, u, P, Q, settings)
    outer_qp, inner_qp = _torsion_parts(operator, u, Q, P, settings)
    scale = sum(part.max_norm() for part in (outer_pq, inner_pq, outer_qp, inner_qp))
    if not scale:
        return 0.0

    asymmetry = (outer_pq - inner_pq) - (outer_qp - inner_qp)
    return asymmetry.max_norm() / scale


def check_hereditary_numeric(operator: WeaklyNonlocalOperator, u: GridFunction,
                             P: GridFunction, Q: GridFunction, *,
                             settings: Settings = DEFAULT_SETTINGS,
                             tolerance: float = 1e-6) -> VerificationReport:
    residual = nijenhuis_defect(operator, u, P, Q, settings=settings)
    logger.debug('hereditary defect of %r: %.3e', operator, residual)
    return VerificationReport('hereditary', operator.n, grid=u.size, residual=residual,
                              verdict=residual < tolerance,
                              details={'fd_epsilon': settings.fd_epsilon})


def check_skew_adjoint(operator: AnyOperator, u: GridFunction, P: GridFunction,
                       Q: GridFunction, *, settings: Settings = DEFAULT_SETTINGS) -> float:
    """Return ``|int <P, A Q> + <Q, A P> dx|`` for localized data."""
    first = P.dot(operator.apply_numeric(Q, u, settings=settings)).integral()[0]
    second = Q.dot(operator.apply_numeric(P, u, settings=settings)).integral()[0]
    return abs(float(first + second))
