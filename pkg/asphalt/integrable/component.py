import logging
from numbers import Real
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from asphalt.core import Component, Context
from typeguard import check_argument_types

from asphalt.integrable.api import DEFAULT_SETTINGS, Settings, VerificationReport
from asphalt.integrable.diffpoly.expressions import VectorExpression
from asphalt.integrable.diffpoly.grid import GridFunction, random_packets
from asphalt.integrable.flows import FlowTrajectory, FrameState, evolve_curve, evolve_vmkdv
from asphalt.integrable.hasimoto import (
    AngleField, angles_from_natural, gauge_residual, natural_from_frenet)
from asphalt.integrable.laxpair import (
    flow_coefficient, killing_check, lambda_identities, zero_curvature_residual)
from asphalt.integrable.operators.checks import (
    check_hereditary_numeric, check_jacobi_numeric, check_symplectic)
from asphalt.integrable.operators.geometric import (
    cosymplectic_H, hierarchy, nls_square_identity, recursion_R, symplectic_I)
from asphalt.integrable.util import create_rng

__all__ = ('CHECKS', 'DIRECTIONS', 'register_check', 'Workbench', 'IntegrableComponent')

logger = logging.getLogger(__name__)

CheckFunction = Callable[[int, int, np.random.Generator, Settings], VerificationReport]

#: Verification suites by name
CHECKS: Dict[str, CheckFunction] = {}

#: Directions of the Hasimoto transformation
DIRECTIONS = ('to-natural', 'to-frenet')

#: Largest number of recursion steps the symbolic hierarchy is run for
MAX_HIERARCHY_STEPS = 4


def register_check(name: str) -> Callable[[CheckFunction], CheckFunction]:
    def decorator(func: CheckFunction) -> CheckFunction:
        CHECKS[name] = func
        return func

    return decorator


@register_check('symplectic')
def _symplectic(n: int, grid: int, rng: np.random.Generator,
                settings: Settings) -> VerificationReport:
    data = {family: random_packets(rng, n - 1, grid) for family in ('u', 'P', 'Q', 'h')}
    return check_symplectic(symplectic_I(n), data, settings=settings)


@register_check('jacobi')
def _jacobi(n: int, grid: int, rng: np.random.Generator,
            settings: Settings) -> VerificationReport:
    return check_jacobi_numeric(cosymplectic_H(n), random_packets(rng, n - 1, grid),
                                settings=settings)


@register_check('hereditary')
def _hereditary(n: int, grid: int, rng: np.random.Generator,
                settings: Settings) -> VerificationReport:
    u, P, Q = (random_packets(rng, n - 1, grid) for _ in range(3))
    return check_hereditary_numeric(recursion_R(n), u, P, Q, settings=settings)


@register_check('nls-square')
def _nls_square(n: int, grid: int, rng: np.random.Generator,
                settings: Settings) -> VerificationReport:
    return VerificationReport('nls-square', n, verdict=nls_square_identity(n))


@register_check('lambda')
def _lambda(n: int, grid: int, rng: np.random.Generator,
            settings: Settings) -> VerificationReport:
    return lambda_identities(n)


@register_check('killing')
def _killing(n: int, grid: int, rng: np.random.Generator,
             settings: Settings) -> VerificationReport:
    return VerificationReport('killing', n, verdict=killing_check(n),
                              details={'flow_coefficient': str(flow_coefficient(n))})


class Workbench:
    """
    Runs verifications and simulations with one fixed set of settings.

    :param settings: the numerical and symbolic settings
    """

    __slots__ = 'settings'

    def __init__(self, settings: Settings = DEFAULT_SETTINGS):
        self.settings = settings

    def verify(self, check: str, n: int, grid: int = 256,
               seed: Optional[int] = None) -> VerificationReport:
        """
        Run a verification suite on seeded random data.

        :param check: one of the keys of :data:`CHECKS`
        :param n: ambient dimension
        :param grid: grid size for the numerical parts
        :param seed: seed for the random data

        """
        assert check_argument_types()
        try:
            func = CHECKS[check]
        except KeyError:
            raise ValueError('unknown check "%s"' % check) from None

        logger.info('Running the %s check for n = %d', check, n)
        report = func(n, grid, create_rng(seed), self.settings)
        logger.info('%s check for n = %d: %s (residual %.3e)', check, n,
                    'pass' if report.verdict else 'FAIL', report.residual)
        return report

    def hierarchy(self, n: int, steps: int) -> List[VectorExpression]:
        assert check_argument_types()
        if steps > MAX_HIERARCHY_STEPS:
            raise ValueError('at most %d recursion steps are supported' % MAX_HIERARCHY_STEPS)

        return hierarchy(n, steps, settings=self.settings)

    def hasimoto(self, data: GridFunction, direction: str,
                 initial: Mapping[Tuple[int, int], float] = None
                 ) -> Tuple[GridFunction, AngleField, float]:
        """
        Transform between Frenet and natural curvatures.

        :param data: Frenet curvatures (``to-natural``) or natural curvatures (``to-frenet``)
        :param direction: one of :data:`DIRECTIONS`
        :param initial: initial angles
        :return: the transformed curvatures, the angle fields and the gauge residual

        """
        if direction == 'to-natural':
            natural, angles = natural_from_frenet(data, initial, settings=self.settings)
            return natural, angles, gauge_residual(data, natural, angles)
        elif direction == 'to-frenet':
            angles, frenet = angles_from_natural(data, initial, settings=self.settings)
            return frenet, angles, gauge_residual(frenet, data, angles)
        else:
            raise ValueError('unknown direction "%s"' % direction)

    def evolve(self, u0: GridFunction, duration: Real, dt: Optional[Real] = None,
               kappa_c: Real = 0.0, snapshots: int = 11) -> FlowTrajectory:
        return evolve_vmkdv(u0, duration, dt, kappa_c, snapshots=snapshots,
                            settings=self.settings)

    def curve(self, trajectory: FlowTrajectory) -> List[FrameState]:
        return evolve_curve(trajectory, settings=self.settings)

    def laxcheck(self, trajectory: FlowTrajectory, spectral: Sequence[Real] = (0.5, 1.0, 2.0),
                 nu: Real = 0.0) -> List[Dict[str, float]]:
        return zero_curvature_residual(trajectory, spectral, nu, settings=self.settings)

    def __repr__(self):
        return '<%s settings=%r>' % (self.__class__.__name__, self.settings)


class IntegrableComponent(Component):
    """
    Publishes a :class:`Workbench` as a resource.

    :param resource_name: name of the workbench resource
    :param context_attr: name of the context attribute (``None`` to not set one)
    :param settings: keyword arguments for :class:`~asphalt.integrable.api.Settings`
    """

    def __init__(self, resource_name: str = 'default',
                 context_attr: Optional[str] = 'integrable', **settings):
        assert check_argument_types()
        self.resource_name = resource_name
        self.context_attr = context_attr
        self.settings = Settings(**settings)

    async def start(self, ctx: Context) -> None:
        workbench = Workbench(self.settings)
        ctx.add_resource(workbench, self.resource_name, self.context_attr)
        logger.info('Configured integrable systems workbench (%s; %r)', self.resource_name,
                    self.settings)
