from numbers import Real
from typing import Any, Dict, Optional

from typeguard import check_argument_types

__all__ = ('Settings', 'VerificationReport', 'RunManifest', 'SymbolicObstruction',
           'NumericalDomainError', 'MaxOrderExceeded', 'NonlocalArgument', 'NonlocalDepthError',
           'Undecided', 'NonlocalHierarchyMember', 'NonzeroMean', 'GimbalLock', 'PositivityLoss',
           'BranchJump', 'BlowUp', 'StabilityViolation', 'ConsistencyDrift',
           'InsufficientSnapshots')


class SymbolicObstruction(Exception):
    """Base class for errors raised by the exact (symbolic) layer."""


class NumericalDomainError(Exception):
    """Base class for errors raised when numerical data leaves the domain of a formula."""


class MaxOrderExceeded(SymbolicObstruction):
    def __init__(self, jet, max_order: int):
        super().__init__('jet %s would exceed the maximum derivative order (%d)' %
                         (jet, max_order))
        self.jet = jet
        self.max_order = max_order


class NonlocalArgument(SymbolicObstruction):
    def __init__(self, operation: str):
        super().__init__('%s requires a local expression (no Dxi atoms)' % operation)
        self.operation = operation


class NonlocalDepthError(SymbolicObstruction):
    def __init__(self, argument):
        super().__init__('nested Dxi is not supported (argument: %s)' % argument)
        self.argument = argument


class Undecided(SymbolicObstruction):
    """Raised when integration by parts cannot bring nonlocal terms to a decidable form."""

    def __init__(self, residual):
        super().__init__('could not decide equivalence, nonlocal residual: %s' % residual)
        self.residual = residual


class NonlocalHierarchyMember(SymbolicObstruction):
    def __init__(self, index: int, member=None):
        super().__init__('hierarchy member %d is not local' % index)
        self.index = index
        self.member = member


class NonzeroMean(NumericalDomainError):
    def __init__(self, atom, mean: float):
        super().__init__('Dxi argument %s has nonzero mean %.3e' % (atom, mean))
        self.atom = atom
        self.mean = mean


class GimbalLock(NumericalDomainError):
    def __init__(self, i: int, j: int, x: float):
        super().__init__('cos(theta_%d%d) vanishes at x = %.6g' % (i, j, x))
        self.i = i
        self.j = j
        self.x = x


class PositivityLoss(NumericalDomainError):
    def __init__(self, x: float):
        super().__init__('the first curvature is not positive at x = %.6g' % x)
        self.x = x


class BranchJump(NumericalDomainError):
    def __init__(self, i: int, j: int, x: float):
        super().__init__('angle theta_%d%d jumps by more than the allowed increment at '
                         'x = %.6g' % (i, j, x))
        self.i = i
        self.j = j
        self.x = x


class BlowUp(NumericalDomainError):
    def __init__(self, t: float, norm: float):
        super().__init__('solution norm %.3e exceeds the blow-up bound at t = %.6g' % (norm, t))
        self.t = t
        self.norm = norm


class StabilityViolation(NumericalDomainError):
    def __init__(self, dt: float, bound: float):
        super().__init__('time step %.3e exceeds the stability bound %.3e' % (dt, bound))
        self.dt = dt
        self.bound = bound


class ConsistencyDrift(NumericalDomainError):
    def __init__(self, t: float, drift: float):
        super().__init__('curvature recomputed from the evolved curve drifts by %.3e at '
                         't = %.6g' % (drift, t))
        self.t = t
        self.drift = drift


class InsufficientSnapshots(NumericalDomainError):
    def __init__(self, count: int, required: int = 5):
        super().__init__('at least %d snapshots are required (got %d)' % (required, count))
        self.count = count
        self.required = required


class Settings:
    """
    Tunable numerical and symbolic parameters.

    :param max_order: maximum number of x-derivatives on any jet
    :param mean_tolerance: relative tolerance for the zero-mean requirement of ``Dxi`` arguments
    :param gimbal_tolerance: smallest allowed ``|cos(theta)|`` in the Hasimoto transformation
    :param fd_epsilon: relative finite difference step for operator linearizations
    :param stability_factor: multiplier of ``(dx / pi) ** 3`` giving the largest allowed time
        step
    :param blowup_factor: ratio of sup norms at which a flow is declared to blow up
    :param consistency_tolerance: allowed sup difference between the evolved curve's curvature
        and the flow trajectory
    :param substeps: RK4 steps per grid interval for the x-integrations
    """

    __slots__ = ('max_order', 'mean_tolerance', 'gimbal_tolerance', 'fd_epsilon',
                 'stability_factor', 'blowup_factor', 'consistency_tolerance', 'substeps')

    def __init__(self, *, max_order: int = 12, mean_tolerance: Real = 1e-10,
                 gimbal_tolerance: Real = 1e-8, fd_epsilon: Real = 1e-5,
                 stability_factor: Real = 0.5, blowup_factor: Real = 1e3,
                 consistency_tolerance: Real = 1e-4, substeps: int = 4):
        assert check_argument_types()
        if max_order < 1:
            raise ValueError('max_order must be a positive integer')
        if substeps < 1:
            raise ValueError('substeps must be a positive integer')
        for name, value in [('mean_tolerance', mean_tolerance),
                            ('gimbal_tolerance', gimbal_tolerance),
                            ('fd_epsilon', fd_epsilon), ('stability_factor', stability_factor),
                            ('blowup_factor', blowup_factor),
                            ('consistency_tolerance', consistency_tolerance)]:
            if value <= 0:
                raise ValueError('%s must be positive' % name)

        self.max_order = max_order
        self.mean_tolerance = mean_tolerance
        self.gimbal_tolerance = gimbal_tolerance
        self.fd_epsilon = fd_epsilon
        self.stability_factor = stability_factor
        self.blowup_factor = blowup_factor
        self.consistency_tolerance = consistency_tolerance
        self.substeps = substeps

    def replace(self, **changes) -> 'Settings':
        state = self.__getstate__()
        state.update(changes)
        return Settings(**state)

    def __getstate__(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in self.__slots__}

    def __setstate__(self, state: Dict[str, Any]) -> None:
        for name in self.__slots__:
            setattr(self, name, state[name])

    def __eq__(self, other):
        return isinstance(other, Settings) and self.__getstate__() == other.__getstate__()

    def __repr__(self):
        return '<Settings (%s)>' % ', '.join('%s=%r' % (name, getattr(self, name))
                                             for name in self.__slots__)


DEFAULT_SETTINGS = Settings()


class VerificationReport:
    """
    Outcome of a verification suite.

    :ivar str check: name of the check
    :ivar int n: ambient dimension
    :ivar grid: grid size used by the numerical part (``None`` for purely symbolic checks)
    :ivar float residual: the measured residual (``0.0`` for exact passes)
    :ivar bool verdict: ``True`` if the check passed
    :ivar dict details: free-form supplementary values (JSON compatible)
    """

    __slots__ = 'check', 'n', 'grid', 'residual', 'verdict', 'details'

    def __init__(self, check: str, n: int, *, grid: Optional[int] = None, residual: Real = 0.0,
                 verdict: bool, details: Dict[str, Any] = None):
        self.check = check
        self.n = n
        self.grid = grid
        self.residual = float(residual)
        self.verdict = bool(verdict)
        self.details = details or {}

    def __getstate__(self) -> Dict[str, Any]:
        state = {
            'version': 1,
            'check': self.check,
            'n': self.n,
            'grid': self.grid,
            'residual': self.residual,
            'verdict': self.verdict
        }
        if self.details:
            state['details'] = self.details

        return state

    def __setstate__(self, state: Dict[str, Any]) -> None:
        if state['version'] > 1:
            raise ValueError('cannot deserialize {} definition newer than version 1 (version {} '
                             'received)'.format(self.__class__.__name__, state['version']))

        self.check = state['check']
        self.n = state['n']
        self.grid = state['grid']
        self.residual = state['residual']
        self.verdict = state['verdict']
        self.details = state.get('details', {})

    def __repr__(self):
        return ('<{self.__class__.__name__} (check={self.check!r}, n={self.n}, '
                'residual={self.residual:.3e}, verdict={self.verdict})>'.format(self=self))


class RunManifest:
    """
    Everything needed to rerun a command of the command line interface.

    :ivar str command: name of the command
    :ivar dict parameters: the parameters the command was run with
    :ivar dict inputs: input file paths by role
    :ivar dict outputs: output file paths by role
    :ivar dict settings: state of the :class:`Settings` the command ran with
    :ivar str version: library version
    :ivar float wall_time: wall clock duration of the run in seconds
    """

    __slots__ = ('command', 'parameters', 'inputs', 'outputs', 'settings', 'version',
                 'wall_time')

    def __init__(self, command: str, parameters: Dict[str, Any], *,
                 inputs: Dict[str, str] = None, outputs: Dict[str, str] = None,
                 settings: Dict[str, Any] = None, version: str = 'unknown',
                 wall_time: Real = 0.0):
        assert check_argument_types()
        self.command = command
        self.parameters = parameters
        self.inputs = inputs or {}
        self.outputs = outputs or {}
        self.settings = settings or {}
        self.version = version
        self.wall_time = float(wall_time)

    def __getstate__(self) -> Dict[str, Any]:
        return {
            'version': 1,
            'command': self.command,
            'parameters': self.parameters,
            'inputs': self.inputs,
            'outputs': self.outputs,
            'settings': self.settings,
            'library_version': self.version,
            'wall_time': self.wall_time
        }

    def __setstate__(self, state: Dict[str, Any]) -> None:
        if state['version'] > 1:
            raise ValueError('cannot deserialize {} definition newer than version 1 (version {} '
                             'received)'.format(self.__class__.__name__, state['version']))

        self.command = state['command']
        self.parameters = state['parameters']
        self.inputs = state['inputs']
        self.outputs = state['outputs']
        self.settings = state.get('settings', {})
        self.version = state['library_version']
        self.wall_time = state['wall_time']
