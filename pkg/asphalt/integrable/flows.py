"""
Evolution of the curvature vector under the vmKdV flow and reconstruction of the curve.

The flow ``u_t = u_xxx + 3/2 <u, u> u_x - kappa_c u_x`` is integrated pseudospectrally: the
linear part exactly in Fourier space (integrating factor), the cubic term with RK4 and the 2/3
dealiasing rule. Curves are reconstructed in flat space from the natural frame equations
``e_x = w(Dx) e``, ``gamma_x = e_1``.
"""
import logging
import math
from numbers import Real
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from typeguard import check_argument_types

from asphalt.integrable.api import (
    DEFAULT_SETTINGS, BlowUp, ConsistencyDrift, Settings, StabilityViolation)
from asphalt.integrable.diffpoly.grid import GridFunction, local_derivative

__all__ = ('stability_bound', 'default_time_step', 'soliton', 'translate', 'conserved_densities',
           'FlowTrajectory', 'evolve_vmkdv', 'conserved_report', 'natural_cartan',
           'time_cartan', 'FrameState', 'reconstruct_frame', 'evolve_curve')

logger = logging.getLogger(__name__)


def stability_bound(dx: float, settings: Settings = DEFAULT_SETTINGS) -> float:
    """Return the largest allowed time step ``stability_factor * (dx / pi) ** 3``."""
    return settings.stability_factor * (dx / math.pi) ** 3


def default_time_step(dx: float) -> float:
    return 0.25 * (dx / math.pi) ** 3


def soliton(x, t: float = 0.0, k: float = 1.0, direction: Sequence[float] = (1.0,), *,
            centre: float = 0.0, kappa_c: float = 0.0) -> np.ndarray:
    """
    Return the one-soliton ``u = 2k sech(k (x - centre + (k^2 - kappa_c) t)) c``.

    :param x: sample points
    :param t: time
    :param k: amplitude parameter (the soliton moves left with speed ``k ** 2 - kappa_c``)
    :param direction: the constant unit vector ``c``
    :return: array of shape ``(len(direction), len(x))``

    """
    direction = np.asarray(direction, dtype=float)
    if not math.isclose(float(np.linalg.norm(direction)), 1.0):
        raise ValueError('the soliton direction must be a unit vector')

    phase = k * (np.asarray(x, dtype=float) - centre + (k ** 2 - kappa_c) * t)
    return np.outer(direction, 2 * k / np.cosh(phase))


def translate(u: GridFunction, distance: float) -> GridFunction:
    """Return ``u(x - distance)`` (spectral shift of periodic data)."""
    spectrum = np.fft.rfft(u.samples, axis=-1)
    wavenumbers = 2 * np.pi * np.arange(spectrum.shape[-1]) / u.length
    shifted = np.fft.irfft(spectrum * np.exp(-1j * wavenumbers * distance), n=u.size, axis=-1)
    return GridFunction(shifted, u.length)


def conserved_densities(u: GridFunction) -> Dict[str, float]:
    """Return ``mass = int <u, u>`` and ``energy = int <u_1, u_1> - 1/4 <u, u>^2``."""
    square = u.dot(u)
    derivative = u.derivative()
    energy = derivative.dot(derivative) - square * square * 0.25
    return {'mass': float(square.integral()[0]), 'energy': float(energy.integral()[0])}


class FlowTrajectory:
    """
    Snapshots of the curvature vector at uniformly spaced times.

    :param times: snapshot times
    :param snapshots: the curvature vector at each time
    :param dt: the time step used by the integrator
    :param kappa_c: the constant curvature of the ambient space
    :ivar diagnostics: the conserved densities of each snapshot
    """

    __slots__ = 'times', 'snapshots', 'dt', 'kappa_c', 'diagnostics'

    def __init__(self, times: Sequence[Real], snapshots: Sequence[GridFunction], *, dt: Real,
                 kappa_c: Real = 0.0):
        assert check_argument_types()
        if len(times) != len(snapshots):
            raise ValueError('expected one snapshot per time (%d != %d)' %
                             (len(snapshots), len(times)))
        if len(times) < 2:
            raise ValueError('at least 2 snapshots are required')

        steps = np.diff(np.asarray(times, dtype=float))
        if not np.allclose(steps, steps[0]) or steps[0] <= 0:
            raise ValueError('snapshot times must be increasing and uniformly spaced')

        self.times = np.asarray(times, dtype=float)
        self.snapshots = list(snapshots)
        self.dt = float(dt)
        self.kappa_c = float(kappa_c)
        self.diagnostics = [conserved_densities(u) for u in self.snapshots]

    @property
    def n(self) -> int:
        return self.snapshots[0].components + 1

    @property
    def final(self) -> GridFunction:
        return self.snapshots[-1]

    def to_csv(self, directory: Union[str, Path]) -> List[Path]:
        """Write one CSV file per snapshot (``snapshot_0000.csv``, ...)."""
        directory = Path(directory)
        return [u.to_csv(directory / ('snapshot_%04d.csv' % index))
                for index, u in enumerate(self.snapshots)]

    @classmethod
    def from_csv(cls, directory: Union[str, Path], times: Sequence[Real], *, dt: Real,
                 kappa_c: Real = 0.0) -> 'FlowTrajectory':
        """Read the snapshots written by :meth:`to_csv`."""
        paths = sorted(Path(directory).glob('snapshot_*.csv'))
        if not paths:
            raise ValueError('no snapshot files found in %s' % directory)

        return cls(times, [GridFunction.from_csv(path) for path in paths], dt=dt,
                   kappa_c=kappa_c)

    def __repr__(self):
        return '<FlowTrajectory (n=%d, snapshots=%d, t=%g)>' % (self.n, len(self.snapshots),
                                                                self.times[-1])


def evolve_vmkdv(u0: GridFunction, duration: Real, dt: Optional[Real] = None,
                 kappa_c: Real = 0.0, *, snapshots: int = 11,
                 settings: Settings = DEFAULT_SETTINGS) -> FlowTrajectory:
    """
    Integrate ``u_t = u_xxx + 3/2 <u, u> u_x - kappa_c u_x``.

    The step actually taken is the largest step not exceeding ``dt`` that divides the snapshot
    spacing.

    :param u0: smooth periodic initial data
    :param duration: final time
    :param dt: time step (defaults to ``0.25 * (dx / pi) ** 3``)
    :param kappa_c: the constant curvature of the ambient space
    :param snapshots: number of recorded snapshots, including the initial data
    :param settings: supplies the stability and blow-up factors
    :raises ~asphalt.integrable.api.StabilityViolation: if ``dt`` exceeds
        :func:`stability_bound`
    :raises ~asphalt.integrable.api.BlowUp: if the sup norm grows by more than
        ``blowup_factor``

    """
    assert check_argument_types()
    if duration <= 0:
        raise ValueError('the duration must be positive')
    if snapshots < 2:
        raise ValueError('at least 2 snapshots are required')

    bound = stability_bound(u0.dx, settings)
    if dt is None:
        dt = min(default_time_step(u0.dx), bound)
    elif dt <= 0:
        raise ValueError('the time step must be positive')
    elif dt > bound:
        raise StabilityViolation(dt, bound)

    intervals = snapshots - 1
    per_snapshot = math.ceil(duration / intervals / dt)
    step = duration / (intervals * per_snapshot)
    size = u0.size
    wavenumbers = 2 * np.pi * np.arange(size // 2 + 1) / u0.length
    linear = -1j * wavenumbers ** 3 - 1j * kappa_c * wavenumbers
    half = np.exp(linear * step / 2)
    full = half ** 2
    dealias = np.arange(size // 2 + 1) < size / 3
    initial_norm = u0.max_norm()
    limit = settings.blowup_factor * initial_norm if initial_norm else math.inf
    logger.info('evolving vmKdV (n=%d, N=%d, dt=%.3e, %d steps, kappa_c=%g)',
                u0.components + 1, size, step, intervals * per_snapshot, kappa_c)

    def nonlinear(spectrum: np.ndarray) -> np.ndarray:
        u = np.fft.irfft(spectrum, n=size, axis=-1)
        ux = np.fft.irfft(1j * wavenumbers * spectrum, n=size, axis=-1)
        return dealias * np.fft.rfft(1.5 * np.sum(u ** 2, axis=0) * ux, axis=-1)

    spectrum = np.fft.rfft(u0.samples, axis=-1)
    times = [0.0]
    recorded = [u0]
    for index in range(intervals):
        for substep in range(per_snapshot):
            a = step * nonlinear(spectrum)
            b = step * nonlinear(half * (spectrum + a / 2))
            c = step * nonlinear(half * spectrum + b / 2)
            d = step * nonlinear(full * spectrum + half * c)
            spectrum = full * spectrum + (full * a + 2 * half * (b + c) + d) / 6

            t = (index * per_snapshot + substep + 1) * step
            norm = float(np.max(np.abs(np.fft.irfft(spectrum, n=size, axis=-1))))
            if not math.isfinite(norm) or norm > limit:
                raise BlowUp(t, norm)

        times.append((index + 1) * per_snapshot * step)
        recorded.append(GridFunction(np.fft.irfft(spectrum, n=size, axis=-1), u0.length))

    return FlowTrajectory(times, recorded, dt=step, kappa_c=kappa_c)


def conserved_report(trajectory: FlowTrajectory) -> List[Dict[str, float]]:
    """
    Tabulate the conserved densities of a trajectory.

    :return: one row per snapshot with the keys ``t``, ``mass``, ``energy``, ``mass_drift`` and
        ``energy_drift`` (drifts relative to the initial values, absolute if those vanish)

    """
    first = trajectory.diagnostics[0]
    rows = []
    for t, values in zip(trajectory.times, trajectory.diagnostics):
        row = {'t': float(t)}
        for name in ('mass', 'energy'):
            row[name] = values[name]
            drift = abs(values[name] - first[name])
            row[name + '_drift'] = drift / abs(first[name]) if first[name] else drift

        rows.append(row)

    return rows


def natural_cartan(u) -> np.ndarray:
    """
    Return the Cartan matrix of the natural frame in flat space.

    :param u: curvature values, shape ``(n - 1,)`` or ``(n - 1, points)``
    :return: array of shape ``(n, n)`` or ``(points, n, n)``

    """
    u = np.asarray(u, dtype=float)
    values = u.T if u.ndim == 2 else u
    n = values.shape[-1] + 1
    result = np.zeros(values.shape[:-1] + (n, n))
    result[..., 0, 1:] = values
    result[..., 1:, 0] = -values
    return result


def time_cartan(u, u1, u2) -> np.ndarray:
    """
    Return the Cartan matrix ``w(Dt)`` of the natural frame along the vmKdV flow at one point.

    ``w_1,i+1 = u_2,i + 1/2 <u, u> u_i`` and ``w_i+1,j+1 = u_j u_1,i - u_i u_1,j``.
    """
    u, u1, u2 = (np.asarray(value, dtype=float) for value in (u, u1, u2))
    velocity = u2 + 0.5 * np.dot(u, u) * u
    result = natural_cartan(velocity)
    result[1:, 1:] = np.outer(u1, u) - np.outer(u, u1)
    return result


def _orthonormalize(frame: np.ndarray) -> np.ndarray:
    # nearest orthogonal matrix (polar decomposition)
    left, _, right = np.linalg.svd(frame)
    return left @ right


def _periodic_refine(samples: np.ndarray, factor: int) -> np.ndarray:
    size = samples.shape[-1]
    spectrum = np.fft.rfft(samples, axis=-1)
    spectrum[..., -1] /= 2
    return np.fft.irfft(spectrum, n=size * factor, axis=-1) * factor


class FrameState:
    """
    A curve in ``R^n`` with its natural frame, sampled on the grid of the curvature vector.

    :param u: the natural curvatures
    :param points: curve points, shape ``(size, n)``
    :param frame: frame matrices (rows ``e_1 .. e_n``), shape ``(size, n, n)``
    :param end_point: the curve point at ``x = length``
    :param end_frame: the frame at ``x = length``
    :param t: time (for states along a flow)
    :ivar drift: sup difference between the curvature of the points and ``u``, if checked
    """

    __slots__ = 'u', 'points', 'frame', 'end_point', 'end_frame', 't', 'drift'

    def __init__(self, u: GridFunction, points: np.ndarray, frame: np.ndarray,
                 end_point: np.ndarray, end_frame: np.ndarray, t: float = 0.0):
        self.u = u
        self.points = points
        self.frame = frame
        self.end_point = end_point
        self.end_frame = end_frame
        self.t = t
        self.drift = None

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Write the curve points as CSV with the header ``x,comp1,...``."""
        return GridFunction(self.points.T, self.u.length).to_csv(path)

    def orthonormality_defect(self) -> float:
        products = np.einsum('kij,klj->kil', self.frame, self.frame)
        return float(np.max(np.abs(products - np.eye(self.n))))

    def tangent(self) -> np.ndarray:
        return local_derivative(self.points.T, self.u.dx).T

    def arc_length_defect(self) -> float:
        """Return ``max | |gamma_x| - 1 |``."""
        return float(np.max(np.abs(np.linalg.norm(self.tangent(), axis=1) - 1)))

    def tangent_defect(self) -> float:
        """Return ``max |gamma_x - e_1|``."""
        return float(np.max(np.abs(self.tangent() - self.frame[:, 0])))

    def closure_defect(self) -> float:
        """Return ``|gamma(length) - gamma(0)|``."""
        return float(np.linalg.norm(self.end_point - self.points[0]))

    def holonomy_defect(self) -> float:
        """Return the largest entry of ``e(length) - e(0)``."""
        return float(np.max(np.abs(self.end_frame - self.frame[0])))

    def curvature_from_curve(self) -> np.ndarray:
        """Return ``<gamma_xx, e_i+1>`` computed from the points by finite differences."""
        second = local_derivative(self.tangent().T, self.u.dx).T
        return np.einsum('kj,kij->ik', second, self.frame[:, 1:])

    def __repr__(self):
        return '<FrameState (n=%d, size=%d, t=%g)>' % (self.n, self.points.shape[0], self.t)


def reconstruct_frame(u: GridFunction, origin: Optional[Sequence[float]] = None,
                      frame: Optional[np.ndarray] = None, *,
                      settings: Settings = DEFAULT_SETTINGS) -> FrameState:
    """
    Integrate ``e_x = w(Dx) e`` and ``gamma_x = e_1`` over one period.

    RK4 is used with ``substeps`` steps per grid interval (the curvature vector is
    interpolated spectrally) and the frame is projected back onto the orthogonal matrices after
    every step.

    :param u: periodic natural curvatures
    :param origin: ``gamma(0)`` (defaults to the origin)
    :param frame: ``e(0)``, rows ``e_1 .. e_n`` (defaults to the identity)
    :param settings: supplies ``substeps``

    """
    n = u.components + 1
    point = np.zeros(n) if origin is None else np.array(origin, dtype=float)
    current = np.eye(n) if frame is None else np.array(frame, dtype=float)
    if point.shape != (n,) or current.shape != (n, n):
        raise ValueError('expected a point and a frame in %d dimensions' % n)
    if np.max(np.abs(current @ current.T - np.eye(n))) > 1e-8:
        raise ValueError('the initial frame is not orthonormal')

    substeps = settings.substeps
    factor = 2 * substeps
    cartans = natural_cartan(_periodic_refine(u.samples, factor))
    fine_size = cartans.shape[0]
    step = u.dx / substeps
    points = np.empty((u.size, n))
    frames = np.empty((u.size, n, n))
    for index in range(u.size):
        points[index] = point
        frames[index] = current
        for substep in range(substeps):
            origin_index = index * factor + 2 * substep
            start, middle, end = (cartans[(origin_index + offset) % fine_size]
                                  for offset in range(3))
            k1 = start @ current
            second = current + step / 2 * k1
            k2 = middle @ second
            third = current + step / 2 * k2
            k3 = middle @ third
            fourth = current + step * k3
            k4 = end @ fourth
            # gamma_x = e_1 at the same stages
            point = point + step / 6 * (current[0] + 2 * second[0] + 2 * third[0] + fourth[0])
            current = _orthonormalize(current + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4))

    return FrameState(u, points, frames, point, current)


def evolve_curve(trajectory: FlowTrajectory, initial: Optional[FrameState] = None, *,
                 settings: Settings = DEFAULT_SETTINGS) -> List[FrameState]:
    """
    Move the curve along a vmKdV trajectory.

    Every point moves with ``gamma_t = h_1 e_1 + sum_i u_1,i e_i+1`` where
    ``h_1 = 1/2 <u, u>``; the frame at ``x = 0`` moves with :func:`time_cartan` and the
    remaining frames are reconstructed from the curvature vector. RK4 steps span two snapshot
    intervals, so states are returned for every other snapshot.

    :param trajectory: a flat space trajectory (``kappa_c = 0``) with an even number of
        snapshot intervals
    :param initial: the curve at the first snapshot (defaults to
        ``reconstruct_frame(trajectory.snapshots[0])``)
    :param settings: supplies ``substeps`` and the consistency tolerance
    :raises ~asphalt.integrable.api.ConsistencyDrift: if the curvature of the moved curve
        departs from the trajectory

    """
    if trajectory.kappa_c:
        raise ValueError('curves are reconstructed in flat space only (kappa_c = 0)')
    if (len(trajectory.snapshots) - 1) % 2:
        raise ValueError('an even number of snapshot intervals is required')

    state = initial or reconstruct_frame(trajectory.snapshots[0], settings=settings)
    points = state.points.copy()
    base = state.frame[0].copy()
    step = 2 * (trajectory.times[1] - trajectory.times[0])
    derivatives = [(u.samples, u.derivative().samples, u.derivative(2).samples)
                   for u in trajectory.snapshots]

    def rates(index: int, base_frame: np.ndarray):
        u, u1, u2 = derivatives[index]
        frames = reconstruct_frame(trajectory.snapshots[index], frame=base_frame,
                                   settings=settings).frame
        tangential = 0.5 * np.sum(u ** 2, axis=0)
        velocity = (tangential[:, np.newaxis] * frames[:, 0] +
                    np.einsum('ik,kij->kj', u1, frames[:, 1:]))
        return velocity, time_cartan(u[:, 0], u1[:, 0], u2[:, 0]) @ base_frame

    states = [state]
    for index in range(0, len(trajectory.snapshots) - 1, 2):
        v1, b1 = rates(index, base)
        v2, b2 = rates(index + 1, base + step / 2 * b1)
        v3, b3 = rates(index + 1, base + step / 2 * b2)
        v4, b4 = rates(index + 2, base + step * b3)
        points = points + step / 6 * (v1 + 2 * v2 + 2 * v3 + v4)
        base = _orthonormalize(base + step / 6 * (b1 + 2 * b2 + 2 * b3 + b4))

        u = trajectory.snapshots[index + 2]
        t = float(trajectory.times[index + 2])
        reconstructed = reconstruct_frame(u, points[0], base, settings=settings)
        moved = FrameState(u, points, reconstructed.frame, reconstructed.end_point,
                           reconstructed.end_frame, t)
        moved.drift = float(np.max(np.abs(moved.curvature_from_curve() - u.samples)))
        logger.debug('curve at t=%g: curvature drift %.3e, arc length defect %.3e', t,
                     moved.drift, moved.arc_length_defect())
        if moved.drift > settings.consistency_tolerance:
            raise ConsistencyDrift(t, moved.drift)

        states.append(moved)

    return states
