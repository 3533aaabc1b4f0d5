"""Numerical backend: sampled fields on a uniform periodic grid with spectral calculus."""
import io
import math
from numbers import Real
from pathlib import Path
from typing import Callable, Dict, Iterable, Mapping, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial
from typeguard import check_argument_types

from asphalt.integrable.api import DEFAULT_SETTINGS, NonzeroMean, Settings
from asphalt.integrable.diffpoly.expressions import (
    Dxi, Expression, Monomial, VectorExpression, monomial_factors)
from asphalt.integrable.diffpoly.jets import Jet
from asphalt.integrable.util import atomic_write, is_power_of_two

__all__ = ('ANCHORS', 'GridFunction', 'GridEvaluator', 'evaluate_on_grid', 'evaluate_vector',
           'random_packets', 'random_periodic', 'local_interpolate', 'local_derivative')

#: Normalizations of the numerical antiderivative: ``zero-mean`` requires zero-mean input and
#: returns the zero-mean periodic antiderivative; ``decaying`` returns the principal value
#: ``(int_{-inf}^x - int_x^inf) / 2`` of data supported inside the box
ANCHORS = ('zero-mean', 'decaying')


class GridFunction:
    """
    One or more real (or complex) fields sampled at ``x_k = k * length / size``.

    :param samples: array of shape ``(size,)`` or ``(components, size)``
    :param length: period length
    """

    __slots__ = 'samples', 'length'

    def __init__(self, samples, length: Real = 2 * math.pi):
        samples = np.asarray(samples)
        if not np.iscomplexobj(samples):
            samples = samples.astype(float)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2:
            raise ValueError('samples must be a one or two dimensional array')
        if not is_power_of_two(samples.shape[1]) or samples.shape[1] < 16:
            raise ValueError('grid size must be a power of two and at least 16')
        if length <= 0:
            raise ValueError('length must be positive')

        self.samples = samples
        self.length = float(length)

    @staticmethod
    def grid_points(size: int, length: Real = 2 * math.pi) -> np.ndarray:
        return np.arange(size) * (length / size)

    @classmethod
    def from_function(cls, function: Callable[[np.ndarray], Union[np.ndarray, Iterable]],
                      size: int, length: Real = 2 * math.pi) -> 'GridFunction':
        """Sample ``function(x)`` (returning one array or a sequence of arrays) on the grid."""
        x = cls.grid_points(size, length)
        values = function(x)
        if not isinstance(values, np.ndarray):
            values = np.array([np.broadcast_to(value, x.shape) for value in values])
        elif values.ndim == 0:
            values = np.full(x.shape, float(values))

        return cls(values, length)

    @classmethod
    def zeros(cls, components: int, size: int, length: Real = 2 * math.pi) -> 'GridFunction':
        return cls(np.zeros((components, size)), length)

    @classmethod
    def stack(cls, functions: Iterable['GridFunction']) -> 'GridFunction':
        functions = list(functions)
        first = functions[0]
        for function in functions[1:]:
            first._check_compatible(function)

        return cls(np.vstack([function.samples for function in functions]), first.length)

    @property
    def size(self) -> int:
        return self.samples.shape[1]

    @property
    def components(self) -> int:
        return self.samples.shape[0]

    @property
    def dx(self) -> float:
        return self.length / self.size

    @property
    def x(self) -> np.ndarray:
        return self.grid_points(self.size, self.length)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.size, d=self.dx)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.samples)

    def component(self, index: int) -> 'GridFunction':
        """Return a single component (0-based)."""
        return GridFunction(self.samples[index], self.length)

    def __len__(self):
        return self.components

    def __iter__(self):
        return (self.component(index) for index in range(self.components))

    def _check_compatible(self, other: 'GridFunction') -> None:
        if other.size != self.size or not math.isclose(other.length, self.length):
            raise ValueError('grid functions live on different grids')

    def _wrap(self, samples) -> 'GridFunction':
        return GridFunction(samples, self.length)

    def _operand(self, other):
        if isinstance(other, GridFunction):
            self._check_compatible(other)
            if other.components not in (1, self.components) and self.components != 1:
                raise ValueError('component counts differ (%d != %d)' %
                                 (self.components, other.components))
            return other.samples

        return other

    def __add__(self, other):
        return self._wrap(self.samples + self._operand(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.samples - self._operand(other))

    def __rsub__(self, other):
        return self._wrap(self._operand(other) - self.samples)

    def __mul__(self, other):
        return self._wrap(self.samples * self._operand(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.samples / self._operand(other))

    def __neg__(self):
        return self._wrap(-self.samples)

    def dot(self, other: 'GridFunction') -> 'GridFunction':
        """Pointwise Euclidean pairing of the components."""
        self._check_compatible(other)
        if other.components != self.components:
            raise ValueError('component counts differ (%d != %d)' %
                             (self.components, other.components))

        return self._wrap(np.sum(self.samples * other.samples, axis=0))

    def _spectral(self, multiplier: np.ndarray) -> np.ndarray:
        if self.is_complex:
            return np.fft.ifft(np.fft.fft(self.samples, axis=-1) * multiplier, axis=-1)

        half = multiplier[:self.size // 2 + 1]
        return np.fft.irfft(np.fft.rfft(self.samples, axis=-1) * half, n=self.size, axis=-1)

    def derivative(self, order: int = 1) -> 'GridFunction':
        """Spectral derivative (the Nyquist mode is dropped for odd orders)."""
        if order < 0:
            raise ValueError('the derivative order cannot be negative')
        if order == 0:
            return self._wrap(self.samples.copy())

        multiplier = (1j * self.wavenumbers) ** order
        if order % 2:
            multiplier[self.size // 2] = 0

        return self._wrap(self._spectral(multiplier))

    def _zero_mean_antiderivative(self, samples: np.ndarray) -> np.ndarray:
        k = self.wavenumbers
        multiplier = np.zeros(self.size, dtype=complex)
        nonzero = k != 0
        multiplier[nonzero] = 1 / (1j * k[nonzero])
        multiplier[self.size // 2] = 0
        return GridFunction(samples, self.length)._spectral(multiplier)

    def antiderivative(self, anchor: str = 'zero-mean', tolerance: Real = 1e-10,
                       label=None) -> 'GridFunction':
        """
        Return ``Dxi`` of the fields.

        :param anchor: one of :data:`ANCHORS`
        :param tolerance: with the ``zero-mean`` anchor, the largest allowed mean relative to
            the root mean square of the data
        :param label: what is being integrated (reported in errors)
        :raises ~asphalt.integrable.api.NonzeroMean: if the ``zero-mean`` anchor is used on data
            with a nonzero mean

        """
        if anchor not in ANCHORS:
            raise ValueError('unknown anchor "%s"' % anchor)

        mean = self.samples.mean(axis=-1)
        if anchor == 'zero-mean':
            scale = np.sqrt(np.mean(np.abs(self.samples) ** 2, axis=-1))
            offending = np.abs(mean) > tolerance * scale
            if offending.any():
                index = int(np.argmax(offending))
                raise NonzeroMean(label if label is not None else 'component %d' % (index + 1),
                                  float(np.abs(mean[index])))

            return self._wrap(self._zero_mean_antiderivative(self.samples - mean[:, np.newaxis]))

        periodic = self._zero_mean_antiderivative(self.samples - mean[:, np.newaxis])
        ramp = np.outer(mean, self.x - self.length / 2)
        return self._wrap(ramp + periodic - periodic[:, :1])

    def integral(self) -> np.ndarray:
        """Return the integral over one period of each component."""
        return self.samples.sum(axis=-1) * self.dx

    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=-1)

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.samples))) if self.samples.size else 0.0

    def norm(self) -> float:
        """The L2 norm over one period (all components together)."""
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.dx))

    def resample(self, size: int) -> 'GridFunction':
        """Return the trigonometric interpolant sampled on a grid of a different size."""
        if size == self.size:
            return self._wrap(self.samples.copy())

        spectrum = np.fft.fft(self.samples, axis=-1)
        resampled = np.zeros((self.components, size), dtype=complex)
        half = min(size, self.size) // 2
        resampled[:, :half] = spectrum[:, :half]
        resampled[:, -half + 1:] = spectrum[:, -half + 1:]
        if size > self.size:
            # split the Nyquist mode of the coarse grid symmetrically
            resampled[:, half] = spectrum[:, half] / 2
            resampled[:, -half] = spectrum[:, half] / 2

        samples = np.fft.ifft(resampled, axis=-1) * (size / self.size)
        if not self.is_complex:
            samples = samples.real

        return GridFunction(samples, self.length)

    def allclose(self, other: 'GridFunction', atol: Real = 1e-10) -> bool:
        self._check_compatible(other)
        return bool(np.allclose(self.samples, other.samples, rtol=0, atol=atol))

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Write the fields as CSV with the header ``x,comp1,comp2,...`` (atomically)."""
        if self.is_complex:
            raise ValueError('complex fields must be split into real components before export')

        header = ','.join(['x'] + ['comp%d' % (index + 1) for index in range(self.components)])
        buffer = io.StringIO()
        np.savetxt(buffer, np.column_stack([self.x, self.samples.T]), delimiter=',',
                   header=header, comments='', fmt='%.17g')
        return atomic_write(path, buffer.getvalue())

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> 'GridFunction':
        with open(str(path), encoding='utf-8') as f:
            header = f.readline().strip().split(',')
            if header[0] != 'x' or len(header) < 2:
                raise ValueError('%s: the CSV header must be "x,comp1,..."' % path)

            table = np.loadtxt(f, delimiter=',', ndmin=2)

        if table.shape[1] != len(header):
            raise ValueError('%s: rows do not match the header' % path)

        x = table[:, 0]
        length = (x[1] - x[0]) * len(x) if len(x) > 1 else 1.0
        return cls(table[:, 1:].T, length)

    def __repr__(self):
        return '<GridFunction (components=%d, size=%d, length=%g)>' % (
            self.components, self.size, self.length)


class GridEvaluator:
    """Evaluates expressions on fixed grid data, caching the derivatives of every family."""

    __slots__ = 'data', 'anchor', 'settings', 'cache', 'monomials', 'template'

    def __init__(self, data: Mapping[str, GridFunction], anchor: str = 'zero-mean',
                 settings: Settings = DEFAULT_SETTINGS):
        if anchor not in ANCHORS:
            raise ValueError('unknown anchor "%s"' % anchor)
        if not data:
            raise ValueError('no grid data to evaluate on')

        self.data = data
        self.anchor = anchor
        self.settings = settings
        self.cache: Dict[Tuple[str, int], GridFunction] = {}
        self.monomials: Dict[Monomial, np.ndarray] = {}
        self.template = next(iter(data.values()))
        for function in data.values():
            self.template._check_compatible(function)

    def jet(self, jet: Jet) -> np.ndarray:
        try:
            field = self.data[jet.family]
        except KeyError:
            raise ValueError('no grid data assigned to family "%s"' % jet.family) from None

        if jet.component > field.components:
            raise ValueError('family "%s" has no component %d' % (jet.family, jet.component))

        key = (jet.family, jet.order)
        if key not in self.cache:
            self.cache[key] = field.derivative(jet.order)

        return self.cache[key].samples[jet.component - 1]

    def atom(self, atom: Dxi) -> np.ndarray:
        argument = GridFunction(self.expression(atom.argument), self.template.length)
        return argument.antiderivative(self.anchor, self.settings.mean_tolerance,
                                       label=str(atom)).samples[0]

    def monomial(self, monomial: Monomial) -> np.ndarray:
        """Return the cached values of a monomial with unit coefficient."""
        if monomial not in self.monomials:
            product = np.ones(self.template.size)
            for factor, power in monomial_factors(monomial):
                value = self.jet(factor) if isinstance(factor, Jet) else self.atom(factor)
                product = product * value ** power

            self.monomials[monomial] = product

        return self.monomials[monomial]

    def expression(self, expression: Expression) -> np.ndarray:
        result = np.zeros(self.template.size)
        for monomial, coefficient in expression.terms.items():
            result = result + float(coefficient) * self.monomial(monomial)

        return result


def evaluate_on_grid(expression: Expression, data: Mapping[str, GridFunction], *,
                     anchor: str = 'zero-mean',
                     settings: Settings = DEFAULT_SETTINGS) -> GridFunction:
    """
    Evaluate an expression pointwise on grid data.

    Jets are evaluated by spectral differentiation and ``Dxi`` atoms by the antiderivative with
    the given anchor.

    :param expression: the expression to evaluate
    :param data: grid data for every family occurring in the expression
    :param anchor: one of :data:`ANCHORS`
    :param settings: supplies the zero-mean tolerance
    :return: a single component grid function

    """
    assert check_argument_types()
    evaluator = GridEvaluator(data, anchor, settings)
    return GridFunction(evaluator.expression(expression), evaluator.template.length)


def evaluate_vector(vector: VectorExpression, data: Mapping[str, GridFunction], *,
                    anchor: str = 'zero-mean',
                    settings: Settings = DEFAULT_SETTINGS) -> GridFunction:
    """Evaluate every component of a vector expression (sharing the derivative cache)."""
    evaluator = GridEvaluator(data, anchor, settings)
    return GridFunction(np.array([evaluator.expression(component) for component in vector]),
                        evaluator.template.length)


def random_packets(rng: np.random.Generator, components: int, size: int = 256,
                   length: Real = 40.0, *, packets: int = 2, width: Real = 1.5,
                   amplitude: Real = 1.0) -> GridFunction:
    """
    Generate smooth random data localized in the middle of the box.

    Each component is a sum of Gaussian wave packets centred in the middle 30% of the box, so
    that the data and all its derivatives vanish to round-off near the box edges.
    """
    x = GridFunction.grid_points(size, length)
    samples = np.zeros((components, size))
    for index in range(components):
        for _ in range(packets):
            centre = rng.uniform(0.35, 0.65) * length
            wavenumber = rng.uniform(0.0, 2.0)
            phase = rng.uniform(0, 2 * np.pi)
            weight = amplitude * rng.normal()
            samples[index] += (weight * np.exp(-((x - centre) / width) ** 2) *
                               np.cos(wavenumber * (x - centre) + phase))

    return GridFunction(samples, length)


def random_periodic(rng: np.random.Generator, components: int, size: int = 256,
                    length: Real = 2 * math.pi, *, modes: int = 4, amplitude: Real = 1.0,
                    offset: Real = 0.0) -> GridFunction:
    """Generate smooth random periodic data from a few low Fourier modes."""
    x = GridFunction.grid_points(size, length)
    samples = np.full((components, size), float(offset))
    for index in range(components):
        for mode in range(1, modes + 1):
            a, b = rng.normal(size=2) * amplitude / mode ** 2
            angle = 2 * np.pi * mode * x / length
            samples[index] += a * np.cos(angle) + b * np.sin(angle)

    return GridFunction(samples, length)


def _stencil_start(index: int, size: int, points: int) -> int:
    return min(max(index - (points - 1) // 2, 0), size - points)


def _stencil_polynomials(offsets: np.ndarray) -> np.ndarray:
    # column k holds the coefficients of the interpolating polynomial of the k-th unit vector
    return polynomial.polyfit(offsets, np.eye(len(offsets)), len(offsets) - 1)


def local_interpolate(samples: np.ndarray, factor: int, points: int = 8) -> np.ndarray:
    """
    Interpolate non-periodic samples (along the last axis) onto a grid ``factor`` times finer.

    Each fine point uses the interpolating polynomial through the ``points`` nearest samples.
    """
    size = samples.shape[-1]
    if size < points:
        raise ValueError('at least %d samples are required' % points)

    basis = _stencil_polynomials(np.arange(points, dtype=float))
    weights = {}
    result = np.empty(samples.shape[:-1] + (size * factor,))
    for fine_index in range(size * factor):
        index, remainder = divmod(fine_index, factor)
        start = _stencil_start(index, size, points)
        key = (index - start, remainder)
        if key not in weights:
            weights[key] = polynomial.polyval(key[0] + remainder / factor, basis)

        result[..., fine_index] = samples[..., start:start + points] @ weights[key]

    return result


def local_derivative(samples: np.ndarray, spacing: float, points: int = 9) -> np.ndarray:
    """Differentiate non-periodic samples along the last axis with ``points``-point stencils."""
    size = samples.shape[-1]
    if size < points:
        raise ValueError('at least %d samples are required' % points)

    weights = {}
    samples = np.asarray(samples, dtype=float)
    result = np.empty_like(samples)
    for index in range(size):
        start = _stencil_start(index, size, points)
        if start not in weights:
            offsets = np.arange(start, start + points, dtype=float) - index
            basis = _stencil_polynomials(offsets)
            weights[start] = polynomial.polyval(0.0, polynomial.polyder(basis)) / spacing

        result[..., index] = samples[..., start:start + points] @ weights[start]

    return result
