"""
Canonical differential polynomials with exact rational coefficients, built on sympy.

An :class:`Expression` wraps a fully expanded sympy expression in the jet symbols (see
:attr:`~asphalt.integrable.diffpoly.jets.Jet.symbol`) and :class:`Dxi` atoms. A ``Dxi`` atom is
the formal antiderivative of a single local monomial with unit coefficient: since ``Dxi`` is
linear, atoms over sums are always split monomial by monomial and the coefficients pulled out.
Together with the expansion this makes the sympy expression canonical, so equality of
expressions is structural equality of their sympy forms.
"""
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Callable, Dict, Iterable, Iterator, List, Sequence, Tuple, Union

import sympy

from asphalt.integrable.api import DEFAULT_SETTINGS, NonlocalDepthError
from asphalt.integrable.diffpoly.jets import FAMILIES, Jet

__all__ = ('Monomial', 'Dxi', 'Expression', 'VectorExpression', 'total_derivative', 'inner',
           'curvature_vector', 'formal_vector', 'monomial_factors', 'monomial_key',
           'format_monomial')

#: A product of jet symbols and :class:`Dxi` atoms with unit coefficient (``1`` for constants)
Monomial = sympy.Expr
Factor = Union[Jet, 'Dxi']


class Dxi(sympy.Function):
    """
    The formal antiderivative ``Dxi(m)`` of a single local monomial ``m``.

    Atoms are created through :meth:`Expression.dxi` (or by canonicalizing an expression),
    which distributes ``Dxi`` over sums and pulls the coefficients out, so two atoms are equal
    exactly when their monomials are.
    """

    nargs = 1

    @property
    def monomial(self) -> Monomial:
        return self.args[0]

    @property
    def argument(self) -> 'Expression':
        return Expression(self.args[0])

    @property
    def atom_key(self) -> tuple:
        return monomial_key(self.args[0])

    def __str__(self):
        return 'Dxi(%s)' % (format_monomial(self.args[0]) or '1')

    __repr__ = __str__


def _factor_key(factor: Factor) -> tuple:
    if isinstance(factor, Jet):
        return (0,) + factor.sort_key
    return (1,) + factor.atom_key


@lru_cache(maxsize=None)
def monomial_factors(monomial: Monomial) -> Tuple[Tuple[Factor, int], ...]:
    """Return the ``(factor, power)`` pairs of a monomial in canonical order."""
    factors = []
    for base, power in monomial.as_powers_dict().items():
        if base.is_Number:
            continue
        if isinstance(base, Dxi):
            factors.append((base, int(power)))
        else:
            factors.append((Jet.from_symbol(base), int(power)))

    return tuple(sorted(factors, key=lambda item: _factor_key(item[0])))


def monomial_key(monomial: Monomial) -> tuple:
    """Graded lexicographic key: total degree first, then the factors and powers."""
    factors = monomial_factors(monomial)
    degree = sum(power for _, power in factors)
    return degree, tuple((_factor_key(factor), power) for factor, power in factors)


def format_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return '%d/%d' % (value.numerator, value.denominator)


def format_monomial(monomial: Monomial) -> str:
    parts = []
    for factor, power in monomial_factors(monomial):
        text = str(factor)
        parts.append(text if power == 1 else '%s^%d' % (text, power))

    return '*'.join(parts)


def to_sympy_rational(value) -> sympy.Rational:
    if isinstance(value, sympy.Rational):
        return value
    if isinstance(value, Rational):
        return sympy.Rational(value.numerator, value.denominator)

    raise TypeError('cannot convert %s to a rational number' % type(value).__name__)


def to_fraction(value: sympy.Rational) -> Fraction:
    return Fraction(int(value.p), int(value.q))


def _split_atom(argument: sympy.Expr) -> sympy.Expr:
    terms = []
    for term in sympy.Add.make_args(sympy.expand(argument)):
        coefficient, monomial = term.as_coeff_Mul()
        if coefficient == 0:
            continue
        if monomial.has(Dxi):
            raise NonlocalDepthError(format_monomial(monomial))

        terms.append(coefficient * Dxi(monomial))

    return sympy.Add(*terms)


def _is_split(atom: Dxi) -> bool:
    coefficient, monomial = atom.args[0].as_coeff_Mul()
    return coefficient == 1 and not monomial.is_Add and not monomial.has(Dxi)


def canonicalize(expression: sympy.Expr) -> sympy.Expr:
    """Expand an expression and split every ``Dxi`` atom over its argument."""
    expression = sympy.expand(sympy.sympify(expression))
    if not all(_is_split(atom) for atom in expression.atoms(Dxi)):
        expression = sympy.expand(expression.replace(Dxi, _split_atom))

    return expression


class Expression:
    """
    An immutable differential polynomial with rational coefficients.

    :param expression: a sympy expression (or number) in jet symbols and :class:`Dxi` atoms
    """

    __slots__ = 'expr', '_terms'

    def __init__(self, expression=sympy.S.Zero):
        self.expr = canonicalize(expression)
        self._terms = None

    @classmethod
    def _canonical(cls, expression: sympy.Expr) -> 'Expression':
        instance = cls.__new__(cls)
        instance.expr = expression
        instance._terms = None
        return instance

    @classmethod
    def from_terms(cls, terms: Dict[Monomial, Union[Rational, sympy.Rational]]) -> 'Expression':
        """Build an expression from a mapping of monomials to coefficients."""
        return cls(sympy.Add(*[to_sympy_rational(coefficient) * monomial
                               for monomial, coefficient in terms.items()]))

    @classmethod
    def constant(cls, value) -> 'Expression':
        return cls._canonical(to_sympy_rational(value))

    @classmethod
    def jet(cls, family: str, component: int, order: int = 0,
            length: int = None) -> 'Expression':
        return cls._canonical(Jet(family, component, order, length).symbol)

    @classmethod
    def coerce(cls, value) -> 'Expression':
        if isinstance(value, Expression):
            return value
        if isinstance(value, (Rational, sympy.Rational)):
            return cls.constant(value)

        raise TypeError('cannot convert %s to an Expression' % type(value).__name__)

    @classmethod
    def dxi(cls, argument: 'Expression') -> 'Expression':
        """
        Return the formal antiderivative of a local expression, one atom per monomial.

        No attempt is made to integrate: see
        :func:`~asphalt.integrable.diffpoly.calculus.antiderivative` for that.
        """
        return cls._canonical(_split_atom(argument.expr))

    # Inspection

    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        """Mapping of monomials to their (nonzero) coefficients."""
        if self._terms is None:
            terms = {}
            if self.expr != 0:
                for term in sympy.Add.make_args(self.expr):
                    coefficient, monomial = term.as_coeff_Mul()
                    terms[monomial] = to_fraction(coefficient)

            self._terms = terms

        return self._terms

    def __iter__(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(sorted(self.terms.items(), key=lambda item: monomial_key(item[0])))

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return self.expr != 0

    @property
    def is_zero(self) -> bool:
        return self.expr == 0

    @property
    def is_local(self) -> bool:
        return not self.expr.has(Dxi)

    @property
    def is_constant(self) -> bool:
        return bool(self.expr.is_Number)

    @property
    def constant_term(self) -> Fraction:
        return self.terms.get(sympy.S.One, Fraction(0))

    def jets(self) -> set:
        """Return every jet occurring in the expression, inside atoms included."""
        return {Jet.from_symbol(symbol) for symbol in self.expr.free_symbols}

    def atoms(self) -> set:
        return set(self.expr.atoms(Dxi))

    def families(self) -> set:
        return {jet.family for jet in self.jets()}

    def max_order(self) -> int:
        return max((jet.order for jet in self.jets()), default=0)

    def degree(self) -> int:
        return max((sum(power for _, power in monomial_factors(monomial))
                    for monomial in self.terms), default=0)

    def homogeneous_parts(self) -> Dict[int, 'Expression']:
        """Split into parts of equal total degree in the jets (atoms count as degree 0)."""
        parts: Dict[int, List[sympy.Expr]] = {}
        for term in sympy.Add.make_args(self.expr):
            if term == 0:
                continue

            monomial = term.as_coeff_Mul()[1]
            degree = sum(power for factor, power in monomial_factors(monomial)
                         if isinstance(factor, Jet))
            parts.setdefault(degree, []).append(term)

        return {degree: Expression._canonical(sympy.Add(*terms))
                for degree, terms in parts.items()}

    # Arithmetic

    def __add__(self, other):
        try:
            other = Expression.coerce(other)
        except TypeError:
            return NotImplemented

        return Expression._canonical(self.expr + other.expr)

    __radd__ = __add__

    def __neg__(self):
        return Expression._canonical(-self.expr)

    def __sub__(self, other):
        try:
            other = Expression.coerce(other)
        except TypeError:
            return NotImplemented

        return Expression._canonical(self.expr - other.expr)

    def __rsub__(self, other):
        return Expression.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (Rational, sympy.Rational)):
            return Expression._canonical(sympy.expand(self.expr * to_sympy_rational(other)))
        if not isinstance(other, Expression):
            return NotImplemented

        return Expression._canonical(sympy.expand(self.expr * other.expr))

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented

        return Expression._canonical(sympy.expand(self.expr ** exponent))

    def __eq__(self, other):
        if isinstance(other, (Rational, sympy.Rational)):
            other = Expression.constant(other)
        if not isinstance(other, Expression):
            return NotImplemented

        return self.expr == other.expr

    def __hash__(self):
        return hash(self.expr)

    # Structural maps

    def _masked(self) -> Tuple[sympy.Expr, Dict[Dxi, sympy.Dummy]]:
        # atoms become independent generators: jets inside them are held constant
        dummies = {atom: sympy.Dummy() for atom in self.expr.atoms(Dxi)}
        return self.expr.xreplace(dummies), dummies

    def map_factors(self, derive: Callable[[Factor], 'Expression']) -> 'Expression':
        """
        Apply the derivation defined by ``derive`` on the factors (Leibniz rule).

        :param derive: returns the image of a single factor (a :class:`Jet` or a :class:`Dxi`
            atom)
        """
        masked, dummies = self._masked()
        generators = [(symbol, Jet.from_symbol(symbol)) for symbol in masked.free_symbols
                      if symbol not in dummies.values()]
        generators.extend((dummy, atom) for atom, dummy in dummies.items())
        result = sympy.S.Zero
        for symbol, factor in generators:
            image = derive(factor)
            if not image.is_zero:
                result += sympy.diff(masked, symbol) * image.expr

        restore = {dummy: atom for atom, dummy in dummies.items()}
        return Expression(result.xreplace(restore))

    def partial(self, jet: Jet) -> 'Expression':
        """Partial derivative with respect to a jet variable (atoms are held constant)."""
        masked, dummies = self._masked()
        restore = {dummy: atom for atom, dummy in dummies.items()}
        return Expression._canonical(sympy.diff(masked, jet.symbol).xreplace(restore))

    def substitute(self, replace: Callable[[Jet], 'Expression']) -> 'Expression':
        """Replace every jet (also inside atoms) by an expression; atoms are rebuilt."""
        mapping = {symbol: replace(Jet.from_symbol(symbol)).expr
                   for symbol in self.expr.free_symbols}
        return Expression(self.expr.xreplace(mapping))

    def __str__(self):
        if self.is_zero:
            return '0'

        text = ''
        for monomial, coefficient in self:
            sign = '-' if coefficient < 0 else '+'
            magnitude = abs(coefficient)
            body = format_monomial(monomial)
            if not body:
                body = format_fraction(magnitude)
            elif magnitude != 1:
                body = '%s*%s' % (format_fraction(magnitude), body)

            if not text:
                text = '-' + body if sign == '-' else body
            else:
                text += ' %s %s' % (sign, body)

        return text

    def __repr__(self):
        return "Expression('%s')" % self


def total_derivative(expression: Expression, max_order: int = None) -> Expression:
    """
    Return ``Dx`` applied to the expression.

    Jets gain one derivative, ``Dx(Dxi(f)) = f``.

    :raises ~asphalt.integrable.api.MaxOrderExceeded: if a jet would exceed ``max_order``
    """
    max_order = DEFAULT_SETTINGS.max_order if max_order is None else max_order

    def derive(factor):
        if isinstance(factor, Jet):
            return Expression._canonical(factor.derivative(max_order).symbol)
        return factor.argument

    return expression.map_factors(derive)


class VectorExpression:
    """
    A vector of ``n - 1`` expressions.

    :param components: the component expressions (numbers are converted)
    """

    __slots__ = 'components'

    def __init__(self, components: Iterable):
        self.components = tuple(Expression.coerce(component) for component in components)
        if not self.components:
            raise ValueError('a vector expression needs at least one component')

    @classmethod
    def zero(cls, length: int) -> 'VectorExpression':
        return cls([Expression()] * length)

    @classmethod
    def unit(cls, length: int, index: int, value=1) -> 'VectorExpression':
        return cls([Expression.coerce(value) if i == index else Expression()
                    for i in range(length)])

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, index):
        return self.components[index]

    def _check_length(self, other: 'VectorExpression'):
        if len(other) != len(self):
            raise ValueError('vector lengths differ (%d != %d)' % (len(self), len(other)))

    def __add__(self, other: 'VectorExpression'):
        self._check_length(other)
        return VectorExpression(a + b for a, b in zip(self, other))

    def __sub__(self, other: 'VectorExpression'):
        self._check_length(other)
        return VectorExpression(a - b for a, b in zip(self, other))

    def __neg__(self):
        return VectorExpression(-a for a in self)

    def scale(self, factor) -> 'VectorExpression':
        factor = Expression.coerce(factor)
        return VectorExpression(factor * a for a in self)

    __rmul__ = scale

    def dot(self, other: 'VectorExpression') -> Expression:
        self._check_length(other)
        return inner(self.components, other.components)

    def derivative(self, max_order: int = None) -> 'VectorExpression':
        return VectorExpression(total_derivative(a, max_order) for a in self)

    def map(self, function: Callable[[Expression], Expression]) -> 'VectorExpression':
        return VectorExpression(function(a) for a in self)

    @property
    def is_local(self) -> bool:
        return all(a.is_local for a in self)

    @property
    def is_zero(self) -> bool:
        return all(a.is_zero for a in self)

    def __eq__(self, other):
        return isinstance(other, VectorExpression) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __str__(self):
        return '\n'.join('[%d] %s' % (index, component)
                         for index, component in enumerate(self, start=1))

    def __repr__(self):
        return 'VectorExpression([%s])' % ', '.join("'%s'" % a for a in self)


def formal_vector(family: str, length: int, order: int = 0) -> VectorExpression:
    """Return ``(f[1], ..., f[length])`` differentiated ``order`` times."""
    if family not in FAMILIES:
        raise ValueError('unknown family "%s"' % family)

    return VectorExpression(Expression.jet(family, component, order)
                            for component in range(1, length + 1))


def curvature_vector(n: int, order: int = 0) -> VectorExpression:
    """Return the curvature vector ``u`` (or its derivative) of a curve in ``n`` dimensions."""
    if n < 2:
        raise ValueError('the ambient dimension must be at least 2')

    return formal_vector('u', n - 1, order)


def inner(first: Sequence[Expression], second: Sequence[Expression]) -> Expression:
    """Return the Euclidean pairing of two vectors of expressions."""
    if len(first) != len(second):
        raise ValueError('vector lengths differ (%d != %d)' % (len(first), len(second)))

    return Expression._canonical(sympy.expand(sympy.Add(*[a.expr * b.expr
                                                          for a, b in zip(first, second)])))


def as_vector(values: List) -> VectorExpression:
    return values if isinstance(values, VectorExpression) else VectorExpression(values)
