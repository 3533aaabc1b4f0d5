import re
from functools import lru_cache
from typing import Optional, Tuple

import sympy

from asphalt.integrable.api import MaxOrderExceeded

__all__ = ('FAMILIES', 'Jet')

#: Dependent variable families in their canonical order: the curvature vector ``u`` and the
#: formal vectors used for linearizations and operator identities
FAMILIES = ('u', 'P', 'Q', 'h')

symbol_name_re = re.compile(r"(?P<family>[uPQh])\[(?P<component>\d+)\](?:'(?P<order>\d+))?$")


class Jet:
    """
    A component of a dependent vector together with a number of x-derivatives.

    Every jet is represented in sympy by the symbol named after its text form (``u[2]'3``), see
    :attr:`symbol` and :meth:`from_symbol`.

    :param family: one of :data:`FAMILIES`
    :param component: 1-based component index
    :param order: number of x-derivatives
    :param length: if given, the number of components of the vector (larger component indices
        are rejected)
    """

    __slots__ = 'family', 'component', 'order', '_key', '_symbol'

    def __init__(self, family: str, component: int, order: int = 0,
                 length: Optional[int] = None):
        if family not in FAMILIES:
            raise ValueError('unknown family "%s"' % family)
        if component < 1:
            raise ValueError('component indices start from 1')
        if length is not None and component > length:
            raise ValueError('component %d exceeds the vector length %d' % (component, length))
        if order < 0:
            raise ValueError('the derivative order cannot be negative')

        self.family = family
        self.component = component
        self.order = order
        self._key = (FAMILIES.index(family), component, order)
        self._symbol = None

    @classmethod
    def from_symbol(cls, symbol: sympy.Symbol) -> 'Jet':
        """Return the jet represented by a sympy symbol."""
        return _jet_for_name(symbol.name)

    @property
    def symbol(self) -> sympy.Symbol:
        if self._symbol is None:
            self._symbol = sympy.Symbol(str(self))
        return self._symbol

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        return self._key

    def derivative(self, max_order: int) -> 'Jet':
        if self.order + 1 > max_order:
            raise MaxOrderExceeded(self, max_order)

        return Jet(self.family, self.component, self.order + 1)

    def with_family(self, family: str) -> 'Jet':
        return Jet(family, self.component, self.order)

    def __eq__(self, other):
        return isinstance(other, Jet) and self._key == other._key

    def __lt__(self, other: 'Jet'):
        return self._key < other._key

    def __hash__(self):
        return hash(self._key)

    def __str__(self):
        if self.order:
            return "%s[%d]'%d" % (self.family, self.component, self.order)
        return '%s[%d]' % (self.family, self.component)

    def __repr__(self):
        return 'Jet(%r, %d, %d)' % (self.family, self.component, self.order)


@lru_cache(maxsize=None)
def _jet_for_name(name: str) -> Jet:
    match = symbol_name_re.match(name)
    if not match:
        raise ValueError('symbol "%s" does not name a jet' % name)

    return Jet(match.group('family'), int(match.group('component')),
               int(match.group('order') or 0))
