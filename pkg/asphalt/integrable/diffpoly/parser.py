"""
Text format of differential polynomials.

Expressions are written with ``+``, ``-``, ``*``, ``^`` (integer powers), parentheses,
rational literals such as ``3/2``, jets and ``Dxi(...)``. ``u[2]'3`` is the third x-derivative
of the second component of ``u`` (families ``u``, ``P``, ``Q`` and ``h``) and ``<u,u'1>`` is a
shorthand for the pairing ``u[1]*u[1]'1 + ... + u[m]*u[m]'1`` which needs the vector length.

Jets and pairings are rewritten to sympy names before the text is handed to
:func:`~sympy.parsing.sympy_parser.parse_expr`. :func:`format_expression` prints the canonical
form, which parses back to an equal expression.
"""
import re
from tokenize import TokenError
from typing import Dict, List, Optional

import sympy
from sympy.parsing.sympy_parser import auto_number, convert_xor, parse_expr

from asphalt.integrable.diffpoly.expressions import Dxi, Expression, VectorExpression
from asphalt.integrable.diffpoly.jets import Jet

__all__ = ('parse_expression', 'format_expression', 'parse_vector', 'format_vector')

jet_re = re.compile(r"(?P<family>[uPQh])\[(?P<component>\d+)\](?:'(?P<order>\d+))?")
pairing_re = re.compile(r"<\s*(?P<first>[uPQh])(?:'(?P<first_order>\d+))?\s*,\s*"
                        r"(?P<second>[uPQh])(?:'(?P<second_order>\d+))?\s*>")
invalid_re = re.compile(r"[^\w\s\[\]'+\-*/^()<>,]")
name_re = re.compile(r'[A-Za-z_]\w*')

transformations = (auto_number, convert_xor)
parser_globals = {'Integer': sympy.Integer, 'Rational': sympy.Rational, 'Float': sympy.Float}


def _expand_pairings(text: str, length: Optional[int]) -> str:
    def pairing(match) -> str:
        if length is None:
            raise ValueError('the <,> shorthand requires the vector length')

        first_order = match.group('first_order') or '0'
        second_order = match.group('second_order') or '0'
        terms = ["%s[%d]'%s*%s[%d]'%s" % (match.group('first'), component, first_order,
                                          match.group('second'), component, second_order)
                 for component in range(1, length + 1)]
        return '(%s)' % ' + '.join(terms)

    return pairing_re.sub(pairing, text)


def _check_polynomial(expression: sympy.Expr, text: str) -> None:
    if expression.has(sympy.zoo, sympy.nan, sympy.oo):
        raise ValueError('zero denominator in a rational literal')

    for node in sympy.preorder_traversal(expression):
        if isinstance(node, sympy.Float):
            raise ValueError('only rational coefficients are supported in "%s"' % text)
        if isinstance(node, sympy.Pow) and not node.base.is_Number and not (
                node.exp.is_Integer and node.exp > 0):
            raise ValueError('only polynomial expressions are supported in "%s"' % text)


def parse_expression(text: str, length: int = None) -> Expression:
    """
    Parse an expression from its text form.

    :param text: the text to parse
    :param length: vector length used to expand ``<a,b>`` pairings and to bound the component
        indices of jets
    :raises ValueError: on syntax errors, unknown names and component indices out of range

    """
    invalid = invalid_re.search(text)
    if invalid:
        raise ValueError('unexpected character %r at position %d' %
                         (invalid.group(), invalid.start()))

    names: Dict[str, object] = {'Dxi': Dxi}

    def jet(match) -> str:
        symbol = Jet(match.group('family'), int(match.group('component')),
                     int(match.group('order') or 0), length).symbol
        name = '_'.join(['jet', match.group('family'), match.group('component'),
                         match.group('order') or '0'])
        names[name] = symbol
        return name

    source = jet_re.sub(jet, _expand_pairings(text, length))
    for name in name_re.findall(source):
        if name not in names:
            raise ValueError('unknown name "%s" in "%s"' % (name, text))

    try:
        expression = parse_expr(source, local_dict=names, global_dict=dict(parser_globals),
                                transformations=transformations)
    except (SyntaxError, TokenError, TypeError):
        raise ValueError('cannot parse "%s"' % text) from None

    expression = sympy.sympify(expression)
    _check_polynomial(expression, text)
    return Expression(expression)


def format_expression(expression: Expression) -> str:
    """Return the canonical text form of an expression."""
    return str(expression)


def parse_vector(lines: List[str], length: int = None) -> VectorExpression:
    """
    Parse a vector from one expression per component.

    Lines may carry the ``[k]`` component prefix written by :func:`format_vector`.
    """
    components = []
    for line in lines:
        line = line.strip()
        if not line:
            continue

        match = re.match(r'\[(\d+)\]\s+', line)
        if match:
            if int(match.group(1)) != len(components) + 1:
                raise ValueError('components are out of order at %r' % line)

            line = line[match.end():]

        components.append(parse_expression(line, length or None))

    return VectorExpression(components)


def format_vector(vector: VectorExpression) -> str:
    return str(vector) + '\n'
