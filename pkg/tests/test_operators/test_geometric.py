from fractions import Fraction

import pytest

from asphalt.integrable.api import NonlocalHierarchyMember
from asphalt.integrable.diffpoly import (
    Expression, VectorExpression, curvature_vector, is_total_derivative, parse_vector)
from asphalt.integrable.operators import (
    FlowSpec, Tail, WeaklyNonlocalOperator, composed_form, cosymplectic_H, hierarchy,
    lie_bracket, nls_square, nls_square_identity, recursion_R, skew_generators,
    skew_matrix_J12, symplectic_I)

DIMENSIONS = [2, 3, 4, 5, 6]
DIMENSION_IDS = ['n2', 'n3', 'n4', 'n5', 'n6']


def vmkdv(n: int) -> VectorExpression:
    u = curvature_vector(n)
    return curvature_vector(n, 3) + curvature_vector(n, 1).scale(u.dot(u) * Fraction(3, 2))


def test_skew_generators(parse):
    u = curvature_vector(4)
    images = skew_generators(3, u)
    assert len(images) == 3
    assert images[0] == VectorExpression([parse('u[2]'), parse('-u[1]'), 0])
    assert images[2] == VectorExpression([0, parse('u[3]', 3), parse('-u[2]', 3)])


@pytest.mark.parametrize('n', DIMENSIONS, ids=DIMENSION_IDS)
def test_recursion_on_u1(n):
    result = recursion_R(n).apply(curvature_vector(n, 1))
    assert result == vmkdv(n)
    assert result.is_local


@pytest.mark.parametrize('n', [2, 3, 4, 5], ids=DIMENSION_IDS[:4])
def test_composed_form(n):
    assert composed_form(n) == recursion_R(n)


@pytest.mark.parametrize('n', [2, 3, 4], ids=DIMENSION_IDS[:3])
def test_composed_form_from_generators(n):
    assert composed_form(n, 'J') == recursion_R(n)


@pytest.mark.parametrize('factory', [cosymplectic_H, recursion_R], ids=['H', 'R'])
def test_forms_agree(factory):
    assert factory(4, 'J') == factory(4, 'JR')


def test_unknown_form():
    exc = pytest.raises(ValueError, cosymplectic_H, 3, 'K')
    assert str(exc.value) == 'unknown form "K" (must be one of: JR, J)'


@pytest.mark.parametrize('factory', [symplectic_I, cosymplectic_H], ids=['I', 'H'])
@pytest.mark.parametrize('n', [2, 3, 4], ids=DIMENSION_IDS[:3])
def test_skew_adjoint(factory, n):
    operator = factory(n)
    assert operator.adjoint() == -operator


def test_symplectic_scalar(parse):
    u = VectorExpression([parse('u[1]')])
    expected = WeaklyNonlocalOperator(2, {(0, 0): {1: 1}}, [Tail(u, u)])
    assert symplectic_I(2) == expected


def test_cosymplectic_componentwise(parse):
    result = cosymplectic_H(3).apply(parse_vector(['P[1]', 'P[2]'], 2))
    expected = parse_vector(["P[1]'1 + u[2]*Dxi(P[1]*u[2]) - u[2]*Dxi(P[2]*u[1])",
                             "P[2]'1 + u[1]*Dxi(P[2]*u[1]) - u[1]*Dxi(P[1]*u[2])"], 2)
    assert result == expected


def test_cosymplectic_on_u():
    assert cosymplectic_H(4).apply(curvature_vector(4)) == curvature_vector(4, 1)


@pytest.mark.parametrize('factory, order', [
    (symplectic_I, 1),
    (cosymplectic_H, 1),
    (recursion_R, 2)
], ids=['I', 'H', 'R'])
def test_vanishing_curvature(parse, factory, order):
    def flatten(jet):
        if jet.family == 'u':
            return Expression()

        return Expression.jet(jet.family, jet.component, jet.order)

    result = factory(3).apply(parse_vector(['P[1]', 'P[2]'], 2))
    assert result.map(lambda component: component.substitute(flatten)) == parse_vector(
        ["P[1]'%d" % order, "P[2]'%d" % order], 2)


def test_recursion_scalar(parse):
    u = VectorExpression([parse('u[1]')])
    u1 = VectorExpression([parse("u[1]'1")])
    expected = WeaklyNonlocalOperator(2, {(0, 0): {0: parse('u[1]^2'), 2: 1}}, [Tail(u1, u)])
    assert recursion_R(2) == expected


def test_recursion_drop_square():
    difference = recursion_R(3) - recursion_R(3, drop_square=True)
    u = curvature_vector(3)
    assert difference == WeaklyNonlocalOperator(3, {(0, 0): {0: u.dot(u)},
                                                    (1, 1): {0: u.dot(u)}})


def test_nls_square_identity():
    assert nls_square_identity()


def test_nls_square_on_u1():
    u1 = curvature_vector(3, 1)
    assert nls_square().apply(u1) == recursion_R(3).apply(u1)


def test_nls_square_on_constant():
    vector = VectorExpression([1, 0])
    assert nls_square().apply(vector) == recursion_R(3).apply(vector)


def test_j12_dimension():
    exc = pytest.raises(ValueError, skew_matrix_J12, 4)
    assert str(exc.value) == 'J_12 is the complex structure of a two component curvature ' \
                             'vector (n = 3)'


def test_hierarchy_first_members():
    members = hierarchy(3, 1)
    assert members == [curvature_vector(3, 1), vmkdv(3)]


def test_hierarchy_zero_steps():
    assert hierarchy(2, 0) == [curvature_vector(2, 1)]


def test_hierarchy_scalar_fifth_order(parse):
    expected = parse("u[1]'5 + 5/2*u[1]^2*u[1]'3 + 10*u[1]*u[1]'1*u[1]'2 + 5/2*u[1]'1^3 + "
                     "15/8*u[1]^4*u[1]'1", 1)
    assert hierarchy(2, 2)[2] == VectorExpression([expected])


@pytest.mark.parametrize('n', [2, 3, 4], ids=DIMENSION_IDS[:3])
def test_hierarchy_is_local(n):
    for member in hierarchy(n, 3):
        assert member.is_local


@pytest.mark.parametrize('n', [2, 3], ids=DIMENSION_IDS[:2])
def test_hierarchy_conserves_length(n):
    # d/dt int <u, u> vanishes along every member
    u = curvature_vector(n)
    for member in hierarchy(n, 2):
        assert is_total_derivative(u.dot(member))


def test_hierarchy_negative_steps():
    exc = pytest.raises(ValueError, hierarchy, 3, -1)
    assert str(exc.value) == 'the number of steps cannot be negative'


def test_nonlocal_member(monkeypatch):
    def broken(n, form='JR', drop_square=False):
        one = VectorExpression([1])
        return WeaklyNonlocalOperator(n, tails=[Tail(one, one)])

    monkeypatch.setattr('asphalt.integrable.operators.geometric.recursion_R', broken)
    exc = pytest.raises(NonlocalHierarchyMember, hierarchy, 2, 2)
    assert str(exc.value) == 'hierarchy member 2 is not local'
    assert exc.value.index == 2


def test_hierarchy_members_commute():
    members = hierarchy(3, 2)
    assert lie_bracket(members[0], members[1]).is_zero
    assert lie_bracket(members[1], members[2]).is_zero


def test_lie_bracket_nonzero(parse):
    first = VectorExpression([parse('u[1]^2', 1)])
    second = VectorExpression([parse("u[1]'2", 1)])
    assert lie_bracket(first, second) == VectorExpression([parse("-2*u[1]'1^2", 1)])


def test_lie_bracket_lengths():
    exc = pytest.raises(ValueError, lie_bracket, curvature_vector(3), curvature_vector(4))
    assert str(exc.value) == 'vector lengths differ (2 != 3)'


def test_flow_vmkdv():
    flow = FlowSpec(curvature_vector(4, 1))
    assert flow.n == 4
    assert flow.velocity() == vmkdv(4)
    u = curvature_vector(4)
    assert flow.tangential == u.dot(u) * Fraction(1, 2)


def test_flow_constant_curvature():
    flow = FlowSpec(curvature_vector(3, 1), 2)
    assert flow.velocity() == vmkdv(3) - curvature_vector(3, 1).scale(2)


def test_flow_frame_velocity(parse):
    flow = FlowSpec(curvature_vector(3, 1))
    assert flow.normal_frame_velocity() == parse_vector(
        ["u[1]'2 + 1/2*<u,u>*u[1]", "u[2]'2 + 1/2*<u,u>*u[2]"], 2)


def test_flow_tangential_atom(parse):
    flow = FlowSpec(VectorExpression([1, 0]))
    assert flow.tangential == parse('Dxi(u[1])')
