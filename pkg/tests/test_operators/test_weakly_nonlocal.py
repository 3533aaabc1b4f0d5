import pytest

from asphalt.integrable.api import NonlocalDepthError
from asphalt.integrable.diffpoly import (
    Expression, VectorExpression, curvature_vector, evaluate_vector, formal_vector,
    random_packets)
from asphalt.integrable.operators import (
    OperatorChain, Tail, WeaklyNonlocalOperator, recursion_R, symplectic_I)


@pytest.fixture
def dxi():
    """The scalar operator Dxi."""
    one = VectorExpression([1])
    return WeaklyNonlocalOperator(2, tails=[Tail(one, one)])


@pytest.fixture
def dx():
    return WeaklyNonlocalOperator(2, {(0, 0): {1: 1}})


def test_tail_length_mismatch():
    exc = pytest.raises(ValueError, Tail, VectorExpression([1]), VectorExpression([1, 2]))
    assert str(exc.value) == 'vector lengths differ (1 != 2)'


def test_tail_bad_sign():
    vector = VectorExpression([1])
    exc = pytest.raises(ValueError, Tail, vector, vector, 2)
    assert str(exc.value) == 'sign must be 1 or -1'


def test_bad_dimension():
    exc = pytest.raises(ValueError, WeaklyNonlocalOperator, 1)
    assert str(exc.value) == 'the ambient dimension must be at least 2'


def test_index_out_of_range():
    exc = pytest.raises(ValueError, WeaklyNonlocalOperator, 3, {(2, 0): {0: 1}})
    assert str(exc.value) == 'matrix index (2, 0) is out of range'


def test_tail_wrong_size():
    vector = VectorExpression([1])
    exc = pytest.raises(ValueError, WeaklyNonlocalOperator, 3, tails=[Tail(vector, vector)])
    assert str(exc.value) == 'tail vectors must have 2 components'


def test_nonlocal_coefficient(parse):
    exc = pytest.raises(ValueError, WeaklyNonlocalOperator, 2, {(0, 0): {0: parse('Dxi(u[1])')}})
    assert str(exc.value) == 'operator coefficients must be local'


def test_zero_coefficients_dropped(parse):
    operator = WeaklyNonlocalOperator(2, {(0, 0): {0: parse('u[1]'), 2: Expression()}})
    assert operator.local == {(0, 0): {0: parse('u[1]')}}


def test_leibniz_composition(parse, dx):
    multiply = WeaklyNonlocalOperator(2, {(0, 0): {0: parse('u[1]')}})
    expected = WeaklyNonlocalOperator(2, {(0, 0): {0: parse("u[1]'1"), 1: parse('u[1]')}})
    assert dx @ multiply == expected


def test_dx_after_dxi(dx, dxi):
    identity = WeaklyNonlocalOperator(2, {(0, 0): {0: 1}})
    assert dx @ dxi == identity


def test_dxi_after_dx(dx, dxi):
    identity = WeaklyNonlocalOperator(2, {(0, 0): {0: 1}})
    assert dxi @ dx == identity


def test_tail_after_tail_integrable(parse):
    # u Dxi u'1 Dxi: the middle factor is a total derivative
    u = VectorExpression([parse('u[1]')])
    u1 = VectorExpression([parse("u[1]'1")])
    one = VectorExpression([1])
    first = WeaklyNonlocalOperator(2, tails=[Tail(one, u1)])
    second = WeaklyNonlocalOperator(2, tails=[Tail(one, one)])
    expected = WeaklyNonlocalOperator(2, tails=[Tail(u, one), Tail(one, u, -1)])
    assert first @ second == expected


def test_tail_after_tail_too_deep(parse):
    u = VectorExpression([parse('u[1]')])
    operator = WeaklyNonlocalOperator(2, tails=[Tail(u, u)])
    exc = pytest.raises(NonlocalDepthError, operator.compose, operator)
    assert str(exc.value) == 'nested Dxi is not supported (argument: Dxi(u[1]^2*Dxi(u[1])))'


def test_local_adjoint(parse):
    operator = WeaklyNonlocalOperator(2, {(0, 0): {1: parse('u[1]')}})
    expected = WeaklyNonlocalOperator(2, {(0, 0): {0: parse("-u[1]'1"), 1: parse('-u[1]')}})
    assert operator.adjoint() == expected


def test_matrix_adjoint_transposes(parse):
    operator = WeaklyNonlocalOperator(3, {(0, 1): {0: parse('u[2]')}})
    assert operator.adjoint() == WeaklyNonlocalOperator(3, {(1, 0): {0: parse('u[2]')}})


def test_tail_adjoint(parse):
    a = VectorExpression([parse('u[1]'), parse("u[2]'1")])
    b = VectorExpression([parse('u[2]^2'), 1])
    operator = WeaklyNonlocalOperator(3, tails=[Tail(a, b)])
    assert operator.adjoint() == WeaklyNonlocalOperator(3, tails=[Tail(b, a, -1)])


def test_adjoint_is_involution():
    operator = recursion_R(4)
    assert operator.adjoint().adjoint() == operator


def test_algebra(parse, dx):
    multiply = WeaklyNonlocalOperator(2, {(0, 0): {0: parse('u[1]')}})
    total = dx + multiply
    assert total - multiply == dx
    assert (total - total).is_local
    assert total.scale(2) == total + total
    assert -total == total.scale(-1)


def test_incompatible_dimensions():
    exc = pytest.raises(ValueError, symplectic_I(3).__add__, symplectic_I(4))
    assert str(exc.value) == 'operators act on different dimensions (3 != 4)'


def test_derived_tails(parse):
    operator = symplectic_I(3) @ WeaklyNonlocalOperator(3, {(0, 0): {0: 1}, (1, 1): {0: 1}})
    u = curvature_vector(3)
    left = {tail.right: tail.left for tail in operator.tails}
    assert left[VectorExpression([parse('u[1]'), 0])] == u
    assert left[VectorExpression([0, parse('u[2]')])] == u


def test_given_tails_are_kept():
    u = curvature_vector(3)
    assert symplectic_I(3).tails == (Tail(u, u, 1),)


def test_apply_symplectic_to_u1(parse):
    result = symplectic_I(3).apply(curvature_vector(3, 1))
    expected = VectorExpression([parse("u[1]'2 + 1/2*<u,u>*u[1]"),
                                 parse("u[2]'2 + 1/2*<u,u>*u[2]")])
    assert result == expected
    assert result.is_local


def test_apply_keeps_atoms(parse):
    result = symplectic_I(3).apply(VectorExpression([1, 0]))
    assert result == VectorExpression([parse('u[1]*Dxi(u[1])'), parse('u[2]*Dxi(u[1])')])
    assert not result.is_local


def test_apply_wrong_length():
    exc = pytest.raises(ValueError, symplectic_I(3).apply, VectorExpression([1]))
    assert str(exc.value) == 'expected a vector of 2 components, got 1'


@pytest.mark.parametrize('n', [2, 3, 4], ids=['n2', 'n3', 'n4'])
def test_apply_numeric_matches_symbolic(rng, n):
    operator = recursion_R(n)
    u = random_packets(rng, n - 1)
    P = random_packets(rng, n - 1)
    symbolic = operator.apply(formal_vector('P', n - 1))
    expected = evaluate_vector(symbolic, {'u': u, 'P': P}, anchor='decaying')
    assert operator.apply_numeric(P, u).allclose(expected, 1e-9 * max(expected.max_norm(), 1))


def test_apply_numeric_wrong_components(rng):
    data = random_packets(rng, 1)
    exc = pytest.raises(ValueError, symplectic_I(3).apply_numeric, data, data)
    assert str(exc.value) == 'expected grid data with 2 components'


def test_chain_matches_normal_form(rng):
    u = random_packets(rng, 2)
    P = random_packets(rng, 2)
    chain = OperatorChain(symplectic_I(3), recursion_R(3))
    composed = symplectic_I(3) @ recursion_R(3)
    expected = composed.apply_numeric(P, u)
    assert chain.apply_numeric(P, u).allclose(expected, 1e-8 * expected.max_norm())


def test_chain_adjoint(rng):
    u = random_packets(rng, 2)
    P = random_packets(rng, 2)
    Q = random_packets(rng, 2)
    chain = OperatorChain(symplectic_I(3), symplectic_I(3))
    left = P.dot(chain.apply_numeric(Q, u)).integral()[0]
    right = chain.adjoint().apply_numeric(P, u).dot(Q).integral()[0]
    assert left == pytest.approx(right, rel=1e-9, abs=1e-9)


def test_empty_chain():
    exc = pytest.raises(ValueError, OperatorChain)
    assert str(exc.value) == 'at least one operator is required'


def test_str():
    assert str(symplectic_I(2)) == "[1,1] Dx^1\n+ (u[1]) Dxi <(u[1]), .>"


def test_repr():
    assert repr(symplectic_I(3)) == ('<WeaklyNonlocalOperator (I, n=3, local entries=2, '
                                     'kernel terms=4)>')
