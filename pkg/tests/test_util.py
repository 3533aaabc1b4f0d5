from fractions import Fraction

import pytest

from asphalt.integrable.util import (
    as_fraction, atomic_write, create_rng, is_power_of_two, library_version)


def test_create_rng_is_reproducible():
    assert create_rng(42).normal(size=3).tolist() == create_rng(42).normal(size=3).tolist()
    assert create_rng(1).bit_generator.__class__.__name__ == 'PCG64'


def test_create_rng_bad_seed():
    exc = pytest.raises(ValueError, create_rng, -1)
    assert str(exc.value) == 'seed must be a 64-bit unsigned integer'


@pytest.mark.parametrize('value, expected', [
    ('3/2', Fraction(3, 2)),
    ('0.25', Fraction(1, 4)),
    (0.1, Fraction(1, 10)),
    (-2, Fraction(-2)),
    (Fraction(5, 7), Fraction(5, 7))
], ids=['text', 'decimal', 'float', 'int', 'fraction'])
def test_as_fraction(value, expected):
    assert as_fraction(value) == expected


def test_as_fraction_invalid():
    exc = pytest.raises(ValueError, as_fraction, '1/0')
    assert str(exc.value) == "cannot interpret '1/0' as a rational number"


def test_atomic_write(tmp_path):
    path = atomic_write(tmp_path / 'sub' / 'data.txt', 'first')
    atomic_write(path, b'second')
    assert path.read_text('utf-8') == 'second'
    assert [child.name for child in path.parent.iterdir()] == ['data.txt']


@pytest.mark.parametrize('value, expected', [
    (1, True), (256, True), (0, False), (96, False)
], ids=['one', '256', 'zero', '96'])
def test_is_power_of_two(value, expected):
    assert is_power_of_two(value) is expected


def test_library_version():
    assert isinstance(library_version(), str)
