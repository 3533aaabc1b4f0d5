import os
import tempfile
from fractions import Fraction
from numbers import Real
from pathlib import Path
from typing import Optional, Union

import numpy as np
from typeguard import check_argument_types

#: Name of the pseudo random generator algorithm behind every seeded run
PRNG_ALGORITHM = 'PCG64'


def create_rng(seed: Optional[int] = None) -> np.random.Generator:
    """
    Create the random generator used for all seeded data.

    :param seed: a 64-bit seed (``None`` for fresh entropy)
    :return: a :class:`numpy.random.Generator` backed by :class:`numpy.random.PCG64`

    """
    assert check_argument_types()
    if seed is not None and not 0 <= seed < 2 ** 64:
        raise ValueError('seed must be a 64-bit unsigned integer')

    return np.random.Generator(np.random.PCG64(seed))


def as_fraction(value: Union[str, Real, Fraction]) -> Fraction:
    """
    Interpret an object as an exact rational number.

    :param value: a fraction, an integer, a float (converted through its decimal
        representation) or a string like ``3/2`` or ``0.25``
    :return: the exact rational number

    """
    assert check_argument_types()
    if isinstance(value, float):
        value = repr(value)

    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ValueError('cannot interpret %r as a rational number' % value) from None


def atomic_write(path: Union[str, Path], data: Union[str, bytes]) -> Path:
    """
    Write a file so that readers never observe a partially written one.

    The data is first written to a temporary file in the target directory which is then renamed
    over the target.

    :param path: the destination path (parent directories are created as needed)
    :param data: the text (written as UTF-8) or bytes to write
    :return: the destination path

    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode('utf-8')

    fd, temp_path = tempfile.mkstemp(dir=str(path.parent), prefix='.%s.' % path.name)
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)

        os.replace(temp_path, str(path))
    except BaseException:
        os.unlink(temp_path)
        raise

    return path


def library_version() -> str:
    """Return the installed version of this library (``unknown`` if not installed)."""
    from pkg_resources import DistributionNotFound, get_distribution

    try:
        return get_distribution('asphalt-integrable').version
    except DistributionNotFound:
        return 'unknown'


def is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0
