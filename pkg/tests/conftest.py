import pytest

from src.algebra.exactlin import Field, LinMap, VecSpace
from src.algebra.groups import cyclic, symmetric


@pytest.fixture
def f2():
    return Field(2)


@pytest.fixture
def f3():
    return Field(3)


@pytest.fixture
def q():
    return Field(0)


@pytest.fixture
def c3():
    return cyclic(3)


@pytest.fixture
def s3():
    return symmetric(3)


def linmap(fld, rows, cols, data):
    """Map k^cols -> k^rows from row-major entries"""
    return LinMap(VecSpace.standard(fld, cols), VecSpace.standard(fld, rows), fld.matrix(data, (rows, cols)))
