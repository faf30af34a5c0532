import pytest

from src.algebra.errors import AxiomViolation, PreconditionError
from src.algebra.exactlin import LinMap, VecSpace
from src.algebra.homcx import (ChainMap, Complex, cone, homology, homology_table, is_quasi_iso, shift,
                               truncate_support)
from tests.conftest import linmap


@pytest.fixture
def two_term(f2):
    # k^2 -> k^1 by (1 1): kernel in degree -1, nothing in degree 0
    return Complex.two_term(linmap(f2, 1, 2, [1, 1]), degree=-1)


def test_homology_of_two_term(two_term):
    assert two_term.homology_dims() == {-1: 1}
    assert two_term.homology_support() == [-1]
    assert two_term.euler_characteristic() == two_term.homology_euler()


def test_d_squared_must_vanish(f2):
    d0 = linmap(f2, 1, 1, [1])
    with pytest.raises(AxiomViolation):
        Complex(f2, {0: d0.domain, 1: d0.codomain, 2: d0.codomain},
                {0: d0, 1: LinMap(d0.codomain, d0.codomain, [[1]])})


def test_zero_terms_are_dropped(f2):
    x = Complex(f2, {0: VecSpace.standard(f2, 0), 1: VecSpace.standard(f2, 2)})
    assert x.degrees() == [1]
    assert homology(x, 1).dim == 2


def test_identity_is_quasi_iso(two_term):
    assert is_quasi_iso(ChainMap.identity(two_term))


def test_zero_map_is_not_quasi_iso(two_term):
    result = is_quasi_iso(ChainMap.zero(two_term, two_term))
    assert not result
    assert result.to_dict()['degree'] == -1


def test_cone_of_identity_is_acyclic(two_term):
    assert cone(ChainMap.identity(two_term)).is_exact()


def test_chain_map_must_commute(two_term):
    with pytest.raises(AxiomViolation):
        ChainMap(two_term, two_term, {-1: LinMap.identity(two_term.space(-1))})


def test_shift_moves_homology(two_term):
    assert shift(two_term, 1).homology_dims() == {-2: 1}
    assert shift(two_term, -1).homology_dims() == {0: 1}


def test_truncation_keeps_homology(f2):
    d = linmap(f2, 1, 1, [1])
    x = Complex(f2, {-1: d.domain, 0: VecSpace.standard(f2, 2), 1: d.codomain},
                {-1: LinMap(d.domain, VecSpace.standard(f2, 2), [[1], [0]])})
    assert x.homology_dims() == {0: 1, 1: 1}
    t = truncate_support(x, 0, 1)
    assert t.homology_dims() == x.homology_dims()
    with pytest.raises(PreconditionError):
        truncate_support(x, 0, 0)


def test_homology_table_rows(two_term):
    assert homology_table(two_term) == [{'degree': -1, 'dim': 2, 'homology': 1},
                                        {'degree': 0, 'dim': 1, 'homology': 0}]
