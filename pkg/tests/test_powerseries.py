import numpy as np
import pytest

from src.algebra.errors import EngineError
from src.towers.powerseries import (TorsionModule, TruncatedSeriesRing, module_from_relations, polynomial_matrix,
                                    presentation_quotient, smith_form, verify_smith)


def test_series_arithmetic(f2):
    ring = TruncatedSeriesRing(f2, 4)
    unit = ring.element([1, 1])
    inverse = ring.inverse_unit(unit)
    assert list(inverse) == [1, 1, 1, 1]
    assert np.array_equal(ring.mul(unit, inverse), ring.one())
    assert ring.valuation(ring.t_power(2)) == 2
    assert ring.valuation(ring.zero()) is None
    assert ring.is_zero(ring.t_power(4))
    with pytest.raises(EngineError):
        ring.inverse_unit(ring.t_power(1))


def test_smith_form_certificate(f3):
    ring = TruncatedSeriesRing(f3, 5)
    mat = polynomial_matrix(ring, [[[0, 1], [0, 0, 1]], [[0, 0, 1], [1]]])
    form = smith_form(ring, mat)
    assert form.exponents == [1]
    assert form.free_rank == 0
    assert form.is_finite_length
    assert form.minimal_generators == 1
    assert verify_smith(ring, mat, form)


def test_smith_form_with_free_part(f2):
    ring = TruncatedSeriesRing(f2, 4)
    mat = polynomial_matrix(ring, [[[0, 0, 1]], [[0]]])
    form = smith_form(ring, mat)
    assert form.exponents == [2]
    assert form.free_rank == 1
    assert not form.is_finite_length


def test_exponents_from_jordan_type(f2):
    m = TorsionModule.from_exponents(f2, [3, 1])
    assert m.dim == 4
    assert m.jordan_type() == (2, 1, 0)
    assert m.exponents() == [1, 3]
    assert m.nilpotency_index() == 3
    assert m.is_isomorphic(TorsionModule.from_exponents(f2, [1, 3]))
    assert not m.is_isomorphic(TorsionModule.from_exponents(f2, [2, 2]))


def test_submodule_and_quotient(f2):
    m = TorsionModule.from_exponents(f2, [3])
    sub, basis = m.submodule(m.power_image(1))
    assert sub.exponents() == [2]
    top, proj = m.quotient(basis)
    assert top.exponents() == [1]
    assert proj.shape == (1, 3)


def test_presentation_quotient(f2):
    ring = TruncatedSeriesRing(f2, 4)
    quotient, proj = presentation_quotient(ring, polynomial_matrix(ring, [[[0, 0, 1]]]))
    assert quotient.exponents() == [2]
    assert proj.shape == (2, 4)


def test_two_variable_modules(f2):
    free = TorsionModule.truncated_free(f2, 2, 2)
    assert free.dim == 3
    assert free.nilpotency_index() == 2
    assert free.power_image(1).shape[1] == 2
    cyclic = module_from_relations(f2, 2, 3, [{(1, 0): 1, (0, 1): 1}])
    assert cyclic.dim == 3
    with pytest.raises(EngineError):
        free.is_isomorphic(cyclic)
