from fractions import Fraction

import numpy as np
import pytest

from src.algebra.errors import DimensionMismatch, FieldMismatch
from src.algebra.exactlin import (Field, LinMap, VecSpace, cokernel, curry, hom_left, hom_right, image,
                                  intersect, intertwiners, inverse, kernel, rank, solve, tensor, uncurry)
from tests.conftest import linmap


def test_field_rejects_composite_characteristic():
    with pytest.raises(ValueError):
        Field(6)


def test_scalars_reduce_mod_p(f3):
    assert f3.scalar(7) == 1
    assert f3.scalar(-1) == 2
    assert f3.inv(2) == 2


def test_rational_scalars_are_exact(q):
    assert q.inv(3) == Fraction(1, 3)
    assert str(q) == 'Q'


def test_rank_nullity(f2):
    f = linmap(f2, 2, 3, [1, 1, 0, 0, 1, 1])
    kspace, kincl = kernel(f)
    ispace, _ = image(f)
    assert rank(f) == 2
    assert kspace.dim == 1
    assert ispace.dim + kspace.dim == f.domain.dim
    assert (f @ kincl).is_zero()


def test_cokernel_kills_image(f3):
    f = linmap(f3, 3, 1, [1, 2, 0])
    cspace, proj = cokernel(f)
    assert cspace.dim == 2
    assert (proj @ f).is_zero()
    assert rank(proj) == 2


def test_solve_finds_preimage_or_none(f2):
    f = linmap(f2, 2, 2, [1, 1, 1, 1])
    x = solve(f, [1, 1])
    assert x is not None
    assert np.array_equal(f.apply(x), np.array([1, 1]))
    assert solve(f, [1, 0]) is None


def test_solve_rejects_wrong_length(f2):
    f = linmap(f2, 2, 2, [1, 0, 0, 1])
    with pytest.raises(DimensionMismatch):
        solve(f, [1, 0, 1])


def test_inverse_over_rationals(q):
    f = linmap(q, 2, 2, [2, 1, 1, 1])
    g = inverse(f)
    assert (g @ f).equals(LinMap.identity(f.domain))


def test_field_mismatch_is_reported(f2, f3):
    with pytest.raises(FieldMismatch):
        LinMap(VecSpace.standard(f2, 1), VecSpace.standard(f3, 1), [[1]])


def test_curry_uncurry_inverse(f3):
    u = VecSpace.standard(f3, 2, 'u')
    v = VecSpace.standard(f3, 3, 'v')
    w = VecSpace.standard(f3, 2, 'w')
    data = [(i * 5 + 1) % 3 for i in range(12)]
    f = LinMap(VecSpace.standard(f3, 6), w, f3.matrix(data, (2, 6)))
    g = curry(f, u, v)
    assert g.codomain.dim == 4
    assert uncurry(g, u, w).matrix.tolist() == f.matrix.tolist()


def test_hom_functoriality(f2):
    f = linmap(f2, 2, 2, [0, 1, 1, 1])
    g = linmap(f2, 2, 2, [1, 1, 0, 1])
    w = VecSpace.standard(f2, 3)
    assert hom_right(w, g @ f).equals(hom_right(w, g) @ hom_right(w, f))
    assert hom_left(g @ f, w).equals(hom_left(f, w) @ hom_left(g, w))


def test_tensor_is_kronecker(f2):
    f = linmap(f2, 1, 2, [1, 1])
    g = linmap(f2, 2, 1, [1, 0])
    t = tensor(f, g)
    assert t.shape == (2, 2)
    assert t.matrix.tolist() == [[1, 1], [0, 0]]


def test_intersect_of_coordinate_planes(f2):
    a = f2.matrix([[1, 0], [0, 1], [0, 0]], (3, 2))
    b = f2.matrix([[0, 0], [1, 0], [0, 1]], (3, 2))
    assert intersect(f2, a, b).shape[1] == 1


def test_intertwiners_of_a_permutation(f2):
    swap = f2.matrix([[0, 1], [1, 0]], (2, 2))
    basis = intertwiners(f2, [swap], [swap], 2, 2)
    # commutant of the swap: span of I and the swap
    assert basis.shape[1] == 2
