import numpy as np
import pytest

from src.algebra.coalg import group_function_coalgebra, path_coalgebra
from src.algebra.comod import (RIGHT, check_comodule, cofree, cofree_right, comodule_hom, cotensor, direct_sum,
                               from_operators, injective_coresolution, is_injective_comodule, quotient_comodule,
                               regular, simple_at_grouplike, subcomodule, trivial_comodule)
from src.algebra.errors import CapExceeded, EngineError
from src.algebra.exactlin import VecSpace
from src.algebra.groups import cyclic


@pytest.fixture
def path(f2):
    return path_coalgebra(f2)


@pytest.fixture
def c2(f2):
    return group_function_coalgebra(cyclic(2), f2)


def test_regular_and_cofree_are_comodules(path, f2):
    assert check_comodule(regular(path))
    assert check_comodule(cofree(path, VecSpace.standard(f2, 2)))
    assert check_comodule(cofree_right(path, VecSpace.standard(f2, 1)))


def test_broken_coaction_is_reported(path):
    m = regular(path)
    ops = [op.copy() for op in m.rep.ops]
    ops[0][0, 0] ^= 1
    assert not check_comodule(from_operators(path, ops))


def test_regular_endomorphisms_match_dual_algebra(f2, c3):
    c = group_function_coalgebra(c3, f2)
    assert comodule_hom(regular(c), regular(c)).dim == 3


def test_cotensor_with_regular_is_identity(f2, c3):
    c = group_function_coalgebra(c3, f2)
    assert cotensor(cofree_right(c, VecSpace.standard(f2, 1)), regular(c)).dim == 3


def test_cotensor_needs_right_then_left(path):
    with pytest.raises(EngineError):
        cotensor(regular(path), regular(path))


def test_sub_and_quotient(path, f2):
    m = regular(path)
    v0 = f2.matrix([[1], [0], [0]], (3, 1))
    sub = subcomodule(m, v0)
    assert sub.dim == 1 and check_comodule(sub)
    quotient, proj = quotient_comodule(m, v0)
    assert quotient.dim == 2
    assert m.is_morphism(quotient, proj)


def test_non_subcomodule_is_rejected(path, f2):
    arrow = f2.matrix([[0], [0], [1]], (3, 1))
    with pytest.raises(EngineError):
        quotient_comodule(regular(path), arrow)


def test_injectivity(path, f2):
    assert is_injective_comodule(regular(path))
    assert is_injective_comodule(simple_at_grouplike(path, [0, 1, 0]))
    assert not is_injective_comodule(simple_at_grouplike(path, [1, 0, 0]))


def test_coresolution_over_hereditary_coalgebra(path):
    res = injective_coresolution(simple_at_grouplike(path, [1, 0, 0]), 4)
    assert res.length == 1
    assert res.term_dims == [3, 2]
    assert res.complex.homology_dims() == {0: 1}
    assert injective_coresolution(simple_at_grouplike(path, [0, 1, 0]), 4).length == 0


def test_coresolution_hits_cap_in_modular_case(c2):
    with pytest.raises(CapExceeded):
        injective_coresolution(trivial_comodule(c2), 3)


def test_direct_sum_side_mismatch(path, f2):
    with pytest.raises(EngineError):
        direct_sum([regular(path), regular(path, RIGHT)])
    total = direct_sum([regular(path), simple_at_grouplike(path, [0, 1, 0])])
    assert total.dim == 4
    assert check_comodule(total)
