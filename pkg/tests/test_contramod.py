import pytest

from src.algebra.coalg import group_function_coalgebra, path_coalgebra
from src.algebra.comod import cofree_right, regular
from src.algebra.contramod import (adjunction_check, check_contramodule, check_module_correspondence, contra_from_dual,
                                   contra_hom, contratensor, free_contra, free_resolution, from_operators,
                                   is_projective_contramodule, module_hom_dimension, plus_part,
                                   quotient_contramodule, trivial_contramodule)
from src.algebra.errors import CapExceeded, EngineError
from src.algebra.exactlin import VecSpace
from src.algebra.groups import cyclic


@pytest.fixture
def c3_cosemisimple(f2, c3):
    return group_function_coalgebra(c3, f2)


@pytest.fixture
def c2(f2):
    return group_function_coalgebra(cyclic(2), f2)


def test_free_contramodule_axioms(f2):
    path = path_coalgebra(f2)
    p = free_contra(path, VecSpace.standard(f2, 2))
    assert p.dim == 6
    assert check_contramodule(p)
    assert check_module_correspondence(p)


def test_broken_contraaction_is_reported(c2, f2):
    p = free_contra(c2, VecSpace.standard(f2, 1))
    ops = [op.copy() for op in p.rep.ops]
    ops[0][0, 0] = (ops[0][0, 0] + 1) % 2
    broken = from_operators(c2, ops)
    assert not check_contramodule(broken)
    assert check_module_correspondence(broken)


def test_contra_hom_of_free(c3_cosemisimple, f2):
    p = free_contra(c3_cosemisimple, VecSpace.standard(f2, 1))
    assert contra_hom(p, p).dim == 3
    assert module_hom_dimension(p, p) == 3


def test_contratensor_with_free(c3_cosemisimple, f2):
    n = cofree_right(c3_cosemisimple, VecSpace.standard(f2, 1))
    p = free_contra(c3_cosemisimple, VecSpace.standard(f2, 1))
    assert contratensor(n, p).dim == 3


def test_contratensor_needs_right_comodule(c3_cosemisimple, f2):
    with pytest.raises(EngineError):
        contratensor(regular(c3_cosemisimple), free_contra(c3_cosemisimple, VecSpace.standard(f2, 1)))
    with pytest.raises(EngineError):
        contra_from_dual(regular(c3_cosemisimple), VecSpace.standard(f2, 1))


def test_hom_tensor_adjunction(c3_cosemisimple, f2):
    n = cofree_right(c3_cosemisimple, VecSpace.standard(f2, 1))
    p = free_contra(c3_cosemisimple, VecSpace.standard(f2, 1))
    verdict = adjunction_check(n, p, VecSpace.standard(f2, 2))
    assert verdict
    assert verdict.witness['hom_dim'] == 6
    assert verdict.witness['contratensor_dim'] == verdict.witness['module_tensor_dim'] == 3


def test_plus_part_and_top(c2, f2):
    p = free_contra(c2, VecSpace.standard(f2, 1))
    plus = plus_part(p)
    assert plus.shape[1] == 1
    top, proj = quotient_contramodule(p, plus)
    assert top.dim == 1
    assert p.is_morphism(top, proj)


def test_projectivity(c2, f2):
    assert is_projective_contramodule(free_contra(c2, VecSpace.standard(f2, 1)))
    assert not is_projective_contramodule(trivial_contramodule(c2))


def test_free_resolution_lengths(c2, f2):
    assert free_resolution(free_contra(c2, VecSpace.standard(f2, 1)), 2).length == 0
    with pytest.raises(CapExceeded):
        free_resolution(trivial_contramodule(c2), 3)
