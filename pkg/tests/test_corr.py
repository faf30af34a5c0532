import pytest

from src.algebra.coalg import group_function_coalgebra, path_coalgebra
from src.algebra.comod import LEFT, regular, simple_at_grouplike, trivial_comodule
from src.algebra.contramod import free_contra
from src.algebra.corr import (CorrespondencePair, adjunction_psi_phi, derived_psi, derived_round_trip,
                              homological_dimension, phi, phi_psi_unit_counit, psi, simple_comodules)
from src.algebra.errors import CapExceeded, PreconditionError
from src.algebra.exactlin import VecSpace
from src.algebra.groups import cyclic


@pytest.fixture
def path(f2):
    return path_coalgebra(f2)


@pytest.fixture
def pair(path):
    return CorrespondencePair(path)


def test_functor_dimensions(path, f2):
    assert psi(regular(path)).dim == path.dim
    assert phi(free_contra(path, VecSpace.standard(f2, 1))).dim == path.dim


def test_unit_and_counit_are_isomorphisms(path, pair, f2):
    counit = phi_psi_unit_counit(regular(path), pair)
    assert counit
    assert counit.witness['kind'] == 'counit'
    unit = phi_psi_unit_counit(free_contra(path, VecSpace.standard(f2, 2)), pair)
    assert unit
    assert unit.witness['dim'] == 6


def test_unit_counit_needs_injective(path, pair, f2):
    with pytest.raises(PreconditionError):
        phi_psi_unit_counit(simple_at_grouplike(path, [1, 0, 0], LEFT), pair)


def test_psi_phi_adjunction(path, pair, f2):
    verdict = adjunction_psi_phi(free_contra(path, VecSpace.standard(f2, 1)), regular(path), pair)
    assert verdict
    assert verdict.witness['hom_dim'] == 3


def test_simple_comodules_of_path_coalgebra(path):
    simples = simple_comodules(path)
    assert sorted(s.dim for s in simples) == [1, 1]


def test_homological_dimension(path, f2, c3):
    assert homological_dimension(path, 3).value == 1
    assert homological_dimension(path, 3).exact
    semisimple = homological_dimension(group_function_coalgebra(c3, f2), 3)
    assert (semisimple.value, semisimple.exact) == (0, True)
    modular = homological_dimension(group_function_coalgebra(cyclic(2), f2), 3)
    assert not modular.exact
    assert str(modular) == '≥ 3'


def test_derived_psi_of_noninjective_simple(path, pair):
    simple = simple_at_grouplike(path, [1, 0, 0], LEFT)
    cx = derived_psi(simple, 2, pair)
    assert sum(cx.homology_dims().values()) >= 1


def test_derived_round_trips(path, pair, f2):
    assert derived_round_trip(simple_at_grouplike(path, [1, 0, 0], LEFT), 3, pair)
    assert derived_round_trip(free_contra(path, VecSpace.standard(f2, 1)), 3, pair)


def test_round_trip_needs_a_finite_resolution(f2):
    c2 = group_function_coalgebra(cyclic(2), f2)
    assert derived_round_trip(regular(c2), 2)
    with pytest.raises(CapExceeded):
        derived_round_trip(trivial_comodule(c2), 2)


def test_round_trip_through_unit_and_counit(path, pair, f2):
    simple = simple_at_grouplike(path, [1, 0, 0], LEFT)
    counit = derived_round_trip(simple, 3, pair)
    assert counit.witness['kind'] == 'counit'
    assert counit.witness['length'] >= 1
    assert counit.witness['support'] == [0]
    unit = derived_round_trip(free_contra(path, VecSpace.standard(f2, 2)), 3, pair)
    assert unit.witness['kind'] == 'unit' and unit.witness['length'] == 0
