import pytest

from src.algebra.coalg import (NoCoaugmentation, check_algebra, check_coalgebra, cogenerator_space,
                               cosemisimple_decomposition, dual_algebra, from_structure_constants,
                               ground_coalgebra, group_function_coalgebra, grouplike_elements, is_conilpotent,
                               path_coalgebra, structure_triples, with_comult_entry)
from src.algebra.errors import EngineError
from src.algebra.groups import cyclic


@pytest.fixture
def path(f2):
    # v0 --a--> v1
    return path_coalgebra(f2)


def test_group_function_coalgebra_axioms(f3, c3):
    c = group_function_coalgebra(c3, f3)
    assert check_coalgebra(c)
    assert check_algebra(dual_algebra(c))


def test_path_coalgebra_axioms(path):
    assert path.dim == 3
    assert check_coalgebra(path)


def test_mutation_is_detected(f2, c3):
    c = group_function_coalgebra(c3, f2)
    verdict = check_coalgebra(with_comult_entry(c, 0, 0))
    assert not verdict
    assert verdict.axiom in ('coassociativity', 'left counit', 'right counit')
    assert 'basis_element' in verdict.witness


def test_dual_algebra_refuses_broken_coalgebra(f2, c3):
    with pytest.raises(EngineError):
        dual_algebra(with_comult_entry(group_function_coalgebra(c3, f2), 1, 2))


def test_structure_triples_round_trip(f3, c3):
    c = group_function_coalgebra(c3, f3)
    rebuilt = from_structure_constants(f3, c.dim, structure_triples(c), c.counit.matrix.reshape(-1).tolist())
    assert rebuilt.comult.equals(c.comult)


def test_p_group_coalgebra_is_conilpotent(f3, c3):
    result = is_conilpotent(group_function_coalgebra(c3, f3))
    assert result
    assert result.filtration[-1] == 3
    assert cogenerator_space(group_function_coalgebra(c3, f3)).dim == 1


def test_coprime_group_coalgebra_is_not_conilpotent(f2, c3):
    c = group_function_coalgebra(c3, f2)
    assert c.coaugmentation is None
    assert not is_conilpotent(c)


def test_path_coalgebra_has_two_grouplikes(path):
    assert len(grouplike_elements(path)) == 2
    result = is_conilpotent(path)
    assert not result
    assert len(result.grouplikes) == 2


def test_ground_coalgebra_is_conilpotent(q):
    assert is_conilpotent(ground_coalgebra(q))


def test_no_grouplike_raises(f2):
    # Delta(e) = 0 with counit 1 has no grouplike element
    c = from_structure_constants(f2, 1, [], [1])
    with pytest.raises(NoCoaugmentation):
        is_conilpotent(c)


def test_cosemisimple_when_order_is_invertible(f2, c3):
    result = cosemisimple_decomposition(group_function_coalgebra(c3, f2))
    assert result
    assert sum(d['dim'] * d['multiplicity'] for d in result.irreducibles) == 3


def test_not_cosemisimple_in_modular_case(f2):
    result = cosemisimple_decomposition(group_function_coalgebra(cyclic(2), f2))
    assert not result
    assert result.witness['reason']


def test_path_coalgebra_is_not_cosemisimple(path):
    assert not cosemisimple_decomposition(path)
