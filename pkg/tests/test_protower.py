import numpy as np
import pytest

from src.algebra.contramod import check_contramodule
from src.algebra.errors import DimensionMismatch, EngineError, PreconditionError, StabilizationError
from src.towers.powerseries import TorsionModule
from src.towers.protower import (PCModule, artin_rees_number, builtin_tower, contratensor_comparison,
                                 dense_subring_hom_check, ext_r, flatness_comparison, graded_ring_check,
                                 ind_coalgebra_level, injective_extension, iwasawa_round_trip, level_contramodule,
                                 lphi_euler_characteristic, lphi_iwasawa, lphi_torsion, nakayama_check,
                                 openness_certificate, rpsi_iwasawa, tor_r, tor_vanishing)


@pytest.fixture
def tower():
    return builtin_tower('Zp', 2, 3)


def test_builtin_towers():
    assert builtin_tower('Zp', 2, 3).check()
    assert builtin_tower('Zp2', 2, 2).check()
    assert builtin_tower('Zp', 3, 2, twist='inversion').check()
    with pytest.raises(EngineError):
        builtin_tower('Qp', 2, 3)
    with pytest.raises(EngineError):
        builtin_tower('Zp', 2, 0)


def test_ind_coalgebra_levels(tower, f2):
    for n in (1, 2, 3):
        level = ind_coalgebra_level(tower, n, f2)
        assert level.is_morphism
        assert level.coalgebra.dim == 2 ** n


def test_graded_ring(tower, f2, f3):
    verdict = graded_ring_check(tower, 2, f2)
    assert verdict
    assert verdict.witness['graded_dims'] == [1, 1, 1, 1]
    assert graded_ring_check(builtin_tower('Zp2', 2, 1), 1, f2).witness['graded_dims'] == [1, 2, 1]
    with pytest.raises(PreconditionError):
        graded_ring_check(tower, 1, f3)


def test_openness_certificate(tower, f2):
    assert [row['nilpotency'] for row in openness_certificate(tower, f2)] == [2, 4, 8]


def test_level_contramodule_and_homs(tower, f2):
    p = TorsionModule.from_exponents(f2, [2])
    q = TorsionModule.from_exponents(f2, [1, 2])
    assert check_contramodule(level_contramodule(tower, 1, p))
    verdict = dense_subring_hom_check(p, q, tower)
    assert verdict
    assert verdict.witness['hom_dim'] == 3


def test_contratensor_matches_module_tensor(tower, f2):
    m = TorsionModule.from_exponents(f2, [2])
    verdict = contratensor_comparison(m, m, tower)
    assert verdict
    assert verdict.witness['dim'] == 2


def test_nakayama(f2):
    assert nakayama_check(PCModule.free(f2, 2)).witness['quotient_dim'] == 2
    assert nakayama_check(PCModule.from_exponents(f2, [1, 3], free_rank=1)).witness['quotient_dim'] == 3


def test_artin_rees_number(f2):
    result = artin_rees_number(PCModule.free(f2, 1), [[[0, 0, 1]]], 3)
    assert result.m == 2
    assert len(result.certificates) == 4


def test_injective_extension(f2):
    m = TorsionModule.from_exponents(f2, [3])
    j = TorsionModule.from_exponents(f2, [3])
    sub = m.power_image(1)
    # inclusion t M -> J in the coordinates of sub
    f = f2.matrix([[0, 0], [1, 0], [0, 1]])
    ext = injective_extension(j, m, sub, f)
    assert np.array_equal(f2.matmul(ext.map, sub), f)


def test_flatness_and_tor_vanishing(f2):
    module = PCModule.cyclic_torsion(f2, 2)
    assert flatness_comparison(module, 2, 3)
    a = TorsionModule.from_exponents(f2, [1])
    b = TorsionModule.from_exponents(f2, [2])
    c = TorsionModule.from_exponents(f2, [1])
    inc = f2.matrix([[0], [1]])
    proj = f2.matrix([[1, 0]])
    assert tor_vanishing((a, b, c, inc, proj), 2, 3)


def test_flatness_comparison_checks_the_map(f2):
    module = PCModule.cyclic_torsion(f2, 2)
    swap = f2.matrix([[0, 1], [1, 0]])
    assert flatness_comparison(module, 2, 3, generator_map=swap)
    zero = flatness_comparison(module, 2, 3, generator_map=f2.zeros(2, 2))
    assert not zero
    assert zero.axiom == 'flat comparison isomorphism' and zero.witness['level'] == 1
    singular = flatness_comparison(module, 2, 3, generator_map=f2.matrix([[1, 1], [1, 1]]))
    assert singular.axiom == 'flat comparison isomorphism'


def test_flatness_comparison_map_must_descend(f2):
    # the torsion generator cannot go to the free one once t survives
    mixed = PCModule.from_exponents(f2, [1], free_rank=1)
    assert flatness_comparison(mixed, 1, 3)
    verdict = flatness_comparison(mixed, 1, 3, generator_map=f2.matrix([[0, 1], [1, 0]]))
    assert verdict.axiom == 'flat comparison descends' and verdict.witness['level'] == 2
    with pytest.raises(DimensionMismatch):
        flatness_comparison(mixed, 2, 2, generator_map=f2.identity(2))


def test_ext_and_tor(f2):
    p = PCModule.cyclic_torsion(f2, 2)
    q = TorsionModule.from_exponents(f2, [2])
    assert ext_r(p, q) == {0: 2, 1: 2}
    assert tor_r(p, q) == {0: 2, 1: 2}
    assert ext_r(PCModule.free(f2, 1), q) == {0: 2, 1: 0}


def test_derived_phi_of_torsion(f2):
    result = lphi_iwasawa(PCModule.cyclic_torsion(f2, 2), 2, 4)
    assert result.homology_dims() == {-1: 2}
    assert result.homology[-1].exponents() == [2]
    direct = lphi_torsion(TorsionModule.from_exponents(f2, [2]), 2, 4)
    assert direct.homology_dims() == {-1: 2}


def test_derived_psi_of_torsion(f2):
    result = rpsi_iwasawa(TorsionModule.from_exponents(f2, [2]), 2, 4)
    assert result.homology_dims() == {1: 2}


def test_stabilization_needs_depth(f2):
    with pytest.raises(StabilizationError):
        lphi_iwasawa(PCModule.cyclic_torsion(f2, 1), 2, 2)


def test_iwasawa_round_trips(f2):
    assert iwasawa_round_trip(PCModule.cyclic_torsion(f2, 2), 2, 4)
    assert iwasawa_round_trip(TorsionModule.from_exponents(f2, [1, 2]), 2, 4)


def test_derived_phi_of_free_module_is_divisible_in_degree_zero(f2):
    result = lphi_iwasawa(PCModule.free(f2, 1), 2, 4)
    assert result.homology_dims() == {0: 'C^1'}
    assert result.support() == [0]
    assert result.divisible_rank == 1
    assert result.unbounded[0].kind == 'divisible'
    assert [lv['dim'] for lv in result.unbounded[0].levels] == [2, 4, 8]
    assert result.to_dict()['homology']['0']['unbounded']['rank'] == 1
    assert result.level_complex.homology_dims() == {0: 2 ** result.level}


def test_derived_phi_of_mixed_module(f2):
    result = lphi_iwasawa(PCModule.from_exponents(f2, [2], free_rank=1), 2, 4)
    assert result.homology_dims() == {-1: 2, 0: 'C^1'}
    assert result.homology[-1].exponents() == [2]


def test_round_trip_keeps_the_free_part(f2):
    free = iwasawa_round_trip(PCModule.free(f2, 1), 2, 4)
    assert free
    assert free.witness['free_rank'] == 1
    mixed = iwasawa_round_trip(PCModule.from_exponents(f2, [1, 2], free_rank=2), 2, 4)
    assert mixed
    assert mixed.witness['exponents'] == [1, 2] and mixed.witness['free_rank'] == 2


def test_euler_characteristic(f2):
    assert lphi_euler_characteristic(PCModule.cyclic_torsion(f2, 3), 2, 2) == 0
    assert lphi_euler_characteristic(PCModule.from_exponents(f2, [1], free_rank=2), 2, 2) == 8
