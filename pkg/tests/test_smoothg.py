import pytest

from src.algebra.errors import AxiomViolation, CapExceeded, EngineError, PreconditionError
from src.smooth.smoothg import (TAlgebra, Window, build_G, contratensor_G_comparison, derived_equivalence_G,
                                ext_tor_vanishing, g_contramodule, phi_G, presented_contramodule, psi_G,
                                s_module_check, s_window, smooth_module, t_window, trivial_object,
                                underived_equivalence_check, weakly_compact_flags)
from src.smooth.sandbox import finite_sandbox, regular_module, trivial_module
from src.towers.powerseries import TorsionModule
from src.towers.protower import PCModule, builtin_tower


@pytest.fixture
def group():
    return build_G(builtin_tower('Zp', 2, 3), Window(0, 1))


@pytest.fixture
def twisted():
    return build_G(builtin_tower('Zp', 3, 2, twist='inversion'), Window(0, 1))


def test_window_arithmetic():
    w = Window(0, 2) + Window(-1, 1)
    assert (w.lo, w.hi) == (-1, 3)
    assert w.width == 5
    assert Window(0, 1).cover(Window(3, 4)) == Window(0, 4)
    assert Window(-1, 1).contains(0) and not Window(-1, 1).contains(2)
    with pytest.raises(EngineError):
        Window(2, 1)


def test_group_relations(group, twisted):
    assert group.relation_check()
    assert group.is_direct_product
    assert twisted.relation_check()
    assert not twisted.is_direct_product
    assert twisted.exponents(1) == [2]


def test_laurent_algebra_relations(group, twisted, f2, f3):
    assert TAlgebra(group, f2, 2, Window(-1, 1)).relation_check()
    assert TAlgebra(twisted, f3, 1, Window(-1, 1)).relation_check()


def test_closed_objects(group, f2):
    triv = trivial_object(group, f2)
    assert triv.closed
    assert triv.check()
    flags = weakly_compact_flags(triv)
    assert flags.h_injective is False
    base = TorsionModule.from_exponents(f2, [2])
    with pytest.raises(AxiomViolation):
        smooth_module(group, base, [[0, 1], [1, 0]])


def test_window_objects(group, f2):
    s = s_window(group, 1, f2)
    assert s.dim == 4
    flags = weakly_compact_flags(s)
    assert flags.h_injective and flags.semiprojective
    t = t_window(group, 1, f2)
    assert t.check()
    assert weakly_compact_flags(t).h_projective


def test_functors_on_windows(group, f2):
    image = psi_G(s_window(group, 1, f2))
    assert [c.dim for c in image.components] == [2, 2]
    assert image.check()
    back = phi_G(image)
    assert back.dim == 4
    assert underived_equivalence_check(s_window(group, 1, f2), 'smooth')
    assert underived_equivalence_check(t_window(group, 1, f2), 'contra')


def test_s_window_is_regular(group, twisted, f2, f3):
    assert s_module_check(group, 1, f2, Window(0, 1))
    assert s_module_check(twisted, 1, f3, Window(-1, 1))


def test_presented_contramodules(group, f2):
    free = presented_contramodule(group, PCModule.free(f2, 1))
    with pytest.raises(PreconditionError):
        phi_G(free)
    assert weakly_compact_flags(free).h_projective
    assert ext_tor_vanishing(free, kind='contra').vanishes
    with pytest.raises(AxiomViolation):
        presented_contramodule(group, PCModule.cyclic_torsion(f2, 1))


def test_closed_functors(group, f2):
    assert psi_G(trivial_object(group, f2)).dim == 0
    assert phi_G(trivial_object(group, f2, 'contra')).dim == 0
    table = ext_tor_vanishing(trivial_object(group, f2), i_max=2)
    assert table.dims == {1: 1, 2: 0}
    assert not table.vanishes
    assert ext_tor_vanishing(s_window(group, 1, f2)).vanishes


def test_contratensor_comparison(group, f2):
    verdict = contratensor_G_comparison(trivial_object(group, f2), trivial_object(group, f2, 'contra'))
    assert verdict
    assert verdict.witness['dim'] == 1
    with pytest.raises(PreconditionError):
        contratensor_G_comparison(trivial_object(group, f2, 'contra'), trivial_object(group, f2))


def test_derived_round_trip_on_closed_objects(group, twisted, f2, f3):
    cert = derived_equivalence_G(trivial_object(group, f2, 'contra'), 2)
    assert cert.round_trip
    assert cert.support == (-1, -1)
    assert cert.route == 'tower'
    assert derived_equivalence_G(trivial_object(group, f2), 2).round_trip
    with pytest.raises(PreconditionError):
        derived_equivalence_G(trivial_object(twisted, f3), 2)
    with pytest.raises(PreconditionError):
        derived_equivalence_G(trivial_object(group, f2), 0)


def test_derived_round_trip_on_a_nontrivial_closed_object(group, f2):
    base = TorsionModule.from_exponents(f2, [2])
    gamma = [[1, 0], [1, 1]]
    cert = derived_equivalence_G(smooth_module(group, base, gamma), 2)
    assert cert.round_trip
    assert cert.support == (1, 1)
    assert cert.complex.homology_dims() == {1: 2}
    assert cert.round_trip.witness['exponents'] == [2]
    contra = derived_equivalence_G(g_contramodule(group, base, gamma), 2, kind='contra')
    assert contra.round_trip and contra.support == (-1, -1)


def test_vanishing_table_on_a_closed_object(group, f2):
    base = TorsionModule.from_exponents(f2, [2])
    table = ext_tor_vanishing(smooth_module(group, base, [[1, 0], [1, 1]]))
    assert table.dims == {1: 2, 2: 0, 3: 0}
    assert table.route == 'tower'
    assert table.trace[0].endswith('1: 2, 2: 0, 3: 0')


def test_vanishing_table_on_a_presented_contramodule(group, f2):
    # two generators tied by one unit relation: free of rank one
    p = PCModule(f2, [[[1]], [[1, 1]]], 2, name='P')
    table = ext_tor_vanishing(presented_contramodule(group, p, [[1]]), kind='contra')
    assert table.route == 'presentation'
    assert table.dims == {-1: 0, -2: 0, -3: 0}
    assert table.vanishes
    assert table.trace[:3] == ['level 1: Tor_0 = 2, Tor_1 = 0', 'level 2: Tor_0 = 4, Tor_1 = 0',
                               'level 3: Tor_0 = 8, Tor_1 = 0']
    dependent = PCModule(f2, [[[1], [0]]], 1, name='Q')
    assert ext_tor_vanishing(presented_contramodule(group, dependent, f2.zeros(0, 0)), kind='contra').vanishes


def test_sandbox_derived_equivalence(s3, f2, f3):
    cosemisimple = finite_sandbox(s3, [0, 3, 4], f2)
    cert = derived_equivalence_G(regular_module(cosemisimple), 2)
    assert cert.round_trip and cert.route == 'sandbox' and cert.support == (0, 0)
    assert derived_equivalence_G(trivial_module(cosemisimple), 2, kind='contra').round_trip
    table = ext_tor_vanishing(trivial_module(cosemisimple))
    assert table.vanishes and table.trace == ['derived functors over k(H) with cap 4: 1: 0, 2: 0, 3: 0']
    modular = finite_sandbox(s3, [0, 3, 4], f3)
    assert derived_equivalence_G(regular_module(modular), 2).round_trip
    # k over k(C_3) in characteristic 3 has no finite injective coresolution
    with pytest.raises(CapExceeded):
        derived_equivalence_G(trivial_module(modular), 2)
