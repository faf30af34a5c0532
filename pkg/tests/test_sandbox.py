import itertools

import pytest

from src.algebra.errors import EngineError, PreconditionError
from src.algebra.groups import InvalidGroup
from src.smooth.sandbox import (check_semialgebra, diagram_check, finite_sandbox, hom_g_dimension, regular_module,
                                sandbox_adjunction, sandbox_contratensor_comparison, sandbox_equivalence,
                                sandbox_flags, sandbox_module, sandbox_phi, sandbox_psi, subgroup_table,
                                trivial_module)


@pytest.fixture
def sandbox(s3, f2):
    return finite_sandbox(s3, [0, 3, 4], f2)


def permutation_action(fld):
    mats = []
    for p in sorted(itertools.permutations(range(3))):
        mat = fld.zeros(3, 3)
        for i in range(3):
            mat[p[i], i] = 1
        mats.append(mat)
    return mats


def test_semialgebra_axioms(s3, f2, f3):
    s = finite_sandbox(s3, [0, 3, 4], f2)
    assert s.dim == 6
    assert s.cotensor_basis.shape[1] == 12
    assert check_semialgebra(s)
    assert check_semialgebra(finite_sandbox(s3, [0, 1], f3))


def test_subgroup_validation(s3, f2):
    assert subgroup_table(s3, [4, 0, 3]).order == 3
    with pytest.raises(InvalidGroup):
        finite_sandbox(s3, [0, 3], f2)
    with pytest.raises(InvalidGroup):
        subgroup_table(s3, [0, 7])


def test_modules(sandbox, f2):
    perm = sandbox_module(sandbox, permutation_action(f2), 'k^3')
    assert perm.check()
    assert regular_module(sandbox).check()
    with pytest.raises(EngineError):
        sandbox_module(sandbox, [f2.identity(1)] * 5 + [f2.zeros(1, 1)])


def test_functor_values(sandbox):
    psi_reg = sandbox_psi(regular_module(sandbox))
    assert psi_reg.module.dim == 6
    assert psi_reg.brute_force_dim == 6
    phi_triv = sandbox_phi(trivial_module(sandbox))
    assert phi_triv.module.dim == 1
    assert phi_triv.brute_force_dim == 1


def test_restriction_diagrams(sandbox):
    assert diagram_check(sandbox_psi(regular_module(sandbox)))
    assert diagram_check(sandbox_phi(trivial_module(sandbox)))


def test_adjunction(sandbox, f2):
    perm = sandbox_module(sandbox, permutation_action(f2), 'k^3')
    for p in (regular_module(sandbox), trivial_module(sandbox), perm):
        for m in (regular_module(sandbox), trivial_module(sandbox)):
            assert sandbox_adjunction(p, m)
    assert hom_g_dimension(trivial_module(sandbox), perm) == 1


def test_equivalence_on_cosemisimple_base(sandbox):
    flags = sandbox_flags(trivial_module(sandbox))
    assert flags['h_injective'] and flags['h_projective']
    assert sandbox_equivalence(regular_module(sandbox), 'smooth')
    assert sandbox_equivalence(trivial_module(sandbox), 'contra')


def test_equivalence_needs_injective(s3, f3):
    modular = finite_sandbox(s3, [0, 3, 4], f3)
    with pytest.raises(PreconditionError):
        sandbox_equivalence(trivial_module(modular), 'smooth')
    assert sandbox_equivalence(regular_module(modular), 'smooth')


def test_contratensor_comparison(sandbox, f2):
    verdict = sandbox_contratensor_comparison(regular_module(sandbox), trivial_module(sandbox))
    assert verdict
    assert verdict.witness['dim'] == 1
    perm = sandbox_module(sandbox, permutation_action(f2), 'k^3')
    assert sandbox_contratensor_comparison(perm, perm)
