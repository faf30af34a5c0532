import numpy as np

from src.algebra.reps import OperatorRep, find_isomorphism, is_irreducible, proper_subspace, singular_shifts, spin


def test_rational_split_off_the_unit_eigenvalues(q):
    # eigenvalues 2 and 3, eigenvectors (1, 2) and (1, 3): no basis vector or pairwise sum is invariant
    rep = OperatorRep(q, 2, (q.matrix([[0, 1], [-6, 5]]),))
    sub = proper_subspace(rep)
    assert sub is not None and sub.shape[1] == 1
    assert spin(rep, sub).shape[1] == 1
    assert not is_irreducible(rep)


def test_rational_rotation_is_irreducible(q):
    assert is_irreducible(OperatorRep(q, 2, (q.matrix([[0, -1], [1, 0]]),)))


def test_singular_shifts_over_q(q):
    a = q.matrix([[0, 1], [-6, 5]])
    shifts = singular_shifts(q, a)
    assert len(shifts) == 2
    for shifted in shifts:
        assert shifted[0, 0] * shifted[1, 1] - shifted[0, 1] * shifted[1, 0] == 0
    rotation = singular_shifts(q, q.matrix([[0, -1], [1, 0]]))
    assert len(rotation) == 1 and not np.any(rotation[0] != 0)


def test_singular_shifts_over_fp(f3):
    assert len(singular_shifts(f3, f3.identity(2))) == 3


def test_find_isomorphism(f2):
    t = f2.matrix([[0, 0], [1, 0]])
    swapped = f2.matrix([[0, 1], [0, 0]])
    iso = find_isomorphism(OperatorRep(f2, 2, (t,)), OperatorRep(f2, 2, (swapped,)))
    assert iso is not None
    assert np.array_equal(f2.matmul(iso, t), f2.matmul(swapped, iso))
