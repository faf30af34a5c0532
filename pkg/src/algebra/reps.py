"""
Representations given by a family of operators on k^n.

A comodule over C is the same as a module over C^∨, and the image of C^∨ in
End(M) is spanned by the operators (e_a (x) id) o coaction. Submodule
generation, Fitting splitting and the Norton irreducibility test all work on
that operator family.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import sympy

from src.algebra.exactlin import (Field, intertwiners, nullspace_matrix, row_reduce, solve_matrix,
                                  subspace_basis)

logger = logging.getLogger(__name__)

SPLIT_ATTEMPTS = 48
MAX_ENUMERATION = 4096


@dataclass(frozen=True)
class OperatorRep:
    field: Field
    dim: int
    ops: Tuple[np.ndarray, ...]

    def restrict(self, basis: np.ndarray) -> 'OperatorRep':
        """Operators on an invariant subspace, in the coordinates of its basis"""
        restricted = []
        for a in self.ops:
            coords = solve_matrix(self.field, basis, self.field.matmul(a, basis))
            if coords is None:
                raise ValueError("subspace is not invariant")
            restricted.append(coords)
        return OperatorRep(self.field, basis.shape[1], tuple(restricted))

    def dual(self) -> 'OperatorRep':
        return OperatorRep(self.field, self.dim, tuple(a.T.copy() for a in self.ops))

    def combination(self, coeffs: Sequence[int]) -> np.ndarray:
        total = self.field.zeros(self.dim, self.dim)
        for c, a in zip(coeffs, self.ops):
            if c:
                total = self.field.add(total, self.field.scale(c, a))
        return total


def spin(rep: OperatorRep, vectors: np.ndarray) -> np.ndarray:
    """Basis of the smallest invariant subspace containing the given columns"""
    fld = rep.field
    basis = subspace_basis(fld, vectors) if vectors.shape[1] else vectors
    frontier = basis
    while frontier.shape[1]:
        images = [fld.matmul(a, frontier) for a in rep.ops]
        candidate = np.hstack([basis] + images)
        new_basis = subspace_basis(fld, candidate)
        if new_basis.shape[1] == basis.shape[1]:
            break
        frontier = new_basis[:, basis.shape[1]:]
        basis = new_basis
    return basis


def endomorphism_basis(rep: OperatorRep) -> List[np.ndarray]:
    null = intertwiners(rep.field, rep.ops, rep.ops, rep.dim, rep.dim)
    return [null[:, j].reshape(rep.dim, rep.dim) for j in range(null.shape[1])]


def _power(fld: Field, a: np.ndarray, n: int) -> np.ndarray:
    result = fld.identity(a.shape[0])
    base = a
    while n:
        if n & 1:
            result = fld.matmul(result, base)
        base = fld.matmul(base, base)
        n >>= 1
    return result


def fitting_split(rep: OperatorRep, rng: np.random.Generator) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Bases of a nontrivial decomposition M = ker f^n + im f^n for some endomorphism f, if found"""
    fld = rep.field
    ends = endomorphism_basis(rep)
    if len(ends) <= 1:
        return None
    candidates = list(ends)
    for _ in range(SPLIT_ATTEMPTS):
        coeffs = rng.integers(0, max(fld.characteristic, 5), size=len(ends))
        total = fld.zeros(rep.dim, rep.dim)
        for c, e in zip(coeffs, ends):
            total = fld.add(total, fld.scale(int(c), e))
        candidates.append(total)
    for f in candidates:
        fn = _power(fld, f, rep.dim)
        k = nullspace_matrix(fld, fn)
        if 0 < k.shape[1] < rep.dim:
            im = fn[:, list(row_reduce(fld, fn).pivots)]
            return k, im
    return None


def indecomposable_summands(rep: OperatorRep, seed: int = 0) -> List[np.ndarray]:
    """Bases (in ambient coordinates) of indecomposable summands"""
    rng = np.random.default_rng(seed)
    fld = rep.field
    pending = [fld.identity(rep.dim)] if rep.dim else []
    done = []
    while pending:
        basis = pending.pop()
        sub = rep.restrict(basis)
        split = fitting_split(sub, rng)
        if split is None:
            done.append(basis)
            continue
        for part in split:
            pending.append(fld.matmul(basis, part))
    done.sort(key=lambda b: (b.shape[1], tuple(row_reduce(fld, b.T.copy()).reduced.reshape(-1).tolist())))
    return done


def _projective_points(fld: Field, basis: np.ndarray, rng: np.random.Generator):
    """Nonzero vectors of col(basis) up to scalars; over Q a seeded sample of them"""
    d = basis.shape[1]
    if fld.is_rational:
        for j in range(d):
            yield basis[:, j]
        for i, j in itertools.combinations(range(d), 2):
            yield fld.add(basis[:, i], basis[:, j])
        if d < 2:
            return
        for _ in range(SPLIT_ATTEMPTS):
            coeffs = rng.integers(-3, 4, size=d)
            if not coeffs.any():
                continue
            vec = fld.zeros(basis.shape[0], 1).reshape(-1)
            for c, j in zip(coeffs, range(d)):
                if c:
                    vec = fld.add(vec, fld.scale(int(c), basis[:, j]))
            yield vec
        return
    p = fld.characteristic
    for lead in range(d):
        for rest in itertools.product(range(p), repeat=d - lead - 1):
            coeffs = [0] * lead + [1] + list(rest)
            vec = fld.zeros(basis.shape[0], 1).reshape(-1)
            for c, j in zip(coeffs, range(d)):
                if c:
                    vec = fld.add(vec, fld.scale(c, basis[:, j]))
            yield vec


def singular_shifts(fld: Field, a: np.ndarray) -> List[np.ndarray]:
    """a - lambda over F_p; over Q, f(a) for each irreducible factor f of the characteristic polynomial, linear first"""
    n = a.shape[0]
    if not fld.is_rational:
        return [fld.sub(a, fld.scale(lam, fld.identity(n))) for lam in fld.elements()]
    x = sympy.Symbol('x')
    m = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in a.tolist()])
    _, factors = sympy.factor_list(m.charpoly(x).as_expr(), x)
    shifts = []
    for f, _ in sorted(factors, key=lambda fe: sympy.degree(fe[0], x)):
        value = fld.zeros(n, n)
        for c in sympy.Poly(f, x).all_coeffs():
            c = sympy.Rational(c)
            value = fld.add(fld.matmul(value, a), fld.scale(Fraction(int(c.p), int(c.q)), fld.identity(n)))
        shifts.append(value)
    return shifts


def proper_subspace(rep: OperatorRep, seed: int = 0) -> Optional[np.ndarray]:
    """A proper nonzero invariant subspace, or None when the representation is irreducible"""
    if rep.dim <= 1:
        return None
    fld = rep.field
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(SPLIT_ATTEMPTS):
        a = rep.combination(rng.integers(0, max(fld.characteristic, 3), size=len(rep.ops)).tolist())
        for shifted in singular_shifts(fld, a):
            ker = nullspace_matrix(fld, shifted)
            if ker.shape[1] and (best is None or ker.shape[1] < best[1].shape[1]):
                best = (shifted, ker)
        if best is not None and best[1].shape[1] == 1:
            break
    if best is None:
        return None
    shifted, ker = best
    if not fld.is_rational and fld.characteristic ** ker.shape[1] > MAX_ENUMERATION:
        logger.warning(f"nullity {ker.shape[1]} too large for exhaustive Norton test")
    # Norton: a proper submodule meets ker(a) or its annihilator meets ker(a^T)
    for v in _projective_points(fld, ker, rng):
        sub = spin(rep, v.reshape(-1, 1))
        if sub.shape[1] < rep.dim:
            return sub
    dual = rep.dual()
    dual_ker = nullspace_matrix(fld, shifted.T.copy())
    for w in _projective_points(fld, dual_ker, rng):
        sub = spin(dual, w.reshape(-1, 1))
        if sub.shape[1] < rep.dim:
            # annihilator of a dual submodule is a submodule
            return nullspace_matrix(fld, sub.T.copy())
    return None


def is_irreducible(rep: OperatorRep, seed: int = 0) -> bool:
    return rep.dim > 0 and proper_subspace(rep, seed) is None


def hom_dimension(src: OperatorRep, dst: OperatorRep) -> int:
    return intertwiners(src.field, src.ops, dst.ops, src.dim, dst.dim).shape[1]


def find_isomorphism(src: OperatorRep, dst: OperatorRep, seed: int = 0) -> Optional[np.ndarray]:
    """An invertible intertwiner src -> dst, searched among random combinations of a Hom basis"""
    fld = src.field
    if src.dim != dst.dim or len(src.ops) != len(dst.ops):
        return None
    if src.dim == 0:
        return fld.zeros(0, 0)
    null = intertwiners(fld, src.ops, dst.ops, src.dim, dst.dim)
    homs = [null[:, j].reshape(dst.dim, src.dim) for j in range(null.shape[1])]
    if not homs:
        return None
    rng = np.random.default_rng(seed)
    candidates = list(homs)
    for _ in range(SPLIT_ATTEMPTS):
        coeffs = rng.integers(0, max(fld.characteristic, 5), size=len(homs))
        total = fld.zeros(dst.dim, src.dim)
        for c, h in zip(coeffs, homs):
            total = fld.add(total, fld.scale(int(c), h))
        candidates.append(total)
    for f in candidates:
        if row_reduce(fld, f).rank == src.dim:
            return f
    return None
