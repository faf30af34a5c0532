"""
Truncated power series, Smith normal form over k[[t]], and finite-length modules.

An element of k[t]/t^N is a coefficient vector of length N. k[[t]] is a
discrete valuation ring, so a presentation matrix is diagonalized by
row/column operations with pivots of least valuation; working modulo t^N is
exact as long as N exceeds every finite invariant exponent, which is bounded
by the valuation of a maximal minor.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.algebra.errors import DimensionMismatch, EngineError
from src.algebra.exactlin import (Field, LinMap, VecSpace, cokernel, intertwiners, row_reduce, solve_matrix,
                                  subspace_basis)
from src.algebra.reps import OperatorRep, spin

logger = logging.getLogger(__name__)


class TruncatedSeriesRing:
    """k[t]/t^N with elements as coefficient arrays, lowest degree first"""

    def __init__(self, fld: Field, precision: int):
        if precision < 1:
            raise ValueError(f"precision must be positive, got {precision}")
        self.field = fld
        self.precision = precision
        self.logger = logging.getLogger(__name__)

    def element(self, coeffs: Sequence) -> np.ndarray:
        out = self.field.zeros(1, self.precision).reshape(-1)
        for i, c in enumerate(list(coeffs)[:self.precision]):
            out[i] = self.field.scalar(c)
        return out

    def zero(self) -> np.ndarray:
        return self.element([])

    def one(self) -> np.ndarray:
        return self.element([1])

    def t_power(self, k: int) -> np.ndarray:
        return self.element([0] * k + [1]) if k < self.precision else self.zero()

    def multiplication_matrix(self, a: np.ndarray) -> np.ndarray:
        """Lower triangular Toeplitz matrix of x |-> a x"""
        n = self.precision
        mat = self.field.zeros(n, n)
        for i in range(n):
            mat[i:, i] = a[:n - i]
        return mat

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.field.matmul(self.multiplication_matrix(a), b.reshape(-1, 1)).reshape(-1)

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.field.add(a, b)

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.field.sub(a, b)

    def is_zero(self, a: np.ndarray) -> bool:
        return self.field.is_zero(a)

    def valuation(self, a: np.ndarray) -> Optional[int]:
        """Order of vanishing, None for zero"""
        nonzero = np.nonzero(a != 0)[0]
        return int(nonzero[0]) if len(nonzero) else None

    def is_unit(self, a: np.ndarray) -> bool:
        return a[0] != 0

    def inverse_unit(self, a: np.ndarray) -> np.ndarray:
        if not self.is_unit(a):
            raise EngineError("element with zero constant term is not a unit")
        solution = solve_matrix(self.field, self.multiplication_matrix(a), self.one().reshape(-1, 1))
        return solution.reshape(-1)

    def divide_by_t(self, a: np.ndarray, v: int) -> np.ndarray:
        """Some b with t^v b = a; the top v coefficients are free and set to zero"""
        out = self.zero()
        out[:self.precision - v] = a[v:]
        return out

    def __repr__(self) -> str:
        return f"TruncatedSeriesRing({self.field}, t^{self.precision})"


def polynomial_matrix(ring: TruncatedSeriesRing, entries: Sequence[Sequence[Sequence]]) -> np.ndarray:
    """rows x cols x N array from nested coefficient lists"""
    rows = len(entries)
    cols = len(entries[0]) if rows else 0
    out = np.empty((rows, cols, ring.precision), dtype=ring.field.dtype)
    for i in range(rows):
        if len(entries[i]) != cols:
            raise DimensionMismatch("ragged presentation matrix")
        for j in range(cols):
            out[i, j] = ring.element(entries[i][j])
    return out


def max_degree(entries: Sequence[Sequence[Sequence]]) -> int:
    degs = [len(c) - 1 for row in entries for c in row if any(x != 0 for x in c)]
    return max(degs) if degs else 0


def safe_precision(rows: int, cols: int, degree: int) -> int:
    """Exceeds the valuation of every nonzero minor"""
    return min(rows, cols) * max(degree, 1) + 1


@dataclass
class SmithForm:
    """U A V = diag(t^e_1, ..., t^e_r, 0, ...) modulo t^precision"""
    exponents: List[int]
    free_rank: int
    generators: int
    relations: int
    precision: int
    left: np.ndarray = field(repr=False, default=None)
    right: np.ndarray = field(repr=False, default=None)
    diagonal: List[Optional[int]] = field(default_factory=list)

    @property
    def is_finite_length(self) -> bool:
        return self.free_rank == 0

    @property
    def length(self) -> int:
        return sum(self.exponents)

    @property
    def minimal_generators(self) -> int:
        return self.free_rank + len(self.exponents)

    def to_dict(self) -> Dict:
        return {'exponents': self.exponents, 'free_rank': self.free_rank, 'generators': self.generators,
                'relations': self.relations, 'precision': self.precision}


def _mat_mul(ring: TruncatedSeriesRing, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    rows, inner, _ = a.shape
    cols = b.shape[1]
    out = np.empty((rows, cols, ring.precision), dtype=ring.field.dtype)
    for i in range(rows):
        for j in range(cols):
            acc = ring.zero()
            for k in range(inner):
                acc = ring.add(acc, ring.mul(a[i, k], b[k, j]))
            out[i, j] = acc
    return out


def series_identity(ring: TruncatedSeriesRing, n: int) -> np.ndarray:
    out = np.empty((n, n, ring.precision), dtype=ring.field.dtype)
    for i in range(n):
        for j in range(n):
            out[i, j] = ring.one() if i == j else ring.zero()
    return out


def smith_form(ring: TruncatedSeriesRing, matrix: np.ndarray) -> SmithForm:
    """Diagonalize by least-valuation pivots, tracking the transformation matrices"""
    a = matrix.copy()
    rows, cols = a.shape[0], a.shape[1]
    u = series_identity(ring, rows)
    v = series_identity(ring, cols)
    diagonal: List[Optional[int]] = []
    for k in range(min(rows, cols)):
        best = None
        for i in range(k, rows):
            for j in range(k, cols):
                val = ring.valuation(a[i, j])
                if val is not None and (best is None or val < best[0]):
                    best = (val, i, j)
        if best is None:
            break
        val, i, j = best
        a[[k, i]] = a[[i, k]]
        u[[k, i]] = u[[i, k]]
        a[:, [k, j]] = a[:, [j, k]]
        v[:, [k, j]] = v[:, [j, k]]
        unit_inv = ring.inverse_unit(ring.divide_by_t(a[k, k], val))
        for r in range(k + 1, rows):
            if ring.is_zero(a[r, k]):
                continue
            factor = ring.mul(ring.divide_by_t(a[r, k], val), unit_inv)
            for c in range(cols):
                a[r, c] = ring.sub(a[r, c], ring.mul(factor, a[k, c]))
            for c in range(rows):
                u[r, c] = ring.sub(u[r, c], ring.mul(factor, u[k, c]))
        for c in range(k + 1, cols):
            if ring.is_zero(a[k, c]):
                continue
            factor = ring.mul(ring.divide_by_t(a[k, c], val), unit_inv)
            for r in range(rows):
                a[r, c] = ring.sub(a[r, c], ring.mul(factor, a[r, k]))
            for r in range(cols):
                v[r, c] = ring.sub(v[r, c], ring.mul(factor, v[r, k]))
        # normalize the pivot to t^val
        for c in range(cols):
            a[k, c] = ring.mul(unit_inv, a[k, c])
        for c in range(rows):
            u[k, c] = ring.mul(unit_inv, u[k, c])
        diagonal.append(val)
    nonzero = [e for e in diagonal if e is not None]
    exponents = sorted(e for e in nonzero if e > 0)
    free_rank = rows - len(nonzero)
    logger.debug(f"smith form at precision {ring.precision}: exponents {exponents}, free rank {free_rank}")
    return SmithForm(exponents, free_rank, rows, cols, ring.precision, u, v, diagonal)


def verify_smith(ring: TruncatedSeriesRing, matrix: np.ndarray, form: SmithForm) -> bool:
    """Checks U A V against the recorded diagonal and that U, V are invertible"""
    product = _mat_mul(ring, _mat_mul(ring, form.left, matrix), form.right)
    rows, cols = product.shape[0], product.shape[1]
    for i in range(rows):
        for j in range(cols):
            expected = ring.zero()
            if i == j and i < len(form.diagonal) and form.diagonal[i] is not None:
                expected = ring.t_power(form.diagonal[i])
            if not ring.is_zero(ring.sub(product[i, j], expected)):
                return False
    fld = ring.field
    for t in (form.left, form.right):
        constant = fld.matrix(t[:, :, 0])
        if t.shape[0] and row_reduce(fld, constant).rank != t.shape[0]:
            return False
    return True


@dataclass(frozen=True, eq=False)
class TorsionModule:
    """A finite-length module over k[[t_1, ..., t_d]]: commuting nilpotent operators on k^n"""
    field: Field
    ops: Tuple[np.ndarray, ...]
    dimension: int
    name: str = 'M'

    def __post_init__(self):
        for a in self.ops:
            if a.shape != (self.dimension, self.dimension):
                raise DimensionMismatch(f"operator of shape {a.shape} on a module of dimension {self.dimension}")

    @property
    def dim(self) -> int:
        return self.dimension

    @property
    def variables(self) -> int:
        return len(self.ops)

    @property
    def t(self) -> np.ndarray:
        return self.ops[0]

    @property
    def rep(self) -> OperatorRep:
        return OperatorRep(self.field, self.dim, self.ops)

    @property
    def space(self) -> VecSpace:
        return VecSpace.standard(self.field, self.dim, 'x')

    @classmethod
    def zero(cls, fld: Field, variables: int = 1) -> 'TorsionModule':
        return cls(fld, tuple(fld.zeros(0, 0) for _ in range(variables)), 0, '0')

    @classmethod
    def from_exponents(cls, fld: Field, exponents: Sequence[int], name: str = 'M') -> 'TorsionModule':
        """Direct sum of k[[t]]/t^e; t shifts each block downward"""
        n = sum(exponents)
        t = fld.zeros(n, n)
        offset = 0
        for e in exponents:
            for i in range(e - 1):
                t[offset + i + 1, offset + i] = fld.scalar(1)
            offset += e
        return cls(fld, (t,), n, name)

    @classmethod
    def truncated_free(cls, fld: Field, variables: int, order: int, name: str = 'R') -> 'TorsionModule':
        """k[t_1..t_d] / (t_1..t_d)^order on the monomial basis"""
        monomials = [m for total in range(order)
                     for m in _monomials_of_degree(variables, total)]
        index = {m: i for i, m in enumerate(monomials)}
        ops = []
        for v in range(variables):
            op = fld.zeros(len(monomials), len(monomials))
            for m, i in index.items():
                shifted = tuple(e + (1 if k == v else 0) for k, e in enumerate(m))
                if shifted in index:
                    op[index[shifted], i] = fld.scalar(1)
            ops.append(op)
        return cls(fld, tuple(ops), len(monomials), name)

    def nilpotency_index(self) -> int:
        """Least n with every monomial of degree n in the operators vanishing"""
        if self.dim == 0:
            return 0
        fld = self.field
        current = [fld.identity(self.dim)]
        n = 0
        while any(not fld.is_zero(x) for x in current):
            current = [fld.matmul(a, x) for a in self.ops for x in current]
            current = _dedupe(fld, current)
            n += 1
        return n

    def power_image(self, k: int) -> np.ndarray:
        """Basis of m^k M, m the maximal ideal"""
        fld = self.field
        basis = fld.identity(self.dim)
        for _ in range(k):
            if basis.shape[1] == 0:
                break
            basis = subspace_basis(fld, np.hstack([fld.matmul(a, basis) for a in self.ops]))
        return basis

    def jordan_type(self) -> Tuple[int, ...]:
        """Ranks of t^j for j = 1, 2, ... until zero; determines the module when d = 1"""
        fld = self.field
        ranks = []
        power = fld.identity(self.dim)
        while True:
            power = fld.matmul(self.t, power)
            r = row_reduce(fld, power).rank if self.dim else 0
            ranks.append(r)
            if r == 0:
                break
        return tuple(ranks)

    def exponents(self) -> List[int]:
        """Block sizes of t, read from the rank sequence"""
        ranks = (self.dim,) + self.jordan_type()
        at_least = [ranks[j] - ranks[j + 1] for j in range(len(ranks) - 1)]
        sizes = []
        for j, count in enumerate(at_least):
            exact = count - (at_least[j + 1] if j + 1 < len(at_least) else 0)
            sizes.extend([j + 1] * exact)
        return sorted(sizes)

    def is_isomorphic(self, other: 'TorsionModule') -> bool:
        if self.variables != 1 or other.variables != 1:
            raise EngineError("isomorphism test is only decided for one variable")
        return self.dim == other.dim and self.jordan_type() == other.jordan_type()

    def hom_basis(self, other: 'TorsionModule', ops_src: Optional[Sequence[np.ndarray]] = None,
                  ops_dst: Optional[Sequence[np.ndarray]] = None) -> np.ndarray:
        """Columns of vectorized maps commuting with the operators"""
        return intertwiners(self.field, ops_src or self.ops, ops_dst or other.ops, self.dim, other.dim)

    def submodule(self, vectors: np.ndarray, name: Optional[str] = None) -> Tuple['TorsionModule', np.ndarray]:
        basis = spin(self.rep, vectors)
        restricted = self.rep.restrict(basis) if basis.shape[1] else None
        ops = restricted.ops if restricted else tuple(self.field.zeros(0, 0) for _ in self.ops)
        return TorsionModule(self.field, ops, basis.shape[1], name or f"{self.name}'"), basis

    def quotient(self, sub_basis: np.ndarray, name: Optional[str] = None) -> Tuple['TorsionModule', np.ndarray]:
        """M / col(sub_basis) with the projection matrix"""
        fld = self.field
        incl = LinMap(VecSpace.standard(fld, sub_basis.shape[1]), self.space, sub_basis)
        q_space, proj = cokernel(incl, 'q')
        ops = []
        for a in self.ops:
            img = fld.matmul(proj.matrix, a)
            if q_space.dim == 0:
                ops.append(fld.zeros(0, 0))
                continue
            op_t = solve_matrix(fld, proj.matrix.T.copy(), img.T.copy())
            if op_t is None:
                raise EngineError("subspace is not a submodule")
            ops.append(op_t.T.copy())
        return TorsionModule(fld, tuple(ops), q_space.dim, name or f"{self.name}/N"), proj.matrix

    def direct_sum(self, other: 'TorsionModule') -> 'TorsionModule':
        fld = self.field
        n = self.dim + other.dim
        ops = []
        for a, b in zip(self.ops, other.ops):
            block = fld.zeros(n, n)
            block[:self.dim, :self.dim] = a
            block[self.dim:, self.dim:] = b
            ops.append(block)
        return TorsionModule(fld, tuple(ops), n, f"{self.name}+{other.name}")

    def evaluate(self, series: np.ndarray, variable: int = 0) -> np.ndarray:
        """sum_i a_i t^i acting on M"""
        fld = self.field
        total = fld.zeros(self.dim, self.dim)
        power = fld.identity(self.dim)
        for a in series:
            if fld.is_zero(power):
                break
            if a != 0:
                total = fld.add(total, fld.scale(a, power))
            power = fld.matmul(self.ops[variable], power)
        return total

    def describe(self) -> Dict:
        out = {'name': self.name, 'dim': self.dim, 'variables': self.variables}
        if self.variables == 1:
            out['exponents'] = self.exponents()
        return out


def _monomials_of_degree(variables: int, total: int):
    for combo in itertools.combinations_with_replacement(range(variables), total):
        yield tuple(combo.count(v) for v in range(variables))


def _dedupe(fld: Field, mats: List[np.ndarray]) -> List[np.ndarray]:
    if not mats:
        return mats
    stacked = np.hstack([m.reshape(-1, 1) for m in mats])
    basis = subspace_basis(fld, stacked)
    n = mats[0].shape[0]
    return [basis[:, j].reshape(n, n) for j in range(basis.shape[1])]


def presentation_quotient(ring: TruncatedSeriesRing, matrix: np.ndarray,
                          name: str = 'P') -> Tuple[TorsionModule, np.ndarray]:
    """(k[t]/t^N)^g / (columns of A) with the projection from (k[t]/t^N)^g, index i * N + k for t^k e_i"""
    fld = ring.field
    g, r, n = matrix.shape
    free = TorsionModule.from_exponents(fld, [n] * g, 'F')
    cols = []
    for j in range(r):
        vec = fld.zeros(g * n, 1)
        for i in range(g):
            vec[i * n:(i + 1) * n, 0] = matrix[i, j]
        cols.append(vec)
    if not cols:
        return TorsionModule(fld, free.ops, free.dim, name), fld.identity(free.dim)
    _, basis = free.submodule(np.hstack(cols))
    return free.quotient(basis, name)


def module_from_presentation(ring: TruncatedSeriesRing, matrix: np.ndarray, name: str = 'P') -> TorsionModule:
    return presentation_quotient(ring, matrix, name)[0]


def module_from_relations(fld: Field, variables: int, order: int,
                          relations: Sequence[Dict[Tuple[int, ...], int]], name: str = 'P') -> TorsionModule:
    """k[t_1..t_d]/((t)^order + relations) for cyclic finite-length modules in d variables"""
    free = TorsionModule.truncated_free(fld, variables, order)
    monomials = [m for total in range(order) for m in _monomials_of_degree(variables, total)]
    index = {m: i for i, m in enumerate(monomials)}
    cols = []
    for rel in relations:
        vec = fld.zeros(free.dim, 1)
        for mono, coeff in rel.items():
            if tuple(mono) in index:
                vec[index[tuple(mono)], 0] = fld.scalar(coeff)
        cols.append(vec)
    if not cols:
        return TorsionModule(fld, free.ops, free.dim, name)
    _, basis = free.submodule(np.hstack(cols))
    quotient, _ = free.quotient(basis, name)
    return quotient
