"""
Exact linear algebra over prime fields F_p and the rationals.

Matrices are numpy arrays: int64 reduced mod p for F_p, object arrays of
fractions.Fraction for Q. A LinMap stores a dim(codomain) x dim(domain)
matrix. Hom spaces use the row-major vectorization of that matrix, which
makes the currying identification

    Hom(V, Hom(U, W)) = Hom(U (x) V, W)

a plain reshape (the outer variable is the right tensor factor).
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import isprime

from src.algebra.errors import DimensionMismatch, FieldMismatch

logger = logging.getLogger(__name__)

INT64_LIMIT = 2 ** 62


@dataclass(frozen=True)
class Field:
    """F_p for a prime p, or Q when characteristic is 0"""
    characteristic: int

    def __post_init__(self):
        if self.characteristic < 0 or (self.characteristic != 0 and not isprime(self.characteristic)):
            raise ValueError(f"characteristic must be 0 or prime, got {self.characteristic}")

    @property
    def is_rational(self) -> bool:
        return self.characteristic == 0

    @property
    def dtype(self):
        return object if self.is_rational else np.int64

    def __str__(self) -> str:
        return 'Q' if self.is_rational else f"F_{self.characteristic}"

    def scalar(self, value):
        if self.is_rational:
            return Fraction(value)
        return int(value) % self.characteristic

    def inv(self, value):
        if self.is_rational:
            return 1 / Fraction(value)
        return pow(int(value), -1, self.characteristic)

    def reduce(self, arr) -> np.ndarray:
        raw = np.asarray(arr, dtype=object)
        if self.is_rational:
            flat = raw.reshape(-1)
            out = np.empty(flat.shape[0], dtype=object)
            for i, x in enumerate(flat):
                out[i] = x if isinstance(x, Fraction) else Fraction(int(x)) if isinstance(x, (int, np.integer)) else Fraction(x)
            return out.reshape(raw.shape)
        p = self.characteristic
        flat = raw.reshape(-1)
        out = np.fromiter((int(x) % p for x in flat), dtype=np.int64, count=flat.shape[0])
        return out.reshape(raw.shape)

    def matrix(self, data, shape: Optional[Tuple[int, int]] = None) -> np.ndarray:
        if isinstance(data, np.ndarray) and data.dtype == np.int64 and not self.is_rational:
            arr = np.mod(data, self.characteristic)
        else:
            arr = self.reduce(data)
        if shape is not None:
            arr = arr.reshape(shape)
        return arr

    def zeros(self, rows: int, cols: int) -> np.ndarray:
        if self.is_rational:
            return self.reduce(np.zeros((rows, cols), dtype=np.int64))
        return np.zeros((rows, cols), dtype=np.int64)

    def identity(self, n: int) -> np.ndarray:
        return self.reduce(np.eye(n, dtype=np.int64))

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape[1] != b.shape[0]:
            raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
        if self.is_rational:
            if a.shape[1] == 0:
                return self.zeros(a.shape[0], b.shape[1])
            return a.dot(b)
        p = self.characteristic
        if (p - 1) ** 2 * max(a.shape[1], 1) < INT64_LIMIT:
            return (a @ b) % p
        return self.reduce(a.astype(object).dot(b.astype(object)))

    def kron(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.is_rational:
            return self.reduce(np.kron(a, b))
        return np.kron(a, b) % self.characteristic

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a + b if self.is_rational else (a + b) % self.characteristic

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a - b if self.is_rational else (a - b) % self.characteristic

    def scale(self, c, a: np.ndarray) -> np.ndarray:
        c = self.scalar(c)
        return a * c if self.is_rational else (a * c) % self.characteristic

    def is_zero(self, a: np.ndarray) -> bool:
        return not np.any(a != 0)

    def elements(self) -> List[int]:
        if self.is_rational:
            raise ValueError("Q has no finite element list")
        return list(range(self.characteristic))


@dataclass(frozen=True)
class VecSpace:
    """Finite-dimensional vector space with named basis vectors"""
    field: Field
    dim: int
    basis_labels: Tuple[str, ...] = ()

    def __post_init__(self):
        labels = tuple(self.basis_labels) if self.basis_labels else tuple(f"e{i}" for i in range(self.dim))
        if len(labels) != self.dim:
            raise DimensionMismatch(f"{len(labels)} labels for a space of dimension {self.dim}")
        if len(set(labels)) != len(labels):
            raise ValueError("basis labels must be distinct")
        object.__setattr__(self, 'basis_labels', labels)

    @classmethod
    def standard(cls, field: Field, dim: int, prefix: str = 'e') -> 'VecSpace':
        return cls(field, dim, tuple(f"{prefix}{i}" for i in range(dim)))

    def relabel(self, prefix: str) -> 'VecSpace':
        return VecSpace.standard(self.field, self.dim, prefix)

    def zero_vector(self) -> np.ndarray:
        return self.field.zeros(self.dim, 1).reshape(-1)


def ground(field: Field) -> VecSpace:
    """The one-dimensional space k"""
    return VecSpace(field, 1, ('1',))


def _same_field(*fields: Field):
    first = fields[0]
    for other in fields[1:]:
        if other != first:
            raise FieldMismatch(f"field mismatch: {first} vs {other}")


@dataclass(frozen=True, eq=False)
class LinMap:
    """Linear map given by a dim(codomain) x dim(domain) matrix"""
    domain: VecSpace
    codomain: VecSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        _same_field(self.domain.field, self.codomain.field)
        mat = self.field.matrix(self.matrix).reshape(self.codomain.dim, self.domain.dim)
        mat.setflags(write=False)
        object.__setattr__(self, 'matrix', mat)

    @property
    def field(self) -> Field:
        return self.domain.field

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    @classmethod
    def identity(cls, space: VecSpace) -> 'LinMap':
        return cls(space, space, space.field.identity(space.dim))

    @classmethod
    def zero(cls, domain: VecSpace, codomain: VecSpace) -> 'LinMap':
        return cls(domain, codomain, domain.field.zeros(codomain.dim, domain.dim))

    def compose(self, other: 'LinMap') -> 'LinMap':
        """self o other"""
        if other.codomain.dim != self.domain.dim:
            raise DimensionMismatch(f"cannot compose {self.shape} after {other.shape}")
        return LinMap(other.domain, self.codomain, self.field.matmul(self.matrix, other.matrix))

    def __matmul__(self, other: 'LinMap') -> 'LinMap':
        return self.compose(other)

    def __add__(self, other: 'LinMap') -> 'LinMap':
        self._check_parallel(other)
        return LinMap(self.domain, self.codomain, self.field.add(self.matrix, other.matrix))

    def __sub__(self, other: 'LinMap') -> 'LinMap':
        self._check_parallel(other)
        return LinMap(self.domain, self.codomain, self.field.sub(self.matrix, other.matrix))

    def __neg__(self) -> 'LinMap':
        return LinMap(self.domain, self.codomain, self.field.scale(-1, self.matrix))

    def scaled(self, c) -> 'LinMap':
        return LinMap(self.domain, self.codomain, self.field.scale(c, self.matrix))

    def _check_parallel(self, other: 'LinMap'):
        if self.shape != other.shape:
            raise DimensionMismatch(f"maps of shapes {self.shape} and {other.shape} are not parallel")
        _same_field(self.field, other.field)

    def apply(self, vector) -> np.ndarray:
        vec = self.field.matrix(vector).reshape(-1)
        if vec.shape[0] != self.domain.dim:
            raise DimensionMismatch(f"vector of length {vec.shape[0]} outside domain of dimension {self.domain.dim}")
        return self.field.matmul(self.matrix, vec.reshape(-1, 1)).reshape(-1)

    def transpose(self) -> 'LinMap':
        """The dual map, in dual bases"""
        return LinMap(self.codomain, self.domain, self.matrix.T.copy())

    def is_zero(self) -> bool:
        return self.field.is_zero(self.matrix)

    def equals(self, other: 'LinMap') -> bool:
        return self.shape == other.shape and not np.any(self.matrix != other.matrix)

    def restrict(self, inclusion: 'LinMap') -> 'LinMap':
        return self.compose(inclusion)

    @cached_property
    def echelon(self) -> 'Echelon':
        return row_reduce(self.field, self.matrix)


@dataclass(frozen=True)
class Echelon:
    """Reduced row echelon form R = T A with pivot columns"""
    reduced: np.ndarray
    transform: np.ndarray
    pivots: Tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def row_reduce(field: Field, matrix: np.ndarray) -> Echelon:
    """Gauss-Jordan elimination; returns RREF together with the row transform"""
    a = field.matrix(matrix).copy()
    rows, cols = a.shape
    t = field.identity(rows)
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nonzero = np.nonzero(a[r:, c] != 0)[0]
        if len(nonzero) == 0:
            continue
        pivot = r + int(nonzero[0])
        if pivot != r:
            a[[r, pivot]] = a[[pivot, r]]
            t[[r, pivot]] = t[[pivot, r]]
        inv = field.inv(a[r, c])
        a[r] = field.scale(inv, a[r])
        t[r] = field.scale(inv, t[r])
        for i in np.nonzero(a[:, c] != 0)[0]:
            if i == r:
                continue
            factor = a[i, c]
            a[i] = field.sub(a[i], field.scale(factor, a[r]))
            t[i] = field.sub(t[i], field.scale(factor, t[r]))
        pivots.append(c)
        r += 1
    return Echelon(a, t, tuple(pivots))


def rank(f: LinMap) -> int:
    return f.echelon.rank


def nullspace_matrix(field: Field, matrix: np.ndarray) -> np.ndarray:
    """Columns form a basis of {x : A x = 0}; one column per free variable"""
    ech = row_reduce(field, matrix)
    cols = matrix.shape[1]
    free = [c for c in range(cols) if c not in ech.pivots]
    basis = field.zeros(cols, len(free))
    for j, fcol in enumerate(free):
        basis[fcol, j] = field.scalar(1)
        for i, pcol in enumerate(ech.pivots):
            basis[pcol, j] = field.scalar(-ech.reduced[i, fcol])
    return basis


def kernel(f: LinMap, prefix: str = 'ker') -> Tuple[VecSpace, LinMap]:
    basis = nullspace_matrix(f.field, f.matrix)
    space = VecSpace.standard(f.field, basis.shape[1], prefix)
    return space, LinMap(space, f.domain, basis)


def image(f: LinMap, prefix: str = 'im') -> Tuple[VecSpace, LinMap]:
    """Image with an inclusion whose columns are pivot columns of f"""
    cols = f.matrix[:, list(f.echelon.pivots)]
    space = VecSpace.standard(f.field, len(f.echelon.pivots), prefix)
    return space, LinMap(space, f.codomain, cols)


def cokernel(f: LinMap, prefix: str = 'coker') -> Tuple[VecSpace, LinMap]:
    """Projection onto codomain / im f, as the left null space of f"""
    left = nullspace_matrix(f.field, f.matrix.T.copy()).T.copy()
    space = VecSpace.standard(f.field, left.shape[0], prefix)
    return space, LinMap(f.codomain, space, left)


def solve(f: LinMap, target) -> Optional[np.ndarray]:
    """A preimage of target with free variables set to zero, or None"""
    vec = f.field.matrix(target).reshape(-1)
    if vec.shape[0] != f.codomain.dim:
        raise DimensionMismatch(f"target of length {vec.shape[0]} outside codomain of dimension {f.codomain.dim}")
    ech = f.echelon
    moved = f.field.matmul(ech.transform, vec.reshape(-1, 1)).reshape(-1)
    if np.any(moved[ech.rank:] != 0):
        return None
    x = f.field.zeros(f.domain.dim, 1).reshape(-1)
    for i, pcol in enumerate(ech.pivots):
        x[pcol] = moved[i]
    return x


def solve_matrix(field: Field, a: np.ndarray, b: np.ndarray) -> Optional[np.ndarray]:
    """X with A X = B column by column, or None when some column is unsolvable"""
    dom = VecSpace.standard(field, a.shape[1])
    cod = VecSpace.standard(field, a.shape[0])
    f = LinMap(dom, cod, a)
    cols = []
    for j in range(b.shape[1]):
        x = solve(f, b[:, j])
        if x is None:
            return None
        cols.append(x.reshape(-1, 1))
    if not cols:
        return field.zeros(a.shape[1], 0)
    return np.hstack(cols)


def is_injective(f: LinMap) -> bool:
    return rank(f) == f.domain.dim


def is_surjective(f: LinMap) -> bool:
    return rank(f) == f.codomain.dim


def is_iso(f: LinMap) -> bool:
    return f.domain.dim == f.codomain.dim and is_injective(f)


def inverse(f: LinMap) -> LinMap:
    if not is_iso(f):
        raise DimensionMismatch(f"map of shape {f.shape} and rank {rank(f)} is not invertible")
    ech = f.echelon
    return LinMap(f.codomain, f.domain, ech.transform)


def tensor_space(u: VecSpace, v: VecSpace) -> VecSpace:
    _same_field(u.field, v.field)
    labels = tuple(f"{a}⊗{b}" for a in u.basis_labels for b in v.basis_labels)
    return VecSpace(u.field, u.dim * v.dim, labels)


def tensor(f: LinMap, g: LinMap) -> LinMap:
    """Kronecker product; basis of U (x) V is left factor major"""
    _same_field(f.field, g.field)
    return LinMap(tensor_space(f.domain, g.domain), tensor_space(f.codomain, g.codomain),
                  f.field.kron(f.matrix, g.matrix))


def tensor_many(maps: Sequence[LinMap]) -> LinMap:
    result = maps[0]
    for m in maps[1:]:
        result = tensor(result, m)
    return result


def flip(u: VecSpace, v: VecSpace) -> LinMap:
    """The swap U (x) V -> V (x) U"""
    field = u.field
    mat = field.zeros(u.dim * v.dim, u.dim * v.dim)
    for i in range(u.dim):
        for j in range(v.dim):
            mat[j * u.dim + i, i * v.dim + j] = field.scalar(1)
    return LinMap(tensor_space(u, v), tensor_space(v, u), mat)


def hom_space(m: VecSpace, n: VecSpace) -> VecSpace:
    """Hom_k(M, N) with elementary-matrix basis, row-major in (target, source)"""
    _same_field(m.field, n.field)
    labels = tuple(f"{a}->{b}" for b in n.basis_labels for a in m.basis_labels)
    return VecSpace(m.field, m.dim * n.dim, labels)


def hom_vector(f: LinMap) -> np.ndarray:
    return f.matrix.reshape(-1).copy()


def hom_map(vector, m: VecSpace, n: VecSpace) -> LinMap:
    return LinMap(m, n, m.field.matrix(vector).reshape(n.dim, m.dim))


def curry(f: LinMap, u: VecSpace, v: VecSpace) -> LinMap:
    """F: U (x) V -> W  to  V -> Hom(U, W), v |-> (u |-> F(u (x) v))"""
    w = f.codomain
    if f.domain.dim != u.dim * v.dim:
        raise DimensionMismatch(f"domain of dimension {f.domain.dim} is not {u.dim} x {v.dim}")
    return LinMap(v, hom_space(u, w), f.matrix.reshape(w.dim * u.dim, v.dim))


def uncurry(g: LinMap, u: VecSpace, w: VecSpace) -> LinMap:
    """Inverse of curry: V -> Hom(U, W)  to  U (x) V -> W"""
    v = g.domain
    if g.codomain.dim != u.dim * w.dim:
        raise DimensionMismatch(f"codomain of dimension {g.codomain.dim} is not Hom({u.dim}, {w.dim})")
    return LinMap(tensor_space(u, v), w, g.matrix.reshape(w.dim, u.dim * v.dim))


def hom_left(f: LinMap, w: VecSpace) -> LinMap:
    """Hom(f, W): Hom(B, W) -> Hom(A, W), g |-> g o f, for f: A -> B"""
    field = f.field
    mat = field.kron(field.identity(w.dim), f.matrix.T.copy())
    return LinMap(hom_space(f.codomain, w), hom_space(f.domain, w), mat)


def hom_right(u: VecSpace, f: LinMap) -> LinMap:
    """Hom(U, f): Hom(U, A) -> Hom(U, B), g |-> f o g"""
    field = f.field
    mat = field.kron(f.matrix, field.identity(u.dim))
    return LinMap(hom_space(u, f.domain), hom_space(u, f.codomain), mat)


def direct_sum_space(spaces: Sequence[VecSpace], prefix: str = 's') -> VecSpace:
    field = spaces[0].field
    _same_field(*[s.field for s in spaces])
    labels = tuple(f"{prefix}{i}:{label}" for i, s in enumerate(spaces) for label in s.basis_labels)
    return VecSpace(field, sum(s.dim for s in spaces), labels)


def block_diag(maps: Sequence[LinMap]) -> LinMap:
    field = maps[0].field
    rows = sum(m.codomain.dim for m in maps)
    cols = sum(m.domain.dim for m in maps)
    mat = field.zeros(rows, cols)
    r = c = 0
    for m in maps:
        mat[r:r + m.codomain.dim, c:c + m.domain.dim] = m.matrix
        r += m.codomain.dim
        c += m.domain.dim
    return LinMap(direct_sum_space([m.domain for m in maps]),
                  direct_sum_space([m.codomain for m in maps]), mat)


def stack_columns(field: Field, columns: Iterable[np.ndarray], length: int) -> np.ndarray:
    cols = [field.matrix(c).reshape(-1, 1) for c in columns]
    if not cols:
        return field.zeros(length, 0)
    return np.hstack(cols)


def subspace_basis(field: Field, columns: np.ndarray) -> np.ndarray:
    """Independent columns spanning the same subspace"""
    ech = row_reduce(field, columns)
    return columns[:, list(ech.pivots)]


def subspace_contains(field: Field, basis: np.ndarray, vectors: np.ndarray) -> bool:
    if vectors.shape[1] == 0:
        return True
    r = row_reduce(field, basis).rank if basis.shape[1] else 0
    return row_reduce(field, np.hstack([basis, vectors])).rank == r


def subspaces_equal(field: Field, a: np.ndarray, b: np.ndarray) -> bool:
    return subspace_contains(field, a, b) and subspace_contains(field, b, a)


def intersect(field: Field, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Basis of col(A) and col(B) intersected"""
    if a.shape[1] == 0 or b.shape[1] == 0:
        return field.zeros(a.shape[0], 0)
    null = nullspace_matrix(field, np.hstack([a, field.scale(-1, b)]))
    inter = field.matmul(a, null[:a.shape[1], :])
    return subspace_basis(field, inter)


def restrict_to_subspace(f: LinMap, sub_basis: np.ndarray, target_basis: np.ndarray) -> Optional[np.ndarray]:
    """Matrix of f on col(sub_basis) in coordinates of col(target_basis), or None if f leaves it"""
    images = f.field.matmul(f.matrix, sub_basis)
    return solve_matrix(f.field, target_basis, images)


def quotient_map(field: Field, ambient_dim: int, sub_basis: np.ndarray, prefix: str = 'q') -> LinMap:
    """Projection k^n -> k^n / col(sub_basis)"""
    amb = VecSpace.standard(field, ambient_dim)
    incl = LinMap(VecSpace.standard(field, sub_basis.shape[1]), amb, sub_basis)
    _, proj = cokernel(incl, prefix)
    return proj


def intertwiners(field: Field, ops_src: Sequence[np.ndarray], ops_dst: Sequence[np.ndarray],
                 dim_src: int, dim_dst: int) -> np.ndarray:
    """Basis (as columns of vectorized maps) of f: src -> dst with f A_i = B_i f for all i"""
    blocks = []
    eye_src = field.identity(dim_src)
    eye_dst = field.identity(dim_dst)
    for a, b in zip(ops_src, ops_dst):
        # vec(B f - f A) = (B (x) I - I (x) A^T) vec f, row-major vec
        blocks.append(field.sub(field.kron(b, eye_src), field.kron(eye_dst, a.T.copy())))
    if not blocks:
        return field.identity(dim_src * dim_dst)
    return nullspace_matrix(field, np.vstack(blocks))
