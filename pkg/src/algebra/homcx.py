"""
Bounded cochain complexes of vector spaces.

Indexing is cohomological: d^i maps X^i to X^{i+1}. Derived-functor outputs
of the left kind live in degrees <= 0, those of the right kind in degrees >= 0.
A complex may carry a decoration, one structured object (comodule,
contramodule, smooth module) per degree whose space is X^i; differentials are
then checked to be morphisms of those objects.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.algebra.errors import AxiomViolation, DimensionMismatch, PreconditionError
from src.algebra.exactlin import (Field, LinMap, VecSpace, cokernel, direct_sum_space, kernel,
                                  nullspace_matrix, rank, row_reduce, solve_matrix)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Complex:
    field: Field
    terms: Dict[int, VecSpace]
    differentials: Dict[int, LinMap] = field(default_factory=dict)
    decoration: Optional[Dict[int, Any]] = None
    tag: Optional[str] = None

    def __post_init__(self):
        terms = {i: v for i, v in sorted(self.terms.items()) if v.dim > 0}
        object.__setattr__(self, 'terms', terms)
        diffs = {}
        for i, d in sorted(self.differentials.items()):
            if d.domain.dim != self.dim(i) or d.codomain.dim != self.dim(i + 1):
                raise DimensionMismatch(f"d^{i} has shape {d.shape}, expected ({self.dim(i + 1)}, {self.dim(i)})")
            if not d.is_zero():
                diffs[i] = d
        object.__setattr__(self, 'differentials', diffs)
        for i in diffs:
            if i + 1 in diffs and not (diffs[i + 1] @ diffs[i]).is_zero():
                raise AxiomViolation(f"d^{i + 1} o d^{i} is not zero")
        if self.decoration:
            for i, d in diffs.items():
                src, dst = self.decoration.get(i), self.decoration.get(i + 1)
                if src is not None and dst is not None and not src.is_morphism(dst, d):
                    raise AxiomViolation(f"differential d^{i} is not a morphism of {self.tag or 'decorated'} objects")

    @classmethod
    def zero(cls, field: Field) -> 'Complex':
        return cls(field, {})

    @classmethod
    def concentrated(cls, space: VecSpace, degree: int = 0, obj: Any = None, tag: Optional[str] = None) -> 'Complex':
        decoration = {degree: obj} if obj is not None else None
        return cls(space.field, {degree: space}, {}, decoration, tag)

    @classmethod
    def two_term(cls, d: LinMap, degree: int = -1, decoration: Optional[Dict[int, Any]] = None,
                 tag: Optional[str] = None) -> 'Complex':
        """[X^degree --d--> X^{degree+1}]"""
        return cls(d.field, {degree: d.domain, degree + 1: d.codomain}, {degree: d}, decoration, tag)

    def space(self, i: int) -> VecSpace:
        return self.terms.get(i, VecSpace(self.field, 0, ()))

    def dim(self, i: int) -> int:
        return self.space(i).dim

    def d(self, i: int) -> LinMap:
        if i in self.differentials:
            return self.differentials[i]
        return LinMap.zero(self.space(i), self.space(i + 1))

    def degrees(self) -> List[int]:
        return sorted(self.terms)

    def span(self) -> Tuple[int, int]:
        degs = self.degrees()
        return (degs[0], degs[-1]) if degs else (0, -1)

    def euler_characteristic(self) -> int:
        return sum((-1) ** (i % 2) * v.dim for i, v in self.terms.items())

    def homology_dims(self) -> Dict[int, int]:
        result = {}
        for i in self.degrees():
            h = homology(self, i).dim
            if h:
                result[i] = h
        return result

    def homology_euler(self) -> int:
        return sum((-1) ** (i % 2) * h for i, h in self.homology_dims().items())

    def is_exact(self) -> bool:
        return not self.homology_dims()

    def homology_support(self) -> List[int]:
        return sorted(self.homology_dims())


@dataclass(frozen=True, eq=False)
class ChainMap:
    source: Complex
    target: Complex
    components: Dict[int, LinMap] = field(default_factory=dict)

    def __post_init__(self):
        degrees = set(self.source.degrees()) | set(self.target.degrees())
        for i in degrees:
            left = self.component(i + 1) @ self.source.d(i)
            right = self.target.d(i) @ self.component(i)
            if not left.equals(right):
                raise AxiomViolation(f"chain map does not commute with differentials in degree {i}")

    def component(self, i: int) -> LinMap:
        if i in self.components:
            f = self.components[i]
            if f.domain.dim != self.source.dim(i) or f.codomain.dim != self.target.dim(i):
                raise DimensionMismatch(f"component {i} has shape {f.shape}")
            return f
        return LinMap.zero(self.source.space(i), self.target.space(i))

    @classmethod
    def identity(cls, x: Complex) -> 'ChainMap':
        return cls(x, x, {i: LinMap.identity(v) for i, v in x.terms.items()})

    @classmethod
    def zero(cls, x: Complex, y: Complex) -> 'ChainMap':
        return cls(x, y, {})


@dataclass(frozen=True)
class HomologyData:
    """Cycles Z, boundaries B and representatives of Z/B, all as column bases in X^i"""
    space: VecSpace
    cycles: np.ndarray
    boundaries: np.ndarray
    representatives: np.ndarray

    def coordinates(self, field: Field, vectors: np.ndarray) -> np.ndarray:
        """Classes of cycle columns in the representative basis"""
        basis = np.hstack([self.boundaries, self.representatives])
        coords = solve_matrix(field, basis, vectors)
        if coords is None:
            raise PreconditionError("vectors are not cycles")
        return coords[self.boundaries.shape[1]:, :]


def homology_data(x: Complex, degree: int) -> HomologyData:
    fld = x.field
    _, z_incl = kernel(x.d(degree))
    cycles = z_incl.matrix
    d_in = x.d(degree - 1)
    boundaries = d_in.matrix[:, list(d_in.echelon.pivots)]
    stacked = np.hstack([boundaries, cycles]) if cycles.shape[1] else boundaries
    pivots = row_reduce(fld, stacked).pivots if stacked.shape[1] else ()
    nb = boundaries.shape[1]
    reps_cols = [c - nb for c in pivots if c >= nb]
    reps = cycles[:, reps_cols] if reps_cols else fld.zeros(x.dim(degree), 0)
    space = VecSpace.standard(fld, len(reps_cols), f"H{degree}_")
    return HomologyData(space, cycles, boundaries, reps)


def homology(x: Complex, degree: int) -> VecSpace:
    """ker d^i / im d^{i-1} with representative basis"""
    return homology_data(x, degree).space


def induced_on_homology(f: ChainMap, degree: int) -> LinMap:
    hx = homology_data(f.source, degree)
    hy = homology_data(f.target, degree)
    images = f.target.field.matmul(f.component(degree).matrix, hx.representatives)
    coords = hy.coordinates(f.target.field, images)
    return LinMap(hx.space, hy.space, coords)


@dataclass
class QuasiIsoResult:
    is_quasi_iso: bool
    degree: Optional[int] = None
    kernel_dim: int = 0
    cokernel_dim: int = 0

    def __bool__(self) -> bool:
        return self.is_quasi_iso

    def to_dict(self) -> Dict[str, Any]:
        if self.is_quasi_iso:
            return {'quasi_iso': True}
        return {'quasi_iso': False, 'degree': self.degree,
                'kernel_dim': self.kernel_dim, 'cokernel_dim': self.cokernel_dim}


def is_quasi_iso(f: ChainMap) -> QuasiIsoResult:
    degrees = sorted(set(f.source.degrees()) | set(f.target.degrees()))
    for i in degrees:
        h = induced_on_homology(f, i)
        r = rank(h)
        if r != h.domain.dim or r != h.codomain.dim:
            logger.debug(f"quasi-isomorphism fails in degree {i}")
            return QuasiIsoResult(False, i, h.domain.dim - r, h.codomain.dim - r)
    return QuasiIsoResult(True)


def cone(f: ChainMap) -> Complex:
    """Cone^i = X^{i+1} + Y^i, d(x, y) = (-d x, f x + d y)"""
    x, y = f.source, f.target
    fld = x.field
    degrees = set(i - 1 for i in x.degrees()) | set(y.degrees())
    terms = {i: direct_sum_space([x.space(i + 1), y.space(i)], 'c') for i in degrees}
    diffs = {}
    for i in degrees:
        src = terms[i]
        dst = terms.get(i + 1, direct_sum_space([x.space(i + 2), y.space(i + 1)], 'c'))
        mat = fld.zeros(dst.dim, src.dim)
        ax, ay = x.dim(i + 1), y.dim(i)
        bx = x.dim(i + 2)
        mat[:bx, :ax] = fld.scale(-1, x.d(i + 1).matrix)
        mat[bx:, :ax] = f.component(i + 1).matrix
        mat[bx:, ax:] = y.d(i).matrix
        if dst.dim and src.dim:
            diffs[i] = LinMap(src, dst, mat)
        if i + 1 not in terms:
            terms[i + 1] = dst
    return Complex(fld, terms, diffs)


def shift(x: Complex, n: int) -> Complex:
    """X[n]^i = X^{i+n}, differential negated when n is odd"""
    sign = -1 if n % 2 else 1
    terms = {i - n: v for i, v in x.terms.items()}
    diffs = {i - n: d.scaled(sign) for i, d in x.differentials.items()}
    decoration = {i - n: o for i, o in x.decoration.items()} if x.decoration else None
    return Complex(x.field, terms, diffs, decoration, x.tag)


def truncate_support(x: Complex, lo: int, hi: int) -> Complex:
    """Canonical truncation tau_{>=lo} tau_{<=hi}, quasi-isomorphic to X"""
    dims = x.homology_dims()
    for i in sorted(dims):
        if i < lo or i > hi:
            raise PreconditionError(f"homology in degree {i} lies outside [{lo}, {hi}]", degree=i)
    if not dims:
        return Complex.zero(x.field)
    first, last = x.span()
    if lo <= first and last <= hi:
        return x
    fld = x.field
    terms: Dict[int, VecSpace] = {i: x.space(i) for i in range(lo + 1, hi)}
    # tau_{<=hi}: ker d^hi in degree hi
    zspace, zincl = kernel(x.d(hi), f"Z{hi}_")
    # tau_{>=lo}: coker d^{lo-1} in degree lo
    diffs: Dict[int, LinMap] = {}
    if lo == hi:
        qspace, qproj = cokernel(LinMap(x.space(lo - 1), zspace, _corestrict(x.d(lo - 1), zincl)), f"Q{lo}_")
        return Complex(fld, {lo: qspace}, {})
    terms[hi] = zspace
    cspace, cproj = cokernel(x.d(lo - 1), f"Q{lo}_")
    terms[lo] = cspace
    for i in range(lo, hi):
        src, dst = terms[i], terms[i + 1]
        d = x.d(i)
        if i == lo:
            # descend d^lo to the cokernel
            mat = solve_matrix(fld, cproj.matrix.T.copy(), d.matrix.T.copy())
            d = LinMap(src, x.space(i + 1), mat.T.copy())
        if i + 1 == hi:
            d = LinMap(src, dst, _corestrict(d, zincl))
        diffs[i] = LinMap(src, dst, d.matrix)
    return Complex(fld, terms, diffs)


def _corestrict(d: LinMap, incl: LinMap):
    """Coordinates of d's image inside the subspace col(incl)"""
    mat = solve_matrix(d.field, incl.matrix, d.matrix)
    if mat is None:
        raise PreconditionError("map does not land in the subspace")
    return mat


def homology_table(x: Complex) -> List[Dict[str, int]]:
    """Rows (degree, term dim, homology dim) in degree order"""
    return [{'degree': i, 'dim': x.dim(i), 'homology': homology(x, i).dim} for i in x.degrees()]
