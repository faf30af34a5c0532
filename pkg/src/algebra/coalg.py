"""
Finite-dimensional coalgebras stored by structure constants.

Conventions: comult is a LinMap C -> C (x) C whose column j is Delta(e_j) in
the left-major basis of C (x) C. The dual algebra uses the multiplication
(phi psi)(c) = phi(c_(2)) psi(c_(1)), which is the one under which left
contramodules (with the currying of exactlin) become left C^∨-modules. For
k(G) this is k[G^op], identified with k[G] through g |-> g^{-1}.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from src.algebra.errors import CheckResult, EngineError
from src.algebra.exactlin import (Field, LinMap, VecSpace, cokernel, flip, ground, kernel, nullspace_matrix,
                                  solve_matrix, subspace_basis, tensor, tensor_space)
from src.algebra.groups import GroupTable
from src.algebra.reps import OperatorRep, hom_dimension, indecomposable_summands, proper_subspace

logger = logging.getLogger(__name__)


class NoCoaugmentation(EngineError):
    def __init__(self, message: str, grouplikes: List[List[int]]):
        super().__init__(message)
        self.grouplikes = grouplikes


class NotConilpotent(EngineError):
    pass


@dataclass(frozen=True, eq=False)
class Coalgebra:
    space: VecSpace
    comult: LinMap
    counit: LinMap
    coaugmentation: Optional[LinMap] = None
    name: str = 'C'

    @property
    def field(self) -> Field:
        return self.space.field

    @property
    def dim(self) -> int:
        return self.space.dim

    def left_operator(self, a: int) -> np.ndarray:
        """(e_a^* (x) id) o Delta on C"""
        n = self.dim
        return self.comult.matrix[a * n:(a + 1) * n, :]

    def right_operator(self, a: int) -> np.ndarray:
        """(id (x) e_a^*) o Delta on C"""
        n = self.dim
        return self.comult.matrix[a::n, :]

    @cached_property
    def regular_rep(self) -> OperatorRep:
        return OperatorRep(self.field, self.dim, tuple(self.left_operator(a) for a in range(self.dim)))

    def with_coaugmentation(self, vector) -> 'Coalgebra':
        gamma = LinMap(ground(self.field), self.space, self.field.matrix(vector).reshape(-1, 1))
        return Coalgebra(self.space, self.comult, self.counit, gamma, self.name)

    def describe(self) -> Dict[str, Any]:
        return {'name': self.name, 'dim': self.dim, 'field': str(self.field),
                'coaugmented': self.coaugmentation is not None}


@dataclass(frozen=True, eq=False)
class Algebra:
    space: VecSpace
    mult: LinMap
    unit: LinMap
    role: str = 'dual-of-coalgebra'

    @property
    def field(self) -> Field:
        return self.space.field

    @property
    def dim(self) -> int:
        return self.space.dim

    def product(self, x, y) -> np.ndarray:
        fld = self.field
        xy = np.kron(fld.matrix(x).reshape(-1), fld.matrix(y).reshape(-1))
        return self.mult.apply(xy)

    def left_multiplication(self, a: int) -> np.ndarray:
        n = self.dim
        return self.mult.matrix[:, a * n:(a + 1) * n]

    def structure_constants(self) -> Dict[Tuple[int, int], List[int]]:
        n = self.dim
        return {(a, b): self.mult.matrix[:, a * n + b].tolist() for a in range(n) for b in range(n)}


ROLES = ('dual-of-coalgebra', 'iwasawa-truncation', 'endomorphism-ring')


def first_difference(a: LinMap, b: LinMap, labels: Sequence[str]) -> Optional[Dict[str, Any]]:
    """Basis element (column) where two parallel maps differ"""
    diff = np.nonzero(np.any(a.matrix != b.matrix, axis=0))[0]
    if len(diff) == 0:
        return None
    j = int(diff[0])
    row = int(np.nonzero(a.matrix[:, j] != b.matrix[:, j])[0][0])
    return {'basis_element': labels[j] if j < len(labels) else str(j), 'column': j, 'row': row}


def from_structure_constants(fld: Field, dim: int, triples: Sequence[Sequence[int]], counit: Sequence[int],
                             labels: Optional[Sequence[str]] = None, name: str = 'C',
                             coaugmentation: Optional[Sequence[int]] = None) -> Coalgebra:
    """Triples (i, j, k, value): Delta(e_i) has coefficient value on e_j (x) e_k"""
    space = VecSpace(fld, dim, tuple(labels) if labels else ())
    mat = fld.zeros(dim * dim, dim)
    for i, j, k, value in triples:
        mat[j * dim + k, i] = fld.scalar(fld.scalar(value) + mat[j * dim + k, i])
    comult = LinMap(space, tensor_space(space, space), mat)
    eps = LinMap(space, ground(fld), fld.matrix(list(counit)).reshape(1, dim))
    gamma = None
    if coaugmentation is not None:
        gamma = LinMap(ground(fld), space, fld.matrix(list(coaugmentation)).reshape(dim, 1))
    return Coalgebra(space, comult, eps, gamma, name)


def structure_triples(c: Coalgebra) -> List[List[int]]:
    n = c.dim
    triples = []
    rows, cols = np.nonzero(c.comult.matrix != 0)
    for r, i in sorted(zip(rows.tolist(), cols.tolist()), key=lambda t: (t[1], t[0])):
        triples.append([i, r // n, r % n, int(c.comult.matrix[r, i]) if not c.field.is_rational
                        else str(c.comult.matrix[r, i])])
    return triples


def ground_coalgebra(fld: Field) -> Coalgebra:
    """C = k with Delta(1) = 1 (x) 1"""
    return from_structure_constants(fld, 1, [(0, 0, 0, 1)], [1], ['1'], 'k', coaugmentation=[1])


def check_coalgebra(c: Coalgebra) -> CheckResult:
    ident = LinMap.identity(c.space)
    mu = c.comult
    left = tensor(mu, ident) @ mu
    right = tensor(ident, mu) @ mu
    diff = first_difference(left, right, c.space.basis_labels)
    if diff:
        return CheckResult.fail('coassociativity', **diff)
    for side, lhs in (('left counit', tensor(c.counit, ident) @ mu), ('right counit', tensor(ident, c.counit) @ mu)):
        diff = first_difference(lhs, ident, c.space.basis_labels)
        if diff:
            return CheckResult.fail(side, **diff)
    if c.coaugmentation is not None:
        g = c.coaugmentation
        if not (mu @ g).equals(tensor(g, g)) or not (c.counit @ g).equals(LinMap.identity(ground(c.field))):
            return CheckResult.fail('coaugmentation', basis_element='1')
    return CheckResult.ok(dim=c.dim)


def check_algebra(a: Algebra) -> CheckResult:
    ident = LinMap.identity(a.space)
    m = a.mult
    diff = first_difference(m @ tensor(m, ident), m @ tensor(ident, m),
                            tensor_space(tensor_space(a.space, a.space), a.space).basis_labels)
    if diff:
        return CheckResult.fail('associativity', **diff)
    for side, lhs in (('left unit', m @ tensor(a.unit, ident)), ('right unit', m @ tensor(ident, a.unit))):
        diff = first_difference(lhs, ident, a.space.basis_labels)
        if diff:
            return CheckResult.fail(side, **diff)
    return CheckResult.ok(dim=a.dim)


def dual_algebra(c: Coalgebra) -> Algebra:
    """C^∨ with multiplication and unit transposed from the comultiplication and counit"""
    verdict = check_coalgebra(c)
    if not verdict:
        raise EngineError(f"coalgebra {c.name} fails {verdict.axiom}")
    space = c.space.relabel('f')
    flipped = flip(c.space, c.space) @ c.comult
    mult = LinMap(tensor_space(space, space), space, flipped.matrix.T.copy())
    unit = LinMap(ground(c.field), space, c.counit.matrix.T.copy())
    return Algebra(space, mult, unit, 'dual-of-coalgebra')


def group_algebra(g: GroupTable, fld: Field) -> Algebra:
    """k[G] with basis g and multiplication g h = gh"""
    n = g.order
    space = VecSpace(fld, n, tuple(f"[{x}]" for x in g.labels))
    mat = fld.zeros(n, n * n)
    for a in range(n):
        for b in range(n):
            mat[g.mul(a, b), a * n + b] = fld.scalar(1)
    unit = fld.zeros(n, 1)
    unit[g.identity, 0] = fld.scalar(1)
    return Algebra(space, LinMap(tensor_space(space, space), space, mat), LinMap(ground(fld), space, unit),
                   'iwasawa-truncation')


def group_function_coalgebra(g: GroupTable, fld: Field) -> Coalgebra:
    """k(G): Delta(delta_g) = sum over ab = g of delta_a (x) delta_b, eps(delta_g) = [g = e]"""
    n = g.order
    triples = [(g.mul(a, b), a, b, 1) for a in range(n) for b in range(n)]
    counit = [1 if x == g.identity else 0 for x in range(n)]
    labels = [f"d{x}" for x in g.labels]
    c = from_structure_constants(fld, n, triples, counit, labels, f"k({g.name})")
    ones = [1] * n
    candidate = c.with_coaugmentation(ones)
    if filtration_of(candidate).conilpotent:
        return candidate
    return c


def group_function_inclusion(g: GroupTable, h: GroupTable, surjection: Sequence[int], fld: Field) -> LinMap:
    """k(H) -> k(G) dual to a surjection G -> H: delta_h |-> sum of delta_g over the fibre"""
    mat = fld.zeros(g.order, h.order)
    for x in range(g.order):
        mat[x, surjection[x]] = fld.scalar(1)
    return LinMap(VecSpace(fld, h.order, tuple(f"d{x}" for x in h.labels)),
                  VecSpace(fld, g.order, tuple(f"d{x}" for x in g.labels)), mat)


def is_coalgebra_morphism(f: LinMap, c: Coalgebra, d: Coalgebra) -> bool:
    return (tensor(f, f) @ c.comult).equals(d.comult @ f) and (d.counit @ f).equals(c.counit)


def subcoalgebra(c: Coalgebra, basis: np.ndarray, name: Optional[str] = None) -> Tuple[Coalgebra, LinMap]:
    """Subcoalgebra spanned by the columns of basis, with its inclusion"""
    fld = c.field
    k = basis.shape[1]
    sub_space = VecSpace.standard(fld, k, 's')
    incl = LinMap(sub_space, c.space, basis)
    images = fld.matmul(c.comult.matrix, basis)
    coords = solve_matrix(fld, fld.kron(basis, basis), images)
    if coords is None:
        raise EngineError("subspace is not a subcoalgebra")
    comult = LinMap(sub_space, tensor_space(sub_space, sub_space), coords)
    counit = c.counit @ incl
    return Coalgebra(sub_space, comult, counit, None, name or f"{c.name}_sub"), incl


def path_coalgebra(fld: Field, vertices: int = 2, arrows: Sequence[Tuple[int, int]] = ((0, 1),),
                   name: str = 'path') -> Coalgebra:
    """Path coalgebra of an acyclic quiver; Delta splits a path into (later part) (x) (earlier part)"""
    paths: List[Tuple[int, ...]] = []
    ends: Dict[Tuple[int, ...], Tuple[int, int]] = {}
    for v in range(vertices):
        paths.append(('v', v))
        ends[('v', v)] = (v, v)
    frontier = [((i,), s, t) for i, (s, t) in enumerate(arrows)]
    while frontier:
        path, s, t = frontier.pop(0)
        paths.append(path)
        ends[path] = (s, t)
        for i, (s2, t2) in enumerate(arrows):
            if s2 == t:
                frontier.append((path + (i,), s, t2))
        if len(paths) > 512:
            raise EngineError("quiver has a cycle or too many paths")
    index = {p: i for i, p in enumerate(paths)}
    triples = []
    for p in paths:
        s, t = ends[p]
        if p[0] == 'v':
            triples.append((index[p], index[p], index[p], 1))
            continue
        n = len(p)
        for i in range(n + 1):
            earlier, later = p[:i], p[i:]
            right = earlier if earlier else ('v', s)
            left = later if later else ('v', t)
            triples.append((index[p], index[left], index[right], 1))
    counit = [1 if p[0] == 'v' else 0 for p in paths]
    labels = [f"v{p[1]}" if p[0] == 'v' else 'a' + '.'.join(str(x) for x in p) for p in paths]
    return from_structure_constants(fld, len(paths), triples, counit, labels, name)


def _candidate_eigenvalues(fld: Field, op: np.ndarray) -> List[Any]:
    if not fld.is_rational:
        return fld.elements()
    if op.shape[0] == 0:
        return []
    m = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in op.tolist()])
    return [fld.scalar(sympy.Rational(ev).p) / sympy.Rational(ev).q
            for ev in m.eigenvals() if ev.is_rational]


def grouplike_elements(c: Coalgebra) -> List[np.ndarray]:
    """All x with Delta(x) = x (x) x and eps(x) = 1, i.e. the 1-dimensional subcoalgebras"""
    fld = c.field
    n = c.dim
    found: List[np.ndarray] = []

    def search(a: int, basis: np.ndarray, values: List[Any]):
        if basis.shape[1] == 0:
            return
        if a == n:
            x = fld.matrix(values).reshape(-1)
            col = x.reshape(-1, 1)
            if solve_matrix(fld, basis, col) is None:
                return
            if np.any(c.comult.apply(x) != fld.kron(col, col).reshape(-1)) or c.counit.apply(x)[0] != 1:
                return
            found.append(x)
            return
        op = c.right_operator(a)
        restricted = solve_matrix(fld, basis, fld.matmul(op, basis))
        for lam in _candidate_eigenvalues(fld, restricted):
            shifted = fld.sub(restricted, fld.scale(lam, fld.identity(basis.shape[1])))
            null = nullspace_matrix(fld, shifted)
            if null.shape[1]:
                search(a + 1, fld.matmul(basis, null), values + [lam])

    search(0, fld.identity(n), [])
    return found


@dataclass
class ConilpotencyResult:
    conilpotent: bool
    filtration: List[int] = field(default_factory=list)
    bases: List[np.ndarray] = field(default_factory=list, repr=False)
    coaugmentation: Optional[List[Any]] = None
    grouplikes: List[List[Any]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.conilpotent

    def to_dict(self) -> Dict[str, Any]:
        return {'conilpotent': self.conilpotent, 'filtration': self.filtration,
                'grouplikes': len(self.grouplikes)}


def filtration_of(c: Coalgebra) -> ConilpotencyResult:
    """Kernels F_m of C -> C_+^{(x) m+1}, built as F_m = ker((q (x) pi_{m-1}) o Delta)"""
    fld = c.field
    gamma = c.coaugmentation
    _, q = cokernel(gamma, 'c+')
    f_prev = gamma.matrix
    bases = [f_prev]
    dims = [f_prev.shape[1]]
    pi_prev = q
    while True:
        reduced = tensor(q, pi_prev) @ c.comult
        _, incl = kernel(reduced)
        f_m = incl.matrix
        bases.append(f_m)
        dims.append(f_m.shape[1])
        if f_m.shape[1] == c.dim:
            return ConilpotencyResult(True, dims, bases, c.coaugmentation.matrix.reshape(-1).tolist())
        if f_m.shape[1] == f_prev.shape[1]:
            return ConilpotencyResult(False, dims, bases, c.coaugmentation.matrix.reshape(-1).tolist())
        f_prev = f_m
        _, pi_prev = cokernel(LinMap(VecSpace.standard(fld, f_m.shape[1]), c.space, f_m), 'q')


def is_conilpotent(c: Coalgebra) -> ConilpotencyResult:
    if c.coaugmentation is not None:
        return filtration_of(c)
    grouplikes = grouplike_elements(c)
    listed = [g.tolist() for g in grouplikes]
    if not grouplikes:
        raise NoCoaugmentation(f"{c.name} has no 1-dimensional subcoalgebra", listed)
    if len(grouplikes) > 1:
        logger.debug(f"{c.name} has {len(grouplikes)} grouplike elements, so it is not conilpotent")
        return ConilpotencyResult(False, [], [], None, listed)
    result = filtration_of(c.with_coaugmentation(grouplikes[0]))
    result.grouplikes = listed
    return result


def coaugmented(c: Coalgebra) -> Coalgebra:
    """c itself if it carries a coaugmentation, else c with its unique grouplike as one"""
    if c.coaugmentation is not None:
        return c
    result = is_conilpotent(c)
    if not result.conilpotent:
        raise NotConilpotent(f"{c.name} is not conilpotent")
    return c.with_coaugmentation(result.coaugmentation)


def primitive_elements(c: Coalgebra) -> np.ndarray:
    """Columns spanning F_1 modulo the coaugmentation line"""
    result = is_conilpotent(c)
    if not result.conilpotent:
        raise NotConilpotent(f"{c.name} is not conilpotent")
    if len(result.bases) < 2:
        return c.field.zeros(c.dim, 0)
    f0, f1 = result.bases[0], result.bases[1]
    stacked = np.hstack([f0, f1])
    basis = subspace_basis(c.field, stacked)
    return basis[:, f0.shape[1]:]


def cogenerator_space(c: Coalgebra) -> VecSpace:
    """H^1(C) = ker(C_+ -> C_+ (x) C_+)"""
    basis = primitive_elements(c)
    return VecSpace.standard(c.field, basis.shape[1], 'h')


@dataclass
class CosemisimpleResult:
    cosemisimple: bool
    irreducibles: List[Dict[str, int]] = field(default_factory=list)
    witness: Dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.cosemisimple

    def to_dict(self) -> Dict[str, Any]:
        return {'cosemisimple': self.cosemisimple, 'irreducibles': self.irreducibles, 'witness': self.witness}


def cosemisimple_decomposition(c: Coalgebra, seed: int = 0) -> CosemisimpleResult:
    """Irreducible comodules I_a with multiplicities in the regular comodule, or a non-split witness"""
    rep = c.regular_rep
    summands = indecomposable_summands(rep, seed)
    classes: List[Tuple[OperatorRep, int]] = []
    for basis in summands:
        sub = rep.restrict(basis)
        proper = proper_subspace(sub, seed)
        if proper is not None:
            logger.debug(f"{c.name}: indecomposable summand of dim {sub.dim} has a subcomodule of dim {proper.shape[1]}")
            return CosemisimpleResult(False, [], {'summand_dim': sub.dim, 'subcomodule_dim': proper.shape[1],
                                                  'reason': 'indecomposable summand is not irreducible'})
        for i, (known, mult) in enumerate(classes):
            if known.dim == sub.dim and hom_dimension(known, sub) > 0:
                classes[i] = (known, mult + 1)
                break
        else:
            classes.append((sub, 1))
    irreducibles = [{'dim': r.dim, 'multiplicity': m, 'endomorphism_dim': hom_dimension(r, r)}
                    for r, m in classes]
    irreducibles.sort(key=lambda d: (d['dim'], d['multiplicity']))
    return CosemisimpleResult(True, irreducibles, {})


def with_comult_entry(c: Coalgebra, row: int, col: int, delta: int = 1) -> Coalgebra:
    """Copy of c with one structure constant shifted, used for mutation testing"""
    fld = c.field
    mat = c.comult.matrix.copy()
    mat[row, col] = fld.scalar(mat[row, col] + delta)
    return Coalgebra(c.space, LinMap(c.space, c.comult.codomain, mat), c.counit, None, f"{c.name}*")
