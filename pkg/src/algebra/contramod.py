"""
Finite-dimensional left contramodules.

A contraaction is a LinMap Hom_k(C, P) -> P. Vectors of Hom_k(C, P) are
indexed p * dim C + c, so the functional e_a acting on x is the column block
pi[:, a::dim C]. Contraassociativity compares

    pi o Hom(C, pi)   and   pi o Hom(Delta, P)

on Hom(C, Hom(C, P)) = Hom(C (x) C, P), the outer C being the right factor.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.algebra.coalg import Algebra, Coalgebra, coaugmented, dual_algebra, first_difference
from src.algebra.comod import RIGHT, Comodule, HomBasis, Resolution
from src.algebra.errors import CapExceeded, CheckResult, DimensionMismatch, EngineError
from src.algebra.exactlin import (Field, LinMap, VecSpace, cokernel, curry, hom_map, hom_space, image,
                                  nullspace_matrix, rank, solve_matrix, subspace_contains, tensor,
                                  tensor_space)
from src.algebra.groups import GroupTable
from src.algebra.homcx import Complex
from src.algebra.reps import OperatorRep, hom_dimension

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Contramodule:
    coalgebra: Coalgebra
    space: VecSpace
    contraaction: LinMap
    name: str = 'P'

    def __post_init__(self):
        expected = (self.space.dim, self.space.dim * self.coalgebra.dim)
        if self.contraaction.shape != expected:
            raise DimensionMismatch(f"contraaction of shape {self.contraaction.shape}, expected {expected}")

    @property
    def field(self) -> Field:
        return self.space.field

    @property
    def dim(self) -> int:
        return self.space.dim

    def operator(self, a: int) -> np.ndarray:
        """Action of the dual basis functional e_a"""
        return self.contraaction.matrix[:, a::self.coalgebra.dim]

    @cached_property
    def rep(self) -> OperatorRep:
        return OperatorRep(self.field, self.dim, tuple(self.operator(a) for a in range(self.coalgebra.dim)))

    def hom_c(self, f: LinMap) -> LinMap:
        """Hom(C, f): Hom(C, P) -> Hom(C, Q)"""
        fld = self.field
        c = self.coalgebra
        return LinMap(hom_space(c.space, f.domain), hom_space(c.space, f.codomain),
                      fld.kron(f.matrix, fld.identity(c.dim)))

    def is_morphism(self, other: 'Contramodule', f: LinMap) -> bool:
        return (f @ self.contraaction).equals(other.contraaction @ self.hom_c(f))

    def describe(self) -> Dict[str, Any]:
        return {'name': self.name, 'dim': self.dim, 'coalgebra': self.coalgebra.name}


def _contra_space(c: Coalgebra, p: VecSpace) -> VecSpace:
    return hom_space(c.space, p)


def check_contramodule(p: Contramodule) -> CheckResult:
    fld = p.field
    c = p.coalgebra
    n, d = c.dim, p.dim
    pi = p.contraaction.matrix
    via_pi = fld.matmul(pi, fld.kron(pi, fld.identity(n)))
    via_mu = fld.matmul(pi, fld.kron(fld.identity(d), c.comult.matrix.T.copy()))
    outer = hom_space(c.space, _contra_space(c, p.space))
    lhs = LinMap(outer, p.space, via_pi)
    rhs = LinMap(outer, p.space, via_mu)
    diff = first_difference(lhs, rhs, outer.basis_labels)
    if diff:
        return CheckResult.fail('contraassociativity', **diff)
    unit = fld.matmul(pi, fld.kron(fld.identity(d), c.counit.matrix))
    diff = first_difference(LinMap(p.space, p.space, unit), LinMap.identity(p.space), p.space.basis_labels)
    if diff:
        return CheckResult.fail('contraunitality', **diff)
    return CheckResult.ok(dim=p.dim)


def free_contra(c: Coalgebra, v: VecSpace, name: Optional[str] = None) -> Contramodule:
    """Hom_k(C, V) with contraaction Hom(C (x) C, V) -> Hom(C, V) induced by Delta"""
    if c.field != v.field:
        raise EngineError(f"field mismatch: {c.field} vs {v.field}")
    fld = c.field
    space = hom_space(c.space, v)
    pi = fld.kron(fld.identity(v.dim), c.comult.matrix.T.copy())
    return Contramodule(c, space, LinMap(_contra_space(c, space), space, pi), name or f"Hom({c.name},V)")


def contra_from_dual(n: Comodule, v: VecSpace, name: Optional[str] = None) -> Contramodule:
    """Hom_k(N, V) for a right comodule N, contraaction induced by the coaction"""
    if n.side != RIGHT:
        raise EngineError("Hom_k(N, V) is a left contramodule for a right comodule N")
    fld = n.field
    c = n.coalgebra
    space = hom_space(n.space, v)
    pi = fld.kron(fld.identity(v.dim), n.coaction.matrix.T.copy())
    return Contramodule(c, space, LinMap(_contra_space(c, space), space, pi), name or f"Hom({n.name},V)")


def trivial_contramodule(c: Coalgebra, dim: int = 1) -> Contramodule:
    """k^dim with f |-> f(gamma(1))"""
    c = coaugmented(c)
    fld = c.field
    space = VecSpace.standard(fld, dim, 't')
    pi = fld.kron(fld.identity(dim), c.coaugmentation.matrix.T.copy())
    return Contramodule(c, space, LinMap(_contra_space(c, space), space, pi), 'k')


def from_operators(c: Coalgebra, ops: Sequence[np.ndarray], name: str = 'P') -> Contramodule:
    """Contraaction whose e_a-column block is ops[a]"""
    fld = c.field
    dim = ops[0].shape[0] if len(ops) else 0
    space = VecSpace.standard(fld, dim, 'p')
    pi = fld.zeros(dim, dim * c.dim)
    for a, op in enumerate(ops):
        pi[:, a::c.dim] = op
    return Contramodule(c, space, LinMap(_contra_space(c, space), space, pi), name)


def direct_sum(modules: Sequence[Contramodule], name: str = 'P+') -> Contramodule:
    c = modules[0].coalgebra
    fld = c.field
    total = sum(m.dim for m in modules)
    ops = []
    for a in range(c.dim):
        block = fld.zeros(total, total)
        offset = 0
        for m in modules:
            block[offset:offset + m.dim, offset:offset + m.dim] = m.operator(a)
            offset += m.dim
        ops.append(block)
    return from_operators(c, ops, name)


def subcontramodule(p: Contramodule, basis: np.ndarray, name: Optional[str] = None) -> Contramodule:
    return from_operators(p.coalgebra, p.rep.restrict(basis).ops, name or f"{p.name}'")


def quotient_contramodule(p: Contramodule, sub_basis: np.ndarray, name: Optional[str] = None):
    """P / col(sub_basis) with its projection"""
    fld = p.field
    incl = LinMap(VecSpace.standard(fld, sub_basis.shape[1]), p.space, sub_basis)
    q_space, proj = cokernel(incl, 'q')
    ops = []
    for a in range(p.coalgebra.dim):
        img = fld.matmul(proj.matrix, p.operator(a))
        op_t = solve_matrix(fld, proj.matrix.T.copy(), img.T.copy())
        if op_t is None:
            raise EngineError("subspace is not a subcontramodule")
        ops.append(op_t.T.copy())
    quotient = from_operators(p.coalgebra, ops, name or f"{p.name}/S") if q_space.dim else \
        Contramodule(p.coalgebra, q_space, LinMap.zero(_contra_space(p.coalgebra, q_space), q_space), name or '0')
    return quotient, LinMap(p.space, quotient.space, proj.matrix)


@dataclass
class ModuleStructure:
    """A left module over an algebra, action A (x) P -> P"""
    algebra: Algebra
    space: VecSpace
    action: LinMap

    def check(self) -> CheckResult:
        fld = self.space.field
        a = self.algebra
        ident = LinMap.identity(self.space)
        act = self.action
        lhs = act @ tensor(a.mult, ident)
        rhs = act @ tensor(LinMap.identity(a.space), act)
        diff = first_difference(lhs, rhs, lhs.domain.basis_labels)
        if diff:
            return CheckResult.fail('module associativity', **diff)
        unit = act @ tensor(a.unit, ident)
        diff = first_difference(LinMap(self.space, self.space, unit.matrix), ident, self.space.basis_labels)
        if diff:
            return CheckResult.fail('module unit', **diff)
        return CheckResult.ok(dim=self.space.dim, algebra_dim=a.dim, field=str(fld))


def contramodule_as_module(p: Contramodule) -> ModuleStructure:
    """C^∨ (x) P -> P, e_a (x) x |-> pi(x (x) e_a)"""
    fld = p.field
    c = p.coalgebra
    alg = dual_algebra(c)
    n, d = c.dim, p.dim
    act = fld.zeros(d, n * d)
    for a in range(n):
        act[:, a * d:(a + 1) * d] = p.operator(a)
    return ModuleStructure(alg, p.space, LinMap(tensor_space(alg.space, p.space), p.space, act))


def contra_hom(p: Contramodule, q: Contramodule) -> HomBasis:
    """Basis of linear f: P -> Q with f o pi_P = pi_Q o Hom(C, f)"""
    if p.coalgebra.dim != q.coalgebra.dim:
        raise EngineError("contramodules over different coalgebras")
    fld = p.field
    n = p.coalgebra.dim
    columns = []
    for row in range(q.dim):
        for col in range(p.dim):
            e = fld.zeros(q.dim, p.dim)
            e[row, col] = fld.scalar(1)
            left = fld.matmul(e, p.contraaction.matrix)
            right = fld.matmul(q.contraaction.matrix, fld.kron(e, fld.identity(n)))
            columns.append(fld.sub(left, right).reshape(-1, 1))
    if not columns:
        return HomBasis(VecSpace.standard(fld, 0, 'hom'), [])
    system = np.hstack(columns)
    null = nullspace_matrix(fld, system)
    maps = [hom_map(null[:, j], p.space, q.space) for j in range(null.shape[1])]
    return HomBasis(VecSpace.standard(fld, len(maps), 'hom'), maps)


def module_hom_dimension(p: Contramodule, q: Contramodule) -> int:
    """Dimension of C^∨-module maps, computed from the action operators"""
    return hom_dimension(p.rep, q.rep)


def contratensor_maps(n: Comodule, p: Contramodule):
    """The two maps N (x) Hom(C, P) -> N (x) P: id (x) pi, and coaction followed by evaluation"""
    if n.side != RIGHT:
        raise EngineError("contratensor needs a right comodule")
    if n.coalgebra.dim != p.coalgebra.dim:
        raise EngineError("comodule and contramodule over different coalgebras")
    fld = p.field
    c = n.coalgebra.dim
    source = tensor_space(n.space, _contra_space(p.coalgebra, p.space))
    target = tensor_space(n.space, p.space)
    via_pi = fld.kron(fld.identity(n.dim), p.contraaction.matrix)
    via_eval = fld.zeros(target.dim, source.dim)
    eye_p = fld.identity(p.dim)
    for a in range(c):
        point = fld.zeros(1, c)
        point[0, a] = fld.scalar(1)
        via_eval = fld.add(via_eval, fld.kron(n.operator(a), fld.kron(eye_p, point)))
    return LinMap(source, target, via_pi), LinMap(source, target, via_eval)


def contratensor_projection(n: Comodule, p: Contramodule):
    """N ⊙_C P as a cokernel, with the projection from N (x) P"""
    first, second = contratensor_maps(n, p)
    return cokernel(first - second, 'ctr')


def contratensor(n: Comodule, p: Contramodule) -> VecSpace:
    return contratensor_projection(n, p)[0]


def module_tensor_relations(n: Comodule, p: Contramodule) -> np.ndarray:
    """Columns n.phi (x) x - n (x) phi.x spanning the relations of N (x)_{C^∨} P"""
    fld = p.field
    cols = []
    eye_n = fld.identity(n.dim)
    eye_p = fld.identity(p.dim)
    for a in range(n.coalgebra.dim):
        right_act = fld.kron(n.operator(a), eye_p)
        left_act = fld.kron(eye_n, p.operator(a))
        cols.append(fld.sub(right_act, left_act))
    if not cols:
        return fld.zeros(n.dim * p.dim, 0)
    return np.hstack(cols)


def adjunction_check(n: Comodule, p: Contramodule, v: VecSpace) -> CheckResult:
    """Hom_k(N ⊙_C P, V) = Hom^C(P, Hom_k(N, V)) through g |-> (x |-> (m |-> g[m (x) x]))"""
    fld = p.field
    ctr, proj = contratensor_projection(n, p)
    target = contra_from_dual(n, v)
    homs = contra_hom(p, target)
    images = []
    for row in range(v.dim):
        for col in range(ctr.dim):
            e = fld.zeros(v.dim, ctr.dim)
            e[row, col] = fld.scalar(1)
            g = LinMap(proj.domain, v, fld.matmul(e, proj.matrix))
            phi = curry(g, n.space, p.space)
            if not p.is_morphism(target, LinMap(p.space, target.space, phi.matrix)):
                return CheckResult.fail('naturality', hom_basis=[row, col])
            images.append(phi.matrix.reshape(-1, 1))
    left_dim = v.dim * ctr.dim
    image_rank = rank(LinMap(VecSpace.standard(fld, len(images)), VecSpace.standard(fld, v.dim * n.dim * p.dim),
                             np.hstack(images))) if images else 0
    if image_rank != left_dim:
        return CheckResult.fail('injectivity', left_dim=left_dim, image_rank=image_rank)
    if homs.dim != left_dim:
        return CheckResult.fail('surjectivity', left_dim=left_dim, right_dim=homs.dim)
    relations = module_tensor_relations(n, p)
    first, second = contratensor_maps(n, p)
    difference = (first - second).matrix
    if not subspace_contains(fld, difference, relations):
        return CheckResult.fail('module tensor comparison', reason='relations of the module tensor do not vanish')
    module_tensor_dim = n.dim * p.dim - rank(LinMap(VecSpace.standard(fld, relations.shape[1]),
                                                    VecSpace.standard(fld, n.dim * p.dim), relations))
    return CheckResult.ok(hom_dim=left_dim, contratensor_dim=ctr.dim, module_tensor_dim=module_tensor_dim)


def plus_part(p: Contramodule) -> np.ndarray:
    """Basis of P+ = image of Hom(C_+, P) -> P, the maps killing the coaugmentation"""
    c = coaugmented(p.coalgebra)
    fld = p.field
    gamma = c.coaugmentation.matrix
    # f in Hom(C, P) with f(gamma) = 0
    evaluation = fld.kron(fld.identity(p.dim), gamma.T.copy())
    sub = nullspace_matrix(fld, evaluation)
    imgs = fld.matmul(p.contraaction.matrix, sub)
    _, incl = image(LinMap(VecSpace.standard(fld, imgs.shape[1]), p.space, imgs))
    return incl.matrix


def group_action(p: Contramodule, g: GroupTable, h: int) -> np.ndarray:
    """Underlying action of h on a k(G)-contramodule: the point measure at h^{-1}"""
    return p.operator(g.inverse(h))


def is_projective_contramodule(p: Contramodule) -> bool:
    """True iff pi: Hom(C, P) -> P has a contramodule section"""
    if p.dim == 0:
        return True
    fld = p.field
    free = free_contra(p.coalgebra, p.space)
    sections = contra_hom(p, free)
    if not sections.maps:
        return False
    composites = np.hstack([(p.contraaction @ LinMap(p.space, free.space, s.matrix)).matrix.reshape(-1, 1)
                            for s in sections.maps])
    return solve_matrix(fld, composites, fld.identity(p.dim).reshape(-1, 1)) is not None


def check_module_correspondence(p: Contramodule) -> CheckResult:
    """Contramodule axioms hold iff the induced C^∨-action is associative and unital"""
    contra = check_contramodule(p)
    module = contramodule_as_module(p).check()
    if bool(contra) != bool(module):
        return CheckResult.fail('category isomorphism', contramodule=contra.passed, module=module.passed)
    return CheckResult.ok(axioms=contra.passed)


def free_resolution(p: Contramodule, length_cap: int) -> Resolution:
    """... -> F^{-1} -> F^0 -> P with F^{-i} = Hom(C, K^i), K^0 = P, K^{i+1} = ker(F^{-i} -> K^i)"""
    c = p.coalgebra
    terms: Dict[int, VecSpace] = {}
    diffs: Dict[int, LinMap] = {}
    decoration: Dict[int, Contramodule] = {}
    current = p
    prev_incl: Optional[LinMap] = None
    augmentation = None
    for i in range(length_cap + 1):
        if is_projective_contramodule(current):
            term = current
            cover = LinMap.identity(current.space)
        else:
            term = free_contra(c, current.space, f"F{i}")
            cover = LinMap(term.space, current.space, current.contraaction.matrix)
        terms[-i] = term.space
        decoration[-i] = term
        if i == 0:
            augmentation = cover
        else:
            diffs[-i] = LinMap(term.space, terms[-i + 1], (prev_incl @ cover).matrix)
        basis = nullspace_matrix(p.field, cover.matrix)
        if basis.shape[1] == 0:
            logger.debug(f"free resolution of {p.name} stops at length {i}")
            cx = Complex(p.field, terms, diffs, decoration, 'contramodule')
            return Resolution(cx, augmentation, i, [terms[-j].dim for j in range(i + 1)])
        current = subcontramodule(term, basis, f"K{i + 1}")
        prev_incl = LinMap(current.space, term.space, basis)
    raise CapExceeded(f"free resolution of {p.name} exceeds cap {length_cap}", current.dim)
