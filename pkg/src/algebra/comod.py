"""
Finite-dimensional comodules over a Coalgebra.

A left coaction is a LinMap M -> C (x) M (index c * dim M + m), a right
coaction a LinMap N -> N (x) C (index n * dim C + c).
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.algebra.coalg import Coalgebra, coaugmented, first_difference
from src.algebra.errors import CapExceeded, CheckResult, DimensionMismatch, EngineError
from src.algebra.exactlin import (Field, LinMap, VecSpace, cokernel, hom_map, hom_space, intertwiners, kernel,
                                  solve_matrix, tensor, tensor_space)
from src.algebra.homcx import Complex
from src.algebra.reps import OperatorRep

logger = logging.getLogger(__name__)

LEFT = 'left'
RIGHT = 'right'


@dataclass(frozen=True, eq=False)
class Comodule:
    coalgebra: Coalgebra
    space: VecSpace
    coaction: LinMap
    side: str = LEFT
    name: str = 'M'

    def __post_init__(self):
        if self.side not in (LEFT, RIGHT):
            raise ValueError(f"side must be left or right, got {self.side}")
        expected = self.coalgebra.dim * self.space.dim
        if self.coaction.shape != (expected, self.space.dim):
            raise DimensionMismatch(f"coaction of shape {self.coaction.shape}, expected ({expected}, {self.space.dim})")

    @property
    def field(self) -> Field:
        return self.space.field

    @property
    def dim(self) -> int:
        return self.space.dim

    def operator(self, a: int) -> np.ndarray:
        """(e_a^* (x) id) o coaction, or (id (x) e_a^*) o coaction on the right"""
        m, c = self.dim, self.coalgebra.dim
        if self.side == LEFT:
            return self.coaction.matrix[a * m:(a + 1) * m, :]
        return self.coaction.matrix[a::c, :]

    @cached_property
    def rep(self) -> OperatorRep:
        return OperatorRep(self.field, self.dim, tuple(self.operator(a) for a in range(self.coalgebra.dim)))

    def is_morphism(self, other: 'Comodule', f: LinMap) -> bool:
        c_id = LinMap.identity(self.coalgebra.space)
        if self.side == LEFT:
            return (tensor(c_id, f) @ self.coaction).equals(other.coaction @ f)
        return (tensor(f, c_id) @ self.coaction).equals(other.coaction @ f)

    def describe(self) -> Dict[str, Any]:
        return {'name': self.name, 'side': self.side, 'dim': self.dim, 'coalgebra': self.coalgebra.name}


def check_comodule(m: Comodule) -> CheckResult:
    c = m.coalgebra
    ident = LinMap.identity(m.space)
    c_id = LinMap.identity(c.space)
    nu = m.coaction
    if m.side == LEFT:
        lhs = tensor(c.comult, ident) @ nu
        rhs = tensor(c_id, nu) @ nu
        unit = tensor(c.counit, ident) @ nu
    else:
        lhs = tensor(nu, c_id) @ nu
        rhs = tensor(ident, c.comult) @ nu
        unit = tensor(ident, c.counit) @ nu
    diff = first_difference(lhs, rhs, m.space.basis_labels)
    if diff:
        return CheckResult.fail('coassociativity', **diff)
    diff = first_difference(unit, ident, m.space.basis_labels)
    if diff:
        return CheckResult.fail('counitality', **diff)
    return CheckResult.ok(dim=m.dim)


def regular(c: Coalgebra, side: str = LEFT) -> Comodule:
    """C over itself through Delta"""
    return Comodule(c, c.space, c.comult, side, c.name)


def cofree(c: Coalgebra, v: VecSpace, name: Optional[str] = None) -> Comodule:
    """C (x) V with coaction Delta (x) id"""
    if c.field != v.field:
        raise EngineError(f"field mismatch: {c.field} vs {v.field}")
    space = tensor_space(c.space, v)
    return Comodule(c, space, tensor(c.comult, LinMap.identity(v)), LEFT, name or f"{c.name}⊗V")


def cofree_right(c: Coalgebra, v: VecSpace, name: Optional[str] = None) -> Comodule:
    """V (x) C with coaction id (x) Delta"""
    space = tensor_space(v, c.space)
    return Comodule(c, space, tensor(LinMap.identity(v), c.comult), RIGHT, name or f"V⊗{c.name}")


def trivial_comodule(c: Coalgebra, side: str = LEFT, dim: int = 1) -> Comodule:
    """k^dim with coaction through the coaugmentation"""
    c = coaugmented(c)
    fld = c.field
    space = VecSpace.standard(fld, dim, 't')
    g = c.coaugmentation
    ident = LinMap.identity(space)
    coaction = tensor(g, ident) if side == LEFT else tensor(ident, g)
    return Comodule(c, space, LinMap(space, coaction.codomain, coaction.matrix), side, 'k')


def simple_at_grouplike(c: Coalgebra, grouplike: Sequence[int], side: str = LEFT) -> Comodule:
    """The 1-dimensional comodule k x spanned by a grouplike x"""
    fld = c.field
    space = VecSpace.standard(fld, 1, 's')
    col = fld.matrix(list(grouplike)).reshape(-1, 1)
    return Comodule(c, space, LinMap(space, tensor_space(c.space, space), col), side, 'S')


def direct_sum(modules: Sequence[Comodule], name: str = "M+") -> Comodule:
    c = modules[0].coalgebra
    fld = c.field
    side = modules[0].side
    if any(m.side != side or m.coalgebra is not c for m in modules):
        raise EngineError("direct sum needs comodules on the same side over the same coalgebra")
    total = sum(m.dim for m in modules)
    ops = []
    for a in range(c.dim):
        block = fld.zeros(total, total)
        offset = 0
        for m in modules:
            block[offset:offset + m.dim, offset:offset + m.dim] = m.operator(a)
            offset += m.dim
        ops.append(block)
    return from_operators(c, ops, side, name)


def from_operators(c: Coalgebra, ops: Sequence[np.ndarray], side: str = LEFT, name: str = 'M') -> Comodule:
    """Rebuild a coaction from the operators (e_a^* (x) id) o coaction"""
    fld = c.field
    dim = ops[0].shape[0] if ops else 0
    space = VecSpace.standard(fld, dim, 'm')
    mat = fld.zeros(c.dim * dim, dim)
    for a, op in enumerate(ops):
        if side == LEFT:
            mat[a * dim:(a + 1) * dim, :] = op
        else:
            mat[a::c.dim, :] = op
    return Comodule(c, space, LinMap(space, VecSpace.standard(fld, c.dim * dim), mat), side, name)


def subcomodule(m: Comodule, basis: np.ndarray, name: Optional[str] = None) -> Comodule:
    return from_operators(m.coalgebra, m.rep.restrict(basis).ops, m.side, name or f"{m.name}'")


def quotient_comodule(m: Comodule, sub_basis: np.ndarray, name: Optional[str] = None):
    """M / col(sub_basis) with its projection"""
    fld = m.field
    incl = LinMap(VecSpace.standard(fld, sub_basis.shape[1]), m.space, sub_basis)
    q_space, proj = cokernel(incl, 'q')
    ops = []
    for a in range(m.coalgebra.dim):
        image = fld.matmul(proj.matrix, m.operator(a))
        op_t = solve_matrix(fld, proj.matrix.T.copy(), image.T.copy())
        if op_t is None:
            raise EngineError("subspace is not a subcomodule")
        ops.append(op_t.T.copy())
    quotient = from_operators(m.coalgebra, ops, m.side, name or f"{m.name}/S") if q_space.dim else \
        Comodule(m.coalgebra, q_space, LinMap.zero(q_space, VecSpace.standard(fld, 0)), m.side, name or '0')
    return quotient, LinMap(m.space, quotient.space, proj.matrix)


@dataclass
class HomBasis:
    """Hom space with a basis of maps"""
    space: VecSpace
    maps: List[LinMap] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.space.dim

    def contains(self, f: LinMap) -> bool:
        fld = self.space.field
        if not self.maps:
            return f.is_zero()
        cols = np.hstack([g.matrix.reshape(-1, 1) for g in self.maps])
        return solve_matrix(fld, cols, f.matrix.reshape(-1, 1)) is not None


def _hom_from_nullspace(null: np.ndarray, src: VecSpace, dst: VecSpace, prefix: str) -> HomBasis:
    maps = [hom_map(null[:, j], src, dst) for j in range(null.shape[1])]
    return HomBasis(VecSpace.standard(src.field, len(maps), prefix), maps)


def comodule_hom(m: Comodule, n: Comodule) -> HomBasis:
    """Basis of Hom_C(M, N) inside Hom_k(M, N)"""
    if m.coalgebra is not n.coalgebra and m.coalgebra.dim != n.coalgebra.dim:
        raise EngineError("comodules over different coalgebras")
    if m.side != n.side:
        raise EngineError("comodules on different sides")
    null = intertwiners(m.field, m.rep.ops, n.rep.ops, m.dim, n.dim)
    return _hom_from_nullspace(null, m.space, n.space, 'hom')


def cotensor_embedding(n: Comodule, m: Comodule):
    """N box_C M as the kernel of nu_N (x) id - id (x) nu_M, with its inclusion into N (x) M"""
    if n.side != RIGHT or m.side != LEFT:
        raise EngineError("cotensor needs a right and a left comodule")
    if n.coalgebra.dim != m.coalgebra.dim:
        raise EngineError("comodules over different coalgebras")
    diff = tensor(n.coaction, LinMap.identity(m.space)) - tensor(LinMap.identity(n.space), m.coaction)
    return kernel(diff, 'cot')


def cotensor(n: Comodule, m: Comodule) -> VecSpace:
    return cotensor_embedding(n, m)[0]


def is_injective_comodule(m: Comodule) -> bool:
    """True iff the coaction M -> C (x) M has a comodule retraction"""
    if m.dim == 0:
        return True
    fld = m.field
    hull = cofree(m.coalgebra, m.space)
    retractions = comodule_hom(hull, m)
    if not retractions.maps:
        return False
    composites = np.hstack([(r @ m.coaction).matrix.reshape(-1, 1) for r in retractions.maps])
    target = fld.identity(m.dim).reshape(-1, 1)
    return solve_matrix(fld, composites, target) is not None


@dataclass
class Resolution:
    """A (co)resolution: the complex of (co)free terms and its augmentation"""
    complex: Complex
    augmentation: LinMap
    length: int
    term_dims: List[int]

    def to_dict(self) -> Dict[str, Any]:
        return {'length': self.length, 'term_dims': self.term_dims}


def injective_coresolution(m: Comodule, length_cap: int) -> Resolution:
    """0 -> M -> J^0 -> J^1 -> ... with J^i = C (x) K^i, K^0 = M, K^{i+1} = J^i / K^i"""
    c = m.coalgebra
    terms: Dict[int, VecSpace] = {}
    diffs: Dict[int, LinMap] = {}
    decoration: Dict[int, Comodule] = {}
    current = m
    prev_proj: Optional[LinMap] = None
    augmentation = None
    for i in range(length_cap + 1):
        if is_injective_comodule(current):
            term = current
            embed = LinMap.identity(current.space)
        else:
            term = cofree(c, current.space, f"J{i}")
            embed = LinMap(current.space, term.space, current.coaction.matrix)
        terms[i] = term.space
        decoration[i] = term
        if i == 0:
            augmentation = embed
        else:
            diffs[i - 1] = LinMap(terms[i - 1], term.space, (embed @ prev_proj).matrix)
        quotient, proj = quotient_comodule(term, embed.matrix, f"K{i + 1}")
        if quotient.dim == 0:
            logger.debug(f"coresolution of {m.name} stops at length {i}")
            cx = Complex(m.field, terms, diffs, decoration, 'comodule')
            return Resolution(cx, augmentation, i, [terms[j].dim for j in range(i + 1)])
        current = quotient
        prev_proj = proj
    raise CapExceeded(f"injective coresolution of {m.name} exceeds cap {length_cap}", current.dim)
