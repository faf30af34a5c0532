"""
The finite sandbox: S = k(G) as a semialgebra over C = k(H) for a finite group
G and a subgroup H.

A k[G]-module rho is read as a left k(H)-comodule and as a k(H)-contramodule
through operator(h) = rho(h^{-1}), the convention of the comodule layer. S
carries the coactions

    left:  d_g |-> sum_h d_h (x) d_{h^{-1} g}
    right: d_g |-> sum_h d_{g h^{-1}} (x) d_h

and its semimultiplication is the pushforward along G x_H G -> G.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.algebra.coalg import Coalgebra, first_difference, group_function_coalgebra
from src.algebra.comod import LEFT, RIGHT, Comodule, check_comodule, cotensor_embedding, is_injective_comodule, regular
from src.algebra.comod import from_operators as comodule_from_operators
from src.algebra.contramod import Contramodule, contratensor_maps, is_projective_contramodule
from src.algebra.contramod import from_operators as contramodule_from_operators
from src.algebra.corr import CorrespondencePair, descend
from src.algebra.errors import CheckResult, EngineError, PreconditionError
from src.algebra.exactlin import (Field, LinMap, VecSpace, cokernel, hom_left, intersect, intertwiners, is_iso,
                                  row_reduce, solve_matrix, subspace_contains, tensor)
from src.algebra.groups import GroupTable, InvalidGroup

logger = logging.getLogger(__name__)


def subgroup_table(g: GroupTable, elements: Sequence[int]) -> GroupTable:
    """The multiplication table of H, elements listed in increasing order"""
    members = sorted(set(int(x) for x in elements))
    if not members or any(x < 0 or x >= g.order for x in members) or not g.is_subgroup(members):
        raise InvalidGroup(f"{members} is not a subgroup of {g.name}")
    index = {x: i for i, x in enumerate(members)}
    table = tuple(tuple(index[g.mul(a, b)] for b in members) for a in members)
    return GroupTable(table, tuple(g.labels[x] for x in members), f"H<{g.name}", check=False)


def left_transversal(g: GroupTable, members: Sequence[int]) -> List[int]:
    """Least element of every left coset x H"""
    seen = set()
    reps = []
    for x in range(g.order):
        if x in seen:
            continue
        reps.append(x)
        seen.update(g.mul(x, h) for h in members)
    return reps


@dataclass(frozen=True, eq=False)
class Semialgebra:
    coalgebra: Coalgebra
    space: VecSpace
    left: Comodule
    right: Comodule
    cotensor_basis: np.ndarray
    semimult: LinMap
    semiunit: LinMap
    group: Optional[GroupTable] = None
    subgroup: Tuple[int, ...] = ()
    name: str = 'S'

    @property
    def field(self) -> Field:
        return self.space.field

    @property
    def dim(self) -> int:
        return self.space.dim

    def with_semimult(self, matrix: np.ndarray) -> 'Semialgebra':
        return Semialgebra(self.coalgebra, self.space, self.left, self.right, self.cotensor_basis,
                           LinMap(self.semimult.domain, self.space, matrix), self.semiunit, self.group,
                           self.subgroup, self.name)

    def describe(self) -> Dict[str, Any]:
        return {'name': self.name, 'dim': self.dim, 'coalgebra': self.coalgebra.name,
                'cotensor_dim': self.cotensor_basis.shape[1]}


def finite_sandbox(g: GroupTable, subgroup: Sequence[int], fld: Field) -> Semialgebra:
    h_table = subgroup_table(g, subgroup)
    members = sorted(set(int(x) for x in subgroup))
    c = group_function_coalgebra(h_table, fld)
    n, m = g.order, len(members)
    one = fld.scalar(1)
    space = VecSpace(fld, n, tuple(f"d{x}" for x in g.labels))
    left = fld.zeros(m * n, n)
    right = fld.zeros(n * m, n)
    for x in range(n):
        for i, h in enumerate(members):
            left[i * n + g.mul(g.inverse(h), x), x] = one
            right[g.mul(x, g.inverse(h)) * m + i, x] = one
    left_c = Comodule(c, space, LinMap(space, VecSpace.standard(fld, m * n), left), LEFT, 'S')
    right_c = Comodule(c, space, LinMap(space, VecSpace.standard(fld, n * m), right), RIGHT, 'S')
    cot_space, incl = cotensor_embedding(right_c, left_c)
    # one point of every class [x, y] of G x_H G has x in the transversal
    pushforward = fld.zeros(n, n * n)
    for x in left_transversal(g, members):
        for y in range(n):
            pushforward[g.mul(x, y), x * n + y] = one
    semimult = LinMap(cot_space, space, fld.matmul(pushforward, incl.matrix))
    unit = fld.zeros(n, m)
    for i, h in enumerate(members):
        unit[h, i] = one
    semiunit = LinMap(c.space, space, unit)
    logger.debug(f"sandbox {g.name} over {m} elements: cotensor dim {cot_space.dim}")
    return Semialgebra(c, space, left_c, right_c, incl.matrix, semimult, semiunit, g, tuple(members),
                       f"k({g.name})")


def _cotensor_coordinates(fld: Field, basis: np.ndarray, vectors: np.ndarray) -> Optional[np.ndarray]:
    if basis.shape[1] == 0:
        return fld.zeros(0, vectors.shape[1]) if fld.is_zero(vectors) else None
    return solve_matrix(fld, basis, vectors)


def check_semialgebra(s: Semialgebra) -> CheckResult:
    """Bicomodule, semiassociativity on S box S box S and semiunitality"""
    fld = s.field
    for comodule in (s.left, s.right):
        verdict = check_comodule(comodule)
        if not verdict:
            return CheckResult.fail(f"{comodule.side} coaction: {verdict.axiom}", **verdict.witness)
    c_id = LinMap.identity(s.coalgebra.space)
    s_id = fld.identity(s.dim)
    diff = first_difference(tensor(s.left.coaction, c_id) @ s.right.coaction,
                            tensor(c_id, s.right.coaction) @ s.left.coaction, s.space.basis_labels)
    if diff:
        return CheckResult.fail('bicomodule', **diff)
    e2 = s.cotensor_basis
    mu = s.semimult.matrix
    if s.semimult.domain.dim != e2.shape[1]:
        return CheckResult.fail('semimultiplication domain', dim=s.semimult.domain.dim, cotensor=e2.shape[1])
    # S box S box S = (S box S) (x) S  intersected with  S (x) (S box S)
    first = fld.kron(e2, s_id)
    second = fld.kron(s_id, e2)
    triple = intersect(fld, first, second)
    if triple.shape[1]:
        lhs_in = solve_matrix(fld, first, triple)
        rhs_in = solve_matrix(fld, second, triple)
        lhs = fld.matmul(fld.kron(mu, s_id), lhs_in)
        rhs = fld.matmul(fld.kron(s_id, mu), rhs_in)
        lhs_c = _cotensor_coordinates(fld, e2, lhs)
        rhs_c = _cotensor_coordinates(fld, e2, rhs)
        if lhs_c is None or rhs_c is None:
            return CheckResult.fail('semimultiplication leaves the cotensor product')
        lhs_out = LinMap(VecSpace.standard(fld, triple.shape[1], 't'), s.space, fld.matmul(mu, lhs_c))
        rhs_out = LinMap(VecSpace.standard(fld, triple.shape[1], 't'), s.space, fld.matmul(mu, rhs_c))
        diff = first_difference(lhs_out, rhs_out, lhs_out.domain.basis_labels)
        if diff:
            return CheckResult.fail('semiassociativity', **diff)
    u = s.semiunit.matrix
    _, left_incl = cotensor_embedding(regular(s.coalgebra, RIGHT), s.left)
    _, right_incl = cotensor_embedding(s.right, regular(s.coalgebra, LEFT))
    for label, incl, lifted, collapse in (
            ('left semiunitality', left_incl.matrix, fld.kron(u, s_id), fld.kron(s.coalgebra.counit.matrix, s_id)),
            ('right semiunitality', right_incl.matrix, fld.kron(s_id, u), fld.kron(s_id, s.coalgebra.counit.matrix))):
        coords = _cotensor_coordinates(fld, e2, fld.matmul(lifted, incl))
        if coords is None:
            return CheckResult.fail(label, reason='semiunit does not land in the cotensor product')
        got = LinMap(VecSpace.standard(fld, incl.shape[1]), s.space, fld.matmul(mu, coords))
        expected = LinMap(got.domain, s.space, fld.matmul(collapse, incl))
        diff = first_difference(got, expected, got.domain.basis_labels)
        if diff:
            return CheckResult.fail(label, **diff)
    return CheckResult.ok(dim=s.dim, cotensor_dim=e2.shape[1], triple_dim=triple.shape[1])


def _translation(fld: Field, g: GroupTable, x: int, side: str) -> np.ndarray:
    """d_y |-> d_{xy} on the left, d_y |-> d_{yx} on the right"""
    mat = fld.zeros(g.order, g.order)
    for y in range(g.order):
        mat[g.mul(x, y) if side == LEFT else g.mul(y, x), y] = fld.scalar(1)
    return mat


@dataclass(frozen=True, eq=False)
class SandboxModule:
    """A k[G]-module over a sandbox, rho(g) for every element; base pins the H-side object when known"""
    semialgebra: Semialgebra
    action: Tuple[np.ndarray, ...]
    name: str = 'M'
    base: Any = None

    @property
    def field(self) -> Field:
        return self.semialgebra.field

    @property
    def group(self) -> GroupTable:
        return self.semialgebra.group

    @property
    def dim(self) -> int:
        return self.action[0].shape[0]

    @property
    def space(self) -> VecSpace:
        return VecSpace.standard(self.field, self.dim, 'v')

    def h_operators(self) -> List[np.ndarray]:
        g = self.group
        return [self.action[g.inverse(h)] for h in self.semialgebra.subgroup]

    @cached_property
    def comodule(self) -> Comodule:
        if isinstance(self.base, Comodule):
            return self.base
        c = self.semialgebra.coalgebra
        if self.dim == 0:
            return Comodule(c, self.space, LinMap.zero(self.space, VecSpace.standard(self.field, 0)), LEFT, self.name)
        return comodule_from_operators(c, self.h_operators(), LEFT, self.name)

    @cached_property
    def contramodule(self) -> Contramodule:
        if isinstance(self.base, Contramodule):
            return self.base
        c = self.semialgebra.coalgebra
        if self.dim == 0:
            return Contramodule(c, self.space, LinMap.zero(VecSpace.standard(self.field, 0), self.space), self.name)
        return contramodule_from_operators(c, self.h_operators(), self.name)

    def check(self) -> CheckResult:
        fld = self.field
        g = self.group
        if len(self.action) != g.order:
            return CheckResult.fail('action size', expected=g.order, got=len(self.action))
        if np.any(self.action[g.identity] != fld.identity(self.dim)):
            return CheckResult.fail('identity acts trivially')
        for a in range(g.order):
            for b in range(g.order):
                if np.any(fld.matmul(self.action[a], self.action[b]) != self.action[g.mul(a, b)]):
                    return CheckResult.fail('action', pair=[g.labels[a], g.labels[b]])
        return CheckResult.ok(dim=self.dim)

    def describe(self) -> Dict[str, Any]:
        return {'name': self.name, 'dim': self.dim, 'group': self.group.name}


def sandbox_module(s: Semialgebra, action: Sequence, name: str = 'M') -> SandboxModule:
    fld = s.field
    m = SandboxModule(s, tuple(fld.matrix(a) for a in action), name)
    verdict = m.check()
    if not verdict:
        raise EngineError(f"not a k[{s.group.name}]-module: {verdict.axiom}")
    return m


def regular_module(s: Semialgebra) -> SandboxModule:
    """k(G) with g acting by left translation"""
    g = s.group
    return SandboxModule(s, tuple(_translation(s.field, g, x, LEFT) for x in range(g.order)), f"k({g.name})")


def trivial_module(s: Semialgebra, dim: int = 1) -> SandboxModule:
    return SandboxModule(s, tuple(s.field.identity(dim) for _ in range(s.group.order)), 'k')


@dataclass
class SandboxImage:
    """A functor value computed through the H-level functor, with the comparison to the brute-force value"""
    module: SandboxModule
    comparison: LinMap
    brute_force_dim: int

    def to_dict(self) -> Dict[str, Any]:
        return {'dim': self.module.dim, 'brute_force_dim': self.brute_force_dim}


def _transport(fld: Field, iso: np.ndarray, ops: Sequence[np.ndarray]) -> Tuple[np.ndarray, ...]:
    """iso A iso^{-1} for every A"""
    if iso.shape[0] == 0:
        return tuple(fld.zeros(0, 0) for _ in ops)
    inv = solve_matrix(fld, iso, fld.identity(iso.shape[0]))
    return tuple(fld.matmul(iso, fld.matmul(a, inv)) for a in ops)


def sandbox_psi(m: SandboxModule, pair: Optional[CorrespondencePair] = None) -> SandboxImage:
    """Psi_H(M) with the G-action carried over from Hom_{k[G]}(k(G), M)"""
    s = m.semialgebra
    g = s.group
    fld = m.field
    pair = pair or CorrespondencePair(s.coalgebra)
    image = pair.psi(m.comodule)
    left = [_translation(fld, g, x, LEFT) for x in range(g.order)]
    brute = intertwiners(fld, left, m.action, g.order, m.dim)
    restricted = fld.matmul(hom_left(s.semiunit, m.space).matrix, brute)
    if image.basis.shape[1] != brute.shape[1]:
        raise EngineError(f"Psi_H has dimension {image.basis.shape[1]}, brute force {brute.shape[1]}")
    coords = _cotensor_coordinates(fld, image.basis, restricted)
    if coords is None or (coords.shape[0] and row_reduce(fld, coords).rank != coords.shape[0]):
        raise EngineError("restriction to k(H) is not an isomorphism onto Psi_H")
    acting = []
    for x in range(g.order):
        shift = LinMap(s.space, s.space, _translation(fld, g, x, RIGHT))
        moved = fld.matmul(hom_left(shift, m.space).matrix, brute)
        acting.append(_cotensor_coordinates(fld, brute, moved))
    module = SandboxModule(s, _transport(fld, coords, acting), f"Psi({m.name})", image.contramodule)
    space = VecSpace.standard(fld, brute.shape[1], 'b')
    return SandboxImage(module, LinMap(space, image.contramodule.space, coords), brute.shape[1])


def _brute_force_tensor(s: Semialgebra, action: Sequence[np.ndarray], dim: int):
    """k(G) (x)_{k[G]} P as a quotient of k(G) (x) P, with d_{xg} (x) p = d_x (x) g p"""
    fld = s.field
    g = s.group
    eye = fld.identity(dim)
    blocks = []
    for x in range(g.order):
        for y in range(g.order):
            e_xy = fld.zeros(g.order, 1)
            e_xy[g.mul(x, y), 0] = fld.scalar(1)
            e_x = fld.zeros(g.order, 1)
            e_x[x, 0] = fld.scalar(1)
            blocks.append(fld.sub(fld.kron(e_xy, eye), fld.kron(e_x, action[y])))
    relations = np.hstack(blocks) if dim else fld.zeros(0, 0)
    ambient = VecSpace.standard(fld, g.order * dim)
    return cokernel(LinMap(VecSpace.standard(fld, relations.shape[1]), ambient, relations), 'bt')


def sandbox_phi(p: SandboxModule, pair: Optional[CorrespondencePair] = None) -> SandboxImage:
    """Phi_H(P) with the G-action carried over from k(G) (x)_{k[G]} P"""
    s = p.semialgebra
    g = s.group
    fld = p.field
    pair = pair or CorrespondencePair(s.coalgebra)
    image = pair.phi(p.contramodule)
    bt_space, bt_proj = _brute_force_tensor(s, p.action, p.dim)
    eye = fld.identity(p.dim)
    along = fld.matmul(bt_proj.matrix, fld.kron(s.semiunit.matrix, eye))
    comparison = descend(fld, image.projection.matrix, along)
    if comparison is None or comparison.shape[0] != comparison.shape[1] or \
            (comparison.shape[0] and row_reduce(fld, comparison).rank != comparison.shape[0]):
        raise EngineError(f"Phi_H has dimension {image.comodule.dim}, brute force {bt_space.dim}")
    acting = []
    for x in range(g.order):
        lifted = fld.matmul(bt_proj.matrix, fld.kron(_translation(fld, g, x, LEFT), eye))
        acting.append(descend(fld, bt_proj.matrix, lifted))
    inv = solve_matrix(fld, comparison, fld.identity(comparison.shape[0])) if comparison.shape[0] else comparison
    module = SandboxModule(s, _transport(fld, inv, acting), f"Phi({p.name})", image.comodule)
    return SandboxImage(module, LinMap(image.comodule.space, bt_space, comparison), bt_space.dim)


def diagram_check(image: SandboxImage) -> CheckResult:
    """Restricting the transported G-action to H recovers the H-level functor value"""
    module = image.module
    fld = module.field
    base = module.base
    g = module.group
    for i, h in enumerate(module.semialgebra.subgroup):
        expected = base.operator(i)
        got = module.action[g.inverse(h)]
        if expected.shape != got.shape or np.any(fld.matrix(expected) != got):
            return CheckResult.fail('restriction to H', element=g.labels[h])
    return CheckResult.ok(dim=module.dim)


def hom_g_dimension(a: SandboxModule, b: SandboxModule) -> int:
    return intertwiners(a.field, a.action, b.action, a.dim, b.dim).shape[1]


def sandbox_adjunction(p: SandboxModule, m: SandboxModule, pair: Optional[CorrespondencePair] = None) -> CheckResult:
    """dim Hom_G(Phi_G P, M) = dim Hom_G(P, Psi_G M)"""
    pair = pair or CorrespondencePair(p.semialgebra.coalgebra)
    left = hom_g_dimension(sandbox_phi(p, pair).module, m)
    right = hom_g_dimension(p, sandbox_psi(m, pair).module)
    if left != right:
        return CheckResult.fail('adjunction', phi_side=left, psi_side=right)
    return CheckResult.ok(dim=left)


def sandbox_flags(m: SandboxModule) -> Dict[str, Any]:
    return {'h_injective': is_injective_comodule(m.comodule),
            'h_projective': is_projective_contramodule(m.contramodule),
            'semiprojective': None, 'semiinjective': None}


def sandbox_equivalence(m: SandboxModule, kind: str, pair: Optional[CorrespondencePair] = None) -> CheckResult:
    """Counit Phi_G Psi_G M -> M for H-injective M, unit P -> Psi_G Phi_G P for H-projective P"""
    s = m.semialgebra
    fld = m.field
    pair = pair or CorrespondencePair(s.coalgebra)
    flags = sandbox_flags(m)
    if kind == 'smooth':
        if not flags['h_injective']:
            raise PreconditionError(f"{m.name} is not injective over k(H)")
        round_trip = sandbox_phi(sandbox_psi(m, pair).module, pair).module
        arrow = pair.counit(m.comodule)
        source, target = round_trip, m
    else:
        if not flags['h_projective']:
            raise PreconditionError(f"{m.name} is not projective over k(H)")
        round_trip = sandbox_psi(sandbox_phi(m, pair).module, pair).module
        arrow = pair.unit(m.contramodule)
        source, target = m, round_trip
    if not is_iso(arrow):
        return CheckResult.fail(f"{'counit' if kind == 'smooth' else 'unit'} isomorphism", dim=m.dim)
    for x in range(s.group.order):
        lhs = fld.matmul(arrow.matrix, source.action[x])
        rhs = fld.matmul(target.action[x], arrow.matrix)
        if np.any(lhs != rhs):
            return CheckResult.fail('G-equivariance', element=s.group.labels[x])
    return CheckResult.ok(kind=kind, dim=m.dim)


def sandbox_contratensor_comparison(n: SandboxModule, p: SandboxModule) -> CheckResult:
    """N (x)_{k[G]} P against N ⊙_{k(H)} P modulo the coset relations, compared inside N (x) P"""
    s = n.semialgebra
    g = s.group
    fld = n.field
    ambient = n.dim * p.dim
    if ambient == 0:
        return CheckResult.ok(dim=0)
    eye_n, eye_p = fld.identity(n.dim), fld.identity(p.dim)

    def group_relations(elements):
        return [fld.sub(fld.kron(n.action[g.inverse(x)], eye_p), fld.kron(eye_n, p.action[x])) for x in elements]

    module_rel = np.hstack(group_relations(range(g.order)))
    right = comodule_from_operators(s.coalgebra, [n.action[h] for h in s.subgroup], RIGHT, n.name)
    first, second = contratensor_maps(right, p.contramodule)
    contra_rel = np.hstack([(first - second).matrix] + group_relations(left_transversal(g, s.subgroup)))
    if not subspace_contains(fld, contra_rel, module_rel):
        return CheckResult.fail('comparison map', reason='module relations not implied by the contratensor ones')
    module_rank = row_reduce(fld, module_rel).rank
    contra_rank = row_reduce(fld, contra_rel).rank
    if module_rank != contra_rank:
        return CheckResult.fail('isomorphism', module_tensor_dim=ambient - module_rank,
                                contratensor_dim=ambient - contra_rank)
    return CheckResult.ok(dim=ambient - module_rank)
