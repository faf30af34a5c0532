"""
Comodule-contramodule correspondence over a finite-dimensional coalgebra.

Psi(M) = Hom_C(C, M) sits inside the free contramodule Hom_k(C, M) and Phi(P)
= C ⊙_C P is a quotient of the cofree comodule C (x) P. Derived functors are
applied termwise to explicit resolutions and are only defined under a cap.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np

from src.algebra.coalg import Coalgebra
from src.algebra.comod import (LEFT, RIGHT, Comodule, cofree, comodule_hom, from_operators, injective_coresolution,
                               is_injective_comodule, quotient_comodule, regular)
from src.algebra.contramod import (Contramodule, contra_hom, contratensor_maps, free_contra, free_resolution,
                                   is_projective_contramodule, subcontramodule)
from src.algebra.errors import AxiomViolation, CapExceeded, CheckResult, EngineError, PreconditionError
from src.algebra.exactlin import (LinMap, VecSpace, curry, hom_vector, image, is_iso, rank, solve_matrix)
from src.algebra.homcx import ChainMap, Complex, is_quasi_iso
from src.algebra.reps import OperatorRep, hom_dimension, indecomposable_summands, proper_subspace

logger = logging.getLogger(__name__)


@dataclass
class PsiImage:
    """Psi(M) with the basis of Hom_C(C, M) inside Hom_k(C, M)"""
    contramodule: Contramodule
    basis: np.ndarray


@dataclass
class PhiImage:
    """Phi(P) with the projection C (x) P -> C ⊙_C P"""
    comodule: Comodule
    projection: LinMap


def psi_image(m: Comodule) -> PsiImage:
    if m.side != LEFT:
        raise EngineError("Psi is defined on left comodules")
    c = m.coalgebra
    fld = m.field
    homs = comodule_hom(regular(c, LEFT), m)
    free = free_contra(c, m.space)
    if homs.maps:
        basis = np.hstack([hom_vector(f).reshape(-1, 1) for f in homs.maps])
    else:
        basis = fld.zeros(free.dim, 0)
    if basis.shape[1] == 0:
        space = VecSpace.standard(fld, 0, 'p')
        empty = Contramodule(c, space, LinMap.zero(VecSpace.standard(fld, 0), space), f"Psi({m.name})")
        return PsiImage(empty, basis)
    return PsiImage(subcontramodule(free, basis, f"Psi({m.name})"), basis)


def phi_image(p: Contramodule) -> PhiImage:
    c = p.coalgebra
    first, second = contratensor_maps(regular(c, RIGHT), p)
    _, relations = image(first - second)
    comodule, proj = quotient_comodule(cofree(c, p.space), relations.matrix, f"Phi({p.name})")
    return PhiImage(comodule, proj)


def psi(m: Comodule) -> Contramodule:
    return psi_image(m).contramodule


def phi(p: Contramodule) -> Comodule:
    return phi_image(p).comodule


def psi_map(g: LinMap, source: PsiImage, target: PsiImage) -> LinMap:
    """Psi(g): f |-> g o f, in the bases of Hom_C(C, -)"""
    fld = g.field
    c_dim = source.contramodule.coalgebra.dim
    composed = fld.matmul(fld.kron(g.matrix, fld.identity(c_dim)), source.basis)
    coords = solve_matrix(fld, target.basis, composed) if target.basis.shape[1] else \
        fld.zeros(0, source.basis.shape[1])
    if coords is None:
        raise EngineError("Psi(g) leaves Hom_C(C, N)")
    return LinMap(source.contramodule.space, target.contramodule.space, coords)


def phi_map(f: LinMap, source: PhiImage, target: PhiImage) -> LinMap:
    """Phi(f): [c (x) x] |-> [c (x) f(x)]"""
    fld = f.field
    c_dim = source.comodule.coalgebra.dim
    lifted = fld.matmul(target.projection.matrix, fld.kron(fld.identity(c_dim), f.matrix))
    induced = descend(fld, source.projection.matrix, lifted)
    if induced is None:
        raise EngineError("Phi(f) is not well defined on the contratensor product")
    return LinMap(source.comodule.space, target.comodule.space, induced)


def descend(fld, proj: np.ndarray, g: np.ndarray) -> Optional[np.ndarray]:
    """E with E o proj = g, when g kills ker(proj)"""
    if proj.shape[0] == 0:
        return fld.zeros(g.shape[0], 0) if fld.is_zero(g) else None
    coords = solve_matrix(fld, proj.T.copy(), g.T.copy())
    return None if coords is None else coords.T.copy()


@dataclass
class CorrespondencePair:
    """Psi_C and Phi_C for one coalgebra, memoized per object within a session"""
    coalgebra: Coalgebra
    psi_cache: Dict[int, PsiImage] = field(default_factory=dict)
    phi_cache: Dict[int, PhiImage] = field(default_factory=dict)

    def __post_init__(self):
        self.logger = logging.getLogger(__name__)

    def psi(self, m: Comodule) -> PsiImage:
        key = id(m)
        if key not in self.psi_cache:
            self.logger.debug(f"computing Psi({m.name}), dim {m.dim}")
            self.psi_cache[key] = psi_image(m)
        return self.psi_cache[key]

    def phi(self, p: Contramodule) -> PhiImage:
        key = id(p)
        if key not in self.phi_cache:
            self.logger.debug(f"computing Phi({p.name}), dim {p.dim}")
            self.phi_cache[key] = phi_image(p)
        return self.phi_cache[key]

    def counit(self, m: Comodule) -> LinMap:
        """Phi(Psi(M)) -> M, [c (x) f] |-> f(c)"""
        fld = m.field
        c_dim = self.coalgebra.dim
        psi_m = self.psi(m)
        phi_psi = self.phi(psi_m.contramodule)
        evaluation = fld.zeros(m.dim, c_dim * m.dim * c_dim)
        for c in range(c_dim):
            for x in range(m.dim):
                evaluation[x, c * (m.dim * c_dim) + x * c_dim + c] = fld.scalar(1)
        on_tensor = fld.matmul(evaluation, fld.kron(fld.identity(c_dim), psi_m.basis))
        induced = descend(fld, phi_psi.projection.matrix, on_tensor)
        if induced is None:
            raise EngineError("evaluation does not factor through the contratensor product")
        return LinMap(phi_psi.comodule.space, m.space, induced)

    def unit(self, p: Contramodule) -> LinMap:
        """P -> Psi(Phi(P)), x |-> (c |-> [c (x) x])"""
        fld = p.field
        phi_p = self.phi(p)
        psi_phi = self.psi(phi_p.comodule)
        proj = phi_p.projection
        into_hom = curry(LinMap(proj.domain, phi_p.comodule.space, proj.matrix), self.coalgebra.space, p.space)
        if psi_phi.basis.shape[1] == 0:
            return LinMap(p.space, psi_phi.contramodule.space, fld.zeros(0, p.dim))
        coords = solve_matrix(fld, psi_phi.basis, into_hom.matrix)
        if coords is None:
            raise EngineError("unit does not land in Hom_C(C, Phi(P))")
        return LinMap(p.space, psi_phi.contramodule.space, coords)


def phi_psi_unit_counit(obj: Union[Comodule, Contramodule],
                        pair: Optional[CorrespondencePair] = None) -> CheckResult:
    """Counit Phi Psi M -> M for injective M, unit P -> Psi Phi P for projective P, checked as isomorphisms"""
    pair = pair or CorrespondencePair(obj.coalgebra)
    if isinstance(obj, Comodule):
        if not is_injective_comodule(obj):
            raise PreconditionError(f"comodule {obj.name} is not injective")
        counit = pair.counit(obj)
        source = pair.phi(pair.psi(obj).contramodule).comodule
        if not source.is_morphism(obj, counit):
            return CheckResult.fail('counit naturality', comodule=obj.name)
        if not is_iso(counit):
            return CheckResult.fail('counit isomorphism', rank=rank(counit), dim=obj.dim)
        return CheckResult.ok(kind='counit', dim=obj.dim)
    if not is_projective_contramodule(obj):
        raise PreconditionError(f"contramodule {obj.name} is not projective")
    unit = pair.unit(obj)
    target = pair.psi(pair.phi(obj).comodule).contramodule
    if not obj.is_morphism(target, unit):
        return CheckResult.fail('unit naturality', contramodule=obj.name)
    if not is_iso(unit):
        return CheckResult.fail('unit isomorphism', rank=rank(unit), dim=obj.dim)
    return CheckResult.ok(kind='unit', dim=obj.dim)


def derived_phi(p: Contramodule, cap: int, pair: Optional[CorrespondencePair] = None) -> Complex:
    """L Phi(P): Phi applied to a free resolution, supported in degrees [-cap, 0]"""
    pair = pair or CorrespondencePair(p.coalgebra)
    res = free_resolution(p, cap)
    resolution = res.complex
    images = {i: pair.phi(resolution.decoration[i]) for i in range(-res.length, 1)}
    terms = {i: images[i].comodule.space for i in images}
    diffs = {i: phi_map(resolution.d(i), images[i], images[i + 1]) for i in range(-res.length, 0)}
    decoration = {i: images[i].comodule for i in images}
    return Complex(p.field, terms, diffs, decoration, 'comodule')


def derived_psi(m: Comodule, cap: int, pair: Optional[CorrespondencePair] = None) -> Complex:
    """R Psi(M): Psi applied to an injective coresolution, supported in degrees [0, cap]"""
    pair = pair or CorrespondencePair(m.coalgebra)
    res = injective_coresolution(m, cap)
    resolution = res.complex
    images = {i: pair.psi(resolution.decoration[i]) for i in range(res.length + 1)}
    terms = {i: images[i].contramodule.space for i in images}
    diffs = {i: psi_map(resolution.d(i), images[i], images[i + 1]) for i in range(res.length)}
    decoration = {i: images[i].contramodule for i in images}
    return Complex(m.field, terms, diffs, decoration, 'contramodule')


def simple_comodules(c: Coalgebra, seed: int = 0) -> List[Comodule]:
    """One left comodule per isomorphism class of simples, found in the socle of C"""
    rep = c.regular_rep
    fld = c.field
    found: List[OperatorRep] = []
    for summand in indecomposable_summands(rep, seed):
        basis = summand
        sub = rep.restrict(basis)
        while True:
            smaller = proper_subspace(sub, seed)
            if smaller is None:
                break
            basis = fld.matmul(basis, smaller)
            sub = rep.restrict(basis)
        if not any(s.dim == sub.dim and hom_dimension(s, sub) > 0 for s in found):
            found.append(sub)
    return [from_operators(c, s.ops, LEFT, f"S{i}") for i, s in enumerate(found)]


@dataclass
class DimensionBound:
    value: int
    exact: bool = True

    def __str__(self) -> str:
        return str(self.value) if self.exact else f"≥ {self.value}"

    def to_json(self) -> Any:
        return self.value if self.exact else str(self)


def homological_dimension(c: Coalgebra, cap: int, seed: int = 0) -> DimensionBound:
    """Largest injective-coresolution length over the simple comodules, or a lower bound at the cap"""
    longest = 0
    for s in simple_comodules(c, seed):
        try:
            res = injective_coresolution(s, cap)
        except CapExceeded:
            logger.info(f"homological dimension of {c.name} reaches the cap {cap}")
            return DimensionBound(cap, exact=False)
        longest = max(longest, res.length)
    return DimensionBound(longest)


def adjunction_psi_phi(p: Contramodule, m: Comodule, pair: Optional[CorrespondencePair] = None) -> CheckResult:
    """Hom_C(Phi P, M) = Hom^C(P, Psi M) through g |-> (x |-> (c |-> g[c (x) x]))"""
    pair = pair or CorrespondencePair(p.coalgebra)
    fld = p.field
    phi_p = pair.phi(p)
    psi_m = pair.psi(m)
    left = comodule_hom(phi_p.comodule, m)
    right = contra_hom(p, psi_m.contramodule)
    if left.dim != right.dim:
        return CheckResult.fail('adjunction dimension', left_dim=left.dim, right_dim=right.dim)
    columns = []
    for g in left.maps:
        lifted = g @ phi_p.projection
        into_hom = curry(lifted, p.coalgebra.space, p.space)
        coords = solve_matrix(fld, psi_m.basis, into_hom.matrix) if psi_m.basis.shape[1] else None
        if coords is None:
            return CheckResult.fail('adjunction map', reason='image leaves Hom_C(C, M)')
        mate = LinMap(p.space, psi_m.contramodule.space, coords)
        if not right.contains(mate):
            return CheckResult.fail('adjunction map', reason='mate is not a contramodule map')
        columns.append(coords.reshape(-1, 1))
    if columns and rank(LinMap(VecSpace.standard(fld, len(columns)), VecSpace.standard(fld, columns[0].shape[0]),
                               np.hstack(columns))) != left.dim:
        return CheckResult.fail('adjunction bijectivity', left_dim=left.dim)
    return CheckResult.ok(hom_dim=left.dim)


def derived_round_trip(obj: Union[Comodule, Contramodule], cap: int,
                       pair: Optional[CorrespondencePair] = None) -> CheckResult:
    """
    R Psi L Phi P = P through the unit F -> Psi Phi F on a free resolution F of
    P, and L Phi R Psi M = M through the counit Phi Psi J -> J on an injective
    coresolution J of M. Phi F is a complex of injective comodules and Psi J one
    of projective contramodules, so Psi Phi F and Phi Psi J compute the
    composites. The resolution and the unit (or counit) must be quasi-isomorphisms.
    """
    pair = pair or CorrespondencePair(obj.coalgebra)
    fld = obj.field
    try:
        if isinstance(obj, Contramodule):
            res = free_resolution(obj, cap)
            cx = res.complex
            degrees = sorted(cx.decoration)
            phis = {i: pair.phi(cx.decoration[i]) for i in degrees}
            psis = {i: pair.psi(phis[i].comodule) for i in degrees}
            diffs = {i: psi_map(phi_map(cx.d(i), phis[i], phis[i + 1]), psis[i], psis[i + 1])
                     for i in degrees if i + 1 in phis}
            composite = Complex(fld, {i: psis[i].contramodule.space for i in degrees}, diffs,
                                {i: psis[i].contramodule for i in degrees}, 'contramodule')
            augmentation = ChainMap(cx, Complex.concentrated(obj.space, 0, obj, 'contramodule'),
                                    {0: res.augmentation})
            comparison = ChainMap(cx, composite, {i: pair.unit(cx.decoration[i]) for i in degrees})
            kind = 'unit'
        else:
            res = injective_coresolution(obj, cap)
            cx = res.complex
            degrees = sorted(cx.decoration)
            psis = {i: pair.psi(cx.decoration[i]) for i in degrees}
            phis = {i: pair.phi(psis[i].contramodule) for i in degrees}
            diffs = {i: phi_map(psi_map(cx.d(i), psis[i], psis[i + 1]), phis[i], phis[i + 1])
                     for i in degrees if i + 1 in psis}
            composite = Complex(fld, {i: phis[i].comodule.space for i in degrees}, diffs,
                                {i: phis[i].comodule for i in degrees}, 'comodule')
            augmentation = ChainMap(Complex.concentrated(obj.space, 0, obj, 'comodule'), cx,
                                    {0: res.augmentation})
            comparison = ChainMap(composite, cx, {i: pair.counit(cx.decoration[i]) for i in degrees})
            kind = 'counit'
    except AxiomViolation as e:
        return CheckResult.fail('round trip chain map', reason=str(e))
    for label, chain in (('resolution', augmentation), (kind, comparison)):
        verdict = is_quasi_iso(chain)
        if not verdict:
            return CheckResult.fail(f"round trip {label}", **verdict.to_dict())
    return CheckResult.ok(kind=kind, length=res.length, dim=obj.dim, support=composite.homology_support())
