"""
Profinite groups as towers of finite quotients, and k[[t]]-side computations.

Levels are numbered from 1; level 0 is the trivial group. For the built-in
abelian towers an element of level n has integer coordinates (a_1, ..., a_d)
and the point measure at it acts on a finite-length module by
(1 + t_1)^{a_1} ... (1 + t_d)^{a_d}. This identification of k[H/U_n] with a
quotient of k[[t_1, ..., t_d]] needs the characteristic of k to be p.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.algebra.coalg import (Coalgebra, group_algebra, group_function_coalgebra, group_function_inclusion,
                               is_coalgebra_morphism)
from src.algebra.comod import RIGHT, Comodule, from_operators as comodule_from_operators
from src.algebra.contramod import Contramodule, contra_hom, contratensor_projection
from src.algebra.contramod import from_operators as contramodule_from_operators
from src.algebra.errors import CheckResult, DimensionMismatch, EngineError, PreconditionError, StabilizationError
from src.algebra.exactlin import (Field, LinMap, VecSpace, cokernel, hom_vector, intersect, intertwiners, is_iso,
                                  row_reduce, solve_matrix, subspace_basis, subspaces_equal)
from src.algebra.groups import GroupTable, cyclic, product
from src.algebra.homcx import ChainMap, Complex, homology_data, induced_on_homology
from src.towers.powerseries import (SmithForm, TorsionModule, TruncatedSeriesRing, max_degree,
                                    module_from_relations, polynomial_matrix, presentation_quotient,
                                    safe_precision, smith_form, verify_smith)

logger = logging.getLogger(__name__)

TOWERS = ('Zp', 'Zp2')
TWISTS = ('identity', 'inversion')


@dataclass(frozen=True, eq=False)
class GroupTower:
    """H/U_1 <- H/U_2 <- ... with surjections[n] : level n -> level n - 1"""
    name: str
    prime: int
    levels: Tuple[GroupTable, ...]
    surjections: Dict[int, Tuple[int, ...]]
    twist: Optional[Dict[int, Tuple[int, ...]]] = None
    twist_name: str = 'identity'

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def rank(self) -> int:
        return 1 if self.name == 'Zp' else 2

    def level(self, n: int) -> GroupTable:
        if n == 0:
            return cyclic(1)
        if not 1 <= n <= self.depth:
            raise EngineError(f"level {n} outside 1..{self.depth}")
        return self.levels[n - 1]

    def level_order(self, n: int) -> int:
        return self.prime ** n

    def cyclic_orders(self, n: int) -> List[int]:
        return [self.level_order(n)] * self.rank

    def coordinates(self, n: int, x: int) -> Tuple[int, ...]:
        if self.rank == 1:
            return (x,)
        return divmod(x, self.level_order(n))

    def generators(self, n: int) -> List[int]:
        """Indices of the standard topological generators at level n"""
        if self.rank == 1:
            return [1 % self.level_order(n)]
        m = self.level_order(n)
        return [m % (m * m), 1 % (m * m)]

    def surjection(self, n: int) -> Tuple[int, ...]:
        """level n -> level n - 1"""
        if n == 1:
            return tuple(0 for _ in range(self.level(1).order))
        return self.surjections[n]

    def check(self) -> CheckResult:
        for n in range(1, self.depth + 1):
            if not self.level(n).is_homomorphism(self.level(n - 1), self.surjection(n)):
                return CheckResult.fail('level surjection', level=n)
            if self.twist is None:
                continue
            phi = self.twist[n]
            if not self.level(n).is_automorphism(phi):
                return CheckResult.fail('twist automorphism', level=n)
            if n > 1:
                below = self.twist[n - 1]
                surj = self.surjection(n)
                if any(surj[phi[x]] != below[surj[x]] for x in range(self.level(n).order)):
                    return CheckResult.fail('twist compatibility', level=n)
        return CheckResult.ok(depth=self.depth, prime=self.prime, twist=self.twist_name)

    def to_dict(self) -> Dict[str, Any]:
        return {'name': self.name, 'p': self.prime, 'depth': self.depth, 'twist': self.twist_name}


def builtin_tower(name: str, p: int, depth: int, twist: Optional[str] = None) -> GroupTower:
    """Z/p <- Z/p^2 <- ... or its square"""
    if name not in TOWERS:
        raise EngineError(f"unknown tower {name}, expected one of {TOWERS}")
    if depth < 1:
        raise EngineError(f"tower depth must be at least 1, got {depth}")
    Field(p)
    if twist is not None and twist not in TWISTS:
        raise EngineError(f"unknown twist {twist}, expected one of {TWISTS}")
    levels = []
    surjections: Dict[int, Tuple[int, ...]] = {}
    twists: Dict[int, Tuple[int, ...]] = {}
    for n in range(1, depth + 1):
        m = p ** n
        group = cyclic(m) if name == 'Zp' else product(cyclic(m), cyclic(m))
        levels.append(group)
        if name == 'Zp':
            if n > 1:
                surjections[n] = tuple(x % (m // p) for x in range(m))
            twists[n] = tuple((-x) % m if twist == 'inversion' else x for x in range(m))
        else:
            if n > 1:
                below = m // p
                surjections[n] = tuple((a % below) * below + (b % below) for a in range(m) for b in range(m))
            twists[n] = tuple(((-a) % m) * m + ((-b) % m) if twist == 'inversion' else a * m + b
                              for a in range(m) for b in range(m))
    return GroupTower(name, p, tuple(levels), surjections, twists if twist else None, twist or 'identity')


@dataclass
class CoalgebraLevel:
    coalgebra: Coalgebra
    previous: Coalgebra
    inclusion: LinMap
    is_morphism: bool


def ind_coalgebra_level(tower: GroupTower, n: int, fld: Field) -> CoalgebraLevel:
    """C_n = k(H/U_n) with the inclusion C_{n-1} -> C_n dual to the level surjection"""
    current = group_function_coalgebra(tower.level(n), fld)
    previous = group_function_coalgebra(tower.level(n - 1), fld)
    incl = group_function_inclusion(tower.level(n), tower.level(n - 1), tower.surjection(n), fld)
    return CoalgebraLevel(current, previous, incl, is_coalgebra_morphism(incl, previous, current))


def level_algebra_surjection(tower: GroupTower, n: int, fld: Field) -> LinMap:
    """k[H/U_n] -> k[H/U_{n-1}] induced by the level surjection"""
    upper = tower.level(n)
    lower = tower.level(n - 1)
    mat = fld.zeros(lower.order, upper.order)
    for x, y in enumerate(tower.surjection(n)):
        mat[y, x] = fld.scalar(1)
    return LinMap(group_algebra(upper, fld).space, group_algebra(lower, fld).space, mat)


@dataclass
class PCModule:
    """Finitely presented module over k[[t]] (or finite length over k[[t_1, t_2]])"""
    field: Field
    presentation: List[List[List[int]]] = field(default_factory=list)
    generators: int = 1
    variables: int = 1
    relations: List[Dict[Tuple[int, ...], int]] = field(default_factory=list)
    order: int = 0
    name: str = 'P'

    @classmethod
    def cyclic_torsion(cls, fld: Field, exponent: int, name: str = 'P') -> 'PCModule':
        return cls(fld, [[[0] * exponent + [1]]], 1, name=name)

    @classmethod
    def free(cls, fld: Field, rank: int, name: str = 'R') -> 'PCModule':
        return cls(fld, [[] for _ in range(rank)], rank, name=name)

    @classmethod
    def from_exponents(cls, fld: Field, exponents: Sequence[int], free_rank: int = 0,
                       name: str = 'P') -> 'PCModule':
        g = free_rank + len(exponents)
        rows = [[[0] for _ in exponents] for _ in range(g)]
        for j, e in enumerate(exponents):
            rows[free_rank + j][j] = [0] * e + [1]
        return cls(fld, rows, g, name=name)

    @property
    def relation_count(self) -> int:
        return len(self.presentation[0]) if self.presentation else 0

    def degree(self) -> int:
        return max_degree(self.presentation)

    def precision(self) -> int:
        return safe_precision(self.generators, self.relation_count, self.degree())

    def matrix(self, ring: TruncatedSeriesRing) -> np.ndarray:
        if self.relation_count == 0:
            return np.empty((self.generators, 0, ring.precision), dtype=self.field.dtype)
        return polynomial_matrix(ring, self.presentation)

    def smith(self, precision: Optional[int] = None) -> SmithForm:
        if self.variables != 1:
            raise EngineError("Smith form is only available in one variable")
        ring = TruncatedSeriesRing(self.field, precision or self.precision())
        mat = self.matrix(ring)
        form = smith_form(ring, mat)
        if not verify_smith(ring, mat, form):
            raise EngineError(f"Smith certificate for {self.name} failed")
        return form

    def is_finite_length(self) -> bool:
        return self.variables == 2 or self.smith().is_finite_length

    def torsion_module(self) -> TorsionModule:
        """The module as a vector space with t acting; finite length only"""
        if self.variables == 2:
            return module_from_relations(self.field, 2, self.order, self.relations, self.name)
        form = self.smith()
        if not form.is_finite_length:
            raise PreconditionError(f"{self.name} has free rank {form.free_rank}")
        ring = TruncatedSeriesRing(self.field, max(form.exponents, default=0) + 1)
        return presentation_quotient(ring, self.matrix(ring), self.name)[0]

    def torsion_part(self) -> TorsionModule:
        """The torsion submodule, up to isomorphism, read from the Smith form"""
        if self.variables == 2:
            return self.torsion_module()
        return TorsionModule.from_exponents(self.field, self.smith().exponents, f"tors {self.name}")

    def truncation(self, level: int) -> Tuple[TorsionModule, np.ndarray]:
        """P / t^level P with the projection from (k[t]/t^level)^g"""
        ring = TruncatedSeriesRing(self.field, level)
        return presentation_quotient(ring, self.matrix(ring), f"{self.name}/t^{level}")

    def constant_matrix(self) -> np.ndarray:
        fld = self.field
        mat = fld.zeros(self.generators, self.relation_count)
        for i, row in enumerate(self.presentation):
            for j, coeffs in enumerate(row):
                if coeffs:
                    mat[i, j] = fld.scalar(coeffs[0])
        return mat

    def to_dict(self) -> Dict[str, Any]:
        if self.variables == 2:
            return {'name': self.name, 'variables': 2, 'order': self.order}
        return {'name': self.name, 'variables': 1, 'generators': self.generators,
                'presentation': self.presentation}


def pcmodule_from_torsion(m: TorsionModule) -> PCModule:
    return PCModule.from_exponents(m.field, m.exponents(), name=m.name)


def _require_characteristic(fld: Field, tower: GroupTower):
    if fld.characteristic != tower.prime:
        raise PreconditionError(f"level group algebras are truncated power series only in characteristic "
                                f"{tower.prime}, field is {fld}")


def level_for(tower: GroupTower, *modules: TorsionModule) -> int:
    """Least level n whose group acts through 1 + t on every module"""
    index = max((m.nilpotency_index() for m in modules), default=0)
    n = 1
    while tower.level_order(n) < index:
        n += 1
    return n


def _group_operators(tower: GroupTower, n: int, m: TorsionModule) -> List[np.ndarray]:
    fld = m.field
    gammas = [fld.add(fld.identity(m.dim), t) for t in m.ops]
    order = tower.level_order(n)
    powers = []
    for g in gammas:
        table = [fld.identity(m.dim)]
        for _ in range(order - 1):
            table.append(fld.matmul(g, table[-1]))
        powers.append(table)
    ops = []
    for x in range(tower.level(n).order):
        op = fld.identity(m.dim)
        for v, a in enumerate(tower.coordinates(n, x)):
            op = fld.matmul(op, powers[v][a])
        ops.append(op)
    return ops


def level_contramodule(tower: GroupTower, n: int, m: TorsionModule, c: Optional[Coalgebra] = None) -> Contramodule:
    """A finite-length module as a contramodule over C_n"""
    if m.variables != tower.rank:
        raise PreconditionError(f"module in {m.variables} variables over a rank {tower.rank} tower")
    c = c or group_function_coalgebra(tower.level(n), m.field)
    if m.dim == 0:
        space = VecSpace.standard(m.field, 0, 'p')
        return Contramodule(c, space, LinMap.zero(VecSpace.standard(m.field, 0), space), m.name)
    return contramodule_from_operators(c, _group_operators(tower, n, m), m.name)


def level_comodule(tower: GroupTower, n: int, m: TorsionModule, c: Optional[Coalgebra] = None,
                   side: str = RIGHT) -> Comodule:
    """A finite-length discrete module as a comodule over C_n, right-sided unless asked otherwise"""
    c = c or group_function_coalgebra(tower.level(n), m.field)
    if m.dim == 0:
        space = VecSpace.standard(m.field, 0, 'm')
        return Comodule(c, space, LinMap.zero(space, VecSpace.standard(m.field, 0)), side, m.name)
    return comodule_from_operators(c, _group_operators(tower, n, m), side, m.name)


def level_module(tower: GroupTower, n: int, fld: Field) -> TorsionModule:
    """C_n as a discrete k[[t]]-module: t_i acts by the generator minus 1"""
    c = group_function_coalgebra(tower.level(n), fld)
    ops = tuple(fld.sub(c.left_operator(g), fld.identity(c.dim)) for g in tower.generators(n))
    return TorsionModule(fld, ops, c.dim, f"C_{n}")


def dense_subring_hom_check(p: TorsionModule, q: TorsionModule, tower: GroupTower) -> CheckResult:
    """Hom over k[gamma^{+-1}] (gamma = 1 + t), over k[[t]] and as C_n-contramodules agree"""
    fld = p.field
    _require_characteristic(fld, tower)
    if p.dim == 0 or q.dim == 0:
        return CheckResult.ok(hom_dim=0)
    over_series = p.hom_basis(q)
    gammas_p = [fld.add(fld.identity(p.dim), t) for t in p.ops]
    gammas_q = [fld.add(fld.identity(q.dim), t) for t in q.ops]
    over_dense = p.hom_basis(q, gammas_p, gammas_q)
    n = level_for(tower, p, q)
    if n > tower.depth:
        raise PreconditionError(f"modules need level {n}, tower has depth {tower.depth}")
    c = group_function_coalgebra(tower.level(n), fld)
    homs = contra_hom(level_contramodule(tower, n, p, c), level_contramodule(tower, n, q, c))
    as_contra = np.hstack([hom_vector(f).reshape(-1, 1) for f in homs.maps]) if homs.maps \
        else fld.zeros(p.dim * q.dim, 0)
    if not subspaces_equal(fld, over_series, over_dense):
        return CheckResult.fail('dense subring', series_dim=over_series.shape[1], dense_dim=over_dense.shape[1])
    if not subspaces_equal(fld, over_series, as_contra):
        return CheckResult.fail('contramodule hom', series_dim=over_series.shape[1], contra_dim=as_contra.shape[1])
    return CheckResult.ok(hom_dim=over_series.shape[1], level=n)


def module_tensor(n: TorsionModule, p: TorsionModule) -> Tuple[VecSpace, LinMap]:
    """N (x)_{k[t]} P as a quotient of N (x) P"""
    fld = n.field
    cols = [fld.sub(fld.kron(a, fld.identity(p.dim)), fld.kron(fld.identity(n.dim), b))
            for a, b in zip(n.ops, p.ops)]
    ambient = VecSpace.standard(fld, n.dim * p.dim)
    relations = np.hstack(cols) if cols and n.dim * p.dim else fld.zeros(n.dim * p.dim, 0)
    return cokernel(LinMap(VecSpace.standard(fld, relations.shape[1]), ambient, relations), 'mt')


def contratensor_comparison(n: TorsionModule, p: TorsionModule, tower: GroupTower) -> CheckResult:
    """N (x)_{k[t]} P and N ⊙_{C_n} P computed separately, compared through N (x) P"""
    fld = n.field
    _require_characteristic(fld, tower)
    if n.dim == 0 or p.dim == 0:
        return CheckResult.ok(dim=0)
    mt_space, mt_proj = module_tensor(n, p)
    dims = {}
    level = level_for(tower, n, p)
    if level > tower.depth:
        raise PreconditionError(f"modules need level {level}, tower has depth {tower.depth}")
    iso = None
    for lvl in (level, level + 1):
        c = group_function_coalgebra(tower.level(lvl), fld) if lvl <= tower.depth else None
        if c is None:
            break
        ctr_space, ctr_proj = contratensor_projection(level_comodule(tower, lvl, n, c),
                                                      level_contramodule(tower, lvl, p, c))
        dims[lvl] = ctr_space.dim
        if lvl == level:
            coords = solve_matrix(fld, mt_proj.matrix.T.copy(), ctr_proj.matrix.T.copy()) \
                if mt_space.dim else fld.zeros(0, ctr_space.dim)
            if coords is None:
                return CheckResult.fail('comparison map', reason='contratensor relations not implied by k[t]-linearity')
            iso = LinMap(mt_space, ctr_space, coords.T.copy())
    if len(set(dims.values())) > 1:
        return CheckResult.fail('stabilization', dims=dims)
    if iso.shape[0] != iso.shape[1] or (iso.shape[0] and row_reduce(fld, iso.matrix).rank != iso.shape[0]):
        return CheckResult.fail('isomorphism', module_tensor_dim=mt_space.dim, contratensor_dim=dims[level])
    return CheckResult.ok(dim=mt_space.dim, level=level, levels=sorted(dims))


def coinvariants_dim(n: TorsionModule) -> int:
    """dim N / N I"""
    return n.dim - (row_reduce(n.field, np.hstack(n.ops)).rank if n.dim else 0)


def nakayama_check(p: PCModule) -> CheckResult:
    """P / P+ is nonzero for nonzero finitely generated P"""
    fld = p.field
    if p.variables == 2:
        m = p.torsion_module()
        if m.dim == 0:
            raise PreconditionError(f"{p.name} is zero")
        top = m.dim - m.power_image(1).shape[1]
        return CheckResult.ok(quotient_dim=top) if top > 0 else CheckResult.fail('nakayama', quotient_dim=0)
    form = p.smith()
    if form.minimal_generators == 0:
        raise PreconditionError(f"{p.name} is zero")
    const = p.constant_matrix()
    r = row_reduce(fld, const).rank if const.size else 0
    top = p.generators - r
    if top != form.minimal_generators:
        return CheckResult.fail('minimal generators', quotient_dim=top, smith_generators=form.minimal_generators)
    if form.is_finite_length:
        m = p.torsion_module()
        if m.dim - m.power_image(1).shape[1] != top:
            return CheckResult.fail('finite length quotient', quotient_dim=top)
    if top == 0:
        return CheckResult.fail('nakayama', quotient_dim=0)
    return CheckResult.ok(quotient_dim=top)


@dataclass
class ArtinReesResult:
    m: int
    depth: int
    certificates: List[Dict[str, int]] = field(default_factory=list)
    beyond_depth: str = 'asserted'

    def to_dict(self) -> Dict[str, Any]:
        return {'m': self.m, 'depth': self.depth, 'certificates': self.certificates,
                'beyond_depth': self.beyond_depth}


def artin_rees_search(m: TorsionModule, sub: np.ndarray, depth: int, max_m: int) -> ArtinReesResult:
    """Least m with N cap t^{n+m} M = t^n (N cap t^m M) for 0 <= n <= depth, on a finite-length M"""
    fld = m.field
    powers = [m.power_image(j) for j in range(depth + max_m + 1)]
    for k in range(max_m + 1):
        base = intersect(fld, sub, powers[k]) if powers[k].shape[1] else fld.zeros(m.dim, 0)
        certificates = []
        ok = True
        for n in range(depth + 1):
            lhs = intersect(fld, sub, powers[n + k]) if powers[n + k].shape[1] else fld.zeros(m.dim, 0)
            rhs = base
            for _ in range(n):
                if rhs.shape[1] == 0:
                    break
                rhs = subspace_basis(fld, np.hstack([fld.matmul(a, rhs) for a in m.ops]))
            certificates.append({'n': n, 'lhs_dim': lhs.shape[1], 'rhs_dim': rhs.shape[1]})
            if not subspaces_equal(fld, lhs, rhs):
                ok = False
                break
        if ok:
            return ArtinReesResult(k, depth, certificates)
    raise EngineError(f"no Artin-Rees number up to {max_m}")


def artin_rees_number(module: PCModule, generators: Sequence[Sequence[Sequence[int]]], depth: int,
                      max_m: Optional[int] = None) -> ArtinReesResult:
    """Submodule N of M given by generators in (k[[t]])^g, each a list of g coefficient lists"""
    if module.variables != 1:
        raise PreconditionError("Artin-Rees search is exact in one variable only")
    if depth < 1:
        raise EngineError(f"depth must be at least 1, got {depth}")
    fld = module.field
    gen_degree = max((len(c) - 1 for gen in generators for c in gen), default=0)
    bound = module.precision() + gen_degree
    max_m = max_m if max_m is not None else depth + bound
    level = depth + max_m + bound + 1
    truncated, proj = module.truncation(level)
    cols = []
    for gen in generators:
        vec = fld.zeros(module.generators * level, 1)
        for i, coeffs in enumerate(gen):
            for k, a in enumerate(coeffs[:level]):
                vec[i * level + k, 0] = fld.scalar(a)
        cols.append(fld.matmul(proj, vec))
    if not cols:
        return ArtinReesResult(0, depth, [{'n': n, 'lhs_dim': 0, 'rhs_dim': 0} for n in range(depth + 1)])
    _, sub = truncated.submodule(np.hstack(cols))
    return artin_rees_search(truncated, sub, depth, max_m)


@dataclass
class ExtensionResult:
    map: np.ndarray
    vanishing_power: int
    artin_rees: int
    level: int

    def to_dict(self) -> Dict[str, Any]:
        return {'vanishing_power': self.vanishing_power, 'artin_rees': self.artin_rees, 'level': self.level}


def injective_extension(j: TorsionModule, m: TorsionModule, sub: np.ndarray, f: np.ndarray,
                        depth: int = 6) -> ExtensionResult:
    """Extend a module map f: N -> J (N = col(sub) in M, f in the coordinates of sub) to g: M -> J"""
    fld = m.field
    n_rep = m.rep.restrict(sub) if sub.shape[1] else None
    if n_rep is not None:
        for a, b in zip(n_rep.ops, j.ops):
            if not fld.is_zero(fld.sub(fld.matmul(b, f), fld.matmul(f, a))):
                raise PreconditionError("f is not a module map")
    if sub.shape[1] == 0 or fld.is_zero(f):
        return ExtensionResult(fld.zeros(j.dim, m.dim), 0, 0, 0)
    # f vanishes on N I^n
    n0 = 0
    images = [f]
    while not all(fld.is_zero(x) for x in images):
        images = [fld.matmul(x, a) for x in images for a in n_rep.ops]
        n0 += 1
    ar = artin_rees_search(m, sub, depth, m.nilpotency_index() + 1)
    q = n0 + ar.m
    bar, proj = m.quotient(m.power_image(q), f"{m.name}/I^{q}")
    homs = intertwiners(fld, bar.ops, j.ops, bar.dim, j.dim)
    restricted = fld.matmul(proj, sub)
    columns = [fld.matmul(homs[:, k].reshape(j.dim, bar.dim), restricted).reshape(-1, 1)
               for k in range(homs.shape[1])]
    if not columns:
        raise EngineError("no module maps out of the truncation")
    coeffs = solve_matrix(fld, np.hstack(columns), f.reshape(-1, 1))
    if coeffs is None:
        raise EngineError(f"{j.name} admits no extension of f")
    g_bar = fld.zeros(j.dim, bar.dim)
    for k in range(homs.shape[1]):
        if coeffs[k, 0] != 0:
            g_bar = fld.add(g_bar, fld.scale(coeffs[k, 0], homs[:, k].reshape(j.dim, bar.dim)))
    g = fld.matmul(g_bar, proj)
    if not fld.is_zero(fld.sub(fld.matmul(g, sub), f)):
        raise EngineError("extension does not restrict to f")
    return ExtensionResult(g, n0, ar.m, q)


def flatness_comparison(module: PCModule, x_size: int, depth: int,
                        sequence: Optional[Tuple[TorsionModule, TorsionModule, TorsionModule,
                                                 np.ndarray, np.ndarray]] = None,
                        generator_map: Optional[np.ndarray] = None) -> CheckResult:
    """
    (M (x) R[[X]]) / I^n -> (M / I^n)[X] at each level n <= depth, X finite.

    The map is induced by generator_map on R^(g X), x-major, the identity by
    default; it must descend to the quotients, commute with t and be bijective.
    """
    fld = module.field
    g, r = module.generators, module.relation_count
    if generator_map is None:
        generator_map = fld.identity(g * x_size)
    if generator_map.shape != (g * x_size, g * x_size):
        raise DimensionMismatch(f"generator map of shape {generator_map.shape}, expected {(g * x_size,) * 2}")
    levels = []
    for n in range(1, depth + 1):
        ring = TruncatedSeriesRing(fld, n)
        single = module.matrix(ring)
        block = np.empty((g * x_size, r * x_size, n), dtype=fld.dtype)
        for i in range(g * x_size):
            for k in range(r * x_size):
                block[i, k] = single[i % g, k % r] if i // g == k // r else ring.zero()
        lhs, lhs_proj = presentation_quotient(ring, block)
        rhs_one, rhs_proj = presentation_quotient(ring, single)
        rhs_t = _block_operator(fld, [rhs_one.t] * x_size)
        on_ambient = fld.matmul(fld.kron(fld.identity(x_size), rhs_proj), fld.kron(generator_map, fld.identity(n)))
        comparison = _induced(fld, lhs_proj, on_ambient)
        levels.append({'level': n, 'lhs_dim': lhs.dim, 'rhs_dim': rhs_t.shape[0]})
        if comparison is None:
            return CheckResult.fail('flat comparison descends', level=n)
        if not fld.is_zero(fld.sub(fld.matmul(rhs_t, comparison), fld.matmul(comparison, lhs.t))):
            return CheckResult.fail('flat comparison t-linear', level=n)
        if not is_iso(LinMap(lhs.space, VecSpace.standard(fld, rhs_t.shape[0], 'x'), comparison)):
            return CheckResult.fail('flat comparison isomorphism', level=n, lhs_dim=lhs.dim,
                                    rhs_dim=rhs_t.shape[0], rank=row_reduce(fld, comparison).rank)
    if sequence is not None:
        verdict = tor_vanishing(sequence, x_size, depth)
        if not verdict:
            return verdict
    return CheckResult.ok(levels=levels)


def tor_vanishing(sequence, x_size: int, depth: int) -> CheckResult:
    """0 -> A -> B -> C -> 0 stays exact after (x) R[[X]] in the limit over truncations.

    Exactness is checked at the first two levels that kill all three modules;
    the limit is constant from there on.
    """
    a, b, c, f, g = sequence
    fld = b.field
    if not fld.is_zero(fld.matmul(g, f)):
        raise PreconditionError("supplied maps do not compose to zero")
    start = max(1, a.nilpotency_index(), b.nilpotency_index(), c.nilpotency_index())
    levels = []
    for n in (start, start + 1):
        _, pa = a.quotient(a.power_image(n))
        _, pb = b.quotient(b.power_image(n))
        _, pc = c.quotient(c.power_image(n))
        f_bar = _induced(fld, pa, fld.matmul(pb, f))
        g_bar = _induced(fld, pb, fld.matmul(pc, g))
        if f_bar is None or g_bar is None:
            return CheckResult.fail('truncation', level=n)
        eye = fld.identity(x_size)
        big_f = fld.kron(eye, f_bar)
        big_g = fld.kron(eye, g_bar)
        rank_f = row_reduce(fld, big_f).rank if big_f.size else 0
        rank_g = row_reduce(fld, big_g).rank if big_g.size else 0
        kernel_g = big_g.shape[1] - rank_g
        if rank_f != big_f.shape[1]:
            return CheckResult.fail('tor vanishing', level=n, kernel_f=big_f.shape[1] - rank_f)
        if rank_g != big_g.shape[0] or kernel_g != rank_f:
            return CheckResult.fail('exactness', level=n, image_f=rank_f, kernel_g=kernel_g)
        levels.append(n)
    return CheckResult.ok(levels=levels, depth=depth)


def _induced(fld: Field, proj: np.ndarray, g: np.ndarray) -> Optional[np.ndarray]:
    if proj.shape[0] == 0:
        return fld.zeros(g.shape[0], 0)
    coords = solve_matrix(fld, proj.T.copy(), g.T.copy())
    return None if coords is None else coords.T.copy()


def _hilbert_function(orders: Sequence[int]) -> List[int]:
    """Coefficients of the product of (1 + x + ... + x^{q-1})"""
    coeffs = [1]
    for q in orders:
        out = [0] * (len(coeffs) + q - 1)
        for i, a in enumerate(coeffs):
            for j in range(q):
                out[i + j] += a
        coeffs = out
    return coeffs


def _ideal_powers(tower: GroupTower, n: int, fld: Field):
    group = tower.level(n)
    alg = group_algebra(group, fld)
    e = group.identity
    gens = []
    for x in range(group.order):
        if x != e:
            vec = fld.zeros(group.order, 1)
            vec[x, 0] = fld.scalar(1)
            vec[e, 0] = fld.sub(vec[e, 0], fld.scalar(1))
            gens.append(vec)
    ideal = subspace_basis(fld, np.hstack(gens)) if gens else fld.zeros(group.order, 0)
    powers = [fld.identity(group.order), ideal]
    while powers[-1].shape[1]:
        prev = powers[-1]
        products = [alg.product(prev[:, i], ideal[:, j]).reshape(-1, 1)
                    for i in range(prev.shape[1]) for j in range(ideal.shape[1])]
        powers.append(subspace_basis(fld, np.hstack(products)))
    return alg, powers


def graded_ring_check(tower: GroupTower, n: int, fld: Field) -> CheckResult:
    """gr_I k[H/U_n] is k[s_1..s_r] / (s_i^{q_i}) with r = dim I/I^2"""
    _require_characteristic(fld, tower)
    alg, powers = _ideal_powers(tower, n, fld)
    graded = [powers[j].shape[1] - powers[j + 1].shape[1] for j in range(len(powers) - 1)]
    generators = graded[1] if len(graded) > 1 else 0
    expected = _hilbert_function(tower.cyclic_orders(n))
    if generators != tower.level(n).minimal_generator_count():
        return CheckResult.fail('generator count', generators=generators)
    if graded != expected:
        return CheckResult.fail('hilbert function', graded_dims=graded, expected=expected)
    group = tower.level(n)
    e = group.identity
    xs = []
    for g in tower.generators(n):
        vec = fld.zeros(group.order, 1)
        vec[g, 0] = fld.scalar(1)
        vec[e, 0] = fld.sub(vec[e, 0], fld.scalar(1))
        xs.append(vec.reshape(-1))
    for a in range(len(xs)):
        for b in range(len(xs)):
            if not fld.is_zero(fld.sub(alg.product(xs[a], xs[b]), alg.product(xs[b], xs[a]))):
                return CheckResult.fail('commutativity', pair=[a, b])
    monomials = [fld.matrix([1 if x == e else 0 for x in range(group.order)])]
    for j in range(1, len(powers) - 1):
        monomials = [alg.product(m, x) for m in monomials for x in xs]
        span = np.hstack([np.stack(monomials, axis=1), powers[j + 1]])
        if not subspaces_equal(fld, subspace_basis(fld, span), powers[j]):
            return CheckResult.fail('generation', degree=j)
        monomials = [m for m in _independent(fld, monomials)]
    return CheckResult.ok(graded_dims=graded, generators=generators, nilpotency=len(powers) - 1)


def _independent(fld: Field, vectors: List[np.ndarray]) -> List[np.ndarray]:
    stacked = np.stack(vectors, axis=1)
    pivots = row_reduce(fld, stacked).pivots
    return [vectors[i] for i in pivots]


def openness_certificate(tower: GroupTower, fld: Field) -> List[Dict[str, Any]]:
    """Per level: dims of I^j and the least m with I^m = 0"""
    out = []
    for n in range(1, tower.depth + 1):
        _, powers = _ideal_powers(tower, n, fld)
        dims = [p.shape[1] for p in powers]
        out.append({'level': n, 'ideal_power_dims': dims, 'nilpotency': len(powers) - 1})
    return out


def ext_r(p: PCModule, q: TorsionModule) -> Dict[int, int]:
    """dim Ext^i_R(P, Q) from the Smith resolution 0 -> R^r -> R^g -> P -> 0"""
    form = p.smith()
    fld = q.field
    hom = form.free_rank * q.dim
    ext1 = 0
    for e in form.exponents:
        power = q.evaluate(fld.matrix([0] * e + [1]))
        r = row_reduce(fld, power).rank if q.dim else 0
        hom += q.dim - r
        ext1 += q.dim - r
    return {0: hom, 1: ext1}


def tor_r(p: PCModule, q: TorsionModule) -> Dict[int, int]:
    form = p.smith()
    fld = q.field
    tor0 = form.free_rank * q.dim
    tor1 = 0
    for e in form.exponents:
        power = q.evaluate(fld.matrix([0] * e + [1]))
        r = row_reduce(fld, power).rank if q.dim else 0
        tor0 += q.dim - r
        tor1 += q.dim - r
    return {0: tor0, 1: tor1}


@dataclass
class UnboundedSummand:
    """rank copies of the divisible comodule C = colim C_n, or of R = lim C_n, with the per-level certificate"""
    kind: str
    rank: int
    levels: List[Dict[str, int]] = field(default_factory=list)

    @property
    def symbol(self) -> str:
        return 'C' if self.kind == 'divisible' else 'R'

    def describe(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'rank': self.rank, 'levels': self.levels}


@dataclass
class IwasawaResult:
    """Stabilized homology with its module structure; level complexes kept for the report"""
    complex: Complex
    homology: Dict[int, TorsionModule]
    level: int
    depth: int
    level_complex: Complex
    unbounded: Dict[int, UnboundedSummand] = field(default_factory=dict)
    sources: Dict[int, Complex] = field(default_factory=dict)
    bases: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def divisible_rank(self) -> int:
        return sum(u.rank for u in self.unbounded.values() if u.kind == 'divisible')

    def support(self) -> List[int]:
        return sorted({i for i, m in self.homology.items() if m.dim} | set(self.unbounded))

    def homology_dims(self) -> Dict[int, Any]:
        """Finite dims as ints; a degree holding C^r or R^r reads 'C^1', or 'C^1 + 2' with a finite part"""
        out: Dict[int, Any] = {}
        for i in self.support():
            finite = self.homology[i].dim if i in self.homology else 0
            if i not in self.unbounded:
                out[i] = finite
                continue
            part = self.unbounded[i]
            label = f"{part.symbol}^{part.rank}"
            out[i] = f"{label} + {finite}" if finite else label
        return out

    def transport(self, degree: int, operator: np.ndarray) -> np.ndarray:
        """An operator on the level term in this degree, induced on the stabilized homology"""
        module = self.homology[degree]
        fld = module.field
        if module.dim == 0:
            return fld.zeros(0, 0)
        cx = self.sources[degree]
        data = homology_data(cx, degree)
        basis = self.bases[degree]
        moved = fld.matmul(operator, fld.matmul(data.representatives, basis))
        coords = solve_matrix(fld, basis, data.coordinates(fld, moved))
        if coords is None:
            raise EngineError(f"operator does not preserve the stabilized H^{degree}")
        return coords

    def to_dict(self) -> Dict[str, Any]:
        homology = {}
        for i in self.support():
            entry = self.homology[i].describe() if i in self.homology and self.homology[i].dim else {'dim': 0}
            if i in self.unbounded:
                entry['unbounded'] = self.unbounded[i].describe()
            homology[str(i)] = entry
        return {'stabilized_at': self.level, 'depth': self.depth, 'homology': homology,
                'divisible_rank': self.divisible_rank}


def _homology_module(cx: Complex, degree: int, endo: ChainMap, basis: Optional[np.ndarray] = None) -> TorsionModule:
    """t on H^degree, restricted to col(basis) when given"""
    fld = cx.field
    t = induced_on_homology(endo, degree).matrix
    dim = t.shape[0]
    if basis is not None:
        if basis.shape[1] == 0:
            return TorsionModule.zero(fld)
        coords = solve_matrix(fld, basis, fld.matmul(t, basis))
        return TorsionModule(fld, (coords,), basis.shape[1], f"H{degree}")
    return TorsionModule(fld, (t,), dim, f"H{degree}")


def _block_operator(fld: Field, blocks: Sequence[np.ndarray]) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = fld.zeros(n, n)
    offset = 0
    for b in blocks:
        out[offset:offset + b.shape[0], offset:offset + b.shape[0]] = b
        offset += b.shape[0]
    return out


def _power(fld: Field, a: np.ndarray, k: int) -> np.ndarray:
    result = fld.identity(a.shape[0])
    for _ in range(k):
        result = fld.matmul(a, result)
    return result


def _stable_images(fld: Field, complexes: Dict[int, Complex], transitions: Dict[int, ChainMap], degree: int,
                   depth: int, colimit: bool):
    """Images of H(L_n) in H(L_D) for a colimit, of H(K_D) in H(K_n) for a limit, and the first stable n"""
    images = {}
    for n in range(1, depth + 1):
        if colimit:
            acc = fld.identity(homology_data(complexes[n], degree).space.dim)
            for k in range(n, depth):
                acc = fld.matmul(induced_on_homology(transitions[k], degree).matrix, acc)
        else:
            acc = fld.identity(homology_data(complexes[depth], degree).space.dim)
            for k in range(depth - 1, n - 1, -1):
                acc = fld.matmul(induced_on_homology(transitions[k], degree).matrix, acc)
        images[n] = subspace_basis(fld, acc) if acc.shape[1] else acc
    if colimit:
        stable = next((n for n in range(1, depth - 1) if subspaces_equal(fld, images[n], images[n + 1])), None)
    else:
        # J_{n+1} -> J_n is onto, so equal dimensions mean an isomorphism
        stable = next((n for n in range(1, depth - 1) if images[n + 1].shape[1] == images[n].shape[1]), None)
    if stable is None:
        kind = 'colimit' if colimit else 'limit'
        raise StabilizationError(f"{kind} of H^{degree} does not stabilize", depth)
    return stable, images[stable]


def lphi_iwasawa(p: PCModule, prime: int, depth: int) -> IwasawaResult:
    """Phi applied to 0 -> R^r -> R^g -> P -> 0, colimit over C_n = k[t]/t^{p^n}"""
    fld = p.field
    if depth < 3:
        raise StabilizationError("stabilization needs at least three levels", depth)
    form = p.smith()
    # torsion summands stabilize; the free ones give C_n^f at level n and are certified separately
    r = len(form.exponents)
    complexes = {}
    shifts = {}
    for n in range(1, depth + 1):
        complexes[n] = _level_complex(fld, form.exponents, 0, prime ** n)
        shifts[n] = TorsionModule.from_exponents(fld, [prime ** n]).t
    # C_n -> C_{n+1} is multiplication by t^{q' - q}
    transitions = {}
    for n in range(1, depth):
        q, q_next = prime ** n, prime ** (n + 1)
        incl = fld.zeros(q_next, q)
        for k in range(q):
            incl[k + q_next - q, k] = fld.scalar(1)
        block = fld.kron(fld.identity(r), incl)
        components = {i: LinMap(complexes[n].space(i), complexes[n + 1].space(i), block) for i in (-1, 0)}
        transitions[n] = ChainMap(complexes[n], complexes[n + 1], components)
    top = complexes[depth]
    endo = _endomorphism(top, {-1: [shifts[depth]] * r, 0: [shifts[depth]] * r})
    homology, sources, bases = {}, {}, {}
    level = 0
    for degree in (-1, 0):
        stable, basis = _stable_images(fld, complexes, transitions, degree, depth, colimit=True)
        level = max(level, stable)
        homology[degree] = _homology_module(top, degree, endo, basis)
        sources[degree], bases[degree] = top, basis
    unbounded = {}
    if form.free_rank:
        unbounded[0] = UnboundedSummand('divisible', form.free_rank,
                                        _divisible_levels(fld, prime, depth, form.free_rank))
    level_complex = _level_complex(fld, form.exponents, form.free_rank, prime ** level)
    return IwasawaResult(_homology_complex(fld, homology), homology, level, depth, level_complex,
                         unbounded, sources, bases)


def _level_complex(fld: Field, exponents: Sequence[int], free_rank: int, q: int) -> Complex:
    """[C_q^r --diag(t^e)--> C_q^(f + r)] in degrees -1, 0; the f free generators come first"""
    r = len(exponents)
    g = free_rank + r
    t = TorsionModule.from_exponents(fld, [q]).t
    source = VecSpace.standard(fld, r * q, 'c')
    target = VecSpace.standard(fld, g * q, 'c')
    d = fld.zeros(g * q, r * q)
    for i, e in enumerate(exponents):
        row = free_rank + i
        d[row * q:(row + 1) * q, i * q:(i + 1) * q] = _power(fld, t, e)
    return Complex(fld, {-1: source, 0: target}, {-1: LinMap(source, target, d)})


def _divisible_levels(fld: Field, prime: int, depth: int, rank: int) -> List[Dict[str, int]]:
    """C_n -> C_{n+1} is t-linear, injective and lands in t C_{n+1}, so the colimit of C_n^rank is divisible"""
    levels = []
    for n in range(1, depth):
        q, q_next = prime ** n, prime ** (n + 1)
        t = TorsionModule.from_exponents(fld, [q]).t
        t_next = TorsionModule.from_exponents(fld, [q_next]).t
        incl = _power(fld, t_next, q_next - q)[:, :q].copy()
        if row_reduce(fld, incl).rank != q:
            raise EngineError(f"C_{n} -> C_{n + 1} is not injective")
        if not fld.is_zero(fld.sub(fld.matmul(t_next, incl), fld.matmul(incl, t))):
            raise EngineError(f"C_{n} -> C_{n + 1} does not commute with t")
        if solve_matrix(fld, t_next, incl) is None:
            raise EngineError(f"the image of C_{n} is not divisible by t in C_{n + 1}")
        levels.append({'level': n, 'dim': rank * q})
    return levels


def _free_levels(fld: Field, prime: int, depth: int, rank: int) -> List[Dict[str, int]]:
    """Hom_{k[t]}(C_n, C_depth) is C_n and restriction along C_n -> C_{n+1} is onto, so the limit is R^rank"""
    q_top = prime ** depth
    t_top = TorsionModule.from_exponents(fld, [q_top]).t
    homs = {}
    for n in range(1, depth + 1):
        q = prime ** n
        t = TorsionModule.from_exponents(fld, [q]).t
        # a map out of the cyclic C_n is fixed by the image of its generator, which lies in ker t^q
        maps = [_power(fld, t_top, q_top - q + j)[:, :q].copy() for j in range(q)]
        for f in maps:
            if not fld.is_zero(fld.sub(fld.matmul(t_top, f), fld.matmul(f, t))):
                raise EngineError(f"Hom(C_{n}, C_{depth}) contains a map that is not t-linear")
        homs[n] = np.hstack([f.reshape(-1, 1) for f in maps])
        if row_reduce(fld, homs[n]).rank != q:
            raise EngineError(f"Hom(C_{n}, C_{depth}) has dimension below {q}")
    levels = []
    for n in range(1, depth):
        q, q_next = prime ** n, prime ** (n + 1)
        t_next = TorsionModule.from_exponents(fld, [q_next]).t
        incl = _power(fld, t_next, q_next - q)[:, :q].copy()
        restricted = np.hstack([fld.matmul(homs[n + 1][:, k].reshape(q_top, q_next), incl).reshape(-1, 1)
                                for k in range(q_next)])
        if solve_matrix(fld, restricted, homs[n]) is None:
            raise EngineError(f"restriction Hom(C_{n + 1}, C_{depth}) -> Hom(C_{n}, C_{depth}) is not onto")
        levels.append({'level': n, 'dim': rank * q})
    return levels


def _two_term_tower(m: TorsionModule, prime: int, depth: int, degree: int, colimit: bool) -> IwasawaResult:
    """[M --t^{p^n}--> M] in degrees (degree, degree + 1) with its transition maps"""
    fld = m.field
    if m.variables != 1:
        raise PreconditionError("towers over k[[t]] need a module in one variable")
    if depth < 3:
        raise StabilizationError("stabilization needs at least three levels", depth)
    space = m.space
    complexes = {n: Complex(fld, {degree: space, degree + 1: space},
                            {degree: LinMap(space, space, _power(fld, m.t, prime ** n))})
                 for n in range(1, depth + 1)}
    transitions = {}
    for n in range(1, depth):
        stretch = LinMap(space, space, _power(fld, m.t, prime ** (n + 1) - prime ** n))
        if colimit:
            transitions[n] = ChainMap(complexes[n], complexes[n + 1],
                                      {degree: LinMap.identity(space), degree + 1: stretch})
        else:
            transitions[n] = ChainMap(complexes[n + 1], complexes[n],
                                      {degree: stretch, degree + 1: LinMap.identity(space)})
    homology, sources, bases = {}, {}, {}
    level = 0
    for i in (degree, degree + 1):
        stable, basis = _stable_images(fld, complexes, transitions, i, depth, colimit)
        level = max(level, stable)
        source = complexes[depth] if colimit else complexes[stable]
        endo = _endomorphism(source, {degree: [m.t], degree + 1: [m.t]})
        homology[i] = _homology_module(source, i, endo, basis)
        sources[i], bases[i] = source, basis
    return IwasawaResult(_homology_complex(fld, homology), homology, level, depth, complexes[level],
                         {}, sources, bases)


def rpsi_iwasawa(m: TorsionModule, prime: int, depth: int) -> IwasawaResult:
    """Limit over n of [M --t^{p^n}--> M] in degrees 0, 1"""
    return _two_term_tower(m, prime, depth, 0, colimit=False)


def lphi_torsion(m: TorsionModule, prime: int, depth: int) -> IwasawaResult:
    """Colimit over n of C_n (x)^L M = [M --t^{p^n}--> M] in degrees -1, 0, for finite-length M"""
    return _two_term_tower(m, prime, depth, -1, colimit=True)


def _endomorphism(cx: Complex, blocks: Dict[int, List[np.ndarray]]) -> ChainMap:
    fld = cx.field
    comps = {i: LinMap(cx.space(i), cx.space(i), _block_operator(fld, blocks[i]))
             for i in cx.degrees() if i in blocks}
    return ChainMap(cx, cx, comps)


def _homology_complex(fld: Field, homology: Dict[int, TorsionModule]) -> Complex:
    return Complex(fld, {i: h.space for i, h in homology.items()}, {}, {i: h for i, h in homology.items()},
                   'k[[t]]-module')


def iwasawa_round_trip(obj, prime: int, depth: int) -> CheckResult:
    """R Psi L Phi (P) and L Phi R Psi (M) against the input placed in degree 0"""
    fld = obj.field
    if isinstance(obj, PCModule):
        start, free_rank = obj.torsion_part(), obj.smith().free_rank
        first = lphi_iwasawa(obj, prime, depth)
        second = {i: rpsi_iwasawa(h, prime, depth) for i, h in first.homology.items() if h.dim}
    else:
        start, free_rank = obj, 0
        first = rpsi_iwasawa(obj, prime, depth)
        second = {i: lphi_iwasawa(pcmodule_from_torsion(h), prime, depth)
                  for i, h in first.homology.items() if h.dim}
    landed: Dict[int, List[TorsionModule]] = {}
    landed_free: Dict[int, int] = {}
    for i, result in second.items():
        for j, h in result.homology.items():
            if h.dim:
                landed.setdefault(i + j, []).append(h)
        for j, part in result.unbounded.items():
            landed_free[i + j] = landed_free.get(i + j, 0) + part.rank
    # R Psi(C) = R in degree 0: C is injective and Psi(C) = lim Hom(C_n, C)
    for i, part in first.unbounded.items():
        _free_levels(fld, prime, depth, part.rank)
        landed_free[i] = landed_free.get(i, 0) + part.rank
    degrees = sorted(set(landed) | set(landed_free))
    if start.dim == 0 and free_rank == 0:
        return CheckResult.ok(degrees=[]) if not degrees else CheckResult.fail('round trip', degrees=degrees)
    if degrees != [0]:
        return CheckResult.fail('round trip', degrees=degrees)
    if landed_free.get(0, 0) != free_rank:
        return CheckResult.fail('round trip free rank', expected=free_rank, got=landed_free.get(0, 0))
    result_module = TorsionModule.zero(fld)
    for piece in landed.get(0, []):
        result_module = result_module.direct_sum(piece)
    if not result_module.is_isomorphic(start):
        return CheckResult.fail('round trip module', expected=start.exponents(), got=result_module.exponents())
    return CheckResult.ok(exponents=start.exponents(), free_rank=free_rank)


def lphi_euler_characteristic(p: PCModule, prime: int, level: int) -> int:
    """Euler characteristic of the level complex [C_n^r -> C_n^g]"""
    form = p.smith()
    q = prime ** level
    return (form.free_rank + len(form.exponents)) * q - len(form.exponents) * q
