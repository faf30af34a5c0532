"""
Smooth G-modules and G-contramodules for G = H x|_phi Z over a built-in tower H.

Objects are graded by gamma-degree. A window object has pieces M_m for m in
[lo, hi] and gamma: M_m -> M_{m+1}; it models a truncation of S = k(G) or of
the twisted Laurent algebra T at a fixed tower level. A closed object is a
finite-length G-module: one piece with gamma acting on it. The twist enters
only through gamma (1 + t_v) gamma^{-1} = (1 + t_v)^u_v with phi(g_v) = u_v g_v.

Finite groups go through the sandbox; psi_G, phi_G and the checks below
dispatch on the object type.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, List, Optional, Tuple, Union

import numpy as np

from src.algebra.coalg import group_algebra, group_function_coalgebra
from src.algebra.comod import LEFT, is_injective_comodule
from src.algebra.contramod import contratensor_maps, is_projective_contramodule
from src.algebra.corr import CorrespondencePair, derived_phi, derived_psi, derived_round_trip, descend
from src.algebra.errors import AxiomViolation, CheckResult, EngineError, PreconditionError
from src.algebra.exactlin import Field, LinMap, VecSpace, row_reduce, solve_matrix, subspace_contains
from src.algebra.homcx import Complex
from src.algebra.reps import OperatorRep, find_isomorphism
from src.smooth.sandbox import (SandboxModule, sandbox_contratensor_comparison, sandbox_equivalence, sandbox_flags,
                                sandbox_phi, sandbox_psi)
from src.towers.powerseries import TorsionModule, TruncatedSeriesRing
from src.towers.protower import (GroupTower, PCModule, level_comodule, level_contramodule, level_for, level_module,
                                 lphi_torsion, rpsi_iwasawa, tor_r)

logger = logging.getLogger(__name__)

ORIENTATION = 'x g^{-1}'


@dataclass(frozen=True)
class Window:
    """gamma-degrees lo..hi touched by a computation"""
    lo: int = 0
    hi: int = 0

    def __post_init__(self):
        if self.hi < self.lo:
            raise EngineError(f"empty window [{self.lo}, {self.hi}]")

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def contains(self, m: int) -> bool:
        return self.lo <= m <= self.hi

    def __add__(self, other: 'Window') -> 'Window':
        """Degrees of products: multiplication adds degrees"""
        return Window(self.lo + other.lo, self.hi + other.hi)

    def cover(self, other: 'Window') -> 'Window':
        return Window(min(self.lo, other.lo), max(self.hi, other.hi))

    def to_dict(self) -> Dict[str, int]:
        return {'lo': self.lo, 'hi': self.hi}


def _matrix_power(fld: Field, a: np.ndarray, k: int) -> np.ndarray:
    result = fld.identity(a.shape[0])
    for _ in range(k):
        result = fld.matmul(a, result)
    return result


def _unipotent(fld: Field, t: np.ndarray) -> np.ndarray:
    return fld.add(fld.identity(t.shape[0]), t)


@dataclass(frozen=True, eq=False)
class SemidirectGroup:
    """G = H x|_phi Z with gamma the generator of Z acting on H through the tower twist"""
    tower: GroupTower
    window: Window = Window(-2, 2)

    @property
    def name(self) -> str:
        return f"{self.tower.name} {'x' if self.is_direct_product else 'x|'} Z"

    @property
    def prime(self) -> int:
        return self.tower.prime

    @property
    def is_direct_product(self) -> bool:
        return self.tower.twist_name == 'identity'

    def twist(self, n: int) -> Tuple[int, ...]:
        if self.tower.twist is None:
            return tuple(range(self.tower.level(n).order))
        return self.tower.twist[n]

    def twist_power(self, n: int, k: int) -> Tuple[int, ...]:
        step = list(self.twist(n))
        if k < 0:
            inverse = [0] * len(step)
            for x, y in enumerate(step):
                inverse[y] = x
            step = inverse
        perm = list(range(len(step)))
        for _ in range(abs(k)):
            perm = [step[x] for x in perm]
        return tuple(perm)

    def multiply(self, n: int, a: Tuple[int, int], b: Tuple[int, int]) -> Tuple[int, int]:
        """(h, m)(h', m') = (h phi^m(h'), m + m') in H/U_n x| Z"""
        level = self.tower.level(n)
        return level.mul(a[0], self.twist_power(n, a[1])[b[0]]), a[1] + b[1]

    def inverse(self, n: int, a: Tuple[int, int]) -> Tuple[int, int]:
        level = self.tower.level(n)
        return self.twist_power(n, -a[1])[level.inverse(a[0])], -a[1]

    def exponents(self, n: int) -> List[int]:
        """u_v with phi(g_v) = u_v g_v for the standard generators at level n"""
        twist = self.twist(n)
        return [self.tower.coordinates(n, twist[g])[v] for v, g in enumerate(self.tower.generators(n))]

    def permutation_matrix(self, n: int, fld: Field) -> np.ndarray:
        """d_x |-> d_{phi(x)} on k(H/U_n), [x] |-> [phi(x)] on k[H/U_n]"""
        twist = self.twist(n)
        mat = fld.zeros(len(twist), len(twist))
        for x, y in enumerate(twist):
            mat[y, x] = fld.scalar(1)
        return mat

    def relation_check(self) -> CheckResult:
        verdict = self.tower.check()
        if not verdict:
            return verdict
        for n in range(1, self.tower.depth + 1):
            level = self.tower.level(n)
            gamma = (level.identity, 1)
            gamma_inv = self.inverse(n, gamma)
            for h in range(level.order):
                conj = self.multiply(n, self.multiply(n, gamma, (h, 0)), gamma_inv)
                if conj != (self.twist(n)[h], 0):
                    return CheckResult.fail('conjugation', level=n, element=level.labels[h])
        return CheckResult.ok(group=self.name, depth=self.tower.depth, twist=self.tower.twist_name)

    def to_dict(self) -> Dict[str, Any]:
        return {'name': self.name, 'tower': self.tower.to_dict(), 'window': self.window.to_dict(),
                'direct_product': self.is_direct_product}


def build_G(tower: GroupTower, window: Optional[Window] = None) -> SemidirectGroup:
    group = SemidirectGroup(tower, window or Window(-2, 2))
    logger.debug(f"built {group.name} with window {group.window.to_dict()}")
    return group


@dataclass(frozen=True, eq=False)
class TAlgebra:
    """k[[t]][gamma^{+-1}] with gamma t gamma^{-1} = phi(t), truncated at t^{p^level} and to a window"""
    group: SemidirectGroup
    field: Field
    level: int
    window: Window

    @property
    def precision(self) -> int:
        return self.group.prime ** self.level

    @property
    def dim(self) -> int:
        return self.precision * self.window.width

    def index(self, i: int, m: int) -> int:
        return (m - self.window.lo) * self.precision + i

    def _shift(self) -> np.ndarray:
        return TorsionModule.from_exponents(self.field, [self.precision]).t

    def twist_matrix(self, k: int) -> np.ndarray:
        """a(t) |-> phi^k(a)(t) on coefficient vectors"""
        if self.group.tower.rank != 1:
            raise PreconditionError("the Laurent truncation is built for one-variable towers")
        fld = self.field
        n = self.precision
        t = self._shift()
        u = self.group.exponents(self.level)[0]
        image_t = fld.sub(_matrix_power(fld, _unipotent(fld, t), pow(u, k, n)), fld.identity(n))
        mat = fld.zeros(n, n)
        column = fld.zeros(n, 1)
        column[0, 0] = fld.scalar(1)
        for i in range(n):
            mat[:, i] = column[:, 0]
            column = fld.matmul(image_t, column)
        return mat

    def _series_matrix(self, coeffs: np.ndarray) -> np.ndarray:
        fld = self.field
        t = self._shift()
        total = fld.zeros(self.precision, self.precision)
        power = fld.identity(self.precision)
        for c in coeffs:
            total = fld.add(total, fld.scale(c, power))
            power = fld.matmul(t, power)
        return total

    def multiply(self, x: np.ndarray, x_window: Window, y: np.ndarray, y_window: Window) -> Tuple[np.ndarray, Window]:
        """(a gamma^m)(b gamma^m') = a phi^m(b) gamma^{m + m'}; the product lives on the sum of the windows"""
        fld = self.field
        n = self.precision
        out_window = x_window + y_window
        out = fld.zeros(n * out_window.width, 1)
        for m in x_window.degrees():
            a = x[(m - x_window.lo) * n:(m - x_window.lo + 1) * n].reshape(-1)
            if fld.is_zero(a):
                continue
            left = self._series_matrix(a)
            twist = self.twist_matrix(m)
            for m2 in y_window.degrees():
                b = y[(m2 - y_window.lo) * n:(m2 - y_window.lo + 1) * n].reshape(-1, 1)
                piece = fld.matmul(left, fld.matmul(twist, b))
                k = m + m2 - out_window.lo
                out[k * n:(k + 1) * n] = fld.add(out[k * n:(k + 1) * n], piece)
        return out.reshape(-1), out_window

    def element(self, terms: Dict[Tuple[int, int], int], window: Window) -> np.ndarray:
        """sum of c t^i gamma^m over {(i, m): c}"""
        fld = self.field
        vec = fld.zeros(self.precision * window.width, 1)
        for (i, m), c in terms.items():
            vec[(m - window.lo) * self.precision + i, 0] = fld.scalar(c)
        return vec.reshape(-1)

    def relation_check(self) -> CheckResult:
        """gamma t gamma^{-1} = phi(t), and t gamma = gamma t exactly when the twist is trivial"""
        fld = self.field
        one_deg, minus_deg, zero_deg = Window(1, 1), Window(-1, -1), Window(0, 0)
        gamma = self.element({(0, 1): 1}, one_deg)
        gamma_inv = self.element({(0, -1): 1}, minus_deg)
        t = self.element({(1, 0): 1}, zero_deg)
        gt, w = self.multiply(gamma, one_deg, t, zero_deg)
        conj, w = self.multiply(gt, w, gamma_inv, minus_deg)
        phi_t = self.twist_matrix(1)[:, 1]
        got = conj[(0 - w.lo) * self.precision:(1 - w.lo) * self.precision]
        if np.any(fld.matrix(got) != fld.matrix(phi_t)):
            return CheckResult.fail('gamma t gamma^-1 = phi(t)', window=w.to_dict())
        tg, _ = self.multiply(t, zero_deg, gamma, one_deg)
        commutes = not np.any(fld.matrix(tg) != fld.matrix(gt))
        if commutes != self.group.is_direct_product:
            return CheckResult.fail('commutativity', commutes=commutes)
        return CheckResult.ok(precision=self.precision, window=self.window.to_dict())

    def regular_module(self) -> 'GContramodule':
        """T on its window: pieces k[[t]]/t^N and gamma acting through phi"""
        fld = self.field
        piece = TorsionModule.from_exponents(fld, [self.precision], 'T')
        twist = self.twist_matrix(1)
        return GContramodule(self.group, tuple(piece for _ in self.window.degrees()),
                             tuple(twist for _ in range(self.window.width - 1)), self.window, self.level, 'T')


@dataclass(frozen=True, eq=False)
class GradedModule:
    """Pieces M_m over the window with gamma: M_m -> M_{m+1}, or one piece with gamma acting on it"""
    group: SemidirectGroup
    components: Tuple[TorsionModule, ...]
    gammas: Tuple[np.ndarray, ...]
    window: Window
    level: int
    name: str = 'M'
    kind: ClassVar[str] = 'graded'

    @property
    def field(self) -> Field:
        return self.components[0].field

    @property
    def closed(self) -> bool:
        return self.window.width == 1 and len(self.gammas) == 1

    @property
    def dim(self) -> int:
        return sum(c.dim for c in self.components)

    def gamma_pairs(self) -> List[Tuple[int, int, np.ndarray]]:
        if self.closed:
            return [(0, 0, self.gammas[0])]
        return [(i, i + 1, g) for i, g in enumerate(self.gammas)]

    def embedding(self, i: int) -> np.ndarray:
        fld = self.field
        offset = sum(c.dim for c in self.components[:i])
        mat = fld.zeros(self.dim, self.components[i].dim)
        for k in range(self.components[i].dim):
            mat[offset + k, k] = fld.scalar(1)
        return mat

    def total_operator(self, v: int) -> np.ndarray:
        fld = self.field
        out = fld.zeros(self.dim, self.dim)
        offset = 0
        for c in self.components:
            out[offset:offset + c.dim, offset:offset + c.dim] = c.ops[v]
            offset += c.dim
        return out

    def check(self) -> CheckResult:
        if len(self.components) != self.window.width:
            return CheckResult.fail('window size', pieces=len(self.components), width=self.window.width)
        if len(self.gammas) not in (self.window.width - 1, 1 if self.window.width == 1 else -1):
            return CheckResult.fail('gamma count', gammas=len(self.gammas), width=self.window.width)
        tower = self.group.tower
        if not 1 <= self.level <= tower.depth:
            return CheckResult.fail('level', level=self.level, depth=tower.depth)
        fld = self.field
        bound = tower.level_order(self.level)
        for m, c in zip(self.window.degrees(), self.components):
            if c.variables != tower.rank:
                return CheckResult.fail('variables', degree=m, variables=c.variables)
            if c.nilpotency_index() > bound:
                return CheckResult.fail('level', degree=m, nilpotency=c.nilpotency_index(), bound=bound)
        exponents = self.group.exponents(self.level)
        for i, j, gamma in self.gamma_pairs():
            src, dst = self.components[i], self.components[j]
            degree = self.window.lo + i
            if gamma.shape != (dst.dim, src.dim) or src.dim != dst.dim or \
                    (src.dim and row_reduce(fld, gamma).rank != src.dim):
                return CheckResult.fail('gamma invertible', degree=degree)
            for v, u in enumerate(exponents):
                lhs = fld.matmul(gamma, _unipotent(fld, src.ops[v]))
                rhs = fld.matmul(_matrix_power(fld, _unipotent(fld, dst.ops[v]), u), gamma)
                if np.any(lhs != rhs):
                    return CheckResult.fail('twist relation', degree=degree, variable=v)
        return CheckResult.ok(dim=self.dim, window=self.window.to_dict())

    def describe(self) -> Dict[str, Any]:
        return {'name': self.name, 'kind': self.kind, 'window': self.window.to_dict(), 'level': self.level,
                'closed': self.closed, 'pieces': [c.describe() for c in self.components]}


@dataclass(frozen=True, eq=False)
class SmoothGModule(GradedModule):
    kind: ClassVar[str] = 'smooth'


@dataclass(frozen=True, eq=False)
class GContramodule(GradedModule):
    """A G-contramodule; a free finitely generated one keeps its presentation instead of pieces"""
    presentation: Optional[PCModule] = None
    kind: ClassVar[str] = 'contra'

    @property
    def field(self) -> Field:
        if self.presentation is not None:
            return self.presentation.field
        return self.components[0].field

    def check(self) -> CheckResult:
        if self.presentation is None:
            return super().check()
        fld = self.field
        form = self.presentation.smith()
        if form.exponents:
            return CheckResult.fail('presented G-contramodules must be free', exponents=list(form.exponents))
        gamma = self.gammas[0]
        if gamma.shape != (form.free_rank, form.free_rank) or \
                (form.free_rank and row_reduce(fld, gamma).rank != form.free_rank):
            return CheckResult.fail('gamma invertible')
        return CheckResult.ok(free_rank=form.free_rank)


ObjectLike = Union[SandboxModule, SmoothGModule, GContramodule]


def _validated(obj: GradedModule) -> GradedModule:
    verdict = obj.check()
    if not verdict:
        raise AxiomViolation(f"{obj.name}: {verdict.axiom}", verdict)
    return obj


def _closed_object(cls, group: SemidirectGroup, base: TorsionModule, gamma, name: str):
    level = max(level_for(group.tower, base), 1)
    if level > group.tower.depth:
        raise PreconditionError(f"{name} needs level {level}, the tower has depth {group.tower.depth}")
    return _validated(cls(group, (base,), (base.field.matrix(gamma),), Window(0, 0), level, name))


def smooth_module(group: SemidirectGroup, base: TorsionModule, gamma, name: str = 'M') -> SmoothGModule:
    return _closed_object(SmoothGModule, group, base, gamma, name)


def g_contramodule(group: SemidirectGroup, base: TorsionModule, gamma, name: str = 'P') -> GContramodule:
    return _closed_object(GContramodule, group, base, gamma, name)


def presented_contramodule(group: SemidirectGroup, p: PCModule, gamma=None, name: str = 'P') -> GContramodule:
    fld = p.field
    gamma = fld.identity(p.generators) if gamma is None else fld.matrix(gamma)
    return _validated(GContramodule(group, (), (gamma,), Window(0, 0), 1, name, presentation=p))


def trivial_object(group: SemidirectGroup, fld: Field, kind: str = 'smooth') -> GradedModule:
    """k with t acting by 0 and gamma by 1"""
    base = TorsionModule(fld, tuple(fld.zeros(1, 1) for _ in range(group.tower.rank)), 1, 'k')
    if kind == 'smooth':
        return smooth_module(group, base, fld.identity(1), 'k')
    return g_contramodule(group, base, fld.identity(1), 'k')


def s_window(group: SemidirectGroup, level: int, fld: Field, window: Optional[Window] = None) -> SmoothGModule:
    """S at level n: C_n in every degree of the window, gamma acting through phi"""
    window = window or group.window
    piece = level_module(group.tower, level, fld)
    sigma = group.permutation_matrix(level, fld)
    return _validated(SmoothGModule(group, tuple(piece for _ in window.degrees()),
                                    tuple(sigma for _ in range(window.width - 1)), window, level, f"S_{level}"))


def t_window(group: SemidirectGroup, level: int, fld: Field, window: Optional[Window] = None) -> GContramodule:
    """The truncation of T at level n: k[H/U_n] in every degree, t_v acting as g_v - 1"""
    window = window or group.window
    tower = group.tower
    algebra = group_algebra(tower.level(level), fld)
    ops = tuple(fld.sub(algebra.left_multiplication(g), fld.identity(algebra.dim)) for g in tower.generators(level))
    piece = TorsionModule(fld, ops, algebra.dim, f"T_{level}")
    sigma = group.permutation_matrix(level, fld)
    return _validated(GContramodule(group, tuple(piece for _ in window.degrees()),
                                    tuple(sigma for _ in range(window.width - 1)), window, level, f"T_{level}"))


def _torsion_from(structure, tower: GroupTower, n: int, name: str) -> TorsionModule:
    """t_v = operator(g_v) - 1 on a comodule or contramodule over C_n"""
    fld = structure.field
    if structure.dim == 0:
        return TorsionModule(fld, tuple(fld.zeros(0, 0) for _ in range(tower.rank)), 0, name)
    eye = fld.identity(structure.dim)
    return TorsionModule(fld, tuple(fld.sub(fld.matrix(structure.operator(g)), eye) for g in tower.generators(n)),
                         structure.dim, name)


def _window_pair(obj: GradedModule, pair: Optional[CorrespondencePair]) -> CorrespondencePair:
    if pair is not None:
        return pair
    return CorrespondencePair(group_function_coalgebra(obj.group.tower.level(obj.level), obj.field))


def _level_comodules(m: GradedModule, pair: CorrespondencePair):
    return [level_comodule(m.group.tower, m.level, comp, pair.coalgebra, LEFT) for comp in m.components]


def _level_contramodules(p: GradedModule, pair: CorrespondencePair):
    return [level_contramodule(p.group.tower, p.level, comp, pair.coalgebra) for comp in p.components]


def _psi_window(m: SmoothGModule, pair: CorrespondencePair, comodules=None) -> GContramodule:
    tower = m.group.tower
    fld = m.field
    comodules = comodules or _level_comodules(m, pair)
    images = [pair.psi(x) for x in comodules]
    pieces = tuple(_torsion_from(img.contramodule, tower, m.level, f"Psi({m.name})[{deg}]")
                   for deg, img in zip(m.window.degrees(), images))
    sigma = m.group.permutation_matrix(m.level, fld)
    gammas = []
    for i, j, gamma in m.gamma_pairs():
        # f |-> gamma o f o sigma^{-1} on Hom_k(C, M)
        moved = fld.matmul(fld.kron(gamma, sigma), images[i].basis)
        if images[j].basis.shape[1] == 0:
            gammas.append(fld.zeros(0, images[i].basis.shape[1]))
            continue
        coords = solve_matrix(fld, images[j].basis, moved)
        if coords is None:
            raise EngineError(f"gamma does not preserve Hom_C(C, {m.name})")
        gammas.append(coords)
    return GContramodule(m.group, pieces, tuple(gammas), m.window, m.level, f"Psi({m.name})")


def _phi_window(p: GContramodule, pair: CorrespondencePair, contramodules=None) -> SmoothGModule:
    tower = p.group.tower
    fld = p.field
    contramodules = contramodules or _level_contramodules(p, pair)
    images = [pair.phi(x) for x in contramodules]
    pieces = tuple(_torsion_from(img.comodule, tower, p.level, f"Phi({p.name})[{deg}]")
                   for deg, img in zip(p.window.degrees(), images))
    sigma = p.group.permutation_matrix(p.level, fld)
    gammas = []
    for i, j, gamma in p.gamma_pairs():
        lifted = fld.matmul(images[j].projection.matrix, fld.kron(sigma, gamma))
        induced = descend(fld, images[i].projection.matrix, lifted)
        if induced is None:
            raise EngineError(f"gamma is not well defined on C ⊙ {p.name}")
        gammas.append(induced)
    return SmoothGModule(p.group, pieces, tuple(gammas), p.window, p.level, f"Phi({p.name})")


def _closed_result(cls, obj: GradedModule, module: TorsionModule, gamma: np.ndarray, name: str):
    return cls(obj.group, (module,), (gamma,), Window(0, 0), obj.level, name)


def psi_G(m: ObjectLike, pair: Optional[CorrespondencePair] = None) -> ObjectLike:
    """Psi_G = Psi_H with the gamma-action carried across"""
    if isinstance(m, SandboxModule):
        return sandbox_psi(m, pair).module
    if not isinstance(m, SmoothGModule):
        raise PreconditionError("Psi_G takes a smooth G-module")
    if not m.closed:
        return _psi_window(m, _window_pair(m, pair))
    if m.dim == 0:
        return _closed_result(GContramodule, m, m.components[0], m.gammas[0], f"Psi({m.name})")
    if m.group.tower.rank != 1:
        raise PreconditionError("finite-length objects are supported over one-variable towers")
    result = rpsi_iwasawa(m.components[0], m.group.prime, m.level + 3)
    return _closed_result(GContramodule, m, result.homology[0], result.transport(0, m.gammas[0]), f"Psi({m.name})")


def phi_G(p: ObjectLike, pair: Optional[CorrespondencePair] = None) -> ObjectLike:
    """Phi_G = Phi_H with the gamma-action carried across"""
    if isinstance(p, SandboxModule):
        return sandbox_phi(p, pair).module
    if not isinstance(p, GContramodule):
        raise PreconditionError("Phi_G takes a G-contramodule")
    if p.presentation is not None:
        raise PreconditionError(f"Phi_G({p.name}) of a free contramodule is a divisible module; "
                                f"use a truncation window instead")
    if not p.closed:
        return _phi_window(p, _window_pair(p, pair))
    if p.dim == 0:
        return _closed_result(SmoothGModule, p, p.components[0], p.gammas[0], f"Phi({p.name})")
    if p.group.tower.rank != 1:
        raise PreconditionError("finite-length objects are supported over one-variable towers")
    result = lphi_torsion(p.components[0], p.group.prime, p.level + 3)
    return _closed_result(SmoothGModule, p, result.homology[0], result.transport(0, p.gammas[0]), f"Phi({p.name})")


def _stack(fld: Field, blocks: List[np.ndarray], rows: int) -> np.ndarray:
    blocks = [b for b in blocks if b.shape[1]]
    return np.hstack(blocks) if blocks else fld.zeros(rows, 0)


def contratensor_G_comparison(n: ObjectLike, p: ObjectLike) -> CheckResult:
    """N (x)_G P against N ⊙_S P: t-balanced tensors modulo the gamma relations, compared inside N (x) P"""
    if isinstance(n, SandboxModule):
        return sandbox_contratensor_comparison(n, p)
    if not isinstance(n, SmoothGModule) or not isinstance(p, GContramodule):
        raise PreconditionError("the comparison takes a smooth G-module and a G-contramodule")
    if p.presentation is not None:
        raise PreconditionError("the comparison needs a finite-length G-contramodule")
    fld = n.field
    tower = n.group.tower
    ambient = n.dim * p.dim
    window = n.window + p.window
    if ambient == 0:
        return CheckResult.ok(dim=0, window=window.to_dict())
    level = max(n.level, p.level)
    c = group_function_coalgebra(tower.level(level), fld)
    eye_n, eye_p = fld.identity(n.dim), fld.identity(p.dim)
    balance = [fld.sub(fld.kron(n.total_operator(v), eye_p), fld.kron(eye_n, p.total_operator(v)))
               for v in range(tower.rank)]
    gamma_rel = []
    for i, j, gn in n.gamma_pairs():
        for k, l, gp in p.gamma_pairs():
            src = fld.kron(n.embedding(i), p.embedding(k))
            dst = fld.kron(fld.matmul(n.embedding(j), gn), fld.matmul(p.embedding(l), gp))
            gamma_rel.append(fld.sub(src, dst))
    contra_rel = []
    for i, comp_n in enumerate(n.components):
        if comp_n.dim == 0:
            continue
        right = level_comodule(tower, level, comp_n, c)
        for k, comp_p in enumerate(p.components):
            if comp_p.dim == 0:
                continue
            first, second = contratensor_maps(right, level_contramodule(tower, level, comp_p, c))
            contra_rel.append(fld.matmul(fld.kron(n.embedding(i), p.embedding(k)), (first - second).matrix))
    module = _stack(fld, balance + gamma_rel, ambient)
    contra = _stack(fld, contra_rel + gamma_rel, ambient)
    if module.shape[1] and not subspace_contains(fld, contra, module):
        return CheckResult.fail('comparison map', reason='module relations not implied by the contratensor ones')
    module_rank = row_reduce(fld, module).rank if module.shape[1] else 0
    contra_rank = row_reduce(fld, contra).rank if contra.shape[1] else 0
    if module_rank != contra_rank:
        return CheckResult.fail('isomorphism', module_tensor_dim=ambient - module_rank,
                                contratensor_dim=ambient - contra_rank)
    return CheckResult.ok(dim=ambient - module_rank, level=level, window=window.to_dict())


@dataclass
class WeakFlags:
    """Flags decided for one object: over H for the underived functors, over S or T for the semi ones"""
    h_injective: Optional[bool] = None
    h_projective: Optional[bool] = None
    semiprojective: Optional[bool] = None
    semiinjective: Optional[bool] = None
    level: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {'h_injective': self.h_injective, 'h_projective': self.h_projective,
                'semiprojective': self.semiprojective, 'semiinjective': self.semiinjective, 'level': self.level}


def _uniform(obj: GradedModule) -> bool:
    return not obj.closed and len({c.dim for c in obj.components}) == 1


def weakly_compact_flags(obj: ObjectLike, pair: Optional[CorrespondencePair] = None) -> WeakFlags:
    """
    Window objects are decided at their level over C_n. A closed finite-length
    object is decided over H itself, where a nonzero one is neither injective
    nor projective.
    """
    if isinstance(obj, SandboxModule):
        return WeakFlags(**sandbox_flags(obj))
    if isinstance(obj, GContramodule) and obj.presentation is not None:
        free = not obj.presentation.smith().exponents
        return WeakFlags(h_projective=free, semiinjective=None, level=None)
    if obj.closed:
        empty = obj.dim == 0
        if isinstance(obj, SmoothGModule):
            return WeakFlags(h_injective=empty, semiprojective=empty, level=obj.level)
        return WeakFlags(h_projective=empty, semiinjective=empty, level=obj.level)
    pair = _window_pair(obj, pair)
    if isinstance(obj, SmoothGModule):
        injective = all(is_injective_comodule(x) for x in _level_comodules(obj, pair))
        return WeakFlags(h_injective=injective, semiprojective=injective and _uniform(obj), level=obj.level)
    projective = all(is_projective_contramodule(x) for x in _level_contramodules(obj, pair))
    return WeakFlags(h_projective=projective, semiinjective=projective and _uniform(obj), level=obj.level)


def _gamma_compatible(fld: Field, arrow_blocks: List[np.ndarray], source: GradedModule,
                      target: GradedModule) -> Optional[int]:
    """First degree where the blockwise arrow fails to commute with gamma"""
    for (i, j, gs), (_, _, gt) in zip(source.gamma_pairs(), target.gamma_pairs()):
        lhs = fld.matmul(arrow_blocks[j], gs)
        rhs = fld.matmul(gt, arrow_blocks[i])
        if lhs.shape != rhs.shape or np.any(lhs != rhs):
            return source.window.lo + i
    return None


def underived_equivalence_check(obj: ObjectLike, kind: str = 'smooth',
                                pair: Optional[CorrespondencePair] = None) -> CheckResult:
    """Counit Phi_G Psi_G M -> M on H-injective M, unit P -> Psi_G Phi_G P on H-projective P"""
    if isinstance(obj, SandboxModule):
        return sandbox_equivalence(obj, kind, pair)
    flags = weakly_compact_flags(obj, pair)
    fld = obj.field
    if isinstance(obj, SmoothGModule):
        if not flags.h_injective:
            raise PreconditionError(f"{obj.name} is not injective over H")
        if obj.dim == 0:
            return CheckResult.ok(kind='counit', dim=0)
        pair = _window_pair(obj, pair)
        comodules = _level_comodules(obj, pair)
        psi_m = _psi_window(obj, pair, comodules)
        contramodules = [pair.psi(x).contramodule for x in comodules]
        round_trip = _phi_window(psi_m, pair, contramodules)
        arrows = [pair.counit(x).matrix for x in comodules]
        source, target, label = round_trip, obj, 'counit'
    elif isinstance(obj, GContramodule):
        if not flags.h_projective:
            raise PreconditionError(f"{obj.name} is not projective over H")
        if obj.presentation is not None:
            raise PreconditionError("the unit of a free contramodule needs a truncation window")
        if obj.dim == 0:
            return CheckResult.ok(kind='unit', dim=0)
        pair = _window_pair(obj, pair)
        contramodules = _level_contramodules(obj, pair)
        phi_p = _phi_window(obj, pair, contramodules)
        comodules = [pair.phi(x).comodule for x in contramodules]
        round_trip = _psi_window(phi_p, pair, comodules)
        arrows = [pair.unit(x).matrix for x in contramodules]
        source, target, label = obj, round_trip, 'unit'
    else:
        raise PreconditionError("expected a smooth G-module or a G-contramodule")
    for deg, arrow in zip(obj.window.degrees(), arrows):
        if arrow.shape[0] != arrow.shape[1] or (arrow.shape[0] and row_reduce(fld, arrow).rank != arrow.shape[0]):
            return CheckResult.fail(f"{label} isomorphism", degree=deg)
    bad = _gamma_compatible(fld, arrows, source, target)
    if bad is not None:
        return CheckResult.fail('gamma compatibility', degree=bad)
    return CheckResult.ok(kind=label, dim=obj.dim, window=obj.window.to_dict())


@dataclass
class VanishingTable:
    """dims of the higher derived functors of Psi_G / Phi_G by degree, with the route taken"""
    dims: Dict[int, int]
    route: str
    trace: List[str] = field(default_factory=list)

    @property
    def vanishes(self) -> bool:
        return not any(self.dims.values())

    def to_dict(self) -> Dict[str, Any]:
        return {'dims': {str(i): d for i, d in sorted(self.dims.items())}, 'vanishes': self.vanishes,
                'route': self.route, 'trace': self.trace}


def ext_tor_vanishing(obj: ObjectLike, i_max: int = 3, kind: str = 'smooth',
                      pair: Optional[CorrespondencePair] = None) -> VanishingTable:
    """
    Ext^i_C(C, M) for smooth objects and Ctrtor^C_i(C, P) for contra objects,
    i = 1..i_max, each read off an explicit complex. The trace records the
    route and the values it produced.
    """
    if i_max < 1:
        raise PreconditionError("i_max must be at least 1")
    if isinstance(obj, SandboxModule):
        pair = pair or CorrespondencePair(obj.semialgebra.coalgebra)
        table = _vanishing_from(obj.comodule if kind == 'smooth' else obj.contramodule, kind, i_max, pair,
                                'sandbox', [])
        table.trace.append(f"derived functors over k(H) with cap {i_max + 1}: {_trace_dims(table.dims)}")
        return table
    if isinstance(obj, GContramodule) and obj.presentation is not None:
        return _presented_vanishing(obj, i_max)
    if obj.closed:
        if isinstance(obj, SmoothGModule):
            result = rpsi_iwasawa(obj.components[0], obj.group.prime, obj.level + 3)
            dims = {i: (result.homology[i].dim if i in result.homology else 0) for i in range(1, i_max + 1)}
        else:
            result = lphi_torsion(obj.components[0], obj.group.prime, obj.level + 3)
            dims = {-i: (result.homology[-i].dim if -i in result.homology else 0) for i in range(1, i_max + 1)}
        trace = [f"stabilized over the tower at level {result.level}: {_trace_dims(dims)}"]
        return VanishingTable(dims, 'tower', trace)
    pair = _window_pair(obj, pair)
    dims: Dict[int, int] = {}
    structures = _level_comodules(obj, pair) if isinstance(obj, SmoothGModule) else _level_contramodules(obj, pair)
    for structure in structures:
        piece = _vanishing_from(structure, 'smooth' if isinstance(obj, SmoothGModule) else 'contra', i_max, pair,
                                'window', [])
        for i, d in piece.dims.items():
            dims[i] = dims.get(i, 0) + d
    # S and T are flat over C and R, so the window degrees are computed one at a time over k(H_n)
    trace = [f"computed at level {obj.level} on {obj.window.width} degrees: {_trace_dims(dims)}"]
    return VanishingTable(dims, 'window', trace)


def _trace_dims(dims: Dict[int, int]) -> str:
    return ', '.join(f"{i}: {d}" for i, d in sorted(dims.items()))


def _presented_vanishing(obj: GContramodule, i_max: int) -> VanishingTable:
    """Tor over R of C_n against P from [C_n^r --A--> C_n^g], A the presentation matrix, at every level"""
    p = obj.presentation
    fld = p.field
    tower = obj.group.tower
    dims = {-i: 0 for i in range(1, i_max + 1)}
    trace = []
    form = p.smith()
    # dependent relations split off R^k with zero image, which adds C_n^k to H^{-1}
    dependent = p.relation_count - (p.generators - form.free_rank)
    for n in range(1, tower.depth + 1):
        c_n = level_module(tower, n, fld)
        q = c_n.dim
        mat = p.matrix(TruncatedSeriesRing(fld, q))
        g, r = p.generators, p.relation_count
        d = fld.zeros(g * q, r * q)
        for i in range(g):
            for j in range(r):
                d[i * q:(i + 1) * q, j * q:(j + 1) * q] = c_n.evaluate(mat[i, j])
        source, target = VecSpace.standard(fld, r * q, 'c'), VecSpace.standard(fld, g * q, 'c')
        cx = Complex(fld, {-1: source, 0: target}, {-1: LinMap(source, target, d)})
        homology = cx.homology_dims()
        homology[-1] = homology.get(-1, 0) - dependent * q
        tor1 = homology[-1]
        expected = tor_r(p, c_n)
        if tor1 != expected[1] or homology.get(0, 0) != expected[0]:
            raise EngineError(f"level {n}: the presentation complex gives {homology}, the Smith form {expected}")
        for i in range(1, i_max + 1):
            dims[-i] = max(dims[-i], homology.get(-i, 0))
        trace.append(f"level {n}: Tor_0 = {homology.get(0, 0)}, Tor_1 = {tor1}")
    trace.append(f"{p.name} has a free presentation of length one, so the level complexes stop at degree -1")
    return VanishingTable(dims, 'presentation', trace)


def _vanishing_from(structure, kind: str, i_max: int, pair: CorrespondencePair, route: str,
                    trace: List[str]) -> VanishingTable:
    if kind == 'smooth':
        cx = derived_psi(structure, i_max + 1, pair)
        homology = cx.homology_dims()
        dims = {i: homology.get(i, 0) for i in range(1, i_max + 1)}
    else:
        cx = derived_phi(structure, i_max + 1, pair)
        homology = cx.homology_dims()
        dims = {-i: homology.get(-i, 0) for i in range(1, i_max + 1)}
    return VanishingTable(dims, route, trace)


@dataclass
class DerivedCertificate:
    """The derived functor value with its support and the round trip back to the input"""
    complex: Complex
    round_trip: CheckResult
    support: Tuple[int, int]
    route: str

    def to_dict(self) -> Dict[str, Any]:
        return {'support': list(self.support), 'round_trip': self.round_trip.to_dict(), 'route': self.route,
                'homology': {str(i): d for i, d in sorted(self.complex.homology_dims().items())}}


def _support(dims: Dict[int, int]) -> Tuple[int, int]:
    nonzero = [i for i, d in dims.items() if d]
    return (min(nonzero), max(nonzero)) if nonzero else (0, 0)


def _closed_rep(obj: GradedModule) -> OperatorRep:
    base = obj.components[0]
    return OperatorRep(obj.field, base.dim, (base.t, obj.gammas[0]))


def derived_equivalence_G(obj: ObjectLike, cap: int, kind: str = 'smooth',
                          pair: Optional[CorrespondencePair] = None) -> DerivedCertificate:
    """R Psi_G and L Phi_G under a cap, with L Phi_G R Psi_G M = M (or the reverse) checked on the result"""
    if cap < 1:
        raise PreconditionError("derived functors need a cap of at least 1")
    if isinstance(obj, SandboxModule):
        pair = pair or CorrespondencePair(obj.semialgebra.coalgebra)
        if kind == 'smooth':
            cx = derived_psi(obj.comodule, cap, pair)
        else:
            cx = derived_phi(obj.contramodule, cap, pair)
        support = _support(cx.homology_dims())
        flags = sandbox_flags(obj)
        if flags['h_injective' if kind == 'smooth' else 'h_projective']:
            verdict = sandbox_equivalence(obj, kind, pair)
        else:
            verdict = derived_round_trip(obj.comodule if kind == 'smooth' else obj.contramodule, cap, pair)
        return _certified(cx, verdict, support, cap, 'sandbox')
    if obj.closed:
        return _derived_closed(obj, cap)
    verdict = underived_equivalence_check(obj, 'smooth' if isinstance(obj, SmoothGModule) else 'contra', pair)
    image = psi_G(obj, pair) if isinstance(obj, SmoothGModule) else phi_G(obj, pair)
    cx = Complex.concentrated(VecSpace.standard(obj.field, image.dim), 0, image, 'graded')
    return _certified(cx, verdict, (0, 0), cap, 'window')


def _certified(cx: Complex, verdict: CheckResult, support: Tuple[int, int], cap: int,
               route: str) -> DerivedCertificate:
    if support[1] - support[0] > cap:
        raise PreconditionError(f"homology spans degrees {support[0]}..{support[1]}, beyond cap {cap}",
                                support[1])
    return DerivedCertificate(cx, verdict, support, route)


def _derived_closed(obj: GradedModule, cap: int) -> DerivedCertificate:
    if not obj.group.is_direct_product:
        raise PreconditionError("the derived round trip on finite-length objects needs the identity twist")
    if obj.group.tower.rank != 1:
        raise PreconditionError("finite-length objects are supported over one-variable towers")
    prime, depth = obj.group.prime, obj.level + 3
    base, gamma = obj.components[0], obj.gammas[0]
    if isinstance(obj, SmoothGModule):
        first = rpsi_iwasawa(base, prime, depth)
        again = lambda h: lphi_torsion(h, prime, depth)
    else:
        if obj.presentation is not None:
            raise PreconditionError("the derived round trip needs a finite-length G-contramodule")
        first = lphi_torsion(base, prime, depth)
        again = lambda h: rpsi_iwasawa(h, prime, depth)
    support = _support(first.homology_dims())
    landed: Dict[int, List[Tuple[TorsionModule, np.ndarray]]] = {}
    for i, h in first.homology.items():
        if not h.dim:
            continue
        moved = first.transport(i, gamma)
        second = again(h)
        for j, piece in second.homology.items():
            if piece.dim:
                landed.setdefault(i + j, []).append((piece, second.transport(j, moved)))
    verdict = _compare_landed(obj, landed)
    return _certified(first.complex, verdict, support, cap, 'tower')


def _compare_landed(obj: GradedModule, landed) -> CheckResult:
    if obj.dim == 0:
        return CheckResult.ok(degrees=[]) if not landed else CheckResult.fail('round trip', degrees=sorted(landed))
    if sorted(landed) != [0] or len(landed[0]) != 1:
        return CheckResult.fail('round trip', degrees=sorted(landed))
    module, gamma = landed[0][0]
    got = OperatorRep(obj.field, module.dim, (module.t, gamma))
    if find_isomorphism(got, _closed_rep(obj)) is None:
        return CheckResult.fail('round trip module', expected=obj.components[0].exponents(),
                                got=module.exponents())
    return CheckResult.ok(exponents=module.exponents())


def s_module_check(group: SemidirectGroup, level: int, fld: Field, window: Optional[Window] = None,
                   pair: Optional[CorrespondencePair] = None) -> CheckResult:
    """Psi_G of the S-window is the regular T-window: free on one generator in the lowest degree"""
    if group.tower.rank != 1:
        raise PreconditionError("the Laurent truncation is built for one-variable towers")
    window = window or group.window
    s = s_window(group, level, fld, window)
    image = psi_G(s, pair)
    verdict = image.check()
    if not verdict:
        return verdict
    regular = TAlgebra(group, fld, level, window).regular_module()
    n = regular.components[0].dim
    if any(c.dim != n for c in image.components):
        return CheckResult.fail('piece dimension', expected=n, got=[c.dim for c in image.components])
    lowest = image.components[0]
    generator = _outside_image(fld, lowest.t)
    if generator is None:
        return CheckResult.fail('cyclic generator', degree=window.lo)
    columns = []
    current = generator
    for deg, piece in enumerate(image.components):
        block = fld.zeros(image.dim, n)
        offset = deg * n
        vec = current
        for i in range(n):
            block[offset:offset + n, i] = vec[:, 0]
            vec = fld.matmul(piece.t, vec)
        columns.append(block)
        if deg < len(image.gammas):
            current = fld.matmul(image.gammas[deg], current)
    frame = np.hstack(columns)
    if row_reduce(fld, frame).rank != image.dim:
        return CheckResult.fail('free on one generator', window=window.to_dict())
    return CheckResult.ok(precision=n, window=window.to_dict(), level=level)


def _outside_image(fld: Field, t: np.ndarray) -> Optional[np.ndarray]:
    """A standard basis vector not in the image of t"""
    image_rank = row_reduce(fld, t).rank if t.shape[0] else 0
    for k in range(t.shape[0]):
        e = fld.zeros(t.shape[0], 1)
        e[k, 0] = fld.scalar(1)
        if row_reduce(fld, np.hstack([t, e])).rank > image_rank:
            return e
    return None
