"""
Seeded instance generation for the fuzz families.

Instances are plain JSON dicts so they can be shrunk, stored in the corpus and
replayed; the build_* helpers turn them back into algebraic objects.
"""

import logging
from math import gcd
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from config.config import Config
from src.algebra.exactlin import Field, row_reduce, solve_matrix
from src.algebra.groups import GroupTable, from_spec

GROUP_CATALOGUE = (
    [({'cyclic': n}, n) for n in range(1, 13)]
    + [({'abelian': [2, 2]}, 4), ({'abelian': [2, 4]}, 8), ({'abelian': [2, 2, 2]}, 8),
       ({'abelian': [3, 3]}, 9), ({'abelian': [2, 6]}, 12), ({'symmetric': 3}, 6),
       ({'dihedral': 4}, 8), ({'dihedral': 5}, 10), ({'dihedral': 6}, 12)]
)


def group_order(spec: Dict[str, Any]) -> int:
    for candidate, order in GROUP_CATALOGUE:
        if candidate == spec:
            return order
    return from_spec(spec).order


def smaller_groups(spec: Dict[str, Any]) -> List[Dict[str, Any]]:
    order = group_order(spec)
    return [dict(s) for s, n in GROUP_CATALOGUE if n < order and 'cyclic' in s]


def coset_action(g: GroupTable, element: int) -> List[List[int]]:
    """Permutation action of G on the left cosets of <element>, as images of coset indices"""
    k = g.generated_subgroup([element % g.order])
    cosets: List[tuple] = []
    index: Dict[int, int] = {}
    for x in range(g.order):
        if x in index:
            continue
        coset = tuple(sorted(g.mul(x, y) for y in k))
        for y in coset:
            index[y] = len(cosets)
        cosets.append(coset)
    return [[index[g.mul(a, c[0])] for c in cosets] for a in range(g.order)]


def piece_dim(g: GroupTable, piece: Dict[str, Any]) -> int:
    if piece['kind'] == 'trivial':
        return 1
    if piece['kind'] == 'regular':
        return g.order
    return g.order // len(g.generated_subgroup([piece['element'] % g.order]))


def random_invertible(fld: Field, dim: int, rng: np.random.Generator) -> np.ndarray:
    p = fld.characteristic
    while True:
        mat = fld.matrix(rng.integers(0, p, size=(dim, dim)).tolist(), (dim, dim))
        if row_reduce(fld, mat).rank == dim:
            return mat


def build_action(g: GroupTable, pieces: Sequence[Dict[str, Any]], fld: Field,
                 twist_seed: Optional[int] = None) -> List[np.ndarray]:
    """rho(x) for every x in G: a direct sum of permutation pieces, conjugated by a seeded change of basis"""
    blocks = []
    for piece in pieces:
        if piece['kind'] == 'trivial':
            blocks.append([[0] for _ in range(g.order)])
        elif piece['kind'] == 'regular':
            blocks.append([[g.mul(a, y) for y in range(g.order)] for a in range(g.order)])
        else:
            blocks.append(coset_action(g, piece['element']))
    dim = sum(len(b[0]) for b in blocks)
    action = []
    for a in range(g.order):
        mat = fld.zeros(dim, dim)
        offset = 0
        for block in blocks:
            for col, row in enumerate(block[a]):
                mat[offset + row, offset + col] = fld.scalar(1)
            offset += len(block[a])
        action.append(mat)
    if twist_seed is None or dim == 0:
        return action
    q = random_invertible(fld, dim, np.random.default_rng(twist_seed))
    q_inv = solve_matrix(fld, q, fld.identity(dim))
    return [fld.matmul(q, fld.matmul(a, q_inv)) for a in action]


class InstanceGenerator:
    """One seeded stream of instances per fuzz run"""

    def __init__(self, seed: int, max_order: int = Config.MAX_GROUP_ORDER, max_dim: int = Config.MAX_INSTANCE_DIM):
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.max_order = max_order
        self.max_dim = max_dim
        self.logger = logging.getLogger(__name__)

    def _int(self, lo: int, hi: int) -> int:
        """Uniform on lo..hi inclusive"""
        return int(self.rng.integers(lo, hi + 1))

    def _choice(self, items: Sequence[Any]) -> Any:
        return items[int(self.rng.integers(0, len(items)))]

    def characteristic(self, choices: Sequence[int] = (2, 3)) -> int:
        return int(self._choice(list(choices)))

    def group(self, max_order: Optional[int] = None, coprime_to: Optional[int] = None) -> Dict[str, Any]:
        bound = max_order or self.max_order
        pool = [s for s, n in GROUP_CATALOGUE
                if n <= bound and (coprime_to is None or gcd(n, coprime_to) == 1)]
        return dict(self._choice(pool))

    def pieces(self, g: GroupTable, max_dim: Optional[int] = None) -> List[Dict[str, Any]]:
        """Permutation pieces with total dimension at most max_dim, never empty"""
        budget = max_dim or self.max_dim
        out: List[Dict[str, Any]] = []
        for _ in range(self._int(1, 3)):
            roll = self._int(0, 2)
            if roll == 0:
                piece = {'kind': 'trivial'}
            elif roll == 1:
                piece = {'kind': 'regular'}
            else:
                piece = {'kind': 'coset', 'element': self._int(0, g.order - 1)}
            d = piece_dim(g, piece)
            if d <= budget:
                out.append(piece)
                budget -= d
        return out or [{'kind': 'trivial'}]

    def twist_seed(self) -> Optional[int]:
        return None if self._int(0, 3) == 0 else self._int(0, 2 ** 31 - 1)

    # families

    def coalgebra_axioms(self, mutate: bool = False) -> Dict[str, Any]:
        spec = self.group()
        n = group_order(spec)
        p = self.characteristic()
        instance = {'characteristic': p, 'group': spec, 'mutation': None}
        if mutate:
            # an entry with the identity in one tensor slot always breaks counitality
            e = from_spec(spec).identity
            other = self._int(0, n - 1)
            row = e * n + other if self._int(0, 1) == 0 else other * n + e
            instance['mutation'] = {'row': row, 'col': self._int(0, n - 1), 'delta': self._int(1, p - 1)}
        return instance

    def adjunction(self) -> Dict[str, Any]:
        spec = self.group(max_order=self.max_dim)
        g = from_spec(spec)
        return {'characteristic': self.characteristic(), 'group': spec, 'n': self.pieces(g), 'p': self.pieces(g),
                'v_dim': self._int(1, 2), 'twist_seed': self.twist_seed()}

    def _exponents(self, count: int, top: int = 4) -> List[int]:
        return sorted((self._int(1, top) for _ in range(count)), reverse=True)

    def theorem1(self) -> Dict[str, Any]:
        return {'characteristic': self.characteristic(), 'depth': 4,
                'p_exponents': self._exponents(self._int(1, 2)), 'q_exponents': self._exponents(self._int(1, 2))}

    def contratensor(self) -> Dict[str, Any]:
        return {'characteristic': self.characteristic(), 'depth': 4,
                'n_exponents': self._exponents(self._int(1, 2)), 'p_exponents': self._exponents(self._int(1, 2))}

    def artin_rees(self) -> Dict[str, Any]:
        free = self._int(0, 1) == 0
        return {'characteristic': self.characteristic(), 'exponent': None if free else self._int(1, 5),
                'valuation': self._int(0, 4), 'tail': [self._int(0, 2) for _ in range(self._int(0, 3))],
                'depth': 8}

    def derived_roundtrip(self) -> Dict[str, Any]:
        if self._int(0, 1) == 0:
            return {'level': 'coalgebra', 'characteristic': self.characteristic(),
                    'kind': self._choice(['comodule', 'contramodule']), 'rank': self._int(1, 2),
                    'generators': self._int(0, 2), 'mode': self._choice(['sub', 'quotient']),
                    'vector_seed': self._int(0, 2 ** 31 - 1)}
        return {'level': 'group', 'characteristic': 2, 'depth': 4,
                'kind': self._choice(['smooth', 'contra']), 'exponents': self._exponents(self._int(1, 2)),
                'gamma': [self._int(0, 1) for _ in range(self._int(0, 3))]}

    def sandbox_equivalence(self) -> Dict[str, Any]:
        p = self.characteristic()
        spec = self.group(max_order=8)
        g = from_spec(spec)
        coprime = [x for x in range(g.order) if gcd(g.element_order(x), p) == 1]
        x = self._choice(coprime)
        subgroup = list(range(g.order)) if gcd(g.order, p) == 1 else g.generated_subgroup([x])
        return {'characteristic': p, 'group': spec, 'subgroup': subgroup, 'pieces': self.pieces(g, 8),
                'kind': self._choice(['smooth', 'contra']), 'twist_seed': self.twist_seed()}

    def generate(self, family: str, mutate: bool = False) -> Dict[str, Any]:
        if family == 'coalgebra-axioms':
            return self.coalgebra_axioms(mutate)
        return getattr(self, family.replace('-', '_'))()
