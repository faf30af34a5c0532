"""Finite groups as multiplication tables"""

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, reduce
from math import gcd
from typing import Dict, List, Sequence, Tuple

logger = logging.getLogger(__name__)


class InvalidGroup(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GroupTable:
    """Elements 0..n-1 with table[a][b] = ab; element 0 is not assumed to be the identity"""
    table: Tuple[Tuple[int, ...], ...]
    labels: Tuple[str, ...] = ()
    name: str = 'G'
    check: bool = True

    def __post_init__(self):
        table = tuple(tuple(int(x) for x in row) for row in self.table)
        object.__setattr__(self, 'table', table)
        if not self.labels:
            object.__setattr__(self, 'labels', tuple(f"g{i}" for i in range(len(table))))
        if self.check:
            self.validate()

    @property
    def order(self) -> int:
        return len(self.table)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def validate(self):
        n = self.order
        if n == 0:
            raise InvalidGroup("empty group table")
        for row in self.table:
            if len(row) != n or any(x < 0 or x >= n for x in row):
                raise InvalidGroup("table is not a closed n x n operation")
        for a, b, c in itertools.product(range(n), repeat=3):
            if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                raise InvalidGroup(f"not associative at ({a}, {b}, {c})")
        e = self.identity
        for a in range(n):
            if e not in self.table[a]:
                raise InvalidGroup(f"element {a} has no inverse")

    @cached_property
    def identity(self) -> int:
        n = len(self.table)
        for e in range(n):
            if all(self.table[e][a] == a and self.table[a][e] == a for a in range(n)):
                return e
        raise InvalidGroup("no identity element")

    def inverse(self, a: int) -> int:
        e = self.identity
        return self.table[a].index(e)

    def power(self, a: int, k: int) -> int:
        result = self.identity
        base = a if k >= 0 else self.inverse(a)
        for _ in range(abs(k)):
            result = self.mul(result, base)
        return result

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def is_abelian(self) -> bool:
        n = self.order
        return all(self.table[a][b] == self.table[b][a] for a in range(n) for b in range(n))

    def is_subgroup(self, elements: Sequence[int]) -> bool:
        s = set(elements)
        if self.identity not in s:
            return False
        return all(self.mul(a, b) in s for a in s for b in s)

    def is_p_group(self, p: int) -> bool:
        n = self.order
        while n % p == 0:
            n //= p
        return n == 1

    def generated_subgroup(self, gens: Sequence[int]) -> List[int]:
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.mul(x, g)
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return sorted(seen)

    def minimal_generator_count(self) -> int:
        """Smallest size of a generating set, by exhaustive search"""
        n = self.order
        if n == 1:
            return 0
        for k in range(1, n + 1):
            for gens in itertools.combinations(range(n), k):
                if len(self.generated_subgroup(gens)) == n:
                    return k
        return n

    def is_homomorphism(self, target: 'GroupTable', mapping: Sequence[int]) -> bool:
        n = self.order
        return all(mapping[self.mul(a, b)] == target.mul(mapping[a], mapping[b])
                   for a in range(n) for b in range(n))

    def is_automorphism(self, mapping: Sequence[int]) -> bool:
        return sorted(mapping) == list(range(self.order)) and self.is_homomorphism(self, mapping)

    def to_json(self) -> Dict:
        return {'table': [list(r) for r in self.table]}


def cyclic(n: int) -> GroupTable:
    return GroupTable(tuple(tuple((a + b) % n for b in range(n)) for a in range(n)),
                      tuple(str(a) for a in range(n)), f"Z/{n}", check=False)


def product(g: GroupTable, h: GroupTable) -> GroupTable:
    """Direct product, element (a, b) stored at a * |H| + b"""
    m = h.order
    n = g.order * m
    table = tuple(tuple(g.mul(x // m, y // m) * m + h.mul(x % m, y % m) for y in range(n)) for x in range(n))
    labels = tuple(f"({a},{b})" for a in g.labels for b in h.labels)
    return GroupTable(table, labels, f"{g.name}x{h.name}", check=False)


def abelian(orders: Sequence[int]) -> GroupTable:
    return reduce(product, [cyclic(n) for n in orders]) if orders else cyclic(1)


def symmetric(n: int) -> GroupTable:
    perms = sorted(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    # (p q)(x) = p(q(x))
    table = tuple(tuple(index[tuple(p[q[x]] for x in range(n))] for q in perms) for p in perms)
    labels = tuple(''.join(str(x) for x in p) for p in perms)
    return GroupTable(table, labels, f"S_{n}", check=False)


def dihedral(n: int) -> GroupTable:
    """Order 2n; element r^a s^b stored at 2a + b"""
    def mul(x, y):
        a1, b1 = divmod(x, 2)
        a2, b2 = divmod(y, 2)
        a = (a1 + (a2 if b1 == 0 else -a2)) % n
        return 2 * a + (b1 ^ b2)
    table = tuple(tuple(mul(x, y) for y in range(2 * n)) for x in range(2 * n))
    return GroupTable(table, tuple(f"r{x // 2}s{x % 2}" for x in range(2 * n)), f"D_{n}", check=False)


def abelian_p_groups(p: int, max_order: int) -> List[Tuple[int, ...]]:
    """Invariant-factor types (p^a1, ..., p^ar), a1 >= ... >= ar >= 1, of order <= max_order"""
    result: List[Tuple[int, ...]] = [()]

    def extend(prefix: Tuple[int, ...], bound: int, order: int):
        e = 1
        while e <= bound and order * p ** e <= max_order:
            t = prefix + (p ** e,)
            result.append(t)
            extend(t, e, order * p ** e)
            e += 1
    extend((), max_order, 1)
    return result


def from_spec(spec) -> GroupTable:
    """Build a group from a scenario descriptor"""
    if isinstance(spec, dict):
        if 'cyclic' in spec:
            return cyclic(int(spec['cyclic']))
        if 'abelian' in spec:
            return abelian([int(n) for n in spec['abelian']])
        if 'product' in spec:
            return reduce(product, [from_spec(s) for s in spec['product']])
        if 'symmetric' in spec:
            return symmetric(int(spec['symmetric']))
        if 'dihedral' in spec:
            return dihedral(int(spec['dihedral']))
        if 'table' in spec:
            return GroupTable(tuple(tuple(r) for r in spec['table']), tuple(spec.get('labels', ())),
                              spec.get('name', 'G'))
    raise InvalidGroup(f"unrecognized group descriptor {spec!r}")


def coprime_to(order: int, characteristic: int) -> bool:
    return characteristic == 0 or gcd(order, characteristic) == 1
