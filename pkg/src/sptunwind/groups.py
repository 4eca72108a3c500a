"""Finite groups as explicit multiplication tables.

Elements are the integers ``0..order-1``; ``table[g, h]`` is the index of the
product ``g*h``.  Human readable names, when there are any, live in
``FiniteGroup.labels`` and never enter the arithmetic.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ClosureBoundExceeded,
    NonUnitaryGenerator,
    NotACocycle,
    NotAGroup,
)

ASSOCIATIVITY_CHECK_MAX_ORDER = 64
MATRIX_TOL = 1e-9


def _frozen(a, dtype=np.int64):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    table: np.ndarray
    identity: int
    inverse: np.ndarray
    label: str = ""
    labels: Optional[tuple] = None

    @property
    def order(self) -> int:
        return int(self.table.shape[0])

    def __len__(self):
        return self.order

    def __repr__(self):
        name = self.label or "group"
        return f"FiniteGroup({name!r}, order={self.order})"

    def mul(self, g: int, h: int) -> int:
        return int(self.table[g, h])

    def inv(self, g: int) -> int:
        return int(self.inverse[g])

    def power(self, g: int, k: int) -> int:
        if k < 0:
            g, k = self.inv(g), -k
        out = self.identity
        for _ in range(k):
            out = int(self.table[out, g])
        return out

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != self.identity:
            x = int(self.table[x, g])
            k += 1
        return k

    def element_orders(self) -> np.ndarray:
        return np.array([self.element_order(g) for g in range(self.order)])

    def order_profile(self) -> dict:
        """Map element order -> number of elements of that order."""
        orders, counts = np.unique(self.element_orders(), return_counts=True)
        return {int(o): int(c) for o, c in zip(orders, counts)}

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def center(self) -> list:
        return [g for g in range(self.order)
                if np.array_equal(self.table[g, :], self.table[:, g])]

    def closure(self, elements) -> list:
        """Subgroup generated by ``elements`` (sorted list of indices)."""
        seen = {self.identity}
        frontier = [self.identity]
        gens = list(elements)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = int(self.table[x, g])
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(seen)

    def generators(self) -> list:
        """A small generating set, picked greedily by decreasing element order."""
        orders = self.element_orders()
        candidates = sorted(range(self.order), key=lambda g: (-orders[g], g))
        gens, span = [], {self.identity}
        for g in candidates:
            if len(span) == self.order:
                break
            if g not in span:
                gens.append(g)
                span = set(self.closure(gens))
        return gens


def _check_table(table: np.ndarray, check_assoc: Optional[bool] = None):
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
        raise NotAGroup("table must be a non-empty square matrix")
    n = table.shape[0]
    if table.min() < 0 or table.max() >= n:
        raise NotAGroup("table entries must lie in 0..order-1")
    want = np.arange(n)
    for g in range(n):
        if not np.array_equal(np.sort(table[g]), want):
            raise NotAGroup(f"row {g} is not a permutation", witness=("row", g))
        if not np.array_equal(np.sort(table[:, g]), want):
            raise NotAGroup(f"column {g} is not a permutation", witness=("column", g))
    ids = [e for e in range(n)
           if np.array_equal(table[e], want) and np.array_equal(table[:, e], want)]
    if not ids:
        raise NotAGroup("no two-sided identity")
    e = ids[0]
    if check_assoc is None:
        check_assoc = n <= ASSOCIATIVITY_CHECK_MAX_ORDER
    if check_assoc:
        left = table[table, :]          # (g*h)*l indexed [g, h, l]
        right = table[:, table]         # g*(h*l) indexed [g, h, l]
        bad = np.argwhere(left != right)
        if len(bad):
            g, h, l = (int(x) for x in bad[0])
            raise NotAGroup(f"not associative at {(g, h, l)}", witness=(g, h, l))
    inverse = np.argmax(table == e, axis=1)
    return e, inverse


def from_table(table, label: str = "", labels=None, check_assoc=None) -> FiniteGroup:
    """Validate a multiplication table and wrap it as a :class:`FiniteGroup`."""
    t = np.asarray(table)
    if t.dtype.kind not in "iu":
        if not np.all(np.equal(np.mod(t, 1), 0)):
            raise NotAGroup("table entries must be integers")
    t = t.astype(np.int64)
    e, inverse = _check_table(t, check_assoc)
    return FiniteGroup(_frozen(t), int(e), _frozen(inverse), label,
                       tuple(labels) if labels is not None else None)


def trivial_group() -> FiniteGroup:
    return from_table([[0]], label="1")


def cyclic_group(n: int) -> FiniteGroup:
    idx = np.arange(n)
    return from_table((idx[:, None] + idx[None, :]) % n, label=f"Z{n}")


def direct_product(a: FiniteGroup, b: FiniteGroup, label: str = "") -> FiniteGroup:
    """Elements ``(x, y)`` are indexed as ``x * |b| + y``."""
    na, nb = a.order, b.order
    x = np.repeat(np.arange(na), nb)
    y = np.tile(np.arange(nb), na)
    table = a.table[x[:, None], x[None, :]] * nb + b.table[y[:, None], y[None, :]]
    labels = [(int(i), int(j)) for i, j in zip(x, y)]
    return from_table(table, label=label or f"{a.label}x{b.label}", labels=labels)


def klein_four() -> FiniteGroup:
    """Z2 x Z2 with 0=e, 1=z, 2=x, 3=xz (componentwise XOR)."""
    idx = np.arange(4)
    return from_table(idx[:, None] ^ idx[None, :], label="Z2xZ2")


def dihedral_group(order: int) -> FiniteGroup:
    """Dihedral group of the given (even) order from <a, x | a^m = x^2 = 1, x a x = a^-1>.

    Element ``a^k x^s`` has index ``k + m*s``.
    """
    if order % 2 or order < 4:
        raise ValueError("dihedral order must be even and >= 4")
    m = order // 2
    table = np.empty((order, order), dtype=np.int64)
    for k1, s1, k2, s2 in itertools.product(range(m), range(2), range(m), range(2)):
        # a^k1 x^s1 a^k2 x^s2 = a^(k1 + (-1)^s1 k2) x^(s1+s2)
        k = (k1 + (k2 if s1 == 0 else -k2)) % m
        table[k1 + m * s1, k2 + m * s2] = k + m * ((s1 + s2) % 2)
    labels = [f"a^{k}" + ("x" if s else "") for s in range(2) for k in range(m)]
    return from_table(table, label=f"D{order}", labels=labels)


def quaternion_group() -> FiniteGroup:
    mats = [np.array([[1j, 0], [0, -1j]]), np.array([[0, 1], [-1, 0]], dtype=complex)]
    g, _ = from_matrix_generators(mats, label="Q8")
    return g


@dataclass(frozen=True, eq=False)
class GroupHom:
    source: FiniteGroup
    target: FiniteGroup
    map: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.map, dtype=np.int64)
        if m.shape != (self.source.order,):
            raise ValueError("map must list one image per source element")
        object.__setattr__(self, "map", _frozen(m))
        s, t = self.source.table, self.target.table
        lhs = m[s]
        rhs = t[m[:, None], m[None, :]]
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            g, h = (int(x) for x in bad[0])
            raise ValueError(f"not a homomorphism: fails at pair {(g, h)}")

    def __call__(self, g: int) -> int:
        return int(self.map[g])

    def kernel(self) -> list:
        return [int(g) for g in np.flatnonzero(self.map == self.target.identity)]

    def image(self) -> list:
        return sorted({int(x) for x in self.map})

    def is_injective(self) -> bool:
        return len(self.kernel()) == 1

    def is_surjective(self) -> bool:
        return len(self.image()) == self.target.order


def identity_hom(g: FiniteGroup) -> GroupHom:
    return GroupHom(g, g, np.arange(g.order))


@dataclass(frozen=True, eq=False)
class ShortExactSequence:
    """Central extension ``1 -> K -> total -> quotient -> 1``.

    ``modulus`` and ``cocycle_values`` record the Z_n-valued cocycle the total
    group was built from (``None`` when the sequence was assembled by hand).
    """

    k_group: FiniteGroup
    total: FiniteGroup
    quotient: FiniteGroup
    inclusion: GroupHom
    projection: GroupHom
    modulus: Optional[int] = None
    cocycle_values: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        inc, proj = self.inclusion, self.projection
        if inc.source is not self.k_group or inc.target is not self.total:
            raise ValueError("inclusion must map k_group -> total")
        if proj.source is not self.total or proj.target is not self.quotient:
            raise ValueError("projection must map total -> quotient")
        if not inc.is_injective():
            raise ValueError("inclusion is not injective")
        if not proj.is_surjective():
            raise ValueError("projection is not surjective")
        if inc.image() != proj.kernel():
            raise ValueError("image(inclusion) != kernel(projection)")
        center = set(self.total.center())
        if not set(inc.image()) <= center:
            raise ValueError("image(inclusion) is not central")

    def element(self, a: int, g: int) -> int:
        """Index of the pair ``(a, g)`` in a sequence built by :func:`central_extension`."""
        if self.modulus is None:
            raise ValueError("sequence carries no (a, g) labelling")
        return g * self.modulus + a

    def pair(self, idx: int) -> tuple:
        if self.modulus is None:
            raise ValueError("sequence carries no (a, g) labelling")
        return idx % self.modulus, idx // self.modulus


def _cocycle_values(base: FiniteGroup, n: int, cocycle) -> np.ndarray:
    values = getattr(cocycle, "values", cocycle)
    mod = getattr(cocycle, "modulus", n)
    values = np.asarray(values, dtype=np.int64)
    if values.shape != (base.order, base.order):
        raise ValueError("cocycle must be an |G| x |G| array")
    if mod != n:
        # accept a cocycle stored at a multiple of n, e.g. Z_2 phases kept in Z_4
        if mod % n or np.any(values % (mod // n)):
            raise ValueError(f"cocycle modulus {mod} incompatible with Z_{n}")
        values = values // (mod // n)
    return values % n


def central_extension(base: FiniteGroup, n: int, cocycle) -> ShortExactSequence:
    """Central extension of ``base`` by Z_n twisted by a normalized Z_n 2-cocycle.

    Pairs ``(a, g)`` multiply as ``(a, g)(b, h) = (a + b + w(g, h), g h)``; the
    pair has index ``g * n + a``.
    """
    w = _cocycle_values(base, n, cocycle)
    e = base.identity
    if np.any(w[e, :]) or np.any(w[:, e]):
        raise NotACocycle("cocycle is not normalized")
    t = base.table
    lhs = (w[:, :, None] + w[t, :]) % n                   # w(g,h) + w(gh,l)
    rhs = (w[:, t] + w[None, :, :]) % n                   # w(g,hl) + w(h,l)
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        raise NotACocycle("cocycle condition fails", triple=tuple(int(x) for x in bad[0]))
    order = n * base.order
    idx = np.arange(order)
    a, g = idx % n, idx // n
    prod_g = t[g[:, None], g[None, :]]
    prod_a = (a[:, None] + a[None, :] + w[g[:, None], g[None, :]]) % n
    table = prod_g * n + prod_a
    labels = [(int(x), int(y)) for x, y in zip(a, g)]
    name = f"{base.label}~Z{n}" if base.label else ""
    total = from_table(table, label=name, labels=labels)
    zn = cyclic_group(n)
    inclusion = GroupHom(zn, total, e * n + np.arange(n))
    projection = GroupHom(total, base, g)
    return ShortExactSequence(zn, total, base, inclusion, projection,
                              modulus=n, cocycle_values=_frozen(w))


def _extend_hom(a: FiniteGroup, b: FiniteGroup, gens, images):
    """Try to extend gens -> images to a bijective homomorphism a -> b."""
    phi = {a.identity: b.identity}
    frontier = [a.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g, gi in zip(gens, images):
                y = int(a.table[x, g])
                val = int(b.table[phi[x], gi])
                if y in phi:
                    if phi[y] != val:
                        return None
                else:
                    phi[y] = val
                    nxt.append(y)
        frontier = nxt
    if len(phi) != a.order or len(set(phi.values())) != b.order:
        return None
    m = np.array([phi[x] for x in range(a.order)])
    # generator images consistent on a generating set implies a homomorphism
    # only if every relation holds; verify on the full table.
    if not np.array_equal(m[a.table], b.table[m[:, None], m[None, :]]):
        return None
    return m


def find_isomorphism(a: FiniteGroup, b: FiniteGroup):
    """Exhaustive generator-image search; returns the element map or ``None``."""
    if a.order != b.order or a.order_profile() != b.order_profile():
        return None
    if a.is_abelian() != b.is_abelian():
        return None
    gens = a.generators()
    orders_b = b.element_orders()
    candidates = [[h for h in range(b.order) if orders_b[h] == a.element_order(g)]
                  for g in gens]
    for images in itertools.product(*candidates):
        m = _extend_hom(a, b, gens, images)
        if m is not None:
            return m
    return None


class HeuristicIsomorphismWarning(UserWarning):
    pass


def is_isomorphic_small(a: FiniteGroup, b: FiniteGroup) -> bool:
    """Exact for orders up to 16; above that only order profiles are compared."""
    if a.order != b.order:
        return False
    if a.order <= 16:
        return find_isomorphism(a, b) is not None
    warnings.warn("order > 16: comparing order profiles only", HeuristicIsomorphismWarning)
    return a.order_profile() == b.order_profile() and a.is_abelian() == b.is_abelian()


def _matrix_key(m: np.ndarray):
    return np.round(m, 6).tobytes()


class _MatrixIndex:
    """Dictionary of matrices deduplicated by max-entry distance."""

    def __init__(self, tol):
        self.tol = tol
        self.mats = []
        self._buckets = {}

    def find(self, m):
        for i in self._buckets.get(_matrix_key(m), ()):
            if np.max(np.abs(self.mats[i] - m)) <= self.tol:
                return i
        # rounding can split near-equal matrices across buckets
        for i, other in enumerate(self.mats):
            if np.max(np.abs(other - m)) <= self.tol:
                return i
        return None

    def add(self, m):
        self.mats.append(m)
        self._buckets.setdefault(_matrix_key(m), []).append(len(self.mats) - 1)
        return len(self.mats) - 1


def from_matrix_generators(generators: Sequence[np.ndarray], tolerance: float = MATRIX_TOL,
                           bound: int = 1024, label: str = ""):
    """Close a set of unitary matrices under multiplication.

    Returns ``(group, rep)`` where ``rep`` is a :class:`~sptunwind.projective.UnitaryRep`
    assigning each element its matrix; element 0 is the identity.
    """
    from .projective import UnitaryRep

    gens = [np.asarray(g, dtype=complex) for g in generators]
    if not gens:
        raise ValueError("need at least one generator")
    dim = gens[0].shape[0]
    for g in gens:
        if g.shape != (dim, dim):
            raise ValueError("generators must be square matrices of one size")
        if np.max(np.abs(g.conj().T @ g - np.eye(dim))) > tolerance:
            raise NonUnitaryGenerator("generator is not unitary within tolerance")

    index = _MatrixIndex(tolerance)
    index.add(np.eye(dim, dtype=complex))
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for g in gens:
                p = index.mats[i] @ g
                if index.find(p) is None:
                    if len(index.mats) >= bound:
                        raise ClosureBoundExceeded(f"closure exceeds {bound} elements")
                    nxt.append(index.add(p))
        frontier = nxt
    mats = index.mats
    n = len(mats)
    table = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            k = index.find(mats[i] @ mats[j])
            if k is None:  # pragma: no cover - closure guarantees membership
                raise ClosureBoundExceeded("product left the closed set")
            table[i, j] = k
    group = from_table(table, label=label)
    return group, UnitaryRep(group, np.array(mats))
