"""Two-cocycles with Z_n coefficients and their classes.

Cochains are stored as full ``|G| x |G|`` residue arrays.  The linear algebra
works on normalized cochains only, i.e. on functions of non-identity
arguments.  Conventions:

* cocycle condition: ``w(g,h) + w(gh,l) - w(g,hl) - w(h,l) = 0 (mod n)``
* coboundary of a 1-cochain: ``(d beta)(g,h) = beta(g) + beta(h) - beta(gh)``

Two notions of triviality appear and are kept apart.  A Z_n-coboundary has
an integer witness ``beta`` mod n.  A cocycle is U(1)-trivial when the phase
``exp(2 pi i w / n)`` is a coboundary of U(1) phases; this is the notion that
classifies projective representations and the one :func:`compute_h2` counts.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, lcm
from typing import Optional

import numpy as np

from .errors import GroupMismatch, NotACoboundary, NotACocycle, OrderTooLarge
from .groups import FiniteGroup, GroupHom, ShortExactSequence, central_extension
from .snf import SmithForm, smith_normal_form, solve_mod

H2_MAX_ORDER = 16


@dataclass(frozen=True, eq=False)
class ZnCocycle2:
    group: FiniteGroup
    modulus: int
    values: np.ndarray

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        v = np.asarray(self.values, dtype=np.int64) % self.modulus
        if v.shape != (self.group.order, self.group.order):
            raise ValueError("values must be an |G| x |G| array")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __repr__(self):
        return f"ZnCocycle2({self.group!r}, n={self.modulus})"

    def __eq__(self, other):
        return (isinstance(other, ZnCocycle2) and self.group is other.group
                and self.modulus == other.modulus
                and np.array_equal(self.values, other.values))

    __hash__ = None

    def is_normalized(self) -> bool:
        e = self.group.identity
        return not (np.any(self.values[e, :]) or np.any(self.values[:, e]))

    def rescale(self, modulus: int) -> "ZnCocycle2":
        """Same phases ``exp(2 pi i w / n)`` written over Z_modulus."""
        if modulus % self.modulus:
            raise ValueError(f"{modulus} is not a multiple of {self.modulus}")
        return ZnCocycle2(self.group, modulus, self.values * (modulus // self.modulus))

    def __add__(self, other: "ZnCocycle2") -> "ZnCocycle2":
        if other.group is not self.group:
            raise GroupMismatch("cocycles live on different groups")
        m = lcm(self.modulus, other.modulus)
        return ZnCocycle2(self.group, m, self.rescale(m).values + other.rescale(m).values)

    def __neg__(self) -> "ZnCocycle2":
        return ZnCocycle2(self.group, self.modulus, -self.values)

    def __sub__(self, other: "ZnCocycle2") -> "ZnCocycle2":
        return self + (-other)

    def scaled(self, k: int) -> "ZnCocycle2":
        return ZnCocycle2(self.group, self.modulus, k * self.values)


@dataclass(frozen=True)
class CoboundaryWitness:
    beta: np.ndarray
    modulus: int


@dataclass(frozen=True, eq=False)
class H2Result:
    """Invariant factors of H^2(G, U(1)) with one generating cocycle each.

    Representatives are Z_|G| cocycles; ``invariant_factors == []`` means the
    group has no nontrivial classes.
    """

    group: FiniteGroup
    invariant_factors: list
    representatives: list

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out


def zero_cocycle(group: FiniteGroup, n: int) -> ZnCocycle2:
    return ZnCocycle2(group, n, np.zeros((group.order, group.order), dtype=np.int64))


def coboundary(group: FiniteGroup, n: int, beta) -> ZnCocycle2:
    b = np.asarray(beta, dtype=np.int64)
    return ZnCocycle2(group, n, b[:, None] + b[None, :] - b[group.table])


def cocycle_defect(c: ZnCocycle2) -> np.ndarray:
    """``w(g,h) + w(gh,l) - w(g,hl) - w(h,l) mod n`` indexed by ``[g, h, l]``."""
    w, t = c.values, c.group.table
    return (w[:, :, None] + w[t, :] - w[:, t] - w[None, :, :]) % c.modulus


def is_cocycle(c: ZnCocycle2) -> bool:
    return not np.any(cocycle_defect(c))


def _require_cocycle(c: ZnCocycle2):
    bad = np.argwhere(cocycle_defect(c))
    if len(bad):
        raise NotACocycle("cocycle condition fails", triple=tuple(int(x) for x in bad[0]))
    if not c.is_normalized():
        raise NotACocycle("cocycle is not normalized")


def _nonidentity(group: FiniteGroup) -> np.ndarray:
    return np.array([g for g in range(group.order) if g != group.identity])


def delta1_matrix(group: FiniteGroup) -> np.ndarray:
    """Integer matrix of beta -> d beta on normalized cochains."""
    ne = _nonidentity(group)
    pos = -np.ones(group.order, dtype=np.int64)
    pos[ne] = np.arange(len(ne))
    k = len(ne)
    M = np.zeros((k * k, k), dtype=np.int64)
    for a, g in enumerate(ne):
        for b, h in enumerate(ne):
            row = a * k + b
            M[row, a] += 1
            M[row, b] += 1
            gh = group.table[g, h]
            if pos[gh] >= 0:
                M[row, pos[gh]] -= 1
    return M


def delta2_matrix(group: FiniteGroup) -> np.ndarray:
    """Integer matrix of w -> (cocycle defect of w) on normalized cochains."""
    ne = _nonidentity(group)
    k = len(ne)
    pos = -np.ones(group.order, dtype=np.int64)
    pos[ne] = np.arange(k)
    t = group.table
    a, b, c = np.meshgrid(np.arange(k), np.arange(k), np.arange(k), indexing="ij")
    a, b, c = a.ravel(), b.ravel(), c.ravel()
    g, h, l = ne[a], ne[b], ne[c]
    rows = np.arange(k ** 3)
    M = np.zeros((k ** 3, k * k), dtype=np.int64)

    def add(first, second, sign):
        p, q = pos[first], pos[second]
        ok = (p >= 0) & (q >= 0)
        np.add.at(M, (rows[ok], p[ok] * k + q[ok]), sign)

    add(g, h, 1)
    add(t[g, h], l, 1)
    add(g, t[h, l], -1)
    add(h, l, -1)
    return M


@lru_cache(maxsize=64)
def _delta1_form(group: FiniteGroup) -> SmithForm:
    return smith_normal_form(delta1_matrix(group))


def _flatten(group: FiniteGroup, values) -> np.ndarray:
    ne = _nonidentity(group)
    return np.asarray(values, dtype=np.int64)[np.ix_(ne, ne)].ravel()


def _solve_delta(group: FiniteGroup, rhs_values, modulus: int) -> np.ndarray:
    """Full 1-cochain beta (beta(e) = 0) with d beta = rhs (mod modulus)."""
    if group.order == 1:
        return np.zeros(1, dtype=np.int64)
    x = solve_mod(delta1_matrix(group), _flatten(group, rhs_values), modulus,
                  form=_delta1_form(group))
    beta = np.zeros(group.order, dtype=np.int64)
    beta[_nonidentity(group)] = x
    return beta


def coboundary_witness(c: ZnCocycle2) -> CoboundaryWitness:
    """Solve ``d beta = c`` over Z_n.

    Raises :class:`NotACoboundary` (carrying the inconsistent reduced row)
    when ``c`` is not a Z_n-coboundary.
    """
    _require_cocycle(c)
    beta = _solve_delta(c.group, c.values, c.modulus)
    return CoboundaryWitness(beta % c.modulus, c.modulus)


def is_coboundary(c: ZnCocycle2) -> bool:
    try:
        coboundary_witness(c)
    except NotACoboundary:
        return False
    return True


def u1_witness(c: ZnCocycle2) -> Optional[CoboundaryWitness]:
    """Witness that ``exp(2 pi i w / n)`` is a U(1) coboundary, or ``None``.

    Writing the phase cochain as ``beta / (n |G|)`` clears every denominator a
    trivializing U(1) cochain can need, so the question becomes the integer
    system ``d beta = |G| w (mod n |G|)``.  The returned witness has modulus
    ``n |G|``.
    """
    _require_cocycle(c)
    big = c.modulus * c.group.order
    try:
        beta = _solve_delta(c.group, c.values * c.group.order, big)
    except NotACoboundary:
        return None
    return CoboundaryWitness(beta % big, big)


def is_u1_trivial(c: ZnCocycle2) -> bool:
    return u1_witness(c) is not None


def compute_h2(group: FiniteGroup) -> H2Result:
    """H^2(G, U(1)) from the torsion of the integer cokernel of delta2.

    With ``d2 V = U D`` the column ``V e_i`` of a factor ``d_i > 1`` is an
    integer cochain whose coboundary is divisible by ``d_i``; scaled by
    ``|G| / d_i`` it is a Z_|G| cocycle generating that factor.
    """
    N = group.order
    if N > H2_MAX_ORDER:
        raise OrderTooLarge(f"|G| = {N} exceeds {H2_MAX_ORDER}")
    if N == 1:
        return H2Result(group, [], [])
    form = smith_normal_form(delta2_matrix(group), track_u=False, track_v=True)
    ne = _nonidentity(group)
    k = len(ne)
    factors, reps = [], []
    for i, d in enumerate(form.diagonal):
        d = abs(int(d))
        if d <= 1:
            continue
        col = np.asarray(form.V[:, i], dtype=object) * (N // d) % N
        values = np.zeros((N, N), dtype=np.int64)
        values[np.ix_(ne, ne)] = col.astype(np.int64).reshape(k, k)
        rep = ZnCocycle2(group, N, values)
        factors.append(d)
        reps.append(rep)
    return H2Result(group, factors, reps)


def class_coordinates(c: ZnCocycle2, h2: Optional[H2Result] = None) -> tuple:
    """Coordinates of the U(1) class of ``c`` in the invariant-factor basis."""
    _require_cocycle(c)
    if h2 is None:
        h2 = compute_h2(c.group)
    if h2.group is not c.group:
        raise GroupMismatch("H2Result belongs to another group")
    m = lcm(c.modulus, c.group.order)
    target = c.rescale(m)
    reps = [r.rescale(m) for r in h2.representatives]
    for coords in itertools.product(*(range(d) for d in h2.invariant_factors)):
        shifted = target
        for k, r in zip(coords, reps):
            shifted = shifted - r.scaled(k)
        if is_u1_trivial(shifted):
            return tuple(coords)
    raise ArithmeticError("class not found; invariant factors incomplete")  # pragma: no cover


def same_u1_class(a: ZnCocycle2, b: ZnCocycle2) -> bool:
    return is_u1_trivial(a - b)


def pullback(s: GroupHom, c: ZnCocycle2) -> ZnCocycle2:
    if s.target is not c.group and not np.array_equal(s.target.table, c.group.table):
        raise GroupMismatch("homomorphism target is not the cocycle's group")
    m = s.map
    return ZnCocycle2(s.source, c.modulus, c.values[m[:, None], m[None, :]])


def value_group_order(c: ZnCocycle2) -> int:
    """Order of the subgroup of Z_n generated by the cocycle's values."""
    g = gcd(int(np.gcd.reduce(c.values.ravel())), c.modulus)
    return c.modulus // g


def trivializing_extension(group: FiniteGroup, c: ZnCocycle2):
    """Central extension on which ``c`` pulls back to a Z_n-coboundary.

    Non-coboundaries are extended by their value group Z_m with the cocycle
    read in Z_m; on the total group ``beta(a, g) = -a n/m`` trivializes the
    pullback.  Coboundaries give the direct product with Z_n and the pulled
    back witness.
    """
    if c.group is not group:
        raise GroupMismatch("cocycle lives on another group")
    _require_cocycle(c)
    n = c.modulus
    try:
        w = coboundary_witness(c)
    except NotACoboundary:
        w = None
    if w is not None:
        seq = central_extension(group, n, zero_cocycle(group, n))
        beta = w.beta[seq.projection.map]
        return seq, CoboundaryWitness(beta % n, n)
    m = value_group_order(c)
    seq = central_extension(group, m, ZnCocycle2(group, m, c.values // (n // m)))
    a = np.arange(seq.total.order) % m
    beta = (-a * (n // m)) % n
    witness = CoboundaryWitness(beta, n)
    assert np.array_equal(coboundary(seq.total, n, beta).values,
                          pullback(seq.projection, c).values)
    return seq, witness
