"""Unitary matrix representations and their factor systems."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cohomology import ZnCocycle2, coboundary_witness, pullback
from .errors import ClassMismatch, GroupMismatch, NotACoboundary, NotProjective, PhaseOffGrid
from .groups import FiniteGroup, ShortExactSequence

UNITARY_TOL = 1e-9
SCALAR_TOL = 1e-8
PHASE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class UnitaryRep:
    """Matrices indexed by group element; projective unless proven otherwise."""

    group: FiniteGroup
    matrices: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrices, dtype=complex)
        if m.ndim != 3 or m.shape[0] != self.group.order or m.shape[1] != m.shape[2]:
            raise ValueError("matrices must have shape (|G|, dim, dim)")
        d = m.shape[1]
        if np.max(np.abs(m[self.group.identity] - np.eye(d))) > UNITARY_TOL:
            raise ValueError("identity element must map to the identity matrix")
        gram = np.einsum("gji,gjk->gik", m.conj(), m)
        if np.max(np.abs(gram - np.eye(d))) > UNITARY_TOL:
            raise ValueError("representation matrices must be unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrices", m)

    @property
    def dim(self) -> int:
        return int(self.matrices.shape[1])

    def __getitem__(self, g: int) -> np.ndarray:
        return self.matrices[g]

    def homomorphism_defect(self) -> float:
        """Largest entry of ``V(g)V(h) - V(gh)`` over all pairs."""
        m, t = self.matrices, self.group.table
        prods = np.einsum("gij,hjk->ghik", m, m)
        return float(np.max(np.abs(prods - m[t])))


@dataclass(frozen=True, eq=False)
class FactorSystem:
    rep: UnitaryRep
    cocycle: ZnCocycle2


def _defects(rep: UnitaryRep) -> np.ndarray:
    """``V(g) V(h) V(gh)^dagger`` for all pairs, shape ``(|G|, |G|, d, d)``."""
    m, t = rep.matrices, rep.group.table
    prods = np.einsum("gij,hjk->ghik", m, m)
    return np.einsum("ghij,ghkj->ghik", prods, m[t].conj())


def factor_system(rep: UnitaryRep, n: int) -> FactorSystem:
    """Read ``V(g)V(h) = exp(2 pi i w(g,h)/n) V(gh)`` off the matrices."""
    d = _defects(rep)
    dim = rep.dim
    diag = np.einsum("ghii->ghi", d)
    off = d - np.einsum("ghi,ij->ghij", diag, np.eye(dim))
    off_norm = np.linalg.norm(off, axis=(2, 3))
    spread = np.max(np.abs(diag - diag[:, :, :1]), axis=2)
    bad = np.argwhere((off_norm >= SCALAR_TOL) | (spread >= SCALAR_TOL))
    if len(bad):
        pair = tuple(int(x) for x in bad[0])
        raise NotProjective(f"defect at pair {pair} is not a scalar", pair=pair)
    phase = diag[:, :, 0]
    k = np.rint(np.angle(phase) * n / (2 * np.pi)).astype(np.int64)
    err = np.abs(phase - np.exp(2j * np.pi * k / n))
    bad = np.argwhere(err > PHASE_TOL)
    if len(bad):
        pair = tuple(int(x) for x in bad[0])
        raise PhaseOffGrid(f"phase at pair {pair} is not an {n}-th root of unity", pair=pair)
    return FactorSystem(rep, ZnCocycle2(rep.group, n, k % n))


def conjugate_class(f: FactorSystem) -> FactorSystem:
    rep = UnitaryRep(f.rep.group, f.rep.matrices.conj())
    return FactorSystem(rep, -f.cocycle)


def tensor_rep(a: UnitaryRep, b: UnitaryRep) -> UnitaryRep:
    if a.group is not b.group:
        raise GroupMismatch("representations of different groups")
    mats = np.einsum("gij,gkl->gikjl", a.matrices, b.matrices)
    n = a.dim * b.dim
    return UnitaryRep(a.group, mats.reshape(a.group.order, n, n))


def tensor_class(a: FactorSystem, b: FactorSystem) -> ZnCocycle2:
    if a.cocycle.group is not b.cocycle.group:
        raise GroupMismatch("factor systems of different groups")
    return a.cocycle + b.cocycle


def lift_to_extension(f: FactorSystem, seq: ShortExactSequence) -> UnitaryRep:
    """Linear representation of ``seq.total`` lifting the projective rep ``f``.

    When the extension was built from the same phases as ``f`` the section
    ``(a, g) -> exp(2 pi i a/m) V(g)`` is used directly.  Otherwise a witness
    ``beta`` of the pulled back cocycle supplies ``W(x) = exp(-2 pi i beta(x)/n) V(s(x))``.
    """
    c = f.cocycle
    if seq.quotient is not c.group:
        raise GroupMismatch("extension quotient is not the representation's group")
    n = c.modulus
    proj = seq.projection.map
    V = f.rep.matrices[proj]
    m = seq.modulus
    if m is not None and n % m == 0 and seq.cocycle_values is not None \
            and np.array_equal((seq.cocycle_values * (n // m)) % n, c.values):
        a = np.arange(seq.total.order) % m
        phases = np.exp(2j * np.pi * a / m)
    else:
        try:
            w = coboundary_witness(pullback(seq.projection, c))
        except NotACoboundary as exc:
            raise ClassMismatch("cocycle does not trivialize on this extension") from exc
        phases = np.exp(-2j * np.pi * w.beta / n)
    return UnitaryRep(seq.total, phases[:, None, None] * V)


def detect_factor_system(rep: UnitaryRep, max_modulus: Optional[int] = None) -> FactorSystem:
    """Factor system over the smallest ``Z_n`` whose roots of unity carry all phases."""
    limit = max_modulus or 2 * rep.group.order
    for n in range(1, limit + 1):
        try:
            return factor_system(rep, n)
        except PhaseOffGrid:
            continue
    raise PhaseOffGrid(f"phases are not roots of unity of order up to {limit}")
