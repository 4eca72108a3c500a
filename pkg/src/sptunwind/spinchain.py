"""Dense state vectors on chains of qudit registers.

Sites are numbered ``1..L`` and site 1 is odd.  A *slot* is a pair
``(site, label)`` naming one register; amplitudes are stored row-major over
the layout's slots in order (site 1 registers first, in declared order, then
site 2, ...).  Operators act through index arithmetic on the amplitude
tensor, never through full Kronecker products.

Antiunitary symmetries are written ``U K``: complex-conjugate the amplitudes
in the product basis, then apply the on-site unitaries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse.linalg as spla

from .errors import DimensionTooLarge, LayoutMismatch, OverlappingBonds

MAX_STATE_DIM = 2 ** 20
MAX_DIAG_DIM = 2 ** 16
DENSE_DIAG_DIM = 4096
NORM_TOL = 1e-10
UNITARY_TOL = 1e-9
SCHMIDT_CUTOFF = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


@dataclass(frozen=True)
class ChainLayout:
    sites: int
    slots: tuple  # ((site, label, dim), ...) in amplitude order
    boundary: str = "periodic"

    def __post_init__(self):
        if self.sites < 1:
            raise ValueError("need at least one site")
        if self.boundary not in ("periodic", "open"):
            raise ValueError("boundary must be 'periodic' or 'open'")
        seen = set()
        for site, label, dim in self.slots:
            if not 1 <= site <= self.sites:
                raise ValueError(f"slot site {site} outside 1..{self.sites}")
            if (site, label) in seen:
                raise ValueError(f"duplicate register {(site, label)}")
            if dim < 1:
                raise ValueError("register dimension must be positive")
            seen.add((site, label))
        index = {(s, l): i for i, (s, l, _) in enumerate(self.slots)}
        object.__setattr__(self, "_index", index)

    @classmethod
    def uniform(cls, sites: int, registers: Sequence, boundary: str = "periodic",
                extra: Optional[dict] = None) -> "ChainLayout":
        """Same registers on every site; ``extra`` maps site -> additional registers."""
        extra = extra or {}
        slots = []
        for k in range(1, sites + 1):
            for label, dim in list(registers) + list(extra.get(k, ())):
                slots.append((k, label, int(dim)))
        return cls(sites, tuple(slots), boundary)

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    @property
    def dims(self) -> tuple:
        return tuple(d for _, _, d in self.slots)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=object))

    def index(self, slot) -> int:
        try:
            return self._index[tuple(slot)]
        except KeyError:
            raise LayoutMismatch(f"register {slot} not in layout") from None

    def dim(self, slot) -> int:
        return self.slots[self.index(slot)][2]

    def has(self, slot) -> bool:
        return tuple(slot) in self._index

    def next_site(self, k: int) -> Optional[int]:
        """Site to the right of ``k``; ``None`` past the end of an open chain."""
        if k < self.sites:
            return k + 1
        return 1 if self.periodic else None

    def site_slots(self, k: int) -> list:
        return [(s, l) for s, l, _ in self.slots if s == k]

    def describe(self) -> dict:
        return {"sites": self.sites, "boundary": self.boundary,
                "slots": [[s, l, d] for s, l, d in self.slots]}


def _apply(tensor: np.ndarray, axes: Sequence[int], matrix: np.ndarray) -> np.ndarray:
    """Apply ``matrix`` to the given tensor axes (extra trailing axes are batch)."""
    k = len(axes)
    sub = [tensor.shape[a] for a in axes]
    m = matrix.reshape(sub + sub)
    out = np.tensordot(m, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


@dataclass(frozen=True, eq=False)
class PureState:
    layout: ChainLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).ravel()
        if a.size != self.layout.total_dim:
            raise LayoutMismatch("amplitude count does not match the layout")
        if abs(np.linalg.norm(a) - 1) > NORM_TOL:
            raise ValueError("state is not normalized")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    def overlap(self, other: "PureState") -> complex:
        if other.layout != self.layout:
            raise LayoutMismatch("states live on different layouts")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "PureState") -> float:
        """Phase-insensitive overlap ``|<a|b>|``."""
        return abs(self.overlap(other))


@dataclass(frozen=True, eq=False)
class LocalOperator:
    support: tuple
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        sup = tuple(tuple(s) for s in self.support)
        if len(set(sup)) != len(sup):
            raise ValueError("support slots must be distinct")
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrix must be square")
        m.setflags(write=False)
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "matrix", m)

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        m = self.matrix
        return bool(np.max(np.abs(m.conj().T @ m - np.eye(len(m)))) <= tol)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def check(self, layout: ChainLayout):
        dims = [layout.dim(s) for s in self.support]
        if int(np.prod(dims)) != self.matrix.shape[0]:
            raise LayoutMismatch(f"operator {self.name or self.support} has the wrong dimension")


def apply_operator(op: LocalOperator, psi: PureState, normalize: bool = False) -> PureState:
    op.check(psi.layout)
    axes = [psi.layout.index(s) for s in op.support]
    out = _apply(psi.tensor(), axes, op.matrix).ravel()
    if normalize:
        out = out / np.linalg.norm(out)
    return PureState(psi.layout, out)


@dataclass(frozen=True, eq=False)
class SymmetryOperator:
    """On-site product of unitaries, optionally followed by complex conjugation.

    ``factors`` maps slot -> unitary; slots not listed carry the identity.
    The antiunitary case acts as ``psi -> U psi*``.
    """

    factors: dict
    antiunitary: bool = False
    name: str = ""

    def __post_init__(self):
        fac = {}
        for slot, m in self.factors.items():
            m = np.asarray(m, dtype=complex)
            if np.max(np.abs(m.conj().T @ m - np.eye(len(m)))) > UNITARY_TOL:
                raise ValueError(f"factor on {slot} is not unitary")
            m.setflags(write=False)
            fac[tuple(slot)] = m
        object.__setattr__(self, "factors", fac)

    def restrict(self, support, layout: ChainLayout) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for slot in support:
            m = self.factors.get(tuple(slot))
            out = np.kron(out, m if m is not None else np.eye(layout.dim(slot)))
        return out

    def square_factors(self) -> dict:
        """Per-slot ``U U*`` (antiunitary) or ``U U`` (unitary)."""
        return {s: (m @ m.conj() if self.antiunitary else m @ m) for s, m in self.factors.items()}


@dataclass(frozen=True, eq=False)
class LieGenerator:
    """Hermitian generator ``sum_slot h_slot`` of a continuous symmetry."""

    terms: dict
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "terms",
                           {tuple(s): np.asarray(h, dtype=complex) for s, h in self.terms.items()})

    def restrict(self, support, layout: ChainLayout) -> np.ndarray:
        dims = [layout.dim(s) for s in support]
        total = int(np.prod(dims))
        out = np.zeros((total, total), dtype=complex)
        for i, slot in enumerate(support):
            h = self.terms.get(tuple(slot))
            if h is None:
                continue
            left = int(np.prod(dims[:i]))
            right = int(np.prod(dims[i + 1:]))
            out += np.kron(np.kron(np.eye(left), h), np.eye(right))
        return out


Symmetry = Union[SymmetryOperator, LieGenerator]


def onsite_symmetry(layout: ChainLayout, factor, antiunitary: bool = False,
                    name: str = "") -> SymmetryOperator:
    """Build a symmetry from ``factor(site, label) -> matrix or None`` (or a label dict)."""
    if isinstance(factor, dict):
        table = factor
        factor = lambda site, label: table.get(label)  # noqa: E731
    facs = {}
    for site, label, _ in layout.slots:
        m = factor(site, label)
        if m is not None:
            facs[(site, label)] = m
    return SymmetryOperator(facs, antiunitary, name)


def total_spin(layout: ChainLayout, axis: int, labels=None) -> LieGenerator:
    """``sum sigma^axis / 2`` over all spin-1/2 registers (optionally a label subset)."""
    s = PAULIS[axis] / 2
    terms = {(site, label): s for site, label, dim in layout.slots
             if dim == 2 and (labels is None or label in labels)}
    return LieGenerator(terms, name="S" + "xyz"[axis])


def apply_symmetry(s: SymmetryOperator, psi: PureState) -> PureState:
    layout = psi.layout
    for slot, m in s.factors.items():
        if layout.dim(slot) != m.shape[0]:
            raise LayoutMismatch(f"factor on {slot} has the wrong dimension")
    t = psi.tensor()
    if s.antiunitary:
        t = t.conj()
    for slot, m in s.factors.items():
        t = _apply(t, [layout.index(slot)], m)
    return PureState(layout, t.ravel())


def apply_lie(h: LieGenerator, psi: PureState) -> np.ndarray:
    """``h |psi>`` as a raw vector (not normalized)."""
    t = psi.tensor()
    out = np.zeros_like(t)
    for slot, m in h.terms.items():
        out += _apply(t, [psi.layout.index(slot)], m)
    return out.ravel()


@dataclass(frozen=True, eq=False)
class CircuitLayer:
    gates: tuple

    def __post_init__(self):
        gates = tuple(self.gates)
        used = set()
        for g in gates:
            overlap = used & set(g.support)
            if overlap:
                raise OverlappingBonds(f"gates overlap on {sorted(overlap)}")
            used |= set(g.support)
            if not g.is_unitary():
                raise ValueError(f"gate {g.name or g.support} is not unitary")
        object.__setattr__(self, "gates", gates)

    def support(self) -> set:
        return {s for g in self.gates for s in g.support}


@dataclass(frozen=True, eq=False)
class Circuit:
    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(
            l if isinstance(l, CircuitLayer) else CircuitLayer(tuple(l)) for l in self.layers))

    @property
    def depth(self) -> int:
        return len(self.layers)


def apply_layer(layer: CircuitLayer, psi: PureState) -> PureState:
    t = psi.tensor()
    for g in layer.gates:
        g.check(psi.layout)
        t = _apply(t, [psi.layout.index(s) for s in g.support], g.matrix)
    return PureState(psi.layout, t.ravel())


def apply_circuit(circuit: Circuit, psi: PureState) -> PureState:
    """Apply the layers in order: the first layer acts first."""
    for layer in circuit.layers:
        psi = apply_layer(layer, psi)
    return psi


# ---------------------------------------------------------------- commutators

def _max_phase_product_deviation(eigenvalue_sets) -> float:
    """``max |prod_i lambda_i - 1|`` over one eigenvalue from each set."""
    angles = np.zeros(1)
    for eigs in eigenvalue_sets:
        a = np.unique(np.round(np.angle(eigs), 12))
        angles = np.unique(np.round(np.mod(angles[:, None] + a[None, :], 2 * np.pi), 12))
    return float(np.max(np.abs(np.exp(1j * angles) - 1)))


def _conjugated(s: SymmetryOperator, support, matrix, layout) -> np.ndarray:
    """``s M s^-1`` restricted to the support (``U M* U^dagger`` if antiunitary)."""
    u = s.restrict(support, layout)
    m = matrix.conj() if s.antiunitary else matrix
    return u @ m @ u.conj().T


def commutator_norm(op: Union[LocalOperator, CircuitLayer], s: Symmetry,
                    layout: ChainLayout) -> float:
    """Spectral norm of ``s op - op s`` on the full chain.

    A single operator is handled densely on its support.  A layer ``W`` of
    disjoint unitaries uses ``||s W - W s|| = ||prod_i u_i - 1||`` with
    ``u_i = g_i^dagger (s g_i s^-1)``, whose spectrum is the set of products of
    the local spectra.  For a generator ``h = sum h_r`` the defect
    ``W h W^dagger - h`` is a sum of commuting local Hermitian pieces.
    """
    if isinstance(op, LocalOperator):
        op.check(layout)
        m = op.matrix
        if isinstance(s, LieGenerator):
            h = s.restrict(op.support, layout)
            return float(np.linalg.norm(m @ h - h @ m, 2))
        return float(np.linalg.norm(_conjugated(s, op.support, m, layout) - m, 2))
    if isinstance(s, LieGenerator):
        hi, lo = 0.0, 0.0
        for g in op.gates:
            h = s.restrict(g.support, layout)
            x = g.matrix @ h @ g.matrix.conj().T - h
            ev = np.linalg.eigvalsh((x + x.conj().T) / 2)
            hi += ev[-1]
            lo += ev[0]
        return float(max(abs(hi), abs(lo)))
    sets = []
    for g in op.gates:
        u = g.matrix.conj().T @ _conjugated(s, g.support, g.matrix, layout)
        sets.append(np.linalg.eigvals(u))
    # slots the symmetry touches outside every gate cancel in s W s^-1
    return _max_phase_product_deviation(sets)


def _full_matrix(layout: ChainLayout, apply) -> np.ndarray:
    dim = layout.total_dim
    eye = np.eye(dim, dtype=complex).reshape(layout.dims + (dim,))
    return apply(eye).reshape(dim, dim)


def operator_matrix(op: Union[LocalOperator, CircuitLayer], layout: ChainLayout) -> np.ndarray:
    gates = [op] if isinstance(op, LocalOperator) else op.gates

    def run(t):
        for g in gates:
            t = _apply(t, [layout.index(s) for s in g.support], g.matrix)
        return t
    return _full_matrix(layout, run)


def commutator_norm_dense(op, s: Symmetry, layout: ChainLayout,
                          max_dim: int = 2 ** 10) -> float:
    """Reference route: build every operator on the full space."""
    if layout.total_dim > max_dim:
        raise DimensionTooLarge(f"dense commutator limited to {max_dim}")
    W = operator_matrix(op, layout)
    if isinstance(s, LieGenerator):
        def run(t):
            out = np.zeros_like(t)
            for slot, h in s.terms.items():
                out += _apply(t, [layout.index(slot)], h)
            return out
        H = _full_matrix(layout, run)
        return float(np.linalg.norm(W @ H - H @ W, 2))

    def run(t):
        for slot, m in s.factors.items():
            t = _apply(t, [layout.index(slot)], m)
        return t
    U = _full_matrix(layout, run)
    Wc = W.conj() if s.antiunitary else W
    return float(np.linalg.norm(U @ Wc - W @ U, 2))


def symmetry_deviation(s: Symmetry, psi: PureState) -> float:
    """``1 - |<psi|s psi>|`` for group elements, ``||(h - <h>) psi||`` for generators."""
    if isinstance(s, LieGenerator):
        v = apply_lie(s, psi)
        mean = np.vdot(psi.amplitudes, v)
        return float(np.linalg.norm(v - mean * psi.amplitudes))
    return 1.0 - psi.fidelity(apply_symmetry(s, psi))


# ---------------------------------------------------------------- fixed points

def chi_state(J: int, pairing: str = "omega") -> np.ndarray:
    """Maximally entangled pair on two J-level registers, flattened (first register major).

    ``omega``: ``sum_i |i i> / sqrt(J)``; ``singlet`` and ``triplet`` are the
    J=2 states ``(|01> -+ |10>) / sqrt 2``.
    """
    if J < 2:
        raise ValueError("J must be at least 2")
    if pairing == "omega":
        return np.eye(J, dtype=complex).ravel() / np.sqrt(J)
    if J != 2:
        raise ValueError(f"{pairing} pairing needs J = 2")
    v = np.zeros(4, dtype=complex)
    v[1] = 1 / np.sqrt(2)
    v[2] = (-1 if pairing == "singlet" else 1) / np.sqrt(2)
    if pairing not in ("singlet", "triplet"):
        raise ValueError(f"unknown pairing {pairing!r}")
    return v


def schmidt_values(vec: np.ndarray) -> np.ndarray:
    n = int(round(np.sqrt(vec.size)))
    s = np.linalg.svd(vec.reshape(n, -1), compute_uv=False)
    return s[s > SCHMIDT_CUTOFF]


@dataclass(frozen=True)
class Bond:
    first: tuple
    second: tuple
    vector: np.ndarray = field(repr=False)


def projector_term(bond: Bond) -> LocalOperator:
    v = np.asarray(bond.vector, dtype=complex)
    return LocalOperator((bond.first, bond.second), -np.outer(v, v.conj()),
                         name=f"-|chi><chi| {bond.first}{bond.second}")


def bond_pattern(layout: ChainLayout, left: str, right: str, vector,
                 offset: int = 1, parity: Optional[str] = None) -> list:
    """Bonds ``(left_k, right_{k+offset})`` for every site ``k`` with both ends present.

    ``offset=0`` gives on-site pairs.  ``parity`` restricts ``k`` to odd or
    even sites.  On an open chain bonds that would wrap are skipped.
    """
    bonds = []
    for k in range(1, layout.sites + 1):
        if parity == "odd" and k % 2 == 0 or parity == "even" and k % 2 == 1:
            continue
        j = k if offset == 0 else layout.next_site(k)
        if j is None:
            continue
        a, b = (k, left), (j, right)
        if layout.has(a) and layout.has(b):
            bonds.append(Bond(a, b, np.asarray(vector, dtype=complex)))
    return bonds


def product_state(layout: ChainLayout, bonds: Sequence[Bond],
                  singles: Optional[dict] = None) -> PureState:
    """Tensor product of bond states (and single-register states) in layout order."""
    singles = singles or {}
    used = []
    for b in bonds:
        used += [b.first, b.second]
    used += list(singles)
    if len(set(used)) != len(used):
        dup = sorted({s for s in used if used.count(s) > 1})
        raise OverlappingBonds(f"registers used twice: {dup}")
    missing = [(s, l) for s, l, _ in layout.slots if (s, l) not in set(used)]
    if missing:
        raise OverlappingBonds(f"registers left unpaired: {missing}")
    if layout.total_dim > MAX_STATE_DIM:
        raise DimensionTooLarge(f"{layout.total_dim} amplitudes exceed {MAX_STATE_DIM}")
    t = np.ones((), dtype=complex)
    order = []
    for b in bonds:
        da, db = layout.dim(b.first), layout.dim(b.second)
        t = np.multiply.outer(t, np.asarray(b.vector).reshape(da, db))
        order += [b.first, b.second]
    for slot, v in singles.items():
        t = np.multiply.outer(t, np.asarray(v, dtype=complex))
        order.append(slot)
    perm = [order.index((s, l)) for s, l, _ in layout.slots]
    t = np.transpose(t, perm)
    return PureState(layout, t.ravel())


def build_fixed_point(layout: ChainLayout, bonds: Sequence[Bond]):
    """Dimer product state and its commuting-projector parent Hamiltonian."""
    return product_state(layout, bonds), [projector_term(b) for b in bonds]


def two_body_terms(bonds: Sequence[Bond], matrix: np.ndarray, name: str = "") -> list:
    return [LocalOperator((b.first, b.second), matrix, name=name) for b in bonds]


# ---------------------------------------------------------------- diagnostics

def _block_axes(layout: ChainLayout, start: int, length: int) -> list:
    sites = {(start - 1 + i) % layout.sites + 1 for i in range(length)}
    return [i for i, (s, _, _) in enumerate(layout.slots) if s in sites]


def schmidt_profile(psi: PureState, start: int, length: int) -> np.ndarray:
    """Schmidt values between sites ``start..start+length-1`` (wrapping) and the rest."""
    layout = psi.layout
    if not 1 <= length < layout.sites:
        raise ValueError("block must be a proper nonempty set of sites")
    if not layout.periodic and start + length - 1 > layout.sites:
        raise ValueError("block wraps around an open chain")
    axes = _block_axes(layout, start, length)
    rest = [i for i in range(len(layout.slots)) if i not in axes]
    t = np.transpose(psi.tensor(), axes + rest)
    dA = int(np.prod([layout.dims[i] for i in axes]))
    s = np.linalg.svd(t.reshape(dA, -1), compute_uv=False)
    return s[s >= SCHMIDT_CUTOFF]


def find_rank1_cut(psi: PureState) -> Optional[tuple]:
    """First contiguous block ``(start, length)`` with Schmidt rank 1, if any."""
    layout = psi.layout
    for length in range(1, layout.sites):
        last = layout.sites if layout.periodic else layout.sites - length + 1
        for start in range(1, last + 1):
            if len(schmidt_profile(psi, start, length)) == 1:
                return start, length
    return None


def hamiltonian_operator(terms: Sequence[LocalOperator], layout: ChainLayout):
    """Dense matrix (small spaces) or a scipy LinearOperator for ``sum terms``."""
    dim = layout.total_dim
    if dim > MAX_DIAG_DIM:
        raise DimensionTooLarge(f"dimension {dim} exceeds {MAX_DIAG_DIM}")
    for t in terms:
        t.check(layout)
    prepared = [([layout.index(s) for s in t.support], t.matrix) for t in terms]

    def run(x):
        x = np.asarray(x, dtype=complex)
        batch = x.shape[1:] if x.ndim > 1 else ()
        tensor = x.reshape(layout.dims + batch)
        out = np.zeros_like(tensor)
        for axes, m in prepared:
            out += _apply(tensor, axes, m)
        return out.reshape(x.shape)

    if dim <= DENSE_DIAG_DIM:
        return run(np.eye(dim, dtype=complex))
    return spla.LinearOperator((dim, dim), matvec=run, matmat=run, dtype=complex)


def low_spectrum(terms: Sequence[LocalOperator], layout: ChainLayout, k: int = 8) -> np.ndarray:
    H = hamiltonian_operator(terms, layout)
    if isinstance(H, np.ndarray):
        return np.linalg.eigvalsh((H + H.conj().T) / 2)[:k]
    return np.sort(spla.eigsh(H, k=k, which="SA", return_eigenvectors=False))


def ground_degeneracy(terms: Sequence[LocalOperator], layout: ChainLayout,
                      tolerance: float = 1e-8) -> int:
    k = 8
    while True:
        ev = low_spectrum(terms, layout, k)
        count = int(np.sum(ev - ev[0] <= tolerance))
        if count < len(ev) or len(ev) >= layout.total_dim - 1:
            return count
        k *= 2


def spectral_gap(terms: Sequence[LocalOperator], layout: ChainLayout,
                 tolerance: float = 1e-8) -> float:
    """Distance from the ground level to the next distinct level."""
    ev = low_spectrum(terms, layout, 16)
    above = ev[ev - ev[0] > tolerance]
    return float(above[0] - ev[0]) if len(above) else float("inf")


# ---------------------------------------------------------------- Hamiltonian algebra

def _clock_shift_basis(d: int) -> np.ndarray:
    """``X^a Z^b`` for ``a, b < d`` (index ``a*d + b``), orthogonal with norm ``d``."""
    X = np.roll(np.eye(d), 1, axis=0)
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    out = np.empty((d * d, d, d), dtype=complex)
    for a in range(d):
        for b in range(d):
            out[a * d + b] = np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b)
    return out


_BASES: dict = {}


def _basis(d: int) -> np.ndarray:
    if d not in _BASES:
        _BASES[d] = _clock_shift_basis(d)
    return _BASES[d]


def _embed(matrix, support, new_support, layout) -> np.ndarray:
    """Matrix on ``support`` extended by identities to ``new_support``."""
    dims = tuple(layout.dim(s) for s in new_support)
    D = int(np.prod(dims))
    eye = np.eye(D, dtype=complex).reshape(dims + (D,))
    axes = [list(new_support).index(s) for s in support]
    return _apply(eye, axes, matrix).reshape(D, D)


def _drop_identity_slots(support, matrix, layout, tol=1e-12):
    support = list(support)
    i = 0
    while i < len(support) and len(support) > 0:
        dims = [layout.dim(s) for s in support]
        d = dims[i]
        t = matrix.reshape(dims + dims)
        k = len(dims)
        reduced = np.trace(t, axis1=i, axis2=k + i) / d
        rest = support[:i] + support[i + 1:]
        rebuilt = _embed(reduced.reshape(int(np.prod(dims)) // d, -1), rest, support, layout) \
            if rest else np.eye(d) * reduced
        if np.max(np.abs(rebuilt - matrix), initial=0) <= tol * max(1.0, np.max(np.abs(matrix))):
            support = rest
            matrix = reduced.reshape(int(np.prod(dims)) // d, -1) if rest else reduced.reshape(1, 1)
        else:
            i += 1
    return tuple(support), matrix


def conjugate_term(term: LocalOperator, circuit: Circuit, layout: ChainLayout) -> LocalOperator:
    """``W t W^dagger`` on its light cone, trimmed to minimal support."""
    support, m = tuple(term.support), term.matrix
    for layer in circuit.layers:
        touching = [g for g in layer.gates if set(g.support) & set(support)]
        if not touching:
            continue
        new_support = list(support)
        for g in touching:
            new_support += [s for s in g.support if s not in new_support]
        new_support = sorted(new_support, key=layout.index)
        m = _embed(m, support, new_support, layout)
        G = np.eye(len(m), dtype=complex)
        for g in touching:
            G = _embed(g.matrix, g.support, new_support, layout) @ G
        m = G @ m @ G.conj().T
        support, m = _drop_identity_slots(new_support, m, layout)
    return LocalOperator(support, m, name=term.name)


def operator_expansion(terms: Sequence[LocalOperator], layout: ChainLayout,
                       cutoff: float = 1e-14) -> dict:
    """Unique expansion of ``sum terms`` in clock-shift strings.

    Keys are tuples of ``(layout index, basis index)`` over the registers
    where the string is not the identity; the all-identity key is ``()``.
    """
    out: dict = {}
    for term in terms:
        term.check(layout)
        support = sorted(term.support, key=layout.index)
        m = _embed(term.matrix, term.support, support, layout) if list(support) != list(term.support) \
            else term.matrix
        dims = [layout.dim(s) for s in support]
        k = len(dims)
        t = m.reshape(dims + dims)
        # c[p1..pk] = Tr(P^dagger t) / D with P = P1 x ... x Pk
        for j in range(k):
            B = _basis(dims[j]).conj() / dims[j]
            # axes are (p_0..p_{j-1}, o_j..o_{k-1}, i_j..i_{k-1}): o_j sits at j, i_j at k
            t = np.tensordot(B, t, axes=([1, 2], [j, k]))
            t = np.moveaxis(t, 0, j)
        flat = t.reshape(-1)
        idx = [layout.index(s) for s in support]
        for pos in np.flatnonzero(np.abs(flat) > cutoff):
            multi = np.unravel_index(pos, [d * d for d in dims])
            key = tuple((i, int(p)) for i, p in zip(idx, multi) if p != 0)
            out[key] = out.get(key, 0) + flat[pos]
    return out


def hamiltonian_residual(a: Sequence[LocalOperator], b: Sequence[LocalOperator],
                         layout: ChainLayout) -> float:
    """Largest coefficient difference between two Hamiltonians in the string basis."""
    ea, eb = operator_expansion(a, layout), operator_expansion(b, layout)
    keys = set(ea) | set(eb)
    return float(max((abs(ea.get(k, 0) - eb.get(k, 0)) for k in keys), default=0.0))


def conjugate_hamiltonian(terms: Sequence[LocalOperator], circuit: Circuit,
                          layout: ChainLayout) -> list:
    return [conjugate_term(t, circuit, layout) for t in terms]
