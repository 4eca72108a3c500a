"""Quadratic Majorana chains, Gaussian operators and the fermionic unwinding circuits.

Conventions
-----------
A Hamiltonian is stored as a real antisymmetric matrix ``A`` with
``H = (i/4) gamma^T A gamma``.  A term ``i gamma_m gamma_n`` contributes
``A[m, n] = 2`` and ``A[n, m] = -2``.  Worked two-mode example: ``H = i c d``
has ``A = [[0, 2], [-2, 0]]``, eigenvalues ``+-1``, and ground state with
``i c d = -1``.

A Gaussian operator ``U`` acts on modes by ``U gamma_k U^-1 = sum_l R[l, k] gamma_l``.
Products compose as ``R(U1 U2) = R(U1) R(U2)``.  The exponential
``exp(alpha gamma_m gamma_n)`` rotates the ``(m, n)`` plane by ``2 alpha``:
``gamma_m -> cos(2 alpha) gamma_m - sin(2 alpha) gamma_n``.  More generally
``exp((1/4) gamma^T Theta gamma)`` has ``R = expm(Theta)``.

Complex conjugation ``K`` fixes ``c`` modes and flips ``d`` modes.  Because
``K i K = -i``, conjugating ``H`` by an antiunitary operator maps
``(i/4) gamma^T A gamma`` to ``(-i/4) (R gamma)^T A (R gamma)``, that is
``A -> -R A R^T``.  The dense oracle in :mod:`sptunwind.jordan_wigner`
checks this rule.

Sites are numbered ``1..L``.  Periodic chains close the last bond with the
same sign as the bulk bonds.  The Majorana operators here are global fermion
operators, so no boundary sector enters; every fixed-point model below has an
invertible ``A`` and hence a unique ground state.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import LayoutMismatch, NotFixedPoint, UnknownSymbol, UnsupportedCombination

ORTHOGONAL_TOL = 1e-10
COMMUTATOR_TOL = 1e-10
RESIDUAL_TOL = 1e-10
FIDELITY_TOL = 1e-10
UNWIND_ANGLES = (math.pi / 7, math.pi / 3, 1.0)

UP, DOWN = 0, 1


@dataclass(frozen=True)
class MajoranaLayout:
    """Majorana modes indexed by ``(site, layer, flavor)``.

    ``flavors[k - 1]`` lists the flavors of site ``k`` in order; each layer of a
    site carries the same flavors.  Flavors come in ``(c_a, d_a)`` pairs so
    consecutive mode indices ``2j, 2j + 1`` form complex fermion ``j``.
    """

    sites: int
    layers: int
    flavors: tuple
    boundary: str = "periodic"
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.flavors) != self.sites:
            raise ValueError("one flavor list per site")
        index = {}
        for k, fl in enumerate(self.flavors, start=1):
            if len(fl) % 2 or any(fl[i][0] != "c" or fl[i + 1] != "d" + fl[i][1:]
                                  for i in range(0, len(fl), 2)):
                raise ValueError(f"site {k} flavors must be (c_a, d_a) pairs: {fl}")
            for s in range(self.layers):
                for f in fl:
                    index[(k, s, f)] = len(index)
        object.__setattr__(self, "_index", index)

    @classmethod
    def chain(cls, L: int, layers: int = 1, pairs: Sequence[int] = (1,),
              extended: bool = False, boundary: str = "periodic") -> "MajoranaLayout":
        """Uniform chain; ``extended`` adds pair 3 on odd sites and pair 4 on even sites."""
        fl = []
        for k in range(1, L + 1):
            ps = list(pairs) + ([3 if k % 2 else 4] if extended else [])
            fl.append(tuple(x for a in ps for x in (f"c{a}", f"d{a}")))
        return cls(L, layers, tuple(fl), boundary)

    @property
    def n_modes(self) -> int:
        return len(self._index)

    @property
    def n_fermions(self) -> int:
        return self.n_modes // 2

    def index(self, site: int, layer: int, flavor: str) -> int:
        return self._index[(self.wrap(site), layer, flavor)]

    def has(self, site: int, layer: int, flavor: str) -> bool:
        return (self.wrap(site), layer, flavor) in self._index

    def wrap(self, site: int) -> int:
        return (site - 1) % self.sites + 1

    def modes(self) -> list:
        """Mode labels in index order."""
        return sorted(self._index, key=self._index.get)

    def site_of(self, mode: int) -> int:
        return self.modes()[mode][0]

    def pairs_at(self, site: int) -> list:
        return sorted({int(f[1:]) for f in self.flavors[site - 1]})

    def describe(self) -> dict:
        return {"sites": self.sites, "layers": self.layers, "boundary": self.boundary,
                "flavors": [list(f) for f in self.flavors]}


@dataclass(frozen=True, eq=False)
class QuadraticMajoranaHamiltonian:
    layout: MajoranaLayout
    A: np.ndarray
    name: str = ""

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        n = self.layout.n_modes
        if A.shape != (n, n):
            raise LayoutMismatch(f"A has shape {A.shape}, layout has {n} modes")
        if not np.array_equal(A, -A.T):
            raise ValueError("A must be antisymmetric")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    def triplets(self) -> list:
        """Nonzero upper-triangle entries ``[m, n, A[m, n]]``."""
        rows, cols = np.nonzero(np.triu(self.A))
        return [[int(m), int(n), float(self.A[m, n])] for m, n in zip(rows, cols)]

    def to_dict(self) -> dict:
        return {"layout": self.layout.describe(), "A": self.triplets()}


class _TermBuilder:
    """Accumulates ``coef * i gamma_m gamma_n`` terms into an antisymmetric matrix."""

    def __init__(self, layout: MajoranaLayout):
        self.layout = layout
        self.A = np.zeros((layout.n_modes, layout.n_modes))

    def add(self, coef: float, first: tuple, second: tuple):
        m = self.layout.index(*first)
        n = self.layout.index(*second)
        self.A[m, n] += 2 * coef
        self.A[n, m] -= 2 * coef

    def bonds(self, open_chain: bool, parity: Optional[int] = None):
        L = self.layout.sites
        for k in range(1, L + 1):
            if parity is not None and k % 2 != parity:
                continue
            if k == L and open_chain:
                continue
            yield k, k + 1


_CLASS_RE = re.compile(r"^(D|DIII|BDI|AIII|CII)(?:\((-?\d+)\))?$")


def parse_class(name: str) -> tuple:
    m = _CLASS_RE.match(name.strip().upper().replace(" ", ""))
    if not m:
        raise UnsupportedCombination(f"unknown symmetry class {name!r}")
    cls, n = m.group(1), m.group(2)
    if n is not None and cls not in ("BDI", "AIII"):
        raise UnsupportedCombination(f"class {cls} takes no index")
    default = {"BDI": 1, "AIII": 1}.get(cls)
    return cls, int(n) if n is not None else default


def build_model(cls: str, L: int, extended: bool = False, trivial: bool = False,
                boundary: str = "periodic") -> QuadraticMajoranaHamiltonian:
    """Fixed-point Majorana chains of the classes D, DIII, BDI(n), AIII(n) and CII.

    ``trivial`` gives the on-site paired model of the same class.  ``extended``
    gives the model with the ancilla pairs of the unwinding circuits, available
    for AIII(1) and AIII(2) = CII only.
    """
    kind, n = parse_class(cls)
    if L < 1:
        raise UnsupportedCombination("L must be positive")
    if boundary not in ("periodic", "open"):
        raise UnsupportedCombination(f"unknown boundary {boundary!r}")
    open_chain = boundary == "open"
    if kind == "CII":
        kind, n = "AIII", 2
    if extended:
        if kind != "AIII" or n not in (1, 2):
            raise UnsupportedCombination("extended models exist for AIII(1) and CII only")
        if L % 2 or L < 2:
            raise UnsupportedCombination("extended models need an even number of sites")
        if trivial:
            raise UnsupportedCombination("extended and trivial are exclusive")

    if kind in ("D", "DIII", "BDI"):
        layers = {"D": 1, "DIII": 2}.get(kind, abs(n) if n else 1)
        layout = MajoranaLayout.chain(L, layers, boundary=boundary)
        b = _TermBuilder(layout)
        for s in range(layers):
            if trivial or (kind == "BDI" and n == 0):
                for k in range(1, L + 1):
                    b.add(1, (k, s, "c1"), (k, s, "d1"))
            elif kind == "BDI" and n < 0:
                for k, k1 in b.bonds(open_chain):
                    b.add(1, (k, s, "c1"), (k1, s, "d1"))
            else:
                for k, k1 in b.bonds(open_chain):
                    b.add(1, (k, s, "d1"), (k1, s, "c1"))
        label = f"{kind}({n})" if kind == "BDI" else kind
        return QuadraticMajoranaHamiltonian(layout, b.A, label + ("-trivial" if trivial else ""))

    layers = n if n > 0 else 1
    layout = MajoranaLayout.chain(L, layers, pairs=(1, 2), extended=extended, boundary=boundary)
    b = _TermBuilder(layout)
    for s in range(layers):
        if trivial or n == 0:
            for k in range(1, L + 1):
                b.add(1, (k, s, "c1"), (k, s, "c2"))
                b.add(-1, (k, s, "d1"), (k, s, "d2"))
            continue
        for k, k1 in b.bonds(open_chain):
            b.add(1, (k, s, "c2"), (k1, s, "c1"))
            b.add(-1, (k, s, "d2"), (k1, s, "d1"))
        if extended:
            for k, k1 in b.bonds(open_chain, parity=1):
                b.add(-1, (k, s, "c3"), (k1, s, "c4"))
                b.add(1, (k, s, "d3"), (k1, s, "d4"))
    label = "CII" if n == 2 else f"AIII({n})"
    suffix = "-extended" if extended else ("-trivial" if trivial or n == 0 else "")
    return QuadraticMajoranaHamiltonian(layout, b.A, label + suffix)


def unwound_target(nu: int, L: int) -> QuadraticMajoranaHamiltonian:
    """On-site ``(c1, c2)``/``(d1, d2)`` pairs plus ancilla dimers on even bonds."""
    layers = {2: 1, 4: 2}[nu]
    layout = MajoranaLayout.chain(L, layers, pairs=(1, 2), extended=True)
    b = _TermBuilder(layout)
    for s in range(layers):
        for k in range(1, L + 1):
            b.add(1, (k, s, "c1"), (k, s, "c2"))
            b.add(-1, (k, s, "d1"), (k, s, "d2"))
        for k, k1 in b.bonds(False, parity=0):
            b.add(-1, (k, s, "c4"), (k1, s, "c3"))
            b.add(1, (k, s, "d4"), (k1, s, "d3"))
    return QuadraticMajoranaHamiltonian(layout, b.A, f"nu{nu}-unwound-target")


# Gaussian operators ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaussianOp:
    """Product of factors ``("quad", Theta)``, ``("mono", modes, phase)``, ``("K",)``.

    Factors multiply left to right as written.  ``quad`` is
    ``exp((1/4) gamma^T Theta gamma)``; ``mono`` is ``phase * gamma_m1 ... gamma_mk``
    over distinct modes; ``K`` is complex conjugation in the Jordan-Wigner basis.
    ``R`` and ``antiunitary`` are derived from the factors.
    """

    n_modes: int
    factors: tuple
    name: str = ""
    R: np.ndarray = field(init=False, repr=False)
    antiunitary: bool = field(init=False)

    def __post_init__(self):
        R = np.eye(self.n_modes)
        kappa = False
        for f in self.factors:
            R = R @ _factor_rotation(f, self.n_modes)
            kappa ^= f[0] == "K"
        if np.max(np.abs(R.T @ R - np.eye(self.n_modes))) > ORTHOGONAL_TOL:
            raise ValueError("Gaussian operator is not orthogonal on modes")
        R.setflags(write=False)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "antiunitary", kappa)

    def __matmul__(self, other: "GaussianOp") -> "GaussianOp":
        if self.n_modes != other.n_modes:
            raise LayoutMismatch("Gaussian operators on different mode counts")
        name = f"{self.name}*{other.name}" if self.name and other.name else self.name or other.name
        return GaussianOp(self.n_modes, self.factors + other.factors, name)

    def generator(self) -> Optional[np.ndarray]:
        """``Theta`` with ``op = exp((1/4) gamma^T Theta gamma)`` when the op is a
        single quadratic exponential (or a product of commuting ones)."""
        thetas = [f[1] for f in self.factors if f[0] == "quad"]
        if len(thetas) != len(self.factors):
            return None
        total = sum(thetas, np.zeros((self.n_modes, self.n_modes)))
        for i, a in enumerate(thetas):
            for b in thetas[i + 1:]:
                if np.max(np.abs(a @ b - b @ a)) > ORTHOGONAL_TOL:
                    return None
        return total

    def parity(self) -> int:
        """+1 if the unitary part preserves fermion parity, -1 if it flips it."""
        return int(round(np.linalg.det(self.unitary_rotation())))

    def unitary_rotation(self) -> np.ndarray:
        """``R`` with the contribution of every ``K`` factor removed."""
        R = np.eye(self.n_modes)
        for f in self.factors:
            if f[0] != "K":
                R = R @ _factor_rotation(f, self.n_modes)
        return R


def _k_rotation(n: int) -> np.ndarray:
    return np.diag([1.0 if m % 2 == 0 else -1.0 for m in range(n)])


def _factor_rotation(f: tuple, n: int) -> np.ndarray:
    kind = f[0]
    if kind == "quad":
        return expm(f[1])
    if kind == "mono":
        modes = set(f[1])
        if len(modes) != len(f[1]):
            raise ValueError("monomial modes must be distinct")
        # even monomials flip their own modes, odd ones flip all others
        own = -1.0 if len(modes) % 2 == 0 else 1.0
        return np.diag([own if m in modes else -own for m in range(n)])
    if kind == "K":
        return _k_rotation(n)
    raise UnknownSymbol(f"unknown factor kind {kind!r}")


def identity_op(n_modes: int) -> GaussianOp:
    return GaussianOp(n_modes, (), "1")


def quadratic_exp(layout: MajoranaLayout, terms: Sequence[tuple], name: str = "") -> GaussianOp:
    """``exp(sum alpha gamma_m gamma_n)`` from ``(alpha, mode_m, mode_n)`` terms.

    Modes are ``(site, layer, flavor)`` triples.
    """
    theta = np.zeros((layout.n_modes, layout.n_modes))
    for alpha, a, b in terms:
        m, n = layout.index(*a), layout.index(*b)
        theta[m, n] += 2 * alpha
        theta[n, m] -= 2 * alpha
    return GaussianOp(layout.n_modes, (("quad", theta),), name)


def monomial(layout: MajoranaLayout, modes: Sequence[tuple], phase: complex = 1.0,
             name: str = "") -> GaussianOp:
    idx = tuple(layout.index(*m) for m in modes)
    return GaussianOp(layout.n_modes, (("mono", idx, complex(phase)),), name)


def conjugation(layout: MajoranaLayout) -> GaussianOp:
    return GaussianOp(layout.n_modes, (("K",),), "K")


# Symmetry operators ---------------------------------------------------------

_SYM_RE = re.compile(r"^(Pf|K|S|S_tilde|T_DIII|C|V|D)(?:\((.+)\))?$")


def _parse_angle(text: str) -> float:
    t = text.replace(" ", "").replace("π", "pi")
    m = re.fullmatch(r"(-?)(\d*\.?\d*)\*?pi(?:/(\d+\.?\d*))?", t)
    if m:
        sign = -1.0 if m.group(1) else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        return sign * num * math.pi / den
    return float(t)


def _require(layout: MajoranaLayout, flavors: Sequence[str], name: str, layers: int = 1):
    if layout.layers < layers:
        raise UnknownSymbol(f"{name} needs {layers} layers")
    for k in range(1, layout.sites + 1):
        for f in flavors:
            if f not in layout.flavors[k - 1]:
                raise UnknownSymbol(f"{name} needs flavor {f} on every site")


def symmetry_op(name: str, layout: MajoranaLayout, theta: Optional[float] = None) -> GaussianOp:
    """Named symmetry generators.

    ``Pf`` fermion parity ``prod(i c d)``; ``K`` complex conjugation;
    ``S`` the chiral operator ``prod(c2 d1) K``; ``S_tilde`` its extension with
    one ancilla Majorana per layer and site; ``T_DIII`` the time reversal of
    the two-layer Kitaev chain; ``V(theta)`` the U(1) rotation of the
    bipartite models; ``D(theta)`` the U(1) rotation of two-layer BDI chains;
    ``C`` the charge conjugation of the two-layer bipartite models.
    """
    m = _SYM_RE.match(name.strip())
    if not m:
        raise UnknownSymbol(f"unknown symmetry {name!r}")
    sym, arg = m.group(1), m.group(2)
    if arg is not None:
        if sym not in ("V", "D"):
            raise UnknownSymbol(f"{sym} takes no argument")
        theta = _parse_angle(arg)
    if sym in ("V", "D") and theta is None:
        raise UnknownSymbol(f"{sym} needs an angle")
    L = layout.sites
    sites = range(1, L + 1)

    if sym == "Pf":
        modes = []
        for k in sites:
            for s in range(layout.layers):
                fl = layout.flavors[k - 1]
                for i in range(0, len(fl), 2):
                    modes.append((k, s, fl[i]))
                    modes.append((k, s, fl[i + 1]))
        phase = 1j ** (len(modes) // 2)
        return monomial(layout, modes, phase, "Pf")
    if sym == "K":
        return conjugation(layout)
    if sym == "S":
        _require(layout, ("c1", "d1", "c2", "d2"), "S")
        modes = [(k, s, f) for k in sites for s in range(layout.layers) for f in ("c2", "d1")]
        return GaussianOp(layout.n_modes, monomial(layout, modes).factors + (("K",),), "S")
    if sym == "S_tilde":
        _require(layout, ("c1", "d1", "c2", "d2"), "S_tilde")
        ops = []
        for k in sites:
            extra = "d3" if k % 2 else "c4"
            if extra not in layout.flavors[k - 1]:
                raise UnknownSymbol("S_tilde needs the extended layout")
            for s in range(layout.layers):
                ops.append(monomial(layout, [(k, s, "c2"), (k, s, "d1"), (k, s, extra)], 1j))
        body = reduce(lambda a, b: a @ b, ops)
        return GaussianOp(layout.n_modes, body.factors + (("K",),), "S_tilde")
    if sym == "T_DIII":
        _require(layout, ("c1", "d1"), "T_DIII", layers=2)
        terms = [(-math.pi / 4, (k, UP, f), (k, DOWN, f)) for k in sites for f in ("c1", "d1")]
        body = quadratic_exp(layout, terms)
        return GaussianOp(layout.n_modes, body.factors + (("K",),), "T_DIII")
    if sym == "D":
        _require(layout, ("c1", "d1"), "D", layers=2)
        terms = [(-theta / 2, (k, 0, f), (k, 1, f)) for k in sites for f in ("c1", "d1")]
        return GaussianOp(layout.n_modes, quadratic_exp(layout, terms).factors, f"D({theta:.12g})")
    if sym == "V":
        _require(layout, ("c1", "d1", "c2", "d2"), "V")
        terms = []
        for k in sites:
            for s in range(layout.layers):
                for a in layout.pairs_at(k):
                    sign = 1 if a % 2 else -1
                    terms.append((sign * theta / 2, (k, s, f"c{a}"), (k, s, f"d{a}")))
        return GaussianOp(layout.n_modes, quadratic_exp(layout, terms).factors, f"V({theta:.12g})")
    # C
    _require(layout, ("c1", "d1", "c2", "d2"), "C", layers=2)
    terms = []
    for k in sites:
        for a in layout.pairs_at(k):
            terms.append((math.pi / 4, (k, DOWN, f"c{a}"), (k, UP, f"c{a}")))
            terms.append((-math.pi / 4, (k, DOWN, f"d{a}"), (k, UP, f"d{a}")))
    return GaussianOp(layout.n_modes, quadratic_exp(layout, terms).factors, "C")


def conjugate(H: QuadraticMajoranaHamiltonian, g: GaussianOp) -> QuadraticMajoranaHamiltonian:
    """``g H g^-1`` as ``A -> (-1)^kappa R A R^T``."""
    if g.n_modes != H.layout.n_modes:
        raise LayoutMismatch("operator and Hamiltonian have different mode counts")
    A = g.R @ H.A @ g.R.T
    if g.antiunitary:
        A = -A
    A = 0.5 * (A - A.T)
    return QuadraticMajoranaHamiltonian(H.layout, A, H.name)


def commutes_with(H: QuadraticMajoranaHamiltonian, g: GaussianOp) -> float:
    """Largest entry of ``A(g H g^-1) - A(H)``."""
    return float(np.max(np.abs(conjugate(H, g).A - H.A)))


def op_commutator(op: GaussianOp, s: GaussianOp) -> float:
    """Deviation of ``s op s^-1`` from ``op``.

    Mode rotations alone fix an operator only up to sign, so when ``op`` is a
    quadratic exponential the generator is compared too: ``s op s^-1`` is the
    exponential of ``R_s Theta R_s^T``, and equality of generators makes the
    operators equal exactly.  The returned value is the larger of both
    deviations.
    """
    if op.n_modes != s.n_modes:
        raise LayoutMismatch("operators on different mode counts")
    mode_dev = float(np.max(np.abs(s.R @ op.R @ s.R.T - op.R)))
    theta = op.generator()
    if theta is None:
        return mode_dev
    gen_dev = float(np.max(np.abs(s.R @ theta @ s.R.T - theta)))
    return max(mode_dev, gen_dev)


# Gaussian states ------------------------------------------------------------

def ground_covariance(H: QuadraticMajoranaHamiltonian) -> np.ndarray:
    """``Gamma[m, n] = (i/2) <[gamma_m, gamma_n]>`` of the unique ground state."""
    A = H.A
    w, v = np.linalg.eigh(A.T @ A)
    if np.min(w) < 1e-12:
        raise ValueError("ground state is degenerate (A is singular)")
    inv_sqrt = (v / np.sqrt(w)) @ v.T
    return -A @ inv_sqrt


def transform_covariance(gamma: np.ndarray, g: GaussianOp) -> np.ndarray:
    out = g.R @ gamma @ g.R.T
    return -out if g.antiunitary else out


def gaussian_fidelity(g1: np.ndarray, g2: np.ndarray) -> float:
    """``|<psi1|psi2>|`` for pure Gaussian states, ``|det((G1 + G2)/2)|^(1/4)``."""
    d = np.linalg.det(0.5 * (g1 + g2))
    return float(abs(d) ** 0.25)


def product_cut(gamma: np.ndarray, layout: MajoranaLayout, tol: float = 1e-10) -> Optional[tuple]:
    """Shortest contiguous site block ``(start, length)`` uncorrelated with the rest."""
    L = layout.sites
    site = np.array([k for k, _, _ in layout.modes()])
    for length in range(1, L):
        for start in range(1, L + 1):
            block = {(start - 1 + i) % L + 1 for i in range(length)}
            inside = np.isin(site, list(block))
            if np.max(np.abs(gamma[np.ix_(inside, ~inside)])) < tol:
                return start, length
    return None


# Dimer patterns -------------------------------------------------------------

def dimer_pattern(H: QuadraticMajoranaHamiltonian) -> dict:
    """Perfect matching read off the support of ``A``."""
    layout = H.layout
    labels = layout.modes()
    onsite, bonds, unpaired = [], [], []
    for m in range(layout.n_modes):
        partners = np.flatnonzero(np.abs(H.A[m]) > 1e-12)
        if len(partners) > 1:
            raise NotFixedPoint(f"mode {labels[m]} couples to {len(partners)} modes")
        if len(partners) == 0:
            unpaired.append(labels[m])
            continue
        n = int(partners[0])
        if n < m:
            continue
        pair = (labels[m], labels[n])
        (onsite if labels[m][0] == labels[n][0] else bonds).append(pair)
    return {"onsite": onsite, "bonds": bonds, "unpaired": unpaired}


# Unwinding circuits ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FermionPlan:
    name: str
    nu: int
    layout: MajoranaLayout
    input_hamiltonian: QuadraticMajoranaHamiltonian
    layers: tuple  # GaussianOp per layer
    gates: tuple  # gate names per layer
    target_hamiltonian: QuadraticMajoranaHamiltonian
    symmetries: tuple
    expect_symmetric: bool


def _w_gates(layout: MajoranaLayout, layer: int) -> list:
    """Disjoint two-fermion gates of the unwinding layers, each a GaussianOp."""
    gates = []
    L = layout.sites
    for k in range(1, L + 1):
        for s in range(layout.layers):
            if layer == 1 and k % 2:
                terms = [(-math.pi / 4, (k, s, "c3"), (k + 1, s, "c1")),
                         (-math.pi / 4, (k, s, "d3"), (k + 1, s, "d1"))]
            elif layer == 2 and k % 2:
                terms = [(-math.pi / 4, (k, s, "c3"), (k, s, "c1")),
                         (-math.pi / 4, (k, s, "d3"), (k, s, "d1"))]
            elif layer == 2:
                terms = [(math.pi / 4, (k, s, "c4"), (k, s, "c2")),
                         (math.pi / 4, (k, s, "d4"), (k, s, "d2"))]
            else:
                continue
            gates.append(quadratic_exp(layout, terms, f"W{layer}[site {k}, layer {s}]"))
    return gates


def _layer(gates: Sequence[GaussianOp], n_modes: int, name: str) -> GaussianOp:
    theta = sum((g.generator() for g in gates), np.zeros((n_modes, n_modes)))
    return GaussianOp(n_modes, (("quad", theta),), name)


CLASS_SYMMETRIES = {
    "CII": ("S_tilde", "C", "Pf", "V"),
    "AIII": ("S_tilde", "Pf", "V"),
    "BDI": ("S_tilde", "Pf"),
}


def build_fermion_unwind(nu: int, L: int = 4, symmetry_class: Optional[str] = None) -> FermionPlan:
    """The two-layer Gaussian circuit unwinding the extended ``nu = 4`` or ``nu = 2`` chain.

    ``symmetry_class`` picks the generators checked against the layers; the
    default is CII for ``nu = 4`` and AIII for ``nu = 2``.  Charge conjugation
    needs two layers and is unavailable for ``nu = 2``.
    """
    if nu not in (2, 4):
        raise UnsupportedCombination("nu must be 2 or 4")
    cls = (symmetry_class or ("CII" if nu == 4 else "AIII")).upper()
    if cls not in CLASS_SYMMETRIES:
        raise UnsupportedCombination(f"no unwinding circuit for class {cls}")
    if nu == 2 and cls == "CII":
        raise UnsupportedCombination("charge conjugation needs the two-layer nu = 4 chain")
    H = build_model("CII" if nu == 4 else "AIII(1)", L, extended=True)
    layout = H.layout
    g1, g2 = _w_gates(layout, 1), _w_gates(layout, 2)
    layers = (_layer(g1, layout.n_modes, "W1"), _layer(g2, layout.n_modes, "W2"))
    gates = (tuple(g.name for g in g1), tuple(g.name for g in g2))
    syms = []
    for name in CLASS_SYMMETRIES[cls]:
        if name == "V":
            syms += [symmetry_op("V", layout, t) for t in UNWIND_ANGLES]
        else:
            syms.append(symmetry_op(name, layout))
    return FermionPlan(f"fermion-nu{nu}-{cls.lower()}", nu, layout, H, layers, gates,
                       unwound_target(nu, L), tuple(syms), nu == 4)


def drop_layer(plan: FermionPlan, layer: int) -> FermionPlan:
    """Negative control: replace one layer by the identity."""
    layers = list(plan.layers)
    layers[layer] = identity_op(plan.layout.n_modes)
    gates = list(plan.gates)
    gates[layer] = ()
    return FermionPlan(plan.name + "-corrupted", plan.nu, plan.layout, plan.input_hamiltonian,
                       tuple(layers), tuple(gates), plan.target_hamiltonian,
                       plan.symmetries, plan.expect_symmetric)


def corrupt_gate(plan: FermionPlan, layer: int = 0, gate: int = 0) -> FermionPlan:
    """Negative control: remove a single gate from one layer."""
    gates = _w_gates(plan.layout, layer + 1)
    names = [g.name for g in gates]
    del gates[gate]
    del names[gate]
    layers = list(plan.layers)
    layers[layer] = _layer(gates, plan.layout.n_modes, f"W{layer + 1}")
    all_names = list(plan.gates)
    all_names[layer] = tuple(names)
    return FermionPlan(plan.name + "-corrupted", plan.nu, plan.layout, plan.input_hamiltonian,
                       tuple(layers), tuple(all_names), plan.target_hamiltonian,
                       plan.symmetries, plan.expect_symmetric)


def circuit_op(plan: FermionPlan) -> GaussianOp:
    """Layer 1 applied first: ``W = W2 W1``."""
    return reduce(lambda acc, layer: layer @ acc, plan.layers, identity_op(plan.layout.n_modes))


def local_parity(s: GaussianOp, layout: MajoranaLayout) -> dict:
    """Fermion parity of each per-site factor of an operator built from on-site monomials.

    Only meaningful for operators whose unitary part is a product of on-site
    monomials; returns ``{site: +1 | -1}`` from the per-site determinant.
    """
    R = s.unitary_rotation()
    site = np.array([k for k, _, _ in layout.modes()])
    out = {}
    for k in range(1, layout.sites + 1):
        idx = np.flatnonzero(site == k)
        out[k] = int(round(np.linalg.det(R[np.ix_(idx, idx)])))
    return out


def parity_observation(plan: FermionPlan) -> dict:
    """Which candidate symmetries commute with fermion parity, site by site."""
    pf = symmetry_op("Pf", plan.layout)
    candidates = []
    for s in plan.symmetries:
        if s.name == "Pf":
            continue
        per_site = local_parity(s, plan.layout)
        odd_sites = [k for k, p in per_site.items() if p < 0]
        candidates.append({
            "generator": s.name,
            "global_parity": s.parity(),
            "parity_odd_sites": odd_sites,
            "commutes_with_parity_locally": not odd_sites,
            "commutes_with_parity_globally": op_commutator(s, pf) < COMMUTATOR_TOL and s.parity() > 0,
        })
    return {"kind": "fermion-parity", "candidates": candidates,
            "obstructed": [c["generator"] for c in candidates if not c["commutes_with_parity_locally"]]}


def verify_fermion_plan(plan: FermionPlan):
    """Gaussian-level checks, reported in the shared VerificationReport schema."""
    from .circuits import VerificationReport, _stable

    layers, commutators = [], []
    for i, (layer, names) in enumerate(zip(plan.layers, plan.gates), start=1):
        layers.append({"layer": i, "gates": list(names)})
        for s in plan.symmetries:
            commutators.append({"layer": i, "generator": s.name,
                                "norm": _stable(op_commutator(layer, s))})
    W = circuit_op(plan)
    conj = conjugate(plan.input_hamiltonian, W)
    residual = _stable(float(np.max(np.abs(conj.A - plan.target_hamiltonian.A))))
    g_in = ground_covariance(plan.input_hamiltonian)
    g_out = transform_covariance(g_in, W)
    g_target = ground_covariance(plan.target_hamiltonian)
    fidelity = _stable(gaussian_fidelity(g_out, g_target))
    cut = product_cut(g_out, plan.layout)
    in_cut = product_cut(g_in, plan.layout)
    invariance = [{"generator": s.name,
                   "deviation": _stable(float(np.max(np.abs(transform_covariance(g_in, s) - g_in))))}
                  for s in plan.symmetries]

    failures = []
    if plan.expect_symmetric and any(c["norm"] >= COMMUTATOR_TOL for c in commutators):
        failures.append("a layer does not commute with the symmetry")
    if fidelity < 1 - FIDELITY_TOL:
        failures.append("circuit output differs from the target")
    if residual >= RESIDUAL_TOL:
        failures.append("conjugated Hamiltonian differs from the target")
    if cut is None:
        failures.append("output has no rank-1 cut")
    if in_cut is not None:
        failures.append("input already has a rank-1 cut")
    observations = [] if plan.nu == 4 else [parity_observation(plan)]
    return VerificationReport(
        plan.name, layers, commutators, fidelity, residual,
        cut[0] if cut else None, list(cut) if cut else None,
        in_cut[0] if in_cut else None, invariance, plan.expect_symmetric,
        not failures, failures, observations)
