"""Two-layer unwinding circuits and the checks that certify them.

Every plan carries its input fixed point, the circuit, and an independently
built target; :func:`verify_plan` never derives the target from the circuit.
Register conventions: site 1 is odd; the paired registers on a site are ``A``
and ``B``; the ancilla register added by an extension is ``C``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .cohomology import class_coordinates, compute_h2, same_u1_class
from .errors import ClassMismatch, UnsupportedCombination
from .groups import from_matrix_generators
from .projective import FactorSystem, UnitaryRep, conjugate_class, factor_system
from .spinchain import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    ChainLayout,
    Circuit,
    CircuitLayer,
    LieGenerator,
    LocalOperator,
    Bond,
    PureState,
    SymmetryOperator,
    apply_circuit,
    bond_pattern,
    build_fixed_point,
    chi_state,
    commutator_norm,
    conjugate_hamiltonian,
    find_rank1_cut,
    ground_degeneracy,
    hamiltonian_residual,
    onsite_symmetry,
    product_state,
    projector_term,
    symmetry_deviation,
    total_spin,
    spectral_gap,
    two_body_terms,
)

COMMUTATOR_TOL = 1e-10
FIDELITY_TOL = 1e-10
RESIDUAL_TOL = 1e-10
BREAKING_MIN_NORM = 0.1
ROTATION_ANGLE = 0.7  # generic angle for the finite-rotation SU(2) checks

CLUSTER_BOND = np.kron(PAULI_Z, PAULI_Z) - np.kron(PAULI_X, PAULI_X)
UP = 0  # sigma^z = +1 is basis index 0


def swap_matrix(J: int) -> np.ndarray:
    if J < 2:
        raise ValueError("J must be at least 2")
    S = np.zeros((J * J, J * J), dtype=complex)
    for i in range(J):
        for j in range(J):
            S[j * J + i, i * J + j] = 1
    return S


def swap_gate(J: int, first=(1, "A"), second=(1, "B")) -> LocalOperator:
    return LocalOperator((first, second), swap_matrix(J), name=f"swap{first}{second}")


def controlled_x(control, target) -> LocalOperator:
    """``|up><up| x sigma^x + |down><down| x 1`` with support ``(control, target)``."""
    m = np.zeros((4, 4), dtype=complex)
    m[:2, :2] = PAULI_X if UP == 0 else np.eye(2)
    m[2:, 2:] = np.eye(2) if UP == 0 else PAULI_X
    return LocalOperator((control, target), m, name=f"CX{control}{target}")


def _sites(L: int, parity: Optional[str] = None) -> list:
    return [k for k in range(1, L + 1)
            if parity is None or (k % 2 == 1) == (parity == "odd")]


def _require_even(L: int):
    if L < 2 or L % 2:
        raise ValueError("the dimer patterns need an even number of sites >= 2")


@dataclass(frozen=True, eq=False)
class UnwindPlan:
    name: str
    layout: ChainLayout
    input_state: PureState
    input_hamiltonian: tuple
    circuit: Circuit
    target_state: PureState
    target_hamiltonian: Optional[tuple]
    symmetries: tuple
    expect_symmetric: bool = True
    base_model: str = ""
    ancilla_bonds: tuple = ()
    notes: dict = field(default_factory=dict)


def _pair_layers(L: int, first_label: str, first_offset_label: str, J: int,
                 second_odd: tuple, second_even: tuple) -> Circuit:
    """Layer 1 swaps (X_k, Y_{k+1}) on odd k; layer 2 swaps per-site pairs by parity."""
    layer1 = [swap_gate(J, (k, first_label), (k % L + 1, first_offset_label)) for k in _sites(L, "odd")]
    layer2 = [swap_gate(J, (k, second_odd[0]), (k, second_odd[1])) for k in _sites(L, "odd")]
    layer2 += [swap_gate(J, (k, second_even[0]), (k, second_even[1])) for k in _sites(L, "even")]
    return Circuit((CircuitLayer(tuple(layer1)), CircuitLayer(tuple(layer2))))


def extension_circuit(L: int, J: int = 2) -> Circuit:
    """``W1 = prod_odd S(C_k, A_k+1)``, ``W2 = prod_odd S(C_k, A_k) prod_even S(C_k, B_k)``."""
    _require_even(L)
    return _pair_layers(L, "C", "A", J, ("C", "A"), ("C", "B"))


def z2z2_generators(layout: ChainLayout, labels: Sequence[str]) -> tuple:
    vx = onsite_symmetry(layout, {l: PAULI_X for l in labels}, name="V(x)")
    vz = onsite_symmetry(layout, {l: 1j * PAULI_Z for l in labels}, name="V(z)")
    return vx, vz


def su2_generators(layout: ChainLayout, labels: Sequence[str]) -> tuple:
    """Total-spin generators plus one finite rotation about each axis."""
    lie = tuple(total_spin(layout, a, labels) for a in range(3))
    rots = tuple(
        onsite_symmetry(layout, {l: expm(1j * ROTATION_ANGLE * P / 2) for l in labels},
                        name=f"R{'xyz'[a]}({ROTATION_ANGLE})")
        for a, P in enumerate((PAULI_X, PAULI_Y, PAULI_Z)))
    return lie + rots


def time_reversal(layout: ChainLayout, labels: Sequence[str], name: str = "T") -> SymmetryOperator:
    """``prod exp(i pi sigma^y / 2) K`` over the given registers."""
    return onsite_symmetry(layout, {l: expm(1j * np.pi * PAULI_Y / 2) for l in labels},
                           antiunitary=True, name=name)


# ---------------------------------------------------------------- caricature circuits

def caricature_layout(L: int, labels=("A", "B")) -> ChainLayout:
    return ChainLayout.uniform(L, [(l, 2) for l in labels])


def build_breaking_plan(L: int = 4, model: str = "caricature") -> UnwindPlan:
    """Controlled-X circuit that unwinds the caricature state while breaking Z2 x Z2.

    ``model="aklt"`` runs the same circuit on the singlet-bonded chain, where it
    breaks both time reversal and SO(3).
    """
    _require_even(L)
    layout = caricature_layout(L)
    if model == "caricature":
        vec, bond_matrix = chi_state(2, "triplet"), CLUSTER_BOND
        syms = z2z2_generators(layout, ("A", "B"))
    elif model == "aklt":
        vec = chi_state(2, "singlet")
        bond_matrix = -np.outer(vec, vec.conj())
        syms = (time_reversal(layout, ("A", "B")),) + su2_generators(layout, ("A", "B"))
    else:
        raise UnsupportedCombination(f"breaking plan has no model {model!r}")
    bonds = bond_pattern(layout, "B", "A", vec)
    psi = product_state(layout, bonds)
    onsite = bond_pattern(layout, "A", "B", vec, offset=0)
    target = product_state(layout, onsite)
    layer1 = [controlled_x((k, "B"), (k % L + 1, "A")) for k in _sites(L)]
    layer2 = [controlled_x((k, "B"), (k, "A")) for k in _sites(L)]
    circuit = Circuit((CircuitLayer(tuple(layer1)), CircuitLayer(tuple(layer2))))
    # on singlets the conjugated terms are another parent Hamiltonian of the
    # target, not the on-site projectors, so only the state is compared
    target_h = tuple(two_body_terms(onsite, bond_matrix, "H_0")) if model == "caricature" else None
    name = "breaking" if model == "caricature" else "breaking-aklt"
    return UnwindPlan(
        name, layout, psi, tuple(two_body_terms(bonds, bond_matrix, "H")), circuit,
        target, target_h,
        syms, expect_symmetric=False, base_model=model)


def build_inversion_plan(L: int = 4) -> UnwindPlan:
    """Two stacked caricature copies unwound by symmetric swaps.

    The Z2 x Z2 generators act diagonally on both copies.
    """
    _require_even(L)
    layout = caricature_layout(L, ("A1", "B1", "A2", "B2"))
    trip = chi_state(2, "triplet")
    bonds = bond_pattern(layout, "B1", "A1", trip) + bond_pattern(layout, "B2", "A2", trip)
    psi = product_state(layout, bonds)
    onsite = bond_pattern(layout, "A1", "B1", trip, offset=0) + bond_pattern(layout, "A2", "B2", trip, offset=0)
    target = product_state(layout, onsite)
    layer1 = [swap_gate(2, (k, "B1"), (k % L + 1, "A2")) for k in _sites(L)]
    layer2 = [swap_gate(2, (k, "A1"), (k, "B2")) for k in _sites(L)]
    circuit = Circuit((CircuitLayer(tuple(layer1)), CircuitLayer(tuple(layer2))))
    return UnwindPlan(
        "inversion", layout, psi, tuple(two_body_terms(bonds, CLUSTER_BOND, "H_C")), circuit,
        target, tuple(two_body_terms(onsite, CLUSTER_BOND, "H_0")),
        z2z2_generators(layout, ("A1", "B1", "A2", "B2")), base_model="caricature x2")


# ---------------------------------------------------------------- extension plans

def _aklt_plan(L: int, symmetry: str) -> UnwindPlan:
    layout = ChainLayout.uniform(L, [("A", 2), ("B", 2), ("C", 2)])
    singlet = chi_state(2, "singlet")
    base = bond_pattern(layout, "B", "A", singlet)
    anc = bond_pattern(layout, "C", "C", -singlet, parity="odd")
    psi, H = build_fixed_point(layout, base + anc)
    onsite = bond_pattern(layout, "A", "B", singlet, offset=0)
    anc_t = bond_pattern(layout, "C", "C", singlet, parity="even")
    target, H0 = build_fixed_point(layout, onsite + anc_t)
    if symmetry == "su2":
        syms = su2_generators(layout, ("A", "B", "C"))
    elif symmetry == "time-reversal":
        syms = (time_reversal(layout, ("A", "B", "C"), name="T~"),)
    else:
        raise UnsupportedCombination(f"aklt plan has no symmetry {symmetry!r}")
    return UnwindPlan(f"aklt-{symmetry}", layout, psi, tuple(H), extension_circuit(L), target,
                      tuple(H0), syms, base_model="aklt-like", ancilla_bonds=tuple(anc))


def _cluster_plan(L: int) -> UnwindPlan:
    layout = ChainLayout.uniform(L, [("A", 2), ("B", 2), ("C", 2)])
    trip = chi_state(2, "triplet")
    base = bond_pattern(layout, "B", "A", trip)
    anc = bond_pattern(layout, "C", "C", trip, parity="odd")
    psi = product_state(layout, base + anc)
    H = two_body_terms(base + anc, CLUSTER_BOND, "H~_C")
    onsite = bond_pattern(layout, "A", "B", trip, offset=0)
    anc_t = bond_pattern(layout, "C", "C", trip, parity="even")
    target = product_state(layout, onsite + anc_t)
    H0 = two_body_terms(onsite + anc_t, CLUSTER_BOND, "H_0")
    syms = z2z2_generators(layout, ("A", "B", "C"))
    syms = tuple(replace(s, name=s.name.replace("V", "V~")) for s in syms)
    return UnwindPlan("cluster", layout, psi, tuple(H), extension_circuit(L), target, tuple(H0),
                      syms, base_model="cluster", ancilla_bonds=tuple(anc))


def extended_site_matrices(V: np.ndarray, odd: bool) -> np.ndarray:
    """``V x V* x V`` on odd sites, ``V x V* x V*`` on even sites."""
    last = V if odd else V.conj()
    return np.kron(np.kron(V, V.conj()), last)


def _general_plan(L: int, f: FactorSystem, ancilla: Optional[tuple] = None) -> UnwindPlan:
    G = f.rep.group
    J = f.rep.dim
    odd_rep, even_rep = ancilla if ancilla is not None else (f.rep, conjugate_class(f).rep)
    n = f.cocycle.modulus
    if not same_u1_class(factor_system(odd_rep, n).cocycle, f.cocycle):
        raise ClassMismatch("odd-site ancilla is not in the class of the base representation")
    if not same_u1_class(factor_system(even_rep, n).cocycle, -f.cocycle):
        raise ClassMismatch("even-site ancilla is not in the inverse class")
    layout = ChainLayout.uniform(L, [("A", J), ("B", J), ("C", J)])
    chi = chi_state(J, "omega")
    base = bond_pattern(layout, "B", "A", chi)
    anc = bond_pattern(layout, "C", "C", chi, parity="odd")
    psi, H = build_fixed_point(layout, base + anc)
    onsite = bond_pattern(layout, "A", "B", chi, offset=0)
    anc_t = bond_pattern(layout, "C", "C", chi, parity="even")
    target, H0 = build_fixed_point(layout, onsite + anc_t)
    syms = []
    for g in G.generators():
        V = f.rep.matrices[g]

        def factor(site, label, V=V, g=g):
            if label == "A":
                return V
            if label == "B":
                return V.conj()
            return (odd_rep if site % 2 else even_rep).matrices[g]
        syms.append(onsite_symmetry(layout, factor, name=f"U~(g{g})"))
    return UnwindPlan(f"general-J{J}", layout, psi, tuple(H), extension_circuit(L, J), target,
                      tuple(H0), tuple(syms), base_model="general", ancilla_bonds=tuple(anc),
                      notes={"group_order": G.order, "J": J})


def build_extension_plan(model: str, L: int = 4, symmetry: Optional[str] = None,
                         rep: Optional[FactorSystem] = None,
                         ancilla: Optional[tuple] = None) -> UnwindPlan:
    """Extension plan for ``aklt`` (``symmetry`` = ``su2`` | ``time-reversal``),
    ``cluster`` or ``general`` (needs ``rep``).  ``ancilla`` overrides the
    odd/even ancilla representations of the general plan."""
    _require_even(L)
    if model == "aklt":
        return _aklt_plan(L, symmetry or "su2")
    if model == "cluster":
        return _cluster_plan(L)
    if model == "general":
        if rep is None:
            raise ValueError("general plan needs a factor system")
        return _general_plan(L, rep, ancilla)
    raise UnsupportedCombination(f"unknown model {model!r}")


def onsite_extension_check(f: FactorSystem) -> dict:
    """Classes of the extended on-site representations.

    Over ``G`` the odd-site matrices must carry the class of ``f`` and the
    even-site matrices its inverse.  Over the group the odd-site matrices
    generate they form a linear representation.
    """
    G = f.rep.group
    n = f.cocycle.modulus
    h2 = compute_h2(G)
    out = {"base_class": list(class_coordinates(f.cocycle, h2))}
    for parity, odd in (("odd", True), ("even", False)):
        mats = [extended_site_matrices(f.rep.matrices[g], odd) for g in range(G.order)]
        fs = factor_system(UnitaryRep(G, mats), n)
        out[f"{parity}_class"] = list(class_coordinates(fs.cocycle, h2))
        gens = [mats[g] for g in G.generators()]
        big, big_rep = from_matrix_generators(gens)
        lifted = factor_system(big_rep, max(1, big.order))
        out[f"{parity}_generated_order"] = big.order
        out[f"{parity}_generated_class_zero"] = not lifted.cocycle.values.any()
    inv = conjugate_class(f).cocycle
    out["even_is_inverse"] = list(class_coordinates(inv, h2)) == out["even_class"]
    out["odd_is_base"] = out["odd_class"] == out["base_class"]
    return out


# ---------------------------------------------------------------- cluster basis change

def cluster_layout(L: int) -> ChainLayout:
    return caricature_layout(L)


def cluster_basis_change(L: int) -> Circuit:
    """One layer of ``exp(-i pi sigma^y_A / 4) CZ_AB`` on every site."""
    cz = np.diag([1, 1, 1, -1]).astype(complex)
    site = np.kron(expm(-1j * np.pi * PAULI_Y / 4), np.eye(2)) @ cz
    gates = tuple(LocalOperator(((k, "A"), (k, "B")), site, name=f"M{k}") for k in _sites(L))
    return Circuit((CircuitLayer(gates),))


def cluster_original_hamiltonian(L: int) -> list:
    """``-sum sigma^z sigma^x sigma^z`` with chain qubits 2k-1 -> A_k and 2k -> B_k."""
    zxz = -np.kron(np.kron(PAULI_Z, PAULI_X), PAULI_Z)
    terms = []
    for k in _sites(L):
        prev = (k - 2) % L + 1
        terms.append(LocalOperator(((prev, "B"), (k, "A"), (k, "B")), zxz, name="H_c"))
        terms.append(LocalOperator(((k, "A"), (k, "B"), (k % L + 1, "A")), zxz, name="H_c"))
    return terms


def cluster_original_symmetries(layout: ChainLayout) -> tuple:
    ux = onsite_symmetry(layout, {"A": PAULI_X}, name="U(x)")
    uz = onsite_symmetry(layout, {"B": PAULI_X}, name="U(z)")
    return ux, uz


def cluster_state_original(L: int) -> PureState:
    """``prod CZ |+...+>`` on the 2L-qubit chain, written in the A/B layout."""
    layout = cluster_layout(L)
    n = 2 * L
    bits = (np.arange(2 ** n)[:, None] >> (n - 1 - np.arange(n))) & 1
    phase = np.sum(bits * np.roll(bits, -1, axis=1), axis=1) % 2
    amp = (-1.0) ** phase / np.sqrt(2 ** n)
    return PureState(layout, amp.astype(complex))


# ---------------------------------------------------------------- verification

@dataclass
class VerificationReport:
    plan: str
    layers: list
    commutators: list
    fidelity: float
    hamiltonian_residual: float
    schmidt_rank1_cut: Optional[int]
    schmidt_rank1_block: Optional[list]
    input_schmidt_rank1_cut: Optional[int]
    input_invariance: list
    expect_symmetric: bool
    passed: bool
    failures: list
    observations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "plan": self.plan,
            "layers": self.layers,
            "commutators": self.commutators,
            "fidelity": self.fidelity,
            "hamiltonian_residual": self.hamiltonian_residual,
            "schmidt_rank1_cut": self.schmidt_rank1_cut,
            "schmidt_rank1_block": self.schmidt_rank1_block,
            "input_schmidt_rank1_cut": self.input_schmidt_rank1_cut,
            "input_invariance": self.input_invariance,
            "expect_symmetric": self.expect_symmetric,
            "passed": self.passed,
            "failures": self.failures,
            "observations": self.observations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def _stable(x: float) -> float:
    """Round to 12 significant digits so reports do not depend on BLAS summation order."""
    return float(f"{x:.12g}")


def verify_plan(plan: UnwindPlan) -> VerificationReport:
    layout = plan.layout
    layers = []
    commutators = []
    for i, layer in enumerate(plan.circuit.layers, start=1):
        layers.append({"layer": i, "gates": [g.name for g in layer.gates]})
        for s in plan.symmetries:
            norm = commutator_norm(layer, s, layout)
            commutators.append({"layer": i, "generator": s.name, "norm": _stable(norm)})
    out = apply_circuit(plan.circuit, plan.input_state)
    fidelity = _stable(out.fidelity(plan.target_state))
    residual = None
    if plan.target_hamiltonian is not None:
        conj = conjugate_hamiltonian(plan.input_hamiltonian, plan.circuit, layout)
        residual = _stable(hamiltonian_residual(conj, plan.target_hamiltonian, layout))
    cut = find_rank1_cut(out)
    in_cut = find_rank1_cut(plan.input_state)
    invariance = [{"generator": s.name, "deviation": _stable(abs(symmetry_deviation(s, plan.input_state)))}
                  for s in plan.symmetries]

    failures = []
    norms = [c["norm"] for c in commutators]
    if plan.expect_symmetric:
        if any(n >= COMMUTATOR_TOL for n in norms):
            failures.append("a layer does not commute with the symmetry")
    elif not any(n > BREAKING_MIN_NORM for n in norms):
        failures.append("no layer breaks the symmetry")
    if fidelity < 1 - FIDELITY_TOL:
        failures.append("circuit output differs from the target")
    if residual is not None and residual >= RESIDUAL_TOL:
        failures.append("conjugated Hamiltonian differs from the target")
    if cut is None:
        failures.append("output has no rank-1 cut")
    if in_cut is not None:
        failures.append("input already has a rank-1 cut")
    if any(v["deviation"] >= FIDELITY_TOL for v in invariance):
        failures.append("input state is not symmetric")
    return VerificationReport(
        plan.name, layers, commutators, fidelity, residual,
        cut[0] if cut else None, list(cut) if cut else None,
        in_cut[0] if in_cut else None, invariance, plan.expect_symmetric,
        not failures, failures)


def corrupt_plan(plan: UnwindPlan, layer: int = 0, gate: int = 0) -> UnwindPlan:
    """Negative control: replace one gate by the identity on the same support."""
    layers = list(plan.circuit.layers)
    gates = list(layers[layer].gates)
    g = gates[gate]
    gates[gate] = LocalOperator(g.support, np.eye(len(g.matrix)), name="identity")
    layers[layer] = CircuitLayer(tuple(gates))
    return replace(plan, name=plan.name + "-corrupted", circuit=Circuit(tuple(layers)))


def double_circuit(circuit: Circuit) -> Circuit:
    return Circuit(circuit.layers + circuit.layers)


# ---------------------------------------------------------------- boundary gapping

def open_aklt_chain(L: int = 3, boundary_term: Optional[str] = None):
    """Open AKLT-like chain, optionally with a term that pairs the dangling spins.

    ``boundary_term`` is ``None`` (dangling ``A_1`` and ``B_L``), ``"direct"``
    (singlet projector on ``A_1, B_L``) or ``"registers"`` (boundary registers
    ``C_1`` and ``C_L`` prepared in a singlet, each locally bound into a singlet
    with its dangling neighbour).  Returns ``(layout, terms)``.
    """
    if L < 2:
        raise UnsupportedCombination("open chain needs at least two sites")
    singlet = chi_state(2, "singlet")
    extra = {1: [("C", 2)], L: [("C", 2)]} if boundary_term == "registers" else None
    layout = ChainLayout.uniform(L, [("A", 2), ("B", 2)], boundary="open", extra=extra)
    bonds = bond_pattern(layout, "B", "A", singlet)
    if boundary_term == "direct":
        bonds.append(Bond((L, "B"), (1, "A"), singlet))
    elif boundary_term == "registers":
        bonds += [Bond((L, "B"), (L, "C"), singlet), Bond((1, "C"), (1, "A"), singlet)]
    elif boundary_term is not None:
        raise UnsupportedCombination(f"unknown boundary term {boundary_term!r}")
    return layout, [projector_term(b) for b in bonds]


def boundary_gap_check(L: int = 3) -> dict:
    out = {"L": L}
    layout, terms = open_aklt_chain(L)
    out["open_degeneracy"] = ground_degeneracy(terms, layout)
    for mode in ("direct", "registers"):
        layout, terms = open_aklt_chain(L, mode)
        out[f"{mode}_degeneracy"] = ground_degeneracy(terms, layout)
        out[f"{mode}_gap"] = _stable(spectral_gap(terms, layout))
    periodic = ChainLayout.uniform(L, [("A", 2), ("B", 2)])
    out["periodic_degeneracy"] = ground_degeneracy(
        [projector_term(b) for b in bond_pattern(periodic, "B", "A", chi_state(2, "singlet"))], periodic)
    out["passed"] = (out["open_degeneracy"] == 4 and out["periodic_degeneracy"] == 1
                     and all(out[f"{m}_degeneracy"] == 1 and out[f"{m}_gap"] > BREAKING_MIN_NORM
                             for m in ("direct", "registers")))
    return out


def site_square_phases(s: SymmetryOperator, layout: ChainLayout) -> dict:
    """Per-site scalar ``s^2`` as ``{site: phase}``; raises if a site's square is not scalar."""
    squares = s.square_factors()
    out = {}
    for k in range(1, layout.sites + 1):
        m = np.ones((1, 1), dtype=complex)
        for slot in layout.site_slots(k):
            if slot in squares:
                m = np.kron(m, squares[slot])
        phase = m[0, 0]
        if np.max(np.abs(m - phase * np.eye(len(m)))) > 1e-12:
            raise ValueError(f"square of {s.name} is not a scalar on site {k}")
        out[k] = complex(round(phase.real, 12) + 0.0, round(phase.imag, 12) + 0.0)
    return out
