import math

import numpy as np
import pytest

from sptunwind.errors import LayoutMismatch, NotFixedPoint, UnknownSymbol, UnsupportedCombination
from sptunwind.fermion import (
    UNWIND_ANGLES,
    GaussianOp,
    MajoranaLayout,
    QuadraticMajoranaHamiltonian,
    build_fermion_unwind,
    build_model,
    circuit_op,
    conjugate,
    corrupt_gate,
    dimer_pattern,
    drop_layer,
    gaussian_fidelity,
    ground_covariance,
    identity_op,
    op_commutator,
    product_cut,
    symmetry_op,
    transform_covariance,
    unwound_target,
    verify_fermion_plan,
)
from sptunwind.jordan_wigner import dense_hamiltonian, dense_operator


def entry(H, a, b):
    return H.A[H.layout.index(*a), H.layout.index(*b)]


def test_layout_indexing():
    lay = MajoranaLayout.chain(4, 2, pairs=(1, 2), extended=True)
    assert lay.n_modes == 4 * 2 * 6
    assert lay.index(1, 0, "c1") == 0 and lay.index(1, 0, "d1") == 1
    assert lay.has(1, 0, "d3") and not lay.has(1, 0, "c4") and lay.has(2, 1, "c4")
    assert lay.index(5, 0, "c1") == lay.index(1, 0, "c1")
    with pytest.raises(ValueError):
        MajoranaLayout(1, 1, (("c1", "d2"),))


def test_kitaev_chain_pattern():
    H = build_model("D", 3)
    for k in (1, 2, 3):
        assert entry(H, (k, 0, "d1"), (k % 3 + 1, 0, "c1")) == 2
    assert np.count_nonzero(H.A) == 6


def test_trivial_model_is_onsite():
    for cls in ("D", "DIII", "BDI(3)", "AIII(1)", "CII"):
        H = build_model(cls, 4, trivial=True)
        pat = dimer_pattern(H)
        assert not pat["bonds"] and not pat["unpaired"]
        assert len(pat["onsite"]) == H.layout.n_modes // 2


def test_extended_cii_has_ancilla_dimers():
    H = build_model("CII", 4, extended=True)
    for s in (0, 1):
        for k in (1, 3):
            assert entry(H, (k, s, "c3"), (k + 1, s, "c4")) == -2
            assert entry(H, (k, s, "d3"), (k + 1, s, "d4")) == 2


def test_bdi_negative_index_reverses_pairing():
    H = build_model("BDI(-2)", 3)
    assert entry(H, (1, 1, "c1"), (2, 1, "d1")) == 2
    assert build_model("BDI(0)", 3).name.startswith("BDI(0)")


def test_model_errors():
    with pytest.raises(UnsupportedCombination):
        build_model("D", 4, extended=True)
    with pytest.raises(UnsupportedCombination):
        build_model("CII", 3, extended=True)
    with pytest.raises(UnsupportedCombination):
        build_model("XYZ", 4)
    with pytest.raises(UnsupportedCombination):
        build_model("D(2)", 4)


def test_hamiltonian_requires_antisymmetry():
    with pytest.raises(ValueError):
        QuadraticMajoranaHamiltonian(MajoranaLayout.chain(1), np.array([[0, 1], [1, 0]]))
    with pytest.raises(LayoutMismatch):
        QuadraticMajoranaHamiltonian(MajoranaLayout.chain(2), np.zeros((2, 2)))


def test_symbol_errors():
    lay = MajoranaLayout.chain(2)
    for name in ("Q", "Pf(1)", "V"):
        with pytest.raises(UnknownSymbol):
            symmetry_op(name, lay)
    with pytest.raises(UnknownSymbol):
        symmetry_op("S_tilde", MajoranaLayout.chain(2, pairs=(1, 2)))


def test_conjugate_by_identity_and_layout_check():
    H = build_model("CII", 4, extended=True)
    assert np.array_equal(conjugate(H, identity_op(H.layout.n_modes)).A, H.A)
    with pytest.raises(LayoutMismatch):
        conjugate(H, identity_op(4))


def test_class_hamiltonians_commute_with_their_symmetries():
    H = build_model("DIII", 4)
    assert np.max(np.abs(conjugate(H, symmetry_op("T_DIII", H.layout)).A - H.A)) < 1e-12
    H = build_model("CII", 4)
    for name in ("S", "C", "Pf", "V(pi/3)"):
        assert np.max(np.abs(conjugate(H, symmetry_op(name, H.layout)).A - H.A)) < 1e-12
    H = build_model("CII", 4, extended=True)
    for name in ("S_tilde", "C", "Pf", "V(1.0)"):
        assert np.max(np.abs(conjugate(H, symmetry_op(name, H.layout)).A - H.A)) < 1e-12


def test_ground_covariance_matches_dense_ground_state():
    H = build_model("D", 3)
    Hd = dense_hamiltonian(H.A)
    w, v = np.linalg.eigh(Hd)
    assert w[1] - w[0] > 0.5
    g1 = ground_covariance(H)
    Ht = build_model("D", 3, trivial=True)
    g2 = ground_covariance(Ht)
    wt, vt = np.linalg.eigh(dense_hamiltonian(Ht.A))
    assert gaussian_fidelity(g1, g2) == pytest.approx(abs(np.vdot(v[:, 0], vt[:, 0])), abs=1e-10)


def test_transform_covariance_matches_dense_state():
    rng = np.random.default_rng(4)
    H = build_model("D", 3)
    x = rng.normal(size=(6, 6))
    op = GaussianOp(6, (("quad", x - x.T), ("K",)))
    g = transform_covariance(ground_covariance(H), op)
    U, kappa = dense_operator(op)
    w, v = np.linalg.eigh(dense_hamiltonian(H.A))
    psi = U @ (v[:, 0].conj() if kappa else v[:, 0])
    # ground state of the conjugated Hamiltonian is the transformed state
    w2, v2 = np.linalg.eigh(dense_hamiltonian(conjugate(H, op).A))
    assert abs(np.vdot(v2[:, 0], psi)) == pytest.approx(1, abs=1e-10)
    assert np.allclose(g, ground_covariance(conjugate(H, op)), atol=1e-10)


def test_dimer_patterns():
    H = build_model("D", 4, boundary="open")
    pat = dimer_pattern(H)
    assert pat["unpaired"] == [(1, 0, "c1"), (4, 0, "d1")]
    target = dimer_pattern(unwound_target(4, 4))
    onsite = {(a[2], b[2]) for a, b in target["onsite"]}
    assert onsite == {("c1", "c2"), ("d1", "d2")}
    # ancilla dimers sit on the even bonds (2, 3) and (4, 1) only
    assert {(a[0], b[0]) for a, b in target["bonds"]} == {(2, 3), (1, 4)}
    assert {(a[2], b[2]) for a, b in target["bonds"]} == {("c4", "c3"), ("d4", "d3"), ("c3", "c4"), ("d3", "d4")}


def test_dimer_pattern_rejects_non_fixed_point():
    lay = MajoranaLayout.chain(2)
    A = np.zeros((4, 4))
    A[0, 1] = A[0, 2] = 1
    with pytest.raises(NotFixedPoint):
        dimer_pattern(QuadraticMajoranaHamiltonian(lay, A - A.T))


def test_nu4_unwinding():
    plan = build_fermion_unwind(4, 4)
    report = verify_fermion_plan(plan)
    assert report.passed, report.failures
    assert report.hamiltonian_residual < 1e-10
    assert max(c["norm"] for c in report.commutators) < 1e-10
    names = {c["generator"] for c in report.commutators}
    assert {"S_tilde", "C", "Pf"} <= names
    assert sum(n.startswith("V(") for n in names) == len(UNWIND_ANGLES)
    assert report.schmidt_rank1_cut is not None and report.input_schmidt_rank1_cut is None


def test_nu2_unwinding_reports_parity_obstruction():
    report = verify_fermion_plan(build_fermion_unwind(2, 4))
    assert report.passed and report.hamiltonian_residual < 1e-10
    obs = report.observations[0]
    assert obs["kind"] == "fermion-parity"
    assert obs["obstructed"] == ["S_tilde"]


def test_circuit_conjugation_gives_target():
    plan = build_fermion_unwind(4, 4)
    A = conjugate(plan.input_hamiltonian, circuit_op(plan)).A
    assert np.max(np.abs(A - plan.target_hamiltonian.A)) < 1e-10


def test_dropping_second_layer_leaves_residual():
    report = verify_fermion_plan(drop_layer(build_fermion_unwind(4, 4), 1))
    assert not report.passed and report.hamiltonian_residual > 0.1


@pytest.mark.parametrize("layer,gate", [(0, 0), (1, 0), (1, 3)])
def test_corrupted_gate_fails(layer, gate):
    report = verify_fermion_plan(corrupt_gate(build_fermion_unwind(4, 4), layer, gate))
    assert not report.passed
    assert "conjugated Hamiltonian differs from the target" in report.failures


def test_gate_level_commutators_are_sign_exact():
    # exp((pi/2) c d) = c d has R = -1, so its mode rotation is invariant under
    # K even though K (c d) K = -c d
    lay = MajoranaLayout.chain(1)
    theta = np.zeros((2, 2))
    theta[0, 1], theta[1, 0] = math.pi, -math.pi
    op = GaussianOp(2, (("quad", theta),))
    flip = symmetry_op("K", lay)
    assert np.allclose(flip.R @ op.R @ flip.R.T, op.R)
    assert op_commutator(op, flip) > 1


def test_product_cut_of_trivial_state():
    H = build_model("CII", 4, trivial=True)
    assert product_cut(ground_covariance(H), H.layout) == (1, 1)
    assert product_cut(ground_covariance(build_model("CII", 4)), H.layout) is None


def test_unwind_errors():
    with pytest.raises(UnsupportedCombination):
        build_fermion_unwind(3)
    with pytest.raises(UnsupportedCombination):
        build_fermion_unwind(2, 4, "CII")
