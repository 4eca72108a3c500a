"""One test per acceptance criterion; each prints a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

import oracles
from sptunwind import circuits
from sptunwind.circuits import (
    boundary_gap_check,
    build_breaking_plan,
    build_extension_plan,
    build_inversion_plan,
    corrupt_plan,
    onsite_extension_check,
    site_square_phases,
    time_reversal,
    verify_plan,
)
from sptunwind.cohomology import ZnCocycle2, coboundary, coboundary_witness, compute_h2, pullback, trivializing_extension
from sptunwind.fermion import (
    GaussianOp,
    MajoranaLayout,
    QuadraticMajoranaHamiltonian,
    build_fermion_unwind,
    conjugate,
    corrupt_gate,
    symmetry_op,
    verify_fermion_plan,
)
from sptunwind.groups import cyclic_group, direct_product, dihedral_group, is_isomorphic_small, klein_four
from sptunwind.io import load_group
from sptunwind.jordan_wigner import dense_conjugate, dense_hamiltonian, dense_operator, dense_square, phase_distance
from sptunwind.projective import detect_factor_system

TOL = 1e-10


def record(capsys, number, title, checks):
    failed = [name for name, ok in checks.items() if not ok]
    status = "PASS" if not failed else "FAIL"
    with capsys.disabled():
        suffix = f" (failed: {', '.join(failed)})" if failed else ""
        print(f"\nACCEPTANCE {number:>2} {status}: {title}{suffix}")
    assert not failed, failed


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def plan_ok(report, residual=True):
    return (max(c["norm"] for c in report.commutators) < TOL
            and report.fidelity >= 1 - TOL
            and (not residual or report.hamiltonian_residual < TOL)
            and report.schmidt_rank1_cut is not None
            and report.input_schmidt_rank1_cut is None)


def test_criterion_01_cohomology(capsys):
    C = cyclic_group
    cases = {"Z2": (C(2), []), "Z4": (C(4), []), "Z2xZ2": (klein_four(), [2]),
             "D8": (dihedral_group(8), [2]), "Z3xZ3": (direct_product(C(3), C(3)), [3])}
    checks = {}
    for name, (g, expected) in cases.items():
        h2, dt = timed(lambda: compute_h2(g))
        checks[f"{name} = {expected}"] = h2.invariant_factors == expected
        checks[f"{name} under 5 s"] = dt < 5
    z33 = cases["Z3xZ3"][0]
    checks["Z3xZ3 bilinear enumeration at n=3"] = oracles.bilinear_class_count((3, 3), 3) == 3
    checks["Z3xZ3 F_3 cocycle space"] = oracles.abelian_u1_class_count_prime(z33.table.tolist(), z33.identity, 3) == 3
    record(capsys, 1, "H2 of Z2, Z4, Z2xZ2, D8, Z3xZ3", checks)


def test_criterion_02_extension_algebra(capsys):
    K = klein_four()
    w = np.zeros((4, 4), dtype=int)
    w[2, 1] = w[2, 3] = w[3, 1] = w[3, 3] = 1
    c = ZnCocycle2(K, 2, w)
    seq, witness = trivializing_extension(K, c)
    pulled = pullback(seq.projection, c)
    Z2 = cyclic_group(2)
    seq2, _ = trivializing_extension(Z2, ZnCocycle2(Z2, 2, [[0, 0], [0, 1]]))
    checks = {
        "order 8": seq.total.order == 8,
        "nonabelian": not seq.total.is_abelian(),
        "two elements of order 4": seq.total.order_profile().get(4) == 2,
        "isomorphic to D8": is_isomorphic_small(seq.total, dihedral_group(8)),
        "pullback has witness": coboundary(seq.total, witness.modulus, witness.beta) == pulled
        and coboundary(seq.total, 2, coboundary_witness(pulled).beta) == pulled,
        "Z2 extension is Z4": is_isomorphic_small(seq2.total, cyclic_group(4)),
    }
    record(capsys, 2, "trivializing extensions of Z2xZ2 and Z2", checks)


def test_criterion_03_cluster(capsys):
    report, dt = timed(lambda: verify_plan(build_extension_plan("cluster", L=4)))
    record(capsys, 3, "cluster unwinding at L=4", {
        "thresholds": plan_ok(report), "report passes": report.passed, "under 10 s": dt < 10})


def test_criterion_04_aklt(capsys):
    su2 = verify_plan(build_extension_plan("aklt", symmetry="su2"))
    tr_plan = build_extension_plan("aklt", symmetry="time-reversal")
    tr = verify_plan(tr_plan)
    base_layout = circuits.caricature_layout(4)
    base = site_square_phases(time_reversal(base_layout, ("A", "B")), base_layout)
    ext = site_square_phases(tr_plan.symmetries[0], tr_plan.layout)
    record(capsys, 4, "AKLT-like unwinding under SU(2) and time reversal", {
        "su2 thresholds": plan_ok(su2), "time-reversal thresholds": plan_ok(tr),
        "T^2 = +1 per site on two spins": all(v == 1 for v in base.values()),
        "T^2 = -1 per site on three spins": all(v == -1 for v in ext.values()),
    })


def test_criterion_05_three_roads(capsys):
    br = verify_plan(build_breaking_plan())
    inv = verify_plan(build_inversion_plan())
    record(capsys, 5, "breaking and inversion circuits", {
        "breaking reaches product state": br.fidelity >= 1 - TOL and br.schmidt_rank1_cut is not None,
        "breaking layer norm > 0.1": any(c["norm"] > 0.1 for c in br.commutators),
        "inversion commutes": max(c["norm"] for c in inv.commutators) < TOL,
        "inversion reaches target": inv.fidelity >= 1 - TOL,
    })


def test_criterion_06_general_algorithm(capsys):
    checks = {}
    for name in ("pauli", "clock_shift3"):
        f = detect_factor_system(load_group(name).rep)
        report = verify_plan(build_extension_plan("general", rep=f))
        ext = onsite_extension_check(f)
        checks[f"{name} plan thresholds"] = plan_ok(report) and report.passed
        checks[f"{name} extended matrices linear"] = ext["odd_generated_class_zero"] and ext["even_generated_class_zero"]
    record(capsys, 6, "general extension algorithm for Z2xZ2 and Z3xZ3", checks)


def test_criterion_07_boundary_gap(capsys):
    out, dt = timed(lambda: boundary_gap_check(3))
    record(capsys, 7, "open-chain boundary gapping at L=3", {
        "open degeneracy 4": out["open_degeneracy"] == 4,
        "boundary singlet degeneracy 1": out["direct_degeneracy"] == 1,
        "boundary singlet gap > 0.1": out["direct_gap"] > 0.1,
        "under 10 s": dt < 10,
    })


def test_criterion_08_fermion_unwinding(capsys):
    def both():
        return verify_fermion_plan(build_fermion_unwind(4, 4)), verify_fermion_plan(build_fermion_unwind(2, 4))
    (nu4, nu2), dt = timed(both)
    gens = {c["generator"] for c in nu4.commutators}
    obs = [o for o in nu2.observations if o["kind"] == "fermion-parity"]
    record(capsys, 8, "fermionic nu=4 and nu=2 unwinding", {
        "nu=4 residual": nu4.hamiltonian_residual < TOL,
        "nu=4 commutators": max(c["norm"] for c in nu4.commutators) < TOL,
        "nu=4 generator set": {"S_tilde", "C", "Pf"} <= gens and sum(g.startswith("V(") for g in gens) == 3,
        "nu=2 residual": nu2.hamiltonian_residual < TOL,
        "nu=2 parity observation": bool(obs) and bool(obs[0]["obstructed"]),
        "under 5 s": dt < 5,
    })


def test_criterion_09_operator_identities(capsys):
    one = MajoranaLayout.chain(1, 2)
    cii = MajoranaLayout.chain(1, 2, pairs=(1, 2))
    pf1, _ = dense_operator(symmetry_op("Pf", one))
    pf2, _ = dense_operator(symmetry_op("Pf", cii))
    C, _ = dense_operator(symmetry_op("C", cii))
    S, _ = dense_operator(symmetry_op("S", cii))
    checks = {
        "T_DIII^2 = Pf": phase_distance(dense_square(symmetry_op("T_DIII", one)), pf1) < 1e-8,
        "C^2 = Pf": phase_distance(dense_square(symmetry_op("C", cii)), pf2) < 1e-8,
        "D(pi) = Pf": phase_distance(dense_operator(symmetry_op("D(pi)", one))[0], pf1) < 1e-8,
        "[C, S] = 0": phase_distance(C @ S @ C.T, S) < 1e-8,
    }
    for theta in (math.pi / 7, math.pi / 3, 1.0):
        V, _ = dense_operator(symmetry_op("V", cii, theta))
        Vm, _ = dense_operator(symmetry_op("V", cii, -theta))
        checks[f"C V({theta:.3f}) C^-1 = V(-theta)"] = phase_distance(C @ V @ C.conj().T, Vm) < 1e-8
    record(capsys, 9, "dense operator identities", checks)


def test_criterion_10_gaussian_vs_dense(capsys):
    rng = np.random.default_rng(0)
    worst = 0.0
    for i in range(50):
        nf = int(rng.integers(1, 7))
        n = 2 * nf
        x, y = rng.normal(size=(n, n)), rng.normal(size=(n, n))
        H = QuadraticMajoranaHamiltonian(MajoranaLayout.chain(nf), x - x.T)
        op = GaussianOp(n, (("quad", y - y.T),) + ((("K",),) if i % 2 else ()))
        diff = dense_hamiltonian(conjugate(H, op).A) - dense_conjugate(dense_hamiltonian(H.A), op)
        worst = max(worst, float(np.max(np.abs(diff))))
    record(capsys, 10, f"50 random Gaussian conjugations vs dense (worst {worst:.1e})",
           {"within 1e-8": worst < 1e-8})


def test_criterion_11_negative_controls(capsys):
    pauli = detect_factor_system(load_group("pauli").rep)
    clock = detect_factor_system(load_group("clock_shift3").rep)
    plans = {
        "cluster": build_extension_plan("cluster"),
        "aklt-so3": build_extension_plan("aklt", symmetry="su2"),
        "aklt-tr": build_extension_plan("aklt", symmetry="time-reversal"),
        "general-pauli": build_extension_plan("general", rep=pauli),
        "general-clock": build_extension_plan("general", rep=clock),
        "inversion": build_inversion_plan(),
        "breaking": build_breaking_plan(),
    }
    checks = {}
    for name, plan in plans.items():
        assert verify_plan(plan).passed
        checks[name] = not verify_plan(corrupt_plan(plan, 1, 0)).passed
    for nu in (4, 2):
        plan = build_fermion_unwind(nu, 4)
        assert verify_fermion_plan(plan).passed
        checks[f"fermion-nu{nu}"] = not verify_fermion_plan(corrupt_gate(plan, 1, 0)).passed
    record(capsys, 11, "single-gate corruption fails every plan", checks)
