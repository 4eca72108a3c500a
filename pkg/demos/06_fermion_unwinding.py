"""
Majorana chains
===============

Two Gaussian layers unwind the extended two-layer chain while commuting with
every CII generator.  The one-layer version also trivializes, but its
extended chiral symmetry changes fermion parity on every site.
"""
from sptunwind.fermion import build_fermion_unwind, dimer_pattern, verify_fermion_plan

for nu in (4, 2):
    plan = build_fermion_unwind(nu, L=4)
    report = verify_fermion_plan(plan)
    worst = max(c["norm"] for c in report.commutators)
    print(f"{plan.name}: residual {report.hamiltonian_residual}, fidelity {report.fidelity}, "
          f"max commutator {worst:.1e}")
    for obs in report.observations:
        print("   parity-obstructed generators:", obs["obstructed"])

target = dimer_pattern(build_fermion_unwind(4, 4).target_hamiltonian)
print("target pairs on-site:", len(target["onsite"]), "ancilla dimers:", len(target["bonds"]))
