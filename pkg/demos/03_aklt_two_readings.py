"""
AKLT-like chain: SO(3) versus time reversal
===========================================

The same swap circuit unwinds the singlet chain whether the protecting
symmetry is read as SO(3), extended to SU(2), or as time reversal, extended
so that it squares to -1 on every site.
"""
from sptunwind.circuits import build_extension_plan, caricature_layout, site_square_phases, time_reversal, verify_plan

for symmetry in ("su2", "time-reversal"):
    report = verify_plan(build_extension_plan("aklt", L=4, symmetry=symmetry))
    worst = max(c["norm"] for c in report.commutators)
    print(f"{symmetry:>13}: fidelity {report.fidelity}, residual {report.hamiltonian_residual}, "
          f"max commutator {worst:.1e}")

base = caricature_layout(4)
print("T^2 per site, two spins:", site_square_phases(time_reversal(base, ("A", "B")), base))
plan = build_extension_plan("aklt", L=4, symmetry="time-reversal")
print("T^2 per site, three spins:", site_square_phases(plan.symmetries[0], plan.layout))
