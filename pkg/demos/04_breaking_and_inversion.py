"""
Unwinding without extension
===========================

A controlled-X circuit reaches the product state but breaks Z2 x Z2 on the
way.  Stacking two copies instead lets plain swaps do the job without
breaking anything.
"""
from sptunwind.circuits import build_breaking_plan, build_inversion_plan, double_circuit, verify_plan
from sptunwind.spinchain import apply_circuit

br = verify_plan(build_breaking_plan(L=4))
for c in br.commutators:
    print("breaking layer %d vs %-5s norm %.3f" % (c["layer"], c["generator"], c["norm"]))
print("breaking fidelity:", br.fidelity)

plan = build_inversion_plan(L=4)
inv = verify_plan(plan)
print("stacked copies: max commutator %.1e, fidelity %s" % (
    max(c["norm"] for c in inv.commutators), inv.fidelity))
psi = plan.input_state
print("circuit applied twice returns the input: %.12f" % apply_circuit(double_circuit(plan.circuit), psi).fidelity(psi))
