"""
Unwinding the cluster state
===========================

Each site carries the two cluster-state qubits plus one ancilla.  Two layers
of swaps move every inter-site bond onto a single site while commuting with
the extended Z2 x Z2 generators.
"""
from sptunwind.circuits import build_extension_plan, verify_plan

plan = build_extension_plan("cluster", L=4)
report = verify_plan(plan)

for layer in report.layers:
    print("layer %d: %s" % (layer["layer"], ", ".join(layer["gates"])))
worst = max(c["norm"] for c in report.commutators)
print("largest layer/generator commutator: %.1e" % worst)
print("fidelity with the on-site product state:", report.fidelity)
print("Hamiltonian residual:", report.hamiltonian_residual)
print("input has a product cut:", report.input_schmidt_rank1_cut is not None)
print("output product cut (start, length):", report.schmidt_rank1_block)
print("PASS" if report.passed else "FAIL: %s" % report.failures)
