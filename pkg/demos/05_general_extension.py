"""
The general recipe for any projective on-site representation
=============================================================

Given matrices V(g) of a projective representation, the odd sites get an
ancilla in the same class and the even sites one in the inverse class.  The
same two swap layers then unwind the chain.
"""
from sptunwind.circuits import build_extension_plan, onsite_extension_check, verify_plan
from sptunwind.io import load_group
from sptunwind.projective import detect_factor_system

for name in ("pauli", "clock_shift3"):
    spec = load_group(name)
    f = detect_factor_system(spec.rep)
    report = verify_plan(build_extension_plan("general", L=4, rep=f))
    check = onsite_extension_check(f)
    print(f"{spec.name}: J={spec.rep.dim}, passed={report.passed}, fidelity={report.fidelity}")
    print("   odd/even classes over G:", check["odd_class"], check["even_class"])
    print("   group generated by the odd-site matrices has order", check["odd_generated_order"],
          "and they are linear there:", check["odd_generated_class_zero"])
