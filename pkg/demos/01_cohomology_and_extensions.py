"""
Projective classes and the groups that remove them
==================================================

The Pauli matrices represent Z2 x Z2 only up to a sign.  That sign is a
nontrivial class in H^2(Z2 x Z2, U(1)) = Z2, and a central extension by Z2
absorbs it: the extended group is D8.
"""
import numpy as np

from sptunwind.cohomology import class_coordinates, compute_h2, trivializing_extension
from sptunwind.groups import dihedral_group, find_isomorphism
from sptunwind.io import load_group
from sptunwind.projective import detect_factor_system, lift_to_extension

spec = load_group("pauli")
print("group:", spec.name, "order", spec.group.order)
h2 = compute_h2(spec.group)
print("H2 invariant factors:", h2.invariant_factors)

f = detect_factor_system(spec.rep)
print("factor system lives in Z_%d; class coordinates %s" % (f.cocycle.modulus, class_coordinates(f.cocycle, h2)))

seq, witness = trivializing_extension(spec.group, f.cocycle)
print("extension order:", seq.total.order, "element orders:", seq.total.order_profile())
print("isomorphic to D8:", find_isomorphism(seq.total, dihedral_group(8)) is not None)

# on the extension the Pauli matrices become an honest representation
lifted = lift_to_extension(f, seq)
print("homomorphism defect after lifting: %.1e" % lifted.homomorphism_defect())

for name in ("z2", "z4", "d8", "z3z3"):
    g = load_group(name).group
    print(f"H2({name}) factors:", compute_h2(g).invariant_factors)
