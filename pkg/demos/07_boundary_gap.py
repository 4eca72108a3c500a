"""
Gapping out the edge spins
==========================

An open singlet chain leaves one free spin at each end, so the ground space
is four-fold degenerate.  Binding the two ends into a singlet, either
directly or through boundary registers, leaves a unique gapped ground state.
"""
from sptunwind.circuits import boundary_gap_check

for key, value in boundary_gap_check(L=3).items():
    print(f"{key:>22}: {value}")
