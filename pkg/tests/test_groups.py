import warnings

import numpy as np
import pytest

from sptunwind.cohomology import ZnCocycle2, zero_cocycle
from sptunwind.errors import ClosureBoundExceeded, NonUnitaryGenerator, NotACocycle, NotAGroup
from sptunwind.groups import (
    GroupHom,
    HeuristicIsomorphismWarning,
    central_extension,
    cyclic_group,
    dihedral_group,
    direct_product,
    find_isomorphism,
    from_matrix_generators,
    from_table,
    identity_hom,
    is_isomorphic_small,
    klein_four,
    quaternion_group,
    trivial_group,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)


def test_trivial_table():
    g = from_table([[0]])
    assert g.order == 1 and g.identity == 0


def test_xor_table_is_klein_four():
    g = from_table([[a ^ b for b in range(4)] for a in range(4)])
    assert g.order == 4 and g.is_abelian()
    assert g.order_profile() == {1: 1, 2: 3}


def test_repeated_row_entry_rejected():
    with pytest.raises(NotAGroup):
        from_table([[0, 1, 1], [1, 2, 0], [2, 0, 1]])


def test_missing_identity_rejected():
    with pytest.raises(NotAGroup):
        # x*y = -x-y mod 3 is a Latin square with no identity
        from_table([[0, 2, 1], [2, 1, 0], [1, 0, 2]])


def test_nonassociative_latin_square_reports_triple():
    # a Latin square with identity 0 that is not associative (order 5 loop)
    t = [[0, 1, 2, 3, 4],
         [1, 0, 3, 4, 2],
         [2, 4, 0, 1, 3],
         [3, 2, 4, 0, 1],
         [4, 3, 1, 2, 0]]
    with pytest.raises(NotAGroup) as exc:
        from_table(t)
    assert exc.value.witness is not None


def test_inverse_and_identity_invariants():
    for g in (cyclic_group(6), dihedral_group(8), quaternion_group(), direct_product(cyclic_group(3), cyclic_group(3))):
        e = g.identity
        assert list(g.table[e]) == list(range(g.order))
        for x in range(g.order):
            assert g.mul(x, g.inv(x)) == e


def test_dihedral_and_quaternion_profiles():
    assert dihedral_group(8).order_profile() == {1: 1, 2: 5, 4: 2}
    assert quaternion_group().order_profile() == {1: 1, 2: 1, 4: 6}
    assert not dihedral_group(8).is_abelian()


def test_sigma_x_generates_z2():
    g, rep = from_matrix_generators([X])
    assert g.order == 2
    assert rep.homomorphism_defect() < 1e-12


def test_two_qubit_cluster_generators_close_to_order_four():
    # {XX, (iZ)(iZ)} commute, so they generate Z2 x Z2 rather than the D8 the
    # extended three-qubit generators produce
    g, rep = from_matrix_generators([np.kron(X, X), np.kron(1j * Z, 1j * Z)])
    assert g.order == 4 and g.order_profile() == {1: 1, 2: 3}


def test_three_qubit_extended_generators_give_d8():
    vx = np.kron(np.kron(X, X), X)
    vz = np.kron(np.kron(1j * Z, 1j * Z), 1j * Z)
    g, rep = from_matrix_generators([vx, vz])
    assert g.order == 8
    assert g.order_profile() == {1: 1, 2: 5, 4: 2}
    assert is_isomorphic_small(g, dihedral_group(8))
    assert rep.homomorphism_defect() < 1e-12


def test_closure_bound_and_nonunitary():
    theta = 1.0  # irrational rotation angle never closes
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    with pytest.raises(ClosureBoundExceeded):
        from_matrix_generators([R], bound=64)
    with pytest.raises(NonUnitaryGenerator):
        from_matrix_generators([2 * np.eye(2)])


def test_homomorphism_validation():
    Z4, Z2 = cyclic_group(4), cyclic_group(2)
    s = GroupHom(Z4, Z2, np.array([0, 1, 0, 1]))
    assert s.kernel() == [0, 2] and s.is_surjective() and not s.is_injective()
    with pytest.raises(ValueError):
        GroupHom(Z2, Z4, np.array([0, 1]))
    assert identity_hom(Z4).is_injective()


def test_trivial_extension_is_direct_product():
    Z2 = cyclic_group(2)
    seq = central_extension(Z2, 2, zero_cocycle(Z2, 2))
    assert is_isomorphic_small(seq.total, klein_four())


def test_zero_cocycle_extensions_match_direct_products():
    for G in (cyclic_group(2), cyclic_group(3), cyclic_group(4), klein_four()):
        for n in (2, 3):
            seq = central_extension(G, n, zero_cocycle(G, n))
            assert is_isomorphic_small(seq.total, direct_product(cyclic_group(n), G))


def test_pauli_class_extension_is_d8_not_q8():
    K = klein_four()  # 0=e, 1=z, 2=x, 3=xz
    w = np.zeros((4, 4), dtype=int)
    # x then z picks up the sign: the mixed products of x and z
    w[2, 1] = w[2, 3] = w[3, 1] = w[3, 3] = 1
    c = ZnCocycle2(K, 2, w)
    seq = central_extension(K, 2, c)
    assert seq.total.order == 8 and not seq.total.is_abelian()
    assert seq.total.order_profile()[4] == 2
    assert find_isomorphism(seq.total, dihedral_group(8)) is not None


def test_z2_nontrivial_extension_is_z4():
    Z2 = cyclic_group(2)
    seq = central_extension(Z2, 2, ZnCocycle2(Z2, 2, [[0, 0], [0, 1]]))
    assert is_isomorphic_small(seq.total, cyclic_group(4))


def test_sequence_invariants():
    K = klein_four()
    w = np.zeros((4, 4), dtype=int)
    w[2, 1] = w[2, 3] = w[3, 1] = w[3, 3] = 1
    seq = central_extension(K, 2, ZnCocycle2(K, 2, w))
    assert seq.total.order == seq.k_group.order * seq.quotient.order
    comp = seq.projection.map[seq.inclusion.map]
    assert np.all(comp == seq.quotient.identity)
    center = set(seq.total.center())
    assert set(seq.inclusion.image()) <= center
    for idx in range(seq.total.order):
        assert seq.element(*seq.pair(idx)) == idx


def test_extension_rejects_non_cocycle():
    Z3 = cyclic_group(3)
    w = np.zeros((3, 3), dtype=int)
    w[1, 1] = 1
    with pytest.raises(NotACocycle):
        central_extension(Z3, 3, w)


def test_isomorphism_small_cases():
    assert not is_isomorphic_small(cyclic_group(4), klein_four())
    for g in (trivial_group(), dihedral_group(8), quaternion_group()):
        assert is_isomorphic_small(g, g)
    assert not is_isomorphic_small(dihedral_group(8), quaternion_group())


def test_large_orders_use_flagged_heuristic():
    a = cyclic_group(18)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        assert is_isomorphic_small(a, direct_product(cyclic_group(2), cyclic_group(9)))
    assert any(issubclass(r.category, HeuristicIsomorphismWarning) for r in rec)
