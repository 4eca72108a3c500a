import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from sptunwind.cohomology import (
    ZnCocycle2,
    class_coordinates,
    coboundary,
    compute_h2,
    is_cocycle,
    pullback,
    trivializing_extension,
)
from sptunwind.fermion import GaussianOp, MajoranaLayout, QuadraticMajoranaHamiltonian, conjugate
from sptunwind.groups import (
    central_extension,
    cyclic_group,
    dihedral_group,
    direct_product,
    is_isomorphic_small,
    klein_four,
)
from sptunwind.jordan_wigner import dense_operator
from sptunwind.spinchain import (
    ChainLayout,
    CircuitLayer,
    LocalOperator,
    commutator_norm,
    commutator_norm_dense,
    onsite_symmetry,
)

GROUPS = {
    "K4": klein_four(),
    "D8": dihedral_group(8),
    "Z3xZ3": direct_product(cyclic_group(3), cyclic_group(3)),
}
H2 = {name: compute_h2(g) for name, g in GROUPS.items()}

seeds = st.integers(0, 2 ** 32 - 1)
group_names = st.sampled_from(sorted(GROUPS))


def random_beta(rng, G, n):
    beta = rng.integers(0, n, G.order)
    beta[G.identity] = 0
    return beta


def random_class_rep(rng, name):
    h2 = H2[name]
    c = h2.representatives[0].scaled(0)
    for rep, d in zip(h2.representatives, h2.invariant_factors):
        c = c + rep.scaled(int(rng.integers(0, d)))
    return c


@settings(max_examples=40, deadline=None)
@given(group_names, seeds)
def test_class_is_invariant_under_coboundaries(name, seed):
    rng = np.random.default_rng(seed)
    G = GROUPS[name]
    c = random_class_rep(rng, name)
    shifted = c + coboundary(G, c.modulus, random_beta(rng, G, c.modulus))
    assert is_cocycle(shifted)
    assert class_coordinates(shifted, H2[name]) == class_coordinates(c, H2[name])


@settings(max_examples=25, deadline=None)
@given(group_names, seeds)
def test_trivializing_extension_witness(name, seed):
    rng = np.random.default_rng(seed)
    G = GROUPS[name]
    c = random_class_rep(rng, name)
    c = c + coboundary(G, c.modulus, random_beta(rng, G, c.modulus))
    seq, w = trivializing_extension(G, c)
    assert coboundary(seq.total, w.modulus, w.beta) == pullback(seq.projection, c)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_extension_isomorphism_type_depends_only_on_class(seed):
    rng = np.random.default_rng(seed)
    K = GROUPS["K4"]
    w = np.zeros((4, 4), dtype=int)
    w[2, 1] = w[2, 3] = w[3, 1] = w[3, 3] = 1
    c = ZnCocycle2(K, 2, w)
    shifted = c + coboundary(K, 2, random_beta(rng, K, 2))
    a = central_extension(K, 2, c).total
    b = central_extension(K, 2, shifted).total
    assert is_isomorphic_small(a, b)


def antisym(rng, n):
    x = rng.normal(size=(n, n))
    return x - x.T


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4))
def test_rotation_composes_like_operators(seed, nf):
    rng = np.random.default_rng(seed)
    n = 2 * nf
    a = GaussianOp(n, (("quad", antisym(rng, n)),) + ((("K",),) if seed % 2 else ()))
    b = GaussianOp(n, (("quad", antisym(rng, n)),))
    ab = a @ b
    assert np.allclose(ab.R, a.R @ b.R, atol=1e-10)
    Ua, ka = dense_operator(a)
    Ub, _ = dense_operator(b)
    Uab, kab = dense_operator(ab)
    expected = Ua @ (Ub.conj() if ka else Ub)
    assert kab == ka
    assert np.allclose(Uab, expected, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 5))
def test_conjugation_is_a_group_action(seed, nf):
    rng = np.random.default_rng(seed)
    n = 2 * nf
    H = QuadraticMajoranaHamiltonian(MajoranaLayout.chain(nf), antisym(rng, n))
    a = GaussianOp(n, (("quad", antisym(rng, n)), ("K",)))
    b = GaussianOp(n, (("quad", antisym(rng, n)),))
    lhs = conjugate(H, a @ b).A
    rhs = conjugate(conjugate(H, b), a).A
    assert np.allclose(lhs, rhs, atol=1e-10)
    assert np.array_equal(lhs, -lhs.T)


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@settings(max_examples=25, deadline=None)
@given(seeds, st.booleans())
def test_layer_commutator_routes_agree(seed, anti):
    rng = np.random.default_rng(seed)
    layout = ChainLayout.uniform(2, [("A", 2), ("B", 2)])
    layer = CircuitLayer((LocalOperator(((1, "B"), (2, "A")), random_unitary(rng, 4)),
                          LocalOperator(((2, "B"), (1, "A")), random_unitary(rng, 4))))
    s = onsite_symmetry(layout, lambda site, label: random_unitary(rng, 2), antiunitary=anti)
    assert abs(commutator_norm(layer, s, layout) - commutator_norm_dense(layer, s, layout)) < 1e-9
