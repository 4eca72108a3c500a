import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sptunwind.errors import NotACoboundary
from sptunwind.snf import invariant_factors, smith_normal_form, solve_mod


def _check(A):
    A = np.array(A, dtype=np.int64)
    f = smith_normal_form(A)
    D = f.D()
    assert np.array_equal((f.U.astype(object) @ A.astype(object) @ f.V.astype(object)), D.astype(object))
    assert round(abs(float(np.linalg.det(f.U.astype(float))))) == 1
    assert round(abs(float(np.linalg.det(f.V.astype(float))))) == 1
    d = [int(x) for x in f.diagonal]
    assert all(x >= 0 for x in d)
    for a, b in zip(d, d[1:]):
        assert (b == 0) or (a != 0 and b % a == 0)
    return d


def test_known_forms():
    assert _check([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == [2, 6, 12]
    assert invariant_factors([[2, 0], [0, 3]]) == [6]
    assert invariant_factors([[0, 0], [0, 0]]) == []
    assert _check([[4]]) == [4]


matrices = st.integers(1, 5).flatmap(
    lambda m: st.integers(1, 5).flatmap(
        lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=m, max_size=m)))


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_snf_invariants(A):
    d = _check(A)
    assert sum(1 for x in d if x) == np.linalg.matrix_rank(np.array(A, dtype=float))


@settings(max_examples=100, deadline=None)
@given(matrices, st.integers(2, 12), st.data())
def test_solve_mod_roundtrip(A, n, data):
    A = np.array(A, dtype=np.int64)
    x0 = np.array(data.draw(st.lists(st.integers(0, n - 1), min_size=A.shape[1], max_size=A.shape[1])))
    b = (A @ x0) % n
    x = solve_mod(A, b, n)
    assert np.array_equal((A @ x) % n, b)


def test_inconsistent_system_has_certificate():
    with pytest.raises(NotACoboundary) as exc:
        solve_mod(np.array([[2]]), np.array([1]), 4)
    assert exc.value.certificate["modulus"] == 4
