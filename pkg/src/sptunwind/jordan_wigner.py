"""Dense Jordan-Wigner realization of Majorana operators (validation oracle).

Mode ``2j`` is ``c_j = Z...Z X`` and mode ``2j+1`` is ``d_j = Z...Z Y`` on
qubit ``j``.  ``c`` is real and ``d`` imaginary, so complex conjugation in the
qubit basis fixes ``c`` and flips ``d``.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DimensionTooLarge

MAX_FERMIONS = 7

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)


@lru_cache(maxsize=8)
def majorana_operators(n_fermions: int) -> tuple:
    if n_fermions > MAX_FERMIONS:
        raise DimensionTooLarge(f"{n_fermions} fermions exceed the dense limit {MAX_FERMIONS}")
    ops = []
    for j in range(n_fermions):
        for P in (_X, _Y):
            m = np.ones((1, 1), dtype=complex)
            for q in range(n_fermions):
                m = np.kron(m, _Z if q < j else (P if q == j else np.eye(2)))
            m.setflags(write=False)
            ops.append(m)
    return tuple(ops)


def quadratic_form(theta: np.ndarray, gammas) -> np.ndarray:
    """``(1/4) sum theta_mn gamma_m gamma_n``."""
    n = len(gammas)
    out = np.zeros_like(gammas[0])
    for m in range(n):
        for k in range(n):
            if theta[m, k]:
                out = out + 0.25 * theta[m, k] * (gammas[m] @ gammas[k])
    return out


def dense_hamiltonian(A: np.ndarray) -> np.ndarray:
    """``(i/4) gamma^T A gamma``."""
    gammas = majorana_operators(A.shape[0] // 2)
    return 1j * quadratic_form(A, gammas)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    """``a = e^{i phi} b`` for some phase, entrywise within ``tol``."""
    return phase_distance(a, b) <= tol


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    inner = np.vdot(b, a)
    if abs(inner) < 1e-14:
        return float(np.max(np.abs(a - b)))
    phase = inner / abs(inner)
    return float(np.max(np.abs(a - phase * b)))


def dense_operator(op) -> tuple:
    """``(U, antiunitary)`` with the operator acting as ``psi -> U psi`` or ``U psi*``."""
    from scipy.linalg import expm

    gammas = majorana_operators(op.n_modes // 2)
    dim = gammas[0].shape[0]
    U = np.eye(dim, dtype=complex)
    kappa = False
    for f in op.factors:
        if f[0] == "quad":
            F = expm(quadratic_form(f[1], gammas))
        elif f[0] == "mono":
            F = f[2] * np.eye(dim, dtype=complex)
            for m in f[1]:
                F = F @ gammas[m]
        else:
            kappa = not kappa
            continue
        U = U @ (F.conj() if kappa else F)
    return U, kappa


def dense_conjugate(H: np.ndarray, op) -> np.ndarray:
    """``op H op^-1`` densely."""
    U, kappa = dense_operator(op)
    return U @ (H.conj() if kappa else H) @ U.conj().T


def dense_square(op) -> np.ndarray:
    """Unitary matrix of ``op op``."""
    U, kappa = dense_operator(op)
    return U @ (U.conj() if kappa else U)


def jw_dense_oracle(layout) -> tuple:
    """Dense Majorana matrices for every mode of ``layout``."""
    return majorana_operators(layout.n_fermions)
