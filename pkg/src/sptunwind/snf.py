"""Integer Smith normal form and linear congruence solving.

``smith_normal_form(A)`` returns ``(U, D, V)`` with ``U @ A @ V == D`` where
``U`` and ``V`` are unimodular and ``D`` is diagonal with each diagonal entry
dividing the next.  Either transform can be skipped when only the other one
is needed; the big coboundary matrices only ever need ``V``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Optional

import numpy as np

from .errors import NotACoboundary

# int64 headroom: switch to Python integers before products can overflow
_SAFE = 2 ** 30


@dataclass
class SmithForm:
    diagonal: np.ndarray
    U: Optional[np.ndarray]
    V: Optional[np.ndarray]
    shape: tuple

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.diagonal))

    def D(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=self.diagonal.dtype)
        k = len(self.diagonal)
        out[np.arange(k), np.arange(k)] = self.diagonal
        return out


def _as_object(*arrs):
    return tuple(None if a is None else a.astype(object) for a in arrs)


def smith_normal_form(A, track_u: bool = True, track_v: bool = True) -> SmithForm:
    A = np.array(A, dtype=np.int64)
    m, n = A.shape
    U = np.eye(m, dtype=np.int64) if track_u else None
    V = np.eye(n, dtype=np.int64) if track_v else None
    big = False

    def maybe_promote():
        nonlocal A, U, V, big
        if big:
            return
        worst = max(int(np.abs(x).max(initial=0)) for x in (A, U, V) if x is not None)
        if worst > _SAFE:
            A, U, V = _as_object(A, U, V)
            big = True

    for k in range(min(m, n)):
        while True:
            sub = A[k:, k:]
            nz = np.argwhere(sub != 0)
            if len(nz) == 0:
                return _finish(A, U, V, k, (m, n))
            absvals = np.abs(sub[nz[:, 0], nz[:, 1]])
            i, j = nz[int(np.argmin(absvals))] + k
            if i != k:
                A[[k, i]] = A[[i, k]]
                if U is not None:
                    U[[k, i]] = U[[i, k]]
            if j != k:
                A[:, [k, j]] = A[:, [j, k]]
                if V is not None:
                    V[:, [k, j]] = V[:, [j, k]]
            p = A[k, k]
            # clear column k below the pivot with floor-division steps
            q = A[k + 1:, k] // p
            if np.any(q):
                A[k + 1:] -= np.outer(q, A[k])
                if U is not None:
                    U[k + 1:] -= np.outer(q, U[k])
            q = A[k, k + 1:] // p
            if np.any(q):
                A[:, k + 1:] -= np.outer(A[:, k], q)
                if V is not None:
                    V[:, k + 1:] -= np.outer(V[:, k], q)
            maybe_promote()
            if np.any(A[k + 1:, k]) or np.any(A[k, k + 1:]):
                continue  # remainders smaller than the pivot: pick a new one
            rest = A[k + 1:, k + 1:]
            bad = np.argwhere(rest % p != 0)
            if len(bad):
                # fold an offending row into row k to restore divisibility
                r = int(bad[0][0]) + k + 1
                A[k] += A[r]
                if U is not None:
                    U[k] += U[r]
                continue
            if p < 0:
                A[k] = -A[k]
                if U is not None:
                    U[k] = -U[k]
            break
    return _finish(A, U, V, min(m, n), (m, n))


def _finish(A, U, V, k, shape):
    diag = np.array([A[i, i] for i in range(k)] + [0] * (min(shape) - k), dtype=A.dtype)
    return SmithForm(diag, U, V, shape)


def invariant_factors(A) -> list:
    """Nontrivial (> 1) invariant factors of an integer matrix."""
    d = smith_normal_form(A, track_u=False, track_v=False).diagonal
    return [int(x) for x in d if abs(int(x)) > 1]


def solve_mod(A, b, modulus: int, form: Optional[SmithForm] = None) -> np.ndarray:
    """Solve ``A x = b (mod modulus)`` for integer ``x``.

    Raises :class:`NotACoboundary` with the inconsistent row of the reduced
    system as certificate when no solution exists.
    """
    A = np.asarray(A, dtype=np.int64)
    if form is None:
        form = smith_normal_form(A)
    m, n = A.shape
    r = (form.U.astype(object) @ np.asarray(b, dtype=object)) % modulus
    diag = list(form.diagonal) + [0] * (m - len(form.diagonal))
    y = [0] * n
    for i in range(m):
        d = int(diag[i]) % modulus
        ri = int(r[i])
        g = gcd(d, modulus)
        if ri % g:
            raise NotACoboundary(
                "linear system inconsistent",
                certificate={"row": i, "diagonal": int(diag[i]), "rhs": ri, "modulus": modulus},
            )
        if i < n and d:
            mg = modulus // g
            y[i] = (ri // g) * pow(d // g, -1, mg) % mg if mg > 1 else 0
    x = (form.V.astype(object) @ np.array(y, dtype=object)) % modulus
    return x.astype(np.int64)
