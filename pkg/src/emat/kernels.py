"""Batch contraction kernels.

Each public function has a numba implementation and an einsum implementation.
The compiled path is taken when numba is importable and ``EMAT_DISABLE_NUMBA`` is
not set; both paths produce the same numbers to round-off.
"""

from __future__ import annotations

import numpy as np

from ._backend import HAS_NUMBA, numba_enabled

if HAS_NUMBA:
    from numba import njit
else:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def _push_forward_a_nb(A, F, J):
    n = A.shape[0]
    out = np.zeros_like(A)
    for m in range(n):
        # first contract alpha, then beta: two O(3^5) sweeps instead of one O(3^6)
        tmp = np.zeros((3, 3, 3, 3))
        for p in range(3):
            for i in range(3):
                for b in range(3):
                    for j in range(3):
                        s = 0.0
                        for a in range(3):
                            s += F[m, p, a] * A[m, a, i, b, j]
                        tmp[p, i, b, j] = s
        for p in range(3):
            for i in range(3):
                for q in range(3):
                    for j in range(3):
                        s = 0.0
                        for b in range(3):
                            s += F[m, q, b] * tmp[p, i, b, j]
                        out[m, p, i, q, j] = s / J[m]
    return out


def _push_forward_a_np(A, F, J):
    return np.einsum("mpa,mqb,maibj->mpiqj", F, F, A, optimize=True) / J[:, None, None, None, None]


def push_forward_a_batch(A: np.ndarray, F: np.ndarray) -> np.ndarray:
    """A0_{piqj} = J^-1 F_{p alpha} F_{q beta} A_{alpha i beta j} for stacks of (A, F)."""
    A = np.ascontiguousarray(A, dtype=float)
    F = np.ascontiguousarray(F, dtype=float)
    J = np.linalg.det(F)
    if numba_enabled():
        return _push_forward_a_nb(A, F, J)
    return _push_forward_a_np(A, F, J)


@njit(cache=True)
def _acoustic_nb(A0, n):
    m_count = n.shape[0]
    out = np.zeros((m_count, 3, 3))
    for m in range(m_count):
        for i in range(3):
            for j in range(3):
                s = 0.0
                for p in range(3):
                    for q in range(3):
                        s += A0[p, i, q, j] * n[m, p] * n[m, q]
                out[m, i, j] = s
    return out


def acoustic_tensor_batch(A0: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Q_ij(n) = A0_{piqj} n_p n_q for one updated modulus and a stack of directions."""
    A0 = np.ascontiguousarray(A0, dtype=float)
    n = np.ascontiguousarray(np.atleast_2d(directions), dtype=float)
    if numba_enabled():
        return _acoustic_nb(A0, n)
    return np.einsum("piqj,mp,mq->mij", A0, n, n, optimize=True)


@njit(cache=True)
def _contract_a_nb(A, G):
    n = A.shape[0]
    out = np.zeros((n, 3, 3))
    for m in range(n):
        for a in range(3):
            for i in range(3):
                s = 0.0
                for b in range(3):
                    for j in range(3):
                        s += A[m, a, i, b, j] * G[m, j, b]
                out[m, a, i] = s
    return out


def contract_a_batch(A: np.ndarray, G: np.ndarray) -> np.ndarray:
    """(A G)_{alpha i} = A_{alpha i beta j} G_{j beta} for stacks of moduli and increments."""
    A = np.ascontiguousarray(A, dtype=float)
    G = np.ascontiguousarray(G, dtype=float)
    if numba_enabled():
        return _contract_a_nb(A, G)
    return np.einsum("maibj,mjb->mai", A, G, optimize=True)
