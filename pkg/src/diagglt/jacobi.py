"""Cyclic Jacobi solvers for small dense matrices.

Both solvers sweep over column pairs in round-robin (tournament) order, so each
round rotates ``n/2`` disjoint pairs at once with vectorised numpy updates.

* :func:`svd_jacobi` is the one-sided (Hestenes) method: it orthogonalises
  the columns of ``A``, which is cyclic Jacobi applied implicitly to the Gram
  matrix ``A^H A`` without forming it.
* :func:`eigh_jacobi` is the classical two-sided method for Hermitian input.

Complex pairs are handled by first rotating the phase of the off-diagonal
entry away, then applying the real symmetric rotation.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

_EPS = np.finfo(float).eps


@lru_cache(maxsize=64)
def _rounds(n: int) -> tuple:
    """Round-robin schedule: ``n - 1`` (or ``n``) rounds of disjoint pairs."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    N = len(players)
    out = []
    for _ in range(N - 1):
        P, Q = [], []
        for i in range(N // 2):
            a, b = players[i], players[N - 1 - i]
            if a >= 0 and b >= 0:
                P.append(min(a, b))
                Q.append(max(a, b))
        out.append((np.array(P, dtype=np.int64), np.array(Q, dtype=np.int64)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(out)


def _rotation(alpha, beta, gamma):
    """Parameters ``(c, s, w)`` zeroing the off-diagonal of ``[[alpha, gamma], [conj(gamma), beta]]``.

    The 2x2 transform is ``J = [[c, s], [-s*conj(w), c*conj(w)]]``.
    """
    g = np.abs(gamma)
    w = gamma / g
    zeta = (beta - alpha) / (2.0 * g)
    sign = np.where(zeta >= 0, 1.0, -1.0)
    t = sign / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, c * t, w


def svd_jacobi(A, tol=None, max_sweeps=80, vectors=False):
    """Singular values of square ``A`` in non-increasing order.

    With ``vectors=True`` also returns ``(W, V)`` with ``A V = W`` and the
    columns of ``W`` mutually orthogonal, ordered like the singular values
    (``W[:, i] = sigma_i u_i``).
    """
    A = np.array(A, dtype=complex if np.iscomplexobj(A) else float)
    n = A.shape[1]
    W = A.copy()
    V = np.eye(n, dtype=W.dtype) if vectors else None
    tol = 10 * n * _EPS if tol is None else tol
    rounds = _rounds(n) if n > 1 else ()
    for _ in range(max_sweeps):
        worst = 0.0
        for P, Q in rounds:
            x, y = W[:, P], W[:, Q]
            alpha = np.einsum("ij,ij->j", x.conj(), x).real
            beta = np.einsum("ij,ij->j", y.conj(), y).real
            gamma = np.einsum("ij,ij->j", x.conj(), y)
            scale = np.sqrt(alpha * beta)
            with np.errstate(divide="ignore", invalid="ignore"):
                rel = np.where(scale > 0, np.abs(gamma) / scale, 0.0)
            worst = max(worst, float(rel.max(initial=0.0)))
            act = rel > tol
            if not act.any():
                continue
            P, Q = P[act], Q[act]
            c, s, w = _rotation(alpha[act], beta[act], gamma[act])
            x, y = W[:, P], W[:, Q]
            cw = np.conj(w)
            W[:, P] = c * x - (s * cw) * y
            W[:, Q] = s * x + (c * cw) * y
            if vectors:
                x, y = V[:, P], V[:, Q]
                V[:, P] = c * x - (s * cw) * y
                V[:, Q] = s * x + (c * cw) * y
        if worst <= tol:
            break
    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(-sigma, kind="stable")
    if vectors:
        return sigma[order], W[:, order], V[:, order]
    return sigma[order]


def eigh_jacobi(A, tol=None, max_sweeps=80):
    """Eigenvalues of Hermitian ``A`` in non-increasing order."""
    A = np.array(A, dtype=complex if np.iscomplexobj(A) else float)
    n = A.shape[0]
    if not np.allclose(A, A.conj().T, atol=1e-12 * max(1.0, np.abs(A).max(initial=0.0))):
        raise ValueError("eigh_jacobi needs a Hermitian matrix")
    A = (A + A.conj().T) / 2
    tol = 10 * n * _EPS if tol is None else tol
    rounds = _rounds(n) if n > 1 else ()
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * max(np.linalg.norm(A), _EPS):
            break
        for P, Q in rounds:
            app = A[P, P].real
            aqq = A[Q, Q].real
            apq = A[P, Q]
            act = np.abs(apq) > _EPS * np.sqrt(np.abs(app * aqq)) + np.finfo(float).tiny
            if not act.any():
                continue
            P, Q = P[act], Q[act]
            c, s, w = _rotation(app[act], aqq[act], apq[act])
            cw = np.conj(w)
            x, y = A[:, P], A[:, Q]
            A[:, P] = c * x - (s * cw) * y
            A[:, Q] = s * x + (c * cw) * y
            x, y = A[P, :], A[Q, :]
            A[P, :] = c[:, None] * x - (s * w)[:, None] * y
            A[Q, :] = s[:, None] * x + (c * w)[:, None] * y
    ev = np.diag(A).real
    return ev[np.argsort(-ev, kind="stable")]
