"""
Dense symmetric eigensolvers.

`eig_full` reduces the matrix to tridiagonal form with Householder
reflections and diagonalizes the result by the implicit QL iteration with
Wilkinson-type shifts.  `eig_top` finds the largest eigenpair by Lanczos with
full reorthogonalization, restarting from the current Ritz vector.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NoConvergence

__all__ = ["tridiagonalize", "tridiagonal_ql", "eig_full", "eig_top", "LANCZOS_DIM"]

LANCZOS_DIM = 80
_EPS = np.finfo(float).eps


def _check_symmetric(X) -> np.ndarray:
    A = np.asarray(X, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(float(np.max(np.abs(A))) if A.size else 0.0, 1e-300)
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    return A


def tridiagonalize(X, vectors: bool = False):
    """
    Householder reduction ``X = Q T Q^T``.

    Returns ``(d, e, Q)`` with ``d`` the diagonal and ``e`` the off-diagonal of
    ``T``; ``Q`` is None unless ``vectors`` is set.
    """
    A = _check_symmetric(X).copy()
    n = A.shape[0]
    Q = np.eye(n) if vectors else None
    for k in range(n - 2):
        x = A[k + 1 :, k]
        tail = float(np.dot(x[1:], x[1:]))
        if tail == 0.0:
            continue
        norm = math.sqrt(x[0] * x[0] + tail)
        alpha = -math.copysign(norm, x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        S = A[k + 1 :, k + 1 :]
        p = S @ v
        w = 2.0 * (p - np.dot(v, p) * v)
        # (I - 2vv^T) S (I - 2vv^T) = S - v w^T - w v^T
        S -= np.outer(v, w) + np.outer(w, v)
        A[k + 1, k] = A[k, k + 1] = alpha
        A[k + 2 :, k] = 0.0
        A[k, k + 2 :] = 0.0
        if Q is not None:
            Q[:, k + 1 :] -= 2.0 * np.outer(Q[:, k + 1 :] @ v, v)
    return np.diag(A).copy(), np.diag(A, -1).copy(), Q


def tridiagonal_ql(d, e, Z=None, max_iter: int = 30):
    """
    Implicit QL on a symmetric tridiagonal matrix.

    ``Z`` (rows are accumulated vectors, i.e. the transpose of the usual
    column layout) is rotated in place when given.  Returns the unsorted
    eigenvalues.
    """
    d = [float(t) for t in d]
    n = len(d)
    e = [float(t) for t in e] + [0.0]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it >= max_iter:
                raise NoConvergence(f"QL iteration exceeded {max_iter} sweeps for eigenvalue {l}")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if Z is not None:
                    zi, zj = Z[i].copy(), Z[i + 1].copy()
                    Z[i + 1] = s * zi + c * zj
                    Z[i] = c * zi - s * zj
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.array(d)


def eig_full(X, vectors: bool = False, max_iter: int = 30):
    """
    All eigenvalues (ascending) and optionally the eigenvectors as columns.

    Raises
    ------
    NoConvergence
        When an eigenvalue needs more than ``max_iter`` QL sweeps.
    """
    A = _check_symmetric(X)
    n = A.shape[0]
    if n == 0:
        return (np.empty(0), np.empty((0, 0))) if vectors else np.empty(0)
    d, e, Q = tridiagonalize(A, vectors=vectors)
    Z = np.ascontiguousarray(Q.T) if vectors else None
    w = tridiagonal_ql(d, e, Z, max_iter=max_iter)
    order = np.argsort(w, kind="stable")
    w = w[order]
    if not vectors:
        return w
    return w, np.ascontiguousarray(Z[order].T)


def _start_vector(n: int) -> np.ndarray:
    # fixed pseudo-random start: deterministic and generic
    q = np.random.Generator(np.random.Philox(key=0x5EED)).standard_normal(n)
    return q / np.linalg.norm(q)


def eig_top(X, tol: float = 1e-8, max_restarts: int = 200, krylov_dim: int | None = None):
    """
    Largest eigenvalue and a unit eigenvector by restarted Lanczos.

    Each cycle builds a Krylov basis of dimension ``min(N, 80)`` with full
    (two-pass) reorthogonalization, diagonalizes the projected tridiagonal
    matrix with `eig_full`, and restarts from the top Ritz vector until
    ``||Xu - λu|| <= tol * ||X||_1``.  The eigenvector is signed so that its
    largest-magnitude entry is positive.
    """
    A = _check_symmetric(X)
    n = A.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    norm1 = float(np.abs(A).sum(axis=0).max())
    if norm1 == 0.0:
        u = np.zeros(n)
        u[0] = 1.0
        return 0.0, u
    m = min(n, krylov_dim or LANCZOS_DIM)
    q = _start_vector(n)
    for _ in range(max_restarts):
        V = np.zeros((m, n))
        alpha = np.zeros(m)
        beta = np.zeros(m)
        V[0] = q
        k = m
        for j in range(m):
            w = A @ V[j]
            alpha[j] = np.dot(V[j], w)
            w -= alpha[j] * V[j]
            if j > 0:
                w -= beta[j - 1] * V[j - 1]
            for _pass in range(2):
                w -= V[: j + 1].T @ (V[: j + 1] @ w)
            b = float(np.linalg.norm(w))
            if j == m - 1 or b <= 1e-13 * norm1:
                k = j + 1
                break
            beta[j] = b
            V[j + 1] = w / b
        T = np.diag(alpha[:k]) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
        _, Y = eig_full(T, vectors=True)
        u = V[:k].T @ Y[:, -1]
        u /= np.linalg.norm(u)
        Au = A @ u
        lam = float(np.dot(u, Au))
        if np.linalg.norm(Au - lam * u) <= tol * norm1:
            if u[int(np.argmax(np.abs(u)))] < 0.0:
                u = -u
            return lam, u
        q = u
    raise NoConvergence(f"Lanczos did not reach residual {tol} * ||X||_1 in {max_restarts} restarts")
