"""Krylov approximation of exp(-t A) v for operators given only by a matvec."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NumericalError


def _arnoldi(matvec, v, m):
    n = v.shape[0]
    V = np.zeros((n, m + 1), complex)
    H = np.zeros((m + 1, m), complex)
    beta = np.linalg.norm(v)
    V[:, 0] = v / beta
    for j in range(m):
        w = matvec(V[:, j])
        for i in range(j + 1):
            H[i, j] = np.vdot(V[:, i], w)
            w = w - H[i, j] * V[:, i]
        # one reorthogonalisation pass
        for i in range(j + 1):
            c = np.vdot(V[:, i], w)
            H[i, j] += c
            w = w - c * V[:, i]
        H[j + 1, j] = np.linalg.norm(w)
        if H[j + 1, j] < 1e-14 * beta:
            return V[:, : j + 1], H[: j + 1, : j + 1], beta, 0.0
        V[:, j + 1] = w / H[j + 1, j]
    return V[:, :m], H[:m, :m], beta, H[m, m - 1].real


def expm_krylov(matvec, v, t: float, m: int = 30, tol: float = 1e-12, max_substeps: int = 10000) -> np.ndarray:
    """exp(-t A) v with adaptive substeps; ``tol`` bounds the per-step error relative to |v|."""
    v = np.asarray(v, dtype=complex)
    if not np.any(v):
        return v.copy()
    w = v.copy()
    done = 0.0
    step = t
    for _ in range(max_substeps):
        if done >= t:
            return w
        V, H, beta, hnext = _arnoldi(matvec, w, m)
        while True:
            tau = min(step, t - done)
            E = scipy.linalg.expm(-tau * H)
            err = beta * abs(hnext * E[-1, 0]) * tau
            if err <= tol * beta or tau < 1e-12 * t:
                break
            step = tau / 2
        w = beta * (V @ E[:, 0])
        done += tau
        if err < 0.1 * tol * beta:
            step = tau * 1.5
    raise NumericalError("Krylov exponential did not reach the target time within the substep budget")
