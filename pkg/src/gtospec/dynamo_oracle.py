"""Kinematic-dynamo induction operator in plain vector components.

b -> curl(F x b) + Theta lap(b) on Fourier-truncated, divergence-free,
zero-mean magnetic fields.  Deliberately self-contained: it uses its own
mode enumeration and convolution and none of the exterior-calculus code, so
it can serve as an independent check of the 2-form block of the GTO.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigs


def abc_flow_modes(A: float, B: float, C: float) -> dict[tuple[int, int, int], np.ndarray]:
    """Fourier vector coefficients of (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)."""
    modes: dict[tuple[int, int, int], np.ndarray] = {}

    def add(n, comp, val):
        modes.setdefault(n, np.zeros(3, complex))[comp] += val

    # sin(k) = (e^{ik} - e^{-ik}) / 2i, cos(k) = (e^{ik} + e^{-ik}) / 2
    for comp, amp, axis, kind in [
        (0, A, 2, "sin"), (0, C, 1, "cos"),
        (1, B, 0, "sin"), (1, A, 2, "cos"),
        (2, C, 1, "sin"), (2, B, 0, "cos"),
    ]:
        e = [0, 0, 0]
        e[axis] = 1
        plus, minus = tuple(e), tuple(-v for v in e)
        if kind == "sin":
            add(plus, comp, amp / 2j)
            add(minus, comp, -amp / 2j)
        else:
            add(plus, comp, amp / 2)
            add(minus, comp, amp / 2)
    return modes


def _cross_matrix(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0, -z, y], [z, 0, -x], [-y, x, 0]], dtype=complex)


class InductionOperator:
    """Sparse induction operator on |n_j| <= M with its div-free reduction."""

    def __init__(self, flow_modes: dict, theta: float, cutoff: int):
        self.theta = float(theta)
        self.cutoff = int(cutoff)
        M = self.cutoff
        self.modes = [n for n in itertools.product(range(-M, M + 1), repeat=3)]
        self.index = {n: i for i, n in enumerate(self.modes)}
        self.flow_modes = {tuple(int(v) for v in k): np.asarray(c, complex) for k, c in flow_modes.items()}
        self.full = self._assemble()
        self.basis = self._solenoidal_basis()
        self.reduced = (self.basis.T @ self.full @ self.basis).tocsr()

    def _assemble(self) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        N = len(self.modes)
        for i, n in enumerate(self.modes):
            curl = _cross_matrix(1j * np.array(n, float))
            for p, fp in self.flow_modes.items():
                m = tuple(a - b for a, b in zip(n, p))
                j = self.index.get(m)
                if j is None:
                    continue
                block = curl @ _cross_matrix(fp)
                for r in range(3):
                    for c in range(3):
                        if block[r, c] != 0:
                            rows.append(3 * i + r)
                            cols.append(3 * j + c)
                            vals.append(block[r, c])
            lap = -self.theta * float(np.dot(n, n))
            for r in range(3):
                rows.append(3 * i + r)
                cols.append(3 * i + r)
                vals.append(lap)
        return sp.csr_matrix((vals, (rows, cols)), shape=(3 * N, 3 * N))

    def _solenoidal_basis(self) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        col = 0
        for i, n in enumerate(self.modes):
            if not any(n):
                continue
            k = np.array(n, float) / np.linalg.norm(n)
            helper = np.eye(3)[int(np.argmin(np.abs(k)))]
            e1 = np.cross(k, helper)
            e1 /= np.linalg.norm(e1)
            e2 = np.cross(k, e1)
            for e in (e1, e2):
                for r in range(3):
                    if e[r] != 0:
                        rows.append(3 * i + r)
                        cols.append(col)
                        vals.append(e[r])
                col += 1
        return sp.csr_matrix((vals, (rows, cols)), shape=(3 * len(self.modes), col))

    def leading_eigenvalues(self, count: int = 6, tol: float = 1e-12) -> np.ndarray:
        """Eigenvalues of largest real part (growth rates) on the solenoidal sector."""
        vals = eigs(self.reduced, k=count, which="LR", tol=tol, ncv=max(4 * count, 40), maxiter=50000,
                    return_eigenvectors=False)
        return vals[np.argsort(-vals.real)]


def abc_growth_rates(theta: float, cutoff: int = 8, A: float = 1.0, B: float = 1.0, C: float = 1.0,
                     count: int = 6) -> np.ndarray:
    return InductionOperator(abc_flow_modes(A, B, C), theta, cutoff).leading_eigenvalues(count)
