"""Morse complex of deterministic gradient flows on T^1 and T^2.

Critical points come from Newton iteration on a seed grid.  The boundary
operator counts signed separatrices:

* index 1 -> 0: the two unstable branches ``p +- eps u`` of each index-1 point
  are integrated forward; branch ``b`` contributes ``b`` to the sink it reaches.
* index 2 -> 1 (T^2): the two stable branches ``s +- eps w`` of each saddle are
  integrated backward; branch ``b`` reaching source ``q`` contributes
  ``b * sign det[w, u]`` with ``u`` the saddle's unstable vector.

Eigenvectors are sign-normalised (first nonzero entry positive) so the result
is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
import sympy
from scipy.integrate import solve_ivp

from .errors import ConfigError, InvariantViolation, NumericalError
from .exterior import TrigVectorField

TWO_PI = 2 * np.pi


def check_gradient(flow: TrigVectorField, tol: float = 1e-12) -> bool:
    """Curl-free test ``d_i F_j = d_j F_i`` on the Fourier coefficients."""
    D = flow.dim
    for i in range(D):
        for j in range(i + 1, D):
            diff = flow[j].derivative(i).coeffs - flow[i].derivative(j).coeffs
            if abs(diff).max() > tol:
                return False
    return True


@dataclass
class CriticalPoint:
    position: np.ndarray
    jacobian: np.ndarray
    morse_index: int
    vf_index: int
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "position": [float(v) for v in self.position],
            "morse_index": self.morse_index,
            "vf_index": self.vf_index,
            "degenerate": self.degenerate,
            "jacobian": self.jacobian.tolist(),
        }


def torus_delta(a, b) -> np.ndarray:
    """Minimal-image displacement b - a on the torus."""
    d = np.asarray(b, float) - np.asarray(a, float)
    return (d + np.pi) % TWO_PI - np.pi


def torus_distance(a, b) -> float:
    return float(np.linalg.norm(torus_delta(a, b)))


def _flow_value(flow: TrigVectorField, x) -> np.ndarray:
    return flow(np.asarray(x, float))


def _classify_point(flow: TrigVectorField, x, degeneracy_tol: float) -> CriticalPoint:
    J = flow.jacobian(x)
    ev = np.linalg.eigvals(J)
    det = float(np.linalg.det(J))
    degenerate = bool(np.any(np.abs(ev.real) <= degeneracy_tol))
    return CriticalPoint(
        np.mod(np.asarray(x, float), TWO_PI),
        J,
        int(np.count_nonzero(ev.real > 0)),
        int(np.sign(det)),
        degenerate,
    )


def find_critical_points(flow: TrigVectorField, seeds_per_dim: int = 16, tol: float = 1e-10,
                         max_iter: int = 60, dedupe: float = 1e-6,
                         degeneracy_tol: float = 1e-8, degenerate_merge: float = 1e-3) -> list[CriticalPoint]:
    """Zeros of ``flow`` from Newton iteration on a uniform seed grid.

    Diverging seeds are skipped.  Degenerate zeros are returned with
    ``degenerate=True``; downstream routines exclude them.  Newton converges
    only linearly onto such zeros, so their copies are merged within the looser
    radius ``degenerate_merge``.  A residual bound ``tol`` pins a double zero
    only to ``sqrt(tol)``, so the Jacobian test uses ``max(degeneracy_tol, sqrt(tol))``.
    """
    if seeds_per_dim < 8:
        raise ConfigError(f"need at least 8 seeds per dimension, got {seeds_per_dim}")
    D = flow.dim
    grid = TWO_PI * (np.arange(seeds_per_dim) + 0.5) / seeds_per_dim
    seeds = np.stack(np.meshgrid(*([grid] * D), indexing="ij"), axis=-1).reshape(-1, D)
    roots: list[np.ndarray] = []
    for x in seeds:
        x = x.copy()
        for _ in range(max_iter):
            f = _flow_value(flow, x)
            if np.linalg.norm(f) <= tol * 1e-2:
                break
            J = flow.jacobian(x)
            try:
                dx = np.linalg.solve(J, -f)
            except np.linalg.LinAlgError:
                break
            norm = np.linalg.norm(dx)
            if norm > 1.0:
                dx *= 1.0 / norm
            x = x + dx
            if norm < 1e-15:
                break
        if np.linalg.norm(_flow_value(flow, x)) > tol:
            continue
        x = np.mod(x, TWO_PI)
        if any(torus_distance(x, r) < dedupe for r in roots):
            continue
        roots.append(x)
    points: list[CriticalPoint] = []
    for r in roots:
        p = _classify_point(flow, r, max(degeneracy_tol, np.sqrt(tol)))
        if p.degenerate and any(q.degenerate and torus_distance(p.position, q.position) < degenerate_merge
                                for q in points):
            continue
        points.append(p)
    points.sort(key=lambda p: (-p.morse_index, tuple(np.round(p.position, 9))))
    return points


def poincare_hopf(cps: list[CriticalPoint], euler: int = 0) -> tuple[int, bool]:
    """Sum of vector-field indices over nondegenerate zeros.

    The flag is false when degenerate points were seen or the sum differs from
    the Euler characteristic ``euler`` (an incomplete inventory).
    """
    total = int(sum(p.vf_index for p in cps if not p.degenerate))
    reliable = not any(p.degenerate for p in cps) and total == euler
    return total, reliable


# --------------------------------------------------------------------------
# separatrix shooting


@dataclass(frozen=True)
class ShootParams:
    eps: float = 1e-6
    capture: float = 1e-4
    rtol: float = 1e-10
    atol: float = 1e-12
    t_max: float = 500.0


def _signed_unit(v) -> np.ndarray:
    v = np.real_if_close(v).astype(float)
    v = v / np.linalg.norm(v)
    lead = v[np.argmax(np.abs(v) > 1e-12)]
    return -v if lead < 0 else v


def _eigvec(J, unstable: bool) -> np.ndarray:
    ev, vecs = np.linalg.eig(J)
    mask = ev.real > 0 if unstable else ev.real < 0
    idx = np.nonzero(mask)[0]
    if len(idx) != 1:
        raise ConfigError("expected exactly one eigen-direction of the requested kind")
    return _signed_unit(vecs[:, idx[0]])


def _shoot(flow, start, direction, targets, forbidden, params: ShootParams):
    """Integrate from ``start`` along ``direction * flow`` until captured; returns the target index."""

    def rhs(_, y):
        return direction * _flow_value(flow, y)

    events = []
    for j, t in enumerate(targets):
        ev = (lambda _, y, c=t.position: torus_distance(y, c) - params.capture)
        ev.terminal = True
        events.append(ev)
    for t in forbidden:
        ev = (lambda _, y, c=t.position: torus_distance(y, c) - params.capture)
        ev.terminal = True
        events.append(ev)
    sol = solve_ivp(rhs, (0.0, params.t_max), np.asarray(start, float), method="RK45",
                    rtol=params.rtol, atol=params.atol, events=events, dense_output=False)
    hit = [j for j, te in enumerate(sol.t_events) if len(te)]
    if not hit:
        tail = np.mod(sol.y[:, -5:].T, TWO_PI).round(6).tolist()
        raise NumericalError(f"separatrix from {np.round(start, 6).tolist()} reached no critical point "
                             f"by t={params.t_max}; last points {tail}")
    j = hit[0]
    if j >= len(targets):
        raise InvariantViolation(
            f"separatrix from {np.round(start, 6).tolist()} ends at a critical point of the same index: "
            "saddle-saddle connection, flow is not Morse-Smale"
        )
    return j


def boundary_operator(flow: TrigVectorField, cps: list[CriticalPoint],
                      params: ShootParams | None = None) -> dict[int, np.ndarray]:
    """Integer matrices ``d_k: C_k -> C_{k-1}`` keyed by k (rows index C_{k-1})."""
    params = params or ShootParams()
    D = flow.dim
    if D > 2:
        raise ConfigError("boundary operators are implemented for D <= 2")
    if not check_gradient(flow):
        raise ConfigError("boundary operator needs a gradient flow")
    good = [p for p in cps if not p.degenerate]
    by_index = {k: [p for p in good if p.morse_index == k] for k in range(D + 1)}
    out: dict[int, np.ndarray] = {}
    # index 1 -> 0 along unstable branches
    d1 = np.zeros((len(by_index[0]), len(by_index[1])), int)
    for c, p in enumerate(by_index[1]):
        u = _eigvec(p.jacobian, unstable=True)
        for b in (1, -1):
            r = _shoot(flow, p.position + b * params.eps * u, 1.0, by_index[0],
                       [q for q in by_index[1] if q is not p], params)
            d1[r, c] += b
    out[1] = d1
    if D == 2:
        d2 = np.zeros((len(by_index[1]), len(by_index[2])), int)
        for r, s in enumerate(by_index[1]):
            u = _eigvec(s.jacobian, unstable=True)
            w = _eigvec(s.jacobian, unstable=False)
            orient = int(np.sign(np.linalg.det(np.column_stack([w, u]))))
            for b in (1, -1):
                c = _shoot(flow, s.position + b * params.eps * w, -1.0, by_index[2],
                           [q for q in by_index[1] if q is not s], params)
                d2[r, c] += b * orient
        out[2] = d2
    return out


# --------------------------------------------------------------------------
# complex and homology


@dataclass
class MorseComplexData:
    dim: int
    points: dict[int, list[CriticalPoint]]
    boundaries: dict[int, np.ndarray]
    ranks: list[int] = field(default_factory=list)
    degenerate: list[CriticalPoint] = field(default_factory=list)

    def squares_vanish(self) -> bool:
        for k in range(2, self.dim + 1):
            if np.any(self.boundaries[k - 1] @ self.boundaries[k]):
                return False
        return True

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "points": {str(k): [p.to_json() for p in v] for k, v in self.points.items()},
            "boundaries": {str(k): m.tolist() for k, m in self.boundaries.items()},
            "boundary_squared_zero": self.squares_vanish(),
            "ranks": self.ranks,
            "betti": [comb(self.dim, k) for k in range(self.dim + 1)],
            "degenerate": [p.to_json() for p in self.degenerate],
        }


def homology_ranks(cx: MorseComplexData) -> list[int]:
    """rank H_k = dim C_k - rank d_k - rank d_{k+1} over the rationals."""
    if not cx.squares_vanish():
        raise InvariantViolation("boundary operator does not square to zero")
    D = cx.dim

    def rank(k):
        m = cx.boundaries.get(k)
        if m is None or m.size == 0:
            return 0
        return int(sympy.Matrix(m.tolist()).rank())

    ranks = [len(cx.points[k]) - rank(k) - rank(k + 1) for k in range(D + 1)]
    cx.ranks = ranks
    return ranks


def morse_complex(flow: TrigVectorField, seeds_per_dim: int = 16,
                  params: ShootParams | None = None) -> MorseComplexData:
    """Critical points, boundary matrices and homology ranks in one call."""
    cps = find_critical_points(flow, seeds_per_dim)
    D = flow.dim
    good = [p for p in cps if not p.degenerate]
    cx = MorseComplexData(
        D,
        {k: [p for p in good if p.morse_index == k] for k in range(D + 1)},
        boundary_operator(flow, cps, params),
        degenerate=[p for p in cps if p.degenerate],
    )
    homology_ranks(cx)
    return cx
