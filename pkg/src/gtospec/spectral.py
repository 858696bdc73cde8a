"""Eigen-decomposition of GTO blocks and the spectral diagnostics built on it.

Dense routines work on the assembled per-degree blocks; ``leading_spectrum``
runs Arnoldi on the propagator exp(-tau H) for blocks too large to diagonalise.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigs

from .errors import ConfigError, InvariantViolation, NumericalError
from .exterior import FormField, evaluate_on_grid, project_exact
from .krylov import expm_krylov
from .operators import (
    DegreeBlockOperator,
    MatrixFreeGto,
    SystemSpec,
    all_d_blocks,
    all_gto_blocks,
    d_sparse,
    gto_sparse,
    pairing_matrix,
    propagator,
)
from .parallel import thread_budget

ZERO_TOL = 1e-7
ITERATIVE_ZERO_TOL = 1e-5
CLASSIFY_TOL = 1e-6
DEFECT_CONDITION = 1e10
CLUSTER_RTOL = 1e-8
CLOSED_SINGULAR = 1e-6
DEGENERATE_RTOL = 1e-10


@dataclass
class DegreeSpectrum:
    """Eigen data of one degree block.

    ``right[:, a]`` is the coefficient vector of the a-th eigenform.  ``left[:, a]``
    is a form of the complementary degree with ``pair(left_a, right_b) = delta_ab``
    wherever ``defective`` is false.
    """

    degree: int
    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    defective: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class DoubletPairing:
    degree: int
    index: int
    partner: int
    eigenvalue: complex
    residual: float


@dataclass
class PairingResult:
    pairs: list[DoubletPairing]
    unpaired: list[tuple[int, int, complex, str]]
    max_residual: float

    @property
    def complete(self) -> bool:
        return not self.unpaired


@dataclass
class SpectrumReport:
    name: str
    dim: int
    degrees: list[DegreeSpectrum]
    tol: float = ZERO_TOL
    singlets: list[int] | None = None
    pairing: PairingResult | None = None
    delta: float | None = None
    label: str | None = None
    witten: list[tuple[float, float]] = field(default_factory=list)

    @property
    def eigenvalues(self) -> dict[int, np.ndarray]:
        return {s.degree: s.values for s in self.degrees}

    @property
    def betti(self) -> list[int]:
        return [comb(self.dim, k) for k in range(self.dim + 1)]

    def to_json(self) -> dict:
        doc = {
            "system": self.name,
            "dim": self.dim,
            "tol": self.tol,
            "degrees": {
                str(s.degree): [{"re": float(v.real), "im": float(v.imag)} for v in _sorted(s.values)]
                for s in self.degrees
            },
            "defective": {str(s.degree): int(np.count_nonzero(s.defective)) for s in self.degrees},
            "singlets": self.singlets,
            "betti": self.betti,
            "pairing": None,
            "delta": self.delta,
            "type": self.label,
            "witten": [{"t": float(t), "value": float(w)} for t, w in self.witten],
        }
        if self.pairing is not None:
            doc["pairing"] = {
                "pairs": [
                    {"degree": p.degree, "index": p.index, "partner": p.partner,
                     "re": float(p.eigenvalue.real), "im": float(p.eigenvalue.imag), "residual": p.residual}
                    for p in self.pairing.pairs
                ],
                "unpaired": [
                    {"degree": k, "index": i, "re": float(v.real), "im": float(v.imag), "reason": why}
                    for k, i, v, why in self.pairing.unpaired
                ],
                "max_residual": self.pairing.max_residual,
            }
        return doc


@dataclass
class LeadingSpectrum:
    """Partial eigen data from the iterative solver."""

    degree: int
    values: np.ndarray
    vectors: np.ndarray
    tau: float
    sector: str | None
    method: str

    @property
    def eigenvalues(self) -> dict[int, np.ndarray]:
        return {self.degree: self.values}


def _sorted(values):
    return sorted(values, key=lambda v: (round(v.real, 12), round(v.imag, 12)))


# --------------------------------------------------------------------------
# dense eigensystems


def _clusters(values: np.ndarray, rtol: float = CLUSTER_RTOL) -> list[np.ndarray]:
    """Group numerically coincident eigenvalues (transitively)."""
    n = len(values)
    scale = np.maximum(1.0, np.abs(values))
    close = np.abs(values[:, None] - values[None, :]) <= rtol * scale[:, None]
    label = -np.ones(n, int)
    groups = []
    for i in range(n):
        if label[i] >= 0:
            continue
        stack, members = [i], []
        label[i] = len(groups)
        while stack:
            j = stack.pop()
            members.append(j)
            for m in np.nonzero(close[j] & (label < 0))[0]:
                label[m] = len(groups)
                stack.append(m)
        groups.append(np.array(sorted(members)))
    return groups


def _ritz_pairs(A, basis):
    """Eigenpairs of a small compressed matrix, orthonormal within degenerate groups."""
    w = np.linalg.eigvals(A)
    vals, vecs = [], []
    for group in _clusters(w, DEGENERATE_RTOL):
        centre = w[group].mean()
        radius = DEGENERATE_RTOL * max(1.0, abs(centre)) * len(group) + 1e-300

        def chosen(x, c=centre, r=radius):
            return abs(x - c) <= r

        T, Z, sdim = scipy.linalg.schur(A.astype(complex), output="complex", sort=chosen)
        vals.append(np.diag(T)[:sdim])
        vecs.append(Z[:, :sdim])
    return np.concatenate(vals), basis @ np.concatenate(vecs, axis=1)


def _split_closed(H, d, values, vr, members):
    """Separate closed from non-closed states inside a cluster of close eigenvalues.

    LAPACK vectors of nearly equal eigenvalues mix at the level eps |H| / gap,
    which smears closed states.  The closed part of the cluster's invariant
    subspace is itself invariant (d commutes with H), so closed states are
    taken as Ritz vectors there; the remaining slots keep the LAPACK vectors
    whose d-images are best conditioned (pivoted QR).  Updates ``values`` and ``vr`` in place.
    """
    R = vr[:, members]
    Q, _ = np.linalg.qr(R)
    _, sv, vh = np.linalg.svd(np.asarray(d @ Q), full_matrices=False)
    sv = np.concatenate([sv, np.zeros(Q.shape[1] - len(sv))])
    closed = int(np.count_nonzero(sv <= CLOSED_SINGULAR))
    if closed in (0, len(members)):
        return
    Qc = Q @ vh[len(members) - closed:].conj().T
    wc, Rc = _ritz_pairs(Qc.conj().T @ (H @ Qc), Qc)
    _, _, piv = scipy.linalg.qr(np.asarray(d @ R), mode="economic", pivoting=True)
    keep = np.sort(piv[: len(members) - closed])
    new_vals = np.concatenate([values[members][keep], wc])
    new_vecs = np.concatenate([R[:, keep], Rc / np.linalg.norm(Rc, axis=0)], axis=1)
    values[members] = new_vals
    vr[:, members] = new_vecs


def real_basis(lattice, ncomp: int = 1) -> sp.csr_matrix:
    """Unitary U taking Fourier coefficients to cos/sin coordinates.

    Rows ``(c_n + c_-n)/sqrt 2`` and ``(c_n - c_-n)/(i sqrt 2)`` for each +-n pair,
    ``c_0`` unchanged; operators that preserve real fields become real matrices
    ``U H U^H``.  Repeated block-diagonally over ``ncomp`` form components.
    """
    N = lattice.size
    modes = lattice.modes
    partner = N - 1 - np.arange(N)  # C-order enumeration is symmetric under n -> -n
    rows, cols, vals = [], [], []
    r = 0
    h = 1 / np.sqrt(2)
    for i in range(N):
        j = partner[i]
        if i == j:
            rows.append(r); cols.append(i); vals.append(1.0)
            r += 1
        elif i < j:
            rows += [r, r, r + 1, r + 1]
            cols += [i, j, i, j]
            vals += [h, h, -1j * h, 1j * h]
            r += 2
    U = sp.csr_matrix((vals, (rows, cols)), shape=(N, N))
    assert modes.shape[0] == N
    return sp.block_diag([U] * ncomp, format="csr")


def _eig_with_left(block: DegreeBlockOperator):
    """(values, vl, vr) of the block, through the real basis when the block preserves reality."""
    H = block.matrix
    U = real_basis(block.lattice, H.shape[0] // block.lattice.size)
    Hr = np.asarray(U @ (U @ H.conj().T).conj().T)
    if np.abs(Hr.imag).max() <= 1e-12 * max(1.0, np.abs(Hr).max()):
        values, vl, vr = scipy.linalg.eig(Hr.real, left=True, right=True)
        Uh = U.conj().T
        return values, np.asarray(Uh @ vl), np.asarray(Uh @ vr)
    return scipy.linalg.eig(H, left=True, right=True)


def _degree_eigensystem(block: DegreeBlockOperator) -> DegreeSpectrum:
    lat, k = block.lattice, block.degree
    try:
        values, vl, vr = _eig_with_left(block)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"dense eigensolver failed on degree {k}: {exc}") from None
    vr = vr / np.linalg.norm(vr, axis=0)
    rows = vl.conj().T  # rows[a] @ H = values[a] rows[a]
    defective = np.zeros(len(values), bool)
    d = d_sparse(lat, k) if k < lat.dim else None
    clusters = _clusters(values)
    if d is not None:
        for members in clusters:
            if len(members) > 1:
                _split_closed(block.matrix, d, values, vr, members)
    for members in clusters:
        R = vr[:, members]
        Lc = rows[members]
        G = Lc @ R
        if np.linalg.cond(G) > DEFECT_CONDITION:
            defective[members] = True
            continue
        rows[members] = np.linalg.solve(G, Lc)
    # rows are coefficient rows b with b @ psi = pair(phi, psi); convert to forms phi
    P = pairing_matrix(lat, k)
    scale = (2 * np.pi) ** (2 * lat.dim)
    left = np.asarray(P @ rows.T) / scale
    return DegreeSpectrum(k, values, vr, left, defective)


def full_spectrum(blocks: list[DegreeBlockOperator], name: str = "", threads: int | None = None) -> SpectrumReport:
    """Right and left eigenpairs of every degree block, bi-orthonormalised through the pairing."""
    if not blocks:
        raise ConfigError("no blocks supplied")
    dim = blocks[0].lattice.dim
    if sorted(b.degree for b in blocks) != list(range(dim + 1)):
        raise ConfigError(f"need GTO blocks for every degree 0..{dim}")
    blocks = sorted(blocks, key=lambda b: b.degree)
    with ThreadPoolExecutor(max_workers=thread_budget(threads)) as pool:
        degrees = list(pool.map(_degree_eigensystem, blocks))
    return SpectrumReport(name, dim, degrees)


def biorthogonality_defect(spec: DegreeSpectrum, lattice) -> float:
    """max |pair(left_a, right_b) - delta_ab| over non-defective states."""
    keep = ~spec.defective
    P = pairing_matrix(lattice, spec.degree)
    G = spec.left[:, keep].T @ (P @ spec.right[:, keep])
    return float(np.abs(G - np.eye(G.shape[0])).max()) if G.size else 0.0


def detect_singlets(report, tol: float = ZERO_TOL) -> list[int]:
    counts = [int(np.count_nonzero(np.abs(report.eigenvalues[k]) <= tol)) for k in sorted(report.eigenvalues)]
    if isinstance(report, SpectrumReport):
        report.singlets = counts
        report.tol = tol
    return counts


# --------------------------------------------------------------------------
# multiset matching


def match_multisets(a, b) -> tuple[list[tuple[int, int]], float]:
    """Greedy nearest-neighbour matching of two equal-length value lists.

    Returns the index pairs and the largest matched distance (inf on a length
    mismatch).
    """
    a = np.asarray(a, complex)
    b = np.asarray(b, complex)
    if len(a) != len(b):
        return [], float("inf")
    used = np.zeros(len(b), bool)
    pairs, worst = [], 0.0
    for i in np.lexsort((a.imag, a.real)):
        dist = np.where(used, np.inf, np.abs(b - a[i]))
        j = int(np.argmin(dist))
        used[j] = True
        pairs.append((int(i), j))
        worst = max(worst, float(dist[j]))
    return pairs, worst


# --------------------------------------------------------------------------
# doublets


def _exactness_residual(lattice, k: int, vec: np.ndarray) -> float:
    """Relative least-squares residual of d chi = psi (orthogonal complement of the exact forms)."""
    psi = FormField.from_vector(lattice, k, vec)
    rest = psi - project_exact(psi)
    return rest.norm() / psi.norm()


def pair_doublets(report: SpectrumReport, d_blocks: list[DegreeBlockOperator] | None = None,
                  tol: float = ZERO_TOL, blocks: list[DegreeBlockOperator] | None = None,
                  strict: bool = False) -> PairingResult:
    """Match every non-closed eigenstate psi with the eigenstate d psi one degree up.

    ``blocks`` are the GTO blocks used for the residual of d psi; they are
    rebuilt from the eigen data when omitted.  Closed nonzero states are checked
    for exactness.  With ``strict`` an incomplete table raises.
    """
    D = report.dim
    spec = {s.degree: s for s in report.degrees}
    lat = d_blocks[0].lattice if d_blocks else None
    if d_blocks is None or len(d_blocks) != D:
        raise ConfigError(f"need {D} exterior-derivative blocks")
    dmat = {b.degree: b.matrix for b in d_blocks}
    if blocks is None:
        hmat = {k: (s.right * s.values) @ np.linalg.inv(s.right) for k, s in spec.items()}
    else:
        hmat = {b.degree: b.matrix for b in blocks}

    pairs: list[DoubletPairing] = []
    unpaired: list[tuple[int, int, complex, str]] = []
    worst = 0.0
    lower: dict[int, np.ndarray] = {}
    for k in range(D):
        s = spec[k]
        dpsi = dmat[k] @ s.right
        dnorm = np.linalg.norm(dpsi, axis=0)
        lower[k] = (np.abs(s.values) > tol) & (dnorm > tol * np.linalg.norm(s.right, axis=0))
        idx = np.nonzero(lower[k])[0]
        res = np.zeros(len(idx))
        if len(idx):
            img = dpsi[:, idx]
            res = np.linalg.norm(hmat[k + 1] @ img - img * s.values[idx], axis=0) / dnorm[idx]
        upper_spec = spec[k + 1]
        cand = np.abs(upper_spec.values) > tol
        if k + 1 < D:
            dn = np.linalg.norm(dmat[k + 1] @ upper_spec.right, axis=0)
            cand &= dn <= tol * np.linalg.norm(upper_spec.right, axis=0)
        cidx = np.nonzero(cand)[0]
        used = np.zeros(len(cidx), bool)
        for a, i in enumerate(idx):
            lam = s.values[i]
            dist = np.where(used, np.inf, np.abs(upper_spec.values[cidx] - lam))
            if not len(dist) or not np.isfinite(dist.min()):
                unpaired.append((k, int(i), complex(lam), "no partner left one degree up"))
                continue
            j = int(np.argmin(dist))
            if dist[j] > tol * max(1.0, abs(lam)) or res[a] > tol:
                unpaired.append((k, int(i), complex(lam), f"partner mismatch {dist[j]:.2e}, residual {res[a]:.2e}"))
                continue
            used[j] = True
            worst = max(worst, float(res[a]))
            pairs.append(DoubletPairing(k, int(i), int(cidx[j]), complex(lam), float(res[a])))
        for j in np.nonzero(~used)[0]:
            unpaired.append((k + 1, int(cidx[j]), complex(upper_spec.values[cidx[j]]), "closed state with no lower partner"))
        for j in cidx[used]:
            r = _exactness_residual(lat, k + 1, upper_spec.right[:, j])
            if r > tol:
                unpaired.append((k + 1, int(j), complex(upper_spec.values[j]), f"closed but not exact ({r:.2e})"))
    # degree 0 has no closed nonzero states; nothing below it to pair with
    result = PairingResult(pairs, unpaired, worst)
    report.pairing = result
    if strict and unpaired:
        raise InvariantViolation(f"{len(unpaired)} nonzero eigenvalues left unpaired; first: {unpaired[0]}")
    return result


# --------------------------------------------------------------------------
# ground state, pressure, classification


def grid_minimum(psi: FormField, points: int | None = None) -> float:
    """Smallest real grid value of a top form's density."""
    points = points or max(4 * psi.lattice.width, 64 if psi.lattice.dim == 1 else 16)
    return float(evaluate_on_grid(psi, points).real.min())


def ergodic_zero(block: DegreeBlockOperator, tol: float = 1e-8) -> FormField:
    """Stationary top form, normalised to unit total mass."""
    lat = block.lattice
    if block.degree != lat.dim:
        raise ConfigError(f"ergodic zero lives in the top degree {lat.dim}, got block of degree {block.degree}")
    values, vecs = scipy.linalg.eig(block.matrix)
    i = int(np.argmin(np.abs(values)))
    if abs(values[i]) > tol:
        raise InvariantViolation(f"top block has no zero eigenvalue (closest {values[i]:.3e})")
    psi = FormField.from_vector(lat, lat.dim, vecs[:, i])
    mass = (2 * np.pi) ** lat.dim * psi.coeffs[(0,) + (lat.cutoff,) * lat.dim]
    if abs(mass) == 0:
        raise NumericalError("stationary state has zero total mass")
    return psi * (1 / mass)


def pressure(report) -> float:
    return float(-min(np.min(v.real) for v in report.eigenvalues.values() if len(v))) + 0.0


def classify(report, tol: float = CLASSIFY_TOL) -> str:
    delta = pressure(report)
    if isinstance(report, SpectrumReport):
        report.delta = delta
    if delta <= tol:
        label = "T"
    else:
        vals = np.concatenate([v for v in report.eigenvalues.values()])
        extremal = vals[vals.real <= -delta + tol]
        label = "c" if np.any(np.abs(extremal.imag) > tol) else "b"
    if isinstance(report, SpectrumReport):
        report.label = label
    return label


def poincare_bendixson_assert(report, dim: int, tol: float = 1e-8) -> bool:
    return dim >= 3 or pressure(report) <= tol


# --------------------------------------------------------------------------
# traces


def witten_index(report: SpectrumReport, t: float, tol: float = 1e-8) -> float:
    total = 0j
    for s in report.degrees:
        total += (-1) ** s.degree * np.sum(np.exp(-t * s.values))
    if abs(total.imag) > tol * max(1.0, abs(total)):
        raise NumericalError(f"sharp trace has imaginary part {total.imag:.3e}")
    return float(total.real)


def partition_function(report: SpectrumReport, t: float) -> float:
    return float(sum(np.sum(np.exp(-t * s.values)) for s in report.degrees).real)


def witten_samples(report: SpectrumReport, ts) -> list[tuple[float, float]]:
    report.witten = [(float(t), witten_index(report, t)) for t in ts]
    return report.witten


# --------------------------------------------------------------------------
# conjugation symmetry and isospectrality


def check_pseudo_hermiticity(report, tol: float = 1e-8) -> tuple[bool, float]:
    worst = 0.0
    for vals in report.eigenvalues.values():
        _, dist = match_multisets(vals, np.conj(vals))
        worst = max(worst, dist)
    return worst <= tol, worst


def check_isospectral(report: SpectrumReport, tol: float = 1e-7) -> tuple[bool, float]:
    ev = report.eigenvalues
    _, dist = match_multisets(ev[0], ev[report.dim])
    return dist <= tol, dist


# --------------------------------------------------------------------------
# evolution


def evolve(block: DegreeBlockOperator, psi: FormField, t: float) -> FormField:
    if not t > 0:
        raise ConfigError(f"evolution time must be positive, got {t}")
    return propagator(block, t).apply(psi)


# --------------------------------------------------------------------------
# iterative leading spectrum


def _sector_projector(system: SystemSpec, k: int, sector: str | None):
    if sector is None:
        return None
    if sector != "exact":
        raise ConfigError(f"unknown sector {sector!r}; use 'exact' or None")
    if k == 0:
        raise ConfigError("degree 0 has no exact sector")
    lat = system.lattice

    def project(v):
        return project_exact(FormField.from_vector(lat, k, v)).vector

    return project


def leading_spectrum(system: SystemSpec, k: int, count: int = 6, tau: float = 1.0,
                     sector: str | None = None, method: str = "sparse", tol: float = 1e-10,
                     krylov_tol: float = 1e-12, maxiter: int = 5000, ncv: int | None = None,
                     seed: int = 0, max_deflations: int = 8) -> LeadingSpectrum:
    """Eigenvalues of smallest real part of H_k from Arnoldi on exp(-tau H_k).

    ``method`` picks how H_k is applied: an assembled sparse matrix or the
    FFT-based matrix-free operator.  ``sector="exact"`` restricts to d-exact
    forms.  Each propagator eigenvalue mu gives Re H = -log|mu|/tau exactly;
    the imaginary branch is chosen with the Rayleigh quotient of the
    eigenvector.

    A single Krylov space holds one direction per eigenvalue, so degenerate
    eigenvalues (cohomology, symmetric flows) are recovered by deflation: the
    propagator is projected off the invariant subspace found so far and
    Arnoldi looks for one more eigenvalue above the current cut, at most
    ``max_deflations`` times.  ``vectors`` is then an orthonormal (Schur)
    basis of the invariant subspace rather than a set of eigenvectors.
    """
    if not tau > 0:
        raise ConfigError(f"tau must be positive, got {tau}")
    if not 0 <= k <= system.dim:
        raise ConfigError(f"degree {k} out of range for D={system.dim}")
    lat = system.lattice
    n = comb(lat.dim, k) * lat.size
    if method == "sparse":
        H = gto_sparse(system, k).tocsr()
        matvec = H.__matmul__
    elif method == "matrix-free":
        H = MatrixFreeGto(system).linear_operator(k)
        matvec = H.matvec
    else:
        raise ConfigError(f"unknown method {method!r}; use 'sparse' or 'matrix-free'")
    project = _sector_projector(system, k, sector)

    def prop(v):
        v = np.asarray(v, complex).reshape(-1)
        if project is not None:
            v = project(v)
        w = expm_krylov(matvec, v, tau, tol=krylov_tol)
        return project(w) if project is not None else w

    if count >= n - 1:
        raise ConfigError(f"count {count} too large for a block of size {n}")
    v0 = np.random.default_rng(seed).standard_normal(n) + 0j
    if project is not None:
        v0 = project(v0)
    ncv = ncv or min(n - 1, max(2 * count + 1, 30))

    def arnoldi(apply, start, want):
        op = LinearOperator((n, n), matvec=apply, dtype=complex)
        try:
            return eigs(op, k=want, which="LM", v0=start, tol=tol, ncv=ncv, maxiter=maxiter)
        except ArpackNoConvergence as exc:
            raise NumericalError(f"Arnoldi did not converge in {maxiter} iterations "
                                 f"({len(exc.eigenvalues)} of {count} eigenvalues)") from None

    mu, vecs = arnoldi(prop, v0, count)
    for _ in range(max_deflations):
        Q, _ = np.linalg.qr(vecs)
        if Q.shape[1] + count >= n - 1:
            break

        def deflated(v, Q=Q):
            v = np.asarray(v, complex).reshape(-1)
            w = prop(v - Q @ (Q.conj().T @ v))
            return w - Q @ (Q.conj().T @ w)

        extra, evecs = arnoldi(deflated, v0 - Q @ (Q.conj().T @ v0), 1)
        cut = np.sort(np.abs(mu))[-count]
        new = np.abs(extra) > cut * (1 + 1e-8)
        if not new.any():
            break
        mu = np.concatenate([mu, extra[new]])
        vecs = np.column_stack([Q, evecs[:, new]])
    keep = np.argsort(-np.abs(mu), kind="stable")[:count]
    mu, vecs = mu[keep], vecs[:, keep]
    values = np.empty(count, complex)
    for i in range(count):
        v = vecs[:, i]
        rq = np.vdot(v, matvec(v)) / np.vdot(v, v)
        base = -np.log(mu[i]) / tau
        period = 2 * np.pi / tau
        shift = np.round((rq.imag - base.imag) / period)
        values[i] = base.real + 1j * (base.imag + shift * period)
    order = np.lexsort((values.imag, np.round(values.real, 9)))
    return LeadingSpectrum(k, values[order], vecs[:, order], tau, sector, method)


# --------------------------------------------------------------------------
# one-shot pipeline


def analyze(system: SystemSpec, t_grid=(0.1, 0.5, 1.0, 2.0, 5.0), tol: float = ZERO_TOL,
            threads: int | None = None) -> SpectrumReport:
    """Full spectrum plus singlets, doublets, pressure, type and Witten samples."""
    blocks = all_gto_blocks(system)
    report = full_spectrum(blocks, system.name, threads)
    detect_singlets(report, tol)
    pair_doublets(report, all_d_blocks(system.lattice), tol, blocks=blocks)
    classify(report)
    witten_samples(report, t_grid)
    return report
