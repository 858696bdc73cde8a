"""Per-degree matrices of d, d-bar, the GTO and the alpha-shifted SEO.

All blocks are composed from two sparse primitives, the Fourier exterior
derivative and the Galerkin-truncated interior product, so that

    H_k = d_{k-1} dbar_k + dbar_{k+1} d_k

holds as a matrix identity up to rounding, which in turn gives [d, H] = 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from math import comb
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from .errors import ConfigError
from .exterior import (
    FormField,
    ModeLattice,
    TrigField,
    TrigVectorField,
    evaluate_on_grid,
    insert_label,
    multi_indices,
)

#: Sign of the alpha-dependent drift shift, F_alpha = F + s * Theta * (2 alpha - 1) (G.grad)G.
#: "standard" (s=+1) reproduces the alpha-scheme Monte-Carlo densities; "printed" is s=-1.
SIGN_CONVENTIONS = {"standard": 1.0, "printed": -1.0}
DEFAULT_SIGN_CONVENTION = "standard"

DENSE_LIMIT = 5000


@dataclass(frozen=True)
class NoiseModel:
    fields: tuple[TrigVectorField, ...]
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        if not self.fields:
            raise ConfigError("noise model needs at least one vector field")
        if not np.isfinite(self.theta) or self.theta <= 0:
            raise ConfigError(f"noise intensity theta must be positive, got {self.theta}")
        lat = self.fields[0].lattice
        for g in self.fields:
            if g.lattice != lat:
                raise ConfigError("noise fields live on different lattices")

    @property
    def lattice(self) -> ModeLattice:
        return self.fields[0].lattice

    def is_additive(self) -> bool:
        return all(g[j].bandwidth == 0 for g in self.fields for j in range(g.dim))

    def drift_correction(self) -> TrigVectorField:
        """Galerkin-truncated sum over a of (G_a . grad) G_a."""
        acc = TrigVectorField.zeros(self.lattice)
        for g in self.fields:
            acc = acc + g.directional(g)
        return acc


@dataclass(frozen=True)
class SystemSpec:
    lattice: ModeLattice
    flow: TrigVectorField
    noise: NoiseModel
    name: str = "custom"

    def __post_init__(self):
        if self.flow.lattice != self.lattice or self.noise.lattice != self.lattice:
            raise ConfigError("flow, noise and lattice must share one ModeLattice")
        if not self.flow.is_real():
            raise ConfigError("flow field violates the reality condition c_{-n} = conj(c_n)")
        if not all(g.is_real() for g in self.noise.fields):
            raise ConfigError("noise field violates the reality condition c_{-n} = conj(c_n)")

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @property
    def theta(self) -> float:
        return self.noise.theta

    def with_theta(self, theta: float) -> "SystemSpec":
        return replace(self, noise=NoiseModel(self.noise.fields, theta))

    def with_flow(self, flow: TrigVectorField, name: str | None = None) -> "SystemSpec":
        return replace(self, flow=flow, name=name or self.name)

    @cached_property
    def nondegeneracy(self) -> float:
        return check_nondegenerate(self.noise, self.lattice, max(4 * self.lattice.cutoff + 1, 32))

    @property
    def bandwidth(self) -> int:
        fields = [self.flow, *self.noise.fields]
        return max(c.bandwidth for f in fields for c in f)


@dataclass(frozen=True)
class DegreeBlockOperator:
    """Matrix of an operator from degree ``degree`` to ``target_degree``."""

    degree: int
    target_degree: int
    matrix: np.ndarray
    tag: str
    lattice: ModeLattice = field(repr=False)

    @property
    def shape(self):
        return self.matrix.shape

    def apply(self, psi: FormField) -> FormField:
        if psi.degree != self.degree:
            raise ConfigError(f"block acts on degree {self.degree}, got {psi.degree}")
        return FormField.from_vector(self.lattice, self.target_degree, self.matrix @ psi.vector)


def block_size(lattice: ModeLattice, k: int) -> int:
    return comb(lattice.dim, k) * lattice.size


# --------------------------------------------------------------------------
# noise nondegeneracy


def check_nondegenerate(noise: NoiseModel, lattice: ModeLattice, grid_points: int) -> float:
    """Minimum over a uniform grid of the smallest eigenvalue of g^{ij} = G_a^i G_a^j."""
    if grid_points < lattice.width:
        raise ConfigError(f"grid of {grid_points} points is too coarse for M={lattice.cutoff}")
    D = lattice.dim
    vals = np.stack(
        [np.stack([evaluate_on_grid(g[i], grid_points)[0].real for i in range(D)], axis=-1) for g in noise.fields],
        axis=-1,
    )  # (..., D, A)
    metric = vals @ np.swapaxes(vals, -1, -2)
    return float(np.min(np.linalg.eigvalsh(metric)))


# --------------------------------------------------------------------------
# sparse primitives


def multiplication_matrix(f: TrigField) -> sp.csr_matrix:
    """Sparse matrix of psi -> P_M(f psi) on one scalar component."""
    lat = f.lattice
    modes = lat.modes
    rows, cols, vals = [], [], []
    allcols = np.arange(lat.size)
    for p, c in zip(*f.nonzero_modes()):
        target = modes + p
        ok = np.all(np.abs(target) <= lat.cutoff, axis=1)
        rows.append(np.ravel_multi_index(tuple((target[ok] + lat.cutoff).T), lat.shape))
        cols.append(allcols[ok])
        vals.append(np.full(ok.sum(), c))
    if not rows:
        return sp.csr_matrix((lat.size, lat.size), dtype=complex)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(lat.size, lat.size)
    )


@lru_cache(maxsize=64)
def d_sparse(lattice: ModeLattice, k: int) -> sp.csr_matrix:
    if not 0 <= k < lattice.dim:
        raise ConfigError(f"d is defined for degrees 0..{lattice.dim - 1}, got {k}")
    src = multi_indices(lattice.dim, k)
    dst = multi_indices(lattice.dim, k + 1)
    deriv = [sp.diags(1j * np.broadcast_to(w, lattice.shape).reshape(-1).astype(complex)) for w in lattice.wavenumbers]
    blocks = [[None] * len(src) for _ in dst]
    for a, idx in enumerate(dst):
        for m, j in enumerate(idx):
            blocks[a][src.index(idx[:m] + idx[m + 1 :])] = (-1) ** m * deriv[j]
    return _bmat(blocks, lattice, len(dst), len(src))


def interior_sparse(v: TrigVectorField, k: int) -> sp.csr_matrix:
    lat = v.lattice
    if not 1 <= k <= lat.dim:
        raise ConfigError(f"interior product is defined for degrees 1..{lat.dim}, got {k}")
    src = multi_indices(lat.dim, k)
    dst = multi_indices(lat.dim, k - 1)
    mult = [multiplication_matrix(c) for c in v]
    blocks = [[None] * len(src) for _ in dst]
    for a, idx in enumerate(dst):
        for j in range(lat.dim):
            full, sign = insert_label(idx, j)
            if sign:
                blocks[a][src.index(full)] = sign * mult[j]
    return _bmat(blocks, lat, len(dst), len(src))


def _bmat(blocks, lattice, nrow, ncol) -> sp.csr_matrix:
    n = lattice.size
    zero = sp.csr_matrix((n, n), dtype=complex)
    filled = [[b if b is not None else zero for b in row] for row in blocks]
    if not filled or not filled[0]:
        return sp.csr_matrix((nrow * n, ncol * n), dtype=complex)
    return sp.bmat(filled, format="csr", dtype=complex)


def _empty(lattice, k_out, k_in) -> sp.csr_matrix:
    rows = block_size(lattice, k_out) if 0 <= k_out <= lattice.dim else 0
    return sp.csr_matrix((rows, block_size(lattice, k_in)), dtype=complex)


def lie_sparse(v: TrigVectorField, k: int) -> sp.csr_matrix:
    """Cartan-built Lie derivative d i_v + i_v d on degree k."""
    lat = v.lattice
    out = _empty(lat, k, k)
    if k >= 1:
        out = out + d_sparse(lat, k - 1) @ interior_sparse(v, k)
    if k < lat.dim:
        out = out + interior_sparse(v, k + 1) @ d_sparse(lat, k)
    return out.tocsr()


def _check_degree(system: SystemSpec, k: int):
    if not 0 <= k <= system.dim:
        raise ConfigError(f"degree {k} outside 0..{system.dim}")


def _warn_degenerate(system: SystemSpec):
    if system.nondegeneracy <= 0:
        warnings.warn(f"noise of system {system.name!r} is degenerate (min eig g = {system.nondegeneracy:.3g})")


def gto_sparse(system: SystemSpec, k: int, flow: TrigVectorField | None = None) -> sp.csr_matrix:
    """Sparse H_k = L_F - Theta sum_a L_{G_a} L_{G_a}."""
    _check_degree(system, k)
    flow = system.flow if flow is None else flow
    out = lie_sparse(flow, k)
    for g in system.noise.fields:
        lg = lie_sparse(g, k)
        out = out - system.theta * (lg @ lg)
    return out.tocsr()


def dbar_sparse(system: SystemSpec, k: int, flow: TrigVectorField | None = None) -> sp.csr_matrix:
    """Sparse dbar_k = i_F - Theta sum_a i_{G_a} L_{G_a}, mapping degree k to k-1."""
    _check_degree(system, k)
    if k == 0:
        return _empty(system.lattice, -1, 0)
    flow = system.flow if flow is None else flow
    out = interior_sparse(flow, k)
    for g in system.noise.fields:
        out = out - system.theta * (interior_sparse(g, k) @ lie_sparse(g, k))
    return out.tocsr()


# --------------------------------------------------------------------------
# dense blocks


def _dense(mat: sp.spmatrix) -> np.ndarray:
    if max(mat.shape) > DENSE_LIMIT:
        raise ConfigError(f"block of size {mat.shape} exceeds the dense limit {DENSE_LIMIT}; use the matrix-free path")
    return mat.toarray()


def build_d_matrix(lattice: ModeLattice, k: int) -> DegreeBlockOperator:
    return DegreeBlockOperator(k, k + 1, _dense(d_sparse(lattice, k)), "d", lattice)


def build_gto_block(system: SystemSpec, k: int) -> DegreeBlockOperator:
    _warn_degenerate(system)
    return DegreeBlockOperator(k, k, _dense(gto_sparse(system, k)), "GTO", system.lattice)


def build_dbar_block(system: SystemSpec, k: int) -> DegreeBlockOperator:
    return DegreeBlockOperator(k, k - 1, _dense(dbar_sparse(system, k)), "dbar", system.lattice)


def shifted_flow(system: SystemSpec, alpha: float, convention: str = DEFAULT_SIGN_CONVENTION) -> TrigVectorField:
    """F_alpha = F + s Theta (2 alpha - 1) sum_a (G_a . grad) G_a."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
    try:
        s = SIGN_CONVENTIONS[convention]
    except KeyError:
        raise ConfigError(f"unknown sign convention {convention!r}; choose from {sorted(SIGN_CONVENTIONS)}") from None
    scale = s * system.theta * (2 * alpha - 1)
    if scale == 0.0:
        return system.flow
    return system.flow + system.noise.drift_correction() * scale


def build_seo_block(
    system: SystemSpec, k: int, alpha: float, convention: str = DEFAULT_SIGN_CONVENTION
) -> DegreeBlockOperator:
    flow = shifted_flow(system, alpha, convention)
    _warn_degenerate(system)
    mat = _dense(gto_sparse(system, k, flow=flow))
    return DegreeBlockOperator(k, k, mat, f"SEO({alpha:g},{convention})", system.lattice)


def propagator(block: DegreeBlockOperator, t: float, eig: tuple[np.ndarray, np.ndarray] | None = None) -> DegreeBlockOperator:
    """exp(-t H) by scaling-and-squaring, or from a supplied (values, right vectors) eigendecomposition."""
    if block.degree != block.target_degree:
        raise ConfigError("propagator needs a degree-preserving block")
    if not t > 0:
        raise ConfigError(f"propagation time must be positive, got {t}")
    if eig is None:
        mat = scipy.linalg.expm(-t * block.matrix)
    else:
        vals, vecs = eig
        mat = (vecs * np.exp(-t * vals)) @ np.linalg.inv(vecs)
    return DegreeBlockOperator(block.degree, block.degree, mat, f"propagator({t:g})", block.lattice)


# --------------------------------------------------------------------------
# matrix-free application


class MatrixFreeGto:
    """Apply H_k (or the GTO of a shifted flow) through padded-FFT products."""

    def __init__(self, system: SystemSpec, flow: TrigVectorField | None = None):
        self.system = system
        self.flow = system.flow if flow is None else flow
        lat = system.lattice
        band = max([c.bandwidth for c in self.flow] + [c.bandwidth for g in system.noise.fields for c in g])
        self.npad = _fast_len(2 * lat.cutoff + band + 1)
        self._wrap = np.arange(-lat.cutoff, lat.cutoff + 1) % self.npad
        self._flow_vals = self._field_values(self.flow)
        self._noise_vals = [self._field_values(g) for g in system.noise.fields]

    def _field_values(self, v: TrigVectorField):
        out = []
        for c in v:
            if c.bandwidth == 0:
                out.append(complex(c.coeffs[(c.lattice.cutoff,) * c.lattice.dim]))
            else:
                out.append(self._to_grid(c.coeffs))
        return out

    def _to_grid(self, coeffs):
        lat = self.system.lattice
        buf = np.zeros((self.npad,) * lat.dim, complex)
        buf[np.ix_(*([self._wrap] * lat.dim))] = coeffs
        return np.fft.ifftn(buf) * self.npad**lat.dim

    def _from_grid(self, values):
        lat = self.system.lattice
        coeffs = np.fft.fftn(values) / self.npad**lat.dim
        return coeffs[np.ix_(*([self._wrap] * lat.dim))]

    def _product(self, vals, coeffs):
        if np.isscalar(vals):
            return vals * coeffs
        return self._from_grid(vals * self._to_grid(coeffs))

    def _interior(self, vals, coeffs, k):
        lat = self.system.lattice
        src = multi_indices(lat.dim, k)
        dst = multi_indices(lat.dim, k - 1)
        out = np.zeros((len(dst),) + lat.shape, complex)
        for a, idx in enumerate(dst):
            for j in range(lat.dim):
                full, sign = insert_label(idx, j)
                if sign and not (np.isscalar(vals[j]) and vals[j] == 0):
                    out[a] += sign * self._product(vals[j], coeffs[src.index(full)])
        return out

    def _d(self, coeffs, k):
        lat = self.system.lattice
        src = multi_indices(lat.dim, k)
        dst = multi_indices(lat.dim, k + 1)
        out = np.zeros((len(dst),) + lat.shape, complex)
        for a, idx in enumerate(dst):
            for m, j in enumerate(idx):
                out[a] += (-1) ** m * 1j * lat.wavenumbers[j] * coeffs[src.index(idx[:m] + idx[m + 1 :])]
        return out

    def _lie(self, vals, coeffs, k):
        D = self.system.dim
        out = np.zeros_like(coeffs)
        if k >= 1:
            out += self._d(self._interior(vals, coeffs, k), k - 1)
        if k < D:
            out += self._interior(vals, self._d(coeffs, k), k + 1)
        return out

    def apply_coeffs(self, k: int, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=complex)
        out = self._lie(self._flow_vals, coeffs, k)
        for vals in self._noise_vals:
            out -= self.system.theta * self._lie(vals, self._lie(vals, coeffs, k), k)
        return out

    def linear_operator(self, k: int) -> LinearOperator:
        lat = self.system.lattice
        shape = (comb(lat.dim, k),) + lat.shape
        n = block_size(lat, k)
        return LinearOperator((n, n), matvec=lambda v: self.apply_coeffs(k, v.reshape(shape)).reshape(-1), dtype=complex)


def _fast_len(n: int) -> int:
    from scipy.fft import next_fast_len

    return next_fast_len(n)


def matrix_free_apply(system: SystemSpec, k: int, psi: FormField) -> FormField:
    """H_k psi without assembling a matrix."""
    _check_degree(system, k)
    if psi.degree != k:
        raise ConfigError(f"form of degree {psi.degree} passed to the degree-{k} block")
    if psi.lattice != system.lattice:
        raise ConfigError("form and system live on different lattices")
    return FormField(system.lattice, k, MatrixFreeGto(system).apply_coeffs(k, psi.coeffs))


def all_gto_blocks(system: SystemSpec) -> list[DegreeBlockOperator]:
    return [build_gto_block(system, k) for k in range(system.dim + 1)]


def all_d_blocks(lattice: ModeLattice) -> list[DegreeBlockOperator]:
    return [build_d_matrix(lattice, k) for k in range(lattice.dim)]


def pairing_matrix(lattice: ModeLattice, k: int) -> sp.csr_matrix:
    """Sparse P with pair(phi, psi) = phi.vector @ P @ psi.vector, phi of degree D-k."""
    D = lattice.dim
    left = multi_indices(D, D - k)
    right = multi_indices(D, k)
    n = lattice.size
    flip = sp.csr_matrix((np.ones(n), (np.arange(n), np.arange(n)[::-1])), shape=(n, n))
    from .exterior import permutation_sign

    blocks = [[permutation_sign(J + I) * (2 * np.pi) ** D * flip for I in right] for J in left]
    return sp.bmat(blocks, format="csr")


def lie_matrix_columns(v: TrigVectorField, k: int, columns: Sequence[int]) -> np.ndarray:
    """Columns of L_v on degree k computed by applying ``lie_apply`` to unit forms (assembly cross-check)."""
    from .exterior import lie_apply

    lat = v.lattice
    n = block_size(lat, k)
    out = []
    for c in columns:
        e = np.zeros(n, complex)
        e[c] = 1.0
        out.append(lie_apply(v, FormField.from_vector(lat, k, e)).vector)
    return np.stack(out, axis=1)
