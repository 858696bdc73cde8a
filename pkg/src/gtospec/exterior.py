"""Differential forms on the flat torus T^D in a truncated Fourier basis.

A k-form is stored as complex Fourier coefficients, one coefficient array per
strictly increasing multi-index ``(i_1 < ... < i_k)``, so that

    psi = sum_I sum_n psi_I[n] exp(i n.x) dx^{i_1} ^ ... ^ dx^{i_k}.

Every nonlinear product is an exact convolution followed by projection back to
``|n_j| <= M``.  The exterior derivative is diagonal in the modes, so d^2 = 0
holds exactly and the Cartan-built Lie derivative commutes with d at the matrix
level.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Mapping, Sequence

import numpy as np
from scipy import signal

from .errors import ConfigError

__all__ = [
    "ModeLattice",
    "TrigField",
    "TrigVectorField",
    "FormField",
    "build_lattice",
    "multi_indices",
    "insert_label",
    "remove_label",
    "permutation_sign",
    "galerkin_product",
    "galerkin_multiply",
    "d_apply",
    "interior_apply",
    "lie_apply",
    "pair",
    "evaluate_on_grid",
    "project_exact",
]


# --------------------------------------------------------------------------
# lattice


@dataclass(frozen=True)
class ModeLattice:
    """Modes ``n in {-M..M}^D`` enumerated lexicographically.

    The flat index of ``n`` is the C-order ravel of ``n + M``, which is
    lexicographic order in ``n``.
    """

    dim: int
    cutoff: int

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or not 1 <= self.dim <= 3:
            raise ConfigError(f"dimension must be 1, 2 or 3, got {self.dim!r}")
        if not isinstance(self.cutoff, (int, np.integer)) or self.cutoff < 1:
            raise ConfigError(f"mode cutoff must be a positive integer, got {self.cutoff!r}")

    @property
    def width(self) -> int:
        return 2 * self.cutoff + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.width,) * self.dim

    @property
    def size(self) -> int:
        return self.width**self.dim

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer array of shape (size, dim), row i is the mode with flat index i."""
        axes = np.indices(self.shape).reshape(self.dim, -1).T
        return axes - self.cutoff

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Per-axis wavenumber arrays broadcastable against a coefficient array."""
        out = []
        for j in range(self.dim):
            shape = [1] * self.dim
            shape[j] = self.width
            out.append(np.arange(-self.cutoff, self.cutoff + 1).reshape(shape))
        return tuple(out)

    @cached_property
    def norm_sq(self) -> np.ndarray:
        return sum(k.astype(float) ** 2 for k in self.wavenumbers) * np.ones(self.shape)

    def index_of(self, n: Sequence[int]) -> int:
        n = tuple(int(v) for v in n)
        if len(n) != self.dim or any(abs(v) > self.cutoff for v in n):
            raise ConfigError(f"mode {n} is outside the lattice (D={self.dim}, M={self.cutoff})")
        return int(np.ravel_multi_index(tuple(v + self.cutoff for v in n), self.shape))

    def mode_of(self, index: int) -> tuple[int, ...]:
        return tuple(int(v) - self.cutoff for v in np.unravel_index(index, self.shape))

    def slot(self, n: Sequence[int]) -> tuple[int, ...]:
        """Array position of mode ``n`` inside a coefficient array."""
        return tuple(int(v) + self.cutoff for v in n)

    def contains(self, n: Sequence[int]) -> bool:
        return len(n) == self.dim and all(abs(int(v)) <= self.cutoff for v in n)


def build_lattice(dim: int, cutoff: int) -> ModeLattice:
    return ModeLattice(dim, cutoff)


def _check_same(a: ModeLattice, b: ModeLattice):
    if a != b:
        raise ConfigError(f"lattice mismatch: {a} vs {b}")


# --------------------------------------------------------------------------
# scalar and vector trig polynomials


def galerkin_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Convolve two coefficient arrays and truncate to the input lattice."""
    if a.shape != b.shape:
        raise ConfigError(f"coefficient shapes differ: {a.shape} vs {b.shape}")
    # 'same' on odd widths crops the full convolution at offset M
    return signal.convolve(a, b, mode="same")


class TrigField:
    """Scalar trigonometric polynomial ``f(x) = sum_n c_n exp(i n.x)``."""

    __slots__ = ("lattice", "coeffs")

    def __init__(self, lattice: ModeLattice, coeffs):
        coeffs = np.array(coeffs, dtype=complex)
        if coeffs.shape != lattice.shape:
            raise ConfigError(f"coefficients of shape {coeffs.shape} do not fit lattice {lattice.shape}")
        coeffs.setflags(write=False)
        self.lattice = lattice
        self.coeffs = coeffs

    @classmethod
    def zeros(cls, lattice: ModeLattice) -> "TrigField":
        return cls(lattice, np.zeros(lattice.shape, complex))

    @classmethod
    def constant(cls, lattice: ModeLattice, value: complex) -> "TrigField":
        c = np.zeros(lattice.shape, complex)
        c[(lattice.cutoff,) * lattice.dim] = value
        return cls(lattice, c)

    @classmethod
    def from_modes(cls, lattice: ModeLattice, modes: Mapping[tuple, complex]) -> "TrigField":
        c = np.zeros(lattice.shape, complex)
        for n, v in modes.items():
            if not lattice.contains(n):
                raise ConfigError(f"mode {tuple(n)} exceeds cutoff M={lattice.cutoff}")
            c[lattice.slot(n)] += v
        return cls(lattice, c)

    def __repr__(self):
        nz = int(np.count_nonzero(self.coeffs))
        return f"TrigField(D={self.lattice.dim}, M={self.lattice.cutoff}, nonzero={nz})"

    def conjugate_mirror(self) -> np.ndarray:
        """Array whose entry at n is conj(c_{-n})."""
        return np.conj(self.coeffs[(slice(None, None, -1),) * self.lattice.dim])

    def reality_defect(self) -> float:
        return float(np.max(np.abs(self.coeffs - self.conjugate_mirror()), initial=0.0))

    def is_real(self, tol: float = 1e-12) -> bool:
        return self.reality_defect() <= tol

    def derivative(self, axis: int) -> "TrigField":
        return TrigField(self.lattice, 1j * self.lattice.wavenumbers[axis] * self.coeffs)

    def __add__(self, other: "TrigField") -> "TrigField":
        _check_same(self.lattice, other.lattice)
        return TrigField(self.lattice, self.coeffs + other.coeffs)

    def __sub__(self, other: "TrigField") -> "TrigField":
        _check_same(self.lattice, other.lattice)
        return TrigField(self.lattice, self.coeffs - other.coeffs)

    def __mul__(self, other):
        if isinstance(other, TrigField):
            _check_same(self.lattice, other.lattice)
            return TrigField(self.lattice, galerkin_product(self.coeffs, other.coeffs))
        return TrigField(self.lattice, self.coeffs * other)

    __rmul__ = __mul__

    def __neg__(self):
        return TrigField(self.lattice, -self.coeffs)

    def nonzero_modes(self, tol: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
        """Return (modes, coefficients) of entries with magnitude above ``tol``."""
        idx = np.argwhere(np.abs(self.coeffs) > tol)
        return idx - self.lattice.cutoff, self.coeffs[tuple(idx.T)]

    @property
    def bandwidth(self) -> int:
        """Largest |n_j| carrying a nonzero coefficient (0 for constants and zero)."""
        modes, _ = self.nonzero_modes()
        return int(np.max(np.abs(modes), initial=0))

    def __call__(self, x) -> np.ndarray:
        """Evaluate at points ``x`` of shape (..., D); returns complex values."""
        x = np.asarray(x, dtype=float)
        if self.lattice.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        modes, vals = self.nonzero_modes()
        out = np.zeros(x.shape[:-1], complex)
        for n, c in zip(modes, vals):
            out += c * np.exp(1j * (x @ n.astype(float)))
        return out

    def real_values(self, x) -> np.ndarray:
        return self(x).real


class TrigVectorField:
    """D trigonometric components ``V^j``; houses flows and noise vector fields."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[TrigField]):
        components = tuple(components)
        if not components:
            raise ConfigError("a vector field needs at least one component")
        lat = components[0].lattice
        for c in components:
            _check_same(lat, c.lattice)
        if len(components) != lat.dim:
            raise ConfigError(f"expected {lat.dim} components, got {len(components)}")
        self.components = components

    @property
    def lattice(self) -> ModeLattice:
        return self.components[0].lattice

    @property
    def dim(self) -> int:
        return self.lattice.dim

    def __getitem__(self, j: int) -> TrigField:
        return self.components[j]

    def __iter__(self):
        return iter(self.components)

    def __repr__(self):
        return f"TrigVectorField(D={self.dim}, M={self.lattice.cutoff})"

    @classmethod
    def zeros(cls, lattice: ModeLattice) -> "TrigVectorField":
        return cls([TrigField.zeros(lattice) for _ in range(lattice.dim)])

    @classmethod
    def constant(cls, lattice: ModeLattice, vector: Sequence[float]) -> "TrigVectorField":
        return cls([TrigField.constant(lattice, v) for v in vector])

    @classmethod
    def coordinate_frame(cls, lattice: ModeLattice) -> list["TrigVectorField"]:
        """The constant fields d/dx^a, a = 1..D."""
        return [cls.constant(lattice, np.eye(lattice.dim)[a]) for a in range(lattice.dim)]

    def __add__(self, other: "TrigVectorField") -> "TrigVectorField":
        return TrigVectorField([a + b for a, b in zip(self, other)])

    def __mul__(self, scalar) -> "TrigVectorField":
        return TrigVectorField([c * scalar for c in self])

    __rmul__ = __mul__

    def is_real(self, tol: float = 1e-12) -> bool:
        return all(c.is_real(tol) for c in self)

    def __call__(self, x) -> np.ndarray:
        """Real values at points of shape (..., D), stacked on the last axis."""
        return np.stack([c.real_values(x) for c in self], axis=-1)

    def jacobian(self, x) -> np.ndarray:
        """Matrix ``J[i, j] = d V^i / d x^j`` at points (..., D)."""
        rows = [np.stack([c.derivative(j).real_values(x) for j in range(self.dim)], axis=-1) for c in self]
        return np.stack(rows, axis=-2)

    def directional(self, other: "TrigVectorField") -> "TrigVectorField":
        """Galerkin-truncated ``(self . grad) other``."""
        out = []
        for comp in other:
            acc = TrigField.zeros(self.lattice)
            for j in range(self.dim):
                acc = acc + self[j] * comp.derivative(j)
            out.append(acc)
        return TrigVectorField(out)

    def divergence(self) -> TrigField:
        acc = TrigField.zeros(self.lattice)
        for j in range(self.dim):
            acc = acc + self[j].derivative(j)
        return acc


# --------------------------------------------------------------------------
# multi-index bookkeeping


def multi_indices(dim: int, degree: int) -> list[tuple[int, ...]]:
    """Strictly increasing label tuples of length ``degree`` (labels 0-based)."""
    if not 0 <= degree <= dim:
        return []
    return list(itertools.combinations(range(dim), degree))


def insert_label(index: tuple[int, ...], label: int) -> tuple[tuple[int, ...], int]:
    """Sorted ``index + label`` and the sign of ``dx^label ^ dx^index``.

    Returns sign 0 when the label is already present.
    """
    if label in index:
        return index, 0
    pos = sum(1 for i in index if i < label)
    return index[:pos] + (label,) + index[pos:], (-1) ** pos


def remove_label(index: tuple[int, ...], label: int) -> tuple[tuple[int, ...], int]:
    """Drop ``label``; the sign is (-1)^(m-1) for 1-based position m."""
    if label not in index:
        return index, 0
    pos = index.index(label)
    return index[:pos] + index[pos + 1 :], (-1) ** pos


def permutation_sign(seq: Sequence[int]) -> int:
    """Levi-Civita symbol of ``seq`` (0 on repeated labels)."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


# --------------------------------------------------------------------------
# forms


class FormField:
    """Degree-k form: coefficient array of shape (binom(D,k), *lattice.shape)."""

    __slots__ = ("lattice", "degree", "coeffs")

    def __init__(self, lattice: ModeLattice, degree: int, coeffs):
        if not 0 <= degree <= lattice.dim:
            raise ConfigError(f"form degree {degree} outside 0..{lattice.dim}")
        coeffs = np.array(coeffs, dtype=complex)
        want = (comb(lattice.dim, degree),) + lattice.shape
        if coeffs.shape != want:
            raise ConfigError(f"coefficient shape {coeffs.shape}, expected {want}")
        coeffs.setflags(write=False)
        self.lattice = lattice
        self.degree = degree
        self.coeffs = coeffs

    def __repr__(self):
        return f"FormField(degree={self.degree}, D={self.lattice.dim}, M={self.lattice.cutoff})"

    @property
    def labels(self) -> list[tuple[int, ...]]:
        return multi_indices(self.lattice.dim, self.degree)

    @classmethod
    def zeros(cls, lattice: ModeLattice, degree: int) -> "FormField":
        return cls(lattice, degree, np.zeros((comb(lattice.dim, degree),) + lattice.shape, complex))

    @classmethod
    def from_components(cls, lattice: ModeLattice, degree: int, components: Mapping) -> "FormField":
        """Build from ``{multi-index: TrigField | coefficient array}``; omitted components are zero."""
        labels = multi_indices(lattice.dim, degree)
        c = np.zeros((len(labels),) + lattice.shape, complex)
        for idx, val in components.items():
            idx = tuple(idx)
            if idx not in labels:
                raise ConfigError(f"{idx} is not an increasing multi-index of degree {degree}")
            arr = val.coeffs if isinstance(val, TrigField) else np.asarray(val)
            c[labels.index(idx)] = arr
        return cls(lattice, degree, c)

    @classmethod
    def from_vector(cls, lattice: ModeLattice, degree: int, vec) -> "FormField":
        return cls(lattice, degree, np.asarray(vec).reshape((comb(lattice.dim, degree),) + lattice.shape))

    @classmethod
    def volume(cls, lattice: ModeLattice, value: complex = 1.0) -> "FormField":
        return cls.from_components(lattice, lattice.dim, {tuple(range(lattice.dim)): TrigField.constant(lattice, value)})

    def component(self, index: tuple[int, ...]) -> TrigField:
        return TrigField(self.lattice, self.coeffs[self.labels.index(tuple(index))])

    @property
    def vector(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_real(self, tol: float = 1e-12) -> bool:
        return all(TrigField(self.lattice, c).is_real(tol) for c in self.coeffs)

    def _like(self, coeffs) -> "FormField":
        return FormField(self.lattice, self.degree, coeffs)

    def __add__(self, other: "FormField") -> "FormField":
        _check_form(self, other)
        return self._like(self.coeffs + other.coeffs)

    def __sub__(self, other: "FormField") -> "FormField":
        _check_form(self, other)
        return self._like(self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "FormField":
        return self._like(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "FormField":
        return self._like(-self.coeffs)


def _check_form(a: FormField, b: FormField):
    _check_same(a.lattice, b.lattice)
    if a.degree != b.degree:
        raise ConfigError(f"degree mismatch: {a.degree} vs {b.degree}")


# --------------------------------------------------------------------------
# operations


def galerkin_multiply(f: TrigField, psi: FormField) -> FormField:
    _check_same(f.lattice, psi.lattice)
    return psi._like(np.stack([galerkin_product(f.coeffs, c) for c in psi.coeffs]))


def d_apply(psi: FormField) -> FormField:
    """Exterior derivative: multiplication by i n_j, antisymmetrised over the new label."""
    lat, k = psi.lattice, psi.degree
    if k >= lat.dim:
        raise ConfigError(f"d of a degree-{k} form on T^{lat.dim} is not defined here (top forms are closed)")
    src = multi_indices(lat.dim, k)
    out_labels = multi_indices(lat.dim, k + 1)
    out = np.zeros((len(out_labels),) + lat.shape, complex)
    for a, idx in enumerate(out_labels):
        for m, j in enumerate(idx):
            rest = idx[:m] + idx[m + 1 :]
            out[a] += (-1) ** m * 1j * lat.wavenumbers[j] * psi.coeffs[src.index(rest)]
    return FormField(lat, k + 1, out)


def interior_apply(v: TrigVectorField, psi: FormField) -> FormField:
    """Contraction with ``v`` into the first slot; products are Galerkin-truncated."""
    _check_same(v.lattice, psi.lattice)
    lat, k = psi.lattice, psi.degree
    if k == 0:
        raise ConfigError("interior product of a 0-form is not defined")
    src = multi_indices(lat.dim, k)
    out_labels = multi_indices(lat.dim, k - 1)
    out = np.zeros((len(out_labels),) + lat.shape, complex)
    for a, idx in enumerate(out_labels):
        for j in range(lat.dim):
            full, sign = insert_label(idx, j)
            if sign == 0 or not np.any(v[j].coeffs):
                continue
            out[a] += sign * galerkin_product(v[j].coeffs, psi.coeffs[src.index(full)])
    return FormField(lat, k - 1, out)


def lie_apply(v: TrigVectorField, psi: FormField) -> FormField:
    """Lie derivative through the Cartan formula ``d i_v + i_v d``."""
    _check_same(v.lattice, psi.lattice)
    out = FormField.zeros(psi.lattice, psi.degree)
    if psi.degree >= 1:
        out = out + d_apply(interior_apply(v, psi))
    if psi.degree < psi.lattice.dim:
        out = out + interior_apply(v, d_apply(psi))
    return out


def pair(phi: FormField, psi: FormField) -> complex:
    """Integral of ``phi ^ psi`` over T^D for complementary degrees."""
    _check_same(phi.lattice, psi.lattice)
    lat = phi.lattice
    if phi.degree + psi.degree != lat.dim:
        raise ConfigError(f"degrees {phi.degree} and {psi.degree} are not complementary on T^{lat.dim}")
    rev = (slice(None, None, -1),) * lat.dim
    total = 0j
    for a, J in enumerate(phi.labels):
        for b, I in enumerate(psi.labels):
            eps = permutation_sign(J + I)
            if eps:
                total += eps * np.sum(phi.coeffs[a][rev] * psi.coeffs[b])
    return complex((2 * np.pi) ** lat.dim * total)


def grid_coordinates(points_per_dim: int) -> np.ndarray:
    return 2 * np.pi * np.arange(points_per_dim) / points_per_dim


def evaluate_on_grid(psi: FormField | TrigField, points_per_dim: int) -> np.ndarray:
    """Component values at the uniform grid ``x_j = 2 pi j / P``.

    Returns complex array of shape (ncomp, P, ..., P); a TrigField is treated
    as a single component.
    """
    lat = psi.lattice
    if points_per_dim < lat.width:
        raise ConfigError(f"grid of {points_per_dim} points aliases modes up to M={lat.cutoff}")
    coeffs = psi.coeffs[None] if isinstance(psi, TrigField) else psi.coeffs
    P, M = points_per_dim, lat.cutoff
    buf = np.zeros((coeffs.shape[0],) + (P,) * lat.dim, complex)
    wrap = np.arange(-M, M + 1) % P
    buf[(slice(None),) + np.ix_(*([wrap] * lat.dim))] = coeffs
    axes = tuple(range(1, lat.dim + 1))
    return np.fft.ifftn(buf, axes=axes) * P**lat.dim


def project_exact(psi: FormField) -> FormField:
    """Orthogonal projection onto d-exact forms: per mode ``n ^ (i_n psi) / |n|^2``, zero mean."""
    lat, k = psi.lattice, psi.degree
    if k == 0:
        return FormField.zeros(lat, 0)
    src = multi_indices(lat.dim, k)
    lower = multi_indices(lat.dim, k - 1)
    contracted = np.zeros((len(lower),) + lat.shape, complex)
    for a, idx in enumerate(lower):
        for j in range(lat.dim):
            full, sign = insert_label(idx, j)
            if sign:
                contracted[a] += sign * lat.wavenumbers[j] * psi.coeffs[src.index(full)]
    out = np.zeros_like(psi.coeffs)
    for a, idx in enumerate(src):
        for m, j in enumerate(idx):
            rest = idx[:m] + idx[m + 1 :]
            out[a] += (-1) ** m * lat.wavenumbers[j] * contracted[lower.index(rest)]
    nsq = lat.norm_sq.copy()
    nsq[(lat.cutoff,) * lat.dim] = np.inf
    return FormField(lat, k, out / nsq)
