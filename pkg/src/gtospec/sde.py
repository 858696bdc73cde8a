"""alpha-family SDE integrator on T^D, ensemble histograms and density oracles.

Each step solves ``x_k = x_{k-1} + dt * (F(y) + sqrt(2 theta) G_a(y) xi^a)`` with
``y = alpha x_k + (1 - alpha) x_{k-1}`` and ``xi ~ N(0, 1/dt)`` per noise field.

Random numbers: trajectory ``i`` draws from ``numpy.random.Generator(PCG64)``
seeded by the i-th child of ``SeedSequence(master_seed)``; Gaussians use numpy's
ziggurat transform.  Trajectories are processed in fixed-size batches, so the
result does not depend on how many threads run the batches.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError
from .exterior import FormField, ModeLattice, TrigField
from .operators import (
    DEFAULT_SIGN_CONVENTION,
    SIGN_CONVENTIONS,
    SystemSpec,
    build_gto_block,
    build_seo_block,
)
from .parallel import thread_budget

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class SdeScheme:
    alpha: float
    dt: float
    tol: float = 1e-12
    max_iter: int = 20

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.tol > 0 or self.max_iter < 1:
            raise ConfigError("implicit solver needs tol > 0 and max_iter >= 1")


@dataclass(frozen=True)
class EnsembleSpec:
    """Ensemble layout.

    Every trajectory runs ``steps`` steps and records its position every ``thin``
    steps after the first ``burn_in``.  ``batch`` trajectories share one
    vectorised work unit.
    """

    trajectories: int
    steps: int
    burn_in: int
    seed: int
    bins: int = 64
    thin: int = 1
    batch: int = 4096

    def __post_init__(self):
        for name in ("trajectories", "steps", "thin", "batch"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.burn_in < 0 or self.burn_in >= self.steps:
            raise ConfigError(f"burn_in must lie in [0, steps), got {self.burn_in} with steps={self.steps}")
        if self.bins < 8:
            raise ConfigError(f"need at least 8 bins, got {self.bins}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @property
    def samples_per_trajectory(self) -> int:
        return (self.steps - self.burn_in) // self.thin

    @property
    def samples(self) -> int:
        return self.trajectories * self.samples_per_trajectory


# --------------------------------------------------------------------------
# binned densities


def bin_edges(bins: int) -> np.ndarray:
    return np.linspace(0.0, TWO_PI, bins + 1)


@dataclass
class BinnedDensity:
    """Probability masses on a product grid of bins over [0, 2 pi)^D."""

    edges: list[np.ndarray]
    masses: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.edges)

    def centers(self) -> list[np.ndarray]:
        return [(e[1:] + e[:-1]) / 2 for e in self.edges]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"bin_center_{j + 1}" for j in range(self.dim)] + ["mass"])
        grids = np.meshgrid(*self.centers(), indexing="ij")
        for idx in np.ndindex(self.masses.shape):
            w.writerow([repr(float(g[idx])) for g in grids] + [repr(float(self.masses[idx]))])
        return buf.getvalue()


@dataclass
class EmpiricalDensity(BinnedDensity):
    counts: np.ndarray = field(default=None, repr=False)
    samples: int = 0

    def to_json(self) -> dict:
        return {
            "edges": [e.tolist() for e in self.edges],
            "masses": self.masses.tolist(),
            "counts": self.counts.tolist(),
            "samples": self.samples,
        }


def l1_distance(a: BinnedDensity, b: BinnedDensity) -> float:
    if a.masses.shape != b.masses.shape or any(
        len(x) != len(y) or not np.allclose(x, y, rtol=0, atol=1e-12) for x, y in zip(a.edges, b.edges)
    ):
        raise ConfigError("densities use different binnings")
    return float(np.abs(a.masses - b.masses).sum())


# --------------------------------------------------------------------------
# fast point evaluation of the system's fields


class FieldEvaluator:
    """Values of F and of every noise field at a batch of points.

    Real trig polynomials are summed over one representative of each +-n pair:
    f(x) = c_0 + sum 2 (Re c_n cos(n.x) - Im c_n sin(n.x)).
    """

    def __init__(self, system: SystemSpec):
        lat = system.lattice
        self.dim = lat.dim
        self.nfields = len(system.noise.fields)
        comps: list[TrigField] = list(system.flow) + [c for g in system.noise.fields for c in g]
        modes = lat.modes
        half = np.array([self._positive(n) for n in modes])
        used = np.zeros(len(modes), bool)
        for c in comps:
            used |= np.abs(c.coeffs.reshape(-1)) > 0
        sel = np.nonzero(used & half)[0]
        zero = lat.index_of((0,) * lat.dim)
        self.wavevectors = modes[sel].astype(float)  # (K, D)
        coeffs = np.stack([c.coeffs.reshape(-1) for c in comps], axis=1)  # (N, nc)
        self.const = coeffs[zero].real.copy()
        self.cos_weights = 2 * coeffs[sel].real
        self.sin_weights = -2 * coeffs[sel].imag

    @staticmethod
    def _positive(n) -> bool:
        for v in n:
            if v:
                return v > 0
        return False

    def __call__(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(F, G) with shapes (B, D) and (B, A, D) for points of shape (B, D)."""
        vals = np.broadcast_to(self.const, (x.shape[0], self.const.size))
        if len(self.wavevectors):
            phase = x @ self.wavevectors.T
            vals = vals + np.cos(phase) @ self.cos_weights + np.sin(phase) @ self.sin_weights
        D = self.dim
        return vals[:, :D], vals[:, D:].reshape(x.shape[0], self.nfields, D)


def _drift(ev: FieldEvaluator, x, xi, sigma):
    F, G = ev(x)
    if G.shape[1] == 1:
        return F + (sigma * xi) * G[:, 0]
    return F + sigma * np.einsum("ba,bad->bd", xi, G)


def _wrap(x: np.ndarray) -> np.ndarray:
    x = np.mod(x, TWO_PI)
    return np.where(x >= TWO_PI, x - TWO_PI, x)


def _advance(ev: FieldEvaluator, scheme: SdeScheme, sigma: float, x0: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """One scheme step for a batch; raises with the offending row on non-convergence."""
    dt, a = scheme.dt, scheme.alpha
    x = x0 + dt * _drift(ev, x0, xi, sigma)
    if a == 0.0:
        return _wrap(x)
    base = (1 - a) * x0
    active = None  # all rows while most are still moving
    for _ in range(scheme.max_iter):
        if active is None:
            new = x0 + dt * _drift(ev, a * x + base, xi, sigma)
            change = np.abs(new - x).max(axis=1)
            x = new
            moving = np.nonzero(change > scheme.tol)[0]
            if 4 * moving.size < x.shape[0]:
                active = moving
        else:
            new = x0[active] + dt * _drift(ev, a * x[active] + base[active], xi[active], sigma)
            change = np.abs(new - x[active]).max(axis=1)
            x[active] = new
            active = active[change > scheme.tol]
            moving = active
        if moving.size == 0:
            return _wrap(x)
    raise _ImplicitFailure(int(moving[0]))


class _ImplicitFailure(Exception):
    def __init__(self, row: int):
        self.row = row


# --------------------------------------------------------------------------
# public stepping API


def sample_noise(rng: np.random.Generator, dt: float, count: int) -> np.ndarray:
    """``count`` independent N(0, 1/dt) draws."""
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    return rng.standard_normal(count) / np.sqrt(dt)


def step(system: SystemSpec, scheme: SdeScheme, x, xi, evaluator: FieldEvaluator | None = None) -> np.ndarray:
    """Advance one point (shape (D,)) or a batch (shape (B, D)) by one step."""
    ev = evaluator or FieldEvaluator(system)
    x = np.asarray(x, float)
    xi = np.asarray(xi, float)
    single = x.ndim == 1
    xb, xib = np.atleast_2d(x), np.atleast_2d(xi)
    if xb.shape[1] != system.dim or xib.shape[1] != len(system.noise.fields):
        raise ConfigError("point or noise vector has the wrong length")
    try:
        out = _advance(ev, scheme, np.sqrt(2 * system.theta), xb.copy(), xib)
    except _ImplicitFailure:
        raise NumericalError(
            f"implicit step did not converge in {scheme.max_iter} iterations; reduce dt (now {scheme.dt})"
        ) from None
    return out[0] if single else out


# --------------------------------------------------------------------------
# ensembles

_CHUNK = 1024


def _trajectory_generators(seed: int, start: int, stop: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(stop)[start:stop]
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def _run_batch(system: SystemSpec, scheme: SdeScheme, ens: EnsembleSpec, start: int, stop: int) -> np.ndarray:
    ev = FieldEvaluator(system)
    D, A = system.dim, len(system.noise.fields)
    sigma = np.sqrt(2 * system.theta)
    gens = _trajectory_generators(ens.seed, start, stop)
    x = np.stack([g.uniform(0.0, TWO_PI, D) for g in gens])
    counts = np.zeros(ens.bins**D, np.int64)
    scale = ens.bins / TWO_PI
    weights = ens.bins ** np.arange(D - 1, -1, -1)
    noise_scale = 1 / np.sqrt(scheme.dt)
    for s0 in range(0, ens.steps, _CHUNK):
        n = min(_CHUNK, ens.steps - s0)
        xi = np.stack([g.standard_normal((n, A)) for g in gens], axis=1) * noise_scale  # (n, B, A)
        for j in range(n):
            k = s0 + j + 1
            try:
                x = _advance(ev, scheme, sigma, x, xi[j])
            except _ImplicitFailure as exc:
                raise NumericalError(
                    f"trajectory {start + exc.row}: implicit step {k} did not converge in "
                    f"{scheme.max_iter} iterations; reduce dt (now {scheme.dt})"
                ) from None
            if k > ens.burn_in and (k - ens.burn_in) % ens.thin == 0:
                idx = np.minimum((x * scale).astype(np.int64), ens.bins - 1) @ weights
                counts += np.bincount(idx, minlength=counts.size)
    return counts


def run_ensemble(system: SystemSpec, scheme: SdeScheme, ensemble: EnsembleSpec,
                 threads: int | None = None) -> EmpiricalDensity:
    """Pooled post-burn-in histogram; identical for any thread count."""
    threads = thread_budget(threads)
    bounds = [(s, min(s + ensemble.batch, ensemble.trajectories))
              for s in range(0, ensemble.trajectories, ensemble.batch)]
    if threads == 1:
        parts = [_run_batch(system, scheme, ensemble, a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: _run_batch(system, scheme, ensemble, *ab), bounds))
    counts = np.sum(parts, axis=0).reshape((ensemble.bins,) * system.dim)
    total = int(counts.sum())
    edges = [bin_edges(ensemble.bins) for _ in range(system.dim)]
    return EmpiricalDensity(edges, counts / total, counts, total)


# --------------------------------------------------------------------------
# density oracles


@dataclass
class StationaryDensity1D:
    """Closed-form stationary density of the alpha-scheme on the circle."""

    alpha: float
    theta: float
    potential_modes: np.ndarray  # Fourier coefficients of Phi(x) = int_0^x F/G^2
    noise: TrigField
    norm: float = 1.0

    def _phi(self, x):
        K = (len(self.potential_modes) - 1) // 2
        n = np.arange(-K, K + 1)
        return (np.exp(1j * np.multiply.outer(x, n)) @ self.potential_modes).real

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        g = self.noise.real_values(x[..., None])
        return self.norm * g ** (2 * self.alpha - 2) * np.exp(self._phi(x) / self.theta)

    def grid(self, points: int) -> tuple[np.ndarray, np.ndarray]:
        x = TWO_PI * np.arange(points) / points
        return x, self(x)

    def bin_masses(self, bins: int, order: int = 16) -> BinnedDensity:
        edges = bin_edges(bins)
        nodes, wts = np.polynomial.legendre.leggauss(order)
        half = (edges[1] - edges[0]) / 2
        mid = (edges[1:] + edges[:-1]) / 2
        pts = mid[:, None] + half * nodes[None, :]
        masses = half * (self(pts) @ wts)
        return BinnedDensity([edges], masses)


def analytic_stationary_1d(system: SystemSpec, alpha: float, resolution: int = 4096,
                           winding_tol: float = 1e-10) -> StationaryDensity1D:
    """p(x) = N G^(2 alpha - 2) exp(Phi(x) / theta) with Phi' = F / G^2, Phi(0) = 0."""
    if system.dim != 1:
        raise ConfigError("closed-form stationary density needs D = 1")
    if len(system.noise.fields) != 1:
        raise ConfigError("closed-form stationary density needs a single noise field")
    if not 0 <= alpha <= 1:
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
    G = system.noise.fields[0][0]
    F = system.flow[0]
    x = TWO_PI * np.arange(resolution) / resolution
    g = G.real_values(x[:, None])
    if g.min() <= 0:
        raise ConfigError("noise field must be positive everywhere on the circle")
    ratio = F.real_values(x[:, None]) / g**2
    c = np.fft.fft(ratio) / resolution
    scale = max(np.abs(ratio).max(), 1.0)
    if abs(c[0]) > winding_tol * scale:
        raise ConfigError(
            f"winding integral of F/G^2 is {TWO_PI * c[0].real:.3e}; no closed form, use the operator kernel"
        )
    K = resolution // 2 - 1
    n = np.concatenate([np.arange(-K, 0), np.arange(1, K + 1)])
    cn = np.concatenate([c[-K:], c[1:K + 1]])
    modes = np.zeros(2 * K + 1, complex)
    modes[n + K] = cn / (1j * n)
    modes[K] = -np.sum(cn / (1j * n))  # Phi(0) = 0
    dens = StationaryDensity1D(float(alpha), system.theta, modes, G)
    _, vals = dens.grid(resolution)
    dens.norm = 1 / (vals.sum() * TWO_PI / resolution)
    return dens


def kernel_bin_masses(psi: FormField, bins: int) -> BinnedDensity:
    """Exact bin integrals of a top-form density (real part)."""
    lat: ModeLattice = psi.lattice
    if psi.degree != lat.dim:
        raise ConfigError("bin masses need a top form")
    edges = bin_edges(bins)
    n = np.arange(-lat.cutoff, lat.cutoff + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        E = (np.exp(1j * np.outer(edges[1:], n)) - np.exp(1j * np.outer(edges[:-1], n))) / (1j * n)
    E[:, lat.cutoff] = edges[1:] - edges[:-1]
    out = psi.coeffs[0]
    for _ in range(lat.dim):
        # contract the leading mode axis, append the bin axis at the end
        out = np.tensordot(out, E, axes=([0], [1]))
    return BinnedDensity([edges] * lat.dim, out.real)


# --------------------------------------------------------------------------
# interpretation comparison


@dataclass
class InterpretationComparison:
    system: str
    alpha: float
    dt: float
    convention: str
    samples: int
    l1_seo: float
    l1_gto: float
    l1_analytic: float | None
    empirical: EmpiricalDensity = field(repr=False)

    def to_json(self) -> dict:
        doc = {k: v for k, v in asdict(self).items() if k != "empirical"}
        doc["masses"] = self.empirical.masses.tolist()
        return doc


def stationary_kernel(block) -> FormField:
    from .spectral import ergodic_zero

    return ergodic_zero(block)


def compare_to_gto(system: SystemSpec, scheme: SdeScheme, ensemble: EnsembleSpec,
                   convention: str = DEFAULT_SIGN_CONVENTION, threads: int | None = None,
                   empirical: EmpiricalDensity | None = None) -> InterpretationComparison:
    """L1 distances of the alpha-scheme histogram to the SEO(alpha) and GTO stationary states."""
    if system.dim != 1:
        raise ConfigError("interpretation comparison runs on D = 1 systems")
    if convention not in SIGN_CONVENTIONS:
        raise ConfigError(f"unknown sign convention {convention!r}")
    emp = empirical or run_ensemble(system, scheme, ensemble, threads)
    D = system.dim
    seo = kernel_bin_masses(stationary_kernel(build_seo_block(system, D, scheme.alpha, convention)), ensemble.bins)
    gto = kernel_bin_masses(stationary_kernel(build_gto_block(system, D)), ensemble.bins)
    try:
        ana = analytic_stationary_1d(system, scheme.alpha).bin_masses(ensemble.bins)
        l1_ana = l1_distance(emp, ana)
    except ConfigError:
        l1_ana = None
    return InterpretationComparison(system.name, scheme.alpha, scheme.dt, convention, emp.samples,
                                    l1_distance(emp, seo), l1_distance(emp, gto), l1_ana, emp)
