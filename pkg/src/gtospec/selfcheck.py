"""Invariant suite run by ``gtospec selfcheck``.

Every check records a status (pass, fail, skip or info), the measured value
and the limit it was held to.  ``info`` entries are reported but never fail
the suite.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np
import scipy.sparse as sp

from .errors import InvariantViolation
from .exterior import FormField, TrigField, evaluate_on_grid
from .morse import check_gradient, morse_complex, poincare_hopf
from .operators import (
    MatrixFreeGto,
    SystemSpec,
    build_gto_block,
    d_sparse,
    dbar_sparse,
    gto_sparse,
    lie_matrix_columns,
    lie_sparse,
)
from .sde import EnsembleSpec, SdeScheme, analytic_stationary_1d, run_ensemble
from .spectral import (
    SpectrumReport,
    analyze,
    biorthogonality_defect,
    check_isospectral,
    check_pseudo_hermiticity,
    ergodic_zero,
    evolve,
    grid_minimum,
    partition_function,
    poincare_bendixson_assert,
    pressure,
    witten_index,
)
from .systems import describe_system, system_from_config


@dataclass(frozen=True)
class SelfcheckConfig:
    identity_tol: float = 1e-13
    zero_tol: float = 1e-7
    pair_tol: float = 1e-7
    ground_tol: float = 1e-8
    positivity_tol: float = 1e-8
    witten_tol: float = 1e-8
    plateau_tol: float = 1e-6
    hermiticity_tol: float = 1e-8
    biorth_tol: float = 1e-8
    analytic_tol: float = 1e-6
    operator_tol: float = 1e-10
    evolution_times: tuple[float, ...] = (0.1, 1.0, 10.0)
    witten_grid: tuple[float, float, int] = (0.1, 5.0, 50)
    seed: int = 0
    threads: int | None = None


@dataclass
class Check:
    name: str
    status: str  # pass | fail | skip | info
    value: float | list | None = None
    limit: float | None = None
    detail: str = ""

    def line(self) -> str:
        val = "" if self.value is None else f" value={_fmt(self.value)}"
        lim = "" if self.limit is None else f" limit={self.limit:.0e}"
        note = f" ({self.detail})" if self.detail else ""
        return f"{self.status.upper():4s} {self.name}{val}{lim}{note}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


@dataclass
class SelfcheckReport:
    system: str
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == "fail"]

    def to_json(self) -> dict:
        return {"system": self.system, "ok": self.ok, "checks": [asdict(c) for c in self.checks]}


def _bound(name, value, limit, detail="", upper=True) -> Check:
    good = value <= limit if upper else value >= -limit
    return Check(name, "pass" if good else "fail", float(value), limit, detail)


def _maxabs(m) -> float:
    m = sp.csr_matrix(m)
    return float(np.abs(m.data).max()) if m.nnz else 0.0


# --------------------------------------------------------------------------
# operator identities


def identity_checks(system: SystemSpec, tol: float) -> list[Check]:
    """d^2 = 0, [d, H] = 0 and H = d dbar + dbar d, entrywise relative to the operands."""
    lat, D = system.lattice, system.dim
    H = [gto_sparse(system, k) for k in range(D + 1)]
    d = [d_sparse(lat, k) for k in range(D)]
    nil = comm = lap = 0.0
    for k in range(D - 1):
        nil = max(nil, _maxabs(d[k + 1] @ d[k]))
    for k in range(D):
        a, b = d[k] @ H[k], H[k + 1] @ d[k]
        scale = max(_maxabs(a), _maxabs(b), 1.0)
        comm = max(comm, _maxabs(a - b) / scale)
    for k in range(D + 1):
        rhs = sp.csr_matrix(H[k].shape, dtype=complex)
        if k >= 1:
            rhs = rhs + d[k - 1] @ dbar_sparse(system, k)
        if k < D:
            rhs = rhs + dbar_sparse(system, k + 1) @ d[k]
        lap = max(lap, _maxabs(H[k] - rhs) / max(_maxabs(H[k]), 1.0))
    return [
        Check("d_squared_zero", "pass" if nil == 0.0 else "fail", nil, 0.0),
        _bound("d_commutes_with_H", comm, tol),
        _bound("H_is_d_exact", lap, tol),
    ]


def assembly_checks(system: SystemSpec, tol: float, seed: int) -> list[Check]:
    """Sparse assembly against the form-level Lie derivative and the matrix-free operator."""
    rng = np.random.default_rng(seed)
    lat, D = system.lattice, system.dim
    lie_err = mf_err = 0.0
    for k in range(D + 1):
        L = lie_sparse(system.flow, k).tocsc()
        cols = rng.choice(L.shape[1], size=min(8, L.shape[1]), replace=False)
        ref = lie_matrix_columns(system.flow, k, cols)
        got = L[:, cols].toarray()
        lie_err = max(lie_err, float(np.abs(got - ref).max() / max(np.abs(ref).max(), 1.0)))
        v = rng.standard_normal(L.shape[1]) + 1j * rng.standard_normal(L.shape[1])
        a = gto_sparse(system, k) @ v
        b = MatrixFreeGto(system).apply_coeffs(k, v.reshape((comb(D, k),) + lat.shape)).reshape(-1)
        mf_err = max(mf_err, float(np.linalg.norm(a - b) / np.linalg.norm(a)) if np.any(a) else float(np.linalg.norm(b)))
    return [_bound("lie_assembly_matches_forms", lie_err, tol), _bound("matrix_free_matches_sparse", mf_err, tol)]


def parser_roundtrip(system: SystemSpec) -> Check:
    rebuilt = system_from_config(describe_system(system))
    same = all(
        np.array_equal(a.coeffs, b.coeffs)
        for f, g in zip([system.flow, *system.noise.fields], [rebuilt.flow, *rebuilt.noise.fields])
        for a, b in zip(f, g)
    )
    return Check("config_roundtrip_exact", "pass" if same else "fail")


# --------------------------------------------------------------------------
# spectral invariants


def positive_density(lattice, rng: np.random.Generator, band: int = 2, floor: float = 0.1) -> FormField:
    """Random top form ``1 + sum a_n cos + b_n sin`` with total amplitude ``1 - floor``, so min >= floor."""
    band = min(band, lattice.cutoff)
    zero = (0,) * lattice.dim
    modes = [tuple(int(v) - band for v in n) for n in np.ndindex(*(2 * band + 1,) * lattice.dim)]
    modes = [n for n in modes if n != zero and next(v for v in n if v != 0) > 0]
    amp = rng.standard_normal((len(modes), 2))
    amp *= (1 - floor) / np.abs(amp).sum()
    coeffs = {zero: 1.0 + 0j}
    for n, (a, b) in zip(modes, amp):
        z = (a - 1j * b) / 2
        coeffs[n] = z
        coeffs[tuple(-v for v in n)] = np.conj(z)
    f = TrigField.from_modes(lattice, coeffs)
    return FormField(lattice, lattice.dim, f.coeffs[None])


def spectral_checks(system: SystemSpec, report: SpectrumReport, cfg: SelfcheckConfig) -> list[Check]:
    D = system.dim
    out: list[Check] = []
    betti = report.betti
    out.append(Check("singlets_equal_betti", "pass" if report.singlets == betti else "fail",
                     report.singlets, cfg.zero_tol, f"expected {betti}"))
    defective = int(sum(np.count_nonzero(s.defective) for s in report.degrees))
    bio = max(biorthogonality_defect(s, system.lattice) for s in report.degrees)
    out.append(_bound("biorthogonality", bio, cfg.biorth_tol, f"{defective} defective states"))
    pr = report.pairing
    status = "pass" if pr.complete and pr.max_residual <= cfg.pair_tol else "fail"
    out.append(Check("doublets_paired", status, pr.max_residual, cfg.pair_tol,
                     f"{len(pr.pairs)} pairs, {len(pr.unpaired)} unpaired"))

    top = report.eigenvalues[D]
    out.append(_bound("top_degree_ground_zero", abs(float(top.real.min())), cfg.ground_tol))
    blocks_top = build_gto_block(system, D)
    try:
        psi = ergodic_zero(blocks_top, cfg.ground_tol)
        out.append(_bound("ergodic_zero_nonnegative", grid_minimum(psi), cfg.positivity_tol, upper=False))
    except InvariantViolation as exc:
        psi = None
        out.append(Check("ergodic_zero_nonnegative", "fail", detail=str(exc)))

    rho = positive_density(system.lattice, np.random.default_rng(cfg.seed))
    worst = min(grid_minimum(evolve(blocks_top, rho, t)) for t in cfg.evolution_times)
    out.append(_bound("evolution_keeps_positivity", worst, cfg.positivity_tol,
                      f"t in {list(cfg.evolution_times)}", upper=False))

    a, b, n = cfg.witten_grid
    ws = np.array([witten_index(report, t) for t in np.linspace(a, b, int(n))])
    out.append(_bound("witten_index_zero", float(np.abs(ws).max()), cfg.witten_tol, f"t in [{a}, {b}]"))
    out.append(_bound("witten_index_constant", float(ws.max() - ws.min()), cfg.witten_tol))

    delta = pressure(report)
    if report.label == "T":
        vals = np.concatenate([s.values for s in report.degrees])
        gap = float(vals.real[np.abs(vals) > cfg.zero_tol].min())
        t = 40.0 / gap
        z = partition_function(report, t)
        out.append(_bound("partition_plateau", abs(z - sum(betti)), cfg.plateau_tol, f"Z({t:.3g}) -> {sum(betti)}"))
    else:
        out.append(Check("partition_plateau", "skip", detail=f"type {report.label}: Z grows like exp({delta:.3g} t)"))

    _, dist = check_pseudo_hermiticity(report, cfg.hermiticity_tol)
    out.append(_bound("pseudo_hermitian", dist, cfg.hermiticity_tol))

    if D <= 2:
        out.append(Check("poincare_bendixson", "pass" if poincare_bendixson_assert(report, D, cfg.ground_tol) else "fail",
                         delta, cfg.ground_tol))
    else:
        out.append(Check("poincare_bendixson", "skip", delta, None, "applies to D <= 2"))
    out.append(Check("pressure", "info", delta, None, f"type {report.label}"))

    _, dist = check_isospectral(report)
    out.append(Check("top_bottom_isospectral", "info", dist, None,
                     "holds for flow-reversal-symmetric systems; not an invariant in general"))

    if D == 1 and len(system.noise.fields) == 1 and psi is not None:
        x = 2 * np.pi * np.arange(512) / 512
        exact = analytic_stationary_1d(system, 0.5)(x)
        num = evaluate_on_grid(psi, 512)[0].real
        err = float(np.abs(num - exact).max() / np.abs(exact).max())
        out.append(_bound("ergodic_zero_matches_analytic", err, cfg.analytic_tol, "Stratonovich closed form"))
    return out


# --------------------------------------------------------------------------
# Morse and SDE cross-checks


def morse_check(system: SystemSpec, singlets: list[int] | None) -> Check:
    D = system.dim
    if D > 2:
        return Check("morse_ranks", "skip", detail="boundary operator implemented for D <= 2")
    if not check_gradient(system.flow):
        return Check("morse_ranks", "skip", detail="flow is not a gradient")
    from .morse import find_critical_points

    cps = find_critical_points(system.flow)
    total, reliable = poincare_hopf(cps)
    if not cps or not reliable:
        return Check("morse_ranks", "skip", detail="flow has no isolated nondegenerate zeros")
    cx = morse_complex(system.flow)
    betti = [comb(D, k) for k in range(D + 1)]
    good = cx.squares_vanish() and cx.ranks == betti and (singlets is None or cx.ranks == singlets)
    return Check("morse_ranks", "pass" if good else "fail", cx.ranks, None,
                 f"{sum(len(v) for v in cx.points.values())} critical points, Poincare-Hopf sum {total}")


def sde_determinism(system: SystemSpec, seed: int) -> Check:
    ens = EnsembleSpec(trajectories=32, steps=300, burn_in=100, seed=seed, bins=16, batch=8)
    scheme = SdeScheme(0.5, 1e-3)
    one = run_ensemble(system, scheme, ens, threads=1)
    many = run_ensemble(system, scheme, ens, threads=4)
    same = np.array_equal(one.counts, many.counts)
    return Check("ensemble_thread_invariant", "pass" if same else "fail", one.samples, None, "1 vs 4 threads")


# --------------------------------------------------------------------------


def selfcheck(system: SystemSpec, config: SelfcheckConfig | None = None) -> SelfcheckReport:
    cfg = config or SelfcheckConfig()
    rep = SelfcheckReport(system.name)
    nd = system.nondegeneracy
    rep.checks.append(Check("noise_nondegenerate", "pass" if nd > 0 else "fail", nd, 0.0))
    rep.checks.append(parser_roundtrip(system))
    rep.checks += identity_checks(system, cfg.identity_tol)
    rep.checks += assembly_checks(system, cfg.operator_tol, cfg.seed)
    report = analyze(system, tol=cfg.zero_tol, threads=cfg.threads)
    rep.checks += spectral_checks(system, report, cfg)
    rep.checks.append(morse_check(system, report.singlets))
    rep.checks.append(sde_determinism(system, cfg.seed))
    return rep
