"""Command-line front end.

Every command resolves a system (builtin name or JSON config), runs one
pipeline and optionally writes a JSON report.  Reports carry the tool version,
the resolved configuration and the seeds used; they contain no timestamps, so
identical arguments give byte-identical files.

Exit codes: 0 success, 1 invariant violated, 2 configuration or parse error,
3 numerical failure.  The default thread budget is read from
``$GTOSPEC_THREADS``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from pathlib import Path

import numpy as np

from . import __version__
from .dynamo_oracle import abc_growth_rates
from .errors import ConfigError, GtoError, InvariantViolation, NumericalError
from .morse import find_critical_points, morse_complex, poincare_hopf
from .operators import DEFAULT_SIGN_CONVENTION, SIGN_CONVENTIONS, SystemSpec, build_gto_block
from .sde import EnsembleSpec, SdeScheme, compare_to_gto, run_ensemble
from .selfcheck import SelfcheckConfig, selfcheck
from .spectral import (
    ITERATIVE_ZERO_TOL,
    ZERO_TOL,
    analyze,
    classify,
    leading_spectrum,
    partition_function,
    poincare_bendixson_assert,
    pressure,
)
from .systems import builtin_names, describe_system, resolve_system

PROG = "gtospec"
EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


@dataclass
class CommandOutcome:
    exit_code: int
    artifacts: list[str] = field(default_factory=list)
    message: str = ""


# --------------------------------------------------------------------------
# output helpers


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, default=_default) + "\n"


def write_atomic(path: str | Path, text: str) -> str:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return str(path)


def _complex_list(values) -> list[dict]:
    return [{"re": float(v.real), "im": float(v.imag)} for v in values]


def _spectrum_csv(eigs: dict[int, np.ndarray]) -> str:
    rows = ["degree,re,im"]
    for k in sorted(eigs):
        rows += [f"{k},{float(v.real)!r},{float(v.imag)!r}" for v in eigs[k]]
    return "\n".join(rows) + "\n"


class _Context:
    """Resolved system plus the bookkeeping shared by every command."""

    def __init__(self, args: argparse.Namespace, modes_default: int | None = None):
        self.args = args
        self.params = _parse_params(args.param or [])
        modes = args.modes if args.modes is not None else modes_default
        overrides = dict(self.params)
        if modes is not None:
            overrides["M"] = modes
        if args.theta is not None:
            overrides["theta"] = args.theta
        if self.params and args.system not in builtin_names():
            raise ConfigError("--param applies to builtin systems only")
        self.system: SystemSpec = resolve_system(args.system, **overrides)
        self.artifacts: list[str] = []
        self.seeds: dict[str, int] = {}

    def config(self) -> dict:
        skip = {"func", "out", "csv", "threads", "param", "command"}
        options = {k: v for k, v in vars(self.args).items() if k not in skip}
        return {"params": self.params, "options": options, "resolved": describe_system(self.system)}

    def envelope(self, command: str, result: dict) -> dict:
        return {"tool": PROG, "version": __version__, "command": command,
                "config": self.config(), "seeds": self.seeds, "result": result}

    def write(self, path, text: str):
        if path:
            self.artifacts.append(write_atomic(path, text))

    def report(self, command: str, result: dict):
        self.write(self.args.out, dumps(self.envelope(command, result)))


def _parse_params(items: list[str]) -> dict:
    out = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        for conv in (int, float):
            try:
                out[key] = conv(raw)
                break
            except ValueError:
                continue
        else:
            out[key] = raw
    return out


def _number_list(text: str, name: str) -> list[float]:
    try:
        vals = [float(Fraction(v.strip())) for v in text.split(",") if v.strip()]
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{name}: expected a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise ConfigError(f"{name}: empty list")
    return vals


def _t_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError):
        raise ConfigError(f"--t-grid expects a:b:n, got {text!r}") from None
    if len(parts) != 3 or not 0 < a <= b or n < 1:
        raise ConfigError(f"--t-grid needs 0 < a <= b and n >= 1, got {text!r}")
    return np.linspace(a, b, n)


class _Partial:
    """Eigenvalue dictionary accepted by ``pressure`` and ``classify``."""

    def __init__(self, eigenvalues: dict[int, np.ndarray]):
        self.eigenvalues = eigenvalues


# --------------------------------------------------------------------------
# commands


def cmd_spectrum(args) -> CommandOutcome:
    ctx = _Context(args)
    s = ctx.system
    degrees = [args.degree] if args.degree is not None else list(range(s.dim + 1))
    if any(not 0 <= k <= s.dim for k in degrees):
        raise ConfigError(f"--degree must lie in 0..{s.dim}")
    if args.method == "dense" and args.degree is None:
        report = analyze(s, threads=args.threads)
        result = report.to_json()
        eigs = report.eigenvalues
        print(f"{s.name}: singlets {report.singlets} (Betti {report.betti}), "
              f"delta {report.delta:.3e}, type {report.label}")
    elif args.method == "dense":
        vals = np.linalg.eigvals(build_gto_block(s, args.degree).matrix)
        vals = np.array(sorted(vals, key=lambda v: (round(v.real, 12), round(v.imag, 12))))
        eigs = {args.degree: vals}
        zeros = int(np.count_nonzero(np.abs(vals) <= ZERO_TOL))
        result = {"degree": args.degree, "eigenvalues": _complex_list(vals), "singlets": zeros, "tol": ZERO_TOL}
        print(f"{s.name}: degree {args.degree}, {len(vals)} eigenvalues, {zeros} zero modes")
    else:
        ctx.seeds["arnoldi"] = args.seed
        eigs = {}
        for k in degrees:
            ls = leading_spectrum(s, k, args.count, args.tau, sector=args.sector, method=args.method, seed=args.seed)
            eigs[k] = ls.values
        zeros = {str(k): int(np.count_nonzero(np.abs(v) <= ITERATIVE_ZERO_TOL)) for k, v in eigs.items()}
        result = {"method": args.method, "tau": args.tau, "sector": args.sector, "count": args.count,
                  "degrees": {str(k): _complex_list(v) for k, v in eigs.items()},
                  "zero_modes": zeros, "tol": ITERATIVE_ZERO_TOL}
        for k, v in eigs.items():
            print(f"degree {k}: " + ", ".join(f"{x.real:.6g}{x.imag:+.6g}i" for x in v))
    ctx.report("spectrum", result)
    ctx.write(args.csv, _spectrum_csv(eigs))
    return CommandOutcome(EXIT_OK, ctx.artifacts)


def cmd_classify(args) -> CommandOutcome:
    ctx = _Context(args)
    s = ctx.system
    if args.method == "dense":
        part = analyze(s, threads=args.threads)
        label, delta = part.label, part.delta
        result = part.to_json()
    else:
        ctx.seeds["arnoldi"] = args.seed
        eigs = {k: leading_spectrum(s, k, args.count, args.tau, method=args.method, seed=args.seed).values
                for k in range(s.dim + 1)}
        part = _Partial(eigs)
        label, delta = classify(part), pressure(part)
        result = {"degrees": {str(k): _complex_list(v) for k, v in eigs.items()}, "delta": delta, "type": label}
    print(label)
    print(f"delta = {delta:.6e}")
    ok = poincare_bendixson_assert(part, s.dim)
    result["poincare_bendixson"] = None if s.dim > 2 else bool(ok)
    ctx.report("classify", result)
    if not ok:
        return CommandOutcome(EXIT_INVARIANT, ctx.artifacts,
                              f"pressure {delta:.3e} > 0 on a D={s.dim} system violates Poincare-Bendixson")
    return CommandOutcome(EXIT_OK, ctx.artifacts)


def cmd_witten(args) -> CommandOutcome:
    ctx = _Context(args)
    ts = _t_grid(args.t_grid)
    report = analyze(ctx.system, t_grid=ts, threads=args.threads)
    w = np.array([v for _, v in report.witten])
    z = [partition_function(report, t) for t in ts]
    worst, spread = float(np.abs(w).max()), float(w.max() - w.min())
    result = {"samples": [{"t": float(t), "witten": float(a), "partition": float(b)} for t, a, b in zip(ts, w, z)],
              "max_abs": worst, "variation": spread, "euler_characteristic": 0, "tol": args.tol,
              "betti_sum": sum(report.betti)}
    ctx.report("witten", result)
    print(f"max |W| = {worst:.3e}, variation = {spread:.3e} over t in [{ts[0]:g}, {ts[-1]:g}]")
    if worst > args.tol or spread > args.tol:
        return CommandOutcome(EXIT_INVARIANT, ctx.artifacts, f"Witten index deviates from 0 by {worst:.3e}")
    return CommandOutcome(EXIT_OK, ctx.artifacts)


def _ensemble(args, burn_in: int | None = None, thin: int = 1) -> EnsembleSpec:
    """Ensemble layout from the flags; unset ones take the per-command defaults."""
    burn = args.burn_in if args.burn_in is not None else (burn_in if burn_in is not None else args.steps // 10)
    thin = args.thin if args.thin is not None else thin
    return EnsembleSpec(args.traj, args.steps, burn, args.seed, args.bins, thin, args.batch)


def cmd_simulate(args) -> CommandOutcome:
    ctx = _Context(args)
    scheme = SdeScheme(args.alpha, args.dt)
    ens = _ensemble(args)
    ctx.seeds["ensemble"] = ens.seed
    dens = run_ensemble(ctx.system, scheme, ens, threads=args.threads)
    csv_path = Path(args.out)
    ctx.artifacts.append(write_atomic(csv_path, dens.to_csv()))
    side = csv_path.with_suffix(".json")
    result = {"scheme": {"alpha": scheme.alpha, "dt": scheme.dt},
              "ensemble": {"trajectories": ens.trajectories, "steps": ens.steps, "burn_in": ens.burn_in,
                           "thin": ens.thin, "bins": ens.bins, "batch": ens.batch},
              "rng": "PCG64 per trajectory, child i of SeedSequence(seed)",
              "samples": dens.samples, "density_csv": csv_path.name}
    ctx.artifacts.append(write_atomic(side, dumps(ctx.envelope("simulate", result))))
    print(f"{dens.samples} samples binned into {ens.bins}^{ctx.system.dim} cells -> {csv_path}")
    return CommandOutcome(EXIT_OK, ctx.artifacts)


# 4096 trajectories x 245 recorded states = 1,003,520 samples with the default steps
DILEMMA_BURN_IN, DILEMMA_THIN = 8000, 50


def cmd_compare(args) -> CommandOutcome:
    ctx = _Context(args)
    s = ctx.system
    alphas = _number_list(args.alphas, "--alphas")
    ens = _ensemble(args, burn_in=DILEMMA_BURN_IN, thin=DILEMMA_THIN)
    ctx.seeds["ensemble"] = ens.seed
    if args.convention not in (*SIGN_CONVENTIONS, "all"):
        raise ConfigError(f"unknown convention {args.convention!r}")
    conventions = sorted(SIGN_CONVENTIONS) if args.convention == "all" else [args.convention]
    rows = []
    for a in alphas:
        scheme = SdeScheme(a, args.dt)
        emp = run_ensemble(s, scheme, ens, threads=args.threads)
        row = {"alpha": a, "samples": emp.samples, "seo": {}}
        for conv in conventions:
            cmp = compare_to_gto(s, scheme, ens, conv, empirical=emp)
            row["seo"][conv] = cmp.l1_seo
            row["gto"], row["analytic"] = cmp.l1_gto, cmp.l1_analytic
        rows.append(row)
        seo = ", ".join(f"SEO[{c}] {v:.4f}" for c, v in row["seo"].items())
        ana = "n/a" if row["analytic"] is None else f"{row['analytic']:.4f}"
        print(f"alpha={a:g}: L1 vs GTO {row['gto']:.4f}, vs analytic {ana}, {seo}")
    tol = args.tolerance
    checks = {}
    by_alpha = {r["alpha"]: r for r in rows}
    if 0.5 in by_alpha:
        base = by_alpha[0.5]["gto"]
        checks["stratonovich_matches_gto"] = base <= tol
        if 0.0 in by_alpha:
            checks["ito_separated_from_gto"] = by_alpha[0.0]["gto"] >= 5 * base
    if all(r["analytic"] is not None for r in rows):
        checks["analytic_match"] = all(r["analytic"] <= tol for r in rows)
    surviving = [c for c in conventions if all(r["seo"][c] <= tol for r in rows)]
    result = {"rows": rows, "tolerance": tol, "checks": checks, "surviving_conventions": surviving,
              "default_convention": DEFAULT_SIGN_CONVENTION}
    ctx.report("compare-interpretations", result)
    print(f"surviving sign conventions: {surviving or 'none'}; checks: {checks}")
    failed = [k for k, v in checks.items() if not v]
    if failed or not surviving:
        return CommandOutcome(EXIT_INVARIANT, ctx.artifacts, f"failed checks: {failed or 'no surviving convention'}")
    return CommandOutcome(EXIT_OK, ctx.artifacts)


def cmd_morse(args) -> CommandOutcome:
    ctx = _Context(args)
    s = ctx.system
    cps = find_critical_points(s.flow, args.seeds)
    if not cps or any(p.degenerate for p in cps):
        raise ConfigError(f"flow of {s.name!r} has degenerate or non-isolated zeros; no Morse complex")
    cx = morse_complex(s.flow, args.seeds)
    total, reliable = poincare_hopf(cps)
    betti = [comb(s.dim, k) for k in range(s.dim + 1)]
    result = cx.to_json()
    result["poincare_hopf"] = {"sum": total, "reliable": reliable}
    problems = []
    if not cx.squares_vanish():
        problems.append("boundary does not square to zero")
    if cx.ranks != betti:
        problems.append(f"ranks {cx.ranks} differ from Betti numbers {betti}")
    if args.with_spectrum:
        report = analyze(s, threads=args.threads)
        result["singlets"] = report.singlets
        if report.singlets != cx.ranks:
            problems.append(f"ranks {cx.ranks} differ from singlet census {report.singlets}")
    ctx.report("morse", result)
    counts = [len(cx.points[k]) for k in range(s.dim + 1)]
    print(f"critical points per index {counts}, Poincare-Hopf sum {total}, ranks {cx.ranks}")
    if problems:
        return CommandOutcome(EXIT_INVARIANT, ctx.artifacts, "; ".join(problems))
    return CommandOutcome(EXIT_OK, ctx.artifacts)


DYNAMO_MODES = 8


def cmd_dynamo_scan(args) -> CommandOutcome:
    ctx = _Context(args, modes_default=DYNAMO_MODES)
    s = ctx.system
    if s.dim != 3:
        raise ConfigError("dynamo-scan needs a D = 3 system")
    thetas = _number_list(args.theta_list, "--theta-list")
    ctx.seeds["arnoldi"] = args.seed
    use_oracle = not args.no_oracle and s.name == "abc3d"
    abc = {k: float(ctx.params.get(k, 1.0)) for k in "ABC"}
    rows, bad = [], []
    csv = ["theta,delta,type,lead_re,lead_im,oracle_re,oracle_im,rel_error"]
    for th in thetas:
        ls = leading_spectrum(s.with_theta(th), 2, args.eigs, args.tau, sector="exact",
                              method=args.method, seed=args.seed)
        part = _Partial(ls.eigenvalues)
        # the global spectrum also holds the ergodic zero, so the global pressure is max(0, sector pressure)
        label, sector_delta = classify(part), pressure(part)
        delta = max(sector_delta, 0.0)
        lead = ls.values[0]
        if lead.imag < 0 and np.any(np.abs(ls.values - np.conj(lead)) < 1e-8 * max(1, abs(lead))):
            lead = np.conj(lead)
        row = {"theta": th, "eigenvalues": _complex_list(ls.values), "delta": delta,
               "delta_exact_sector": sector_delta, "type": label,
               "leading": {"re": float(lead.real), "im": float(lead.imag)}}
        oracle, rel = None, None
        if use_oracle:
            rates = abc_growth_rates(th, s.lattice.cutoff, count=args.eigs, **abc)
            cand = -rates
            oracle = cand[int(np.argmin(np.abs(cand - lead)))]
            rel = float(abs(lead - oracle) / abs(oracle))
            row["oracle"] = {"growth_rates": _complex_list(rates), "matched": {"re": float(oracle.real),
                             "im": float(oracle.imag)}, "rel_error": rel}
            if rel > args.rtol:
                bad.append(th)
        rows.append(row)
        csv.append(",".join([repr(th), repr(delta), label, repr(float(lead.real)), repr(float(lead.imag)),
                             "" if oracle is None else repr(float(oracle.real)),
                             "" if oracle is None else repr(float(oracle.imag)),
                             "" if rel is None else repr(rel)]))
        ora = "" if rel is None else f", oracle rel. error {rel:.1e}"
        print(f"theta={th:.6g}: leading {lead.real:.6g}{lead.imag:+.6g}i, delta {delta:.4g}, type {label}{ora}")
    result = {"degree": 2, "sector": "exact", "tau": args.tau, "method": args.method, "rows": rows,
              "oracle": "induction operator" if use_oracle else None, "rtol": args.rtol,
              "type_c_found": any(r["type"] == "c" for r in rows)}
    ctx.report("dynamo-scan", result)
    ctx.write(args.csv, "\n".join(csv) + "\n")
    if bad:
        return CommandOutcome(EXIT_INVARIANT, ctx.artifacts, f"oracle disagreement beyond {args.rtol:g} at theta {bad}")
    return CommandOutcome(EXIT_OK, ctx.artifacts)


def cmd_selfcheck(args) -> CommandOutcome:
    ctx = _Context(args)
    ctx.seeds["checks"] = args.seed
    rep = selfcheck(ctx.system, SelfcheckConfig(seed=args.seed, threads=args.threads))
    for c in rep.checks:
        print(c.line())
    ctx.report("selfcheck", rep.to_json())
    if not rep.ok:
        names = ", ".join(c.name for c in rep.failures)
        return CommandOutcome(EXIT_INVARIANT, ctx.artifacts, f"failed checks: {names}")
    print(f"{ctx.system.name}: all checks passed")
    return CommandOutcome(EXIT_OK, ctx.artifacts)


# --------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--system", required=True, help="builtin name or path to a JSON system config")
    common.add_argument("--modes", type=int, help="Fourier cutoff M")
    common.add_argument("--theta", type=float, help="noise intensity")
    common.add_argument("--param", action="append", metavar="KEY=VALUE", help="builtin parameter (repeatable)")
    common.add_argument("--out", help="JSON report path")
    common.add_argument("--threads", type=int, help="thread budget (default $GTOSPEC_THREADS or CPU count)")

    iterative = _Parser(add_help=False)
    iterative.add_argument("--method", choices=["dense", "sparse", "matrix-free"], default="dense")
    iterative.add_argument("--count", type=int, default=6, help="eigenvalues per degree (iterative methods)")
    iterative.add_argument("--tau", type=float, default=1.0, help="propagator time for Arnoldi")
    iterative.add_argument("--seed", type=int, default=0, help="Arnoldi start-vector seed")

    ensemble = _Parser(add_help=False)
    ensemble.add_argument("--dt", type=float, default=1e-3)
    ensemble.add_argument("--steps", type=int, default=20250)
    ensemble.add_argument("--traj", type=int, default=4096)
    ensemble.add_argument("--burn-in", type=int, help="discarded steps (simulate: steps // 10, compare: 8000)")
    ensemble.add_argument("--thin", type=int, help="record every n-th step (simulate: 1, compare: 50)")
    ensemble.add_argument("--batch", type=int, default=4096, help="trajectories per work unit")
    ensemble.add_argument("--seed", type=int, default=0)
    ensemble.add_argument("--bins", type=int, default=64)

    p = _Parser(prog=PROG, description="Spectral analysis of generalized transfer operators on tori.")
    p.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("spectrum", parents=[common, iterative], help="eigenvalues per degree")
    c.add_argument("--degree", type=int)
    c.add_argument("--sector", choices=["exact"], help="restrict iterative runs to d-exact forms")
    c.add_argument("--csv", help="CSV of eigenvalues in the complex plane")
    c.set_defaults(func=cmd_spectrum)

    c = sub.add_parser("classify", parents=[common, iterative], help="pressure and T/b/c type")
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("witten", parents=[common], help="Witten index over a time grid")
    c.add_argument("--t-grid", default="0.1:5:10", help="a:b:n")
    c.add_argument("--tol", type=float, default=1e-8)
    c.set_defaults(func=cmd_witten)

    c = sub.add_parser("simulate", parents=[common, ensemble], help="alpha-scheme ensemble histogram")
    c.add_argument("--alpha", type=float, required=True)
    c.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare-interpretations", parents=[common, ensemble],
                       help="alpha-scheme histograms against the GTO and SEO kernels")
    c.add_argument("--alphas", default="0,0.5,1")
    c.add_argument("--convention", default="all", help=f"one of {sorted(SIGN_CONVENTIONS)} or 'all'")
    c.add_argument("--tolerance", type=float, default=0.02, help="L1 tolerance of the checks")
    c.set_defaults(func=cmd_compare)

    c = sub.add_parser("morse", parents=[common], help="Morse complex of a gradient flow")
    c.add_argument("--seeds", type=int, default=16, help="Newton seeds per dimension")
    c.add_argument("--with-spectrum", action="store_true", help="also compare ranks with the singlet census")
    c.set_defaults(func=cmd_morse)

    c = sub.add_parser("dynamo-scan", parents=[common], help="exact 2-form leading spectrum across theta")
    c.add_argument("--theta-list", default="1/5,1/8,1/12")
    c.add_argument("--eigs", type=int, default=4)
    c.add_argument("--tau", type=float, default=1.0)
    c.add_argument("--method", choices=["sparse", "matrix-free"], default="sparse")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--rtol", type=float, default=1e-3)
    c.add_argument("--no-oracle", action="store_true")
    c.add_argument("--csv", help="CSV of delta and leading eigenvalue per theta")
    c.set_defaults(func=cmd_dynamo_scan)

    c = sub.add_parser("selfcheck", parents=[common], help="full invariant suite")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_selfcheck)
    return p


def run(argv: list[str] | None = None) -> CommandOutcome:
    """Parse ``argv``, run the command and map failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        outcome = args.func(args)
    except SystemExit as exc:  # --help / --version
        code = exc.code if isinstance(exc.code, int) else EXIT_CONFIG
        return CommandOutcome(code)
    except ConfigError as exc:
        outcome = CommandOutcome(EXIT_CONFIG, message=f"configuration error: {exc}")
    except InvariantViolation as exc:
        outcome = CommandOutcome(EXIT_INVARIANT, message=f"invariant violated: {exc}")
    except (NumericalError, np.linalg.LinAlgError) as exc:
        outcome = CommandOutcome(EXIT_NUMERICAL, message=f"numerical failure: {exc}")
    except GtoError as exc:
        outcome = CommandOutcome(EXIT_NUMERICAL, message=str(exc))
    if outcome.message:
        print(f"{PROG}: {outcome.message}", file=sys.stderr)
    return outcome


def main(argv: list[str] | None = None) -> int:
    return run(argv).exit_code


if __name__ == "__main__":
    sys.exit(main())
