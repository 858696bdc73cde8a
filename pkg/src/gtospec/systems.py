"""Builtin benchmark systems and the JSON system-config loader."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable

from .errors import ConfigError
from .expressions import ExpressionError, field_terms, format_terms, parse_flow_expression
from .exterior import ModeLattice, TrigVectorField
from .operators import NoiseModel, SystemSpec

DEFAULT_CUTOFF = {1: 16, 2: 4, 3: 4}


def system_from_expressions(
    name: str, dim: int, cutoff: int, theta: float, flow: list[str], noise: list[list[str]] | None = None
) -> SystemSpec:
    """Bind expression strings to a lattice; ``noise=None`` means the constant coordinate frame."""
    lattice = ModeLattice(dim, cutoff)
    if len(flow) != dim:
        raise ConfigError(f"flow needs {dim} component expressions, got {len(flow)}")
    F = TrigVectorField([parse_flow_expression(e, dim).bind(lattice) for e in flow])
    if noise is None:
        G = TrigVectorField.coordinate_frame(lattice)
    else:
        G = []
        for a, field in enumerate(noise):
            if len(field) != dim:
                raise ConfigError(f"noise field {a} needs {dim} components, got {len(field)}")
            G.append(TrigVectorField([parse_flow_expression(e, dim).bind(lattice) for e in field]))
    return SystemSpec(lattice, F, NoiseModel(tuple(G), float(theta)), name)


# --------------------------------------------------------------------------
# registry

_REGISTRY: dict[str, Callable[..., SystemSpec]] = {}
DESCRIPTIONS: dict[str, str] = {}


def register(name: str, description: str):
    def wrap(fn):
        if name in _REGISTRY:
            raise ValueError(f"builtin {name!r} registered twice")
        _REGISTRY[name] = fn
        DESCRIPTIONS[name] = description
        return fn

    return wrap


def builtin_names() -> list[str]:
    return sorted(_REGISTRY)


def builtin(name: str, **params) -> SystemSpec:
    """Construct a registered system; ``M`` and ``theta`` are accepted by every entry."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown system {name!r}; builtins are {', '.join(builtin_names())}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ConfigError(f"invalid parameters for {name!r}: {exc}") from None


def _cutoff(M, dim):
    return DEFAULT_CUTOFF[dim] if M is None else M


@register("diffusion", "pure diffusion, F = 0, constant frame noise")
def _diffusion(D: int = 2, M: int | None = None, theta: float = 1.0) -> SystemSpec:
    if D not in (1, 2, 3):
        raise ConfigError(f"diffusion dimension must be 1..3, got {D}")
    return system_from_expressions("diffusion", D, _cutoff(M, D), theta, ["0"] * D)


@register("grad1d", "gradient flow F = -sin x on the circle, additive noise")
def _grad1d(M: int | None = None, theta: float = 0.5) -> SystemSpec:
    return system_from_expressions("grad1d", 1, _cutoff(M, 1), theta, ["-sin(1*x1)"])


@register("mult1d", "F = -sin x with multiplicative noise G = 1 + 0.5 cos x")
def _mult1d(M: int | None = None, theta: float = 0.3, g: float = 0.5) -> SystemSpec:
    return system_from_expressions(
        "mult1d", 1, _cutoff(M, 1), theta, ["-sin(1*x1)"], [[f"1 + {float(g)!r}*cos(1*x1)"]]
    )


@register("grad2d", "F = -grad(cos x1 + cos x2 + eps cos(x1 + x2)), additive noise")
def _grad2d(M: int | None = None, theta: float = 0.5, eps: float = 0.0) -> SystemSpec:
    e = repr(float(eps))
    flow = [f"sin(1*x1) + {e}*sin(1*x1 + 1*x2)", f"sin(1*x2) + {e}*sin(1*x1 + 1*x2)"]
    if eps == 0:
        flow = ["sin(1*x1)", "sin(1*x2)"]
    return system_from_expressions("grad2d", 2, _cutoff(M, 2), theta, flow)


@register("shear2d", "non-gradient shear flow F = (sin x2, 0), additive noise")
def _shear2d(M: int | None = None, theta: float = 0.5) -> SystemSpec:
    return system_from_expressions("shear2d", 2, _cutoff(M, 2), theta, ["sin(1*x2)", "0"])


@register("abc3d", "ABC flow (A sin x3 + C cos x2, B sin x1 + A cos x3, C sin x2 + B cos x1), additive noise")
def _abc3d(M: int | None = None, theta: float = 0.5, A: float = 1.0, B: float = 1.0, C: float = 1.0) -> SystemSpec:
    a, b, c = (repr(float(v)) for v in (A, B, C))
    flow = [
        f"{a}*sin(1*x3) + {c}*cos(1*x2)",
        f"{b}*sin(1*x1) + {a}*cos(1*x3)",
        f"{c}*sin(1*x2) + {b}*cos(1*x1)",
    ]
    return system_from_expressions("abc3d", 3, _cutoff(M, 3), theta, flow)


# --------------------------------------------------------------------------
# JSON configs


def _require(doc: dict, key: str, kind, path: str):
    if key not in doc:
        raise ConfigError(f"{path}.{key}: missing required field {key!r}")
    val = doc[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, kind) or isinstance(val, bool):
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}, got {type(val).__name__}")
    return val


def system_from_config(doc: dict) -> SystemSpec:
    if not isinstance(doc, dict):
        raise ConfigError("$: system config must be a JSON object")
    name = _require(doc, "name", str, "$")
    dim = _require(doc, "D", int, "$")
    cutoff = _require(doc, "M", int, "$")
    theta = _require(doc, "theta", float, "$")
    flow = _require(doc, "F", list, "$")
    noise = doc.get("G")
    for i, e in enumerate(flow):
        if not isinstance(e, str):
            raise ConfigError(f"$.F[{i}]: expected an expression string")
    if noise is not None:
        if not isinstance(noise, list):
            raise ConfigError("$.G: expected a list of noise fields")
        for a, fld in enumerate(noise):
            if not isinstance(fld, list):
                raise ConfigError(f"$.G[{a}]: expected a list of component expressions")
            for i, e in enumerate(fld):
                if not isinstance(e, str):
                    raise ConfigError(f"$.G[{a}][{i}]: expected an expression string")
    if dim not in (1, 2, 3):
        raise ConfigError(f"$.D: dimension must be 1, 2 or 3, got {dim}")
    try:
        return system_from_expressions(name, dim, cutoff, theta, flow, noise)
    except ExpressionError as exc:
        raise ConfigError(f"$: expression error: {exc}") from None


def load_system_config(path: str | Path) -> SystemSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"system config {str(path)!r} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return system_from_config(doc)


def describe_system(system: SystemSpec) -> dict:
    """Config document (the ``load_system_config`` schema) that rebuilds ``system`` exactly."""

    def text(f):
        return format_terms(field_terms(f))

    return {
        "name": system.name,
        "D": system.dim,
        "M": system.lattice.cutoff,
        "theta": system.theta,
        "F": [text(c) for c in system.flow],
        "G": [[text(c) for c in g] for g in system.noise.fields],
    }


def resolve_system(spec: str, **overrides) -> SystemSpec:
    """A builtin name or a path to a JSON config; overrides M/theta where given."""
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if spec in _REGISTRY:
        return builtin(spec, **overrides)
    if spec.endswith(".json") or Path(spec).exists():
        system = load_system_config(spec)
        if "M" in overrides and overrides["M"] != system.lattice.cutoff:
            doc = json.loads(Path(spec).read_text())
            doc["M"] = overrides["M"]
            system = system_from_config(doc)
        if "theta" in overrides:
            system = system.with_theta(overrides["theta"])
        return system
    return builtin(spec, **overrides)

