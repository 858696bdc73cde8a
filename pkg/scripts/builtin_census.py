"""Dense spectral census of every builtin: singlets, doublets, pressure, Witten index, symmetries.

    python scripts/builtin_census.py --out results/census.json
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

import numpy as np

from gtospec.spectral import analyze, check_isospectral, check_pseudo_hermiticity, witten_index
from gtospec.systems import builtin, describe_system

VARIANTS = [
    ("diffusion", {"D": 1}),
    ("diffusion", {"D": 2}),
    ("diffusion", {"D": 3}),
    ("grad1d", {}),
    ("mult1d", {}),
    ("grad2d", {}),
    ("grad2d", {"eps": 0.2}),
    ("shear2d", {}),
    ("abc3d", {}),
]


def census(name: str, params: dict) -> dict:
    s = builtin(name, **params)
    t0 = time.perf_counter()
    rep = analyze(s)
    vals = np.concatenate(list(rep.eigenvalues.values()))
    nonzero = vals[np.abs(vals) > rep.tol]
    return {
        "system": describe_system(s),
        "singlets": rep.singlets,
        "doublets": len(rep.pairing.pairs),
        "unpaired": len(rep.pairing.unpaired),
        "pairing_residual": rep.pairing.max_residual,
        "delta": rep.delta,
        "type": rep.label,
        "gap": float(nonzero.real.min()),
        "witten_max": max(abs(witten_index(rep, t)) for t in np.linspace(0.1, 5, 20)),
        "pseudo_hermitian": check_pseudo_hermiticity(rep)[1],
        "top_bottom_distance": check_isospectral(rep)[1],
        "seconds": time.perf_counter() - t0,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--skip-3d", action="store_true")
    ap.add_argument("--out", default="results/census.json")
    args = ap.parse_args(argv)
    rows = []
    for name, params in VARIANTS:
        if args.skip_3d and (params.get("D") == 3 or name == "abc3d"):
            continue
        r = census(name, params)
        rows.append(r)
        label = name + "".join(f" {k}={v}" for k, v in params.items())
        print(f"{label:22s} singlets {r['singlets']!s:14s} doublets {r['doublets']:5d} "
              f"delta {r['delta']:.1e} type {r['type']} gap {r['gap']:.3f} "
              f"|W| {r['witten_max']:.0e} top/bottom {r['top_bottom_distance']:.1e} ({r['seconds']:.0f} s)")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(rows, indent=2) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
