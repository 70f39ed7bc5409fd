#!/usr/bin/env python3
"""Regenerate the pinned regression baselines in tests/baselines/.

Two JSON files anchor the numerical regression checks:

* ``measure_baseline.json`` — coarse-grained weights of the (-1)-measure
  of the golden-tongue critical map, so any future solver change that
  moves mass by more than the pinned tolerance is caught.
* ``tongue_baseline.json`` — golden-tongue parameter values a(nu) at a
  few interior points, pinned to the certified bisection width.

The values are produced by the same cached helpers the acceptance
checks call, so the stored numbers and the checked numbers come from a
single code path.  Run this after any *deliberate* change to the
solvers and review the resulting diff before committing it.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from automeasure import NU_CRITICAL, solve_tongue_point
from automeasure.acceptance import ARNOLD, BASELINE_DIR, GOLDEN, solved


def measure_baseline(coarse_bins: int = 64) -> dict:
    entry = {"map": "crit", "s": -1.0, "N": 2 ** 12,
            "coarse_bins": coarse_bins, "tol": 1e-9}
    res = solved(entry["map"], entry["s"], entry["N"])
    coarse = res.measure.weights.reshape(coarse_bins, -1).sum(axis=1)
    entry["coarse_weights"] = [float(w) for w in coarse]
    print(f"measure baseline: map={entry['map']} s={entry['s']} N={entry['N']} "
          f"residual={res.residual:.3e} max_atom={float(coarse.max()):.6f}")
    return entry


def tongue_baseline(rel_nus=(0.25, 0.6, 0.9), tol_a: float = 1e-10) -> dict:
    entry = {"rel_nus": list(rel_nus), "tol_a": tol_a, "tol": 1e-9,
            "a_values": []}
    for rel in rel_nus:
        a = solve_tongue_point(ARNOLD, GOLDEN, rel * NU_CRITICAL, tol_a)
        entry["a_values"].append(float(a))
        print(f"tongue baseline: nu = {rel:g} * nu_max -> a = {a!r}")
    return entry


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=str(BASELINE_DIR),
                        help="baseline directory (default: tests/baselines)")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name, payload in (("measure_baseline.json", measure_baseline()),
                          ("tongue_baseline.json", tongue_baseline())):
        path = out / name
        path.write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
