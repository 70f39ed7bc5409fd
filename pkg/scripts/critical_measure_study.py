#!/usr/bin/env python3
"""Study the (-1)-measure at the golden tongue's critical endpoint.

Three numerical experiments on the Arnold map with golden-mean rotation
number at nu = 1/(2*pi), where the map has a cubic critical point:

1. atom decay — the largest bin mass of the solved measure across
   doubling grid resolutions; it must shrink, an atom would not.
2. diffeo approach — measures of golden-tongue maps at
   nu_j = (1 - 2^-j) * nu_max converge to the critical measure in
   KR distance as j grows.
3. geometry control — real-bounds ratios and return-map derivatives
   across partition levels; neither may grow without bound.

Each experiment writes one CSV to --out and prints a short verdict.

Typical use:

    python scripts/critical_measure_study.py --out out/critical
"""
from __future__ import annotations

import argparse
from pathlib import Path

from automeasure import (ContinuedFractionExpansion, MonotoneFamily,
                         build_partition, kr_distance, max_atom,
                         max_return_derivative, real_bounds_ratio,
                         solve_s_measure, solve_tongue_point)


def tongue_map(family, alpha, nu, tol_a):
    a = solve_tongue_point(family, alpha, nu, tol_a)
    return family.map(a, nu), a


def atom_decay(fmap, s, exponents, tol_kr, out_dir):
    rows = []
    for k in exponents:
        res = solve_s_measure(fmap, s, N=2 ** k, tol_kr=tol_kr)
        atom = max_atom(res.measure)
        rows.append((2 ** k, atom, res.residual, res.iterations))
    path = out_dir / "atom_decay.csv"
    with open(path, "w") as fh:
        fh.write("N,max_atom,residual,iterations\n")
        for row in rows:
            fh.write(",".join(repr(v) for v in row) + "\n")
    atoms = [r[1] for r in rows]
    monotone = all(b < a for a, b in zip(atoms, atoms[1:]))
    print(f"[atom decay] max_atom {atoms[0]:.5f} -> {atoms[-1]:.5f} across "
          f"N = 2^{exponents[0]}..2^{exponents[-1]}; "
          f"strictly decreasing: {monotone}")
    print(f"  wrote {path}")
    return monotone


def diffeo_approach(family, alpha, crit_measure, s, N, levels, tol_a,
                    tol_kr, out_dir):
    rows = []
    for j in levels:
        nu = (1.0 - 2.0 ** (-j)) * family.nu_max
        fmap, a = tongue_map(family, alpha, nu, tol_a)
        res = solve_s_measure(fmap, s, N=N, tol_kr=tol_kr)
        gap = kr_distance(res.measure, crit_measure)
        rows.append((j, nu, a, gap))
    path = out_dir / "diffeo_approach.csv"
    with open(path, "w") as fh:
        fh.write("j,nu,a,kr_to_critical\n")
        for row in rows:
            fh.write(",".join(repr(v) for v in row) + "\n")
    gaps = [r[3] for r in rows]
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    print(f"[diffeo approach] KR gap {gaps[0]:.3e} -> {gaps[-1]:.3e} for "
          f"j = {levels[0]}..{levels[-1]}; strictly decreasing: {monotone}")
    print(f"  wrote {path}")
    return monotone


def geometry_control(fmap, out_dir):
    rows = []
    for n in range(3, 13):
        ratio = (real_bounds_ratio(build_partition(fmap, n))
                 if n >= 5 else float("nan"))
        deriv = max_return_derivative(fmap, n) if n <= 10 else float("nan")
        rows.append((n, ratio, deriv))
    path = out_dir / "geometry_control.csv"
    with open(path, "w") as fh:
        fh.write("level,real_bounds_ratio,max_return_derivative\n")
        for row in rows:
            fh.write(",".join(repr(v) for v in row) + "\n")
    ratios = [r[1] for r in rows if r[1] == r[1]]
    derivs = [r[2] for r in rows if r[2] == r[2]]
    print(f"[geometry] real-bounds ratio range [{min(ratios):.3f}, "
          f"{max(ratios):.3f}]; max return derivative "
          f"range [{min(derivs):.3f}, {max(derivs):.3f}]")
    print(f"  wrote {path}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--s", type=float, default=-1.0)
    parser.add_argument("--grid", type=int, default=2 ** 12,
                        help="measure resolution N for the KR sweep")
    parser.add_argument("--max-exp", type=int, default=14,
                        help="largest grid exponent for the atom study")
    parser.add_argument("--tol-a", type=float, default=1e-9)
    parser.add_argument("--tol-kr", type=float, default=1e-9)
    parser.add_argument("--out", default="out/critical")
    args = parser.parse_args()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    family = MonotoneFamily.arnold()
    alpha = ContinuedFractionExpansion.golden(40)

    crit_map, a_crit = tongue_map(family, alpha, family.nu_max, args.tol_a)
    print(f"critical endpoint: a = {a_crit!r} at nu = {family.nu_max!r}")

    atom_decay(crit_map, args.s, list(range(10, args.max_exp + 1)),
               args.tol_kr, out_dir)
    crit_res = solve_s_measure(crit_map, args.s, N=args.grid,
                               tol_kr=args.tol_kr)
    diffeo_approach(family, alpha, crit_res.measure, args.s, args.grid,
                    list(range(1, 7)), args.tol_a, args.tol_kr, out_dir)
    geometry_control(crit_map, out_dir)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
