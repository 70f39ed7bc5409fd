#!/usr/bin/env python3
"""Trace the golden-mean Arnold tongue and cross-check its slope.

Walks a(nu) across the full height of the tongue, from the rigid
rotation at nu = 0 up to the critical endpoint nu = 1/(2*pi).  At every
point the parameter is located by certified bisection, the measure-based
derivative da/dnu is evaluated, and at a few interior points the
derivative is compared against an independent central finite
difference.  Results land in one CSV per run.

Typical use:

    python scripts/trace_golden_tongue.py --points 9 --out out/tongue
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from automeasure import (ContinuedFractionExpansion, MonotoneFamily,
                         NU_CRITICAL, fd_derivative, trace_tongue)

FD_STEP_REL = 2.5e-3  # finite-difference step as a fraction of nu_max


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=9,
                        help="number of nu samples across the tongue")
    parser.add_argument("--grid", type=int, default=2 ** 12,
                        help="measure resolution N (power of two)")
    parser.add_argument("--tol-a", type=float, default=1e-9,
                        help="bisection bracket width for a(nu)")
    parser.add_argument("--checks", type=int, default=3,
                        help="number of interior finite-difference checks")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="out/tongue")
    args = parser.parse_args()
    if args.points < 2:
        parser.error("--points must be at least 2")

    family = MonotoneFamily.arnold()
    alpha = ContinuedFractionExpansion.golden(40)
    nu_list = np.linspace(0.0, family.nu_max, args.points)

    t0 = time.perf_counter()
    points = trace_tongue(family, alpha, nu_list, tol_a=args.tol_a,
                          N=args.grid, workers=args.workers)
    trace_s = time.perf_counter() - t0

    # Independent finite-difference slopes at a few interior points.
    check_idx = set(np.linspace(1, args.points - 2, args.checks,
                                dtype=int).tolist()) if args.checks else set()
    h = FD_STEP_REL * family.nu_max
    fd_by_idx, worst_gap = {}, 0.0
    for i in sorted(check_idx):
        pt = points[i]
        if pt.error is not None:
            continue
        fd = fd_derivative(family, alpha, pt.nu, h, tol_a=args.tol_a)
        fd_by_idx[i] = fd
        worst_gap = max(worst_gap, abs(pt.derivative - fd))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "golden_tongue.csv"
    with open(csv_path, "w") as fh:
        fh.write("nu,a,da_dnu,bisect_width,residual,iterations,"
                 "fd_da_dnu,error\n")
        for i, pt in enumerate(points):
            fd = repr(fd_by_idx[i]) if i in fd_by_idx else ""
            err = (pt.error or "").replace(",", ";").replace("\n", " ")
            fh.write(f"{pt.nu!r},{pt.a!r},{pt.derivative!r},"
                     f"{pt.bisect_width!r},{pt.residual!r},"
                     f"{pt.iterations},{fd},{err}\n")

    failures = [pt for pt in points if pt.error is not None]
    print(f"traced {len(points)} points in {trace_s:.1f}s "
          f"(N = {args.grid}, tol_a = {args.tol_a:g})")
    for i, pt in enumerate(points):
        mark = "  [fd-checked]" if i in fd_by_idx else ""
        print(f"  nu = {pt.nu:.6f}  a = {pt.a:.12f}  "
              f"da/dnu = {pt.derivative:+.6f}{mark}"
              + (f"  ERROR: {pt.error}" if pt.error else ""))
    if fd_by_idx:
        print(f"worst |da/dnu - finite difference| = {worst_gap:.3e} "
              f"(stencil h = {h:.2e})")
    print(f"wrote {csv_path}")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
