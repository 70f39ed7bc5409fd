"""Command-line front end: one subcommand per pipeline.

Every run is driven by a TOML config (``--config``); every output file
starts with ``# config_digest: <hex>`` so results are traceable to
their exact inputs.  Floats are written with ``repr`` so identical
configs produce bit-identical files.

Exit codes: 0 success, 1 usage/config error, 2 certification fallback,
3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .circlemap import NotHomeomorphismError, SolverError
from .config import ExperimentConfig, load_config
from .measure import GridMeasure, kr_distance, solve_s_measure
from .rotation import Comparison, analyze_rotation, build_partition
from .tongue import fd_derivative, trace_tongue

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FALLBACK = 2
EXIT_NO_CONVERGENCE = 3

__all__ = ["main", "entry",
           "EXIT_OK", "EXIT_USAGE", "EXIT_FALLBACK", "EXIT_NO_CONVERGENCE"]


class UsageError(ValueError):
    """Bad flags, bad config, or a bad map specification."""


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems via exceptions."""

    def error(self, message):  # noqa: D102 - argparse hook
        raise UsageError(message)


# ---------------------------------------------------------------------------
# output helpers


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value).replace(",", ";").replace("\n", " ")


def _write_csv(path: Path, digest: str, columns, rows, notes=()) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# config_digest: {digest}\n")
        for note in notes:
            fh.write(f"# {note}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _say(*parts) -> None:
    print(*parts)


# ---------------------------------------------------------------------------
# rho / cf: certified rotation data


def _ladder_rows(ana):
    """Per-rung certified enclosure table: level, index, left, right, length.

    Row n reports the enclosure of the rotation number after the exact
    side tests against convergents 0..n; index is the return time q_n.
    """
    lower, upper = Fraction(0), Fraction(1)
    rows = []
    for n, ((p, q), verdict) in enumerate(zip(ana.ladder, ana.verdicts)):
        value = Fraction(p, q)
        if verdict is Comparison.EQUAL:
            lower = upper = value
        elif verdict is Comparison.ABOVE and value > lower:
            lower = value
        elif verdict is Comparison.BELOW and value < upper:
            upper = value
        rows.append((n, q, float(lower), float(upper),
                     float(upper - lower)))
    return rows


def _print_rotation(ana) -> None:
    _say(f"rho = {ana.rho!r}")
    if ana.rational is not None:
        _say(f"rational: {ana.rational}")
    if ana.lower is not None:
        _say(f"bracket: [{ana.lower}, {ana.upper}]  gap = {ana.gap!r}")
    _say(f"quotients: {list(ana.quotients)}")
    _say(f"certified: {ana.certified}  orbit_used: {ana.orbit_used}")
    if not ana.certified and ana.fallback_error is not None:
        _say(f"fallback_error: {ana.fallback_error!r}")


def _rho_exit(ana, tol: float) -> int:
    """0 only when a certified enclosure reached the requested width."""
    if ana.certified and ana.gap <= tol:
        return EXIT_OK
    return EXIT_FALLBACK


def cmd_rho(config: ExperimentConfig, out_dir: Path) -> int:
    ana = analyze_rotation(config.map(), tol=config.tol_rho,
                           budget=config.n_orbit)
    _print_rotation(ana)
    _write_csv(out_dir / "rho_ladder.csv", config.digest(),
               ("level", "index", "left", "right", "length"),
               _ladder_rows(ana))
    return _rho_exit(ana, config.tol_rho)


def cmd_cf(config: ExperimentConfig, out_dir: Path) -> int:
    ana = analyze_rotation(config.map(), tol=config.tol_rho,
                           budget=config.n_orbit)
    _say(f"quotients: {list(ana.quotients)}")
    for n, (p, q) in enumerate(ana.ladder):
        _say(f"  level {n}: {p}/{q}  ({ana.verdicts[n].name})")
    _write_csv(out_dir / "cf_ladder.csv", config.digest(),
               ("level", "index", "left", "right", "length"),
               _ladder_rows(ana))
    return _rho_exit(ana, config.tol_rho)


# ---------------------------------------------------------------------------
# partition


def cmd_partition(config: ExperimentConfig, out_dir: Path) -> int:
    part = build_partition(config.map(), config.level,
                           budget=max(config.n_orbit, 2_000_000))
    rows = []
    for i in range(len(part)):
        left = float(part.lefts[i])
        length = float(part.lengths[i])
        rows.append((int(part.interval_levels[i]),
                     int(part.interval_indices[i]),
                     left, left + length, length))
    _write_csv(out_dir / "partition.csv", config.digest(),
               ("level", "index", "left", "right", "length"), rows,
               notes=(f"q_low: {part.q_low}", f"q_high: {part.q_high}"))
    _say(f"level {part.level}: {len(part)} intervals "
         f"(q_low={part.q_low}, q_high={part.q_high})")
    _say(f"total_length = {part.total_length()!r}")
    _say(f"adjacent_ratio_max = {part.adjacent_ratio_max()!r}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# measure / kr


def _measure_stem(s: float) -> str:
    return f"measure_s{s:g}"


def cmd_measure(config: ExperimentConfig, out_dir: Path) -> int:
    if not config.s_list:
        raise UsageError("config must list at least one exponent in s_list")
    fmap = config.map()
    digest = config.digest()
    summary = []
    out_dir.mkdir(parents=True, exist_ok=True)
    for s in config.s_list:
        res = solve_s_measure(fmap, s, N=config.N, tol_kr=config.tol_kr)
        stem = _measure_stem(s)
        res.measure.to_csv(out_dir / f"{stem}.csv",
                           header_lines=(f"config_digest: {digest}",
                                         f"s: {s!r}", f"N: {config.N}"))
        res.measure.to_binary(out_dir / f"{stem}.amu")
        summary.append((s, config.N, res.lam_final, res.kr_gap,
                        res.residual, res.iterations,
                        res.measure.max_atom()))
        _say(f"s = {s:g}: residual = {res.residual!r}, "
             f"lam_final = {res.lam_final!r}, "
             f"iterations = {res.iterations}")
    _write_csv(out_dir / "measures.csv", digest,
               ("s", "N", "lam_final", "kr_gap", "residual",
                "iterations", "max_atom"), summary)
    return EXIT_OK


def _load_measure(path: str) -> GridMeasure:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"measure file not found: {path}")
    if p.suffix == ".amu":
        return GridMeasure.from_binary(p)
    return GridMeasure.from_csv(p)


def cmd_kr(path_a: str, path_b: str) -> int:
    mu = _load_measure(path_a)
    nu = _load_measure(path_b)
    common = max(mu.N, nu.N)
    dist = kr_distance(mu.refine(common), nu.refine(common))
    _say(f"kr_distance = {dist!r}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# tongue


def _fd_step(config: ExperimentConfig) -> float:
    nu_max = config.family().nu_max
    if math.isfinite(nu_max):
        return nu_max / 200.0
    return 1e-3


def cmd_tongue(config: ExperimentConfig, out_dir: Path) -> int:
    if not config.nu_grid:
        raise UsageError("config must list tongue points in nu_grid")
    family = config.family()
    alpha = config.target_alpha()
    points = trace_tongue(family, alpha, config.nu_grid,
                          tol_a=config.tol_a, N=config.N,
                          tol_kr=config.tol_kr, workers=config.workers)
    h = _fd_step(config)
    fd_tol = max(config.tol_a, 1e-10)
    rows = []
    failed = False
    for pt in points:
        if pt.error is None:
            fd = fd_derivative(family, alpha, pt.nu, h, tol_a=fd_tol)
        else:
            fd = math.nan
            failed = True
        rows.append((pt.nu, pt.a, pt.derivative, pt.bisect_width,
                     pt.residual, pt.iterations, fd,
                     pt.error or ""))
        _say(f"nu = {pt.nu!r}: a = {pt.a!r}, da/dnu = {pt.derivative!r}, "
             f"fd = {fd!r}" + (f"  [{pt.error}]" if pt.error else ""))
    _write_csv(out_dir / "tongue.csv", config.digest(),
               ("nu", "a", "da_dnu", "bisect_width", "residual",
                "iterations", "fd_da_dnu", "error"), rows,
               notes=(f"alpha_quotients: {list(alpha.quotients)}",
                      f"fd_step: {h!r}"))
    return EXIT_NO_CONVERGENCE if failed else EXIT_OK


# ---------------------------------------------------------------------------
# sweep: tongue points x exponents


def _sweep_point(args):
    family, alpha, nu, s_list, N, tol_kr, tol_a = args
    from .tongue import solve_tongue_point

    try:
        a = solve_tongue_point(family, alpha, nu, tol_a)
    except Exception as exc:  # noqa: BLE001 - reported per point
        return [(nu, math.nan, s, math.nan, math.nan, math.nan, 0,
                 math.nan, f"{type(exc).__name__}: {exc}", None)
                for s in s_list]
    fmap = family.map(a, nu)
    out = []
    for s in s_list:
        try:
            res = solve_s_measure(fmap, s, N=N, tol_kr=tol_kr)
            out.append((nu, a, s, res.lam_final, res.kr_gap, res.residual,
                        res.iterations, res.measure.max_atom(), "",
                        res.measure.weights))
        except Exception as exc:  # noqa: BLE001 - reported per point
            out.append((nu, a, s, math.nan, math.nan, math.nan, 0,
                        math.nan, f"{type(exc).__name__}: {exc}", None))
    return out


def cmd_sweep(config: ExperimentConfig, out_dir: Path) -> int:
    if not config.nu_grid:
        raise UsageError("config must list sweep points in nu_grid")
    if not config.s_list:
        raise UsageError("config must list at least one exponent in s_list")
    family = config.family()
    alpha = config.target_alpha()
    jobs = [(family, alpha, float(nu), config.s_list, config.N,
             config.tol_kr, config.tol_a) for nu in config.nu_grid]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            batches = list(pool.map(_sweep_point, jobs))
    else:
        batches = [_sweep_point(job) for job in jobs]
    digest = config.digest()
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    failed = False
    for i, batch in enumerate(batches):
        for rec in batch:
            nu, a, s, lam, gap, resid, iters, atom, err, weights = rec
            rows.append((nu, a, s, lam, gap, resid, iters, atom, err))
            failed = failed or bool(err)
            if weights is not None:
                GridMeasure(weights).to_binary(
                    out_dir / f"sweep_p{i:02d}_{_measure_stem(s)}.amu")
            _say(f"nu = {nu!r}, s = {s:g}: a = {a!r}, "
                 f"residual = {resid!r}" + (f"  [{err}]" if err else ""))
    _write_csv(out_dir / "sweep.csv", digest,
               ("nu", "a", "s", "lam_final", "kr_gap", "residual",
                "iterations", "max_atom", "error"), rows,
               notes=(f"alpha_quotients: {list(alpha.quotients)}",))
    return EXIT_NO_CONVERGENCE if failed else EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(config: ExperimentConfig, out_dir: Path,
               select: str | None) -> int:
    from .acceptance import run_acceptance

    results = run_acceptance(config, select=select)
    rows = []
    any_failed = False
    for res in results:
        status = "SKIP" if res.passed is None else \
            ("PASS" if res.passed else "FAIL")
        any_failed = any_failed or res.passed is False
        _say(f"{status}  {res.name}: {res.detail}")
        rows.append((res.name, status, res.detail))
    _write_csv(out_dir / "verify.csv", config.digest(),
               ("criterion", "status", "detail"), rows)
    return EXIT_USAGE if any_failed else EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> _Parser:
    parser = _Parser(prog="automeasure",
                     description="invariant measures, rotation numbers, "
                                 "and tongue boundaries for analytic "
                                 "circle maps")
    sub = parser.add_subparsers(dest="command", required=True)
    names = ("rho", "cf", "partition", "measure", "kr", "tongue",
             "verify", "sweep")
    for name in names:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH",
                       help="TOML experiment file (defaults apply if "
                            "omitted)")
        p.add_argument("--out", metavar="DIR",
                       help="output directory (overrides config)")
        p.add_argument("--workers", metavar="INT", type=int,
                       help="worker processes (overrides config)")
        if name == "verify":
            p.add_argument("--select", metavar="NAMES",
                           help="comma-separated criterion names or "
                                "numbers to run")
        if name == "kr":
            p.add_argument("measure_a", help="first measure file "
                                             "(.csv or .amu)")
            p.add_argument("measure_b", help="second measure file "
                                             "(.csv or .amu)")
    return parser


def _resolve_config(args) -> tuple[ExperimentConfig, Path]:
    if args.config is not None:
        try:
            config = load_config(args.config)
        except (OSError, ValueError, TypeError) as exc:
            raise UsageError(f"bad config {args.config}: {exc}") from exc
    else:
        config = ExperimentConfig()
    overrides = {}
    if args.out is not None:
        overrides["out_dir"] = args.out
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    if overrides:
        try:
            config = config.with_overrides(**overrides)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    return config, Path(config.out_dir)


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.command == "kr":
            return cmd_kr(args.measure_a, args.measure_b)
        config, out_dir = _resolve_config(args)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "rho":
            return cmd_rho(config, out_dir)
        if args.command == "cf":
            return cmd_cf(config, out_dir)
        if args.command == "partition":
            return cmd_partition(config, out_dir)
        if args.command == "measure":
            return cmd_measure(config, out_dir)
        if args.command == "tongue":
            return cmd_tongue(config, out_dir)
        if args.command == "sweep":
            return cmd_sweep(config, out_dir)
        if args.command == "verify":
            return cmd_verify(config, out_dir, args.select)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotHomeomorphismError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
