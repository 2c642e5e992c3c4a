"""Batch front-end: ``plattice solve|sobolev|fiber|distinct|verify|sweep --config <path>``.

Exit codes: 0 success, 1 config error, 2 non-convergence, 3 verification failures.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import io
from .config import ConfigError, RunConfig
from .energy import energy
from .multiplicity import find_distinct, worker_count
from .quotient import minimize_quotient, sobolev_quotient
from .solver import (
    HypothesisError,
    SolveResult,
    SolverError,
    fiber as fiber_value,
    fiber_slope,
    ground_state,
    initial_guess,
    project_nehari,
    sobolev_constant,
)
from .space import e_norm, lq_norm
from .verify import DEFAULT_SAMPLES, DEFAULT_TOLERANCES, run_suite

log = logging.getLogger("plattice")

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_VERIFY = 0, 1, 2, 3
COMMANDS = ("solve", "sobolev", "fiber", "distinct", "verify", "sweep")


def _echo(rc: RunConfig) -> dict:
    # config as used, with CLI overrides applied
    return {**rc.raw, "seed": rc.seed, "override_hypotheses": rc.solver.override_hypotheses}


def write_result(out: Path, rc: RunConfig, res: SolveResult, command: str) -> None:
    d = rc.problem.domain
    io.write_json(
        out / "result.json",
        {
            "command": command,
            "config": _echo(rc),
            "result": res.to_dict(),
            "trace": [list(row) for row in res.trace],
        },
    )
    io.write_grid_function(out / "u.csv", d, res.u)
    io.write_csv(out / "trace.csv", ["iteration", "energy", "residual"], [r[:3] for r in res.trace])
    io.atomic_write_text(out / "trace.gp", io.GNUPLOT_TRACE)


def _report(res: SolveResult) -> str:
    return (
        f"energy={res.energy!r} residual={res.residual_norm:.3e} "
        f"iterations={res.iterations} ({res.message})"
    )


def cmd_solve(rc: RunConfig, out: Path) -> int:
    res = ground_state(rc.solver)
    write_result(out, rc, res, "solve")
    print(_report(res))
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_sobolev(rc: RunConfig, out: Path) -> int:
    pr = rc.problem
    d = pr.domain
    opts = rc.section("sobolev")
    q = float(opts.get("q", pr.nonlinearity.q))
    if not q > pr.p:
        raise ConfigError(f"sobolev: need q > p, got q={q:g}, p={pr.p:g}")
    nehari = sobolev_constant(pr.p, q, d, rc.solver)
    direct = minimize_quotient(d, pr.p, q, starts=int(opts.get("starts", 5)), seed=rc.seed)
    delta = np.zeros(d.vertex_count)
    delta[d.index([d.side // 2] * d.dim)] = 1.0
    bound = sobolev_quotient(d, delta, pr.p, q)
    gap = abs(nehari.S - direct.S) / max(nehari.S, direct.S)
    write_result(out, rc, nehari.result, "sobolev")
    io.write_grid_function(out / "extremal.csv", d, nehari.extremal)
    io.write_json(
        out / "sobolev.json",
        {
            "p": pr.p,
            "q": q,
            "S_nehari": nehari.S,
            "S_direct": direct.S,
            "S_direct_starts": direct.values,
            "relative_gap": gap,
            "delta_bound": bound,
            "below_delta_bound": bool(max(nehari.S, direct.S) <= bound),
            "theory_valid": nehari.theory_valid,
            "notice": nehari.notice,
            "converged": nehari.result.converged,
        },
    )
    if nehari.notice:
        log.warning("sobolev: %s", nehari.notice)
    print(f"S_nehari={nehari.S!r} S_direct={direct.S!r} relative_gap={gap:.3e}")
    return EXIT_OK if nehari.result.converged else EXIT_NONCONVERGED


def cmd_fiber(rc: RunConfig, out: Path) -> int:
    pr = rc.problem
    d = pr.domain
    opts = rc.section("fiber")
    if "u" in opts:
        src = Path(opts["u"])
        if rc.source is not None and not src.is_absolute():
            src = rc.source.parent / src
        try:
            u = io.read_grid_function(src, d)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"fiber.u: {exc}") from exc
    else:
        u = initial_guess(rc.solver)
    if not np.any(u):
        raise ConfigError("fiber: u is identically zero")
    t_u, _ = project_nehari(pr, u, rc.solver.fiber_tol)
    grid = opts.get("t")
    if grid is None:
        grid = list(t_u * np.linspace(0.05, 2.0, 40))
    ts = sorted(set(float(t) for t in grid))
    if not any(math.isclose(t, t_u, rel_tol=1e-12) for t in ts):
        ts = sorted(ts + [t_u])
    rows, slopes = [], []
    for t in ts:
        s = fiber_slope(pr, u, t)
        slopes.append(s)
        rows.append([t, fiber_value(pr, u, t), s, "t_u" if math.isclose(t, t_u, rel_tol=1e-12) else ""])
    io.write_csv(out / "fiber.csv", ["t", "psi", "slope", "mark"], rows)
    io.atomic_write_text(out / "fiber.gp", io.GNUPLOT_FIBER)
    signs = [np.sign(s) for s in slopes if s != 0]
    changes = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    io.write_json(
        out / "fiber.json",
        {"t_u": t_u, "psi_t_u": fiber_value(pr, u, t_u), "energy_u": energy(pr, u), "slope_sign_changes": changes},
    )
    print(f"t_u={t_u!r} psi(t_u)={fiber_value(pr, u, t_u)!r}")
    return EXIT_OK


def cmd_distinct(rc: RunConfig, out: Path) -> int:
    opts = rc.section("distinct")
    delta = opts.get("delta")
    if delta == "inf":
        delta = math.inf
    try:
        orbits = find_distinct(
            rc.solver,
            n_starts=int(opts.get("starts", 5)),
            delta=delta,
            period=int(opts.get("period", 1)),
            sign_companions=bool(opts.get("sign_companions", False)),
            start_mode=opts.get("start_mode", "translated"),
            seed=rc.seed,
        )
    except ValueError as exc:
        raise ConfigError(f"distinct: {exc}") from exc
    odir = out / "orbits"
    payload = orbits.to_dict()
    payload["config"] = _echo(rc)
    payload["representatives"] = []
    for i, rep in enumerate(orbits.representatives):
        name = f"u_{i}.csv"
        io.write_grid_function(odir / name, rc.problem.domain, rep.u)
        payload["representatives"].append({"file": name, "label": orbits.labels[i], **rep.to_dict()})
    io.write_json(odir / "orbits.json", payload)
    print(f"orbits={len(orbits.representatives)} from {orbits.attempted} starts")
    return EXIT_OK if orbits.representatives else EXIT_NONCONVERGED


def cmd_verify(rc: RunConfig, out: Path) -> int:
    opts = rc.section("verify")
    tols, samples = opts.get("tolerances", {}), opts.get("samples", {})
    unknown = (set(tols) - set(DEFAULT_TOLERANCES)) | (set(samples) - set(DEFAULT_SAMPLES))
    if unknown:
        raise ConfigError(f"verify: unknown check names {sorted(unknown)}")
    report = run_suite(rc.problem, seed=rc.seed, tolerances=tols, samples=samples, solver=rc.solver)
    io.write_json(out / "verify.json", {"config": _echo(rc), **report.to_dict()})
    table = report.table()
    io.atomic_write_text(out / "verify.txt", table + "\n")
    print(table)
    return EXIT_OK if report.ok else EXIT_VERIFY


def _sweep_row(raw: dict, source, axis: str, value: float, seed: int, override: bool) -> list:
    try:
        rc = cfgmod.build(cfgmod.with_value(raw, axis, value), source, seed, override)
        res = ground_state(rc.solver)
    except (ConfigError, HypothesisError, SolverError) as exc:
        return [value, math.nan, math.nan, 0, False, f"{type(exc).__name__}: {exc}"]
    pr = rc.problem
    S = e_norm(pr.domain, res.u, pr.V, pr.p) / lq_norm(res.u, pr.nonlinearity.q)
    return [value, res.energy, S, res.iterations, res.converged, "" if res.converged else res.message]


def cmd_sweep(rc: RunConfig, out: Path, axis: str | None = None, values: list[float] | None = None) -> int:
    opts = rc.section("sweep")
    axis = axis or opts.get("axis")
    values = values if values is not None else opts.get("values", [])
    if not axis:
        raise ConfigError("sweep: no axis given")
    if not values:
        raise ConfigError(f"sweep: axis {axis!r} has no values")
    # probe the path once so a bad axis is a config error, not a row error
    cfgmod.with_value(rc.raw, axis, values[0])
    override = rc.solver.override_hypotheses
    jobs = [(rc.raw, rc.source, axis, v, rc.seed + i, override) for i, v in enumerate(values)]
    with ThreadPoolExecutor(worker_count()) as pool:
        rows = list(pool.map(lambda j: _sweep_row(*j), jobs))
    io.write_csv(out / "sweep.csv", ["parameter", "b", "S", "iterations", "converged", "error"], rows)
    io.atomic_write_text(out / "sweep.gp", io.GNUPLOT_SWEEP)
    for r in rows:
        print(f"{axis}={r[0]!r} b={r[1]!r} S={r[2]!r} iterations={r[3]} {r[5]}".rstrip())
    return EXIT_OK if all(r[4] for r in rows) else EXIT_NONCONVERGED


class _Parser(argparse.ArgumentParser):
    # usage errors are config errors; argparse's default status 2 means non-convergence here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="plattice", description="Ground states of the discrete p-Laplacian on lattices.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=f"run {name}")
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", help="output directory (default: <config stem>-<command> next to the config)")
        sp.add_argument("--seed", type=int, help="base seed (overrides the config)")
        sp.add_argument("--override-hypotheses", action="store_true", help="run even if hypothesis checks fail")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "sweep":
            sp.add_argument("--axis", help="dotted config path, or side / q / p")
            sp.add_argument("--values", help="comma-separated axis values")
    return ap


def _parse_values(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values: {exc}") from exc


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    cfg_path = Path(args.config)
    out = Path(args.out) if args.out else cfg_path.with_name(f"{cfg_path.stem}-{args.command}")
    try:
        rc = cfgmod.load(cfg_path, seed=args.seed, override=True if args.override_hypotheses else None)
        if args.command == "solve":
            return cmd_solve(rc, out)
        if args.command == "sobolev":
            return cmd_sobolev(rc, out)
        if args.command == "fiber":
            return cmd_fiber(rc, out)
        if args.command == "distinct":
            return cmd_distinct(rc, out)
        if args.command == "verify":
            return cmd_verify(rc, out)
        return cmd_sweep(rc, out, args.axis, _parse_values(args.values))
    except (ConfigError, HypothesisError) as exc:
        print(f"plattice {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"plattice {args.command}: solver failed: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
