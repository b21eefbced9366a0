"""
Command-line front end.

    stefan run --scenario FILE [--out DIR] [--strict] [--svg]
    stefan batch {fig3,fig4,fig5} [--out DIR]
    stefan verify {kernels,special-functions,transforms,oracle}
    stefan oracle --preset zinc --tc K --t-end S

Exit codes: 0 success, 2 parse or validation error, 3 runtime (CFL or
state) error, 4 verification failure.
"""
from __future__ import annotations

import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import click
import numpy as np

from .domain import PRESETS
from .errors import CFLError, ParameterDomainError, ScenarioError, StateError, StefanError, ValidationError
from .output import write_csv, write_svgs
from .scenario_file import load_scenario

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4

BATCH_SUITES = ("fig3", "fig4", "fig5")
VERIFY_TARGETS = ("kernels", "special-functions", "transforms", "oracle")

SUMMARY_COLUMNS = (
    "name", "status", "t_final", "steps", "s_final", "final_rel_error", "t_95", "t_converged",
    "min_input", "max_h1_err", "warnings",
    "q_pos_violations", "temp_valid_violations", "s_monotone_violations",
    "s_below_sr_violations", "err_nonpos_violations",
)


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (CFLError, StateError)):
        return EXIT_RUNTIME
    if isinstance(exc, (ScenarioError, ValidationError, ParameterDomainError, StefanError, ValueError)):
        return EXIT_INPUT
    raise exc


def _echo_err(msg: str) -> None:
    click.echo(msg, err=True)


def _run_one(path: Path, out: Path, strict: bool | None, svg: bool) -> tuple[object, list[Path]]:
    scenario, spec = load_scenario(path, strict=strict)
    from .simulator import run_scenario

    traj = run_scenario(scenario)
    written = [write_csv(traj.records, out / (spec.csv or f"{scenario.name}.csv"))]
    if svg or spec.svg:
        written += write_svgs(traj, out, spec.svg or scenario.name)
    return traj, written


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="stefan-control")
def cli():
    """Simulate, control and verify the one-phase Stefan problem."""


@cli.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="JSON scenario file.")
@click.option("--out", default=".", type=click.Path(file_okay=False, path_type=Path), show_default=True,
              help="Output directory.")
@click.option("--strict", is_flag=True, help="Treat validator warnings as errors.")
@click.option("--svg", is_flag=True, help="Also write SVG line plots.")
def run(scenario_path: Path, out: Path, strict: bool, svg: bool):
    """Run a single scenario and write its CSV (and optional SVG plots)."""
    try:
        traj, written = _run_one(scenario_path, out, True if strict else None, svg)
    except Exception as exc:  # noqa: BLE001 - mapped to the exit-code contract
        code = exit_code_for(exc)
        _echo_err(f"error: {exc}")
        sys.exit(code)
    for w in traj.warnings:
        _echo_err(f"warning: {w}")
    counts = traj.violation_counts()
    click.echo(f"{traj.scenario.name}: t = {traj.t[-1]:.6g} s, s = {traj.s[-1]:.6g} m, "
               f"{traj.steps} steps")
    click.echo("constraint violations: " + ", ".join(f"{k}={v}" for k, v in counts.items()))
    for p in written:
        click.echo(f"wrote {p}")
    sys.exit(EXIT_OK)


# ---------------------------------------------------------------------------
# batch

def suite_files(name: str) -> list[Path]:
    """The fixed scenario files of a built-in batch suite, in name order."""
    root = resources.files("stefan_control") / "suites" / name
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".json"))


@dataclass
class BatchResult:
    name: str
    status: str
    code: int
    row: dict = field(default_factory=dict)


def _summary_row(name: str, traj) -> dict:
    s_r = traj.scenario.law.s_r
    rel = np.abs(traj.s - s_r) / s_r
    inside = np.nonzero(rel < 0.01)[0]
    counts = traj.violation_counts()
    h1_err = traj.h1_err[np.isfinite(traj.h1_err)]
    row = dict(
        name=name, status="ok", t_final=traj.t[-1], steps=traj.steps, s_final=traj.s[-1],
        final_rel_error=traj.relative_error(), t_95=traj.time_to_fraction(0.95),
        t_converged=float(traj.t[inside[0]]) if inside.size else math.inf,
        min_input=float(np.min(traj.input)),
        max_h1_err=float(np.max(h1_err)) if h1_err.size else math.nan,
        warnings=" | ".join(str(w) for w in traj.warnings),
    )
    for flag, v in counts.items():
        row[f"{flag}_violations"] = v
    return row


def _batch_one(path: Path, out: Path) -> BatchResult:
    name = path.stem
    try:
        traj, _ = _run_one(path, out, None, svg=True)
    except Exception as exc:  # noqa: BLE001
        code = exit_code_for(exc)
        return BatchResult(name, f"error: {exc}", code, {"name": name, "status": f"error: {exc}"})
    return BatchResult(name, "ok", EXIT_OK, _summary_row(name, traj))


def batch_threads(n_jobs: int) -> int:
    env = os.environ.get("STEFAN_THREADS", "").strip()
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_jobs))


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def write_summary(results: list[BatchResult], path: Path) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for r in results:
            writer.writerow(_fmt_cell(r.row.get(col, "")) for col in SUMMARY_COLUMNS)
    return path


def run_batch(suite: str, out: Path) -> tuple[list[BatchResult], Path]:
    files = suite_files(suite)
    out.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=batch_threads(len(files))) as pool:
        results = list(pool.map(lambda p: _batch_one(p, out), files))
    return results, write_summary(results, out / "summary.csv")


@cli.command()
@click.argument("suite", type=click.Choice(BATCH_SUITES))
@click.option("--out", default=None, type=click.Path(file_okay=False, path_type=Path),
              help="Output directory (default: ./<suite>).")
def batch(suite: str, out: Path | None):
    """Run a built-in experiment suite; one CSV per run plus summary.csv."""
    out = out or Path(suite)
    results, summary = run_batch(suite, out)
    code = EXIT_OK
    for r in results:
        if r.code:
            _echo_err(f"{r.name}: {r.status}")
            code = max(code, r.code)
            continue
        row = r.row
        click.echo(f"{r.name:<24} s_final={row['s_final']:.5g}  t_95={row['t_95']:.5g}  "
                   f"violations: q_pos={row['q_pos_violations']} s_below_sr={row['s_below_sr_violations']} "
                   f"err_nonpos={row['err_nonpos_violations']}")
        if row["warnings"]:
            click.echo(f"{'':<24} warning: {row['warnings']}")
    click.echo(f"wrote {summary}")
    sys.exit(code)


# ---------------------------------------------------------------------------
# verify / oracle

@cli.command()
@click.argument("target", type=click.Choice(VERIFY_TARGETS))
def verify(target: str):
    """Run a property suite and print a pass/fail table."""
    from .verify import run_suite

    results = run_suite(target)
    for r in results:
        click.echo(r.row())
    failed = sum(not r.passed for r in results)
    click.echo(f"{len(results) - failed}/{len(results)} passed")
    sys.exit(EXIT_VERIFY if failed else EXIT_OK)


@cli.command()
@click.option("--preset", default="zinc", type=click.Choice(sorted(PRESETS)), show_default=True)
@click.option("--tc", required=True, type=float, help="Boundary temperature in K (absolute, above T_m).")
@click.option("--t-end", "t_end", required=True, type=float, help="Time in s.")
@click.option("--n", default=200, show_default=True, help="Grid intervals for the simulated comparison.")
@click.option("--s0", default=0.01, show_default=True, help="Interface position where the simulation starts.")
@click.option("--no-sim", is_flag=True, help="Print the exact solution only.")
def oracle(preset: str, tc: float, t_end: float, n: int, s0: float, no_sim: bool):
    """Exact similarity solution for a constant boundary temperature, compared with the simulator."""
    from .simulator import run_scenario, similarity_scenario, similarity_solution

    params = PRESETS[preset]
    try:
        sol = similarity_solution(params, tc)
        click.echo(f"Stefan number     {sol.stefan_number:.9g}")
        click.echo(f"lambda*           {sol.lam:.9g}")
        click.echo(f"s_exact(t_end)    {float(sol.s(t_end)):.9g} m")
        if no_sim:
            sys.exit(EXIT_OK)
        t0 = sol.time_at(s0)
        if t_end <= t0:
            raise ParameterDomainError(f"t_end must exceed the start time {t0:.6g} s at which s = s0")
        sc, _, _ = similarity_scenario(params, tc - params.tm, s0, t_end - t0, n=n)
        traj = run_scenario(sc)
    except Exception as exc:  # noqa: BLE001
        code = exit_code_for(exc)
        _echo_err(f"error: {exc}")
        sys.exit(code)
    exact = sol.s(traj.t + t0)
    late = traj.t >= 0.05 * traj.t[-1]
    err = float(np.max(np.abs(traj.s[late] - exact[late]) / exact[late]))
    click.echo(f"s_sim(t_end)      {traj.s[-1]:.9g} m  (N={n}, started at t0 = {t0:.6g} s)")
    click.echo(f"max rel. error    {err:.3e}")
    sys.exit(EXIT_OK)


def main(argv=None):
    cli.main(args=argv, prog_name="stefan")


if __name__ == "__main__":
    main()
