"""Command-line interface: ``lvhopf <command> [--config FILE] [overrides]``.

Exit codes: 0 success, 1 configuration error, 2 infeasible model (or not
stable at E=0 where that is required), 3 no crossing found, 4 simulation
blow-up.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import csvio
from . import spectral as sp
from .config import RunConfig, load_config, serialize_config, with_overrides
from .errors import BlowUp, ConfigError, InfeasibleParams, LVHopfError, NoCrossingFound
from .kernels import FAMILIES, DelayKernel
from .model import check_feasibility, compute_equilibrium, linear_coeffs
from .simulate import limit_cycle_metrics, simulate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_NO_CROSSING = 3
EXIT_BLOWUP = 4


class Unstable(LVHopfError):
    """Equilibrium already unstable without delay."""


def _machine(rows) -> None:
    print("[machine]")
    for name, value in rows:
        print(f"{name},{csvio.fmt(value)}")


def _feasible_model(cfg: RunConfig):
    report = check_feasibility(cfg.model)
    if not report.feasible:
        raise InfeasibleParams(report.reason)
    eq = compute_equilibrium(cfg.model)
    return report, eq, linear_coeffs(cfg.model, eq)


def _header(cfg: RunConfig, extra=()) -> list[str]:
    lines = serialize_config(cfg).splitlines()
    lines.append(f"history: {cfg.sim.history_label()}")
    return [*lines, *extra]


# ---------------------------------------------------------------------------
# commands


def cmd_equilibrium(cfg: RunConfig) -> int:
    """Interior equilibrium."""
    _, eq, _ = _feasible_model(cfg)
    print(f"equilibrium for a={cfg.model.a:g}, H={cfg.model.H:g}")
    print(f"  x1* = {eq.x1:.12g}\n  x2* = {eq.x2:.12g}\n  x3* = {eq.x3:.12g}")
    _machine([("x1", eq.x1), ("x2", eq.x2), ("x3", eq.x3)])
    return EXIT_OK


def cmd_coeffs(cfg: RunConfig) -> int:
    """Linearisation coefficients a1..a5."""
    _, _, c = _feasible_model(cfg)
    rows = [(f"a{i}", getattr(c, f"a{i}")) for i in range(1, 6)]
    print("linearisation coefficients")
    for name, v in rows:
        print(f"  {name} = {v:.12g}")
    _machine(rows)
    return EXIT_OK


def cmd_stability(cfg: RunConfig) -> int:
    """Feasibility and Routh-Hurwitz margins at E=0."""
    report = check_feasibility(cfg.model)
    rows = [
        ("feasible", report.feasible),
        ("a_ok", report.a_ok),
        ("positivity_ok", report.positivity_ok),
        ("h_threshold", report.h_threshold),
        ("routh_hurwitz_ok", report.routh_hurwitz_ok),
        *((f"margin[{k}]", v) for k, v in report.margins.items()),
    ]
    print(f"feasible: {report.feasible}" + (f" ({report.reason})" if report.reason else ""))
    print(f"harvest threshold ({report.h_threshold_label}): {report.h_threshold:.12g}")
    if report.feasible:
        print(f"stable at E=0: {report.routh_hurwitz_ok}  [{report.rh_convention}]")
    for k, v in report.margins.items():
        print(f"  margin {k}: {v:.6g}")
    _machine(rows)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def analysis_rows(cfg: RunConfig) -> list[tuple[str, object]]:
    report, _, c = _feasible_model(cfg)
    if not report.routh_hurwitz_ok:
        raise Unstable("equilibrium is not stable at E=0; no stability switch to locate")
    ks = cfg.kernel
    hp = sp.critical_expectation(c, ks.family, ks.shape)
    w0 = sp.omega0(c)
    w1 = sp.omega1(c, DelayKernel(ks.family, hp.E_crit, ks.shape))
    bound = sp.E1_lower_bound(c, w1)
    return [
        ("omega0", w0),
        ("omega1", w1),
        ("omega1_minus_omega0", w1 - w0),
        ("E1_lower_bound", bound),
        ("E_crit", hp.E_crit),
        ("omega_crit", hp.omega_crit),
        ("transversal_slope", hp.transversal_slope),
        ("transversal_ok", hp.transversal_ok),
        ("E_crit_ge_E1_lower_bound", hp.E_crit >= bound),
        ("crossing_residual", hp.residual),
    ]


def cmd_analyze(cfg: RunConfig) -> int:
    """Frequency bracket, lower bound and critical expectation; writes analysis.csv."""
    rows = analysis_rows(cfg)
    print(f"crossing analysis, {cfg.kernel.to_kernel().describe().split('(')[0]} kernel")
    for name, v in rows:
        print(f"  {name} = {csvio.fmt(v)}")
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    csvio.write_analysis(out / "analysis.csv", rows, _header(cfg))
    _machine(rows)
    return EXIT_OK


def scan_rows(cfg: RunConfig):
    _, _, c = _feasible_model(cfg)
    grid = np.linspace(cfg.scan.E_min, cfg.scan.E_max, cfg.scan.n_points)
    window = sp.search_window(c)
    base = cfg.kernel.to_kernel()
    rows = []
    for E in grid:
        try:
            lam = sp.rightmost_root(c, base.with_expectation(float(E)), window).lam
            rows.append((float(E), lam.real, lam.imag, lam.real < 0, ""))
        except LVHopfError as exc:
            rows.append((float(E), None, None, None, type(exc).__name__))
    return rows


def cmd_scan(cfg: RunConfig) -> int:
    """Rightmost root over an E grid; writes scan.csv."""
    rows = scan_rows(cfg)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    csvio.write_scan(out / "scan.csv", rows, _header(cfg))
    flips = sum(1 for r0, r1 in zip(rows, rows[1:]) if None not in (r0[3], r1[3]) and r0[3] != r1[3])
    print(f"scanned {len(rows)} expectations in [{cfg.scan.E_min:g}, {cfg.scan.E_max:g}]; stability changes: {flips}")
    _machine([("n_points", len(rows)), ("stability_changes", flips), ("failed_points", sum(r[4] != "" for r in rows))])
    return EXIT_OK


def run_simulation(cfg: RunConfig, out: Path, append_metrics: bool = True):
    """Simulate, write trajectory.csv and a metrics.csv row; returns the metrics."""
    _feasible_model(cfg)
    eq = compute_equilibrium(cfg.model)
    kernel = cfg.kernel.to_kernel()
    out.mkdir(parents=True, exist_ok=True)
    try:
        traj = simulate(cfg.model, kernel, cfg.sim)
    except BlowUp as exc:
        if exc.partial is not None:
            csvio.write_trajectory(
                out / "trajectory.csv", exc.partial, _header(cfg, [f"aborted: {exc}"]), cfg.sim.output_stride
            )
        raise
    csvio.write_trajectory(out / "trajectory.csv", traj, _header(cfg), cfg.sim.output_stride)
    metrics = limit_cycle_metrics(traj, eq, cfg.sim)
    csvio.write_metrics(out / "metrics.csv", kernel.expectation, metrics, append=append_metrics)
    return metrics


def cmd_simulate(cfg: RunConfig) -> int:
    """Integrate the delayed system; writes trajectory.csv, appends metrics.csv."""
    m = run_simulation(cfg, Path(cfg.output))
    amp = ", ".join(f"{v:.6g}" for v in m.amplitude)
    print(f"{cfg.kernel.to_kernel().describe()}: amplitude ({amp}), period {m.period}, decaying {m.decaying}")
    _machine(
        [
            ("amp_x1", float(m.amplitude[0])),
            ("amp_x2", float(m.amplitude[1])),
            ("amp_x3", float(m.amplitude[2])),
            ("period", m.period),
            ("decaying", m.decaying),
        ]
    )
    return EXIT_OK


def emit_outputs(cfg: RunConfig, out: Path) -> None:
    """All four CSVs for ``cfg`` into ``out``; metrics.csv is rewritten, not appended."""
    out.mkdir(parents=True, exist_ok=True)
    csvio.write_analysis(out / "analysis.csv", analysis_rows(cfg), _header(cfg))
    csvio.write_scan(out / "scan.csv", scan_rows(cfg), _header(cfg))
    run_simulation(cfg, out, append_metrics=False)


def cmd_validate(cfg: RunConfig) -> int:
    """Run the acceptance criteria; exit 0 iff all pass (CSVs are written only then)."""
    from .validation import run_all

    results = run_all(cfg, echo=print)
    ok = all(r.passed for r in results)
    if ok:
        emit_outputs(cfg, Path(cfg.output))
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return EXIT_OK if ok else 1


COMMANDS = {
    "equilibrium": cmd_equilibrium,
    "coeffs": cmd_coeffs,
    "stability": cmd_stability,
    "analyze": cmd_analyze,
    "scan": cmd_scan,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lvhopf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or name).splitlines()[0])
        p.add_argument("--config", type=Path, help="flat key = value config file")
        p.add_argument("--a", type=float)
        p.add_argument("--H", type=float)
        p.add_argument("--kernel", choices=FAMILIES)
        p.add_argument("--E", type=float, help="delay expectation")
        p.add_argument("--shape", type=int, help="Erlang shape k")
        p.add_argument("--output", help="output directory")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return with_overrides(cfg, args.a, args.H, args.kernel, args.E, args.shape, args.output)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleParams, Unstable) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NoCrossingFound as exc:
        print(f"no crossing found up to E_max={exc.E_max:.6g}: {exc}", file=sys.stderr)
        return EXIT_NO_CROSSING
    except BlowUp as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
