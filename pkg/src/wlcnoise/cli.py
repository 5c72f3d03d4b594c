"""Command line front end: scenario files in, CSV tables out.

Exit codes are a stable contract: 0 success / stable, 1 usage or
scenario errors, 2 optical instability, 3 atomic instability or
non-stationary medium, 4 marginal stability.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import medium as med_mod
from .errors import MarginalStabilityError
from .scenario import Scenario, ScenarioError, load_scenario
from .stability import Classification, classify_system, default_omega_max, nyquist_contour
from .survey import CellStatus, RootChoice, SweepGrid, run_sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSTABLE = 2
EXIT_NOT_STATIONARY = 3
EXIT_MARGINAL = 4

_CLASSIFICATION_EXIT = {
    Classification.STABLE: EXIT_OK,
    Classification.OPTICAL_INSTABILITY: EXIT_UNSTABLE,
    Classification.ATOMIC_INSTABILITY: EXIT_NOT_STATIONARY,
    Classification.NON_STATIONARY: EXIT_NOT_STATIONARY,
}


def _fmt(value: float) -> str:
    """Shortest decimal that round-trips to the same float."""
    return repr(float(value))


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ScenarioError(f"usage: {message}")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wlcnoise",
                     description="shot noise and stability of a recycled "
                                 "interferometer with an anomalous-dispersion "
                                 "gain medium")
    parser.add_argument("command", choices=["response", "nyquist", "sweep"],
                        help="what to compute")
    parser.add_argument("--scenario", required=True, help="scenario JSON file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes for sweeps (0 = all cores)")
    parser.add_argument("--margin", type=float, default=1.0,
                        help="non-stationarity threshold factor (>= 1)")
    parser.add_argument("--omega-max-mult", type=float, default=50.0,
                        help="frequency range multiplier for Nyquist contours")
    return parser


def _cmd_response(scenario: Scenario, out_dir: Path) -> int:
    if scenario.medium_rates is None and scenario.medium_eta_xi is None:
        raise ScenarioError("response command needs a 'medium' block")
    if scenario.response_omegas is None:
        raise ScenarioError("response command needs a 'response' block")
    med = scenario.resolve_medium()
    header = ["omega", "re_chi", "im_chi", "abs_m", "arg_m",
              "abs_n_plus", "abs_n_minus", "validity_margin"]
    rows = []
    for omega in scenario.response_omegas:
        chi = med_mod.susceptibility(med, omega)
        m = med_mod.probe_transfer(med, omega)
        n_up, n_lo = med_mod.noise_coefficients(med, omega, scenario.noise_model)
        rows.append([_fmt(omega), _fmt(chi.real), _fmt(chi.imag),
                     _fmt(abs(m)), _fmt(math.atan2(m.imag, m.real)),
                     _fmt(abs(n_up)), _fmt(abs(n_lo)),
                     _fmt(med_mod.validity_margin(med, omega))])
    _write_csv(out_dir / "response.csv", header, rows)
    print(f"wrote {out_dir / 'response.csv'} ({len(rows)} rows)")
    return EXIT_OK


def _cmd_nyquist(scenario: Scenario, out_dir: Path, margin: float,
                 omega_max_mult: float) -> int:
    if scenario.medium_rates is None and scenario.medium_eta_xi is None:
        raise ScenarioError("nyquist command needs a 'medium' block")
    med = scenario.resolve_medium()
    ifo = scenario.detector
    omega_max = default_omega_max(med, ifo.tau, omega_max_mult)
    try:
        report = classify_system(ifo, med, margin=margin, omega_max=omega_max)
    except MarginalStabilityError as exc:
        print(f"marginal: {exc}")
        return EXIT_MARGINAL
    if report.classification not in (Classification.ATOMIC_INSTABILITY,
                                     Classification.NON_STATIONARY):
        contour = nyquist_contour(ifo, med, omega_max=omega_max)
        rows = [[_fmt(z.real), _fmt(z.imag)] for z in contour]
        _write_csv(out_dir / "nyquist.csv", ["re", "im"], rows)
        print(f"wrote {out_dir / 'nyquist.csv'} ({len(rows)} points)")
    print(f"classification: {report.classification.value}")
    print(f"winding: {report.winding}")
    print(f"min_distance_to_critical: {report.min_distance_to_critical:.6g}")
    print(f"omega_range: [{report.omega_range_used[0]:.6g}, "
          f"{report.omega_range_used[1]:.6g}]")
    if report.marginal:
        print("marginal: contour within 1e-6 of the critical point")
        return EXIT_MARGINAL
    return _CLASSIFICATION_EXIT[report.classification]


def _sweep_tables(grid: SweepGrid, out_dir: Path) -> dict:
    spec = grid.spec
    if spec.root_choice is RootChoice.BOTH:
        labels = ("smaller", "larger")
    else:
        labels = (spec.root_choice.value,)
    summary: dict = {
        "eta_count": len(spec.eta_grid),
        "xi_count": len(spec.xi_grid),
        "include_additional_noise": spec.include_additional_noise,
        "noise_model": spec.noise_model.value,
        "tables": [],
    }
    for rs2 in spec.srm_power_reflectivities:
        for label in labels:
            name = f"sweep_rs2_{rs2:g}_root_{label}.csv"
            rows = []
            stable = 0
            marginal = 0
            max_rho = None
            for cell, outcome in grid.outcomes(rs2, label):
                delta0 = "" if math.isnan(outcome.delta0) else _fmt(outcome.delta0)
                rho = ""
                if outcome.status is CellStatus.STABLE:
                    stable += 1
                    if outcome.rho_r is not None:
                        rho = _fmt(outcome.rho_r)
                        if max_rho is None or outcome.rho_r > max_rho:
                            max_rho = outcome.rho_r
                marginal += outcome.marginal
                rows.append([_fmt(cell.eta), _fmt(cell.xi),
                             outcome.status.value, delta0, rho])
            _write_csv(out_dir / name,
                       ["eta", "xi", "classification", "delta0", "rho_r"], rows)
            summary["tables"].append({
                "file": name,
                "srm_power_reflectivity": rs2,
                "root": label,
                "stable_cells": stable,
                "marginal_cells": marginal,
                "max_rho_r": max_rho,
            })
    return summary


def _cmd_sweep(scenario: Scenario, out_dir: Path, threads: int,
               margin: float, omega_max_mult: float) -> int:
    if scenario.sweep is None:
        raise ScenarioError("sweep command needs a 'sweep' block")
    spec = replace(scenario.sweep, margin=margin,
                   omega_max_multiplier=omega_max_mult)
    workers = threads if threads > 0 else (os.cpu_count() or 1)
    grid = run_sweep(spec, scenario.detector, workers=workers)
    summary = _sweep_tables(grid, out_dir)
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {summary_path}")
    for table in summary["tables"]:
        print(f"  {table['file']}: stable={table['stable_cells']}"
              f" max_rho_r={table['max_rho_r']}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.margin < 1.0:
            raise ScenarioError("--margin must be >= 1")
        if args.omega_max_mult < 20.0:
            raise ScenarioError("--omega-max-mult must be >= 20")
        scenario = load_scenario(args.scenario)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "response":
            return _cmd_response(scenario, out_dir)
        if args.command == "nyquist":
            return _cmd_nyquist(scenario, out_dir, args.margin,
                                args.omega_max_mult)
        return _cmd_sweep(scenario, out_dir, args.threads, args.margin,
                          args.omega_max_mult)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
