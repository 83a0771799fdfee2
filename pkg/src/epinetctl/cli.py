"""Command-line front end: ``epinetctl {analyze,equilibrium,simulate,reproduce,sweep}``.

Exit codes: 0 success, 1 numerical failure, 2 invalid scenario or usage,
3 I/O failure, 4 a controlled run left its cap box.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import graph as G
from .dynamics import make_control, make_field
from .equilibrium import EquilibriumReport, Regime, classify
from .errors import EpinetError, ScenarioError
from .integrate import Trajectory, integrate
from .scenario import (BAND_SIZE, REFERENCE_ABSCISSA, REPRODUCE_CROSS_WEIGHT, Resolved, Scenario,
                       builtin, resolve_graph)
from .verify import check_cap_invariance, check_lyapunov_decrease, compare_open_closed

log = logging.getLogger("epinetctl")

EXIT_OK, EXIT_NUMERIC, EXIT_SCENARIO, EXIT_IO, EXIT_INVARIANCE = 0, 1, 2, 3, 4
SWEEP_PARAMS = ("beta", "gamma", "radius", "cap")
SWEEP_COLUMNS = ["value", "spectral_abscissa", "regime", "endemic_max", "endemic_mean", "controlled_peak"]


class OutputError(EpinetError):
    pass


def write_atomic(path: Path, text: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def worker_count() -> int:
    raw = os.environ.get("EPINETCTL_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring non-integer EPINETCTL_THREADS=%r", raw)
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# library-level commands

def analyze(res: Resolved) -> dict:
    report = classify(res.params, res.net)
    out = {"spectral_abscissa": report.spectral_abscissa, "regime": report.regime.value,
           "marginal": report.marginal}
    if report.endemic_point is not None:
        out["endemic_point"] = report.endemic_point.tolist()
    return out


@dataclass
class SimulationResult:
    equilibrium: EquilibriumReport
    controlled: Optional[Trajectory]
    uncontrolled: Optional[Trajectory]
    verification: dict
    invariance_ok: bool

    def summary(self, res: Resolved) -> dict:
        out = dict(res.meta)
        out.update(n=res.net.n, spectral_abscissa=self.equilibrium.spectral_abscissa,
                   regime=self.equilibrium.regime.value, marginal=self.equilibrium.marginal,
                   endemic_point=(None if self.equilibrium.endemic_point is None
                                  else self.equilibrium.endemic_point.tolist()),
                   integrator=res.run.to_dict())
        if self.controlled is not None:
            out["terminal_controlled"] = self.controlled.terminal.tolist()
        if self.uncontrolled is not None:
            out["terminal_uncontrolled"] = self.uncontrolled.terminal.tolist()
        out["verification"] = self.verification
        return out


def simulate(res: Resolved, mode: str = "both", record_controls: bool = False) -> SimulationResult:
    if mode not in ("controlled", "uncontrolled", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    eq = classify(res.params, res.net)
    verification: dict = {}
    controlled = uncontrolled = None
    if mode == "both":
        paired = compare_open_closed(res.params, res.net, res.x0, res.run, record_controls=record_controls)
        controlled, uncontrolled = paired.closed_loop, paired.open_loop
        verification["comparison"] = {k: v for k, v in paired.to_dict().items()
                                      if k in ("max_peak_excess", "pass")}
    elif mode == "controlled":
        control = make_control(res.params, res.net) if record_controls else None
        controlled = integrate(make_field(res.params, res.net, True), res.x0, res.run, control=control)
    else:
        uncontrolled = integrate(make_field(res.params, res.net, False), res.x0, res.run)

    ok = True
    if controlled is not None:
        inv = check_cap_invariance(controlled, res.params.cap_c)
        verification["invariance"] = inv.to_dict()
        ok = inv.passed
        if eq.regime is Regime.ENDEMIC and np.any(res.x0 > 0):
            lyap = check_lyapunov_decrease(controlled, eq.endemic_point, skip=1)
            entry = lyap.to_dict()
            # the decrease is only guaranteed when every c_i >= 2
            entry["asserted"] = bool(np.all(res.params.cap_c >= 2))
            entry["terminal_distance"] = float(np.max(np.abs(controlled.terminal - eq.endemic_point)))
            verification["lyapunov"] = entry
        elif eq.regime is Regime.DFE_ONLY:
            norms = np.max(np.abs(controlled.states), axis=1)
            verification["decay"] = {"initial_norm": float(norms[0]), "final_norm": float(norms[-1])}
    return SimulationResult(eq, controlled, uncontrolled, verification, ok)


def write_simulation(result: SimulationResult, res: Resolved, out: Path) -> dict:
    out = Path(out)
    if result.controlled is not None:
        write_atomic(out / "trajectory_controlled.csv", result.controlled.to_csv())
    if result.uncontrolled is not None:
        write_atomic(out / "trajectory_uncontrolled.csv", result.uncontrolled.to_csv())
    summary = result.summary(res)
    write_atomic(out / "verification.json", _json(result.verification))
    return summary


def band_means(x: np.ndarray, band: int = BAND_SIZE) -> list:
    return [float(np.mean(x[k:k + band])) for k in range(0, x.shape[0], band)]


def reproduce(experiment: int, seed: int = 0, cross_weight: float = REPRODUCE_CROSS_WEIGHT,
              t_end: float = 500.0) -> tuple[Scenario, Resolved, SimulationResult, dict]:
    """Run a built-in experiment with both fields; returns the comparison block too."""
    scenario = builtin(experiment, seed, cross_weight=cross_weight, t_end=t_end)
    res = scenario.resolve()
    result = simulate(res, "both")
    eq = result.equilibrium
    closed, opened = result.controlled, result.uncontrolled
    comparison = {
        "experiment": experiment,
        "regime": eq.regime.value,
        "spectral_abscissa": eq.spectral_abscissa,
        "reference_spectral_abscissa": REFERENCE_ABSCISSA[experiment],
        "cross_weight": cross_weight,
        "band_terminal_means": {"controlled": band_means(closed.terminal),
                                "uncontrolled": band_means(opened.terminal)},
        "controlled_terminal_mean": float(np.mean(closed.terminal)),
        "uncontrolled_terminal_mean": float(np.mean(opened.terminal)),
        "cap_compliance": result.verification["invariance"]["pass"],
        "peak_suppression": result.verification["comparison"]["pass"],
        "uncontrolled_exceeds_a_cap": bool(np.any(opened.terminal > res.params.caps)),
    }
    if eq.endemic_point is not None:
        comparison["terminal_distance_to_endemic"] = float(
            np.max(np.abs(closed.terminal - eq.endemic_point)))
    else:
        comparison["terminal_norm"] = float(np.max(np.abs(closed.terminal)))
    return scenario, res, result, comparison


def _sweep_variant(scenario: Scenario, base_net: G.Network, param: str, value: float) -> Scenario:
    data = scenario.to_dict()
    if param in ("beta", "gamma"):
        data["params"][param] = value
    elif param == "cap":
        data["params"].pop("cap_c", None)
        data["caps"] = value
    elif param == "radius":
        if base_net.positions is None:
            raise ScenarioError("graph", "radius sweep needs a position-based graph")
        g = data["graph"]
        data["graph"] = {"generator": "positions", "positions": base_net.positions.tolist(),
                         "radius": value, "self_weight": g.get("self_weight", 0.3),
                         "cross_weight": g.get("cross_weight", 0.003)}
    else:
        raise ScenarioError("--param", f"expected one of {SWEEP_PARAMS}")
    return Scenario.from_dict(data)


def _sweep_row(variant: Scenario, value: float) -> dict:
    res = variant.resolve()
    row = {"value": value}
    try:
        eq = classify(res.params, res.net)
    except EpinetError as exc:
        row.update(spectral_abscissa="", regime=f"error: {exc}", endemic_max="", endemic_mean="",
                   controlled_peak="")
        return row
    traj = integrate(make_field(res.params, res.net, True), res.x0, res.run)
    x = eq.endemic_point
    row.update(spectral_abscissa=eq.spectral_abscissa, regime=eq.regime.value,
               endemic_max=float(np.max(x)) if x is not None else 0.0,
               endemic_mean=float(np.mean(x)) if x is not None else 0.0,
               controlled_peak=float(np.max(traj.states)))
    return row


def sweep(scenario: Scenario, param: str, values: list[float], workers: int | None = None) -> list[dict]:
    if param not in SWEEP_PARAMS:
        raise ScenarioError("--param", f"expected one of {SWEEP_PARAMS}")
    if not values:
        return []
    base_net = resolve_graph(scenario.graph, scenario.seed) if param == "radius" else None
    variants = [_sweep_variant(scenario, base_net, param, v) for v in values]
    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        return list(pool.map(_sweep_row, variants, values))


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument parsing

def _float_list(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="override the scenario seed")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="stdout format (default: json, csv for sweep)")
    scen = argparse.ArgumentParser(add_help=False)
    scen.add_argument("--scenario", type=Path, required=True, help="scenario JSON file")

    parser = argparse.ArgumentParser(prog="epinetctl",
                                     description="Networked SIS epidemics with infection-cap feedback.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common, scen], help="spectral abscissa and regime")
    sub.add_parser("equilibrium", parents=[common, scen], help="full equilibrium report")

    p = sub.add_parser("simulate", parents=[common, scen], help="integrate and verify")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--controlled", dest="mode", action="store_const", const="controlled")
    mode.add_argument("--uncontrolled", dest="mode", action="store_const", const="uncontrolled")
    mode.add_argument("--both", dest="mode", action="store_const", const="both")
    p.add_argument("--record-controls", action="store_true", help="append u_i columns to the controlled CSV")
    p.set_defaults(mode="both")

    p = sub.add_parser("reproduce", parents=[common], help="run built-in experiment 1-5")
    p.add_argument("experiment", type=int, choices=range(1, 6))
    p.add_argument("--cross-weight", type=float, default=REPRODUCE_CROSS_WEIGHT,
                   help=f"off-diagonal edge weight (default {REPRODUCE_CROSS_WEIGHT})")
    p.add_argument("--t-end", type=float, default=500.0)

    p = sub.add_parser("sweep", parents=[common, scen], help="tabulate regime over a parameter")
    p.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    p.add_argument("--values", type=_float_list, required=True, help="comma-separated values")
    return parser


def _load(args) -> Resolved:
    scenario = Scenario.load(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    return scenario.resolve()


def _emit(obj: dict, fmt: Optional[str]) -> None:
    if fmt == "csv":
        flat = {k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in obj.items()}
        writer = csv.DictWriter(sys.stdout, fieldnames=list(flat), lineterminator="\n")
        writer.writeheader()
        writer.writerow(flat)
    else:
        sys.stdout.write(_json(obj))


def _run(args) -> int:
    cmd = args.command
    if cmd in ("analyze", "equilibrium"):
        res = _load(args)
        if cmd == "analyze":
            out = analyze(res)
        else:
            out = classify(res.params, res.net).to_dict()
        if args.out:
            write_atomic(args.out / f"{cmd}.json", _json(out))
        _emit(out, args.format)
        return EXIT_OK

    if cmd == "simulate":
        if args.out is None:
            raise ScenarioError("--out", "simulate needs an output directory")
        res = _load(args)
        result = simulate(res, args.mode, args.record_controls)
        summary = write_simulation(result, res, args.out)
        write_atomic(args.out / "summary.json", _json(summary))
        _emit({k: summary[k] for k in ("regime", "spectral_abscissa", "marginal")}, args.format)
        if not result.invariance_ok:
            log.error("controlled trajectory left the cap box: %s", result.verification["invariance"])
            return EXIT_INVARIANCE
        return EXIT_OK

    if cmd == "reproduce":
        if args.out is None:
            raise ScenarioError("--out", "reproduce needs an output directory")
        seed = 0 if args.seed is None else args.seed
        scenario, res, result, comparison = reproduce(args.experiment, seed, args.cross_weight, args.t_end)
        write_atomic(args.out / "scenario.json", scenario.to_json() + "\n")
        summary = write_simulation(result, res, args.out)
        summary["comparison"] = comparison
        write_atomic(args.out / "summary.json", _json(summary))
        _emit(comparison, args.format)
        if not result.invariance_ok:
            return EXIT_INVARIANCE
        return EXIT_OK

    if cmd == "sweep":
        scenario = Scenario.load(args.scenario)
        if args.seed is not None:
            scenario = scenario.with_seed(args.seed)
        rows = sweep(scenario, args.param, args.values)
        if args.format == "json":
            sys.stdout.write(_json(rows))
        else:
            sys.stdout.write(sweep_csv(rows))
        if args.out:
            write_atomic(args.out / "sweep.csv", sweep_csv(rows))
        return EXIT_OK
    raise AssertionError(cmd)


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except ScenarioError as exc:
        print(f"epinetctl: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except OutputError as exc:
        print(f"epinetctl: {exc}", file=sys.stderr)
        return EXIT_IO
    except EpinetError as exc:
        print(f"epinetctl: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
