"""Command-line front end.

    dimerdark --config run.yaml --out results/ [--seed N] [--threads N]
              [--lambda-override EV] [--plot]

The command is taken from the config's ``command`` key. Each command writes a
CSV whose first lines are ``#`` comments holding the tool version, the master
seed and the fully resolved config. Errors go to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .dynamics import build_rate_matrix
from .eigen import diagonalize
from .errors import ConfigError, DegenerateSpectrumError, DimerError, NumericalError, PreconditionError
from .experiments import (
    DarkScanTemplate,
    EnsembleSpec,
    run_dark_scan,
    run_population_study,
    run_robustness_ensemble,
)
from .model import HBAR_EV_S, compute_lambda
from .polaron import build_polaron_frame, corrected_rate, full_polaron_rate, uncorrected_rate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_DEGENERATE = 4

COLUMNS = {
    "spectrum": ("state", "energy_eV", "dipole_sq_to_0_debye2", "dipole_sq_to_1_debye2", "dipole_sq_to_2_debye2"),
    "rates": ("from_state", "to_state", "omega_eV", "dipole_sq_debye2", "rate_eV", "rate_per_s"),
    "evolve": ("time_s", "pop0", "pop1", "pop2"),
    "scan-dark": (
        "q02_eV", "q01_eV", "delta_debye", "d01_sq_debye2", "d02_sq_debye2",
        "rel_01", "rel_02", "dark_1", "dark_2",
    ),
    "ensemble": (
        "ratio", "delta_debye", "mean_rate_10_eV", "stderr_10", "mean_rate_20_eV", "stderr_20",
        "mean_rate_21_eV", "stderr_21", "redraws", "bright_rate_20_eV", "rel_10", "rel_20", "rel_21",
    ),
    "polaron": (
        "from_state", "to_state", "omega_eV", "shifted_omega_eV", "lambda_eV", "uncorrected_rate_eV",
        "corrected_rate_eV", "delta_rate_eV", "full_rate_eV",
    ),
}

log = logging.getLogger("dimerdark")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def header_lines(rc: RunConfig) -> list[str]:
    lines = [f"# dimerdark {__version__}", f"# master_seed: {rc.master_seed}", "# config:"]
    lines += ["#   " + ln for ln in rc.to_yaml().splitlines()]
    return lines


def write_csv(path: Path, rc: RunConfig, columns, rows) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ln in header_lines(rc):
            fh.write(ln + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
            n += 1
    return n


def read_csv_body(path) -> tuple[list[str], np.ndarray]:
    """Column names and data rows of a CSV written by this tool."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    cols = lines[0].strip().split(",")
    return cols, np.loadtxt(lines[1:], delimiter=",", ndmin=2)


def _axis(a: dict) -> np.ndarray:
    return np.linspace(a["min"], a["max"], a["steps"])


def _rows_spectrum(rc):
    es = diagonalize(rc.dimer(), rc.block["case"])
    dsq = es.dipole_sq()
    return [(a, es.energies[a], *dsq[a]) for a in range(3)], {"eigensystem": es}


def _rows_rates(rc):
    es = diagonalize(rc.dimer(), rc.block["case"])
    rm = build_rate_matrix(es, rc.bath())
    dsq = es.dipole_sq()
    rows = []
    for b in range(3):
        for a in range(3):
            if a != b:
                r = rm.rate[b, a]
                rows.append((b, a, es.omega(b, a), dsq[b, a], r, r / HBAR_EV_S))
    return rows, {"rates": rm}


def _rows_evolve(rc):
    blk = rc.block
    traj = run_population_study(
        rc.dimer(), rc.bath(), blk["initial"], blk["t_min_s"], blk["t_max_s"], blk["points"], blk["case"]
    )
    rows = [(t * HBAR_EV_S, *p) for t, p in zip(traj.times, traj.populations)]
    return rows, {"trajectory": traj}


def _rows_scan(rc):
    blk = rc.block
    tpl = DarkScanTemplate(blk["epsilon"], tuple(blk["mu1"]), tuple(blk["mu2"]),
                           tuple(blk["delta_dir1"]), tuple(blk["delta_dir2"]))
    grid = run_dark_scan(tpl, _axis(blk["q01"]), _axis(blk["delta"]), blk["q02_values"], rc.threshold)
    return list(grid.rows()), {"grid": grid}


def _rows_ensemble(rc):
    blk = rc.block
    spec = EnsembleSpec(blk["epsilon"], blk["mu"], blk["splitting"], blk["sigma"], blk["samples"],
                        rc.master_seed, blk["perturb_couplings"])
    stats = run_robustness_ensemble(spec, rc.bath(), _axis(blk["ratio"]), blk["delta"], rc.threads)
    rows = []
    for row in stats.cells:
        for c in row:
            m, s = c.mean, c.stderr
            bright = c.unperturbed[1]
            rel = m / bright if bright > 0 else np.full(3, np.nan)
            rows.append((c.ratio, c.delta, m[0], s[0], m[1], s[1], m[2], s[2], c.redraws, bright, *rel))
    return rows, {"stats": stats}


def _rows_polaron(rc):
    cfg = rc.dimer()
    es = diagonalize(cfg, rc.block["case"])
    spec = rc.bath()
    lam = compute_lambda(cfg)
    frame = build_polaron_frame(es, spec, lam)
    shifted = rc.block["second_term_at_shifted"]
    rows = []
    for a, b in ((1, 0), (2, 0), (2, 1)):
        u = uncorrected_rate(es, spec, a, b)
        c = corrected_rate(frame, es, spec, a, b, second_term_at_shifted=shifted)
        f = full_polaron_rate(frame, es, spec, a, b) if rc.block["full"] else float("nan")
        rows.append((a, b, es.omega(a, b), frame.shifted_omega(a, b), lam, u, c, c - u, f))
    return rows, {"frame": frame}


DISPATCH = {
    "spectrum": _rows_spectrum,
    "rates": _rows_rates,
    "evolve": _rows_evolve,
    "scan-dark": _rows_scan,
    "ensemble": _rows_ensemble,
    "polaron": _rows_polaron,
}


def run(rc: RunConfig, out_dir=None, plot: bool = False) -> Path:
    """Execute the configured command and return the CSV path."""
    out = Path(out_dir if out_dir is not None else rc.output)
    out.mkdir(parents=True, exist_ok=True)
    rows, results = DISPATCH[rc.command](rc)
    path = out / f"{rc.command.replace('-', '_')}.csv"
    write_csv(path, rc, COLUMNS[rc.command], rows)
    if plot:
        from .plotting import plot_results

        plot_results(rc.command, results, out)
    return path


def _error(category: str, exc: Exception, **extra) -> None:
    payload = {"error": category, "type": type(exc).__name__, "message": str(exc), **extra}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimerdark", description="Optical rates and dark states of dipolar dimers.")
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--out", help="output directory (overrides the config's output)")
    p.add_argument("--seed", type=int, help="master seed (u64) for ensembles")
    p.add_argument("--threads", type=int, help="worker threads for ensembles")
    p.add_argument("--lambda-override", type=float, help="self-dipole strength in eV")
    p.add_argument("--plot", action="store_true", help="also write PNG figures next to the CSV")
    p.add_argument("--version", action="version", version=f"dimerdark {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must fit in 64 unsigned bits", key="master_seed")
            rc.raw["master_seed"] = args.seed
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be at least 1", key="threads")
            rc.raw["threads"] = args.threads
        if args.lambda_override is not None:
            if args.lambda_override < 0:
                raise ConfigError("--lambda-override must be non-negative", key="lambda_override")
            rc.raw["lambda_override"] = args.lambda_override
        if args.out is not None:
            rc.raw["output"] = args.out
        path = run(rc, plot=args.plot)
    except ConfigError as exc:
        _error("config", exc, key=exc.key)
        return EXIT_CONFIG
    except PreconditionError as exc:
        _error("config", exc)
        return EXIT_CONFIG
    except DegenerateSpectrumError as exc:
        _error("degeneracy", exc, pair=list(exc.pair) if exc.pair else None)
        return EXIT_DEGENERATE
    except (NumericalError, DimerError, FloatingPointError, np.linalg.LinAlgError) as exc:
        _error("numeric", exc)
        return EXIT_NUMERIC
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
