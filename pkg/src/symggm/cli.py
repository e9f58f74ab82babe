"""Command-line front end.

Subcommands ``fit``, ``tune``, ``simulate`` and ``se`` write plain-text
outputs (CSV, JSON, DOT) plus a ``manifest.json`` into ``--out-dir``
(default: ``$SYMGGM_OUT_DIR`` or ``./symggm_out``).

Edge and vertex classes are numbered from 1 in every output file.

Exit codes: 0 success, 1 usage error, 2 invalid data or coloring,
3 numerical failure or non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coloring import load_coloring
from .covariance import sample_covariance
from .exceptions import DataError, NumericalError, SymGGMError
from .inference import sandwich_inference
from .io import (
    build_manifest,
    read_data_csv,
    to_dot,
    write_csv,
    write_json,
    write_matrix_csv,
)
from .params import RconParams, RcorParams, assemble_concentration, assemble_from_rcor
from .penalty import PenaltySpec, default_grid, fit_penalized, lambda_max, tune_lambda
from .simulation import PRESETS, ScenarioConfig, preset, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
OUT_ENV = "SYMGGM_OUT_DIR"

logger = logging.getLogger("symggm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _lambda_arg(text: str):
    if text == "tune":
        return text
    try:
        lam = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'tune', got {text!r}") from None
    if lam < 0 or not np.isfinite(lam):
        raise argparse.ArgumentTypeError("lambda must be finite and nonnegative")
    return lam


def _grid_arg(text: str):
    """``default``, ``num`` (default grid with that many points) or a comma list."""
    if text == "default":
        return None
    parts = [p for p in text.split(",") if p.strip()]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if len(values) == 1 and "," not in text and "." not in text:
        return int(values[0])
    if any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("grid values must be nonnegative")
    return values


def _data_args(p: argparse.ArgumentParser):
    p.add_argument("--data", required=True, help="CSV, rows = observations")
    p.add_argument("--scheme", required=True, help="coloring JSON")
    p.add_argument("--header", dest="header", action="store_true", default=None,
                   help="first CSV row holds column names (default: auto-detect)")
    p.add_argument("--no-header", dest="header", action="store_false")
    p.add_argument("--no-center", dest="center", action="store_false",
                   help="use raw second moments instead of centering the columns")
    p.add_argument("--divisor", choices=["n", "n-1"], default="n")


def _model_args(p: argparse.ArgumentParser):
    p.add_argument("--model", choices=["rcon", "rcor"], default="rcon")
    p.add_argument("--penalty", choices=["l1", "scad"], default="l1")
    p.add_argument("--scad-a", type=float, default=3.7)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-sweeps", type=int, default=500)


def _common_args(p: argparse.ArgumentParser):
    p.add_argument("--out-dir", default=None,
                   help=f"output directory (default ${OUT_ENV} or ./symggm_out)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: all CPUs); results do not depend on it")
    p.add_argument("-v", "--verbose", action="store_true")


def _tune_args(p: argparse.ArgumentParser):
    p.add_argument("--grid", type=_grid_arg, default=None,
                   help="'default', a point count, or comma-separated lambda values")
    p.add_argument("--cbic-df", choices=["classes", "edges"], default="classes")
    p.add_argument("--refit", action="store_true",
                   help="evaluate the composite BIC at unpenalized refits of each support")
    p.add_argument("--cold-start", action="store_true",
                   help="fit grid points independently (parallel) instead of warm starts")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="symggm", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit one penalized model")
    _data_args(p)
    _model_args(p)
    p.add_argument("--lambda", dest="lam", type=_lambda_arg, default=0.0,
                   help="tuning parameter, or 'tune' for composite-BIC selection")
    _tune_args(p)
    _common_args(p)

    p = sub.add_parser("tune", help="composite-BIC selection over a lambda grid")
    _data_args(p)
    _model_args(p)
    _tune_args(p)
    _common_args(p)

    p = sub.add_parser("simulate", help="run a simulation scenario")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--scenario", help="scenario JSON")
    g.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("se", help="bootstrap-sandwich standard errors")
    _data_args(p)
    _model_args(p)
    p.add_argument("--params", help="params JSON from 'fit' (otherwise fit with --lambda)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--bootstrap-m", type=int, default=200)
    _common_args(p)
    return parser


def _out_dir(args) -> Path:
    out = Path(args.out_dir or os.environ.get(OUT_ENV) or "symggm_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args):
    X, names = read_data_csv(args.data, args.header)
    scheme = load_coloring(args.scheme)
    if X.shape[1] != scheme.p:
        raise DataError(f"data has {X.shape[1]} columns but the coloring has p={scheme.p}")
    cov = sample_covariance(X, center=args.center, divisor=args.divisor)
    return X, names, scheme, cov


def _config(args) -> dict:
    skip = {"func", "verbose", "out_dir", "workers"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _write_fit(out: Path, res, scheme, prefix: str = "") -> list[Path]:
    params = res.params
    theta = (assemble_concentration(params, scheme) if isinstance(params, RconParams)
             else assemble_from_rcor(params, scheme))
    labels = [scheme.vertex_label(j) for j in range(scheme.p)]
    payload = {"model": res.model, **params.to_dict(), **res.summary(),
               "diagnostics": res.diagnostics, "labels": labels}
    payload["active_set"] = [s + 1 for s in res.active_set]
    edges = [
        {"edge_class": s + 1, "u": labels[i], "v": labels[j], "value": float(params.edge[s])}
        for s in res.active_set for i, j in scheme.edge_classes[s]
    ]
    trace = [{"sweep": i, "objective": float(v)} for i, v in enumerate(res.objective_trace)]
    files = [
        write_json(out / f"{prefix}params.json", payload),
        write_matrix_csv(out / f"{prefix}concentration.csv", theta, labels),
        write_csv(out / f"{prefix}edges.csv", edges, ["edge_class", "u", "v", "value"]),
        write_csv(out / f"{prefix}trace.csv", trace, ["sweep", "objective"]),
    ]
    dot = out / f"{prefix}graph.dot"
    dot.write_text(to_dot(scheme, params))
    files.append(dot)
    return files


def _grid_from(args, cov, scheme):
    if args.grid is None:
        return None
    if isinstance(args.grid, int):
        return default_grid(lambda_max(cov, scheme, args.model), args.grid)
    return args.grid


def _tune(args, cov, scheme):
    return tune_lambda(
        cov, scheme, _grid_from(args, cov, scheme), args.model,
        PenaltySpec(args.penalty, 0.0, args.scad_a), tol=args.tol, max_sweeps=args.max_sweeps,
        warm_start=not args.cold_start, workers=args.workers, df=args.cbic_df, refit=args.refit,
    )


def _write_tuning(out: Path, rep) -> list[Path]:
    return [write_csv(out / "path.csv", rep.rows()), write_json(out / "tuning.json", rep.to_dict())]


def cmd_fit(args) -> int:
    _, _, scheme, cov = _load(args)
    out = _out_dir(args)
    files = []
    if args.lam == "tune":
        rep = _tune(args, cov, scheme)
        files += _write_tuning(out, rep)
        res = rep.selected_fit
    else:
        res = fit_penalized(cov, scheme, args.model, PenaltySpec(args.penalty, args.lam, args.scad_a),
                            args.tol, args.max_sweeps)
    files += _write_fit(out, res, scheme)
    _manifest(out, "fit", args, files)
    print(json.dumps({"lambda": res.lambda_used, "converged": res.converged,
                      "active_set": [s + 1 for s in res.active_set], **res.params.to_dict()}))
    if not res.converged:
        logger.error("fit did not converge in %d sweeps", res.sweeps_used)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_tune(args) -> int:
    _, _, scheme, cov = _load(args)
    out = _out_dir(args)
    rep = _tune(args, cov, scheme)
    files = _write_tuning(out, rep) + _write_fit(out, rep.selected_fit, scheme, prefix="selected_")
    _manifest(out, "tune", args, files)
    print(json.dumps({"selected_lambda": rep.selected_lambda,
                      "active_set": [s + 1 for s in rep.selected_fit.active_set]}))
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.scenario:
        cfg = ScenarioConfig.from_json(args.scenario)
    else:
        cfg = preset(args.preset)
    if args.replicates is not None:
        cfg.replicates = args.replicates
    if args.seed is not None:
        cfg.seed = args.seed
    ScenarioConfig.from_dict(cfg.to_dict())  # revalidate overrides
    out = _out_dir(args)
    rep = run_experiment(cfg, args.workers)
    files = [
        write_csv(out / "replicates.csv", rep.rows),
        write_csv(out / "summary.csv", rep.summary()),
        write_json(out / "report.json", rep.to_dict()),
    ]
    streams = {"replicate_seeds": [[cfg.seed, i] for i in range(cfg.replicates)],
               "seed_derivation": "numpy SeedSequence([seed, replicate])"}
    _manifest(out, "simulate", args, files, config={**cfg.to_dict(), **streams}, seed=cfg.seed)
    for row in rep.summary():
        print(json.dumps(row))
    return EXIT_OK


def _read_params(path, model: str):
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read params {path}: {exc}") from None
    try:
        if model == "rcon":
            return RconParams(raw["theta_E"], raw["theta_V"])
        return RcorParams(raw["rho_E"], raw["sigma_V"])
    except KeyError as exc:
        raise DataError(f"{path}: missing field {exc} for model {model}") from None
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def cmd_se(args) -> int:
    X, _, scheme, cov = _load(args)
    out = _out_dir(args)
    spec = PenaltySpec(args.penalty, args.lam, args.scad_a)
    if args.params:
        params = _read_params(args.params, args.model)
        if len(params.edge) != scheme.n_edge_classes or \
                len(params.as_vector()) - len(params.edge) != scheme.n_vertex_classes:
            raise DataError("params do not match the coloring's class counts")
    else:
        res = fit_penalized(cov, scheme, args.model, spec, args.tol, args.max_sweeps)
        params = res.params
    rep = sandwich_inference(X, params, scheme, m=args.bootstrap_m, seed=args.seed,
                             penalty=spec, center=args.center, divisor=args.divisor,
                             workers=args.workers)
    files = [write_csv(out / "se.csv", rep.rows(), ["parameter", "estimate", "se", "bias"]),
             write_json(out / "inference.json", rep.to_dict())]
    _manifest(out, "se", args, files)
    for row in rep.rows():
        print(json.dumps(row))
    return EXIT_OK


def _manifest(out: Path, command: str, args, files, config=None, seed=None):
    inputs = {k: getattr(args, k, None) for k in ("data", "scheme", "params", "scenario")}
    man = build_manifest(command, config if config is not None else _config(args), inputs,
                         [f.name for f in files], seed if seed is not None else getattr(args, "seed", None))
    write_json(out / "manifest.json", man)


COMMANDS = {"fit": cmd_fit, "tune": cmd_tune, "simulate": cmd_simulate, "se": cmd_se}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (DataError, SymGGMError) as exc:
        if isinstance(exc, NumericalError):
            print(f"symggm: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"symggm: invalid input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError) as exc:
        print(f"symggm: invalid input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"symggm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
