"""Command-line front end.

Subcommands: potential, coeffs, matrix, spectrum, converge, limits,
oracle-check.  Output is CSV or JSON; float fields use the shortest
round-trip decimal form so files diff cleanly and re-ingest losslessly.
Identical configurations produce byte-identical output apart from the
JSON metadata timestamp, which --no-timestamp suppresses.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 oracle disagreement.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone

import numpy as np

from .errors import ConfigError, NumericalError, OracleMismatchError, PgmError
from .model import (
    ModelParams,
    PhysicalScales,
    compute_coefficients,
    potential_dimensionless,
)
from .oracles import fd_bound_states, FiniteDifferenceGrid, kinetic_matrix_exact, quad_potential_block
from .spectral import (
    assemble_matrix,
    classify_bound,
    convergence_scan,
    eigen_sym,
    inflexion_scan,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE = 4

_BOOL_KEYS = {"no_timestamp", "check_fd", "inflexion"}
_TRUE_WORDS = {"1", "true", "yes", "on"}


# --------------------------------------------------------------------------
# config file handling: flat key=value, overridden by explicit flags
# --------------------------------------------------------------------------

def _config_as_args(path: str) -> list[str]:
    """Translate a flat key=value file into CLI tokens.

    The tokens are inserted *before* the user's flags, so explicit flags
    win; unknown keys fail argument parsing like any unknown flag.
    """
    args: list[str] = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, value = (s.strip() for s in line.split("=", 1))
                key = key.lower().replace("-", "_")
                flag = "--" + key.replace("_", "-")
                if key in _BOOL_KEYS:
                    if value.lower() in _TRUE_WORDS:
                        args.append(flag)
                else:
                    args.extend([flag, value])
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return args


def _inject_config(argv: list[str]) -> list[str]:
    if not argv:
        return argv
    path = None
    rest: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise ConfigError("--config requires a path")
            path = argv[i + 1]
            i += 2
            continue
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            i += 1
            continue
        rest.append(tok)
        i += 1
    if path is None:
        return argv
    return [rest[0], *_config_as_args(path), *rest[1:]]


# --------------------------------------------------------------------------
# parsing helpers
# --------------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _add_model_args(p: argparse.ArgumentParser, multi_order: bool = False) -> None:
    p.add_argument("--lambda", dest="lam", type=float, required=True,
                   help="potential value at the origin (negative: well)")
    p.add_argument("--mu", type=float, required=True, help="Gaussian decay rate (> 0)")
    if multi_order:
        p.add_argument("--order", dest="orders", type=_int_list, required=True,
                       help="model order r, or comma-separated list of orders")
    else:
        p.add_argument("--order", dest="order_r", type=int, required=True,
                       help="model order r (>= 0)")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    p.add_argument("--out", metavar="PATH", default=None, help="write to file instead of stdout")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the generated-at field from JSON metadata")
    p.add_argument("--config", metavar="FILE", default=None,
                   help="flat key=value config file; explicit flags override it")


def _add_scale_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, default=None, help="energy quantum (hbar*omega)")
    p.add_argument("--mass", type=float, default=None)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--hbar", type=float, default=None)


def _scales_from(args) -> PhysicalScales | None:
    trio = (args.mass, args.omega, args.hbar)
    has_trio = any(v is not None for v in trio)
    if args.epsilon is not None and has_trio:
        raise ConfigError("give either --epsilon or --mass/--omega/--hbar, not both")
    if args.epsilon is not None:
        return PhysicalScales.from_epsilon(args.epsilon)
    if has_trio:
        if not all(v is not None for v in trio):
            raise ConfigError("--mass, --omega and --hbar must be given together")
        return PhysicalScales.from_mass_omega(args.mass, args.omega, args.hbar)
    return None


def _params_from(args) -> ModelParams:
    try:
        return ModelParams(args.lam, args.mu, args.order_r)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _emit(args, rows: list[list], doc: dict) -> None:
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
    else:
        if not args.no_timestamp:
            doc.setdefault("metadata", {})["generated_at"] = datetime.now(
                timezone.utc
            ).strftime("%Y-%m-%dT%H:%M:%SZ")
        text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _meta(params: ModelParams | None = None, **extra) -> dict:
    meta: dict = {}
    if params is not None:
        meta.update({"lambda": params.lam, "mu": params.mu, "order_r": params.order_r})
    meta.update(extra)
    return meta


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _cmd_potential(args) -> int:
    if args.samples < 1:
        raise ConfigError("--samples must be >= 1")
    if args.xi_max < args.xi_min:
        raise ConfigError("--xi-max must be >= --xi-min")
    models = []
    for r in args.orders:
        try:
            models.append(ModelParams(args.lam, args.mu, r))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    xi = np.linspace(args.xi_min, args.xi_max, args.samples)
    cols = [potential_dimensionless(p, xi) for p in models]
    header = ["xi"] + [f"W_r{p.order_r}" for p in models]
    rows: list[list] = [header]
    for i in range(xi.size):
        rows.append([float(xi[i])] + [float(c[i]) for c in cols])
    doc = {
        "metadata": _meta(None, **{"lambda": args.lam, "mu": args.mu,
                                   "orders": args.orders,
                                   "xi_min": args.xi_min, "xi_max": args.xi_max,
                                   "samples": args.samples}),
        "columns": header,
        "rows": [[float(xi[i])] + [float(c[i]) for c in cols] for i in range(xi.size)],
    }
    _emit(args, rows, doc)
    return EXIT_OK


def _cmd_coeffs(args) -> int:
    params = _params_from(args)
    C = compute_coefficients(params)
    rows: list[list] = [["k", "C_k"]]
    rows += [[k + 1, float(C[k])] for k in range(C.size)]
    doc = {"metadata": _meta(params), "coefficients": [float(v) for v in C]}
    _emit(args, rows, doc)
    return EXIT_OK


def _cmd_matrix(args) -> int:
    params = _params_from(args)
    if args.dim < 2:
        raise ConfigError("--dim must be >= 2")
    block = assemble_matrix(params, args.dim, method=args.method)
    rows: list[list] = [["m"] + [f"n{j}" for j in range(block.dim)]]
    for m in range(block.dim):
        rows.append([m] + [float(v) for v in block.entries[m]])
    doc = {
        "metadata": _meta(params, dim=block.dim, degree=block.degree,
                          symmetry_defect=block.symmetry_defect, method=args.method),
        "entries": [[float(v) for v in row] for row in block.entries],
    }
    _emit(args, rows, doc)
    return EXIT_OK


def read_matrix_json(path) -> np.ndarray:
    """Re-ingest a matrix written by ``pgm matrix --format json``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return np.array(doc["entries"], dtype=float)


def _cmd_spectrum(args) -> int:
    params = _params_from(args)
    if args.dim < 2:
        raise ConfigError("--dim must be >= 2")
    scales = _scales_from(args)
    nu = eigen_sym(assemble_matrix(params, args.dim))
    result = classify_bound(nu, params, scales, threshold=args.tol)
    bound_set = set(float(v) for v in result.bound)

    header = ["index", "nu", "bound"]
    if scales is not None:
        header.append("energy")
    rows: list[list] = [header]
    for i, v in enumerate(result.nu_values):
        row: list = [i, float(v), float(v) in bound_set]
        if scales is not None:
            row.append(0.5 * scales.epsilon * float(v))
        rows.append(row)

    doc = {
        "metadata": _meta(params, dim=args.dim, bound_threshold=args.tol),
        "nu_values": [float(v) for v in result.nu_values],
        "bound": [float(v) for v in result.bound],
        "continuum_threshold": result.continuum_threshold,
        "well_floor_lambda": result.lambda_floor,
        "well_floor_numeric": result.min_w,
    }
    if scales is not None:
        doc["metadata"]["epsilon"] = scales.epsilon
        doc["energies"] = [float(v) for v in result.energies]
        doc["bound_energies"] = [float(v) for v in result.bound_energies]
        doc["floor_energy"] = result.floor_energy
        doc["numeric_floor_energy"] = result.numeric_floor_energy
    if args.inflexion and result.nu_values.size >= 4:
        doc["inflexion_index"] = inflexion_scan(result.nu_values)
    if args.check_fd:
        fd = fd_bound_states(params, FiniteDifferenceGrid(args.fd_L, args.fd_P))
        doc["fd_bound"] = [float(v) for v in fd]
        if fd.size and result.bound.size:
            k = min(fd.size, result.bound.size)
            doc["fd_max_abs_delta"] = float(np.max(np.abs(fd[:k] - result.bound[:k])))
    _emit(args, rows, doc)
    return EXIT_OK


def _cmd_converge(args) -> int:
    params = _params_from(args)
    if len(args.dims) < 2:
        raise ConfigError("--dims needs at least two ascending values")
    try:
        report = convergence_scan(params, args.dims, tol=args.tol)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    header = (["level"] + [f"D{d}" for d in report.dims]
              + [f"drift_D{d}" for d in report.dims[1:]] + ["converged"])
    rows: list[list] = [header]
    for i, track in enumerate(report.tracks):
        rows.append([i] + [float(v) for v in track.values]
                    + [float(v) for v in track.drifts()] + [report.converged[i]])
    doc = {
        "metadata": _meta(params, dims=report.dims, tol=report.tol,
                          truncated=report.truncated),
        "tracks": [
            {
                "level": i,
                "values": [float(v) for v in t.values],
                "drifts": [float(v) for v in t.drifts()],
                "appeared_at_dim": report.dims[t.appeared_at],
                "converged": report.converged[i],
            }
            for i, t in enumerate(report.tracks)
        ],
    }
    _emit(args, rows, doc)
    return EXIT_OK


def _cmd_limits(args) -> int:
    if args.dim < 2:
        raise ConfigError("--dim must be >= 2")
    if not args.values:
        raise ConfigError("--values must not be empty")
    n = np.arange(args.dim)
    distances = []
    for v in args.values:
        if args.sweep == "mu":
            params = ModelParams(args.lam, v, args.order_r)
        else:
            r = int(v)
            if r != v:
                raise ConfigError(f"r sweep values must be integers, got {v}")
            params = ModelParams(args.lam, args.mu, r)
        block = assemble_matrix(params, args.dim)
        ho = np.diag(2.0 * n + params.lam + 1.0)
        distances.append(float(np.max(np.abs(block.entries - ho))))
    rows: list[list] = [["sweep", "value", "distance"]]
    for v, d in zip(args.values, distances):
        rows.append([args.sweep, float(v), d])
    monotone = None
    if len(distances) > 1:
        monotone = all(b < a for a, b in zip(distances, distances[1:]))
    doc = {
        "metadata": {"sweep": args.sweep, "lambda": args.lam, "dim": args.dim,
                     **({"mu": args.mu} if args.sweep == "r" else {"order_r": args.order_r})},
        "values": [float(v) for v in args.values],
        "distances": distances,
        "monotone_decreasing": monotone,
    }
    _emit(args, rows, doc)
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    params = _params_from(args)
    if not 2 <= args.dim <= args.oracle_ceiling:
        raise ConfigError(f"--dim must be in [2, {args.oracle_ceiling}] for oracle checks")
    block = assemble_matrix(params, args.dim).entries.copy()
    if args.inject_entry:
        m, n = args.inject_entry
        if not (0 <= m < args.dim and 0 <= n < args.dim):
            raise ConfigError("--inject-entry indices out of range")
        block[m, n] += 1e-3
        block[n, m] += 1e-3
    oracle = kinetic_matrix_exact(args.dim) + quad_potential_block(
        params, args.dim, start_size=args.quad_size
    )
    diff = np.abs(block - oracle)
    scale = np.maximum(1.0, np.abs(oracle))
    rel = diff / scale
    loc = np.unravel_index(int(np.argmax(rel)), rel.shape)
    passed = bool(rel[loc] <= args.tol)
    rows: list[list] = [
        ["dim", "max_abs_diff", "mean_abs_diff", "max_scaled_diff", "at_m", "at_n", "pass"],
        [args.dim, float(diff.max()), float(diff.mean()), float(rel[loc]),
         int(loc[0]), int(loc[1]), passed],
    ]
    doc = {
        "metadata": _meta(params, dim=args.dim, tol=args.tol, quad_size=args.quad_size),
        "max_abs_diff": float(diff.max()),
        "mean_abs_diff": float(diff.mean()),
        "max_scaled_diff": float(rel[loc]),
        "worst_entry": [int(loc[0]), int(loc[1])],
        "pass": passed,
    }
    _emit(args, rows, doc)
    if not passed:
        raise OracleMismatchError(
            f"series element ({loc[0]},{loc[1]}) deviates from quadrature oracle "
            f"by {rel[loc]:.3e} (> {args.tol:g})"
        )
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pgm",
        description="Pseudo-Gaussian quantum wells: potentials, matrix blocks, spectra.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("potential", help="tabulate W(xi) for one or more orders")
    _add_model_args(p, multi_order=True)
    p.add_argument("--xi-min", type=float, default=-6.0)
    p.add_argument("--xi-max", type=float, default=6.0)
    p.add_argument("--samples", type=int, default=241)
    _add_output_args(p)
    p.set_defaults(func=_cmd_potential)

    p = sub.add_parser("coeffs", help="prefactor coefficients C_k")
    _add_model_args(p)
    _add_output_args(p)
    p.set_defaults(func=_cmd_coeffs)

    p = sub.add_parser("matrix", help="truncated Hamiltonian block")
    _add_model_args(p)
    p.add_argument("--dim", type=int, required=True, help="block dimension D")
    p.add_argument("--method", choices=("factored", "literal"), default="factored")
    _add_output_args(p)
    p.set_defaults(func=_cmd_matrix)

    p = sub.add_parser("spectrum", help="eigenvalues and bound levels of a block")
    _add_model_args(p)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-6,
                   help="bound/continuum separation threshold in nu units")
    p.add_argument("--inflexion", action="store_true",
                   help="include the curvature-flip diagnostic index")
    p.add_argument("--check-fd", dest="check_fd", action="store_true",
                   help="cross-check bound levels against the finite-difference oracle")
    p.add_argument("--fd-L", dest="fd_L", type=float, default=12.0)
    p.add_argument("--fd-P", dest="fd_P", type=int, default=4001)
    _add_scale_args(p)
    _add_output_args(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("converge", help="track bound levels across block dimensions")
    _add_model_args(p)
    p.add_argument("--dims", type=_int_list, required=True,
                   help="ascending comma-separated block dimensions")
    p.add_argument("--tol", type=float, default=1e-6, help="drift tolerance")
    _add_output_args(p)
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("limits", help="distance to the oscillator block along a sweep")
    p.add_argument("--sweep", choices=("mu", "r"), required=True)
    p.add_argument("--values", type=_float_list, required=True,
                   help="comma-separated sweep values")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--mu", type=float, default=None, help="fixed mu for an r sweep")
    p.add_argument("--order", dest="order_r", type=int, default=None,
                   help="fixed order for a mu sweep")
    p.add_argument("--dim", type=int, default=11)
    _add_output_args(p)
    p.set_defaults(func=_cmd_limits)

    p = sub.add_parser("oracle-check", help="series elements vs quadrature oracle")
    _add_model_args(p)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-8, help="scaled disagreement tolerance")
    p.add_argument("--quad-size", dest="quad_size", type=int, default=128)
    p.add_argument("--oracle-ceiling", dest="oracle_ceiling", type=int, default=64)
    p.add_argument("--inject-entry", dest="inject_entry", type=_int_list, default=None,
                   metavar="M,N", help="test mode: corrupt one entry before checking")
    _add_output_args(p)
    p.set_defaults(func=_cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _inject_config(argv)
        args = parser.parse_args(argv)
        if args.command == "limits":
            if args.sweep == "mu" and args.order_r is None:
                raise ConfigError("a mu sweep needs a fixed --order")
            if args.sweep == "r" and args.mu is None:
                raise ConfigError("an r sweep needs a fixed --mu")
        return args.func(args)
    except ConfigError as exc:
        print(f"pgm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleMismatchError as exc:
        print(f"pgm: oracle disagreement: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except NumericalError as exc:
        print(f"pgm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PgmError as exc:
        print(f"pgm: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
