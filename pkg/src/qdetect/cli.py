"""``qdetect`` command line: solve, verify, compare, generate.

Exit codes: 0 certified optimal (or, for ``verify`` without a dual matrix,
feasible), 2 solved but certification failed, 3 invalid input, 4 solver
failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from .certify import DimensionError, check_optimality, helstrom_binary_pd
from .dual_solver import TRACE, SolverError, SolverOptions
from .ensemble import (
    EnsembleError,
    ParseError,
    Tolerances,
    ensemble_to_dict,
    encode_matrix,
    encode_vector,
    load_ensemble,
    parse_matrix,
    reduce_to_span,
)
from .generate import random_mixed_ensemble, random_pure_ensemble
from .lsm import NotPureError, PureEnsembleView, lsm_measurement, lsm_prob_correct
from .pipeline import embed_measurement, solve
from .recovery import Measurement, RecoveryError

EXIT_OK = 0
EXIT_UNCERTIFIED = 2
EXIT_INVALID = 3
EXIT_SOLVER = 4

logger = logging.getLogger("qdetect")


class CLIError(Exception):
    def __init__(self, code: int, stage: str, exc: BaseException | str):
        self.code = code
        self.stage = stage
        self.kind = type(exc).__name__ if isinstance(exc, BaseException) else "Error"
        super().__init__(str(exc))


# --- deterministic JSON ----------------------------------------------------


def _num(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float printed at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    return json.dumps(obj)


# --- helpers ---------------------------------------------------------------


def _configure_logging():
    level = os.environ.get("QDETECT_LOG", "off").lower()
    levels = {"off": None, "info": logging.INFO, "trace": TRACE}
    if level not in levels:
        raise CLIError(EXIT_INVALID, "config", f"QDETECT_LOG must be one of off, info, trace; got {level!r}")
    root = logging.getLogger("qdetect")
    root.handlers.clear()
    if levels[level] is None:
        root.setLevel(logging.CRITICAL + 1)
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(levels[level])


def _read_ensemble(path):
    try:
        with open(path, "rb") as fh:
            return load_ensemble(fh, Tolerances())
    except OSError as exc:
        raise CLIError(EXIT_INVALID, "load", exc) from exc
    except EnsembleError as exc:
        raise CLIError(EXIT_INVALID, "validate" if not isinstance(exc, ParseError) else "load", exc) from exc


def _read_json(path, stage):
    try:
        with open(path, "rb") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CLIError(EXIT_INVALID, stage, exc) from exc


def _read_measurement(path) -> Measurement:
    doc = _read_json(path, "load")
    # accept a full solve report as well as a bare measurement document
    if isinstance(doc, dict) and "measurement" in doc and "operators" not in doc:
        doc = doc["measurement"]
    try:
        return Measurement.from_dict(doc)
    except EnsembleError as exc:
        raise CLIError(EXIT_INVALID, "load", exc) from exc


def _read_dual(path) -> np.ndarray:
    doc = _read_json(path, "load")
    if isinstance(doc, dict):
        doc = doc.get("X_hat", doc.get("matrix"))
    try:
        return parse_matrix(doc, "X_hat")
    except ParseError as exc:
        raise CLIError(EXIT_INVALID, "load", exc) from exc


def _options(args) -> SolverOptions:
    return SolverOptions(gap_tol=args.gap_tol)


def _real_coords(vectors, tol=1e-9):
    """2-D real coordinates after removing each vector's global phase; None if impossible."""
    out = []
    for v in vectors:
        v = np.asarray(v, dtype=complex)
        k = int(np.argmax(np.abs(v)))
        if abs(v[k]) > 0:
            v = v * (abs(v[k]) / v[k])
        if np.max(np.abs(v.imag), initial=0.0) > tol:
            return None
        out.append([float(x) for x in v.real])
    return out


# --- commands --------------------------------------------------------------


def cmd_solve(args) -> tuple[int, dict]:
    e = _read_ensemble(args.input)
    try:
        sol = solve(e, _options(args), rank_tol=args.rank_tol, check_tol=args.check_tol)
    except SolverError as exc:
        raise CLIError(EXIT_SOLVER, "solve_dual", exc) from exc
    except RecoveryError as exc:
        raise CLIError(EXIT_SOLVER, "recovery", exc) from exc
    rep = sol.report
    out = {
        "p_correct": rep.p_correct,
        "dual_objective": rep.dual_objective,
        "gap": rep.gap,
        "optimal": rep.optimal,
        "conditions": rep.residuals(),
        "check_tol": args.check_tol,
        "X_hat": encode_matrix(sol.X),
        "measurement": sol.measurement.to_dict(),
        "coefficients": [float(a) for a in sol.coefficients],
        "null_space_dims": list(sol.bundle.dims),
        "used_lp": sol.used_lp,
        "reduced_dim": sol.embedding.k,
        "solver": {
            "bound": sol.certificate.bound,
            "newton_iters": sol.trace.newton_iters,
            "trace": sol.trace.to_list(),
        },
    }
    if e.m == 2:
        out["oracle"] = {"helstrom_p_correct": helstrom_binary_pd(e)}
    if e.is_pure:
        try:
            view = PureEnsembleView.from_ensemble(sol.reduced)
            out["lsm"] = {"p_correct": lsm_prob_correct(view)}
        except (NotPureError, np.linalg.LinAlgError):
            pass
    return (EXIT_OK if rep.optimal else EXIT_UNCERTIFIED), out


def cmd_verify(args) -> tuple[int, dict]:
    e = _read_ensemble(args.input)
    meas = _read_measurement(args.measurement)
    X = _read_dual(args.dual) if args.dual else None
    try:
        rep = check_optimality(e, meas, X, tol=args.check_tol, rank_tol=args.rank_tol)
    except DimensionError as exc:
        raise CLIError(EXIT_INVALID, "verify", exc) from exc
    out = rep.to_dict()
    if X is None:
        code = EXIT_OK if rep.feasible else EXIT_UNCERTIFIED
    else:
        code = EXIT_OK if rep.optimal else EXIT_UNCERTIFIED
    return code, out


def cmd_compare(args) -> tuple[int, dict]:
    e = _read_ensemble(args.input)
    if not e.is_pure:
        raise CLIError(EXIT_INVALID, "compare", NotPureError("compare needs a pure-state ensemble"))
    try:
        sol = solve(e, _options(args), rank_tol=args.rank_tol, check_tol=args.check_tol)
    except SolverError as exc:
        raise CLIError(EXIT_SOLVER, "solve_dual", exc) from exc
    except RecoveryError as exc:
        raise CLIError(EXIT_SOLVER, "recovery", exc) from exc
    reduced, emb = reduce_to_span(e)
    view = PureEnsembleView.from_ensemble(reduced)
    lsm = embed_measurement(lsm_measurement(view), emb)
    chi = [emb.embed_vector(v) for v in lsm_measurement(view).vectors]
    psi = [np.sqrt(p) * v for p, v in zip(e.priors, e.vectors)]
    mu = sol.measurement.vectors
    out = {
        "p_correct": sol.p_correct,
        "lsm_p_correct": lsm_prob_correct(view),
        "optimal": sol.report.optimal,
        "optimal_vectors": None if mu is None else [encode_vector(v) for v in mu],
        "lsm_vectors": [encode_vector(v) for v in chi],
        "weighted_states": [encode_vector(v) for v in psi],
        "lsm_measurement": lsm.to_dict(),
    }
    if e.dim == 2 and mu is not None:
        coords = {"psi": _real_coords(psi), "mu": _real_coords(mu), "chi": _real_coords(chi)}
        if all(c is not None for c in coords.values()):
            out["figure"] = coords
    return (EXIT_OK if sol.report.optimal else EXIT_UNCERTIFIED), out


def cmd_generate(args) -> tuple[int, dict]:
    if args.n < 1 or args.m < 1:
        raise CLIError(EXIT_INVALID, "generate", "n and m must be at least 1")
    make = random_pure_ensemble if args.kind == "pure" else random_mixed_ensemble
    return EXIT_OK, ensemble_to_dict(make(args.n, args.m, args.seed))


# --- text output -----------------------------------------------------------


def _text(command: str, out: dict) -> str:
    if command == "generate":
        return dumps(out)
    lines = []
    for key in ("p_correct", "lsm_p_correct", "dual_objective", "gap", "optimal", "feasible"):
        if key in out and out[key] is not None:
            lines.append(f"{key:>16}: {out[key]}")
    if "oracle" in out:
        lines.append(f"{'helstrom':>16}: {out['oracle']['helstrom_p_correct']}")
    if "lsm" in out:
        lines.append(f"{'lsm_p_correct':>16}: {out['lsm']['p_correct']}")
    conds = out.get("conditions", {})
    if conds:
        lines.append("conditions:")
        for k, v in conds.items():
            v = v["residual"] if isinstance(v, dict) else v
            lines.append(f"{k:>16}: {v:.3e}")
    return "\n".join(lines)


# --- entry point -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_INVALID)


def _positive(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gap-tol", type=_positive, default=1e-8, help="duality gap target for the dual solver")
    common.add_argument("--rank-tol", type=_positive, default=1e-6, help="relative threshold for null spaces and ranks")
    common.add_argument("--check-tol", type=_positive, default=1e-6, help="tolerance for the optimality verdict")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--output", help="write the report here instead of stdout")

    p = _Parser(prog="qdetect", description="Minimum-error quantum measurements via semidefinite duality.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common], help="compute and certify the optimal measurement")
    s.add_argument("input", help="ensemble JSON file")

    v = sub.add_parser("verify", parents=[common], help="check a given measurement (and dual matrix)")
    v.add_argument("input", help="ensemble JSON file")
    v.add_argument("--measurement", required=True, help="measurement JSON (or a solve report)")
    v.add_argument("--dual", help="dual matrix JSON ({'X_hat': matrix} or a solve report)")

    c = sub.add_parser("compare", parents=[common], help="optimal vs least-squares measurement")
    c.add_argument("input", help="pure-state ensemble JSON file")

    g = sub.add_parser("generate", parents=[common], help="write a seeded random ensemble")
    g.add_argument("--kind", choices=("pure", "mixed"), default="pure")
    g.add_argument("--n", type=int, required=True, help="Hilbert space dimension")
    g.add_argument("--m", type=int, required=True, help="number of states")
    g.add_argument("--seed", type=int, default=0)
    return p


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "compare": cmd_compare, "generate": cmd_generate}


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _configure_logging()
        code, out = COMMANDS[args.command](args)
    except CLIError as exc:
        code = exc.code
        out = {"error": {"stage": exc.stage, "type": exc.kind, "message": str(exc)}}
    text = dumps(out) if args.format == "json" or "error" in out else _text(args.command, out)
    try:
        with _sink(args.output) as fh:
            fh.write(text + "\n")
    except OSError as exc:
        sys.stderr.write(f"qdetect: cannot write output: {exc}\n")
        return EXIT_INVALID
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
