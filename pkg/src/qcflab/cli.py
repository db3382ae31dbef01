"""Command-line front end: ``qcflab <subcommand> [options]``.

Exit status: 0 success, 2 usage, 3 unstable or singular parameters,
4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, QCError, ValidationError
from .experiments import figure, rhs_vector
from .iteration import PreconditionerKind, StepRule, run_iteration, step_size
from .linalg import gen_sym_eigen
from .model import NormKind, make_params
from .operators import assemble, laplacian_matrix
from .opnorms import (
    SWEEP_COLUMNS,
    SweepSpec,
    iteration_conjugate,
    iteration_similar,
    iteration_matrix,
    opnorm,
    scaling_sweep,
    sqrt_k_rule,
)
from .spectral import critical_strain, lennard_jones, qnl_u12_spectrum, stability_constants
from .tables import format_value, to_csv, to_json

__all__ = ["main", "build_parser", "ExperimentConfig", "load_config"]

DEFAULTS = {
    "n": 64,
    "k": 8,
    "phi2": 1.0,
    "phi22": None,
    "af": None,
    "precond": "qcl",
    "alpha": None,
    "alpha_rule": None,
    "norm": None,
    "tol": 1e-10,
    "max_iter": 1000,
    "out": None,
    "format": "csv",
    "kind": None,
    "ns": None,
    "k_rule": "sqrt",
    "af_ratio": None,
    "potential": "lj",
    "number": None,
}

ExperimentConfig = dict


def load_config(path) -> dict:
    """Read a JSON or YAML settings file into a flat dict."""
    text = Path(path).read_text()
    if str(path).endswith((".yml", ".yaml")):
        import yaml

        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ValidationError(f"config {path} must hold a mapping")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - set(DEFAULTS) - {"command"}
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    return data


def _common(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, help="half chain size N")
    p.add_argument("--k", type=int, help="atomistic half-width K")
    p.add_argument("--phi2", type=float, help="phi''(F)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--phi22", type=float, help="phi''(2F)")
    g.add_argument("--af", type=float, help="A_F; sets phi''(2F) = (A_F - phi''(F)) / 4")
    p.add_argument("--precond", choices=["id", "qcl", "qce"])
    a = p.add_mutually_exclusive_group()
    a.add_argument("--alpha", type=float)
    a.add_argument("--alpha-rule", dest="alpha_rule", choices=[r.value.lower() for r in StepRule])
    p.add_argument("--norm", action="append", help="norm kind K,P (repeatable)")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--config", help="JSON or YAML settings file; flags override it")
    p.add_argument("--emit-config", dest="emit_config", help="write the effective settings and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcflab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qcflab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="closed-form and computed U^{1,2} spectrum of L^qnl")
    _common(p)
    p = sub.add_parser("stability", help="coercivity constants of an operator")
    _common(p)
    p.add_argument("--kind", choices=["atom", "qnl", "qce", "qcf_sym"])
    p = sub.add_parser("iterate", help="run the stationary iteration on the model right-hand side")
    _common(p)
    p = sub.add_parser("opnorm", help="operator norms of the iteration matrix")
    _common(p)
    p.add_argument("--kind", action="append", help="alias for --norm")
    p = sub.add_parser("critical-strain", help="critical strain of a pair potential")
    _common(p)
    p.add_argument("--potential", choices=["lj"])
    p = sub.add_parser("sweep", help="norms of the iteration matrix over a list of N")
    _common(p)
    p.add_argument("--ns", help="comma separated list of N")
    p.add_argument("--k-rule", dest="k_rule", help="sqrt, quarter, or a fixed integer")
    p.add_argument("--af-ratio", dest="af_ratio", type=float, help="A_F / phi''(F)")
    p = sub.add_parser("dump-operator", help="dense matrix of an operator")
    _common(p)
    p.add_argument("--kind", choices=["atom", "laplacian", "qcl", "qnl", "qce", "qcf"])
    p = sub.add_parser("figure", help="reproduce one of the four experiments")
    _common(p)
    p.add_argument("number", type=int, choices=[1, 2, 3, 4], nargs="?")
    return parser


def _effective(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for key, val in vars(args).items():
        if key in DEFAULTS and val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    if isinstance(cfg.get("norm"), str):
        cfg["norm"] = [cfg["norm"]]
    if isinstance(cfg.get("kind"), str) and args.command == "opnorm":
        cfg["kind"] = [cfg["kind"]]
    return cfg


def _params(cfg):
    phi2 = float(cfg["phi2"])
    if cfg.get("af") is not None:
        phi22 = (float(cfg["af"]) - phi2) / 4.0
    elif cfg.get("phi22") is not None:
        phi22 = float(cfg["phi22"])
    else:
        phi22 = -0.125 * phi2
    return make_params(cfg["n"], cfg["k"], phi2, phi22)


def _precond(cfg):
    return PreconditionerKind.parse(cfg["precond"])


def _alpha(cfg, params, default_rule=None):
    if cfg.get("alpha") is not None:
        return float(cfg["alpha"])
    rule = cfg.get("alpha_rule") or default_rule
    if rule is None:
        raise ValidationError("give --alpha or --alpha-rule")
    return step_size(params, rule)


def _norms(cfg, default):
    names = list(cfg.get("norm") or [])
    if cfg["command"] == "opnorm":
        names += list(cfg.get("kind") or [])
    return [NormKind.parse(s) for s in names] or list(default)


def _emit(cfg, text: str):
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)


def _table(cfg, columns, rows, extra=None):
    if cfg["format"] == "json":
        obj = {"rows": [{c: r.get(c) for c in columns} for r in rows]}
        if extra:
            obj.update(extra)
        _emit(cfg, to_json(obj))
    else:
        _emit(cfg, to_csv(rows, columns))
        if extra:
            sys.stderr.write(to_json(extra))


def _p(kind):
    return "inf" if math.isinf(kind.p) else str(int(kind.p))


def cmd_spectrum(cfg):
    params = _params(cfg)
    closed = qnl_u12_spectrum(params)
    computed = gen_sym_eigen(assemble(params, "QNL").matrix, laplacian_matrix(params.N)).eigenvalues
    rows = [{"j": j + 1, "closed_form": float(a), "gen_eig": float(b)} for j, (a, b) in enumerate(zip(closed, computed))]
    _table(cfg, ["j", "closed_form", "gen_eig"], rows)
    return 0


def cmd_stability(cfg):
    params = _params(cfg)
    rep = stability_constants(params, (cfg.get("kind") or "qce").upper())
    d = rep.as_dict()
    if cfg["format"] == "csv":
        _emit(cfg, to_csv([d], list(d)))
    else:
        _emit(cfg, to_json(d))
    return 0


def cmd_iterate(cfg):
    params = _params(cfg)
    alpha = _alpha(cfg, params)
    kinds = _norms(cfg, [])
    tr = run_iteration(params, _precond(cfg), alpha, rhs_vector(params),
                       max_iter=int(cfg["max_iter"]), tol=float(cfg["tol"]), kinds=kinds)
    _table(cfg, tr.columns, list(tr.rows()), {"alpha": alpha, "verdict": tr.verdict})
    return 0 if tr.verdict == "CONVERGED" else ConvergenceError.exit_code


def cmd_opnorm(cfg):
    params = _params(cfg)
    alpha = _alpha(cfg, params, "GFC_UNIT" if _precond(cfg) is PreconditionerKind.QCE else None)
    G = iteration_matrix(params, _precond(cfg), alpha)
    conj = iteration_conjugate(params, _precond(cfg), alpha)
    rows = []
    for kind in _norms(cfg, [NormKind(1, np.inf)]):
        sim = iteration_similar(params, _precond(cfg), alpha) if kind.k == 2 else None
        r = opnorm(params, G, kind, conjugate=conj if kind.k == 1 and kind.p != 2 else None, similar=sim)
        rows.append({"N": params.N, "K": params.K, "k": kind.k, "p": _p(kind), "value": r.value,
                     "bracket_low": r.bracket_low, "bracket_high": r.bracket_high, "method": r.method.value})
    _table(cfg, SWEEP_COLUMNS, rows, {"alpha": alpha})
    return 0


def cmd_critical_strain(cfg):
    F = critical_strain(lennard_jones())
    d = {"potential": cfg.get("potential") or "lj", "F_star": F}
    _emit(cfg, to_csv([d], list(d)) if cfg["format"] == "csv" else to_json(d))
    return 0


def _k_rule(text):
    text = str(text)
    if text == "sqrt":
        return sqrt_k_rule
    if text == "quarter":
        return lambda N: N // 4
    try:
        K = int(text)
    except ValueError as exc:
        raise ValidationError(f"bad K rule {text!r}") from exc
    return lambda N: K


def cmd_sweep(cfg):
    if not cfg.get("ns"):
        raise ValidationError("sweep needs --ns")
    ns = cfg["ns"]
    Ns = [int(s) for s in str(ns).split(",")] if not isinstance(ns, list) else [int(s) for s in ns]
    phi2 = float(cfg["phi2"])
    ratio = cfg.get("af_ratio")
    if ratio is None:
        ratio = (cfg["af"] / phi2) if cfg.get("af") is not None else 0.8
    precond = _precond(cfg)
    alpha = cfg.get("alpha")
    if alpha is None:
        alpha = cfg.get("alpha_rule") or ("GFC_UNIT" if precond is PreconditionerKind.QCE else None)
    if alpha is None:
        raise ValidationError("give --alpha or --alpha-rule")
    spec = SweepSpec(_norms(cfg, [NormKind(1, 2)]), Ns, _k_rule(cfg["k_rule"]), phi2, float(ratio), precond.value, alpha)
    res = scaling_sweep(spec)
    _table(cfg, SWEEP_COLUMNS, res.rows, {"slopes": res.slopes})
    return 0


def cmd_dump_operator(cfg):
    params = _params(cfg)
    kind = (cfg.get("kind") or "qcf").upper()
    M = assemble(params, kind).matrix
    head = to_csv([{"kind": kind, **params.as_dict()}], ["kind", "N", "K", "phi2_F", "phi2_2F"])
    body = "\n".join(",".join(format_value(float(x)) for x in row) for row in M) + "\n"
    _emit(cfg, head + body)
    return 0


def cmd_figure(cfg):
    n = cfg.get("number")
    if n is None:
        raise ValidationError("figure needs a number 1-4")
    res = figure(int(n))
    if cfg["format"] == "json":
        obj = {"figure": res.number, "summary": res.summary,
               "tables": {name: [{c: r.get(c) for c in cols} for r in rows]
                          for name, (cols, rows) in res.tables.items()}}
        _emit(cfg, to_json(obj))
    else:
        name, (cols, rows) = next(iter(res.tables.items()))
        _emit(cfg, to_csv(rows, cols))
        sys.stderr.write(to_json(res.summary))
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "stability": cmd_stability,
    "iterate": cmd_iterate,
    "opnorm": cmd_opnorm,
    "critical-strain": cmd_critical_strain,
    "sweep": cmd_sweep,
    "dump-operator": cmd_dump_operator,
    "figure": cmd_figure,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _effective(args)
        if getattr(args, "emit_config", None):
            out = {k: cfg[k] for k in sorted(cfg)}
            Path(args.emit_config).write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
            return 0
        return COMMANDS[args.command](cfg)
    except QCError as exc:
        sys.stderr.write(f"qcflab: error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
