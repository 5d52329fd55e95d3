"""Command-line interface: ``mordell eval | verify | sweep``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
3 a numerical procedure did not converge (the record is still printed,
flagged ``converged=false``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from .eichler import M2Path, double_eichler_E_alpha, h_alpha_lattice, mordell_h
from .errfns import err_E, err_E2, err_M, err_M2, err_M2_contour
from .errors import ConvergenceFailure, DomainError, MordellError
from .forms import AlphaShift, ModularPoint, QuadraticForm
from .kernel import h_alpha_kernel
from .quad import Tolerance
from .verify import SCHEMA_VERSION, SUITES, run_suite

log = logging.getLogger("mordell")

H_FIELDS = ["method", "a1", "a2", "a3", "alpha1", "alpha2", "v", "value_re", "value_im",
            "err_est", "n_evals", "r_used", "converged"]
ERRFN_FIELDS = ["kind", "kappa", "u1", "u2", "value", "path"]
EALPHA_FIELDS = ["a1", "a2", "a3", "alpha1", "alpha2", "tau_re", "tau_im", "value_re", "value_im", "r_used"]
HONE_FIELDS = ["z_re", "z_im", "tau_re", "tau_im", "value_re", "value_im", "err_est", "converged"]
METHODS = ("lattice-contour", "lattice-relation", "lattice-eichler", "kernel")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CONVERGENCE = 0, 1, 2, 3


class InputError(Exception):
    pass


@dataclass(frozen=True)
class JobConfig:
    form: QuadraticForm
    alpha: AlphaShift
    v: float
    tol: Tolerance
    r_max: int
    method: str
    output: str
    seed: int


# --- parsing -----------------------------------------------------------------------

def _pair(text: str, name: str) -> List[float]:
    try:
        vals = [float(x) for x in str(text).split(",")]
    except ValueError as exc:
        raise InputError(f"{name} must be 'x,y', got {text!r}") from exc
    if len(vals) != 2:
        raise InputError(f"{name} must be 'x,y', got {text!r}")
    return vals


def _rational(text: str) -> Fraction:
    text = str(text).strip()
    if "." in text or "e" in text.lower():
        raise InputError(f"rationals are written as p/q, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational: {text!r}") from exc


def _load_config(path: Optional[str]) -> Dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("config file must hold a JSON object")
    return data


def _job_config(args, need_v: bool = True) -> JobConfig:
    """Merge the JSON config file (if any) with flags; flags win.

    With ``need_v=False`` (a sweep over ``v``) a missing ``v`` is allowed
    and set to a placeholder that every grid point replaces.
    """
    cfg = _load_config(getattr(args, "config", None))

    def pick(name, default=None):
        val = getattr(args, name, None)
        return val if val is not None else cfg.get(name, default)

    form = pick("form")
    alpha = pick("alpha")
    if form is None or alpha is None:
        raise InputError("--form and --alpha are required")
    if isinstance(form, (list, tuple)):
        form = ",".join(str(x) for x in form)
    if isinstance(alpha, (list, tuple)):
        alpha = ",".join(str(x) for x in alpha)
    Q = QuadraticForm.parse(str(form))
    al = AlphaShift.parse(str(alpha))
    v = pick("v")
    tau = pick("tau")
    if tau is not None:
        re, im = _pair(tau, "--tau") if isinstance(tau, str) else (float(tau[0]), float(tau[1]))
        if re != 0.0:
            raise InputError("H is evaluated on the imaginary axis only: --tau must be 0,v")
        v = im if v is None else v
    if v is None:
        if need_v:
            raise InputError("--v (or --tau 0,v) is required")
        v = 1.0
    v = float(v)
    if not v > 0:
        raise InputError("v must be positive")
    tol_val = float(pick("tol", 1e-9))
    method = pick("method", "kernel")
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}")
    output = pick("out", "csv")
    if output not in ("csv", "json"):
        raise InputError(f"unknown output format {output!r}")
    r_max = int(pick("r_max", 6))
    if r_max < 1:
        raise InputError("--r-max must be at least 1")
    try:
        tol = Tolerance.from_env(tol_val, tol_val)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return JobConfig(Q, al, v, tol, r_max, method, output, int(pick("seed", 0)))


# --- evaluation ----------------------------------------------------------------------

def _num(x) -> str:
    # adding 0.0 folds -0.0 into 0.0
    return repr(float(x) + 0.0)


def evaluate_H(cfg: JobConfig) -> Dict[str, str]:
    """One ``H_alpha(i v)`` record; ``converged`` is False on convergence failure."""
    Q, al = cfg.form, cfg.alpha
    base = {"method": cfg.method, "a1": str(Q.a1), "a2": str(Q.a2), "a3": str(Q.a3),
            "alpha1": str(al.alpha1), "alpha2": str(al.alpha2), "v": _num(cfg.v)}
    try:
        if cfg.method == "kernel":
            res = h_alpha_kernel(Q, al, cfg.v, cfg.tol)
            val, err, n, r_used, ok = res.value, res.err_est, res.n_evals, "", res.converged
        else:
            path = M2Path(cfg.method.split("-", 1)[1])
            rep = h_alpha_lattice(Q, al, cfg.v, cfg.r_max, m2_path=path)
            val, err, n, r_used, ok = rep.value, rep.err_est, rep.n_evals, str(rep.r_used), rep.converged
    except ConvergenceFailure as exc:
        log.warning("no convergence: %s", exc)
        return {**base, "value_re": "nan", "value_im": "nan", "err_est": "inf", "n_evals": "0",
                "r_used": str(cfg.r_max) if cfg.method != "kernel" else "", "converged": "false"}
    return {**base, "value_re": _num(complex(val).real), "value_im": _num(complex(val).imag),
            "err_est": _num(err), "n_evals": str(int(n)), "r_used": r_used,
            "converged": "true" if ok else "false"}


def _emit(rows: Sequence[Dict[str, str]], fields: Sequence[str], fmt: str, out) -> None:
    if fmt == "json":
        json.dump({"schema_version": SCHEMA_VERSION, "records": list(rows)}, out, indent=2, sort_keys=True)
        out.write("\n")
        return
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    out.write(buf.getvalue())


def cmd_eval(args, out) -> int:
    if args.what == "H":
        cfg = _job_config(args)
        row = evaluate_H(cfg)
        _emit([row], H_FIELDS, cfg.output, out)
        return EXIT_OK if row["converged"] == "true" else EXIT_CONVERGENCE
    fmt = args.out or "csv"
    if args.what == "errfn":
        return _eval_errfn(args, fmt, out)
    if args.what == "Ealpha":
        Q = QuadraticForm.parse(args.form or "")
        al = AlphaShift.parse(args.alpha or "")
        if args.tau is None:
            raise InputError("--tau re,im is required")
        tau = ModularPoint(complex(*_pair(args.tau, "--tau"))).tau
        r_max = args.r_max or 6
        try:
            val = double_eichler_E_alpha(Q, al, tau, r_max=r_max)
        except ConvergenceFailure as exc:
            log.warning("no convergence: %s", exc)
            return EXIT_CONVERGENCE
        row = {"a1": str(Q.a1), "a2": str(Q.a2), "a3": str(Q.a3), "alpha1": str(al.alpha1),
               "alpha2": str(al.alpha2), "tau_re": _num(tau.real), "tau_im": _num(tau.imag),
               "value_re": _num(val.real), "value_im": _num(val.imag), "r_used": str(r_max)}
        _emit([row], EALPHA_FIELDS, fmt, out)
        return EXIT_OK
    if args.what == "h":
        if args.tau is None or args.z is None:
            raise InputError("--z re,im and --tau re,im are required")
        z = complex(*_pair(args.z, "--z"))
        tau = ModularPoint(complex(*_pair(args.tau, "--tau"))).tau
        res = mordell_h(z, tau)
        row = {"z_re": _num(z.real), "z_im": _num(z.imag), "tau_re": _num(tau.real), "tau_im": _num(tau.imag),
               "value_re": _num(res.value.real), "value_im": _num(res.value.imag),
               "err_est": _num(res.err_est), "converged": "true" if res.converged else "false"}
        _emit([row], HONE_FIELDS, fmt, out)
        return EXIT_OK if res.converged else EXIT_CONVERGENCE
    raise InputError(f"unknown quantity {args.what!r}")


def _eval_errfn(args, fmt, out) -> int:
    if args.u is None:
        raise InputError("--u is required")
    try:
        us = [float(x) for x in args.u.split(",")]
    except ValueError as exc:
        raise InputError(f"--u must be numbers, got {args.u!r}") from exc
    kind = args.kind
    kappa = args.kappa if args.kappa is not None else 0.0
    path = args.path
    if kind in ("E", "M"):
        if len(us) != 1:
            raise InputError(f"{kind} takes a single --u")
        u1, u2 = us[0], None
        if kind == "E":
            val, path = err_E(u1), "definition"
        else:
            path = path or "relation"
            val = err_M(u1, path)
        kappa_s = ""
    else:
        if len(us) != 2:
            raise InputError(f"{kind} takes --u u1,u2")
        u1, u2 = us
        kappa_s = _num(kappa)
        if kind == "E2":
            val, path = err_E2(kappa, u1, u2), "sectors"
        else:
            path = path or "relation"
            if path not in ("relation", "contour"):
                raise InputError(f"unknown path {path!r}")
            val = err_M2(kappa, u1, u2) if path == "relation" else err_M2_contour(kappa, u1, u2)
    row = {"kind": kind, "kappa": kappa_s, "u1": _num(u1), "u2": "" if u2 is None else _num(u2),
           "value": _num(val), "path": path}
    _emit([row], ERRFN_FIELDS, fmt, out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    try:
        report = run_suite(args.suite, args.tol_scale, args.seed or 0)
    except ConvergenceFailure as exc:
        log.error("evaluation failed to converge: %s", exc)
        return EXIT_CONVERGENCE
    json.dump(report.to_dict(), out, indent=2)
    out.write("\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def _sweep_values(args) -> List:
    if args.values:
        items = [x for x in args.values.split(",") if x.strip()]
        if args.param == "alpha1":
            return [_rational(x) for x in items]
        if args.param == "r":
            return [int(x) for x in items]
        return [float(x) for x in items]
    if args.range is None or args.steps is None:
        raise InputError("sweep needs --values or --range lo,hi with --steps")
    if args.steps < 2:
        raise InputError("--steps must be at least 2")
    if args.param == "r":
        lo, hi = (int(x) for x in args.range.split(","))
        if hi < lo or lo < 1:
            raise InputError("--range for r must be 1 <= lo <= hi")
        return sorted({int(round(x)) for x in np.linspace(lo, hi, args.steps)})
    if args.param == "alpha1":
        lo, hi = (_rational(x) for x in args.range.split(","))
        return [lo + (hi - lo) * Fraction(k, args.steps - 1) for k in range(args.steps)]
    lo, hi = _pair(args.range, "--range")
    return [float(x) for x in np.linspace(lo, hi, args.steps)]


def cmd_sweep(args, out) -> int:
    cfg = _job_config(args, need_v=args.param != "v")
    rows = []
    for val in _sweep_values(args):
        if args.param == "v":
            if not val > 0:
                raise InputError("v must be positive")
            job = replace(cfg, v=val)
        elif args.param == "alpha1":
            job = replace(cfg, alpha=AlphaShift(val, cfg.alpha.alpha2))
        else:
            job = replace(cfg, r_max=val)
        rows.append(evaluate_H(job))
    _emit(rows, H_FIELDS, cfg.output, out)
    return EXIT_OK if all(r["converged"] == "true" for r in rows) else EXIT_CONVERGENCE


# --- argument parser ------------------------------------------------------------------

def _add_job_flags(p):
    p.add_argument("--form", help="quadratic form coefficients 'a1,a2,a3'")
    p.add_argument("--alpha", help="rational shift 'p/q,r/s'")
    p.add_argument("--v", type=float, help="imaginary part of tau (tau = i v)")
    p.add_argument("--tau", help="tau as 're,im'")
    p.add_argument("--tol", type=float, help="absolute and relative tolerance (default 1e-9)")
    p.add_argument("--r-max", dest="r_max", type=int, help="lattice box radius (default 6)")
    p.add_argument("--method", choices=METHODS, help="evaluation pipeline (default kernel)")
    p.add_argument("--out", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--config", help="JSON file with any of the above keys; flags override it")
    p.add_argument("--seed", type=int, help="seed for randomised diagnostics")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mordell", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("eval", help="evaluate one quantity")
    pe.add_argument("what", choices=("H", "errfn", "Ealpha", "h"))
    _add_job_flags(pe)
    pe.add_argument("--kind", choices=("E", "M", "E2", "M2"), default="M2", help="error function (errfn)")
    pe.add_argument("--kappa", type=float, help="kappa for E2/M2")
    pe.add_argument("--u", help="argument u or 'u1,u2'")
    pe.add_argument("--path", choices=("relation", "contour"), help="evaluation path for M/M2")
    pe.add_argument("--z", help="z as 're,im' for the one-dimensional Mordell integral")

    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("--suite", choices=tuple(SUITES), default="all")
    pv.add_argument("--tol-scale", dest="tol_scale", type=float, default=1.0,
                    help="multiply every check tolerance by this factor")
    pv.add_argument("--seed", type=int, default=0)

    ps = sub.add_parser("sweep", help="evaluate H over a parameter grid")
    _add_job_flags(ps)
    ps.add_argument("--param", choices=("v", "alpha1", "r"), required=True)
    ps.add_argument("--range", help="'lo,hi' (rationals for alpha1, integers for r)")
    ps.add_argument("--steps", type=int, help="number of grid points (>= 2)")
    ps.add_argument("--values", help="explicit comma separated grid instead of --range")
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"eval": cmd_eval, "verify": cmd_verify, "sweep": cmd_sweep}
    try:
        return handlers[args.command](args, out)
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except MordellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
