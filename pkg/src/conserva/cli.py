"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 no formal equilibrium,
3 empty certificate family, 4 runtime or domain failure.

Trajectory CSV columns, in order: ``t``, the state coordinates
(``x1..xn`` for the replicator field, ``y1..ym`` for Lotka-Volterra,
``u1..um`` for the two u-chart fields), ``H`` when a constant of motion is
observed, and ``sum_diag`` (``sum(x) - 1``) for replicator runs. Values use
17 significant digits. A run that stops early ends with a
``# status=...`` comment line.

Set ``CONSERVA_LOG`` to error, warn, info or debug for diagnostics on
standard error.
"""

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .analysis import (EXIT_EMPTY_FAMILY, EXIT_INPUT, EXIT_OK, EXIT_RUNTIME, METHODS,
                       analyze, report, verification)
from .conservation import ConstantOfMotion, make_certificate
from .dirac import classify
from .dynamics import FIELD_CHART, IntegratorConfig, integrate
from .exceptions import ConservaError, InputError, InvalidCertificateError
from .linalg import DEFAULT_RANK_TOL
from .systems import (LotkaVolterraSystem, ReplicatorSystem, lv_to_replicator,
                      replicator_to_lv)

log = logging.getLogger("conserva")

_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
           "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    level = _LEVELS.get(os.environ.get("CONSERVA_LOG", "warn").lower(), logging.WARNING)
    root = logging.getLogger("conserva")
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("conserva %(levelname)s: %(message)s"))
        root.addHandler(handler)
    root.setLevel(level)


def _emit(text, out=None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _floats(text, flag):
    try:
        return np.array([float(v) for v in text.replace(" ", "").split(",") if v], dtype=float)
    except ValueError:
        raise InputError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


# --- subcommands -------------------------------------------------------------

def _analyze_one(path, args):
    system, hint = io.load_system(path)
    res = analyze(system, args.method, args.rank_tol, hint)
    rep = report(res, io.system_to_dict(system, hint), args.samples, args.seed)
    return io.dumps(_sanitize(rep)), res.exit_code


def cmd_analyze(args):
    if args.input_dir:
        if not args.out:
            raise InputError("--input-dir needs --out DIR")
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        paths = sorted(Path(args.input_dir).glob("*.json"))

        def run(p):
            try:
                text, code = _analyze_one(p, args)
            except InputError as exc:
                log.error("%s", exc)
                return p, EXIT_INPUT
            (outdir / f"{p.stem}.report.json").write_text(text)
            return p, code

        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            codes = [code for _, code in pool.map(run, paths)]
        return max(codes, default=EXIT_OK)
    if not args.input:
        raise InputError("analyze needs an input file or --input-dir")
    text, code = _analyze_one(args.input, args)
    _emit(text, args.out)
    if code == EXIT_EMPTY_FAMILY:
        log.warning("no certificate found by this method (the method is sufficient, "
                    "not necessary, for conservativity)")
    return code


def _constant_for(args, system, hint, field_name):
    """Constant of motion in the natural chart of ``field_name``, or None."""
    res = analyze(system, "general", args.rank_tol, hint)
    if res.q is None:
        return None, res
    if args.certificate:
        D = io.load_certificate(args.certificate)
        cert = make_certificate(D, res.q, res.B)
    elif res.certificate is not None:
        cert = res.certificate
    else:
        return None, res
    return ConstantOfMotion(cert.c, cert.g, FIELD_CHART[field_name]), res


def cmd_simulate(args):
    system, hint = io.load_system(args.input)
    given = [(f, v) for f, v in (("x0", args.x0), ("y0", args.y0), ("u0", args.u0)) if v]
    if len(given) != 1:
        raise InputError("give exactly one of --x0, --y0, --u0")
    flag, raw = given[0]
    x0 = _floats(raw, "--" + flag)
    if flag == "x0":
        field_name = "replicator"
        sys_arg = system if isinstance(system, ReplicatorSystem) else lv_to_replicator(system)
    elif flag == "y0":
        field_name = "lv"
        sys_arg = system if isinstance(system, LotkaVolterraSystem) else replicator_to_lv(system)
    else:
        field_name = args.u_field
        sys_arg = None
    com, res = (None, None)
    if args.observe == "H" or field_name in ("xtilde", "ybold"):
        com, res = _constant_for(args, system, hint, field_name)
        if args.observe != "H":
            com = None
    if sys_arg is None:
        if res is None or res.q is None:
            raise InputError("u-chart integration needs a formal equilibrium")
        sys_arg = (res.B, res.q)
    if args.method == "rk4":
        cfg = IntegratorConfig(method="rk4", step=args.step, t_end=args.t_end,
                               max_steps=args.max_steps, record_every=args.record_every)
    else:
        cfg = IntegratorConfig(abs_tol=args.tol, rel_tol=args.tol, t_end=args.t_end,
                               max_steps=args.max_steps, record_every=args.record_every)
    traj = integrate(field_name, sys_arg, x0, cfg, com)
    if args.csv:
        io.write_trajectory_csv(traj, args.csv)
    if args.plot_data:
        io.write_plot_data(traj, args.plot_data)
    summary = traj.drift_summary()
    summary["field"] = field_name
    summary["config"] = {"method": cfg.method, "step": cfg.step, "abs_tol": cfg.abs_tol,
                         "rel_tol": cfg.rel_tol, "t_end": cfg.t_end}
    summary["constant_of_motion"] = com.to_dict() if com is not None else None
    if args.observe == "H" and com is None:
        summary["message"] = (summary["message"] + "; " if summary["message"] else "") + \
            "no certificate available, H not observed"
    _emit(io.dumps(_sanitize(summary)), args.summary)
    return EXIT_OK if traj.completed else EXIT_RUNTIME


def cmd_convert(args):
    system, hint = io.load_system(args.input)
    if args.to == "lv":
        out = system if isinstance(system, LotkaVolterraSystem) else replicator_to_lv(system)
    else:
        out = system if isinstance(system, ReplicatorSystem) else lv_to_replicator(system)
    _emit(io.dumps(io.system_to_dict(out)), args.out)
    return EXIT_OK


def cmd_classify(args):
    system, hint = io.load_system(args.input)
    res = analyze(system, "general", args.rank_tol, hint)
    if res.q is None:
        _emit(io.dumps({"classification": None, "message": res.message}), args.out)
        return res.exit_code
    if args.certificate:
        D = io.load_certificate(args.certificate)
        try:
            cert = make_certificate(D, res.q, res.B)
        except InvalidCertificateError as exc:
            sys.stderr.write(f"invalid certificate: skew residual {exc.skew_residual:.6e}, "
                             f"off-diagonal residual {exc.offdiag_residual:.6e}\n")
            return EXIT_INPUT
    elif res.certificate is not None:
        cert = res.certificate
    else:
        _emit(io.dumps({"classification": None, "message": res.message}), args.out)
        return EXIT_EMPTY_FAMILY
    cls = classify(res.B, cert.D, args.rank_tol)
    _emit(io.dumps(_sanitize({"classification": cls.to_dict(), "D": cert.D.tolist(),
                              "B": res.B.tolist()})), args.out)
    return EXIT_OK


def cmd_check(args):
    system, hint = io.load_system(args.input)
    res = analyze(system, "both", args.rank_tol, hint)
    out = verification(res, args.samples, args.seed) if res.q is not None else {}
    _emit(io.dumps(_sanitize({"verification": out})), args.out)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code instead of argparse's 2,
    which is reserved for "no formal equilibrium"."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="conserva", description=__doc__.split("\n\n")[0],
                                epilog=__doc__.split("\n\n", 1)[1],
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, input_required=True):
        if input_required:
            sp.add_argument("input", help="system JSON file")
        sp.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL,
                        help="relative singular-value threshold (default: %(default)s)")
        sp.add_argument("--out", help="write JSON here instead of stdout")

    a = sub.add_parser("analyze", help="full certificate analysis, JSON report")
    a.add_argument("input", nargs="?", help="system JSON file")
    common(a, input_required=False)
    a.add_argument("--method", choices=METHODS, default="general")
    a.add_argument("--samples", type=int, default=20)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--input-dir", help="analyze every *.json here; --out is a directory")
    a.add_argument("--jobs", type=int, default=4)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="integrate a flow, CSV trajectory + drift JSON",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       description="CSV columns: t, state columns, H?, sum_diag? "
                                   "(see `conserva --help`).")
    common(s)
    s.add_argument("--x0", help="replicator initial point, comma separated")
    s.add_argument("--y0", help="Lotka-Volterra initial point")
    s.add_argument("--u0", help="u-chart initial point")
    s.add_argument("--u-field", choices=("xtilde", "ybold"), default="xtilde",
                   help="u-chart field used with --u0 (default: %(default)s)")
    s.add_argument("--t-end", type=float, default=10.0)
    s.add_argument("--method", choices=("rk45", "rk4"), default="rk45")
    s.add_argument("--tol", type=float, default=1e-10, help="rk45 abs/rel tolerance")
    s.add_argument("--step", type=float, default=1e-2, help="rk4 step")
    s.add_argument("--max-steps", type=int, default=1_000_000)
    s.add_argument("--record-every", type=int, default=1)
    s.add_argument("--observe", choices=("H", "none"), default="H")
    s.add_argument("--certificate", help="JSON file with a certificate matrix D")
    s.add_argument("--csv", help="trajectory CSV output")
    s.add_argument("--summary", help="drift summary JSON output (default stdout)")
    s.add_argument("--plot-data", metavar="PREFIX",
                   help="write PREFIX_H.csv and PREFIX_phase_*.csv")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("convert", help="replicator <-> Lotka-Volterra")
    common(c)
    c.add_argument("--to", choices=("replicator", "lv"), required=True)
    c.set_defaults(func=cmd_convert)

    k = sub.add_parser("classify", help="structure generated by (B, D)")
    common(k)
    k.add_argument("--certificate", help="JSON file with D; searched for when omitted")
    k.set_defaults(func=cmd_classify)

    ch = sub.add_parser("check", help="identity and gradient residuals")
    common(ch)
    ch.add_argument("--samples", type=int, default=20)
    ch.add_argument("--seed", type=int, default=0)
    ch.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"conserva: input error: {exc}\n")
        return EXIT_INPUT
    except InvalidCertificateError as exc:
        sys.stderr.write(f"conserva: {exc}\n")
        return EXIT_INPUT
    except ConservaError as exc:
        sys.stderr.write(f"conserva: {exc}\n")
        return EXIT_RUNTIME
    except (ArithmeticError, np.linalg.LinAlgError, OSError) as exc:
        sys.stderr.write(f"conserva: runtime failure: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
