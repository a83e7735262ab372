"""Command-line front end: ``pedalcurve <subcommand> ...``."""
from __future__ import annotations

import argparse
import os
import re
import sys
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from . import emit as em
from .curves import CURVES, catalog, curve_to_pedal_samples, pedal_to_polar
from .errors import ExprSyntaxError, PedalError
from .expr import PowerSum
from .mechanics import (ForceSpec, allowed_region, conserved_quantities, drift, force_to_pedal,
                        integrate_orbit, pedal_residual)
from .parser import parse_pedal_equation, parse_power_sum
from .paths import PolarPath
from .problems import (DarkParams, SchwarzschildParams, dark_reduce, dark_shift_params,
                       oval_match, schwarzschild_equation, schwarzschild_reduce)
from .spirals import EllipticTriple, classify_spiral, recover_sn_params
from .transforms import apply_transform, parse_pipeline

GRAMMAR = """expression grammar:
  equation   := expr '=' expr          in r and p (pedal) or s (forces)
  expr       := term (('+'|'-') term)*
  term       := unary (('*'|'/') unary)*
  unary      := '-' unary | factor
  factor     := base ('^' exponent)?   exponent is a rational constant
  base       := number | name | '(' expr ')'
pipelines: transforms joined by '*', rightmost applied first,
  e.g. "H(2)", "H(2) * Estar(-1/2) * S(3)", "A(w)" with --const w=1/3"""


def number(text: str):
    """Exact rational when the literal allows it, float otherwise."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def vector(text: str):
    parts = text.replace(" ", "").split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}")
    return np.array([float(number(p)) for p in parts])


def binding(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    name, value = text.split("=", 1)
    return name.strip(), number(value)


def _constants(args) -> Dict[str, object]:
    return dict(getattr(args, "const", None) or [])


def _write(data: bytes, out: Optional[str]):
    if out:
        with open(out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode("utf-8"))


def _format_for(out: Optional[str], default: str) -> str:
    if out:
        ext = os.path.splitext(out)[1].lower().lstrip(".")
        if ext in ("csv", "json", "svg"):
            return ext
        raise PedalUsage(f"unsupported output extension {ext!r} (csv, json or svg)")
    return default


class PedalUsage(Exception):
    pass


def _default_tol() -> float:
    env = os.environ.get("PEDALCURVE_TOL")
    return float(env) if env else 1e-10


def _force(args) -> ForceSpec:
    consts = _constants(args)
    F = parse_power_sum(args.F, consts, var="s") if args.F else PowerSum()
    G = parse_power_sum(args.G, consts, var="s") if args.G else PowerSum()
    return ForceSpec(F, G)


# ---------------------------------------------------------------- subcommands

def cmd_transform(args):
    consts = _constants(args)
    e = parse_pedal_equation(args.eq, consts)
    t = parse_pipeline(args.pipe, consts)
    print(apply_transform(t, e).render())


def cmd_force2pedal(args):
    e = force_to_pedal(_force(args), args.L, args.c)
    print(e.render())
    if args.json:
        _write(em.to_json("region", allowed_region(e).to_dict()), None)
        return
    rep = allowed_region(e)
    spans = ", ".join(f"[{em.fmt(lo)}, {'inf' if hi == float('inf') else em.fmt(hi)}]"
                      for lo, hi in rep.admissible_intervals) or "none"
    roots = ", ".join(em.fmt(v) + (f" (x{k})" if k > 1 else "") for v, _, k in rep.roots) or "none"
    print(f"region: nu={rep.nu} N={rep.N} roots {roots}; admissible r in {spans}")


def cmd_orbit(args):
    fs = _force(args)
    tol = args.tol if args.tol is not None else _default_tol()
    tr = integrate_orbit(fs, args.x0, args.v0, args.t, tol)
    fmt_name = _format_for(args.out, "csv")
    _write(em.emit(tr, fmt_name), args.out)
    oc = conserved_quantities(args.x0, args.v0, fs)
    dL, dc = drift(tr, fs)
    lines = [f"L = {em.fmt(oc.L)}", f"c = {em.fmt(oc.c)}",
             f"drift_L = {dL:.3e}", f"drift_c = {dc:.3e}"]
    if args.check_eq:
        e = force_to_pedal(fs, oc.L, oc.c)
        res = pedal_residual(tr, e)
        lines.append(f"pedal_residual max_rel = {res['max_rel']:.3e} rms = {res['rms']:.3e}")
    sys.stderr.write("\n".join(lines) + "\n")


def cmd_plot(args):
    e = parse_pedal_equation(args.eq, _constants(args))
    path = pedal_to_polar(e, float(args.r0), span=float(args.rev), branch=args.branch)
    fmt_name = _format_for(args.out, "csv")
    _write(em.emit(path, fmt_name), args.out)
    if args.figure:
        from .plotting import plot_paths
        plot_paths([path], args.figure, labels=[e.render()])


def cmd_classify(args):
    t = EllipticTriple(args.a, args.beta, args.gamma, args.alpha)
    family = classify_spiral(t)
    doc = {"family": family, "equation": t.equation().render()}
    if family == "sn" and all(isinstance(x, Fraction) for x in (args.a, args.beta, args.gamma)):
        rec = recover_sn_params(t)
        doc["recovered"] = {"c2": str(rec.c2), "l2": str(rec.l2), "k2": str(rec.k2),
                            "c": rec.c, "k": rec.k, "l2_alternative": str(rec.l2_printed),
                            "validating_form": rec.validating_form}
    _write(em.to_json("classification", doc), None)


def cmd_schwarzschild(args):
    sp = SchwarzschildParams(args.rs, args.a, args.b)
    e, rep = schwarzschild_equation(sp)
    doc = {"equation": e.render(), "d": float(sp.d), "region": rep.to_dict()}
    if args.reduce:
        doc["reduction"] = schwarzschild_reduce(sp).to_dict()
    _write(em.to_json("schwarzschild", doc), None)


def cmd_dark(args):
    dp = DarkParams.from_omega(args.M, args.F, args.omega, args.L, args.c)
    if args.reduce:
        alpha = dark_reduce(dp)
        sh = dark_shift_params(alpha, dp)
        doc = {"alpha": float(alpha),
               "shifted": {"M": float(sh.M), "F": float(sh.F), "omega2": float(sh.omega2),
                           "L": float(sh.L), "c": float(sh.c)},
               "oval": oval_match(sh).to_dict()}
        _write(em.to_json("dark_reduction", doc), None)
        return
    if args.oval:
        _write(em.to_json("oval", oval_match(dp).to_dict()), None)
        return
    from .problems import dark_equation, dark_rotating
    print(dark_equation(dp).render())
    print(dark_rotating(dp).render())


def cmd_catalog(args):
    if args.name is None:
        print("\n".join(CURVES))
        return
    params = dict(args.params or [])
    entry = catalog(args.name, **params)
    print(entry.equation.render())
    if args.out:
        if entry.sampler is None:
            raise PedalUsage(f"{args.name} has no sampler")
        s = entry.sampler
        t = s.grid(args.n, margin=0.01)
        pts = s.point(t)
        phi = np.unwrap(np.arctan2(pts[:, 1], pts[:, 0]))
        r, p = curve_to_pedal_samples(s, t=t)
        path = PolarPath(r, phi, [], s.closed, p)
        _write(em.emit(path, _format_for(args.out, "csv")), args.out)


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        # let "-1/2" and "-1e-3" through as values
        self._negative_number_matcher = re.compile(r"^-(\d+(/\d+)?|\d*\.?\d+([eE][-+]?\d+)?)$")

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n{GRAMMAR}\n")
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pedalcurve", description="Pedal-coordinate curve toolkit.",
                 formatter_class=argparse.RawDescriptionHelpFormatter, epilog=GRAMMAR)
    ap.add_argument("--seed", type=int, default=0, help="seed for any randomized step")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_consts(p):
        p.add_argument("--const", type=binding, action="append", metavar="NAME=VALUE",
                       help="bind a named constant (repeatable)")
        return p

    p = with_consts(sub.add_parser("transform", help="apply a transform pipeline to a pedal equation"))
    p.add_argument("--eq", required=True)
    p.add_argument("--pipe", required=True)
    p.set_defaults(func=cmd_transform)

    p = with_consts(sub.add_parser("force2pedal", help="pedal equation of orbits under a force"))
    p.add_argument("--F", default="", help="potential F as a function of s = r^2")
    p.add_argument("--G", default="", help="Lorentz-like potential G(s)")
    p.add_argument("--L", type=number, required=True)
    p.add_argument("--c", type=number, required=True)
    p.add_argument("--json", action="store_true", help="print the region report as JSON")
    p.set_defaults(func=cmd_force2pedal)

    p = with_consts(sub.add_parser("orbit", help="integrate an orbit"))
    p.add_argument("--F", default="")
    p.add_argument("--G", default="")
    p.add_argument("--x0", type=vector, required=True)
    p.add_argument("--v0", type=vector, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--check-eq", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_orbit)

    p = with_consts(sub.add_parser("plot", help="reconstruct a curve from its pedal equation"))
    p.add_argument("--eq", required=True)
    p.add_argument("--r0", type=number, required=True)
    p.add_argument("--rev", type=number, default=1)
    p.add_argument("--branch", type=int, choices=(1, -1), default=1)
    p.add_argument("--out", default=None, help="output file (.svg, .csv or .json)")
    p.add_argument("--figure", default=None, help="also render a matplotlib figure (e.g. x.png)")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("classify", help="spiral family of 1/p^2 = a/r^2 + beta r^(2a) + gamma/r^(2a+2)")
    p.add_argument("--a", type=number, required=True)
    p.add_argument("--beta", type=number, required=True)
    p.add_argument("--gamma", type=number, required=True)
    p.add_argument("--alpha", type=number, default=1)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("schwarzschild", help="relativistic Kepler orbit regions")
    p.add_argument("--rs", type=number, required=True)
    p.add_argument("--a", type=number, required=True)
    p.add_argument("--b", type=number, required=True)
    p.add_argument("--reduce", action="store_true")
    p.set_defaults(func=cmd_schwarzschild)

    p = sub.add_parser("dark", help="Kepler problem with dark energy and dark matter")
    for name in ("M", "F", "omega", "L", "c"):
        p.add_argument(f"--{name}", type=number, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--oval", action="store_true")
    g.add_argument("--reduce", action="store_true")
    p.set_defaults(func=cmd_dark)

    p = sub.add_parser("catalog", help="pedal equations of named curves")
    p.add_argument("--name", default=None, help="curve name; omit to list")
    p.add_argument("--params", type=binding, nargs="*", metavar="NAME=VALUE")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_catalog)
    return ap


def run(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    np.random.seed(args.seed)
    try:
        args.func(args)
    except ExprSyntaxError as exc:
        # malformed DSL text is a usage error
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n{GRAMMAR}\n")
        return 2
    except PedalError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 1
    except PedalUsage as exc:
        sys.stderr.write(f"usage error: {exc}\n{GRAMMAR}\n")
        return 2
    sys.stdout.flush()
    return 0


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
