"""Command-line front end: q-expansions, decompositions, brackets, L-values and checks."""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from fractions import Fraction

import mpmath
from mpmath import mp

from .errors import InvalidWeightError, ParseError, QMFormsError
from .forms import components, decompose, qexp
from .parser import parse, parse_form, to_source

EXIT_OK, EXIT_USAGE, EXIT_MATH, EXIT_VERIFY = 0, 1, 2, 3

DEFAULTS = {"t0": "1.05", "prec": "256", "trunc": None, "branch-angle": "5pi/4"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# value parsing and formatting

def parse_complex(text: str):
    """'3', '23/2', '-1.5-2i', '2i', '0.3+0.4i' -> mpc."""
    t = text.replace(" ", "")
    m = re.fullmatch(r"([+-]?[\d.]+(?:/\d+)?)?(?:([+-])([\d.]*)i)?", t)
    if t.endswith("i") and not m:
        m = None
    if not m or not t:
        m2 = re.fullmatch(r"([+-]?[\d.]*)i", t)
        if not m2:
            raise UsageError(f"cannot parse complex number {text!r}")
        im = m2.group(1)
        im = {"": "1", "+": "1", "-": "-1"}.get(im, im)
        return mpmath.mpc(0, mpmath.mpf(im))
    re_part = m.group(1)
    if re_part is not None and re_part.endswith("i"):
        raise UsageError(f"cannot parse complex number {text!r}")
    re_val = mpmath.mpf(Fraction(re_part).numerator) / Fraction(re_part).denominator \
        if re_part and "/" in re_part else mpmath.mpf(re_part or 0)
    im_val = mpmath.mpf(0)
    if m.group(2):
        mag = m.group(3) or "1"
        im_val = mpmath.mpf(mag) * (-1 if m.group(2) == "-" else 1)
    return mpmath.mpc(re_val, im_val)


def parse_angle(text: str) -> float:
    t = text.replace(" ", "").lower().replace("π", "pi")
    m = re.fullmatch(r"(\d*)\*?pi(?:/(\d+))?", t)
    if m:
        num = int(m.group(1) or 1)
        den = int(m.group(2) or 1)
        return num * math.pi / den
    try:
        return float(t)
    except ValueError:
        raise UsageError(f"cannot parse angle {text!r}") from None


def _digits(prec: int) -> int:
    return max(15, int(prec * 0.30103) - 12)


def fmt_real(x, digits) -> str:
    x = mpmath.mpf(x)
    if x == 0:
        return "0"
    return mpmath.nstr(x, digits, min_fixed=-4, max_fixed=6)


def fmt_complex(z, digits) -> str:
    z = mpmath.mpc(z)
    re_s = fmt_real(z.real, digits)
    im = z.imag
    if im == 0:
        return re_s
    sign = "-" if im < 0 else "+"
    return f"{re_s} {sign} {fmt_real(abs(im), digits)}i"


def pair(z, digits):
    z = mpmath.mpc(z)
    return [fmt_real(z.real, digits), fmt_real(z.imag, digits)]


def fmt_res(x) -> str:
    return f"{float(x):.3e}"


# ---------------------------------------------------------------------------
# configuration

def load_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            k, v = (p.strip() for p in line.split("=", 1))
            k = k.replace("_", "-")
            if k not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {k!r}")
            out[k] = v
    return out


def settings(args) -> dict:
    conf = dict(DEFAULTS)
    if getattr(args, "config", None):
        conf.update(load_config(args.config))
    for key in DEFAULTS:
        v = getattr(args, key.replace("-", "_"), None)
        if v is not None:
            conf[key] = v
    try:
        out = {"t0": float(conf["t0"]), "prec": int(conf["prec"]),
               "trunc": None if conf["trunc"] in (None, "", "adaptive") else int(conf["trunc"]),
               "theta": parse_angle(str(conf["branch-angle"]))}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if out["prec"] < 64:
        raise UsageError("precision must be at least 64 bits")
    return out


def make_context(f, conf):
    from .lfun import LContext
    from .specfun import BranchConfig
    try:
        branch = BranchConfig(conf["theta"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return LContext.for_form(f, t0=conf["t0"], prec=conf["prec"], branch=branch, trunc=conf["trunc"])


# ---------------------------------------------------------------------------
# commands

def cmd_qexp(args, out):
    f = parse_form(args.expr)
    N = args.terms
    s = qexp(f, N - 1)
    if args.json:
        return {"expr": to_source(parse(args.expr)), "weight": f.weight, "depth": f.depth,
                "series": s.to_json()}
    out.append(s.to_str())


def cmd_info(args, out):
    f = parse_form(args.expr)
    comps = components(f)
    if args.json:
        return {"expr": to_source(parse(args.expr)), "form": str(f), "weight": f.weight,
                "depth": f.depth, "modular": f.is_modular(),
                "components": [str(c) for c in comps]}
    out.append(f"form: {f}")
    out.append(f"weight: {f.weight}")
    out.append(f"depth: {f.depth}")
    for r, c in enumerate(comps):
        out.append(f"f_{r} = {c}")


def cmd_decompose(args, out):
    f = parse_form(args.expr)
    dec = decompose(f)
    if dec.resynthesize() != f:
        raise QMFormsError("decomposition failed to re-synthesize")
    if args.json:
        return dec.to_json()
    out.append(f"weight: {dec.weight}")
    for label, block in (("modular", dec.first), ("middle", dec.middle), ("high", dec.third)):
        for l, F in block:
            out.append(f"{label} l={l}: {F}")
    if not (dec.first or dec.middle or dec.third):
        out.append("zero")


def cmd_bracket(args, out):
    from .brackets import rc_bracket, rc_bracket_quasi, serre_rc_bracket
    f, g = parse_form(args.f), parse_form(args.g)
    if args.serre:
        res = serre_rc_bracket(f, g, args.n)
    elif f.depth == 0 and g.depth == 0:
        res = rc_bracket(f, g, args.n)
    else:
        res = rc_bracket_quasi(f, g, args.n)
    if args.json:
        return {"weight": res.weight, "depth": res.depth, "zero": res.is_zero(), "form": str(res)}
    out.append(str(res))


def _lvalue_report(f, s, ctx):
    from .lfun import lambda_value
    return lambda_value(f, s, ctx)


def cmd_lvalue(args, out):
    from .lfun import NearPoleError
    conf = settings(args)
    f = parse_form(args.expr)
    s = parse_complex(args.s)
    dg = _digits(conf["prec"])
    with mp.workprec(conf["prec"]):
        ctx = make_context(f, conf)
        try:
            rep = _lvalue_report(f, s, ctx)
        except NearPoleError as exc:
            exc.digits = dg
            raise
        L = rep.L
        if mpmath.im(s) == 0 and mpmath.re(s) <= 0 and mpmath.re(s) == int(mpmath.re(s)):
            from .lfun import dirichlet_l
            L = dirichlet_l(f, s, ctx)
        if args.json:
            return {"s": pair(s, dg), "lambda": pair(rep.lam, dg), "l": pair(L, dg),
                    "terms": {k: pair(v, dg) for k, v in sorted(rep.terms.items())},
                    "err": float(f"{rep.error_bound:.3e}"), "t0": rep.t0}
        out.append(f"s = {fmt_complex(s, dg)}")
        out.append(f"t0 = {rep.t0:g}")
        out.append(f"Lambda = {fmt_complex(rep.lam, dg)}")
        out.append(f"L = {fmt_complex(L, dg)}")
        out.append(f"error bound = {rep.error_bound:.3e}")


def _grid(args):
    if args.s:
        return [parse_complex(x) for x in args.s.split(",")]
    if args.start is None or args.stop is None:
        raise UsageError("give --s or both --from and --to")
    a, b = Fraction(args.start), Fraction(args.stop)
    step = Fraction(args.step)
    if step <= 0:
        raise UsageError("--step must be positive")
    pts = []
    x = a
    while x <= b:
        pts.append(mpmath.mpf(x.numerator) / x.denominator)
        x += step
    return [mpmath.mpc(p) for p in pts]


def cmd_table(args, out):
    from .lfun import NearPoleError, dirichlet_l, lambda_value
    conf = settings(args)
    f = parse_form(args.expr)
    dg = min(_digits(conf["prec"]), 30)
    rows = []
    with mp.workprec(conf["prec"]):
        ctx = make_context(f, conf)
        for s in _grid(args):
            try:
                rep = lambda_value(f, s, ctx)
                lam, L = rep.lam, rep.L
                if mpmath.im(s) == 0 and mpmath.re(s) <= 0 and mpmath.re(s) == int(mpmath.re(s)):
                    L = dirichlet_l(f, s, ctx)
                rows.append((s, lam, L, ""))
            except NearPoleError as exc:
                rows.append((s, None, dirichlet_l(f, s, ctx) if mpmath.re(s) <= 0 else None,
                             f"pole residue {fmt_complex(exc.residue, dg)}"))
        # format inside the precision block: re/im convert at the ambient precision
        if args.json:
            return [{"s": pair(s, dg), "lambda": None if lam is None else pair(lam, dg),
                     "l": None if L is None else pair(L, dg), "note": note} for s, lam, L, note in rows]
        if args.format == "csv":
            out.append("s_re,s_im,lambda_re,lambda_im,l_re,l_im,note")
            for s, lam, L, note in rows:
                cells = pair(s, dg) + (pair(lam, dg) if lam is not None else ["", ""]) \
                    + (pair(L, dg) if L is not None else ["", ""]) + [note]
                out.append(",".join(cells))
        else:
            for s, lam, L, note in rows:
                lam_s = "pole" if lam is None else fmt_complex(lam, dg)
                L_s = "" if L is None else fmt_complex(L, dg)
                out.append(f"{fmt_complex(s, dg)}\t{lam_s}\t{L_s}" + (f"\t{note}" if note else ""))


_FE_SAMPLES = ("0.3+0.4i", "1.7-2.1i", "-0.6+1.3i")


def cmd_check(args, out):
    conf = settings(args)
    kind = args.kind
    tol = args.tol
    with mp.workprec(conf["prec"]):
        if kind == "hadamard":
            report = _check_hadamard(args, conf)
        elif kind == "rc":
            report = _check_rc(args)
        else:
            if not args.exprs:
                raise UsageError(f"check {kind} needs an expression")
            f = parse_form(args.exprs[0])
            report = {"fe": _check_fe, "shift": _check_shift, "t0": _check_t0,
                      "residues": _check_residues}[kind](f, args, conf)
    tol = report.pop("tol", tol)
    passed = report.get("pass", report["residual"] < tol)
    report = {"check": kind, "pass": bool(passed), "residual": fmt_res(report["residual"]),
              "tolerance": fmt_res(tol), **{k: v for k, v in report.items() if k not in ("pass", "residual")}}
    if args.json:
        out.append(json.dumps(report, sort_keys=True))
    else:
        out.append(f"{'PASS' if passed else 'FAIL'} {kind}: max residual {report['residual']} "
                   f"(tolerance {report['tolerance']})")
        for k, v in report.items():
            if k not in ("check", "pass", "residual", "tolerance"):
                out.append(f"  {k}: {v}")
    return None if passed else EXIT_VERIFY


def _check_fe(f, args, conf):
    from .lfun import verify_functional_equation
    ctx = make_context(f, conf)
    samples = [parse_complex(s) for s in _FE_SAMPLES]
    worst = max(verify_functional_equation(f, samples, ctx, m) for m in range(f.depth + 1))
    return {"residual": worst, "samples": len(samples), "depth": f.depth}


def _check_shift(f, args, conf):
    from .lfun import verify_shift
    ctx = make_context(f, conf)
    samples = [parse_complex(s) for s in _FE_SAMPLES]
    lam, L = verify_shift(f, args.l, samples, ctx)
    return {"residual": max(lam, L), "l": args.l}


def _check_t0(f, args, conf):
    from .lfun import lambda_value
    conf_a = dict(conf, t0=1.05, theta=5 * math.pi / 4)
    conf_b = dict(conf, t0=1.31, theta=11 * math.pi / 8)
    ctx_a, ctx_b = make_context(f, conf_a), make_context(f, conf_b)
    worst = mpmath.mpf(0)
    for s in _FE_SAMPLES[:2]:
        s = parse_complex(s)
        a = lambda_value(f, s, ctx_a).lam
        b = lambda_value(f, s, ctx_b).lam
        worst = max(worst, abs(a - b))
    return {"residual": worst, "settings": "t0=1.05,theta=5pi/4 vs t0=1.31,theta=11pi/8"}


def _check_residues(f, args, conf):
    from .lfun import pole_locations, residue_by_contour
    ctx = make_context(f, conf)
    worst = mpmath.mpf(0)
    found = {}
    for n, r in sorted(pole_locations(f).items()):
        c = residue_by_contour(f, n, ctx)
        worst = max(worst, abs(c - r))
        found[str(n)] = fmt_complex(r, 15)
    return {"residual": worst, "residues": found, "tol": 1e-15}


def _check_hadamard(args, conf):
    from .reg import METHODS, hadamard_method
    n = args.n if args.n is not None else 2
    name = args.exprs[0] if args.exprs else "exp"
    kernels = {"exp": lambda t: mpmath.exp(-t), "cos": mpmath.cos}
    if name not in kernels:
        raise UsageError("hadamard check takes 'exp' or 'cos'")
    k = kernels[name]
    f = lambda t: k(t) / (t - 1) ** n
    vals = {m: hadamard_method(f, 0, 2, 1, n, m, conf["prec"]) for m in METHODS}
    ref = vals["finite_part"]
    worst = max(abs(v - ref) for v in vals.values())
    return {"residual": worst, "value": fmt_real(mpmath.re(ref), 20), "order": n, "kernel": name, "tol": 1e-30}


def _check_rc(args):
    from .brackets import rc_bracket
    if len(args.exprs) != 2 or args.n is None:
        raise UsageError("check rc needs two expressions and --n")
    f, g = parse_form(args.exprs[0]), parse_form(args.exprs[1])
    res = rc_bracket(f, g, args.n)
    k, l, n = f.weight, g.weight, args.n
    vanishing = max(1 - k, 1 - l) <= n <= 1 - k - l
    ok = res.depth == 0 and (res.is_zero() or not vanishing)
    return {"residual": 0.0 if ok else 1.0, "pass": ok, "exact_zero": res.is_zero(),
            "vanishing_range": vanishing, "weight": res.weight, "tol": 0.0}


# ---------------------------------------------------------------------------

def _add_num_flags(p):
    p.add_argument("--t0")
    p.add_argument("--prec")
    p.add_argument("--trunc")
    p.add_argument("--branch-angle", dest="branch_angle")
    p.add_argument("--config")


def build_parser():
    p = _Parser(prog="qmforms", description="Meromorphic quasi-modular forms and their L-functions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("qexp", help="q-expansion with coefficients below q^N")
    q.add_argument("expr")
    q.add_argument("terms", type=int, nargs="?", default=10)
    q.add_argument("--json", action="store_true")

    i = sub.add_parser("info", help="weight, depth and component functions")
    i.add_argument("expr")
    i.add_argument("--json", action="store_true")

    dd = sub.add_parser("decompose", help="modular + derivatives + E2-powers decomposition")
    dd.add_argument("expr")
    dd.add_argument("--json", action="store_true")

    b = sub.add_parser("bracket", help="Rankin-Cohen bracket [f, g]_n")
    b.add_argument("f")
    b.add_argument("g")
    b.add_argument("n", type=int)
    b.add_argument("--serre", action="store_true", help="use Serre derivatives at the declared depths")
    b.add_argument("--json", action="store_true")

    lv = sub.add_parser("lvalue", help="Lambda(f, s) and L(f, s)")
    lv.add_argument("expr")
    lv.add_argument("s")
    lv.add_argument("--json", action="store_true")
    _add_num_flags(lv)

    t = sub.add_parser("table", help="Lambda and L over a grid of s")
    t.add_argument("expr")
    t.add_argument("--s", help="comma-separated list of points")
    t.add_argument("--from", dest="start")
    t.add_argument("--to", dest="stop")
    t.add_argument("--step", default="1")
    t.add_argument("--format", choices=("text", "csv"), default="text")
    t.add_argument("--json", action="store_true")
    _add_num_flags(t)

    c = sub.add_parser("check", help="verify an identity numerically or exactly")
    c.add_argument("kind", choices=("fe", "shift", "t0", "residues", "hadamard", "rc"))
    c.add_argument("exprs", nargs="*")
    c.add_argument("--n", type=int)
    c.add_argument("--l", type=int, default=1)
    c.add_argument("--tol", type=float, default=1e-20)
    c.add_argument("--json", action="store_true")
    _add_num_flags(c)
    return p


COMMANDS = {"qexp": cmd_qexp, "info": cmd_info, "decompose": cmd_decompose, "bracket": cmd_bracket,
            "lvalue": cmd_lvalue, "table": cmd_table, "check": cmd_check}


def run(argv, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    from .lfun import NearPoleError
    try:
        args = build_parser().parse_args(argv)
        out: list[str] = []
        result = COMMANDS[args.command](args, out)
        code = EXIT_OK
        if isinstance(result, int):
            code = result
        elif result is not None:
            out.append(json.dumps(result, sort_keys=True))
        if out:
            stdout.write("\n".join(out) + "\n")
        return code
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        stderr.write(f"parse error: {exc}\n")
        return EXIT_USAGE
    except InvalidWeightError as exc:
        stderr.write(f"weight error: {exc}\n")
        return EXIT_USAGE
    except NearPoleError as exc:
        dg = getattr(exc, "digits", 15)
        if "--json" in argv:
            stdout.write(json.dumps({"error": str(exc), "pole": pair(exc.s, dg),
                                     "residue": pair(exc.residue, dg)}, sort_keys=True) + "\n")
        stderr.write(f"error: {exc}; residue = {fmt_complex(exc.residue, dg)}\n")
        return EXIT_MATH
    except (QMFormsError, ZeroDivisionError, ArithmeticError, ValueError) as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_MATH


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
