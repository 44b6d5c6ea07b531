"""Command-line front end.

    gcalc <verb> [args] [--depth K] [--mollifier-order q] [--format json|csv] [--verbose]

With no verb, commands are read from stdin, one per line (``#`` starts a
comment), and each prints one JSON document.  Exit status is 0 on
success, 1 on parse errors and 2 on domain errors; in batch mode the
first nonzero status wins.
"""

from __future__ import annotations

import argparse
import io
import math
import shlex
import sys
import warnings
from fractions import Fraction

import mpmath
import numpy as np

from . import __version__, config
from .errors import ConfigError, GCalcError, ParseError
from .expr import Dist, Rho, RhoInt, contains, to_text, variables

SCHEMA_VERSION = "1.0"
VERBS = ("eval", "embed", "diff", "pair", "fixpoint", "dsa", "member", "support", "spec-version")


# ---------------------------------------------------------------------------
# deterministic JSON


def _num(v) -> str:
    v = float(v)
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    return "%.17g" % v


def dumps(obj) -> str:
    """JSON with floats printed to 17 significant digits and stable key order."""
    import json

    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, (float, np.floating, mpmath.mpf)):
        return _num(obj)
    if isinstance(obj, np.integer):
        return str(int(obj))
    if isinstance(obj, (str, Fraction)):
        return json.dumps(str(obj))
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if hasattr(obj, "to_json"):
        return dumps(obj.to_json())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# argument parsing


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, help="lattice depth K")
    common.add_argument("--mollifier-order", type=int, dest="mollifier_order", help="mollifier order q")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--verbose", action="store_true", help="include lattice samples")

    p = _Parser(prog="gcalc", description="Generalized reals and functions on a gauge lattice.")
    sub = p.add_subparsers(dest="verb", parser_class=_Parser)

    s = sub.add_parser("eval", parents=[common], help="evaluate an expression")
    s.add_argument("expr")
    s.add_argument("--at", action="append", default=[], metavar="VAR=EXPR", help="bind a variable to a point")
    s.add_argument("--tier", choices=("auto", "exact", "empirical"), default="auto")
    s.add_argument("--dps", type=int)

    s = sub.add_parser("embed", parents=[common], help="embed a smooth function or distribution")
    s.add_argument("expr")

    s = sub.add_parser("diff", parents=[common], help="sharp derivative")
    s.add_argument("expr")
    s.add_argument("--var", default="x")
    s.add_argument("--order", type=int, default=1)

    s = sub.add_parser("pair", parents=[common], help="pairing with a test function")
    s.add_argument("dist")
    s.add_argument("phi")
    s.add_argument("--interval", nargs=2, type=float, default=(-8.0, 8.0), metavar=("LO", "HI"))
    s.add_argument("--k", type=int, action="append", help="lattice indices (default: the depth)")
    s.add_argument("--dps", type=int)

    s = sub.add_parser("fixpoint", parents=[common], help="fixed point of a contraction in x and eps")
    s.add_argument("map")
    s.add_argument("--lambda", type=float, required=True, dest="lam")
    s.add_argument("--t", type=Fraction, default=Fraction(1))
    s.add_argument("--seed", default="0")

    s = sub.add_parser("dsa", parents=[common], help="down sequencing diagnostic")
    s.add_argument("expr")
    s.add_argument("--level", type=float, default=1.0)
    s.add_argument("--order", type=int, default=1)
    s.add_argument("--r", type=Fraction, default=Fraction(1))

    s = sub.add_parser("member", parents=[common], help="strong membership in a region net")
    s.add_argument("region")
    s.add_argument("point", nargs="+")
    s.add_argument("--membrane", action="store_true", help="test the membrane of the region instead")

    s = sub.add_parser("support", parents=[common], help="support of a generalized point")
    s.add_argument("expr")
    s.add_argument("--essential", action="store_true")

    sub.add_parser("spec-version", parents=[common], help="output schema version")
    return p


def _config(args) -> config.Config:
    overrides = {}
    if getattr(args, "depth", None) is not None:
        overrides["lattice_depth"] = args.depth
    if getattr(args, "mollifier_order", None) is not None:
        overrides["mollifier_order"] = args.mollifier_order
    from dataclasses import replace

    return replace(config.from_env(), **overrides)


# ---------------------------------------------------------------------------
# verbs


def _number(text):
    from .parser import parse
    from .series import evaluate_expr

    e = parse(text)
    if variables(e):
        raise ConfigError(f"point {text!r} must not contain variables")
    return evaluate_expr(e)


def _lattice_rows(x, depth):
    vals = x.sample_mp(depth) if (not x.exact and x.samples.dtype == object) else x.sample(depth)
    return [{"k": k, "eps": 2.0**-k, "value": vals[k - 1]} for k in range(1, depth + 1)]


def _number_summary(x) -> dict:
    from .number import norm, shadow, valuation

    v = valuation(x)
    out = {"result": x.to_json(), "valuation": v.to_json(), "norm": norm(x)}
    s = shadow(x)
    if s is not None:
        out["shadow"] = s
    return out


def cmd_eval(args, cfg):
    from .functions import GeneralizedFunction, evaluate
    from .parser import parse
    from .series import evaluate_expr

    e = parse(args.expr)
    env = {}
    for item in args.at:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--at expects VAR=EXPR, got {item!r}")
        env[name.strip()] = _number(value)
    missing = variables(e) - set(env)
    if missing:
        raise ConfigError(f"no value for variable(s) {', '.join(sorted(missing))}; use --at")
    if env:
        tag = cfg.mollifier_order if contains(e, Dist, Rho, RhoInt) else "smooth"
        x = evaluate(GeneralizedFunction(e, tag), tier=args.tier, dps=args.dps, **env)
    else:
        x = evaluate_expr(e, {}, tier=args.tier, dps=args.dps)
    out = _number_summary(x)
    rows = _lattice_rows(x, cfg.lattice_depth) if (args.verbose or args.format == "csv") else None
    return out, rows


def cmd_embed(args, cfg):
    from .functions import DistributionTag, embed_distribution, embed_smooth
    from .parser import parse

    if DistributionTag.from_text(args.expr) is not None:
        f = embed_distribution(args.expr)
    else:
        e = parse(args.expr)
        f = embed_distribution(e) if contains(e, Dist, Rho, RhoInt) else embed_smooth(e)
    return {"expression": to_text(f.expr), "tag": f.tag, "growth": f.growth}, None


def cmd_diff(args, cfg):
    from .algebra import simplify
    from .expr import diff
    from .parser import parse

    e = parse(args.expr)
    for _ in range(args.order):
        e = diff(e, args.var)
    try:
        simple = to_text(simplify(e))
    except ZeroDivisionError:
        simple = None
    return {"derivative": to_text(e), "simplified": simple}, None


def cmd_pair(args, cfg):
    from .functions import classical_pairing, embed_distribution, pairing

    ks = args.k or [cfg.lattice_depth]
    t = embed_distribution(args.dist)
    g = pairing(t, args.phi, tuple(args.interval), ks=ks, dps=args.dps)
    values = [{"k": k, "value": g.samples[k - 1]} for k in ks]
    out = {"values": values}
    try:
        ref = classical_pairing(args.dist, args.phi, tuple(args.interval))
    except GCalcError:
        ref = None
    if ref is not None:
        res = float(g.samples[ks[-1] - 1]) - ref
        out["classical"] = ref
        out["residual"] = res
        out["residual_flag"] = bool(abs(res) > cfg.quad_tolerance * 100)
    rows = [{"k": k, "eps": 2.0**-k, "value": g.samples[k - 1]} for k in ks]
    return out, rows


def cmd_fixpoint(args, cfg):
    from .calculus import fixed_point_solve

    seed = _number(args.seed)
    r = fixed_point_solve(args.map, args.lam, args.t, seed)
    out = r.to_json()
    value = r.value
    out["value"] = float(value.samples[-1])
    rows = [{"k": k, "eps": 2.0**-k, "value": value.samples[k - 1]} for k in range(1, cfg.lattice_depth + 1)]
    if args.verbose:
        out["lattice"] = rows
    return out, rows


def cmd_dsa(args, cfg):
    from .calculus import dsa_check

    return dsa_check(args.expr, args.level, args.order, args.r).to_json(), None


def cmd_member(args, cfg):
    from .internal import Membrane, membership_report, membrane_member
    from .parser import parse_region

    region = parse_region(args.region)
    point = [_number(p) for p in args.point]
    if args.membrane:
        m = Membrane(region)
        return {"region": region.to_json(), "membrane_L": m.L, "member": membrane_member(point, m)}, None
    out = membership_report(point, region)
    out["region"] = region.to_json()
    return out, None


def cmd_support(args, cfg):
    from .interleave import support
    from .internal import essential_support

    x = _number(args.expr)
    s = essential_support(x) if args.essential else support(x, fallback=True)
    return s.to_json(), None


def cmd_spec_version(args, cfg):
    return {"spec_version": SCHEMA_VERSION, "package_version": __version__, "verbs": list(VERBS)}, None


HANDLERS = {
    "eval": cmd_eval,
    "embed": cmd_embed,
    "diff": cmd_diff,
    "pair": cmd_pair,
    "fixpoint": cmd_fixpoint,
    "dsa": cmd_dsa,
    "member": cmd_member,
    "support": cmd_support,
    "spec-version": cmd_spec_version,
}


# ---------------------------------------------------------------------------
# running


def _csv(rows) -> str:
    buf = io.StringIO()
    buf.write("k,eps,value\n")
    for r in rows:
        buf.write(f"{r['k']},{_num(r['eps'])},{_num(r['value'])}\n")
    return buf.getvalue()


def _error(verb, cfg, exc, code) -> dict:
    err = {"code": getattr(exc, "code", "usage_error"), "message": str(exc)}
    if isinstance(exc, ParseError):
        err.update(line=exc.line, column=exc.column, expected=list(exc.expected))
    return {"verb": verb, "config": cfg.to_json() if cfg else None, "error": err, "exit": code}


def run(argv, out=None) -> int:
    """Run one command; writes to ``out`` (default stdout) and returns the exit code."""
    out = out or sys.stdout
    cfg = None
    verb = argv[0] if argv else None
    try:
        args = build_parser().parse_args(argv)
        verb = args.verb
        if verb is None:
            raise _ArgError("missing verb")
        cfg = _config(args)
    except _ArgError as exc:
        out.write(dumps(_error(verb, None, exc, 1)) + "\n")
        return 1
    except ParseError as exc:
        out.write(dumps(_error(verb, None, exc, 1)) + "\n")
        return 1
    except GCalcError as exc:
        out.write(dumps(_error(verb, None, exc, 2)) + "\n")
        return 2
    with config.using(cfg), warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            result, rows = HANDLERS[verb](args, cfg)
            if args.format == "csv" and rows is None:
                raise ConfigError("csv output is only available for sample dumps (eval, pair, fixpoint)")
        except ParseError as exc:
            out.write(dumps(_error(verb, cfg, exc, 1)) + "\n")
            return 1
        except (GCalcError, ZeroDivisionError, ValueError) as exc:
            out.write(dumps(_error(verb, cfg, exc, 2)) + "\n")
            return 2
    msgs = list(dict.fromkeys(str(w.message) for w in caught))
    if args.format == "csv":
        out.write(_csv(rows))
        return 0
    if verb == "eval":
        env = {"verb": verb, "config": cfg.to_json(), "result": result["result"],
               "valuation": result["valuation"], "norm": result["norm"]}
        if "shadow" in result:
            env["shadow"] = result["shadow"]
        if args.verbose:
            env["lattice"] = rows
    else:
        env = {"verb": verb, "config": cfg.to_json(), "result": result}
    env["warnings"] = msgs
    out.write(dumps(env) + "\n")
    return 0


def run_batch(lines, out=None) -> int:
    status = 0
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            argv = shlex.split(line)
        except ValueError as exc:
            (out or sys.stdout).write(dumps(_error(None, None, exc, 1)) + "\n")
            code = 1
        else:
            if argv and argv[0] == "gcalc":
                argv = argv[1:]
            code = run(argv, out)
        status = status or code
    return status


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv or argv == ["-"]:
        return run_batch(sys.stdin)
    if argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return 0
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
