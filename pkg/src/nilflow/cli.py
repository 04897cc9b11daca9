"""Command-line front end.

Every subcommand accepts ``--config FILE`` (flat ``key=value`` lines, ``#``
comments) whose entries act as if given before the command-line flags, so
flags override the file.  Reports embed the resolved configuration and the
library version.  Exit codes: 2 usage, 3 domain error, 4 failed run under
``--strict``.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

from . import __version__, presets
from .arith import cf_expand, is_bounded_type, named_rotation
from .birkhoff import growth_exponent, precision_settings
from .errors import BudgetExhausted, DomainError, NilflowError, PreconditionError
from .observables import load_observable
from .torus import SkewShiftParams, TorusPoint

REPORT_SCHEMA = "nilflow.report/1"
CSV_SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- output

def write_atomic(path, text):
    """Write text to path via a temporary file in the same directory and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def svg_loglog(points, title="", annotation="", width=480, height=320):
    """Polyline chart of (x, y) with logarithmic axes, as an SVG document."""
    pts = [(x, y) for x, y in points if x > 0 and y > 0]
    pad = 40
    if not pts:
        pts = [(1.0, 1.0)]
    lx = [math.log10(x) for x, _ in pts]
    ly = [math.log10(y) for _, y in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    sx = (width - 2 * pad) / ((x1 - x0) or 1.0)
    sy = (height - 2 * pad) / ((y1 - y0) or 1.0)
    coords = " ".join(f"{pad + (a - x0) * sx:.2f},{height - pad - (b - y0) * sy:.2f}"
                      for a, b in zip(lx, ly))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
        f'stroke="black"/>\n'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{coords}"/>\n'
        f'<text x="{pad}" y="{pad - 12}" font-size="13">{_esc(title)}</text>\n'
        f'<text x="{width - pad}" y="{pad + 12}" font-size="12" text-anchor="end">'
        f'{_esc(annotation)}</text>\n'
        f'<text x="{width / 2}" y="{height - 8}" font-size="11" text-anchor="middle">'
        f'log10 N ({x0:.2f} .. {x1:.2f})</text>\n'
        f'<text x="12" y="{height / 2}" font-size="11" transform="rotate(-90 12 {height / 2})" '
        f'text-anchor="middle">log10 value ({y0:.2f} .. {y1:.2f})</text>\n'
        "</svg>\n")


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _report(command, cfg, body, decisions):
    return {"schema": REPORT_SCHEMA, "version": __version__, "command": command,
            "config": cfg, "decisions": decisions, "result": body}


def _emit(args, name, text):
    if args.out:
        write_atomic(os.path.join(args.out, name), text)


# ---------------------------------------------------------------- helpers

def _params(args):
    if not args.alpha:
        raise UsageError("--alpha is required")
    return SkewShiftParams.create(args.alpha, float(args.beta))


def _observable(args, params):
    spec = args.observable
    if spec in presets.OBSERVABLE_PRESETS:
        return presets.observable(spec, params)
    if spec and os.path.exists(spec):
        return load_observable(spec)
    raise UsageError(f"--observable must be a preset {presets.OBSERVABLE_PRESETS} or a file")


def _roof(args, params):
    spec = args.roof
    if spec in presets.ROOF_PRESETS:
        return presets.roof(spec, params)
    if spec and os.path.exists(spec):
        from .specialflow import RoofFunction
        return RoofFunction.from_observable(load_observable(spec))
    raise UsageError(f"--roof must be a preset {presets.ROOF_PRESETS} or a file")


def _int_list(text):
    try:
        vals = [int(float(v)) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}") from None
    if not vals:
        raise UsageError("empty list")
    return vals


def _config(args):
    skip = {"func", "config", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# ---------------------------------------------------------------- commands

def cmd_cf(args):
    if not args.alpha:
        raise UsageError("--alpha is required")
    x = named_rotation(args.alpha)
    cf = cf_expand(x, args.depth)
    if cf.is_rational:
        print(f"warning: alpha = {args.alpha} is rational; it is excluded from the dynamics",
              file=sys.stderr)
    qs = cf.denominators
    print("n,a_n,p_n,q_n,q_n/q_{n-1}")
    for n in range(1, cf.depth + 1):
        p, q = cf.convergents[n]
        print(f"{n},{cf.partial_quotients[n - 1]},{p},{q},{q / qs[n - 1]:.6f}")
    if cf.precision_limited:
        print(f"# expansion stopped at depth {cf.depth}: precision limit", file=sys.stderr)
    if cf.depth >= 3 and not cf.is_rational:
        rep = is_bounded_type(cf)
        print(f"# max_quotient={rep.max_quotient} C_alpha_estimate={rep.C_alpha_estimate:.6f} "
              f"certified_depth={rep.certified_depth}")
    return 0


def _growth_class(slope):
    if abs(slope) <= 0.1:
        return "bounded"
    if 0.4 <= slope <= 0.6:
        return "sqrt"
    if 0.9 <= slope <= 1.1:
        return "linear"
    return "other"


def run_growth(args):
    params = _params(args)
    g = _observable(args, params)
    Ns = _int_list(args.N) if args.N else [2 ** k for k in range(10, 21)]
    fitted = [n for n in Ns if n >= 2 ** 10]
    if len(fitted) < 5 or fitted[-1] < 1000 * fitted[0]:
        raise UsageError("--N needs >= 5 values >= 1024 spanning >= 3 decades")
    fit = growth_exponent(g, params, Ns, args.budget)
    body = fit.to_json_dict()
    body["precision"] = precision_settings()
    return body, {"growth_class": _growth_class(fit.slope)}, fit


def cmd_growth(args):
    body, decisions, fit = run_growth(args)
    rep = _report("growth", _config(args), body, decisions)
    _emit(args, "growth.json", dumps(rep))
    _emit(args, "growth.csv", fit.to_csv())
    if args.svg and args.out:
        _emit(args, "growth.svg", svg_loglog(fit.per_N, f"sup |S_N g|, {args.observable}",
                                             f"slope {fit.slope:.3f}"))
    print(dumps({"slope": fit.slope, "r2": fit.r2, "growth_class": decisions["growth_class"]}),
          end="")
    return 0


def run_cohomology(args):
    from .cohomology import cohomology_report, triviality_test
    params = _params(args)
    if args.roof:
        f = _roof(args, params)
        rep = triviality_test(f.obs, params, args.tol)
        body = rep.to_json_dict()
        return body, {"trivial": rep.trivial}
    g = _observable(args, params)
    body = cohomology_report(g, params, args.tol)
    body["trivial"] = all(r["abs_D"] <= args.tol * r["l2"] for r in body["components"])
    return body, {"trivial": body["trivial"]}


def cmd_cohomology(args):
    body, decisions = run_cohomology(args)
    rep = _report("cohomology", _config(args), body, decisions)
    _emit(args, "cohomology.json", dumps(rep))
    print(dumps(rep), end="")
    return 0


def _jobs_from_args(kind, args, count, **extra):
    from .experiments import seeded_jobs
    opts = {"alpha": args.alpha, "beta": float(args.beta)}
    opts.update({k: v for k, v in extra.items() if v is not None})
    return seeded_jobs(kind, count, args.seed, **opts)


def _run_jobs(command, args, jobs):
    from .experiments import batch
    res = batch(jobs, args.workers)
    decisions = {"pass": [bool(j.get("ok") and j["report"].get("pass")) for j in res["jobs"]]}
    return res, decisions


def _finish_jobs(command, args, res, decisions):
    rep = _report(command, _config(args), res, decisions)
    _emit(args, f"{command}.json", dumps(rep))
    traces = [j["report"] for j in res["jobs"] if j.get("ok") and "drift_trace" in j["report"]]
    if traces:
        _emit(args, f"{command}_trace.csv",
              "n,a_n\n" + "".join(f"{n},{a!r}\n" for n, a in traces[0]["drift_trace"]))
    print(dumps(res["summary"]), end="")
    errors = [j["error"] for j in res["jobs"] if not j.get("ok")]
    for e in errors:
        print(f"job error: {e}", file=sys.stderr)
    if args.strict and not all(decisions["pass"]):
        raise BudgetExhausted(f"{command}: not every job passed within its budget")
    return 0


def run_ratner(args):
    _params(args)
    jobs = _jobs_from_args("ratner", args, args.pairs, roof=args.roof, delta=args.delta,
                           eps=args.eps, kappa=args.kappa, D_max=args.D_max,
                           max_steps=args.max_steps, keep_trace=args.pairs == 1)
    return _run_jobs("ratner", args, jobs)


def cmd_ratner(args):
    return _finish_jobs("ratner", args, *run_ratner(args))


def run_disjoint(args):
    _params(args)
    if args.p == args.q:
        raise PreconditionError("p = q: distinct powers are required")
    if args.p <= 0 or args.q <= 0 or args.p > args.q:
        raise PreconditionError("need positive integers p < q")
    jobs = _jobs_from_args("disjoint", args, args.quads, roof=args.roof, delta=args.delta,
                           p=args.p, q=args.q, threshold=args.threshold, D_max=args.D_max,
                           max_steps=args.max_steps, full_scan=args.full_scan,
                           keep_trace=args.quads == 1)
    return _run_jobs("disjoint", args, jobs)


def cmd_disjoint(args):
    return _finish_jobs("disjoint", args, *run_disjoint(args))


def run_moebius(args):
    _params(args)
    jobs = _jobs_from_args("moebius", args, args.triples, roof=args.roof, N=args.N, t=args.t,
                           tolerance=args.tolerance)
    return _run_jobs("moebius", args, jobs)


def cmd_moebius(args):
    return _finish_jobs("moebius", args, *run_moebius(args))


def run_flow(args):
    import numpy as np
    from .specialflow import SpecialFlowState, flow_samples
    params = _params(args)
    f = _roof(args, params)
    state = SpecialFlowState(TorusPoint.of(args.x, args.y), float(args.s)).check(f)
    if args.dt <= 0 or args.t_max <= 0:
        raise UsageError("--dt and --t-max must be positive")
    times = np.arange(0, int(math.floor(args.t_max / args.dt)) + 1) * args.dt
    samples = flow_samples(f, params, state, times)
    return samples


def cmd_flow(args):
    samples = run_flow(args)
    csv = samples.to_csv()
    if args.out:
        _emit(args, "flow.csv", csv)
        rep = _report("flow", _config(args), {"samples": int(samples.t.size),
                                              "final_N": int(samples.N[-1])},
                      {"final_N": int(samples.N[-1])})
        _emit(args, "flow.json", dumps(rep))
    else:
        sys.stdout.write(csv)
    return 0


def run_batch(args):
    from .experiments import batch
    if not args.spec:
        raise UsageError("--spec is required")
    with open(args.spec, encoding="utf-8") as fh:
        spec = json.load(fh)
    if isinstance(spec, dict):
        spec = spec.get("jobs", [])
    if not isinstance(spec, list):
        raise UsageError("batch spec must be a JSON list of jobs")
    res = batch(spec, args.workers)
    decisions = {"pass": [bool(j.get("ok") and j["report"].get("pass")) for j in res["jobs"]]}
    return res, decisions


def cmd_batch(args):
    return _finish_jobs("batch", args, *run_batch(args))


RUNNERS = {
    "growth": lambda a: run_growth(a)[1],
    "cohomology": lambda a: run_cohomology(a)[1],
    "ratner": lambda a: run_ratner(a)[1],
    "disjoint": lambda a: run_disjoint(a)[1],
    "moebius": lambda a: run_moebius(a)[1],
    "batch": lambda a: run_batch(a)[1],
    "flow": lambda a: {"final_N": int(run_flow(a).N[-1])},
}


def cmd_replay(args):
    """Re-run the configuration embedded in a report and compare the decisions."""
    with open(args.report, encoding="utf-8") as fh:
        rep = json.load(fh)
    command = rep.get("command")
    if command not in RUNNERS:
        raise UsageError(f"report has no replayable command (got {command!r})")
    parser = build_parser()
    ns = parser.parse_args([command])
    for k, v in rep["config"].items():
        setattr(ns, k, v)
    ns.out = None
    if command == "batch":
        # replay the embedded job list rather than re-reading a spec file
        from .experiments import batch
        jobs = [{k: v for k, v in j["job"].items() if k != "index"} for j in rep["result"]["jobs"]]
        res = batch(jobs, ns.workers)
        decisions = {"pass": [bool(j.get("ok") and j["report"].get("pass"))
                              for j in res["jobs"]]}
    else:
        decisions = RUNNERS[command](ns)
    same = decisions == rep["decisions"]
    print(dumps({"command": command, "reproduced": same, "decisions": decisions}), end="")
    return 0 if same else 1


# ---------------------------------------------------------------- parser

def _common(p, alpha=True):
    p.add_argument("--config", help="flat key=value file; flags override its entries")
    if alpha:
        p.add_argument("--alpha", help="golden | silver | sqrtD | decimal literal")
        p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--out", help="output directory for reports")
    p.add_argument("--strict", action="store_true",
                   help="exit 4 unless every job passes within its budget")
    p.add_argument("--workers", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="nilflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nilflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cf", help="continued fraction of a rotation number")
    _common(p)
    p.add_argument("--depth", type=int, default=10)
    p.set_defaults(func=cmd_cf)

    p = sub.add_parser("growth", help="growth exponent of sup |S_N g|")
    _common(p)
    p.add_argument("--observable", default="weyl11")
    p.add_argument("--N", help="comma-separated checkpoints (default 2^10..2^20)")
    p.add_argument("--budget", type=int, default=1 << 15)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("cohomology", help="invariant distributions and triviality")
    _common(p)
    p.add_argument("--observable", default="weyl11")
    p.add_argument("--roof", help="test a roof for triviality instead")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_cohomology)

    for name, fn, help_ in (("ratner", cmd_ratner, "Ratner drift search on vertical pairs"),
                            ("disjoint", cmd_disjoint, "disjointness drift search"),
                            ("moebius", cmd_moebius, "Mobius-weighted flow averages")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--roof", default="nontrivial")
        p.add_argument("--seed", type=int, default=0)
        if name == "ratner":
            p.add_argument("--delta", type=float, default=1e-3)
            p.add_argument("--pairs", type=int, default=1)
            p.add_argument("--eps", type=float, default=0.5)
            p.add_argument("--kappa", type=float, default=0.01)
            p.add_argument("--D-max", dest="D_max", type=float, default=1e3)
            p.add_argument("--max-steps", dest="max_steps", type=float, default=1e9)
        elif name == "disjoint":
            p.add_argument("--delta", type=float, default=1e-3)
            p.add_argument("--quads", type=int, default=1)
            p.add_argument("--p", type=int, default=1)
            p.add_argument("--q", type=int, default=2)
            p.add_argument("--threshold", type=float, default=0.05)
            p.add_argument("--D-max", dest="D_max", type=float, default=1e3)
            p.add_argument("--max-steps", dest="max_steps", type=float, default=1e9)
            p.add_argument("--full-scan", dest="full_scan", action="store_true")
        else:
            p.add_argument("--triples", type=int, default=3)
            p.add_argument("--N", type=int, default=10 ** 5)
            p.add_argument("--t", type=float, default=None)
            p.add_argument("--tolerance", type=float, default=0.05)
        p.set_defaults(func=fn)

    p = sub.add_parser("flow", help="special-flow orbit dump as CSV")
    _common(p)
    p.add_argument("--roof", default="nontrivial")
    p.add_argument("--x", type=float, default=0.1)
    p.add_argument("--y", type=float, default=0.2)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--t-max", dest="t_max", type=float, default=100.0)
    p.add_argument("--dt", type=float, default=0.5)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("batch", help="run a JSON list of seeded jobs")
    _common(p, alpha=False)
    p.add_argument("--spec", help="JSON file with a list of job objects")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("replay", help="re-run a report and compare its decisions")
    p.add_argument("report")
    p.set_defaults(func=cmd_replay)
    return parser


def read_config(path):
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            entries.append((k.strip(), v.strip()))
    return entries


def _config_argv(subparser, entries):
    """Translate key=value pairs into option tokens for the given subcommand parser."""
    table = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                table[opt[2:].replace("-", "_")] = (opt, action)
    argv = []
    for k, v in entries:
        key = k.replace("-", "_")
        if key not in table or key == "config":
            raise UsageError(f"unknown config key {k!r}")
        opt, action = table[key]
        if action.nargs == 0:
            if v.lower() in ("1", "true", "yes", "on"):
                argv.append(opt)
            elif v.lower() not in ("0", "false", "no", "off"):
                raise UsageError(f"config key {k!r} expects a boolean")
        else:
            argv += [opt, v]
    return argv


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = parser._subparsers._group_actions[0].choices[args.command]
        extra = _config_argv(sub, read_config(args.config))
        i = argv.index(args.command) + 1
        args = parser.parse_args(argv[:i] + extra + argv[i:])
    return parser, args


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = None
    try:
        parser, args = parse(argv)
        return args.func(args)
    except UsageError as exc:
        (parser or build_parser()).print_usage(sys.stderr)
        print(f"nilflow: error: {exc}", file=sys.stderr)
        return 2
    except BudgetExhausted as exc:
        print(f"nilflow: {exc}", file=sys.stderr)
        return 4
    except (DomainError, NilflowError) as exc:
        print(f"nilflow: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"nilflow: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
