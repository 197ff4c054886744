"""Single entry point: weave, analyses, metrics, exploration and tuning.

Exit codes: 0 ok, 1 domain error, 2 usage error. Human-readable reporting
goes to stderr; machine artifacts are written atomically to the declared
paths and inputs are never modified.
"""

import argparse
import json
import os
import sys

from . import __version__, aspects, autotuner, explore
from .errors import WeaveError
from .frontend import emit, parse
from .frontend.sloc import count_sloc
from .strategies import (
    MemoConfig, auto_parallelize, detect_memoizable,
    disable_nested_parallel_pragmas, memoize,
)
from .strategies.multiversion import find_call_statement, multiversion
from .weave import WeaveSession, static_metrics


def say(msg):
    print(msg, file=sys.stderr)


def _write_atomic(path, text):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _read(path):
    with open(path) as fh:
        return fh.read()


def _write_support(session, outdir):
    for name, text in sorted(session.support_files.items()):
        _write_atomic(os.path.join(outdir, name), text)
        say(f"wrote support source {os.path.join(outdir, name)}")


# ------------------------------------------------------------- subcommands

def cmd_weave(args):
    source = _read(args.infile)
    program = aspects.parse_aspect(_read(args.aspect))
    arg_map = {}
    for item in args.arg or []:
        if "=" not in item:
            raise WeaveError(f"--arg wants name=value, got {item!r}")
        name, _, value = item.partition("=")
        arg_map[name] = value
    input_ast = parse(source, args.infile)
    ast = parse(source, args.infile)
    session = aspects.run_aspects(program, ast, arg_map)
    woven = emit(ast)
    _write_atomic(args.out, woven)
    if args.report:
        _write_atomic(args.report,
                      session.report.CSV_HEADER + "\n" + session.report.csv_row() + "\n")
    if args.static_report:
        row = static_metrics(input_ast, woven, _read(args.aspect))
        _write_atomic(args.static_report, row.CSV_HEADER + "\n" + row.csv_row() + "\n")
    _write_support(session, os.path.dirname(os.path.abspath(args.out)))
    r = session.report
    say(f"wove {args.infile} -> {args.out}: selects={r.selects} "
        f"attributes={r.attributes} actions={r.actions} inserts={r.inserts} "
        f"nativeSloc={r.native_sloc}")


def cmd_detect_memo(args):
    ast = parse(_read(args.infile), args.infile)
    for name in detect_memoizable(ast):
        print(name)


def cmd_parallelize(args):
    ast = parse(_read(args.infile), args.infile)
    session = WeaveSession(ast)
    verdicts = auto_parallelize(session)
    if not args.keep_nested:
        disable_nested_parallel_pragmas(session)
    _write_atomic(args.out, emit(ast))
    if args.report:
        payload = {"loops": [v.as_dict() for v in verdicts]}
        _write_atomic(args.report, json.dumps(payload, indent=2) + "\n")
    accepted = sum(1 for v in verdicts if v.parallelizable)
    say(f"parallelized {accepted}/{len(verdicts)} for loops -> {args.out}")


def cmd_memoize(args):
    ast = parse(_read(args.infile), args.infile)
    session = WeaveSession(ast)
    cfg = MemoConfig(function_name=args.fn, table_size=args.table_size,
                     policy=args.policy.upper(),
                     enabled_by_default=not args.disabled, force=args.force)
    memoize(session, cfg)
    _write_atomic(args.out, emit(ast))
    outdir = args.support_dir or os.path.dirname(os.path.abspath(args.out))
    os.makedirs(outdir, exist_ok=True)
    _write_support(session, outdir)
    say(f"memoized {args.fn!r} -> {args.out}")


def cmd_multiversion(args):
    ast = parse(_read(args.infile), args.infile)
    session = WeaveSession(ast)
    callee, _, occ = args.call.partition("#")
    jp = find_call_statement(session, callee, int(occ) if occ else 0)
    versions = [v.strip() for v in args.versions.split(",") if v.strip()]
    multiversion(session, jp, versions, args.knob)
    _write_atomic(args.out, emit(ast))
    outdir = args.support_dir or os.path.dirname(os.path.abspath(args.out))
    os.makedirs(outdir, exist_ok=True)
    _write_support(session, outdir)
    say(f"dispatching {args.call!r} over {versions} on knob {args.knob!r}")


def cmd_explore(args):
    cfg = explore.load_config(args.config)
    rows = explore.run_exploration(cfg, log=say)
    say(f"explored {len(rows)} configurations -> {cfg.output}")


def cmd_tune(args):
    kb = autotuner.load_knowledge(args.knowledge)
    constraints = [autotuner.parse_constraint(c) for c in args.constraint or []]
    direction, terms = autotuner.parse_rank(args.rank)
    problem = autotuner.Problem(constraints, direction, terms)
    point = autotuner.select_best(kb, problem)
    if args.knob_file:
        autotuner.write_knob_file(point, args.knob_file)
        say(f"wrote knob file {args.knob_file}")
    for name, value in sorted(point.knob_dict().items()):
        print(f"{name}={value}")


def cmd_version_compile(args):
    ast = parse(_read(args.infile), args.infile)
    cache = explore.VersionCache(args.cache_dir)
    flags = args.flags.split() if args.flags else []
    lib, hit = cache.compile_version(ast, args.fn, flags, args.define or [])
    say("cache hit" if hit else "compiled new version")
    print(lib)


def cmd_metrics(args):
    ast = parse(_read(args.infile), args.infile)
    print(count_sloc(ast))


# ------------------------------------------------------------------ parser

def build_parser():
    ap = argparse.ArgumentParser(
        prog="aweave",
        description="Aspect weaving for a C99 subset, with autotuning and "
                    "design-space exploration.")
    ap.add_argument("--version", action="version", version=f"aweave {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weave", help="run a strategy script over a source file")
    p.add_argument("--aspect", required=True)
    p.add_argument("--arg", action="append", metavar="NAME=VALUE")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="weave counters CSV")
    p.add_argument("--static-report", help="input/woven size metrics CSV")
    p.set_defaults(func=cmd_weave)

    p = sub.add_parser("detect-memo", help="list functions safe to memoize")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=cmd_detect_memo)

    p = sub.add_parser("parallelize", help="insert OpenMP pragmas on safe loops")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="per-loop JSON verdicts")
    p.add_argument("--keep-nested", action="store_true",
                   help="do not comment out nested parallel pragmas")
    p.set_defaults(func=cmd_parallelize)

    p = sub.add_parser("memoize", help="wrap a function behind a memo table")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fn", required=True)
    p.add_argument("--table-size", type=int, default=256)
    p.add_argument("--policy", choices=["keep", "replace"], default="replace")
    p.add_argument("--disabled", action="store_true",
                   help="generate with memoization off by default")
    p.add_argument("--force", action="store_true",
                   help="memoize even if not detected pure")
    p.add_argument("--support-dir")
    p.set_defaults(func=cmd_memoize)

    p = sub.add_parser("multiversion", help="switch a call between versions")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--call", required=True, metavar="CALLEE[#N]")
    p.add_argument("--versions", required=True, metavar="A,B,...")
    p.add_argument("--knob", required=True)
    p.add_argument("--support-dir")
    p.set_defaults(func=cmd_multiversion)

    p = sub.add_parser("explore", help="sweep knob ranges and measure")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("tune", help="pick the best operating point")
    p.add_argument("--knowledge", required=True)
    p.add_argument("--constraint", action="append",
                   metavar="METRIC<=VALUE:PRIORITY")
    p.add_argument("--rank", required=True, metavar="max:METRIC[*W][+...]")
    p.add_argument("--knob-file")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("version-compile",
                       help="compile one function's closure into a cached .so")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--fn", required=True)
    p.add_argument("--flags", default="")
    p.add_argument("--define", action="append", metavar="NAME=VALUE")
    p.add_argument("--cache-dir", default="aw_cache")
    p.set_defaults(func=cmd_version_compile)

    p = sub.add_parser("metrics", help="logical source lines of a file")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=cmd_metrics)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.func(args)
    except WeaveError as exc:
        say(f"error: {exc}")
        return 1
    except OSError as exc:
        say(f"error: {exc}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
