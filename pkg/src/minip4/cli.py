"""Command line entry point.

Exit codes: 0 clean (Unstable findings are warnings), 1 findings, 2 usage or
unreadable input, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from typing import List, Optional

from .campaign import CampaignConfig, expand_bugs, run_campaign
from .equiv import SEMANTIC, UNSTABLE_FINDING, ValidationStats, validate_trace
from .equiv.smt import semantics_smt
from .generator import GenConfig, GenerationBudgetExhausted, generate_program
from .lang import MiniP4Error, parse_program, print_program, typecheck
from .mbt import MbtStats, run_mbt
from .passes import BUGS, PASS_ORDER, UnknownBug, dump_passes, run_pipeline
from .semantics import UndefinedPolicy, format_semantics, interpret_block

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _global_flags(p: argparse.ArgumentParser, sub: bool) -> None:
    # on subcommands the flags only override what was given before the subcommand
    d = (lambda v: argparse.SUPPRESS) if sub else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(None), help="program seed (or master seed)")
    p.add_argument("--bug", action="append", default=d([]), metavar="ID",
                   help="enable a seeded defect; repeatable; 'all' for the whole catalog")
    p.add_argument("--backend", choices=("brute", "smt"), default=d("brute"))
    p.add_argument("--taint-mode", choices=("strict", "aware"), default=d("aware"))
    p.add_argument("--undefined-policy", default=d("zero"), metavar="zero|pattern:<hex>")
    p.add_argument("--config", default=d(None), metavar="FILE", help="generator config file")
    p.add_argument("--dump-semantics", nargs="?", const="text", choices=("text", "smt"),
                   default=d(None), help="print each block's functional form")
    p.add_argument("--dump-smt", default=d(None), metavar="DIR",
                   help="write one SMT-LIB2 script per equivalence check")
    p.add_argument("--workers", type=int, default=d(None))
    p.add_argument("--json", action="store_true", default=d(False),
                   help="print findings as JSON lines")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="minip4", description="MiniP4 compiler test harness")
    _global_flags(ap, sub=False)
    subs = ap.add_subparsers(dest="command", required=True)

    def sub(name, help_):
        p = subs.add_parser(name, help=help_)
        _global_flags(p, sub=True)
        return p

    p = sub("check", help_="parse and type check a program")
    p.add_argument("file")

    p = sub("compile", help_="run the pass pipeline and print the result")
    p.add_argument("file")
    p.add_argument("--dump-passes", metavar="DIR")
    p.add_argument("--passes", help="comma separated pass order")
    p.add_argument("-o", "--output")

    p = sub("generate", help_="write random programs")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out-dir")

    p = sub("validate", help_="translation-validate every pass on one program")
    p.add_argument("file", nargs="?", help="program file; omitted: generate from --seed")

    p = sub("mbt", help_="model-based testing of one program")
    p.add_argument("file", nargs="?", help="program file; omitted: generate from --seed")
    p.add_argument("--limit", type=int, default=64, help="path limit per control")
    p.add_argument("--stf-dir", help="write <name>.stf here")

    p = sub("campaign", help_="generate, validate and test many programs")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--out-dir", default="campaign_out")
    p.add_argument("--no-mbt", action="store_true")
    return ap


# ----------------------------------------------------------------- helpers

def _gen_config(args) -> GenConfig:
    if args.config:
        try:
            return GenConfig.from_file(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad config {args.config}: {exc}") from None
    return GenConfig()


def _policy(args) -> UndefinedPolicy:
    try:
        return UndefinedPolicy.parse(args.undefined_policy)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(args):
    """(typed program, display name) from a file or a generator seed."""
    if getattr(args, "file", None):
        try:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
        try:
            return typecheck(parse_program(text)), os.path.basename(args.file)
        except MiniP4Error as exc:
            raise UsageError(exc.format(args.file)) from None
    if args.seed is None:
        raise UsageError("give a program file or --seed")
    return generate_program(_gen_config(args).with_seed(args.seed)), f"gen_{args.seed}.mp4l"


def _bugs(args) -> List[str]:
    try:
        return expand_bugs(args.bug)
    except UnknownBug as exc:
        raise UsageError(str(exc)) from None


def _mode(args) -> str:
    return "strict" if args.taint_mode == "strict" else "taint_aware"


def _dump_semantics(args, tp, out) -> None:
    if not args.dump_semantics:
        return
    for ctl in tp.program.pipeline():
        sem = interpret_block(tp, ctl)
        if args.dump_semantics == "smt":
            out.write(semantics_smt(sem, _policy(args)))
        else:
            out.write(format_semantics(sem) + "\n")


def _report(findings, args, out) -> int:
    blocking = False
    for f in findings:
        if args.json:
            out.write(f.to_json() + "\n")
        else:
            label = "warning" if f.kind == UNSTABLE_FINDING else "finding"
            where = f.pass_name or "end-to-end"
            line = f"{label}: {f.kind} in {where}"
            if f.control:
                line += f" (control {f.control})"
            if f.result is not None and f.result.counterexample is not None:
                cex = f.result.counterexample
                line += "\n  inputs: " + json.dumps(cex.inputs, sort_keys=True)
                line += "\n  before: " + json.dumps(cex.before_out, sort_keys=True)
                line += "\n  after:  " + json.dumps(cex.after_out, sort_keys=True)
                line += f"\n  policy: {cex.policy}"
            if f.message:
                line += f"\n  {f.message}"
            out.write(line + "\n")
        blocking |= f.blocking
    return EXIT_FINDINGS if blocking else EXIT_OK


# ----------------------------------------------------------------- commands

def cmd_check(args, out) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    try:
        tp = typecheck(parse_program(text))
    except MiniP4Error as exc:
        out.write(exc.format(args.file) + "\n")
        return EXIT_FINDINGS
    out.write(f"{args.file}: ok ({', '.join(tp.program.pipeline())})\n")
    _dump_semantics(args, tp, out)
    return EXIT_OK


def cmd_compile(args, out) -> int:
    tp, _ = _load(args)
    order = args.passes.split(",") if args.passes else None
    if order is not None and any(p not in PASS_ORDER for p in order):
        raise UsageError(f"unknown pass in {args.passes}; known: {', '.join(PASS_ORDER)}")
    trace = run_pipeline(tp, order=order, bugs=_bugs(args))
    if args.dump_passes:
        for path in dump_passes(trace, args.dump_passes):
            sys.stderr.write(f"wrote {path}\n")
    if trace.crash is not None:
        out.write(f"crash in {trace.crash.pass_name}: {trace.crash}\n")
        return EXIT_FINDINGS
    if trace.invalid_emit is not None:
        out.write(f"{trace.invalid_emit.pass_name} emitted an invalid program: "
                  f"{trace.invalid_emit}\n")
        return EXIT_FINDINGS
    text = trace.entries[-1].text
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_generate(args, out) -> int:
    cfg = _gen_config(args)
    first = 0 if args.seed is None else args.seed
    if args.count < 1:
        raise UsageError("--count must be positive")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
    for seed in range(first, first + args.count):
        try:
            text = print_program(generate_program(cfg.with_seed(seed)).program)
        except GenerationBudgetExhausted as exc:
            sys.stderr.write(f"seed {seed}: {exc}\n")
            continue
        if args.out_dir:
            with open(os.path.join(args.out_dir, f"gen_{seed}.mp4l"), "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            if args.count > 1:
                out.write(f"// gen_{seed}.mp4l\n")
            out.write(text)
    return EXIT_OK


def cmd_validate(args, out) -> int:
    tp, name = _load(args)
    _dump_semantics(args, tp, out)
    trace = run_pipeline(tp, bugs=_bugs(args))
    stats = ValidationStats()
    findings = validate_trace(trace, mode=_mode(args), backend=args.backend, program=name,
                              seed=args.seed, dump_smt=args.dump_smt, stats=stats)
    code = _report(findings, args, out)
    for note in stats.unknown:
        sys.stderr.write(f"unknown: {note}\n")
    if not findings and not args.json:
        out.write(f"{name}: {stats.pairs} program-changing pass(es) validated, no findings\n")
    return code


def cmd_mbt(args, out) -> int:
    tp, name = _load(args)
    stats = MbtStats()
    findings = run_mbt(tp, bugs=_bugs(args), policy=_policy(args), limit=args.limit,
                       seed=0 if args.seed is None else args.seed, program=name, stats=stats)
    if args.stf_dir:
        os.makedirs(args.stf_dir, exist_ok=True)
        stem = os.path.splitext(name)[0]
        with open(os.path.join(args.stf_dir, f"{stem}.stf"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(stats.stf[c] for c in stats.stf))
    code = _report(findings, args, out)
    if not args.json:
        out.write(f"{name}: {stats.paths} path(s), {stats.uncontrollable} uncontrollable, "
                  f"{stats.tests} test(s), {stats.passed} passed, {stats.failed} failed, "
                  f"{stats.rejected} rejected\n")
    return code


def cmd_campaign(args, out) -> int:
    if args.count < 1:
        raise UsageError("--count must be positive")
    cfg = CampaignConfig(count=args.count, master_seed=0 if args.seed is None else args.seed,
                         bugs=tuple(_bugs(args)), gen=_gen_config(args), mode=_mode(args),
                         backend=args.backend, policy=_policy(args),
                         workers=args.workers or os.cpu_count() or 1, mbt=not args.no_mbt)
    os.makedirs(args.out_dir, exist_ok=True)
    findings_path = os.path.join(args.out_dir, "findings.jsonl")
    with open(findings_path, "w", encoding="utf-8") as fh:
        report = run_campaign(cfg, fh)
    summary = report.to_dict()
    summary.update(mode=cfg.mode, backend=cfg.backend, policy=str(cfg.policy),
                   workers=cfg.workers, config=cfg.gen.to_text())
    with open(os.path.join(args.out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    out.write(f"{report.count} programs in {report.wall_clock_s:.1f}s; findings: "
              + ", ".join(f"{k}={v}" for k, v in report.totals.items()) + "\n")
    for b, row in report.detection.items():
        out.write(f"  {b:<24} triggered {row.triggered:>4}  detected {row.detecting:>4}  "
                  f"pinpointed {row.pinpointed:>4}  first {row.first_detection}\n")
    for e in report.errors:
        sys.stderr.write(f"job {e['job']} (seed {e['seed']}) failed: {e['error']}\n")
    if cfg.bugs:
        return EXIT_OK if report.all_detected else EXIT_FINDINGS
    return EXIT_FINDINGS if report.blocking or report.errors else EXIT_OK


COMMANDS = {"check": cmd_check, "compile": cmd_compile, "generate": cmd_generate,
            "validate": cmd_validate, "mbt": cmd_mbt, "campaign": cmd_campaign}


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        _policy(args)  # reject a malformed policy even where it goes unused
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        sys.stderr.write(f"minip4: {exc}\n")
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
