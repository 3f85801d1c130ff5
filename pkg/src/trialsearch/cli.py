"""Command-line interface.

Exit codes: 0 success, 1 computation failed (gave up or out of budget),
2 usage error, 3 I/O or parse error.  Machine-readable output goes to
stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict, replace
from typing import List, Optional

from .core import AgentConfig, DomainError, Instance, OutcomeKind
from .instances import (
    GeneratorKind,
    GeneratorParams,
    InstanceParseError,
    InstanceSet,
    derive_seed,
    generate,
    worked_example,
    parse_instances,
    read_instances,
    write_instances,
)
from .metrics import (
    ORACLE_CAP,
    DEFAULT_THRESHOLD_FACTOR,
    SWEEP_COLUMNS,
    ExhaustiveReference,
    VerdictKind,
    classify_outcome,
    conjecture_sweep,
    describe_agent,
    intelligence_q,
    run_configured,
    unparticularized_resource,
)
from .report import render
from .strategies import check_strategy, initial_vector

log = logging.getLogger("trialsearch")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "TRIALSEARCH_SEED"


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _add_agent_flags(p: argparse.ArgumentParser, strategy: str = "greedy", init: str = "all-zeros"):
    p.add_argument("--strategy", default=strategy, help="strategy name (default: %(default)s)")
    p.add_argument("--init", default=init,
                   help="all-zeros, all-ones, random, differencing or first-K (default: %(default)s)")
    p.add_argument("--budget", type=int, default=None, help="max trials (default: budget-factor * N)")
    p.add_argument("--budget-factor", type=int, default=64)
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--unpruned", action="store_true", help="exhaustive strategies traverse all 2^N vectors")
    p.add_argument("--max-restarts", type=int, default=None)
    p.add_argument("--no-precheck", action="store_true", help="disable odd-total / dominant-element certificates")
    p.add_argument("--unsound-claims", action="store_true", help="report GiveUp as an uncertified no-partition claim")


def _agent_config(args, strategy: Optional[str] = None) -> AgentConfig:
    name = strategy or args.strategy
    try:
        check_strategy(name)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    params = {}
    if name.startswith("exhaustive"):
        params["pruned"] = not args.unpruned
    if args.max_restarts is not None and name.endswith("+restart"):
        params["max_restarts"] = args.max_restarts
    if args.no_precheck and name != "exhaustive-direct":
        params["precheck"] = False
    if args.budget is not None and args.budget < 0:
        raise UsageError("--budget must be non-negative")
    if args.budget_factor < 0:
        raise UsageError("--budget-factor must be non-negative")
    seed = args.seed if args.seed is not None else _default_seed()
    return AgentConfig(strategy=name, params=params, budget=args.budget,
                       budget_factor=args.budget_factor, initial=args.init,
                       rng_seed=seed, unsound_claims=args.unsound_claims)


def _load_corpus(path: str) -> InstanceSet:
    if path == "paper-s2":
        return InstanceSet([worked_example()], "paper-s2")
    try:
        return read_instances(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except (InstanceParseError, DomainError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _check_init(cfg: AgentConfig, inst: Instance) -> None:
    try:
        initial_vector(cfg.initial, inst, cfg.rng_seed)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- solve

def cmd_solve(args) -> int:
    if args.inline is not None:
        try:
            iset = parse_instances(args.inline.replace(",", " "), provenance="inline")
        except (InstanceParseError, DomainError) as exc:
            raise UsageError(f"--inline: {exc}") from None
        iset.instances = [replace(inst, id="inline" if len(iset) == 1 else inst.id) for inst in iset]
    elif args.instance is not None:
        iset = _load_corpus(args.instance)
    else:
        raise UsageError("give --instance or --inline")
    if len(iset) == 0:
        raise UsageError("no instance to solve")
    cfg = _agent_config(args)
    results = []
    code = EXIT_OK
    for inst in iset:
        _check_init(cfg, inst)
        out = run_configured(inst, cfg)
        verdict = classify_outcome(out, inst)
        if out.kind in (OutcomeKind.GAVE_UP, OutcomeKind.BUDGET_EXHAUSTED):
            code = EXIT_FAILED
        results.append(_solve_row(inst, out, verdict))
    if args.format == "text":
        blocks = []
        for r in results:
            lines = [f"instance: {r['instance']}", f"outcome: {r['outcome']}"]
            if r["par"] != "":
                lines.append(f"par: {r['par']}")
            if r["witness"]:
                lines.append(f"witness: {r['witness']}")
                lines.append(f"subsets: {r['subsets']}")
            if r["certificate"]:
                lines.append(f"certificate: {r['certificate']}")
            lines.append(f"trials: {r['trials']}")
            lines.append(f"steps: {r['steps']}")
            if r["verdict"]:
                lines.append(f"verdict: {r['verdict']}")
            if r["diagnostic"]:
                lines.append(f"diagnostic: {r['diagnostic']}")
            blocks.append("\n".join(lines))
        sys.stdout.write("\n\n".join(blocks) + "\n")
    else:
        header = {"agent": describe_agent(cfg), "seed": cfg.rng_seed}
        sys.stdout.write(render(args.format, header, {"runs": (SOLVE_COLUMNS, results)}))
    return code


SOLVE_COLUMNS = ("instance", "n", "outcome", "par", "witness", "subsets", "certificate",
                 "trials", "steps", "verdict", "diagnostic")


def _solve_row(inst, out, verdict) -> dict:
    witness = subsets = ""
    if out.witness is not None:
        witness = str(out.witness)
        plus, minus = out.witness.sides(inst)
        subsets = "{%s} | {%s}" % (",".join(map(str, plus)), ",".join(map(str, minus)))
    return {
        "instance": inst.id, "n": inst.n, "outcome": out.kind.value,
        "par": "" if out.par is None else out.par, "witness": witness, "subsets": subsets,
        "certificate": "" if out.certificate is None else str(out.certificate),
        "trials": out.trials, "steps": out.steps,
        "verdict": "" if verdict is None else verdict.kind.value,
        "diagnostic": out.diagnostic,
    }


# ------------------------------------------------------------- generate

def cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    kind = GeneratorKind.PLANTED if args.planted else GeneratorKind.UNIFORM
    try:
        params = GeneratorParams(args.n, args.bits, args.count, seed, kind)
        iset = generate(params)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if args.out in (None, "-"):
        from .instances import format_instances
        sys.stdout.write(format_instances(iset))
    else:
        try:
            write_instances(iset, args.out)
        except OSError as exc:
            raise InputError(f"cannot write {args.out}: {exc}") from None
        print(f"wrote {len(iset)} instances to {args.out}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- bench

BENCH_COLUMNS = ("strategy", "instance", "n", "outcome", "par", "verdict", "trials", "steps")
SUMMARY_COLUMNS = ("strategy", "instances", "z", "done_correct", "done_wrong", "gave_up",
                   "budget_exhausted", "unverified", "mean_trials", "max_trials")
_VERDICT_COLUMN = {
    VerdictKind.DONE_CORRECT: "done_correct", VerdictKind.DONE_WRONG: "done_wrong",
    VerdictKind.FAILED_GAVE_UP: "gave_up", VerdictKind.FAILED_BUDGET: "budget_exhausted",
    VerdictKind.UNVERIFIED: "unverified",
}


def _strategy_list(raw: List[str]) -> List[str]:
    names = [s for item in raw for s in item.split(",") if s]
    if not names:
        raise UsageError("no strategy given")
    return names


def cmd_bench(args) -> int:
    iset = _load_corpus(args.corpus)
    if len(iset) == 0:
        raise UsageError(f"{args.corpus}: empty corpus")
    names = _strategy_list(args.strategies)
    reference = ExhaustiveReference(pruned=args.pruned_reference)
    z = ""
    if max(inst.n for inst in iset) <= args.reference_cap:
        z = unparticularized_resource(iset, [reference])
    rows, summary = [], []
    for name in names:
        base = _agent_config(args, name)
        agg = {c: 0 for c in _VERDICT_COLUMN.values()}
        trials = []
        for inst in iset:
            cfg = replace(base, rng_seed=derive_seed(base.rng_seed, name, inst.id))
            _check_init(cfg, inst)
            out = run_configured(inst, cfg)
            verdict = classify_outcome(out, inst, args.oracle_cap)
            agg[_VERDICT_COLUMN[verdict.kind]] += 1
            trials.append(out.trials)
            rows.append({"strategy": name, "instance": inst.id, "n": inst.n,
                         "outcome": out.kind.value, "par": "" if out.par is None else out.par,
                         "verdict": verdict.kind.value, "trials": out.trials, "steps": out.steps})
        summary.append({"strategy": name, "instances": len(iset), "z": z, **agg,
                        "mean_trials": f"{sum(trials) / len(trials):.3f}", "max_trials": max(trials)})
    header = {"corpus": args.corpus, "strategies": names, "seed": base.rng_seed,
              "budget": args.budget, "budget_factor": args.budget_factor,
              "z_reference": reference.describe(), "oracle_cap": args.oracle_cap}
    sys.stdout.write(render(args.format, header,
                            {"runs": (BENCH_COLUMNS, rows), "summary": (SUMMARY_COLUMNS, summary)}))
    return EXIT_OK


# ------------------------------------------------------------- qmeasure

QM_COLUMNS = ("id", "n", "outcome", "verdict", "trials", "steps", "intelligent")


def cmd_qmeasure(args) -> int:
    iset = _load_corpus(args.corpus)
    if len(iset) == 0:
        raise UsageError(f"{args.corpus}: empty corpus")
    cfg = _agent_config(args)
    for inst in iset:
        _check_init(cfg, inst)
    try:
        rep = intelligence_q(cfg, iset, args.c, z=args.z, z_mode=args.z_mode,
                             threshold_mode=args.threshold_mode,
                             reference=ExhaustiveReference(pruned=args.pruned_reference),
                             oracle_cap=args.oracle_cap)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    header = {
        "agent": rep.agent_config, "corpus": args.corpus, "sample_size": rep.sample_size,
        "z_reference": rep.z_reference, "z_mode": rep.z_mode, "threshold": rep.threshold,
        "threshold_factor": rep.threshold_factor, "threshold_mode": rep.threshold_mode,
        "v_count": rep.v_count, "q": str(rep.q), "q_float": round(float(rep.q), 6),
        "done_correct": rep.done_correct, "done_wrong": rep.done_wrong,
    }
    rows = [asdict(r) for r in rep.rows]
    sys.stdout.write(render(args.format, header, {"rows": (QM_COLUMNS, rows)}))
    return EXIT_OK


# ---------------------------------------------------------------- sweep

def _parse_bits(tokens: List[str]) -> List[str]:
    out = []
    for tok in tokens:
        for t in tok.split(","):
            if t.upper() == "N":
                out.append("N")
            elif t.isdigit():
                out.append(t)
            elif t:
                raise UsageError(f"bad --bits value {t!r}")
    return out


def cmd_sweep(args) -> int:
    cfg = _agent_config(args)
    seed = cfg.rng_seed
    kind = GeneratorKind.UNIFORM if args.uniform else GeneratorKind.PLANTED
    grid = []
    try:
        for n in args.n:
            for b in _parse_bits(args.bits):
                grid.append(GeneratorParams(n, n if b == "N" else int(b), args.count, seed, kind))
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if not grid:
        raise UsageError("empty grid")
    table = conjecture_sweep(grid, cfg, args.budget_factor, threshold_factor=args.c,
                             oracle_cap=args.oracle_cap, workers=args.workers)
    header = {**table.header, "seed": seed}
    sys.stdout.write(render(args.format, header, {"rows": (SWEEP_COLUMNS, table.rows)}))
    return EXIT_OK


# ----------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trialsearch", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one agent on one or more instances")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--instance", help="instance file, or 'paper-s2'")
    src.add_argument("--inline", help='values, e.g. "1 2 3"')
    _add_agent_flags(p)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", help="write a generated instance file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--planted", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_generate)

    for name, func, help_ in (("bench", cmd_bench, "run strategies over a corpus"),
                              ("qmeasure", cmd_qmeasure, "estimate the intelligence measure q")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("corpus", help="instance file, or 'paper-s2'")
        if name == "bench":
            p.add_argument("--strategies", nargs="+", default=["exhaustive"])
            p.add_argument("--reference-cap", type=int, default=ORACLE_CAP,
                           help="skip Z when the corpus has longer instances")
            _add_agent_flags(p)
        else:
            _add_agent_flags(p, strategy="exhaustive")
            p.add_argument("--c", type=int, default=DEFAULT_THRESHOLD_FACTOR)
            p.add_argument("--z", type=int, default=None, help="supply Z instead of computing it")
            p.add_argument("--z-mode", choices=("worst", "sample"), default="worst")
            p.add_argument("--threshold-mode", choices=("log", "tenth"), default="log")
        p.add_argument("--pruned-reference", action="store_true")
        p.add_argument("--oracle-cap", type=int, default=ORACLE_CAP)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="measure success rates over a generator grid")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--bits", nargs="+", required=True, help="bit widths; 'N' means equal to n")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--uniform", action="store_true", help="uniform instead of planted instances")
    _add_agent_flags(p, strategy="greedy+restart", init="random")
    p.add_argument("--c", type=int, default=DEFAULT_THRESHOLD_FACTOR)
    p.add_argument("--oracle-cap", type=int, default=ORACLE_CAP)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
