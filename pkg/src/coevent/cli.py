"""Command-line front end.

Exit codes: 0 success, 1 validation or I/O failure, 2 budget exceeded,
3 a walk reached a co-event with no allowed successor.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence, TextIO

from . import __version__
from .coevents import CoEvent
from .errors import BudgetExceededError, CoEventError, WalkTerminated
from .measure import DEFAULT_TOL
from .oracle import ORACLE_MAX_N, check_theorems, coevent_table, brute_force_scheme_step
from .schemes import SchemeState, WalkPolicy, run_exhaustive, run_walk, scheme_name
from .solver import INITIAL, Budget, minimal_prolongations
from .stages import Stage
from .systems import System, build, dump_matrices, load_system

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_DEAD_END = 0, 1, 2, 3
ENV_CAP = "COEVENT_MAX_HISTORIES"


def _cap(args) -> int:
    if args.max_histories is not None:
        return args.max_histories
    env = os.environ.get(ENV_CAP)
    return int(env) if env else 20


def _system(args) -> tuple[System, Budget]:
    spec = load_system(args.system)
    cap = _cap(args)
    tol = args.tolerance if args.tolerance is not None else spec.tolerance
    return build(spec, args.stages, tol, cap), Budget(max_histories=cap)


def coevent_record(phi: CoEvent, stage: Stage, lineage: Sequence[int]) -> dict:
    return {
        "monomials": [stage.labels_of(m) for m in phi.key],
        "support": stage.labels_of(phi.support_mask),
        "lineage": list(lineage),
        "text": phi.render(stage),
    }


def state_record(state: SchemeState, stage: Stage, summary: bool = False) -> dict:
    out: dict = {"t": state.t, "count": state.count}
    if summary:
        out["supports"] = [
            {
                "support": stage.labels_of(b.support),
                "count": b.count,
                "lineage": [] if b.parent is None else [b.parent],
            }
            for b in state.branches
        ]
    else:
        out["coevents"] = [coevent_record(p, stage, lin) for p, lin in zip(state.coevents, state.lineage)]
    if state.dead_ends:
        out["dead_ends"] = list(state.dead_ends)
    return out


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False)


def cmd_run(args, out: TextIO) -> int:
    system, budget = _system(args)
    scheme = scheme_name(args.scheme)
    if args.mode == "maxaff" and scheme == "basic":
        scheme = "max_affirmative"
    result = run_exhaustive(system, scheme, args.stages, budget)
    lines = [_dumps(state_record(s, system.seq[s.t], args.summary)) for s in result.states]
    target = open(args.out, "w", encoding="utf-8") if args.out else out
    try:
        for line in lines:
            print(line, file=target)
    finally:
        if args.out:
            target.close()
    if args.check:
        report = check_theorems(result)
        print(report.to_text(), file=sys.stderr)
        if not report.ok:
            return EXIT_INVALID
    return EXIT_OK


def oracle_comparison(system: System, states: Sequence[SchemeState], budget: Budget) -> list[str]:
    """Engine versus brute force at every stage small enough for the oracle."""
    problems = []
    for t, stage in enumerate(system.seq):
        if stage.n > ORACLE_MAX_N:
            continue
        prevs = [INITIAL] if t == 0 else list(states[t - 1].coevents)
        for prev in prevs:
            engine = {coevent_table(p) for c in minimal_prolongations(prev, stage, system.matrices[t], "all", budget) for p in c.coevents(budget)}
            oracle = brute_force_scheme_step(prev, stage, system.matrices[t]).table_set
            if engine != oracle:
                problems.append(f"stage {t}: engine has {len(engine)} co-events, oracle {len(oracle)}")
    return problems


def cmd_verify(args, out: TextIO) -> int:
    system, budget = _system(args)
    diag = system.validate()
    worst = diag.violations()
    print("measure: " + ", ".join(f"{k} {v:.2e}" for k, v in worst.items()), file=out)
    if not diag.ok:
        t, check, value = diag.failures()[0]
        print(f"FAIL measure {check} at stage {t} ({value:.2e})", file=out)
        return EXIT_INVALID
    result = run_exhaustive(system, scheme_name(args.scheme), args.stages, budget)
    report = check_theorems(result)
    print(report.to_json() if args.json else report.to_text(), file=out)
    if not report.ok:
        bad = report.first_failure()
        print(f"FAIL {bad.name} at stage {bad.t}", file=out)
        return EXIT_INVALID
    if args.oracle:
        problems = oracle_comparison(system, result.states, budget)
        if problems:
            print("FAIL oracle: " + problems[0], file=out)
            return EXIT_INVALID
        print("oracle: engine matches brute force", file=out)
    return EXIT_OK


def _interactive(inp: TextIO, err: TextIO):
    def choose(t: int, cands):
        print(f"choose a co-event for stage {t} [0-{len(cands) - 1}]: ", end="", file=err, flush=True)
        line = inp.readline()
        if not line:
            raise EOFError("no choice on standard input")
        return int(line.strip())

    return choose


def cmd_walk(args, out: TextIO) -> int:
    system, budget = _system(args)
    if args.replay is not None:
        policy = WalkPolicy.replay([int(x) for x in args.replay.split(",") if x.strip()])
    elif args.policy == "interactive":
        policy = WalkPolicy("interactive", chooser=_interactive(sys.stdin, sys.stderr))
    elif args.policy == "random":
        policy = WalkPolicy("seeded_random", seed=args.seed)
    else:
        policy = WalkPolicy("first")
    try:
        transcript = run_walk(system, args.scheme, policy, args.stages, budget)
        steps, failure = transcript.steps, None
    except WalkTerminated as exc:
        steps, failure = exc.transcript.steps, exc
    for step in steps:
        stage = system.seq[step.t]
        if args.json:
            print(_dumps({"t": step.t, "candidates": [p.render(stage) for p in step.candidates], "choice": step.choice}), file=out)
            continue
        print(f"t={step.t}  {len(step.candidates)} candidate(s)", file=out)
        for i, p in enumerate(step.candidates):
            mark = "->" if i == step.choice else "  "
            print(f"  {mark} [{i}] {p.render(stage)}", file=out)
    print("choices: " + ",".join(str(s.choice) for s in steps), file=out)
    if failure is not None:
        print(f"walk terminated at stage {failure.stage}", file=sys.stderr)
        return EXIT_DEAD_END
    return EXIT_OK


def cmd_inspect(args, out: TextIO) -> int:
    system, _ = _system(args)
    diag = system.validate()
    for st, rep in zip(system.seq, diag.stages):
        kind = "classical" if rep.classical else "interfering"
        print(
            f"stage {st.t}: {st.n} histories, {rep.null_histories} null, {kind}, "
            f"min eig {rep.min_eigenvalue:.2e}, normalisation {rep.normalization:.2e}"
            + ("" if rep.consistency is None else f", consistency {rep.consistency:.2e}"),
            file=out,
        )
    if args.dump:
        with open(args.dump, "w", encoding="utf-8") as fh:
            json.dump(dump_matrices(system), fh, ensure_ascii=False)
        print(f"wrote {args.dump}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coevent", description="Evolving co-event schemes over finite history spaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scheme_required=False):
        p.add_argument("--system", required=True, help="system spec JSON file")
        p.add_argument("--stages", type=int, required=True, help="final stage T")
        p.add_argument("--max-histories", type=int, default=None, help=f"enumeration cap (env {ENV_CAP}, default 20)")
        p.add_argument("--tolerance", type=float, default=None, help=f"relative null tolerance (default {DEFAULT_TOL})")
        p.add_argument("--scheme", default=None if scheme_required else "basic", required=scheme_required,
                       choices=["classical", "basic", "maxaff", "global"])

    p = sub.add_parser("run", help="every allowed co-event at every stage, as JSON lines")
    common(p, scheme_required=True)
    p.add_argument("--mode", choices=["all", "maxaff"], default="all")
    p.add_argument("--out", default=None)
    p.add_argument("--summary", action="store_true", help="list supports and counts instead of co-events")
    p.add_argument("--check", action="store_true", help="also run the theorem checks")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="measure validation and theorem checks")
    common(p)
    p.add_argument("--oracle", action="store_true", help="compare with brute force where a stage has at most 4 histories")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("walk", help="choose one expressible sequence")
    common(p, scheme_required=True)
    p.add_argument("--policy", choices=["first", "random", "interactive"], default="first")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replay", default=None, help="comma-separated recorded choices")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("inspect", help="stage summaries and matrix dump")
    common(p)
    p.add_argument("--dump", default=None, help="write the built matrices as a custom spec")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = out or sys.stdout
    try:
        return args.func(args, out)
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (CoEventError, OSError, ValueError, KeyError, EOFError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
