"""Entanglement test for multipartite Gaussian covariance matrices.

Exit codes: 0 inconclusive / success, 1 usage error, 2 input error,
3 entanglement detected (``check`` only).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from gausswit.criterion import Status, check_partition_grouping, evaluate_lambda
from gausswit.gamma import ParamVector, build_gamma
from gausswit.optimizer import OptimizerConfig, sample_oracle
from gausswit.state_model import (
    InputError,
    PartitionQuery,
    PartyStructure,
    load_state,
    report_to_json,
    state_to_dict,
    uncertainty_margin,
)
from gausswit.states import mixed_bipartite_cm, symmetric_pure_cm, vacuum_cm

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_ENTANGLED = 3

SEED_ENV = "GAUSSWIT_SEED"
DEMOS = ("symmetric", "mixed", "vacuum")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_partition(spec: str, ps: PartyStructure) -> PartyStructure:
    """Turn a spec such as ``"12|3|45"`` or ``"1,2|3"`` into a party structure.

    Labels are modes.  A partition whose labels run over 1..2S in whole (x, p)
    pairs, such as ``"1234|5678"`` for a four-mode state, is read as CM row
    labels and mapped to the corresponding modes.
    """
    groups = []
    for part in spec.split("|"):
        part = part.strip()
        if not part:
            raise UsageError(f"empty group in partition spec {spec!r}")
        if "," in part:
            items = part.split(",")
        else:
            items = list(part)
        try:
            labels = [int(x) for x in items]
        except ValueError:
            raise UsageError(f"cannot parse partition spec {spec!r}") from None
        if any(x < 1 for x in labels):
            raise UsageError(f"labels in {spec!r} must be positive")
        groups.append(labels)

    flat = [x for g in groups for x in g]
    if max(flat) > ps.total_modes and sorted(flat) == list(range(1, ps.dim + 1)):
        rows_to_modes = []
        for g in groups:
            if len(g) % 2 or g[0] % 2 == 0 or g != list(range(g[0], g[0] + len(g))):
                raise InputError(f"group {g} does not cover whole (x, p) pairs")
            rows_to_modes.append([(r + 1) // 2 for r in g[0::2]])
        groups = rows_to_modes
    return check_partition_grouping(ps, groups)


def parse_parties(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"cannot parse party list {text!r}") from None


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None


def demo_state(name: str, a: float, lam: float, n_parties: int):
    if name == "symmetric":
        return symmetric_pure_cm(a)
    if name == "mixed":
        return mixed_bipartite_cm(lam)
    if name == "vacuum":
        if n_parties < 1:
            raise UsageError("--parties must be >= 1 for the vacuum demo")
        return vacuum_cm(n_parties)
    raise UsageError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")


def _source(args):
    if (args.state is None) == (args.demo is None):
        raise UsageError("give exactly one of --state or --demo")
    if args.state is not None:
        ps, cm = load_state(args.state)
    else:
        try:
            ps, cm = demo_state(args.demo, args.a, args.lam, args.n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if args.partition:
        ps = parse_partition(args.partition, ps)
    return ps, cm


def _query(args, ps: PartyStructure) -> PartitionQuery:
    if args.parties:
        query = PartitionQuery(parse_parties(args.parties))
    else:
        query = PartitionQuery.all_parties(ps.n_parties)
    query.validate_for(ps.n_parties)
    return query


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--state", metavar="PATH", help="state file (JSON)")
    p.add_argument("--demo", choices=DEMOS, help="use a built-in example state")
    p.add_argument("--a", type=float, default=10.0, help="symmetric demo: diagonal a >= 1")
    p.add_argument("--lambda", dest="lam", type=float, default=0.1,
                   help="mixed demo: diagonal shift")
    p.add_argument("--n", type=int, default=2, help="vacuum demo: number of parties")
    p.add_argument("--partition", metavar="SPEC",
                   help='mode grouping, e.g. "12|3|45" or "1,2|3|4,5"')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gausswit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="run the entanglement criterion")
    _add_source(check)
    check.add_argument("--parties", metavar="LIST", help="party subset, e.g. 2,4,5")
    check.add_argument("--restarts", type=int, default=64)
    check.add_argument("--max-iters", type=int, default=500)
    check.add_argument("--seed", type=int, default=None)
    check.add_argument("--tolerance", type=float, default=1e-7,
                       help="decision tolerance: entangled iff lambda < -tolerance")
    check.add_argument("--mode", choices=("gradient", "derivative-free"), default="gradient")
    check.add_argument("--sobol", action="store_true", help="low-discrepancy starting points")
    check.add_argument("--all-minors", action="store_true",
                       help="scan every principal minor instead of the leading ones")
    check.add_argument("--threads", type=int, default=1)
    check.add_argument("--out", metavar="PATH")
    check.add_argument("--no-timestamp", action="store_true")

    demo = sub.add_parser("demo", help="write an example state file")
    demo.add_argument("name", choices=DEMOS)
    demo.add_argument("--a", type=float, default=10.0)
    demo.add_argument("--lambda", dest="lam", type=float, default=0.1)
    demo.add_argument("--parties", type=int, default=2, help="vacuum: number of parties")
    demo.add_argument("--out", metavar="PATH")

    gam = sub.add_parser("gamma-eval", help="print Gamma at given parameters")
    _add_source(gam)
    gam.add_argument("--params", metavar="PATH", required=True,
                     help='JSON with "alpha"/"beta" blocks (or a report with "witness")')
    gam.add_argument("--out", metavar="PATH")

    orc = sub.add_parser("oracle", help="random-sampling minimum of each leading minor")
    _add_source(orc)
    orc.add_argument("--parties", metavar="LIST")
    orc.add_argument("--samples", type=int, default=100_000)
    orc.add_argument("--seed", type=int, default=None)
    orc.add_argument("--out", metavar="PATH")
    return parser


def cmd_check(args) -> int:
    ps, cm = _source(args)
    query = _query(args, ps)
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    try:
        cfg = OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters,
                              seed=resolve_seed(args.seed), mode=args.mode,
                              start="sobol" if args.sobol else "random",
                              decision_tolerance=args.tolerance)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    stamp = None if args.no_timestamp else datetime.now(timezone.utc).isoformat(timespec="seconds")
    report = evaluate_lambda(cm, ps, query, cfg, threads=args.threads,
                             principal="all" if args.all_minors else "leading",
                             timestamp=stamp)
    _emit(report_to_json(report), args.out)

    if uncertainty_margin(cm) < -1e-9:
        print("note: covariance matrix violates M + i*Omega >= 0 (vacuum = I); "
              "reported as given", file=sys.stderr)
    best = report.best
    print(f"{report.status.value}: lambda = {report.lam:.6g} "
          f"(minor k={best.k} on parties {','.join(map(str, best.parties))}; "
          f"party sizes {list(ps.party_sizes)})", file=sys.stderr)
    return EXIT_ENTANGLED if report.status is Status.ENTANGLED else EXIT_OK


def cmd_demo(args) -> int:
    try:
        ps, cm = demo_state(args.name, args.a, args.lam, args.parties)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(json.dumps(state_to_dict(ps, cm)) + "\n", args.out)
    return EXIT_OK


def cmd_gamma_eval(args) -> int:
    ps, cm = _source(args)
    try:
        with open(args.params) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read parameters: {exc}") from exc
    if isinstance(data, dict) and "witness" in data:
        data = data["witness"]
    if not isinstance(data, dict):
        raise InputError("parameter file must be a JSON object")
    params = ParamVector.from_dict(data)
    gamma = build_gamma(cm, ps, params)
    _emit(json.dumps(gamma.tolist()) + "\n", args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    ps, cm = _source(args)
    query = _query(args, ps)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    seed = resolve_seed(args.seed)
    minors = []
    for k in range(1, len(query) + 1):
        value = sample_oracle(cm, ps, query, k, args.samples, seed)
        minors.append({"k": k, "parties": list(query.parties[:k]), "min_value": value})
    out = {
        "partition": list(query.parties),
        "samples": args.samples,
        "seed": seed,
        "min_value": min(m["min_value"] for m in minors),
        "minors": minors,
    }
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "demo": cmd_demo,
    "gamma-eval": cmd_gamma_eval,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, EXIT_USAGE, None) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gausswit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, OSError) as exc:
        print(f"gausswit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # keep the exit-code contract total
        print(f"gausswit: unexpected error: {exc!r}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
