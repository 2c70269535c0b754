"""Command-line entry point.

Exit codes: 0 on success, 2 for invalid input, 3 when an enumeration guard
is exceeded.  Every JSON report starts with a header that carries the tool
version, the resolved configuration, the seeds and the numeric mode, so two
runs with the same header produce the same bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction

from . import __version__
from . import hypergraph as hg
from . import measures as ms
from . import oracle, sim, stability
from .dynamics import POLICIES, PolicySpec, replay, write_trace

EXIT_OK, EXIT_INPUT, EXIT_GUARD = 0, 2, 3


class InputError(ValueError):
    pass


# --------------------------------------------------------------------------
# input resolution


def load_graph(args) -> hg.Hypergraph:
    src = getattr(args, "hypergraph", None)
    fam = getattr(args, "graph_family", None)
    if src and fam:
        raise InputError("give either --hypergraph or a hypergraph family, not both")
    if fam:
        return hg.generate(fam)
    if not src:
        raise InputError("a hypergraph is required (--hypergraph FILE or --family FAMILY)")
    if os.path.exists(src):
        return hg.load_hypergraph(src)
    # not a file: read it as a family string such as "complete:q=4,r=3"
    return hg.generate(src)


def load_mu(text: str, q: int, exact: bool) -> ms.Measure:
    if text is None or text == "uniform":
        return ms.uniform(q, exact=exact)
    if os.path.exists(text):
        return ms.load_measure(text, q=q, exact=exact)
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise InputError("empty measure")
    weights = [Fraction(p) for p in parts] if exact else [float(Fraction(p)) for p in parts]
    m = ms.make_measure(weights, exact=exact)
    if m.q != q:
        raise InputError(f"measure has {m.q} entries, hypergraph has {q} nodes")
    return m


def policy_of(args) -> PolicySpec:
    prio = json.loads(args.priorities) if getattr(args, "priorities", None) else {}
    return PolicySpec(args.policy, seed=getattr(args, "seed", 0) or 0, priorities=prio,
                      count_basis=getattr(args, "count_basis", "pre"))


def header(args, command: str, seeds=None, numeric: str = "exact") -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "csv", "trace")}
    return {"tool": "hypermatch", "version": __version__, "command": command, "config": config,
            "seeds": seeds or {}, "numeric_mode": numeric}


def emit(report: dict, path=None) -> None:
    text = json.dumps(report, indent=2) + "\n"
    if path:
        with open(path, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    h = hg.generate(args.graph_family)
    emit(h.to_dict(), args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    h = load_graph(args)
    m = load_mu(args.mu, h.q, args.exact)
    ordering = [int(x) for x in args.ordering.split(",")] if args.ordering else None
    body = stability.analyze(h, m, assignment=args.assignment, ordering=ordering, l=args.l,
                             with_S=not args.skip_oracle)
    report = {"header": header(args, "analyze", numeric="exact" if args.exact else "float"),
              "hypergraph": h.to_dict(), "measure": m.as_exact().to_dict(), **body}
    emit(report, args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["condition", "member", "witness"])
            for c in body["conditions"]:
                w.writerow([c["condition"], c["member"], json.dumps(c["witness"]) if c["witness"] else ""])
    return EXIT_OK


def cmd_simulate(args) -> int:
    h = load_graph(args)
    m = load_mu(args.mu, h.q, exact=False)
    pol = policy_of(args)
    stats = sim.replicate_and_classify(h, m, pol, args.horizon, reps=args.reps, base_seed=args.seed,
                                       slope_threshold=args.slope_threshold, growth_ratio=args.growth_ratio,
                                       agreement=args.agreement)
    seeds = {"base_seed": args.seed, "replication_seeds": "SeedSequence(base_seed).spawn(reps)[k]"}
    report = {"header": header(args, "simulate", seeds, "float"), "policy": pol.to_dict(), "stats": stats.to_dict()}
    if args.out and args.out.endswith(".csv"):
        sim.write_csv(stats, args.out)
        emit(report, args.json)
    else:
        emit(report, args.out or args.json)
    return EXIT_OK


def cmd_oracle(args) -> int:
    h = load_graph(args)
    m = load_mu(args.mu, h.q, exact=True)
    pol = policy_of(args)
    if args.what == "drift":
        if args.state:
            counts = [int(x) for x in args.state.split(",")]
            body = oracle.one_step_drift(h, m, pol, counts, steps=args.steps).to_dict()
        elif args.family:
            nodes = oracle.parse_state_family(args.family)
            body = oracle.drift_slopes(h, m, nodes, steps=args.steps, policy=pol, start=args.start).to_dict()
        else:
            raise InputError("oracle drift needs --state or --family")
    else:
        body = oracle.truncated_stationary(h, m, pol, args.cap).to_dict()
    emit({"header": header(args, f"oracle {args.what}", {"policy_seed": pol.seed}), "result": body}, args.out)
    return EXIT_OK


def cmd_replay(args) -> int:
    h = load_graph(args)
    pol = policy_of(args)
    arrivals = [int(x) for x in args.arrivals.split(",") if x.strip()]
    outs = replay(h, pol, arrivals)
    final = outs[-1].new_state if outs else None
    report = {
        "header": header(args, "replay", {"policy_seed": pol.seed}),
        "matches": [{"step": n, "hyperedge": list(o.matched), "removed_positions": list(o.removed_positions)}
                    for n, o in enumerate(outs, 1) if o.matched],
        "final_buffer": list(final.buffer_word) if final else [],
        "final_counts": list(final.counts) if final else [0] * h.q,
    }
    emit(report, args.out)
    if args.trace:
        with open(args.trace, "w") as f:
            write_trace(outs, f)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _graph_args(p, family_flag: bool = True):
    p.add_argument("--hypergraph", help="hypergraph JSON file or family string")
    if family_flag:
        p.add_argument("--family", dest="graph_family", help='family string, e.g. "complete:q=4,r=3"')


def _policy_args(p, default="ml"):
    p.add_argument("--policy", choices=POLICIES, default=default)
    p.add_argument("--priorities", help='JSON map node -> permutation, e.g. \'{"1": [2, 1, 3]}\'')
    p.add_argument("--count-basis", choices=("pre", "post"), default="pre",
                   help="counts scored by ML/MS: before or after adding the arrival")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypermatch", description="Stochastic matching on hypergraphs.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="structure, necessary conditions, obstructions and regions")
    _graph_args(p)
    p.add_argument("--mu", default="uniform", help='"uniform", a JSON file, or comma-separated weights')
    p.add_argument("--exact", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--assignment", choices=("proof", "display"), default="proof",
                   help="which coefficient family the drift set uses on J and its complement")
    p.add_argument("--ordering", help="cycle ordering, comma-separated")
    p.add_argument("--l", type=int, help="cycle overlap for --ordering")
    p.add_argument("--skip-oracle", action="store_true", help="skip the four-step enumeration")
    p.add_argument("--out")
    p.add_argument("--csv", help="also write per-condition verdicts as CSV")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="replicated Monte Carlo runs with a heuristic verdict")
    _graph_args(p)
    p.add_argument("--mu", default="uniform")
    _policy_args(p)
    p.add_argument("--horizon", type=int, default=100_000)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--slope-threshold", type=float, default=0.01)
    p.add_argument("--growth-ratio", type=float, default=2.0)
    p.add_argument("--agreement", type=float, default=0.9)
    p.add_argument("--out", help="CSV (per replication) if it ends in .csv, JSON otherwise")
    p.add_argument("--json", help="JSON report path when --out is a CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="exact drift enumeration or truncated stationary law")
    p.add_argument("what", choices=("drift", "stationary"))
    _graph_args(p, family_flag=False)
    p.add_argument("--graph-family", dest="graph_family", help="hypergraph family string")
    p.add_argument("--mu", default="uniform")
    _policy_args(p)
    p.add_argument("--family", help='state family, e.g. "x*e4" or "x*e1+y*e2"')
    p.add_argument("--state", help="explicit counts vector, comma-separated")
    p.add_argument("--steps", type=int, default=4)
    p.add_argument("--start", type=int, default=8, help="first evaluation point of the varied coordinate")
    p.add_argument("--cap", type=int, default=30)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("replay", help="run a fixed arrival sequence")
    _graph_args(p)
    _policy_args(p, default="fcfm")
    p.add_argument("--arrivals", required=True, help="comma-separated node ids")
    p.add_argument("--trace", help="write JSON lines, one per step")
    p.add_argument("--out")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("generate", help="emit a hypergraph from a family string")
    p.add_argument("--family", dest="graph_family", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except hg.GuardExceeded as exc:
        print(f"hypermatch: guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (hg.HypergraphError, ms.MeasureError, stability.BadFamily, InputError, ValueError,
            KeyError, json.JSONDecodeError, ZeroDivisionError) as exc:
        print(f"hypermatch: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
