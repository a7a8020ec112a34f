"""Command-line driver.

Three subcommands work over a corpus of items (bundled by default, or a
file / stdin in the same s-expression format):

  simplify   run the constraint pipeline per item, rewrite type and term
  verify     sample ground instantiations and check the semantic claims
  report     metrics table across items and phase configurations

Exit codes: 0 all checks passed, 1 at least one diagnostic (a failed
verification, an unsatisfiable context, a bad input), 2 an internal
invariant was violated.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from .check import CheckError, NoWitness, type_of_value
from .corpus import CorpusItem, JudgmentError, ParseError, load_bundled, parse_corpus
from .graph import context_metrics, to_dot
from .phases import parse_phase_config, simplify
from .polarity import EMPTY_FPS, FamilyError, fp_vty
from .reduce import ReductionBug, Unsatisfiable
from .sample import SampleError, sample_eta
from .semantics import (
    DEFAULT_BUDGET,
    DomainTooLarge,
    ModelBug,
    check_preservation,
    check_square_value,
)
from .subst import apply_value, apply_vty
from .syntax import ValueTerm, ValueType
from .witness import WitnessBug

STANDARD_CONFIGS = ("none", "scc", "dirt", "type", "all")


class InternalError(Exception):
    """An invariant the tool itself promises was violated."""


def config_label(text: str) -> str:
    """Row label for a phase configuration: preset name or `custom`."""
    return text if text in STANDARD_CONFIGS else "custom"


def metrics_row(config: str, ctx) -> dict:
    m = context_metrics(ctx)
    return {
        "config": config,
        "dirt_nodes": m["dirt_params"],
        "dirt_edges": m["dirt_constraints"],
        "type_nodes": m["ty_params"],
        "type_edges": m["ty_constraints"],
    }


def cmd_simplify(item: CorpusItem, config: str, full_dirt: bool = False):
    """Run the pipeline on one item; rewrite its type and term.

    Returns (sim, poltype', term', before_row, after_row). The rewritten
    term is re-typechecked against the rewritten type; a mismatch means
    the substitution layer is broken and raises InternalError.
    """
    instructions = parse_phase_config(config, full_dirt=full_dirt)
    fps = fp_vty(item.poltype) if item.poltype is not None else EMPTY_FPS
    sim = simplify(item.signature, item.context, fps, instructions)
    label = config_label(config)
    before = metrics_row(label, sim.reduction.context)
    after = metrics_row(label, sim.context)
    new_ty = apply_vty(sim.subst, item.poltype) if item.poltype is not None else None
    new_term = None
    if item.term is not None:
        new_term = apply_value(sim.subst, item.term)
        try:
            got = type_of_value(item.signature, sim.context, (), new_term)
        except CheckError as exc:
            raise InternalError(
                f"{item.name}: rewritten term no longer typechecks: {exc}") from exc
        if got != new_ty:
            raise InternalError(
                f"{item.name}: rewritten term has type {got}, wanted {new_ty}")
    return sim, new_ty, new_term, before, after


def cmd_verify(item: CorpusItem, config: str, budget: int = DEFAULT_BUDGET,
               seed: int = 0, samples: int = 20, full_dirt: bool = False) -> dict:
    """Sample ground instantiations and check the semantic claims.

    Per sample: the skeletal projection of the instantiated term commutes
    with evaluation, and the pipeline's witness makes the strengthened
    term denote the same value as the original. Non-enumerable draws are
    retried with every parameter pinned to an enumerable image.
    """
    if item.term is None:
        raise ValueError(f"item {item.name} has no term")
    instructions = parse_phase_config(config, full_dirt=full_dirt)
    fps = fp_vty(item.poltype)
    sim = simplify(item.signature, item.context, fps, instructions)
    failures = []
    for i in range(samples):
        rng = random.Random(f"{seed}:{item.name}:{config}:{i}")
        try:
            _verify_once(item, sim, rng, budget)
        except (ModelBug, FamilyError, NoWitness, SampleError) as exc:
            failures.append({"sample": i, "error": f"{type(exc).__name__}: {exc}"})
    return {
        "item": item.name,
        "config": config_label(config),
        "samples": samples,
        "passed": samples - len(failures),
        "failures": failures,
    }


def _verify_once(item: CorpusItem, sim, rng: random.Random, budget: int) -> None:
    sig = item.signature
    try:
        eta0 = sample_eta(sig, item.context, rng, enumerable=True,
                          poltype=item.poltype, term=item.term)
        check_square_value(sig, (), apply_value(eta0, item.term), budget)
        check_preservation(sig, sim, item.poltype, item.term, eta0, budget)
    except DomainTooLarge:
        eta0 = sample_eta(sig, item.context, rng, poltype=item.poltype,
                          term=item.term, strict=True)
        check_square_value(sig, (), apply_value(eta0, item.term), budget)
        check_preservation(sig, sim, item.poltype, item.term, eta0, budget)


def cmd_report(corpus: list[CorpusItem], configs: list[str],
               full_dirt: bool = False) -> dict:
    """Per-item, per-config graph metrics, plus column sums."""
    per_item = []
    totals = {}
    for c in configs:
        totals[c] = {"config": config_label(c), "dirt_nodes": 0, "dirt_edges": 0,
                     "type_nodes": 0, "type_edges": 0}
    for item in corpus:
        rows = []
        for c in configs:
            _, _, _, _, after = cmd_simplify(item, c, full_dirt=full_dirt)
            rows.append(after)
            for k in ("dirt_nodes", "dirt_edges", "type_nodes", "type_edges"):
                totals[c][k] += after[k]
        per_item.append({"item": item.name, "rows": rows})
    return {"items": per_item, "totals": [totals[c] for c in configs]}


# ---------------------------------------------------------------------------
# output formatting


def _emit_json(data) -> None:
    print(json.dumps(data, indent=2))


def _rows_table(rows: list[dict], lead: str, lead_key: str) -> str:
    header = [lead, "config", "dirt nodes", "dirt edges", "type nodes", "type edges"]
    table = [header]
    for r in rows:
        table.append([str(r.get(lead_key, "")), r["config"],
                      str(r["dirt_nodes"]), str(r["dirt_edges"]),
                      str(r["type_nodes"]), str(r["type_edges"])])
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = []
    for row in table:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def _write_dot(name: str, ctx, fps) -> str:
    path = f"{name}.dot"
    with open(path, "w") as fh:
        fh.write(to_dot(ctx, fps))
    return path


# ---------------------------------------------------------------------------
# argument handling


def _load_corpus(args) -> list[CorpusItem]:
    if args.corpus is None:
        items = load_bundled()
    elif args.corpus == "-":
        items = parse_corpus(sys.stdin.read())
    else:
        with open(args.corpus) as fh:
            items = parse_corpus(fh.read())
    if args.item is not None:
        items = [i for i in items if i.name == args.item]
        if not items:
            raise ValueError(f"no item named {args.item!r}")
    return items


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coersimp", description=__doc__.split("\n")[0])
    subs = p.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("simplify", help="run the pipeline and rewrite items")
    sp.add_argument("corpus", nargs="?", default=None)
    sp.add_argument("--item", default=None)
    sp.add_argument("--phases", default="all")
    sp.add_argument("--emit", default="table", choices=("json", "dot", "table", "core"))
    sp.add_argument("--full-dirt", action="store_true")

    vp = subs.add_parser("verify", help="check the semantic claims by sampling")
    vp.add_argument("corpus", nargs="?", default=None)
    vp.add_argument("--item", default=None)
    vp.add_argument("--phases", default="all")
    vp.add_argument("--emit", default="table", choices=("json", "table"))
    vp.add_argument("--full-dirt", action="store_true")
    vp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    vp.add_argument("--seed", type=int, default=0)
    vp.add_argument("--samples", type=int, default=20)

    rp = subs.add_parser("report", help="metrics table across configurations")
    rp.add_argument("corpus", nargs="?", default=None)
    rp.add_argument("--item", default=None)
    rp.add_argument("--phases", action="append", default=None,
                    help="config to include as a row; repeatable "
                         "(default: none scc dirt type all)")
    rp.add_argument("--emit", default="table", choices=("json", "table"))
    rp.add_argument("--full-dirt", action="store_true")

    return p


def _run_simplify(args, items) -> int:
    out = []
    for item in items:
        sim, new_ty, new_term, before, after = cmd_simplify(
            item, args.phases, full_dirt=args.full_dirt)
        out.append((item, sim, new_ty, new_term, before, after))
    if args.emit == "json":
        _emit_json([
            {
                "item": item.name,
                "config": before["config"],
                "before": {k: before[k] for k in
                           ("dirt_nodes", "dirt_edges", "type_nodes", "type_edges")},
                "after": {k: after[k] for k in
                          ("dirt_nodes", "dirt_edges", "type_nodes", "type_edges")},
                "type": None if new_ty is None else str(new_ty),
                "term": None if new_term is None else str(new_term),
            }
            for item, sim, new_ty, new_term, before, after in out
        ])
    elif args.emit == "dot":
        for item, sim, _, _, _, _ in out:
            print(_write_dot(item.name, sim.context, sim.phases.fps))
    elif args.emit == "core":
        for item, sim, new_ty, new_term, _, _ in out:
            print(f"item {item.name}")
            print(f"  context: {sim.context.describe() or '(empty)'}")
            if new_ty is not None:
                print(f"  type: {new_ty}")
            if new_term is not None:
                print(f"  term: {new_term}")
    else:
        rows = []
        for item, _, _, _, before, after in out:
            rows.append(dict(before, item=f"{item.name}/before"))
            rows.append(dict(after, item=f"{item.name}/after"))
        print(_rows_table(rows, "item", "item"))
    return 0


def _run_verify(args, items) -> int:
    reports = []
    for item in items:
        if item.term is None:
            continue
        reports.append(cmd_verify(item, args.phases, budget=args.budget,
                                  seed=args.seed, samples=args.samples,
                                  full_dirt=args.full_dirt))
    if args.emit == "json":
        _emit_json(reports)
    else:
        for r in reports:
            status = "ok" if not r["failures"] else "FAIL"
            print(f"{r['item']:24s} {r['config']:8s} "
                  f"{r['passed']}/{r['samples']} {status}")
            for f in r["failures"]:
                print(f"    sample {f['sample']}: {f['error']}")
    return 1 if any(r["failures"] for r in reports) else 0


def _run_report(args, items) -> int:
    configs = args.phases if args.phases else list(STANDARD_CONFIGS)
    report = cmd_report(items, configs, full_dirt=args.full_dirt)
    if args.emit == "json":
        _emit_json(report)
    else:
        rows = []
        for entry in report["items"]:
            for row in entry["rows"]:
                rows.append(dict(row, item=entry["item"]))
        for row in report["totals"]:
            rows.append(dict(row, item="TOTAL"))
        print(_rows_table(rows, "item", "item"))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        items = _load_corpus(args)
    except (ParseError, JudgmentError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "simplify":
            return _run_simplify(args, items)
        if args.command == "verify":
            return _run_verify(args, items)
        return _run_report(args, items)
    except Unsatisfiable as exc:
        print(f"unsatisfiable: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InternalError, ReductionBug, WitnessBug) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
