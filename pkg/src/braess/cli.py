"""Command-line interface: ``braess <command> -i instance.json``.

Every command prints a JSON result document (or, with ``--table``, a
Markdown/CSV table; ``export-dot`` and ``gen-gap`` print DOT and an instance
document respectively). Exit status: 0 success, 2 usage or parse error,
3 enumeration bound exceeded, 4 infeasible or unsupported model.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
import time
from fractions import Fraction
from typing import Any, Sequence

from . import constructions as cons
from . import equilibrium as eq
from . import io
from .errors import (BraessError, CapacityError, DomainError, FeasibilityError, InfeasibleError,
                     SearchFailure, StructureError, UnsupportedModelError)
from .game import as_fraction, bottleneck_cost, normalize_rate
from .search import (ApproxParams, approx_best_subnetwork, edge_deviation, exhaustive_best_subnetwork,
                     k_of_eps, sparsify_flow)
from .topology import enumerate_paths, enumerate_st_cuts

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_INFEASIBLE = 0, 2, 3, 4


class UsageError(BraessError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rational_arg(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed rational {text!r}") from None


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="braess", description="Braess's paradox in bottleneck routing games")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_, needs_input=True):
        sp = sub.add_parser(name, help=help_)
        if needs_input:
            sp.add_argument("-i", "--input", required=True, help="instance document (- for stdin)")
        sp.add_argument("-o", "--output", help="also write the JSON document here")
        sp.add_argument("--table", choices=("md", "csv"), help="print a table instead of JSON")
        sp.add_argument("--threads", type=int, help="worker threads for per-cut LPs")
        return sp

    add("solve-opt", "optimal bottleneck cost and a witness flow")
    add("worst-nash", "worst Nash flow (linear latencies)")
    add("poa", "price of anarchy")
    add("classify", "paradox classification via exhaustive subnetwork search")
    add("best-subnet", "exhaustive best subnetwork")
    sp = add("approx-best-subnet", "candidate-flow approximation of the best subnetwork")
    sp.add_argument("--eps", type=_rational_arg, required=True)
    sp.add_argument("--delta", type=_rational_arg, required=True)
    sp.add_argument("--xi", type=_rational_arg, help="Lipschitz constant (default: max slope)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--log-base", choices=("natural", "base-2"), default="natural")
    sp = add("sparsify", "sparse path-multiset approximation of a flow")
    sp.add_argument("--eps", type=_rational_arg, required=True)
    sp.add_argument("--flow", help="flow document (default: the optimal witness)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--log-base", choices=("natural", "base-2"), default="natural")
    sp = add("gen-gap", "generate a gap gadget from a 2DDP document", needs_input=False)
    sp.add_argument("--ddp", required=True, help="2DDP document")
    sp.add_argument("--eps", type=_rational_arg, help="eps for level 0 (later levels use the default)")
    sp.add_argument("--levels", type=int, default=0)
    sp.add_argument("--rate", type=_rational_arg, default=Fraction(1))
    sp = add("witness-flows", "explicit certificate flows of a generated gadget")
    sp.add_argument("--rate", type=_rational_arg, required=True)
    add("paths", "enumerate simple s-t paths")
    add("cuts", "enumerate s-t cuts")
    sp = add("export-dot", "Graphviz export")
    sp.add_argument("--flow", help="'worst', 'opt' or a flow document")
    return p


def _flow_out(flow) -> dict:
    return io.flow_to_dict(flow)


def _ddp_from_doc(doc: dict) -> cons.TwoDDPInstance:
    try:
        edges = []
        for i, e in enumerate(doc["edges"]):
            if len(e) == 2:
                edges.append((f"{e[0]}-{e[1]}", e[0], e[1]))
            else:
                edges.append(tuple(e))
        nodes = doc.get("nodes") or sorted({x for _, u, v in edges for x in (u, v)}
                                           | {doc[k] for k in ("s1", "s2", "t1", "t2")})
        return cons.TwoDDPInstance(tuple(nodes), tuple(edges), doc["s1"], doc["s2"], doc["t1"], doc["t2"])
    except (KeyError, TypeError, ValueError) as exc:
        raise io.SchemaError(f"malformed 2DDP document: {exc}") from None


def _gap_from_metadata(instance, meta) -> cons.GapNetwork:
    if not meta or "ddp" not in meta:
        raise UsageError("instance has no gadget metadata; generate it with gen-gap")
    d = _ddp_from_doc(meta["ddp"])
    eps = [as_fraction(x) for x in meta["eps_schedule"]]
    gap = cons.build_gap_tower(d, len(eps) - 1, eps)
    if gap.instance.with_rate(instance.rate) != instance:
        raise UsageError("instance does not match the gadget described by its metadata")
    return gap


def _execute(args) -> tuple[dict, dict, dict, Any]:
    """Returns (parameters, outputs, counts, raw_text_override)."""
    cmd = args.command
    params: dict[str, Any] = {}
    counts: dict[str, Any] = {}
    if cmd == "gen-gap":
        d = _ddp_from_doc(io._load(_read(args.ddp)))
        gap = cons.build_gap_network(d, args.eps or Fraction(1, 8), args.rate)
        for _ in range(args.levels):
            gap = cons.amplify_gap(d, gap)
        text = io.emit_instance(gap.instance, gap.metadata())
        return {"levels": args.levels}, {}, {}, text

    text = _read(args.input)
    inst, meta = io.parse_document(text)
    params["input"] = args.input
    params["digest"] = io.instance_digest(inst)
    out: dict[str, Any] = {}
    if cmd == "solve-opt":
        cost, witness = eq.optimal_bottleneck_cost(inst)
        out = {"optimal_cost": cost, "witness": _flow_out(witness)}
    elif cmd == "worst-nash":
        res = eq.worst_nash_flow(inst, threads=args.threads)
        out = {"worst_nash_cost": res.cost, "cut": sorted(res.cut), "flow": _flow_out(res.flow),
               "exhaustive": res.exhaustive}
        counts["cuts_evaluated"] = res.cuts_evaluated
    elif cmd == "poa":
        opt = eq.optimal_value(inst)
        worst = eq.worst_nash_value(inst, threads=args.threads)
        if opt == 0:
            raise DomainError("optimal cost is 0; the price of anarchy is undefined")
        out = {"poa": worst / opt, "optimal_cost": opt, "worst_nash_cost": worst}
    elif cmd in ("classify", "best-subnet"):
        rep = exhaustive_best_subnetwork(inst, threads=args.threads)
        out = rep.to_dict()
        counts = {"cores_evaluated": out.pop("evaluated"), "cores": out.pop("cores"),
                  "subsets": out.pop("subsets")}
        if meta and "d_copies" in meta and "ddp" in meta:
            gap = _gap_from_metadata(inst, meta)
            out["good_copies"] = cons.good_copies(gap, rep.subnetwork)
    elif cmd == "approx-best-subnet":
        norm = normalize_rate(inst)
        xi = args.xi if args.xi is not None else max(e.latency.max_slope() for e in norm.edges)
        ap = ApproxParams(args.eps, args.delta, xi, norm.m, args.log_base)
        params.update(eps=args.eps, delta=args.delta, xi=xi, seed=args.seed, log_base=args.log_base,
                      normalized=inst.rate != 1)
        res = approx_best_subnetwork(norm, ap)
        out = {"subnetwork": list(res.subnetwork), "estimate": res.estimate,
               "flow": _flow_out(res.flow), "bottleneck": bottleneck_cost(res.flow).bottleneck,
               "k": ap.k, "eps1": ap.eps1, "eps2": ap.eps2}
        counts = {"candidate_flows": res.candidates, "candidate_subnetworks": res.subnetworks}
    elif cmd == "sparsify":
        norm = normalize_rate(inst)
        if args.flow:
            flow = io.parse_flow(_read(args.flow), norm)
        else:
            flow = eq.optimal_bottleneck_cost(norm)[1]
        cand = sparsify_flow(flow, args.eps, seed=args.seed, log_base=args.log_base)
        params.update(eps=args.eps, seed=args.seed, log_base=args.log_base)
        out = {"k": k_of_eps(args.eps, norm.m, args.log_base), "size": cand.size,
               "support": len(cand.counts),
               "counts": [{"edges": list(p), "count": c} for p, c in cand.counts.items()],
               "deviation": edge_deviation(flow, cand.flow)}
    elif cmd == "witness-flows":
        gap = _gap_from_metadata(inst, meta)
        params["rate"] = args.rate
        flows = []
        for w in cons.build_witness_flows(gap, args.rate):
            flows.append({"role": w.role, "cost": bottleneck_cost(w.flow).bottleneck,
                          "expected_cost": w.expected_cost, "nash": eq.is_nash_flow(w.flow).verdict,
                          "subnetwork_edges": len(w.subnetwork), "flow": _flow_out(w.flow)})
        out = {"witnesses": flows, "gamma1": gap.gamma1, "gamma2": gap.gamma2, "level": gap.level}
    elif cmd == "paths":
        ps = enumerate_paths(inst)
        out = {"count": len(ps), "paths": [list(p) for p in ps]}
    elif cmd == "cuts":
        cuts = enumerate_st_cuts(inst)
        out = {"count": len(cuts), "cuts": [sorted(c) for c in cuts]}
    elif cmd == "export-dot":
        flow = None
        if args.flow == "worst":
            flow = eq.worst_nash_flow(inst).flow
        elif args.flow == "opt":
            flow = eq.optimal_bottleneck_cost(inst)[1]
        elif args.flow:
            flow = io.parse_flow(_read(args.flow), inst)
        return params, {}, {}, io.export_dot(inst, flow)
    return params, out, counts, None


def _flatten(prefix: str, value, rows: list) -> None:
    if isinstance(value, dict):
        if set(value) == {"paths"}:
            rows.append((prefix, f"<{len(value['paths'])} paths>"))
            return
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, rows)
    elif isinstance(value, list):
        if all(isinstance(v, dict) for v in value) and value:
            for i, v in enumerate(value):
                _flatten(f"{prefix}[{i}]", v, rows)
        elif len(value) <= 20:
            rows.append((prefix, " ".join(v if isinstance(v, str) else json.dumps(v) for v in value)))
        else:
            rows.append((prefix, f"<{len(value)} items>"))
    else:
        rows.append((prefix, value))


def _table(outputs: dict, fmt: str) -> str:
    rows: list = []
    _flatten("", outputs, rows)
    if fmt == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows(rows)
        return buf.getvalue()
    lines = ["| key | value |", "| --- | --- |"]
    lines += ["| {} | {} |".format(k, str(v).replace("|", "\\|")) for k, v in rows]
    return "\n".join(lines) + "\n"


def run_command(argv: Sequence[str]) -> tuple[int, dict | None, str]:
    """Run one command; returns (exit status, result document or None, text printed to stdout)."""
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(list(argv))
        params, outputs, counts, raw = _execute(args)
    except (UsageError, io.ParseError, DomainError, argparse.ArgumentTypeError) as exc:
        return EXIT_USAGE, None, f"error: {exc}\n"
    except CapacityError as exc:
        return EXIT_CAPACITY, None, f"error: {exc}\n"
    except (InfeasibleError, UnsupportedModelError, SearchFailure, FeasibilityError, StructureError) as exc:
        return EXIT_INFEASIBLE, None, f"error: {exc}\n"
    if raw is not None:
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(raw)
        return EXIT_OK, None, raw
    digest = params.pop("digest")
    doc = {"schema_version": io.SCHEMA_VERSION, "command": args.command, "input_digest": digest,
           "parameters": io.jsonable(params), "outputs": io.jsonable(outputs),
           "counts": counts, "wall_time": round(time.perf_counter() - start, 6)}
    text = json.dumps(doc, indent=2) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    if args.table:
        text = _table(doc["outputs"], args.table)
    return EXIT_OK, doc, text


def main(argv: Sequence[str] | None = None) -> int:
    status, _, text = run_command(sys.argv[1:] if argv is None else argv)
    (sys.stdout if status == EXIT_OK else sys.stderr).write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
