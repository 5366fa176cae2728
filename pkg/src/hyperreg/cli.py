"""Batch front-end: generate instances, compute metrics, run the pipeline.

Commands: generate | analyze | compress | schedule-dump.  Reports are
canonical JSON (stable key order) or flat CSV tables; every numeric field
carries its exact rational form alongside a decimal rendering.  Exit status
is 0 iff no errors; warnings never change it.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from .core import (
    ParseError,
    parse_decomposition,
    parse_hypergraph,
    serialize_decomposition,
    serialize_hypergraph,
    validate_decomposition,
)
from .decomposition import equitability_check, homogeneity_report, pair_part_stats, triad_tables
from .exactmath import parse_frac
from .generators import gen_ip2_hypergraph, gen_planted_decomposition, two_level_profile
from .pipeline import (
    ScheduleModeError,
    compress_decomposition,
    derive_theory_schedule,
    desk_schedule,
    schedule_from_json,
    verify_schedule_chain,
)
from .quasirandomness import dev2, dev23
from .reporting import canonical_json, make_report, table_to_csv
from .vc import vc2_dim


class UsageError(Exception):
    pass


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _load_json(path):
    text = _read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}") from None


def _write(path, text):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return str(path)


def _emit_report(doc, out, fmt):
    written = []
    if fmt == "json":
        written.append(_write(f"{out}.report.json", canonical_json(doc)))
    else:
        for name, rows in doc["tables"].items():
            if isinstance(rows, list) and rows and isinstance(rows[0], dict):
                written.append(_write(f"{out}.{name}.csv", table_to_csv(rows)))
        written.append(_write(f"{out}.report.json", canonical_json(doc)))
    return written


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    params = _load_json(args.params)
    if "generator" not in params:
        raise UsageError(f"{args.params}: missing 'generator' field")
    gen = params["generator"]
    p = params.get("params", {})
    seed = int(p.get("seed", args.seed))
    out = args.out
    written = []
    if gen == "planted_decomposition":
        profile = p.get("profile")
        if profile is None:
            profile = two_level_profile(int(p.get("groups_per_pair", 2)),
                                        parse_frac(p.get("hi", "19/20")),
                                        parse_frac(p.get("lo", "1/20")),
                                        rule=p.get("profile_rule", "parity"))
        else:
            profile = {tuple(int(x) for x in k.split(",")): parse_frac(v)
                       for k, v in profile.items()}
        inst = gen_planted_decomposition(
            n=int(p["n"]), t=int(p["t"]), ell=int(p["ell"]),
            groups_per_pair=int(p.get("groups_per_pair", 2)),
            density_profile=profile, noise=float(p.get("noise", 0.0)), seed=seed)
        written.append(_write(f"{out}.hypergraph.txt",
                              serialize_hypergraph(inst.hypergraph)))
        written.append(_write(f"{out}.decomposition.json",
                              serialize_decomposition(inst.decomposition)))
        gt = {
            "generator": gen, "seed": seed, "params": {k: str(v) for k, v in p.items()},
            "group_labels": {f"{i},{j}": list(v)
                             for (i, j), v in sorted(inst.ground_truth.group_labels.items())},
            "planted_probs": {",".join(map(str, k)): v
                              for k, v in sorted(inst.ground_truth.planted_probs.items())},
            "profile": {",".join(map(str, k)): str(v)
                        for k, v in sorted(inst.ground_truth.profile.items())},
        }
        written.append(_write(f"{out}.ground_truth.json",
                              json.dumps(gt, sort_keys=True, indent=1) + "\n"))
    elif gen == "ip2_hypergraph":
        h = gen_ip2_hypergraph(int(p.get("k", 2)), int(p.get("n_extra", 0)), seed)
        written.append(_write(f"{out}.hypergraph.txt", serialize_hypergraph(h)))
    else:
        raise UsageError(f"unknown generator {gen!r}")
    for w in written:
        print(w)
    return 0


# ---------------------------------------------------------------------------
# analyze


def cmd_analyze(args) -> int:
    h = parse_hypergraph(_read(args.hypergraph))
    p = parse_decomposition(_read(args.decomposition))
    metrics = [m.strip() for m in args.metric.split(",")] if args.metric else \
        ["dev2", "homogeneity", "equitability"]
    eps1 = parse_frac(args.eps1)
    eps2 = parse_frac(args.eps2)
    mu = parse_frac(args.mu)
    warnings = []
    tables = {}
    t0 = time.monotonic()
    val = validate_decomposition(h, p)
    tables["validation"] = val.to_dict()
    if "dev2" in metrics:
        rows = []
        stats = pair_part_stats(p, eps2)
        for (i, j), st in sorted(stats.items()):
            for alpha, (res, ok) in enumerate(zip(st.results, st.passes)):
                rows.append({"pair": f"{i},{j}", "part": alpha,
                             "density": res.density, "normalized": res.normalized,
                             "passes": ok})
        tables["dev2"] = rows
    if "dev23" in metrics:
        rows = []
        max_part = max((len(v) for v in p.vertex_parts), default=0)
        budget = int(args.dev23_budget)
        total_triads = sum(p.ell_of(i, j) * p.ell_of(i, s) * p.ell_of(j, s)
                           for (i, j, s) in p.triple_classes())
        if max_part > 16 or total_triads > budget:
            warnings.append(f"dev23 exact infeasible (parts {max_part}, "
                            f"triads {total_triads}); skipping eight-fold sums")
        else:
            for (i, j, s) in p.triple_classes():
                for a in range(p.ell_of(i, j)):
                    for b in range(p.ell_of(i, s)):
                        for c in range(p.ell_of(j, s)):
                            res = dev23(h, p.triad(i, j, s, a, b, c))
                            rows.append({"address": f"{i},{j},{s},{a},{b},{c}",
                                         "d3": res.d3, "raw_sum": res.raw_sum,
                                         "triangles": res.triangle_count})
            tables["dev23"] = rows
    if "homogeneity" in metrics:
        rep = homogeneity_report(h, p, mu=mu, eps1=eps1, eps2=eps2,
                                 regularity="sufficient", include_table=False)
        tables["homogeneity"] = {
            "mu": rep.mu, "good_triple_fraction": rep.good_triple_fraction,
            "good_triple_fraction_absolute": rep.good_triple_fraction_absolute,
            "regular_triple_fraction": rep.regular_triple_fraction,
            "regular_mode": rep.regular_mode,
            "cross_triples": rep.cross_triples,
        }
    if "equitability" in metrics:
        eq = equitability_check(p, eps1, eps2)
        tables["equitability"] = {
            "is_equipartition": eq.is_equipartition,
            "part_size_range": list(eq.part_size_range),
            "covered_pair_fraction": eq.covered_pair_fraction,
            "covered_pair_fraction_cross": eq.covered_pair_fraction_cross,
            "predicate": eq.predicate,
        }
    if "vc2" in metrics:
        res = vc2_dim(h, k_max=int(args.vc2_kmax), budget=int(args.vc2_budget))
        if not res.complete:
            warnings.append("vc2 search budget exhausted; value is a lower bound")
        tables["vc2"] = {"dimension": res.dimension, "complete": res.complete}
    timing = {"total_s": round(time.monotonic() - t0, 3)}
    doc = make_report("analyze", {
        "hypergraph": str(args.hypergraph), "decomposition": str(args.decomposition),
        "metric": ",".join(metrics), "eps1": eps1, "eps2": eps2, "mu": mu,
    }, args.seed, tables, timing=timing, warnings=warnings)
    for w in _emit_report(doc, args.out, args.format):
        print(w)
    return 0


# ---------------------------------------------------------------------------
# compress


def cmd_compress(args) -> int:
    h = parse_hypergraph(_read(args.hypergraph))
    p = parse_decomposition(_read(args.decomposition))
    sched = schedule_from_json(_load_json(args.schedule)) if args.schedule \
        else desk_schedule()
    if sched.mode != "desk":
        # mode gate: dump the symbolic schedule instead of running
        print("theory-mode schedule is not runnable; writing symbolic dump",
              file=sys.stderr)
        out = _write(f"{args.out}.schedule.json", canonical_json(sched.to_json()))
        print(out)
        return 0
    t0 = time.monotonic()
    q, report = compress_decomposition(h, p, sched, seed=args.seed,
                                       threads=args.threads)
    timing = {"total_s": round(time.monotonic() - t0, 3)}
    written = [_write(f"{args.out}.q.json", serialize_decomposition(q))]
    doc = make_report("compress", {
        "hypergraph": str(args.hypergraph), "decomposition": str(args.decomposition),
        "schedule": str(args.schedule),
    }, args.seed, {"pipeline": report.to_json_dict()}, timing=timing)
    written.extend(_emit_report(doc, args.out, args.format))
    for w in written:
        print(w)
    return 0


# ---------------------------------------------------------------------------
# schedule-dump


def cmd_schedule_dump(args) -> int:
    if args.mode == "theory":
        sched = derive_theory_schedule(parse_frac(args.eps1), args.k, args.D,
                                       parse_frac(args.c1))
        doc = sched.to_json()
        doc["chain_checks"] = verify_schedule_chain(sched)
    else:
        sched = desk_schedule(delta=parse_frac(args.delta),
                              f_val=parse_frac(args.f_val),
                              ell1=args.ell1, eps1=parse_frac(args.eps1))
        doc = sched.to_json()
    text = canonical_json(doc)
    if args.out:
        print(_write(f"{args.out}.schedule.json", text))
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperreg", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", default="hyperreg_out")

    g = sub.add_parser("generate", help="write instance files from a parameter file")
    g.add_argument("params", help="JSON parameter file")
    common(g)
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="compute metrics for an instance")
    a.add_argument("hypergraph")
    a.add_argument("decomposition")
    a.add_argument("--metric", default="", help="comma list: dev2,dev23,"
                   "homogeneity,equitability,vc2 (default: dev2,homogeneity,"
                   "equitability)")
    a.add_argument("--eps1", default="1/10")
    a.add_argument("--eps2", default="1/10")
    a.add_argument("--mu", default="1/10")
    a.add_argument("--vc2-kmax", default=2)
    a.add_argument("--vc2-budget", default=2_000_000)
    a.add_argument("--dev23-budget", default=4096)
    common(a)
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("compress", help="run the compression pipeline")
    c.add_argument("hypergraph")
    c.add_argument("decomposition")
    c.add_argument("--schedule", help="JSON schedule file (desk mode)")
    common(c)
    c.set_defaults(func=cmd_compress)

    d = sub.add_parser("schedule-dump", help="print a schedule as canonical JSON")
    d.add_argument("--mode", choices=("desk", "theory"), default="desk")
    d.add_argument("--eps1", default="1/2")
    d.add_argument("--k", type=int, default=1)
    d.add_argument("--D", type=int, default=1)
    d.add_argument("--c1", default="1")
    d.add_argument("--delta", default="1/10")
    d.add_argument("--f-val", dest="f_val", default="1/10")
    d.add_argument("--ell1", type=int, default=None)
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_schedule_dump)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, ScheduleModeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
