"""Command-line entry point: ``shiftgraphs <command> ...``.

Exit codes: 0 success, 1 failed reproduction check, 2 validation error or
bad usage, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import acceptance, debruijn, rng
from .errors import BudgetError, ShiftGraphsError, ValidationError
from .graphs import build_truncated, height_batch, shift_graph
from .pattern_oracle import (
    ColoringSpec,
    best_pattern_coloring,
    f_eps_coloring,
    finite_path_construction_measure,
    z_measure_exact,
    z_measure_mc,
)
from .percolation import sample_extremal, sweep
from .relations import (
    OrderRelation,
    RelationSet,
    canonical_pattern,
    compute_w,
    core,
    edge_threshold,
    enumerate_classes,
    family_threshold_bounds,
    finite_path_bounds,
    load_relations,
    shift_relation,
    vertex_threshold,
)

BUDGET_ENV = "SHIFTGRAPHS_BUDGET"
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

EPILOG = "exit codes: 0 success, 1 reproduction failure, 2 validation error, 3 budget exceeded"


def frac(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def frac_json(x) -> dict:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"not a rational number: {text!r}") from None


def parse_grid(text: str) -> list[Fraction]:
    vals = [parse_fraction(t) for t in text.split(",") if t.strip()]
    if not vals:
        raise ValidationError("empty lambda grid")
    return vals


def parse_range(text: str) -> range:
    if "-" in text:
        a, b = text.split("-", 1)
        return range(int(a), int(b) + 1)
    return range(int(text), int(text) + 1)


def read_spec(path: str) -> RelationSet:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return load_relations(text)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValidationError(f"malformed relation file {path}: {exc}") from None


def budget_of(args, default=None):
    raw = args.budget if args.budget is not None else os.environ.get(BUDGET_ENV)
    if raw is None:
        return default
    try:
        return acceptance.parse_budget(raw)
    except ValueError:
        raise ValidationError(f"bad budget {raw!r}") from None


# -- output ---------------------------------------------------------------------

def _table(rows: list[list]) -> str:
    cells = [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(cells[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells) + "\n"


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


class Output:
    """Renders one result in the requested format. ``rows`` feed csv and table."""

    def __init__(self, payload: dict, rows: list[list] | None = None, text: str | None = None,
                 seed: int | None = None, csv_text: str | None = None):
        self.payload = payload
        self.rows = rows
        self.text = text
        self.seed = seed
        self.csv_text = csv_text

    def render(self, fmt: str) -> str:
        header = f"# seed: {self.seed}\n" if self.seed is not None else ""
        if fmt == "json":
            payload = dict(self.payload)
            if self.seed is not None:
                payload = {"seed": self.seed, **payload}
            return json.dumps(payload, indent=2) + "\n"
        if fmt == "csv":
            return header + (self.csv_text if self.csv_text is not None else _csv(self.rows))
        if self.text is not None:
            return header + self.text
        return header + _table(self.rows)


# -- commands -----------------------------------------------------------------------

def thresholds_payload(rel: OrderRelation) -> dict:
    return {"relation": str(rel), "vertex": vertex_threshold(rel).to_dict(), "edge": edge_threshold(rel).to_dict()}


def cmd_thresholds(args) -> Output:
    if args.shift_k is not None:
        rels = RelationSet.of(shift_relation(args.shift_k))
    elif args.spec:
        rels = read_spec(args.spec)
    else:
        raise ValidationError("give --shift-k K or --spec FILE")
    if len(rels) > 1:
        rep = family_threshold_bounds(rels, budget=budget_of(args, 200_000), seed=args.seed)
        payload = rep.to_dict()
        return Output(payload, [["kind", "lo", "hi"], ["family", frac(rep.lo), frac(rep.hi)]])
    rel = rels.relations[0]
    payload = thresholds_payload(rel)
    v, e = vertex_threshold(rel), edge_threshold(rel)
    rows = [["kind", "value", "w"], ["vertex", frac(v.lo), v.width], ["edge", frac(e.lo), e.width]]
    text = f"vertex {frac(v.lo)}\nedge {frac(e.lo)}\n"
    return Output(payload, rows, text)


def cmd_relations_enumerate(args) -> Output:
    E = enumerate_classes(args.k)
    rows = [["index", "relation", "pattern", "w", "vertex", "edge"]]
    for i, rel in enumerate(E):
        rows.append([i, str(rel), canonical_pattern(rel).word(), compute_w(rel),
                     frac(vertex_threshold(rel).lo), frac(edge_threshold(rel).lo)])
    payload = {"k": args.k, "count": len(E), "relations": [r.to_dict() for r in E]}
    return Output(payload, rows)


def cmd_relations_w(args) -> Output:
    rels = read_spec(args.spec)
    rows = [["relation", "w", "core", "w_core", "vertex", "edge"]]
    items = []
    for rel in rels:
        c = core(rel)
        w, wc = compute_w(rel), compute_w(c)
        core_txt = ",".join(f"{a}->{t}" for a, t in zip(c.domain, c.images)) or "-"
        rows.append([str(rel), w, core_txt, wc, frac(1 - Fraction(1, wc)), frac(1 - Fraction(1, w))])
        items.append({"relation": rel.to_dict(), "w": w, "core": {"domain": list(c.domain), "images": list(c.images)},
                      "w_core": wc})
    return Output({"relations": items}, rows)


def cmd_bounds(args) -> Output:
    b = finite_path_bounds(args.p, args.k)
    payload = {"lo": frac_json(b.lo), "hi": frac_json(b.hi)}
    return Output(payload, [["p", "k", "lo", "hi"], [args.p, args.k, frac(b.lo), frac(b.hi)]])


def _coloring_from_args(args, rel: OrderRelation) -> ColoringSpec:
    if args.f_eps:
        return f_eps_coloring(rel)
    if args.argmax_mod is not None:
        return ColoringSpec.argmax_mod(rel.k, args.argmax_mod)
    if args.coloring:
        try:
            return ColoringSpec.from_dict(json.loads(Path(args.coloring).read_text()))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ValidationError(f"cannot load coloring {args.coloring}: {exc}") from None
    raise ValidationError("give --f-eps, --argmax-mod P or --coloring FILE")


def cmd_oracle_z(args) -> Output:
    rels = read_spec(args.spec)
    if len(rels) != 1:
        raise ValidationError("z-measure takes a single relation")
    rel = rels.relations[0]
    col = _coloring_from_args(args, rel)
    bound = 1 - Fraction(1, compute_w(rel))
    if args.mc:
        est = z_measure_mc(rel, col, args.mc, seed=args.seed)
        payload = {"estimate": est.estimate, "ci_halfwidth": est.halfwidth, "samples": est.samples,
                   "upper_bound": frac_json(bound)}
        rows = [["estimate", "ci_halfwidth", "samples", "upper_bound"],
                [repr(est.estimate), repr(est.halfwidth), est.samples, frac(bound)]]
        return Output(payload, rows, seed=args.seed)
    z = z_measure_exact(rel, col)
    payload = {"value": frac_json(z.fraction), "upper_bound": frac_json(bound)}
    return Output(payload, [["value", "upper_bound"], [frac(z.fraction), frac(bound)]])


def cmd_oracle_construction(args) -> Output:
    z = finite_path_construction_measure(args.p, args.k)
    b = finite_path_bounds(args.p, args.k)
    payload = {"p": args.p, "k": args.k, "value": frac_json(z.fraction), "lo": frac_json(b.lo), "hi": frac_json(b.hi)}
    rows = [["p", "k", "value", "lo", "hi"], [args.p, args.k, frac(z.fraction), frac(b.lo), frac(b.hi)]]
    return Output(payload, rows)


def cmd_oracle_search(args) -> Output:
    res = best_pattern_coloring(args.k, args.p, budget=budget_of(args, 1 << 20), seed=args.seed)
    payload = {"k": args.k, "p": args.p, "value": frac_json(res.probability.fraction), "exhaustive": res.exhaustive,
               "evaluated": res.evaluated, "coloring": res.coloring.to_dict()}
    rows = [["k", "p", "value", "exhaustive", "evaluated"],
            [args.k, args.p, frac(res.probability.fraction), str(res.exhaustive).lower(), res.evaluated]]
    return Output(payload, rows, seed=None if res.exhaustive else args.seed)


def _graph_from_args(args):
    if args.shift_k is not None:
        return shift_graph(args.shift_k, args.n)
    if args.spec:
        return build_truncated(read_spec(args.spec), args.n)
    raise ValidationError("give --shift-k K or --spec FILE")


def cmd_percolate_sweep(args) -> Output:
    g = _graph_from_args(args)
    rep = sweep(g, parse_grid(args.grid), args.p, args.replicas, seed=args.seed, workers=args.threads)
    rows_out = []
    for r in rep.rows:
        rows_out.append({"lambda": frac_json(r.lam), "replicas": r.replicas, "freq_path_ge_p": r.freq,
                         "ci_halfwidth": r.ci_halfwidth, "mean_inclusion": r.mean_inclusion,
                         "corollary_bound": None if r.corollary_bound is None else frac_json(r.corollary_bound)})
    payload = {"graph": rep.graph, "n": args.n, "p": args.p, "rows": rows_out}
    text = rep.to_csv()
    table_rows = list(csv.reader(io.StringIO(text)))
    return Output(payload, table_rows, seed=args.seed, csv_text=text)


def cmd_percolate_extremal(args) -> Output:
    if args.shift_k is None:
        raise ValidationError("the extremal sampler needs --shift-k K")
    g = shift_graph(args.shift_k, args.n)
    masks = sample_extremal(g, args.p, args.seed, replicas=args.replicas)
    longest = np.zeros(args.replicas, dtype=np.int64)
    for s in range(0, args.replicas, 1000):
        h = height_batch(g, masks[s:s + 1000])
        longest[s:s + 1000] = np.maximum(h.max(axis=1) - 1, 0) if h.shape[1] else 0
    rates = masks.mean(axis=1)
    se = float(rates.std(ddof=1) / np.sqrt(args.replicas)) if args.replicas > 1 else float("nan")
    target = finite_path_bounds(args.p, args.shift_k).lo
    payload = {"graph": g.spec_label, "n": args.n, "p": args.p, "replicas": args.replicas,
               "inclusion_rate": float(rates.mean()), "std_error": se, "target": frac_json(target),
               "max_path_edges": int(longest.max()), "replicas_with_path_ge_p": int((longest >= args.p).sum())}
    rows = [list(payload.keys()),
            [g.spec_label, args.n, args.p, args.replicas, repr(float(rates.mean())), repr(se), frac(target),
             int(longest.max()), int((longest >= args.p).sum())]]
    return Output(payload, rows, seed=args.seed)


def cmd_debruijn_alpha(args) -> Output:
    res = debruijn.alpha(args.d, args.k, args.method, seed=args.seed, iterations=args.iterations)
    payload = res.to_dict()
    text = f"alpha={res.value}\nmethod={res.method}\nexact={str(res.exact).lower()}\n"
    if res.subset is not None:
        text += "subset=" + " ".join(res.subset_labels()) + "\n"
    rows = [["d", "k", "alpha", "method", "exact"], [res.d, res.k, res.value, res.method, str(res.exact).lower()]]
    return Output(payload, rows, text, seed=None if res.exact else args.seed)


def cmd_debruijn_ratios(args) -> Output:
    rows = debruijn.alpha_ratio_report(parse_range(args.d_range), args.k, seed=args.seed, iterations=args.iterations)
    text = debruijn.ratio_csv(rows)
    payload = {"k": args.k, "rows": [{"d": r.d, "alpha": r.alpha, "exact": r.exact, "ratio": frac_json(r.ratio),
                                      "lambda_lo": frac_json(r.lam_lo), "lambda_hi": frac_json(r.lam_hi),
                                      "gap": frac_json(r.gap)} for r in rows]}
    table_rows = list(csv.reader(io.StringIO(text)))
    seed = None if all(r.exact for r in rows) else args.seed
    return Output(payload, table_rows, seed=seed, csv_text=text)


def cmd_graph(args) -> Output:
    g = _graph_from_args(args)
    if args.edges:
        pairs = [r.split(";") for r in g.edge_rows()]
        return Output({"graph": g.spec_label, "edges": pairs}, [["source", "target"]] + pairs)
    s = g.summary().to_dict()
    return Output(s, [list(s.keys()), [json.dumps(v) if isinstance(v, (list, dict)) else v for v in s.values()]])


def cmd_reproduce(args) -> tuple[Output, int]:
    budget = budget_of(args, acceptance.BUDGETS["full"])
    results = acceptance.run_all(budget, args.seed)
    counts = {s: sum(1 for r in results if r.status == s) for s in ("pass", "fail", "skip")}
    checks = [{"id": r.id, "name": r.name, "status": r.status, "detail": r.detail} for r in results]
    payload = {"budget": budget, "checks": checks, "passed": counts["pass"], "failed": counts["fail"],
               "skipped": counts["skip"]}
    rows = [["id", "name", "status", "detail"]] + [[c["id"], c["name"], c["status"], c["detail"]] for c in checks]
    text = "".join(f"[{r.status.upper():4}] {r.id:2d} {r.name}: {r.detail}\n" for r in results)
    text += f"{counts['pass']} passed, {counts['fail']} failed, {counts['skip']} skipped\n"
    return Output(payload, rows, text, seed=args.seed), (EXIT_FAIL if counts["fail"] else EXIT_OK)


# -- parser -----------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--format", choices=["json", "csv", "table"], default="table", help="output format (default table)")
    g.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
    g.add_argument("--seed", type=int, default=rng.DEFAULT_SEED,
                   help=f"master seed, unsigned 64-bit (default {rng.DEFAULT_SEED})")
    g.add_argument("--threads", type=int, default=1, help="worker cap; exact outputs do not depend on it")
    g.add_argument("--budget", default=None,
                   help=f"enumeration budget: integer or tiny/small/full (default from ${BUDGET_ENV})")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    kw = dict(parents=[common], epilog=EPILOG)
    parser = argparse.ArgumentParser(prog="shiftgraphs", description="Path thresholds in random subgraphs of "
                                     "contractable graphs, with exact oracles and percolation checks.", epilog=EPILOG)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("thresholds", help="vertex and edge thresholds of a relation", **kw)
    p.add_argument("--shift-k", type=int, metavar="K", help="use the shift relation of length K")
    p.add_argument("--spec", metavar="FILE", help="relation or relation-set JSON")
    p.set_defaults(fn=cmd_thresholds)

    rel = sub.add_parser("relations", help="equivalence classes and widths", **kw)
    rsub = rel.add_subparsers(dest="action", metavar="ACTION", required=True)
    p = rsub.add_parser("enumerate", help="list the classes of length k", **kw)
    p.add_argument("-k", type=int, required=True)
    p.set_defaults(fn=cmd_relations_enumerate)
    p = rsub.add_parser("w", help="w of each relation and of its core", **kw)
    p.add_argument("--spec", metavar="FILE", required=True)
    p.set_defaults(fn=cmd_relations_w)

    b = sub.add_parser("bounds", help="finite-path threshold bounds", **kw)
    bsub = b.add_subparsers(dest="action", metavar="ACTION", required=True)
    p = bsub.add_parser("finite-path", help="bounds for paths with p edges in the shift graph G_k", **kw)
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.set_defaults(fn=cmd_bounds)

    o = sub.add_parser("oracle", help="exact pattern-probability oracles", **kw)
    osub = o.add_subparsers(dest="action", metavar="ACTION", required=True)
    p = osub.add_parser("z-measure", help="measure of f(x|S) > f(tau^* x) for one relation", **kw)
    p.add_argument("--spec", metavar="FILE", required=True)
    p.add_argument("--coloring", metavar="FILE", help="coloring JSON")
    p.add_argument("--argmax-mod", type=int, metavar="P", help="argmax position mod P")
    p.add_argument("--f-eps", action="store_true", help="use the f_eps limit along the longest orbit")
    p.add_argument("--mc", type=int, metavar="SAMPLES", help="Monte Carlo estimate instead of exact")
    p.set_defaults(fn=cmd_oracle_z)
    p = osub.add_parser("construction", help="argmax-mod-p construction measure", **kw)
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.set_defaults(fn=cmd_oracle_construction)
    p = osub.add_parser("search", help="best explicit pattern coloring", **kw)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-p", type=int, required=True)
    p.set_defaults(fn=cmd_oracle_search)

    pc = sub.add_parser("percolate", help="Monte Carlo percolation", **kw)
    psub = pc.add_subparsers(dest="action", metavar="ACTION", required=True)
    for name, fn, helptext in (("sweep", cmd_percolate_sweep, "i.i.d. inclusion over a lambda grid"),
                               ("extremal", cmd_percolate_extremal, "argmax-mod-p extremal samples")):
        p = psub.add_parser(name, help=helptext, **kw)
        p.add_argument("--shift-k", type=int, metavar="K")
        p.add_argument("-n", type=int, required=True, help="ground set size")
        p.add_argument("-p", type=int, required=True, help="path length in edges")
        p.add_argument("--replicas", type=int, default=1000)
        if name == "sweep":
            p.add_argument("--spec", metavar="FILE", help="relation-set JSON instead of a shift graph")
            p.add_argument("--grid", required=True, help="comma-separated rationals or decimals")
        p.set_defaults(fn=fn)

    d = sub.add_parser("debruijn", help="de Bruijn independence numbers", **kw)
    dsub = d.add_subparsers(dest="action", metavar="ACTION", required=True)
    p = dsub.add_parser("alpha", help="independence number of B(d, k)", **kw)
    p.add_argument("-d", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--method", choices=["auto", "subset", "mis", "local"], default="auto")
    p.add_argument("--iterations", type=int, default=100_000, help="local search iterations")
    p.set_defaults(fn=cmd_debruijn_alpha)
    p = dsub.add_parser("ratios", help="alpha(d, k) / d^k against the two-color threshold", **kw)
    p.add_argument("--d-range", required=True, metavar="A-B")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--iterations", type=int, default=100_000)
    p.set_defaults(fn=cmd_debruijn_ratios)

    p = sub.add_parser("graph", help="summary or edge list of a truncated graph", **kw)
    p.add_argument("--shift-k", type=int, metavar="K")
    p.add_argument("--spec", metavar="FILE")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--edges", action="store_true")
    p.set_defaults(fn=cmd_graph)

    p = sub.add_parser("reproduce", help="run every acceptance check", **kw)
    p.set_defaults(fn=cmd_reproduce)
    return parser


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not 0 <= args.seed < 2 ** 64:
        print("error: seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_USAGE
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    code = EXIT_OK
    try:
        result = args.fn(args)
        if isinstance(result, tuple):
            result, code = result
        _write(result.render(args.format), args.out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ShiftGraphsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
