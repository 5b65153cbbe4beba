"""Command-line harness: ``tesselwalk {gen,verify,search,ht,sweep,tessellate}``.

Exit status is 0 on success, 1 when an invariant check or a run fails and
2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .chain import default_pair, hitting_time, product_chain
from .errors import BadParams, ParseError, TesselwalkError, UnknownFamily
from .families import FAMILIES, complete_bipartite, generate
from .interp import PARTS, OracleSpec, oriented_pair
from .multigraph import BipartiteMultigraph, clique_graph, cover_from_dict, cover_to_dict, line_graph
from .search import BACKENDS, fixed_c_probe, search_multigraph
from .suite import full_suite
from .walkops import AdaptedOperators, build_adapted_operators, build_qdb_amplitudes, operator_dump, random_phases

log = logging.getLogger("tesselwalk")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SWEEP_COLUMNS = ("n", "HT", "queries", "success_probability", "slope_so_far")
DEFAULT_SIZES = "4,8,16,32,64"
CACHE_ENV = "TESSELWALK_CACHE"


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Numbers in CSV output: 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else f"{float(x):.12g}"
    return "" if x is None else str(x)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def load_graph(path: str | None) -> BipartiteMultigraph:
    if not path:
        raise UsageError("--graph is required")
    try:
        return BipartiteMultigraph.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def load_json(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def parse_marks(text: str, size: int, seed: int) -> frozenset:
    """``"0,3"`` lists 0-based vertices; ``"count:k"`` draws ``k`` of them from the seed."""
    text = text.strip()
    if text.startswith("count:"):
        try:
            k = int(text[6:])
        except ValueError:
            raise UsageError(f"bad mark count {text!r}") from None
        if not 1 <= k <= size:
            raise UsageError(f"mark count must lie in 1..{size}")
        rng = np.random.default_rng(seed)
        return frozenset(int(x) for x in rng.choice(size, k, replace=False))
    try:
        marks = frozenset(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"bad mark list {text!r}") from None
    if not marks or min(marks) < 0 or max(marks) >= size:
        raise UsageError(f"marks must be a nonempty subset of 0..{size - 1}")
    return marks


def part_size(g: BipartiteMultigraph, part: str) -> int:
    return g.n1 if part == "V1" else g.n2


# -- operator cache ----------------------------------------------------------------


def cached_operators(g: BipartiteMultigraph, phases, seed) -> AdaptedOperators:
    """Adapted operators, reused from ``$TESSELWALK_CACHE`` when that directory is set."""
    aa = build_qdb_amplitudes(default_pair(g), g, phases)
    root = os.environ.get(CACHE_ENV)
    if not root:
        return build_adapted_operators(aa)
    key = hashlib.sha256(f"{g.to_json()}|{seed if phases is not None else 'zero'}".encode()).hexdigest()
    path = Path(root) / f"ops-{key[:24]}.npz"
    fields = ("Acal", "B", "F", "R1", "R2", "W1cal", "W2cal", "A")
    if path.exists():
        with np.load(path) as data:
            log.debug("operator cache hit %s", path)
            return AdaptedOperators(aa.space, *(data[f] for f in fields))
    ops = build_adapted_operators(aa)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp.npz")
    np.savez(tmp, **{f: getattr(ops, f) for f in fields})
    os.replace(tmp, path)
    return ops


# -- commands ----------------------------------------------------------------------


def cmd_gen(args) -> int:
    params = []
    for p in args.params:
        try:
            params.append(float(p) if any(ch in p for ch in ".eE") else int(p))
        except ValueError:
            raise BadParams(f"parameter {p!r} is not a number") from None
    g = generate(args.family, params, args.seed)
    emit(g.to_json(), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    g = load_graph(args.graph)
    phases = random_phases(g, args.seed) if args.random_phases else None
    p1 = pi1 = None
    if args.chain:
        data = load_json(args.chain)
        try:
            p1 = np.asarray(data["p1"], dtype=float)
            pi1 = np.asarray(data["pi1"], dtype=float) if "pi1" in data else None
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"chain file needs a numeric p1 matrix ({exc})") from None
    marks = parse_marks(args.marks, g.n1, args.seed) if args.marks else None
    ops = None
    if args.chain is None and g.is_connected:
        ops = cached_operators(g, phases, args.seed)
    if not g.is_connected:
        raise UsageError("verify needs a connected multigraph")
    checks = full_suite(g, phases, marks, p1, pi1, ops=ops)
    if args.dump_ops and ops is not None:
        Path(args.dump_ops).write_text(operator_dump(ops.named()), encoding="utf-8")
    failed = [c.name for c in checks if not c.passed]
    if args.format == "csv":
        text = csv_text(("check", "residual", "tolerance", "passed"),
                        [(c.name, c.residual, c.tolerance, c.passed) for c in checks])
    else:
        text = dumps({
            "graph": args.graph, "random_phases": bool(args.random_phases), "seed": args.seed,
            "checks": [c.to_dict() for c in checks], "failed": failed,
            "max_residual": max((c.residual for c in checks), default=0.0),
            "passed": not failed,
        })
    emit(text, args.out)
    for name in failed:
        print(f"FAILED: {name}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def _search_kwargs(args) -> dict:
    return dict(kappa=args.kappa, aa_lambda=args.aa_lambda, epsilon=args.epsilon,
                backend=args.backend, force_walk=args.force_walk)


def cmd_search(args) -> int:
    if args.cover:
        lg, cover = cover_from_dict(load_json(args.cover))
        g = clique_graph(lg, cover)
    else:
        g = load_graph(args.graph)
    marks = parse_marks(args.marks, part_size(g, args.part), args.seed)
    spec = OracleSpec(marks, args.part)
    phases = random_phases(g, args.seed) if args.random_phases else None
    out = search_multigraph(g, spec, phases=phases, seed=args.seed, **_search_kwargs(args))
    rec = out.to_record()
    rec.update({"marks": sorted(marks), "part": args.part, "seed": args.seed,
                "n1": g.n1, "n2": g.n2, "multiedges": g.num_multiedges})
    if args.probe and out.path == "quantum":
        tp = oriented_pair(default_pair(g), spec)
        rec["c_probe"] = fixed_c_probe(product_chain(tp), OracleSpec(marks, args.part), out.config)
        log.info("c-superposition probe: superposed %.6f, best fixed %.6f",
                 rec["c_probe"]["superposed"], rec["c_probe"]["best_fixed"])
    if args.format == "csv":
        cfg = out.config
        header = ("path", "HT", "t_max", "c_max", "epsilon", "aa_rounds", "success_probability",
                  "oracle_queries", "walk_applications")
        row = (out.path, out.hitting_time, cfg.t_max if cfg else None, cfg.c_max if cfg else None,
               cfg.epsilon if cfg else None, cfg.aa_rounds if cfg else None,
               out.success_probability, out.oracle_queries, out.walk_applications)
        text = csv_text(header, [row])
    else:
        text = dumps(rec)
    emit(text, args.out)
    return EXIT_OK


def cmd_ht(args) -> int:
    g = load_graph(args.graph)
    marks = parse_marks(args.marks, part_size(g, args.part), args.seed)
    tp = oriented_pair(default_pair(g), OracleSpec(marks, args.part))
    ht = hitting_time(product_chain(tp, connected=True), marks)
    if args.format == "json":
        emit(dumps({"hitting_time": ht, "marks": sorted(marks), "part": args.part}), args.out)
    else:
        emit(f"{ht:.12f}\n", args.out)
    return EXIT_OK


def _sweep_point(job):
    n, kwargs = job
    out = search_multigraph(complete_bipartite(n, n), OracleSpec({0}), **kwargs)
    return n, out.hitting_time, out.oracle_queries, out.success_probability


def slope(xs, ys) -> float:
    if len(xs) < 2:
        return float("nan")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def cmd_sweep(args) -> int:
    try:
        sizes = [int(x) for x in args.sizes.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad size list {args.sizes!r}") from None
    if not sizes or min(sizes) < 2:
        raise UsageError("sweep sizes must be integers >= 2")
    kwargs = _search_kwargs(args)
    kwargs["force_walk"] = True
    jobs = [(n, kwargs) for n in sizes]
    workers = max(1, min(args.jobs or os.cpu_count() or 1, len(jobs)))
    if workers == 1:
        results = [_sweep_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    rows, hts, qs = [], [], []
    for n, ht, q, p in results:
        hts.append(ht)
        qs.append(q)
        rows.append((n, ht, q, p, slope(hts, qs)))
    final = slope(hts, qs)
    if args.format == "json":
        text = dumps({"kappa": args.kappa, "rows": [dict(zip(SWEEP_COLUMNS, r)) for r in rows],
                      "slope": final})
    else:
        text = csv_text(SWEEP_COLUMNS, rows + [("summary", None, None, None, final)])
    emit(text, args.out)
    return EXIT_OK


def cmd_tessellate(args) -> int:
    if args.cover:
        lg, cover = cover_from_dict(load_json(args.cover))
        emit(clique_graph(lg, cover).to_json(), args.out)
    else:
        lg, cover = line_graph(load_graph(args.graph))
        emit(dumps(cover_to_dict(lg, cover)), args.out)
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tesselwalk", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, graph=True, fmt_default="json"):
        if graph:
            sp.add_argument("--graph", help="multigraph JSON file")
        sp.add_argument("--seed", type=int, default=0, help="seed for every random choice")
        sp.add_argument("--out", help="output file (stdout by default)")
        sp.add_argument("--format", choices=("json", "csv"), default=fmt_default)

    def search_opts(sp):
        sp.add_argument("--kappa", type=float, default=None,
                        help="scale on t_max (default 1 for n <= 32, else 1/8)")
        sp.add_argument("--lambda", dest="aa_lambda", type=float, default=2.0,
                        help="amplification rounds factor")
        sp.add_argument("--epsilon", type=float, default=None,
                        help="fast-forward accuracy (default 1/(4 log2 t_max))")
        sp.add_argument("--backend", choices=BACKENDS, default="discriminant")
        sp.add_argument("--force-walk", action="store_true",
                        help="run the walk search even when plain sampling suffices")

    sp = sub.add_parser("gen", help="generate a multigraph from a named family")
    sp.add_argument("family", help=f"one of {', '.join(sorted(FAMILIES))}")
    sp.add_argument("params", nargs="*", help="numeric family parameters")
    common(sp, graph=False)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("verify", help="run every invariant check on a multigraph")
    common(sp)
    sp.add_argument("--chain", help="JSON with p1 (and optionally pi1) replacing the random walk")
    sp.add_argument("--marks", help="marked V1 vertices for the interpolation checks")
    sp.add_argument("--random-phases", action="store_true", help="seeded vertex and edge phases")
    sp.add_argument("--dump-ops", help="write the adapted operators as JSON")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("search", help="search for a marked vertex")
    common(sp)
    sp.add_argument("--cover", help="line graph plus tessellation cover JSON instead of --graph")
    sp.add_argument("--marks", default="0", help="0-based list like 0,3 or count:k")
    sp.add_argument("--part", choices=PARTS, default="V1")
    sp.add_argument("--random-phases", action="store_true")
    sp.add_argument("--probe", action="store_true", help="add the fixed-c comparison")
    search_opts(sp)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("ht", help="hitting time of the product chain, 12 decimals")
    common(sp, fmt_default="csv")
    sp.add_argument("--marks", default="0")
    sp.add_argument("--part", choices=PARTS, default="V1")
    sp.set_defaults(func=cmd_ht)

    sp = sub.add_parser(
        "sweep", help="query scaling over K_{n,n} with one marked vertex",
        description="CSV columns: n, HT, queries, success_probability, slope_so_far. "
                    "The last row is 'summary' with the fitted log-log slope. "
                    "Numbers carry 12 significant digits.")
    common(sp, graph=False, fmt_default="csv")
    sp.add_argument("--sizes", default=DEFAULT_SIZES, help="comma-separated n values")
    sp.add_argument("--jobs", type=int, default=None, help="worker processes (default: cores)")
    search_opts(sp)
    sp.set_defaults(func=cmd_sweep, kappa=1.0)

    sp = sub.add_parser("tessellate", help="line graph and cover of a multigraph, or the reverse")
    common(sp)
    sp.add_argument("--cover", help="rebuild the multigraph from this cover JSON")
    sp.set_defaults(func=cmd_tessellate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ParseError, BadParams, UnknownFamily) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TesselwalkError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
