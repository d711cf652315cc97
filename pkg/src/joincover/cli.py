"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 malformed input,
3 infeasible LP, 4 size limit exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np

from .codes import crt_from_dual, instance_from_codebook, largest_prime_at_most, lower_bound_instance, rs_codebook
from .core import Hypergraph, QueryInstance, load_instance, naive_join
from .cover import CoverResult, algorithm_B, exact_max_packing, exact_min_cover, greedy_packing, verify_cover, verify_packing
from .graphs import decompose
from .lpbounds import DegreeConstraint, InfeasibleError, LimitError, agm_bound, frac_str, lp_lb, lp_ub, lp_ub_star, pmb_bound
from .pick import pick_S
from .rounding import GapInstanceParams, gap_bounds, gap_instance

EXIT_FAIL, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_LIMIT = 1, 2, 3, 4


def _read_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _emit(obj: Any) -> None:
    json.dump(obj, sys.stdout, indent=1, sort_keys=True, ensure_ascii=False)
    sys.stdout.write("\n")


def _s_for(n: int, delta: int) -> int:
    if not 1 <= delta <= n:
        raise ValueError(f"delta must lie in [1, {n}]")
    return n - delta + 1


def cmd_bounds(args: argparse.Namespace) -> int:
    q = load_instance(args.query)
    g = q.hypergraph
    s = _s_for(q.n, args.delta)
    out = {
        "s": s,
        "AGM": agm_bound(g).to_json(),
        "LP_lb": lp_lb(g, s).to_json(),
        "LP_ub": lp_ub(g, s).to_json(),
        "LP_ub_star": lp_ub_star(g, s).to_json(),
    }
    if args.pmb:
        dc = [DegreeConstraint.from_json(d) for d in _read_json(args.pmb)]
        out["PMB"] = pmb_bound(g, None, dc).to_json()
    _emit(out)
    return 0


def _default_S(q: QueryInstance, delta: int) -> list[int]:
    if q.hypergraph.is_graph and len(q.hypergraph.covered()) == q.n:
        return list(pick_S(q.hypergraph, delta)[0])
    return list(range(_s_for(q.n, delta)))


def cmd_cover(args: argparse.Namespace) -> int:
    q = load_instance(args.query)
    _s_for(q.n, args.delta)
    if args.method == "algB":
        S = args.S if args.S is not None else _default_S(q, args.delta)
        res = algorithm_B(q, args.delta, S)
    else:
        J = naive_join(q)
        res = greedy_packing(J, args.delta) if args.method == "greedy" else exact_min_cover(J, args.delta)
    _emit(res.to_json(q))
    return 0


def cmd_pack(args: argparse.Namespace) -> int:
    q = load_instance(args.query)
    _s_for(q.n, args.delta)
    J = naive_join(q)
    res = greedy_packing(J, args.delta) if args.method == "greedy" else exact_max_packing(J, args.delta)
    _emit(res.to_json(q))
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    g = Hypergraph.from_json(_read_json(args.graph))
    s = _s_for(g.n, args.delta)
    if args.code == "auto":
        lb = lower_bound_instance(g, args.N, args.delta)
        inst, code, row = lb.instance, lb.codebook, lb.row
    elif args.code == "rs":
        q = largest_prime_at_most(int(args.N**0.5))
        code = rs_codebook(q, g.n, args.delta)
        inst, row = instance_from_codebook(g, code, args.N), None
    else:
        inst, code = crt_from_dual(g, args.N, decompose(g).y, k=s)
        row = None
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    ipath, cpath = Path(f"{prefix}.instance.json"), Path(f"{prefix}.codebook.json")
    ipath.write_text(json.dumps(inst.to_json(), indent=1) + "\n", encoding="utf-8")
    cpath.write_text(json.dumps(code.to_json(), indent=1) + "\n", encoding="utf-8")
    _emit({
        "instance": str(ipath),
        "codebook": str(cpath),
        "row": row,
        "codewords": code.size,
        "alphabets": list(code.alphabet_sizes),
        "max_relation": max(len(r) for r in inst.relations),
    })
    return 0


def cmd_decompose(args: argparse.Namespace) -> int:
    g = Hypergraph.from_json(_read_json(args.graph))
    _emit(decompose(g).to_json())
    return 0


def cmd_pick(args: argparse.Namespace) -> int:
    g = Hypergraph.from_json(_read_json(args.graph))
    S, row = pick_S(g, args.delta)
    _emit({"row": row.row, "s": row.s, "S": list(S), "exponent": frac_str(row.predicted_exponent)})
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    q = load_instance(args.query)
    res = CoverResult.from_json(_read_json(args.cover), q)
    J = naive_join(q)
    ok = verify_cover(J, res, args.delta)
    _emit({"cover": ok, "packing": verify_packing(res, args.delta), "size": res.size, "join": len(J)})
    print("pass" if ok else "fail")
    return 0 if ok else EXIT_FAIL


def cmd_gap_demo(args: argparse.Namespace) -> int:
    params = GapInstanceParams(args.n, args.eps, args.C)
    inst = gap_instance(params, np.random.default_rng(args.seed))
    b = gap_bounds(inst)
    cols = ["n", "eps", "lp_lb", "lp_ub", "ratio", "trials", "lp_ub_upper", "ratio_upper"]
    vals = [
        params.n,
        params.epsilon,
        f"{float(b.lp_lb_upper):.6f}",
        f"{float(b.lp_ub_lower):.6f}",
        f"{float(b.ratio_lower):.6f}",
        inst.attempts,
        f"{float(b.lp_ub_upper):.6f}",
        f"{b.ratio_upper:.6f}",
    ]
    print("\t".join(cols))
    print("\t".join(map(str, vals)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="joincover", description="Join covers, packings and their LP bounds.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="AGM, LP_lb, LP_ub and LP*_ub (plus PMB with --pmb)")
    p.add_argument("--query", required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--pmb", help="JSON list of degree constraints")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("cover", help="a join cover")
    p.add_argument("--query", required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--method", choices=["greedy", "exact", "algB"], default="greedy")
    p.add_argument("--S", type=int, nargs="+", help="attribute set for algB (0-based)")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("pack", help="a join packing")
    p.add_argument("--query", required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--method", choices=["greedy", "exact"], default="greedy")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("gen", help="code-based instance for a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--code", choices=["rs", "crt", "auto"], default="auto")
    p.add_argument("--out", default="gen", help="output prefix for .instance.json and .codebook.json")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("decompose", help="core/star/singleton decomposition")
    p.add_argument("--graph", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("pick", help="case row and attribute subset")
    p.add_argument("--graph", required=True)
    p.add_argument("--delta", type=int, required=True)
    p.set_defaults(func=cmd_pick)

    p = sub.add_parser("verify", help="check a cover file against a query")
    p.add_argument("--query", required=True)
    p.add_argument("--cover", required=True)
    p.add_argument("--delta", type=int, required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gap-demo", help="LP gap on a random set-cover instance (TSV)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--C", type=float, default=13.0)
    p.set_defaults(func=cmd_gap_demo)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    try:
        return args.func(args)
    except LimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
