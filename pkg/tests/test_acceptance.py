"""One test per acceptance criterion; each records a pass/fail line shown in the terminal summary."""

import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np

from joincover.codes import (
    DisedgeConstructionParams,
    crt_codebook,
    duplicated_code,
    is_prime,
    join_equals_codebook,
    join_size_upto,
    lower_bound_instance,
    min_distance,
    rs_codebook,
    rs_extend,
)
from joincover.core import Hypergraph, QueryInstance, Relation, cycle, example_cover, example_instance, generic_join, naive_join, projected_query
from joincover.cover import (
    algorithm_B,
    exact_max_packing,
    exact_min_cover,
    greedy_packing,
    projection_bound,
    verify_cover,
)
from joincover.graphs import decompose, matching_number, matching_split
from joincover.lpbounds import HALF, LimitError, agm_bound, half_integral_dual, lp_lb, lp_primal, lp_ub
from joincover.pick import classify_case, heavy_light_containment, heavy_light_split, pick_bound, pick_S
from joincover.rounding import (
    GapInstanceParams,
    RoundingConfig,
    algorithm_A,
    cost_bound,
    dependent_round,
    gap_bounds,
    gap_instance,
    rounded_cover,
)

import oracles

TRI_STAR = Hypergraph(6, [(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (5,)])


def _graph(n, edges):
    cov = {v for e in edges for v in e}
    return Hypergraph(n, list(edges) + [(v,) for v in range(n) if v not in cov])


def _all_graphs(max_n):
    for n in range(1, max_n + 1):
        pairs = list(itertools.combinations(range(n), 2))
        for mask in range(1 << len(pairs)):
            yield _graph(n, [p for i, p in enumerate(pairs) if mask >> i & 1])


def _random_graph(rnd, n, p):
    return _graph(n, [e for e in itertools.combinations(range(n), 2) if rnd.random() < p])


def _random_instances(count, seed):
    """Random arity-2 instances with n <= 5, domains <= 4 and 1 <= |J| <= 24."""
    rnd = random.Random(seed)
    out = []
    while len(out) < count:
        n = rnd.randint(2, 5)
        sizes = [rnd.randint(1, 4) for _ in range(n)]
        rels = []
        for e in itertools.combinations(range(n), 2):
            if rnd.random() < 0.5:
                full = list(itertools.product(range(sizes[e[0]]), range(sizes[e[1]])))
                rels.append(Relation(e, [t for t in full if rnd.random() < 0.6]))
        q = QueryInstance(tuple(tuple(str(i) for i in range(d)) for d in sizes), tuple(rels))
        J = naive_join(q)
        if 1 <= len(J) <= 24:
            out.append((q, J))
    return out


def test_criterion_1_example_one(report):
    t0 = time.perf_counter()
    q = example_instance()
    J = naive_join(q)
    bundled = [q.encode_row(t) for t in example_cover()]
    checks = {
        "join=16": len(J) == 16,
        "exact_min_cover=4": exact_min_cover(J, 2).size == 4,
        "bundled cover verifies": verify_cover(J, bundled, 2),
        "greedy_packing=4": greedy_packing(J, 2).size == 4,
        "delta=1 cover is J": set(exact_min_cover(J, 1).tuples) == set(J.rows),
    }
    dt = time.perf_counter() - t0
    ok = all(checks.values()) and dt < 1
    report(1, ok, f"Example 1 {', '.join(k for k, v in checks.items() if v)} in {dt:.2f}s")
    assert ok, checks


def test_criterion_2_sandwich(report):
    t0 = time.perf_counter()
    insts = _random_instances(200, seed=2)
    bad = brute_bad = brute_checked = 0
    for q, J in insts:
        for d in range(1, q.n + 1):
            cov, pk = exact_min_cover(J, d).size, exact_max_packing(J, d).size
            if not cov <= pk <= projection_bound(J, q.n, d):
                bad += 1
            if len(J) <= 12:
                rows = set(J.rows)
                brute_checked += 1
                brute_bad += (cov, pk) != (oracles.brute_min_cover(rows, d), oracles.brute_max_packing(rows, d))
    dt = time.perf_counter() - t0
    ok = bad == 0 and brute_bad == 0 and dt < 60
    report(2, ok, f"cover <= packing <= projection bound on {len(insts)} instances, all delta: {bad} violations; "
                  f"solvers match brute force on {brute_checked - brute_bad}/{brute_checked}; {dt:.1f}s")
    assert ok


def test_criterion_3_codes(report):
    t0 = time.perf_counter()
    rs_bad, rs_count = [], 0
    for q in (2, 3, 5, 7, 11):
        for n in range(1, q + 1):
            for d in range(1, n + 1):
                c = rs_codebook(q, n, d)
                rs_count += 1
                if c.size != q ** (n - d + 1) or (c.size > 1 and min_distance(c) != d):
                    rs_bad.append((q, n, d))
    crt_bad, crt_count = [], 0
    primes = [p for p in range(2, 60) if is_prime(p)]
    for r in range(2, 5):
        for ps in itertools.combinations(primes[:8], r):
            for k in range(1, r + 1):
                if math.prod(ps[:k]) > 10**4:
                    continue
                c = crt_codebook(ps, k)
                crt_count += 1
                if c.size > 1 and min_distance(c, "pairwise" if c.size <= 4096 else "difference") < r - k + 1:
                    crt_bad.append((ps, k))
    derived_bad = []
    for q, n, d, t in [(5, 3, 2, 1), (7, 2, 1, 2), (7, 4, 2, 3), (11, 3, 3, 4)]:
        c = rs_extend(rs_codebook(q, n, d), t)
        if min_distance(c, "pairwise" if c.size <= 4096 else "weight") != d + t:
            derived_bad.append(("extend", q, n, d, t))
    for q, n_s, n_t, ds in [(5, 4, 0, 2), (5, 2, 1, 2), (7, 6, 1, 4), (7, 4, 2, 2), (5, 6, 0, 2)]:
        p = DisedgeConstructionParams(n_s, n_t, ds)
        c = duplicated_code(rs_codebook(q, p.base_length, p.base_distance), p)
        if min_distance(c, "pairwise" if c.size <= 4096 else "weight") != ds + n_t:
            derived_bad.append(("dup", q, n_s, n_t, ds))
    dt = time.perf_counter() - t0
    ok = not (rs_bad or crt_bad or derived_bad) and dt < 30
    report(3, ok, f"RS {rs_count} codes, CRT {crt_count} codes, 9 extended/duplicated codes; bad {len(rs_bad)}/{len(crt_bad)}/{len(derived_bad)}; {dt:.1f}s")
    assert ok, (rs_bad, crt_bad, derived_bad)


LOWER_BOUND_CASES = [
    # (label, graph, N, delta)
    ("row 1 C4", cycle(4), 29, 4),
    ("row 2 C4", cycle(4), 9, 3),
    ("row 3 C4", cycle(4), 400, 2),
    ("row 4 two edges", Hypergraph(4, [(0, 1), (2, 3)]), 29, 2),
    ("row 5 triangle+star+loop", TRI_STAR, 25, 2),
    ("row 6 triangle+star+loop", TRI_STAR, 16, 1),
]


def _exact_exponent(size, q, exponent):
    # |cover| = q**exponent exactly, exponent possibly a half-integer
    e = Fraction(exponent)
    return size ** e.denominator == q ** e.numerator


def test_criterion_4_lower_bound_instances(report):
    t0 = time.perf_counter()
    lines, all_ok = [], True
    for label, g, N, delta in LOWER_BOUND_CASES:
        lb = lower_bound_instance(g, N, delta)
        row = classify_case(g, delta)
        assert f"row {row.row}" in label
        c = lb.codebook
        rel_ok = all(len(r) <= N for r in lb.instance.relations)
        join_n = join_size_upto(lb.instance, c.size)
        join_ok = join_equals_codebook(lb.instance, c)
        cover = None
        if join_ok:
            try:
                cover = exact_min_cover(generic_join(lb.instance), delta).size
            except LimitError:
                cover = None
        cover_ok = cover == c.size
        if row.row == 6:
            expo_ok = cover_ok and cover == lb.predicted_cover_size
        else:
            expo_ok = cover_ok and _exact_exponent(cover, lb.q, row.predicted_exponent)
        ok = rel_ok and join_ok and cover_ok and expo_ok
        all_ok &= ok
        join_txt = f"={join_n}" if join_n <= c.size else f">{c.size}"
        lines.append(f"{label}: q={lb.q} |C|={c.size} |J|{join_txt} max|R_e|={max(len(r) for r in lb.instance.relations)} {'ok' if ok else 'FAIL'}")
    dt = time.perf_counter() - t0
    report(4, all_ok and dt < 60, "; ".join(lines) + f"; {dt:.1f}s")
    assert all_ok and dt < 60, lines


def test_criterion_5_upper_bounds(report):
    t0 = time.perf_counter()
    rnd = random.Random(5)
    graphs = list(_all_graphs(4)) + [_random_graph(rnd, rnd.randint(5, 7), 0.4) for _ in range(60)] + [TRI_STAR]
    bad, checked, rows = [], 0, set()
    for g in graphs:
        for delta in range(1, g.n + 1):
            row = classify_case(g, delta)
            S, _ = pick_S(g, delta)
            rows.add(row.row)
            checked += 1
            if len(S) != row.s or pick_bound(g, delta).objective != row.predicted_exponent:
                bad.append((g.n, g.edges, delta))
    contained = 0
    for seed in range(100):
        r = random.Random(seed)
        n = r.randint(2, 4)
        doms = tuple(tuple(str(i) for i in range(4)) for _ in range(n))
        rels = [Relation(e, {(r.randrange(4), r.randrange(4)) for _ in range(8)}) for e in itertools.combinations(range(n), 2) if r.random() < 0.7]
        q = QueryInstance(doms, tuple(rels), N=16)
        contained += heavy_light_containment(q, heavy_light_split(q))
    dt = time.perf_counter() - t0
    ok = not bad and contained == 100 and rows == set(range(1, 7)) and dt < 60
    report(5, ok, f"pick bound = predicted exponent on {checked} (graph, delta) pairs covering rows {sorted(rows)}: {len(bad)} mismatches; containment {contained}/100; {dt:.1f}s")
    assert ok, bad[:5]


def _decomposition_ok(g):
    d = decompose(g)
    parts = [set(d.core), set(d.star_vertices), set(d.singletons)]
    if sum(map(len, parts)) != g.n or set().union(*parts) != set(range(g.n)):
        return False
    if any(d.y[v] != HALF for v in d.core):
        return False
    mc, ms = matching_split(d)
    if set(mc.edges) | set(ms.edges) != set(d.matching.edges) or len(d.matching.edges) != matching_number(g):
        return False
    return all({d.y[a], d.y[b]} == {0, 1} for a, b in ms.edges)


def test_criterion_6_half_integrality(report):
    t0 = time.perf_counter()
    rnd = random.Random(6)
    graphs = list(_all_graphs(5))
    exhaustive = len(graphs)
    graphs += [_random_graph(rnd, n, rnd.choice([0.2, 0.35, 0.5])) for n in (6, 7, 8) for _ in range(60)]
    bad = []
    for g in graphs:
        h = half_integral_dual(g)
        if h.objective != agm_bound(g).objective or any(v not in (0, HALF, 1) for v in h.y) or not _decomposition_ok(g):
            bad.append((g.n, g.edges))
    dt = time.perf_counter() - t0
    ok = not bad
    report(6, ok, f"{exhaustive} graphs exhaustive n<=5, {len(graphs) - exhaustive} sampled n=6..8: {len(bad)} failures; {dt:.1f}s")
    assert ok, bad[:5]


def test_criterion_7_algorithm_B(report):
    t0 = time.perf_counter()
    bad, runs = [], 0
    for q, J in _random_instances(60, seed=7):
        for d in range(1, q.n + 1):
            best = exact_min_cover(J, d).size
            for S in itertools.combinations(range(q.n), q.n - d + 1):
                U = algorithm_B(q, d, S)
                runs += 1
                if not (verify_cover(J, U, d) and best <= U.size <= len(generic_join(projected_query(q, S)))):
                    bad.append((q, d, S))
    example = algorithm_B(example_instance(), 2, [0, 1, 2]).size
    dt = time.perf_counter() - t0
    ok = not bad and example == 4 and dt < 10
    report(7, ok, f"{runs} runs verified with min cover <= |U| <= |pi_S(J)|: {len(bad)} failures; Example 1 S={{1,2,3}} gives {example}; {dt:.1f}s")
    assert ok


def test_criterion_8_dependent_rounding(report):
    t0 = time.perf_counter()
    x = [Fraction(3, 10), Fraction(3, 10), Fraction(2, 5), Fraction(1, 3), Fraction(2, 3), Fraction(7, 8)]
    total = sum(x)
    trials = 100_000
    rng = np.random.default_rng(8)
    ones = np.zeros(len(x))
    sums_ok = 0
    lo, hi = math.floor(total), math.ceil(total)
    for _ in range(trials):
        out = dependent_round(x, rng)
        sums_ok += sum(out) in (lo, hi)
        ones += out
    worst = max(abs(ones[i] / trials - float(p)) / math.sqrt(float(p * (1 - p)) / trials) for i, p in enumerate(x))
    cfg = RoundingConfig()
    cost_ok = cost_trials = 0
    for g, s in ((cycle(4), 3), (TRI_STAR, 4), (Hypergraph(6, [(0, 1, 2), (2, 3), (3, 4, 5), (0, 5)]), 5)):
        sol = lp_lb(g, s)
        prim = lp_primal(g, s).solution
        xe = [prim[f"x[{','.join(map(str, e))}]"] for e in g.edges]
        bound = cost_bound(xe, cfg.c)
        for t in range(5000):
            X, _ = algorithm_A(g, xe, cfg, cfg.rng(t))
            cost_ok += sum(X) <= bound
            cost_trials += 1
        assert sol.objective == sum(xe)
    dt = time.perf_counter() - t0
    ok = sums_ok == trials and worst <= 3 and cost_ok == cost_trials and dt < 60
    report(8, ok, f"sum in {{floor,ceil}} on {sums_ok}/{trials}; worst marginal deviation {worst:.2f} sigma; cost bound on {cost_ok}/{cost_trials}; {dt:.1f}s")
    assert ok


def test_criterion_9_lp_gap(report):
    t0 = time.perf_counter()
    rnd = random.Random(9)
    graphs = []
    while len(graphs) < 100:
        n = rnd.randint(2, 10)
        m = rnd.randint(1, 12)
        edges = [tuple(sorted(rnd.sample(range(n), rnd.randint(1, min(3, n))))) for _ in range(m)]
        cov = {v for e in edges for v in e}
        edges += [(v,) for v in range(n) if v not in cov]
        if len(edges) <= 12:
            graphs.append(Hypergraph(n, edges))
    gap_bad, round_bad, pairs, worst = [], [], 0, Fraction(0)
    for gi, g in enumerate(graphs):
        for s in range(1, g.n + 1):
            lo, ub = lp_lb(g, s).objective, lp_ub(g, s).objective
            pairs += 1
            worst = max(worst, ub / lo)
            if ub > Fraction("10.37") * lo + 1:
                gap_bad.append((gi, s))
            rc = rounded_cover(g, s, RoundingConfig(rng_seed=gi))
            if len(rc.covered) < s:
                round_bad.append((gi, s))
    dt = time.perf_counter() - t0
    ok = not gap_bad and not round_bad and dt < 120
    report(9, ok, f"LP_ub <= 10.37 LP_lb + 1 on {pairs} (graph, s) pairs over {len(graphs)} hypergraphs (max ratio {float(worst):.3f}); rounding failures {len(round_bad)}; {dt:.1f}s")
    assert ok


def test_criterion_10_gap_instance(report):
    t0 = time.perf_counter()
    params = GapInstanceParams(2000, 0.3, 13)
    inst = gap_instance(params, np.random.default_rng(7))
    props = inst.property_a() and inst.property_b()
    b = gap_bounds(inst)
    dt = time.perf_counter() - t0
    ok = props and b.ratio_lower > Fraction(115, 100) and dt < 600
    report(
        10,
        ok,
        f"n=2000 eps=0.3 d={params.d} s={b.s}: properties (a),(b) {props}; "
        f"LP_lb <= {float(b.lp_lb_upper):.5f}, LP_ub in [{float(b.lp_ub_lower):.5f}, {float(b.lp_ub_upper):.5f}]; "
        f"ratio >= {float(b.ratio_lower):.4f} (upper estimate {b.ratio_upper:.4f}); {dt:.0f}s",
    )
    assert ok
