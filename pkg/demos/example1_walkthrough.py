"""Walk through the bundled 4-cycle conference instance: join, bounds, covers, packings."""

from joincover.core import example_cover, example_instance, naive_join
from joincover.cover import algorithm_B, exact_max_packing, exact_min_cover, greedy_packing, projection_bound, verify_cover
from joincover.lpbounds import agm_bound, lp_lb, lp_ub
from joincover.pick import classify_case, pick_S


def show(title, q, rows):
    print(f"{title} ({len(rows)} tuples)")
    for t in rows:
        print("   ", " | ".join(q.decode(t)))


def main():
    q = example_instance()
    g = q.hypergraph
    J = naive_join(q)
    delta = 2
    s = q.n - delta + 1
    print(f"query over {q.n} attributes with edges {list(g.edges)}")
    show("join output", q, J.rows)

    print(f"\nwith delta={delta} a cover must reach every tuple within distance {delta - 1}; s = n - delta + 1 = {s}")
    print(f"AGM exponent {agm_bound(g).objective}, LP_lb {lp_lb(g, s).objective}, LP_ub {lp_ub(g, s).objective}")
    row = classify_case(g, delta)
    S, _ = pick_S(g, delta)
    print(f"case row {row.row}, predicted exponent {row.predicted_exponent}, picked attributes {list(S)}")

    best = exact_min_cover(J, delta)
    show("\nsmallest cover", q, best.tuples)
    print("bundled cover verifies:", verify_cover(J, [q.encode_row(t) for t in example_cover()], delta))
    print("greedy packing size:", greedy_packing(J, delta).size, " largest packing:", exact_max_packing(J, delta).size)
    print("projection bound:", projection_bound(J, q.n, delta))
    show("\nprojection-and-extend cover from S", q, algorithm_B(q, delta, S).tuples)


if __name__ == "__main__":
    main()
