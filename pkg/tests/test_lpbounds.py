import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from joincover.core import Hypergraph, cycle, path
from joincover.lpbounds import (
    BoundReport,
    Constraint,
    DegreeConstraint,
    InfeasibleError,
    UnboundedError,
    agm_bound,
    check_feasible,
    fec_dual,
    half_integral_dual,
    lp_lb,
    lp_primal,
    lp_ub,
    lp_ub_star,
    optimal_barrier_duals,
    pmb_bound,
    pmb_union_check,
    solve_lp,
    tree_degree_constraints,
)

import oracles


def F(s):
    return Fraction(s)


def test_solve_lp_small():
    res = solve_lp({"x": 1, "y": 1}, [Constraint({"x": 1, "y": 2}, ">=", 2), Constraint({"x": 3, "y": 1}, ">=", 3)])
    assert res.value == Fraction(7, 5)
    assert check_feasible(res.solution, [({"x": 1, "y": 2}, ">=", 2), ({"x": 3, "y": 1}, ">=", 3)])


def test_solve_lp_errors():
    with pytest.raises(InfeasibleError):
        solve_lp({"x": 1}, [Constraint({"x": 1}, "<=", -1)])
    with pytest.raises(UnboundedError):
        solve_lp({"x": 1}, [], maximize=True)


def test_free_variable():
    res = solve_lp({"L": 1}, [Constraint({"L": 1}, ">=", -3)], free=["L"])
    assert res.value == -3


def test_named_bounds_against_frozen(frozen):
    for name, item in frozen["lp"].items():
        g = Hypergraph(item["n"], item["edges"])
        assert agm_bound(g).objective == F(item["agm"]), name
        for s in range(1, g.n + 1):
            assert lp_lb(g, s).objective == F(item["lp_lb"][s - 1]), (name, s)
            assert lp_ub(g, s).objective == F(item["lp_ub"][s - 1]), (name, s)


def test_cycle_values():
    g = cycle(4)
    assert agm_bound(g).objective == 2
    assert agm_bound(g, [0, 1, 2]).objective == 2
    assert lp_lb(g, 3).objective == Fraction(3, 2)
    assert lp_primal(g, 3).objective == Fraction(3, 2)
    assert lp_ub(g, 3).objective == 2 == lp_ub_star(g, 3).objective


def test_fec_dual_matches_agm():
    tri = Hypergraph(3, [(0, 1), (1, 2), (0, 2)])
    assert fec_dual(tri).objective == Fraction(3, 2) == agm_bound(tri).objective
    with pytest.raises(InfeasibleError):
        fec_dual(Hypergraph(2, [(0,)]))


def test_special_families():
    # disjoint cycles k/2, t stars on k vertices k - t, singletons k, even paths k/2
    assert agm_bound(Hypergraph(7, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (5, 6), (3, 6)])).objective == Fraction(7, 2)
    assert agm_bound(Hypergraph(7, [(0, 1), (0, 2), (0, 3), (4, 5), (4, 6)])).objective == 5
    assert agm_bound(Hypergraph(4, [(0,), (1,), (2,), (3,)])).objective == 4
    assert agm_bound(Hypergraph(8, [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (6, 7)])).objective == 4


def test_half_integral_dual_examples():
    assert half_integral_dual(cycle(5)).y == (Fraction(1, 2),) * 5
    assert half_integral_dual(Hypergraph(2, [(0, 1)])).objective == 1
    tri_star = Hypergraph(6, [(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (5,)])
    assert half_integral_dual(tri_star).objective == Fraction(7, 2)
    assert (F("1/2"), F("1/2"), F("1/2"), F(0), F(1), F(1)) in optimal_barrier_duals(tri_star)


def test_half_integral_against_frozen(frozen):
    for item in frozen["fec"]:
        g = Hypergraph(item["n"], item["edges"])
        hd = half_integral_dual(g)
        assert hd.objective == F(item["optimum"]) == F(item["half_integral"])
        assert all(2 * v == int(2 * v) for v in hd.y)


def test_pmb_tree_constraints_path():
    g = path(3)
    assert pmb_bound(g, [0, 1, 2], tree_degree_constraints(g, [0, 1, 2])).objective == Fraction(3, 2)
    assert pmb_bound(g).objective == agm_bound(g).objective


def test_pmb_rejects_cycles():
    g = cycle(3)
    dc = [DegreeConstraint({0}, {0, 1}, Fraction(1, 2), (0, 1)), DegreeConstraint({1}, {0, 1}, Fraction(1, 2), (0, 1))]
    with pytest.raises(ValueError):
        pmb_bound(g, [0, 1, 2], dc)


def test_pmb_union():
    g = Hypergraph(4, [(0, 1), (2, 3)])
    parts = [(Hypergraph(4, [(0, 1)]), [0, 1], None), (Hypergraph(4, [(2, 3)]), [2, 3], None)]
    assert pmb_union_check((g, [0, 1, 2, 3], None), parts)


def test_degree_constraint_json():
    d = DegreeConstraint({0}, {0, 1}, Fraction(1, 2), (0, 1))
    assert DegreeConstraint.from_json(d.to_json()) == d


def test_bound_report_json():
    rep = lp_ub(cycle(4), 3)
    assert BoundReport.from_json(rep.to_json()) == rep


@st.composite
def hypergraphs(draw):
    n = draw(st.integers(2, 6))
    m = draw(st.integers(1, 6))
    edges = [tuple(draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=3))) for _ in range(m)]
    cov = {v for e in edges for v in e}
    return Hypergraph(n, edges + [(v,) for v in range(n) if v not in cov])


@given(hypergraphs(), st.data())
def test_lp_pair_ordering(g, data):
    s = data.draw(st.integers(1, g.n))
    lo, ub, star = lp_lb(g, s).objective, lp_ub(g, s).objective, lp_ub_star(g, s).objective
    assert lo == lp_primal(g, s).objective
    assert lo <= ub
    # both routes to the integral-coverage program agree
    assert ub == star
    assert abs(float(lo) - oracles.lp_lb_float(g.n, g.edges, s)) < 1e-7
    assert abs(float(ub) - oracles.lp_ub_float(g.n, g.edges, s)) < 1e-7


@given(hypergraphs())
def test_agm_dual_route(g):
    assert agm_bound(g).objective == fec_dual(g).objective
    assert abs(float(agm_bound(g).objective) - oracles.agm_float(g.n, g.edges)) < 1e-7


def test_s_equals_n_ratio_one():
    for g in (cycle(4), cycle(5), Hypergraph(3, [(0, 1, 2), (2,)])):
        assert lp_ub(g, g.n).objective == lp_lb(g, g.n).objective
