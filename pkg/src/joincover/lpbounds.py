"""Bound LPs over exact rationals.

Everything here is solved by a two-phase tableau simplex over
:class:`fractions.Fraction` with Bland's pivoting rule, so optimal values and
basic solutions are exact.  Objectives of the size-bound LPs are exponents of
``N``: an AGM value of ``3/2`` means the bound ``N**(3/2)``.
"""

from __future__ import annotations

import itertools
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Union

import numpy as np

from .core import Hypergraph, QueryInstance

Number = Union[int, Fraction]
HALF = Fraction(1, 2)


class LPError(Exception):
    """Base class for LP failures."""


class InfeasibleError(LPError):
    pass


class UnboundedError(LPError):
    pass


class LimitError(ValueError):
    """Input exceeds an enumeration limit of an exact routine."""


@dataclass(frozen=True)
class Constraint:
    coeffs: Mapping[Hashable, Number]
    sense: str  # "<=", ">=" or "=="
    rhs: Number


@dataclass
class LPResult:
    value: Fraction
    solution: dict[Hashable, Fraction]


def solve_lp(
    objective: Mapping[Hashable, Number],
    constraints: Sequence[Constraint | tuple],
    maximize: bool = False,
    free: Iterable[Hashable] = (),
) -> LPResult:
    """Optimise a linear objective; variables are non-negative unless listed in ``free``.

    Returns the exact optimum and a basic optimal solution.  Raises
    :class:`InfeasibleError` or :class:`UnboundedError`.
    """
    cons = [c if isinstance(c, Constraint) else Constraint(*c) for c in constraints]
    names: list[Hashable] = []
    seen = set()
    for key in itertools.chain(objective, *(c.coeffs for c in cons)):
        if key not in seen:
            seen.add(key)
            names.append(key)
    free = set(free)
    # column layout: one column per variable, a second (negated) one for free variables
    cols: list[tuple[Hashable, int]] = []
    for v in names:
        cols.append((v, 1))
        if v in free:
            cols.append((v, -1))
    col_of: dict[Hashable, list[tuple[int, int]]] = {}
    for j, (v, sgn) in enumerate(cols):
        col_of.setdefault(v, []).append((j, sgn))

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    kinds: list[str] = []
    for c in cons:
        if c.sense not in ("<=", ">=", "=="):
            raise ValueError(f"unknown constraint sense {c.sense!r}")
        row = [Fraction(0)] * len(cols)
        for v, a in c.coeffs.items():
            for j, sgn in col_of[v]:
                row[j] += sgn * Fraction(a)
        b = Fraction(c.rhs)
        sense = c.sense
        if b < 0:
            row = [-a for a in row]
            b = -b
            sense = {"<=": ">=", ">=": "<=", "==": "=="}[sense]
        rows.append(row)
        rhs.append(b)
        kinds.append(sense)

    m, nv = len(rows), len(cols)
    n_slack = sum(k != "==" for k in kinds)
    n_art = sum(k != "<=" for k in kinds)
    width = nv + n_slack + n_art
    tab = []
    basis = []
    s_col, a_col = nv, nv + n_slack
    art_cols = []
    for i in range(m):
        r = rows[i] + [Fraction(0)] * (n_slack + n_art) + [rhs[i]]
        if kinds[i] == "<=":
            r[s_col] = Fraction(1)
            basis.append(s_col)
            s_col += 1
        else:
            if kinds[i] == ">=":
                r[s_col] = Fraction(-1)
                s_col += 1
            r[a_col] = Fraction(1)
            basis.append(a_col)
            art_cols.append(a_col)
            a_col += 1
        tab.append(r)

    def pivot(pr: int, pc: int) -> None:
        prow = tab[pr]
        pv = prow[pc]
        if pv != 1:
            tab[pr] = prow = [a / pv for a in prow]
        nz = [j for j, a in enumerate(prow) if a]
        for i in range(len(tab)):
            if i != pr:
                f = tab[i][pc]
                if f:
                    ri = tab[i]
                    for j in nz:
                        ri[j] -= f * prow[j]
        basis[pr] = pc

    def run(cost: list[Fraction], allowed: int) -> None:
        # minimise cost . x over the current tableau; columns >= allowed never enter
        red = list(cost) + [Fraction(0)]
        for i, b in enumerate(basis):
            cb = cost[b]
            if cb:
                ri = tab[i]
                red = [rj - cb * a for rj, a in zip(red, ri)]
        while True:
            enter = next((j for j in range(allowed) if red[j] < 0), None)
            if enter is None:
                return
            best = None
            for i in range(len(tab)):
                a = tab[i][enter]
                if a > 0:
                    ratio = tab[i][-1] / a
                    key = (ratio, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                raise UnboundedError("objective is unbounded")
            pivot(best[1], enter)
            # keep the reduced-cost row in step with the tableau
            f = red[enter]
            prow = tab[best[1]]
            for j, a in enumerate(prow):
                if a:
                    red[j] -= f * a

    if art_cols:
        cost1 = [Fraction(0)] * width
        for j in art_cols:
            cost1[j] = Fraction(1)
        run(cost1, width)
        if sum(tab[i][-1] for i, b in enumerate(basis) if b >= nv + n_slack) > 0:
            raise InfeasibleError("constraints are infeasible")
        # drive artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(tab):
            if basis[i] >= nv + n_slack:
                j = next((j for j in range(nv + n_slack) if tab[i][j] != 0), None)
                if j is None:
                    del tab[i]
                    del basis[i]
                    continue
                pivot(i, j)
            i += 1
    sign = -1 if maximize else 1
    cost2 = [Fraction(0)] * width
    for j, (v, sgn) in enumerate(cols):
        cost2[j] = sign * sgn * Fraction(objective.get(v, 0))
    run(cost2, nv + n_slack)

    values = [Fraction(0)] * width
    for i, b in enumerate(basis):
        values[b] = tab[i][-1]
    sol = {v: Fraction(0) for v in names}
    for j, (v, sgn) in enumerate(cols):
        sol[v] += sgn * values[j]
    val = sum((Fraction(objective.get(v, 0)) * sol[v] for v in names), Fraction(0))
    return LPResult(val, sol)


def check_feasible(sol: Mapping[Hashable, Fraction], constraints: Sequence[Constraint | tuple]) -> bool:
    """Exact re-substitution of a solution into a constraint list."""
    for c in constraints:
        c = c if isinstance(c, Constraint) else Constraint(*c)
        lhs = sum((Fraction(a) * sol.get(v, 0) for v, a in c.coeffs.items()), Fraction(0))
        ok = {"<=": lhs <= c.rhs, ">=": lhs >= c.rhs, "==": lhs == c.rhs}[c.sense]
        if not ok:
            return False
    return True


# reports

@dataclass
class BoundReport:
    """An LP value with the solution that attains it."""

    objective: Fraction
    solution: dict[str, Fraction]
    kind: str

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "objective": frac_str(self.objective),
            "solution": {k: frac_str(v) for k, v in sorted(self.solution.items())},
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "BoundReport":
        return cls(Fraction(data["objective"]), {k: Fraction(v) for k, v in data["solution"].items()}, data["kind"])


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _ename(e: tuple[int, ...]) -> str:
    return "x[" + ",".join(map(str, e)) + "]"


def _as_graph(g: Hypergraph | QueryInstance) -> Hypergraph:
    return g.hypergraph if isinstance(g, QueryInstance) else g


def _check_covered(g: Hypergraph, S: Iterable[int]) -> None:
    cov = g.covered()
    missing = sorted(set(S) - cov)
    if missing:
        raise InfeasibleError(f"vertices {missing} lie in no edge")


def agm_bound(g: Hypergraph | QueryInstance, S: Iterable[int] | None = None) -> BoundReport:
    """Fractional edge cover number of ``S``: min sum x_e with every v in S covered at least once."""
    g = _as_graph(g)
    S = sorted(set(range(g.n) if S is None else S))
    _check_covered(g, S)
    edges = [e for e in g.edges if set(e) & set(S)]
    cons = [Constraint({e: 1 for e in edges if v in e}, ">=", 1) for v in S]
    res = solve_lp({e: 1 for e in edges}, cons)
    return BoundReport(res.value, {_ename(e): res.solution.get(e, Fraction(0)) for e in edges}, "AGM")


def fec_dual(g: Hypergraph, S: Iterable[int] | None = None) -> BoundReport:
    """Fractional vertex packing: max sum_{v in S} y_v with at most 1 per edge."""
    g = _as_graph(g)
    S = sorted(set(range(g.n) if S is None else S))
    _check_covered(g, S)
    inS = set(S)
    cons = []
    for e in g.edges:
        part = [v for v in e if v in inS]
        if part:
            cons.append(Constraint({v: 1 for v in part}, "<=", 1))
    res = solve_lp({v: 1 for v in S}, cons, maximize=True)
    return BoundReport(res.value, {f"y[{v}]": res.solution.get(v, Fraction(0)) for v in S}, "FEC_DUAL")


# polymatroid bound with degree constraints

@dataclass(frozen=True)
class DegreeConstraint:
    """At most ``N**exponent`` distinct Y-values per X-value inside the guarding relation.

    ``X`` empty means a plain cardinality constraint.  The bounds used here are
    ``N`` (exponent 1) and ``sqrt(N)`` (exponent 1/2).
    """

    X: frozenset[int]
    Y: frozenset[int]
    exponent: Fraction
    guard: tuple[int, ...]

    def __init__(self, X: Iterable[int], Y: Iterable[int], exponent: Number = 1, guard: Iterable[int] | None = None):
        X, Y = frozenset(X), frozenset(Y)
        if not X < Y:
            raise ValueError("need X to be a proper subset of Y")
        guard = tuple(sorted(Y if guard is None else guard))
        if not Y <= set(guard):
            raise ValueError("Y must lie inside the guarding edge")
        if Fraction(exponent) < 0:
            raise ValueError("negative bound exponent")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "exponent", Fraction(exponent))
        object.__setattr__(self, "guard", guard)

    @property
    def name(self) -> str:
        x = ",".join(map(str, sorted(self.X)))
        y = ",".join(map(str, sorted(self.Y)))
        return f"d[{y}|{x}]"

    def to_json(self) -> dict[str, Any]:
        return {"X": sorted(self.X), "Y": sorted(self.Y), "exponent": frac_str(self.exponent), "guard": list(self.guard)}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "DegreeConstraint":
        return cls(data["X"], data["Y"], Fraction(str(data.get("exponent", 1))), data.get("guard"))


def cardinality_constraints(g: Hypergraph | QueryInstance) -> list[DegreeConstraint]:
    g = _as_graph(g)
    return [DegreeConstraint((), e, 1, e) for e in g.edges]


def constraint_graph_is_acyclic(S: Iterable[int], dc: Iterable[DegreeConstraint]) -> bool:
    S = set(S)
    succ: dict[int, set[int]] = {v: set() for v in S}
    for d in dc:
        for x in d.X & S:
            succ[x].update((d.Y - d.X) & S)
    state: dict[int, int] = {}

    def visit(u: int) -> bool:
        state[u] = 1
        for w in succ[u]:
            st = state.get(w, 0)
            if st == 1 or (st == 0 and not visit(w)):
                return False
        state[u] = 2
        return True

    return all(state.get(v) == 2 or visit(v) for v in sorted(S))


def pmb_bound(
    q: Hypergraph | QueryInstance,
    S: Iterable[int] | None = None,
    dc: Sequence[DegreeConstraint] | None = None,
) -> BoundReport:
    """Degree-constraint bound: min sum delta * exponent, covering each v in S by constraints with v in Y minus X.

    Cardinality constraints of all edges are always included.  The constraint
    graph (x -> y for x in X, y in Y minus X) restricted to S must be acyclic;
    otherwise prune the constraints first (see :func:`tree_degree_constraints`).
    """
    g = _as_graph(q)
    S = sorted(set(range(g.n) if S is None else S))
    allc = list(dict.fromkeys(cardinality_constraints(g) + list(dc or [])))
    if not constraint_graph_is_acyclic(S, allc):
        raise ValueError("degree-constraint graph is cyclic; prune the constraints along directed paths first")
    useful = [d for d in allc if (d.Y - d.X) & set(S)]
    for v in S:
        if not any(v in d.Y - d.X for d in useful):
            raise InfeasibleError(f"vertex {v} is not covered by any constraint")
    cons = [Constraint({i: 1 for i, d in enumerate(useful) if v in d.Y - d.X}, ">=", 1) for v in S]
    res = solve_lp({i: d.exponent for i, d in enumerate(useful)}, cons)
    return BoundReport(res.value, {d.name: res.solution.get(i, Fraction(0)) for i, d in enumerate(useful)}, "PMB")


def tree_degree_constraints(g: Hypergraph, S: Iterable[int], exponent: Number = HALF) -> list[DegreeConstraint]:
    """Acyclic sqrt(N)-style constraints along a BFS tree of each component of ``G[S]``.

    Each component is rooted at its smallest vertex; the first tree edge keeps
    only its cardinality constraint and every other tree edge ``p -> c``
    contributes the constraint (p, {p, c}, N**exponent), oriented away from
    the root, which keeps the constraint graph acyclic.
    """
    S = set(S)
    sub = g.induced(S)
    out = []
    for comp in sub.components(S):
        if len(comp) < 2:
            continue
        root = comp[0]
        order = [root]
        parent = {root: None}
        adj = {v: sorted(sub.neighbours(v) & set(comp)) for v in comp}
        k = 0
        while k < len(order):
            u = order[k]
            k += 1
            for w in adj[u]:
                if w not in parent:
                    parent[w] = u
                    order.append(w)
        for c in order[2:]:
            p = parent[c]
            out.append(DegreeConstraint({p}, {p, c}, exponent, (min(p, c), max(p, c))))
    return out


def pmb_union_check(
    whole: tuple[Hypergraph | QueryInstance, Iterable[int], Sequence[DegreeConstraint] | None],
    parts: Sequence[tuple[Hypergraph | QueryInstance, Iterable[int], Sequence[DegreeConstraint] | None]],
) -> bool:
    """Whether the bound of the whole is at most the sum of the bounds of the parts."""
    g, S, dc = whole
    S = set(S)
    union = set()
    for _, Si, _ in parts:
        union |= set(Si)
    if union != S:
        raise ValueError("the parts must cover S")
    total = sum((pmb_bound(gi, Si, dci).objective for gi, Si, dci in parts), Fraction(0))
    return pmb_bound(g, S, dc).objective <= total


# half-integral optimal duals

@dataclass(frozen=True)
class HalfIntegralDual:
    y: tuple[Fraction, ...]
    objective: Fraction

    def values(self, value: Fraction) -> list[int]:
        return [v for v, yv in enumerate(self.y) if yv == value]


def _is_half_integral(vals: Iterable[Fraction]) -> bool:
    return all(v in (0, HALF, 1) for v in vals)


def _dual_feasible(g: Hypergraph, y: Sequence[Fraction]) -> bool:
    return all(sum(y[v] for v in e) <= 1 for e in g.edges) and all(v >= 0 for v in y)


def _require_graph(g: Hypergraph) -> None:
    if not g.is_graph:
        raise ValueError("needs a graph (edges of arity at most 2)")
    _check_covered(g, range(g.n))


def optimal_barrier_duals(g: Hypergraph, limit: int = 20) -> list[tuple[Fraction, ...]]:
    """All optimal half-integral duals of the packing LP of a graph.

    Every half-integral optimum has the shape: 0 on a set X, 1 on the
    vertices all of whose neighbours lie in X, 1/2 elsewhere.  So it is enough
    to enumerate the sets X.  Returned in order of increasing X as a bitmask.
    """
    _require_graph(g)
    n = g.n
    if n > limit:
        raise LimitError(f"barrier enumeration is limited to {limit} vertices")
    nbr = [0] * n
    for e in g.edges:
        if len(e) == 2:
            u, v = e
            nbr[u] |= 1 << v
            nbr[v] |= 1 << u
    X = np.arange(1 << n, dtype=np.int64)
    zero = np.zeros((n, X.size), dtype=bool)
    one = np.zeros((n, X.size), dtype=bool)
    for v in range(n):
        inX = (X >> v) & 1 == 1
        zero[v] = inX
        one[v] = ~inX & ((np.int64(nbr[v]) & ~X) == 0)
    # objective doubled: 2 per one-vertex, 1 per half-vertex
    twice = n - zero.sum(axis=0) + one.sum(axis=0)
    best = twice.max()
    out = []
    for x in np.nonzero(twice == best)[0]:
        y = tuple(Fraction(0) if zero[v, x] else Fraction(1) if one[v, x] else HALF for v in range(n))
        out.append(y)
    return out


def half_integral_dual(g: Hypergraph) -> HalfIntegralDual:
    """A basic optimal solution of the packing LP, which is half-integral.

    Falls back to barrier enumeration (n <= 16) if the basic solution found by
    the simplex is not half-integral; that branch is a guard and is not
    expected to trigger.
    """
    _require_graph(g)
    rep = fec_dual(g)
    y = tuple(rep.solution[f"y[{v}]"] for v in range(g.n))
    if _is_half_integral(y):
        return HalfIntegralDual(y, rep.objective)
    if g.n > 16:
        raise LimitError("basic solution is not half-integral and n > 16")
    for cand in optimal_barrier_duals(g, 16):
        if sum(cand) == rep.objective:
            return HalfIntegralDual(cand, rep.objective)
    raise LPError("no half-integral optimum found")


# general-arity LP pair

def _primal_constraints(g: Hypergraph, s: int, ones=(), zeros=()) -> list[Constraint]:
    cons = []
    ones, zeros = set(ones), set(zeros)
    for v in range(g.n):
        cover = {e: 1 for e in g.edges if v in e}
        if v in zeros:
            continue
        if v in ones:
            cons.append(Constraint(cover, ">=", 1))
        else:
            cover[("z", v)] = -1
            cons.append(Constraint(cover, ">=", 0))
            cons.append(Constraint({("z", v): 1}, "<=", 1))
    zsum = {("z", v): 1 for v in range(g.n) if v not in ones and v not in zeros}
    cons.append(Constraint(zsum, ">=", s - len(ones)))
    return cons


def _check_s(g: Hypergraph, s: int) -> None:
    if not 1 <= s <= g.n:
        raise ValueError(f"s must lie in [1, {g.n}]")
    _check_covered(g, range(g.n))


def lp_primal(g: Hypergraph, s: int) -> BoundReport:
    """Fractional edge cover of s vertices counted fractionally (z in [0, 1], sum z >= s)."""
    _check_s(g, s)
    res = solve_lp({e: 1 for e in g.edges}, _primal_constraints(g, s))
    sol = {_ename(e): res.solution.get(e, Fraction(0)) for e in g.edges}
    sol.update({f"z[{v}]": res.solution.get(("z", v), Fraction(0)) for v in range(g.n)})
    return BoundReport(res.value, sol, "LP_PRIMAL")


def lp_lb(g: Hypergraph, s: int) -> BoundReport:
    """max L over vertex packings y such that every s-subset has y-mass at least L.

    Solved by cutting planes: each round adds the s-subset with the smallest
    y-mass until no subset is violated.
    """
    g = _as_graph(g)
    _check_s(g, s)
    cons = [Constraint({v: 1 for v in e}, "<=", 1) for e in g.edges]
    cuts = [tuple(range(s))]
    while True:
        allc = cons + [Constraint({"L": 1, **{v: -1 for v in S}}, "<=", 0) for S in cuts]
        res = solve_lp({"L": 1}, allc, maximize=True, free=["L"])
        y = [res.solution.get(v, Fraction(0)) for v in range(g.n)]
        S = tuple(sorted(sorted(range(g.n), key=lambda v: (y[v], v))[:s]))
        if sum(y[v] for v in S) >= res.value:
            sol = {f"y[{v}]": y[v] for v in range(g.n)}
            sol["L"] = res.value
            return BoundReport(res.value, sol, "LP_LB")
        cuts.append(S)


def lp_ub(g: Hypergraph, s: int) -> BoundReport:
    """min sum x_e such that at least s vertices are covered integrally (sum over incident edges >= 1).

    Exact branch and bound over the 0/1 vertex indicators with exact LP
    relaxations.  The root relaxation is :func:`lp_primal`.
    """
    g = _as_graph(g)
    _check_s(g, s)
    edges = g.edges
    best: list[Any] = [None, None]

    def agm_of(S: Sequence[int]) -> tuple[Fraction, dict]:
        res = solve_lp({e: 1 for e in edges}, [Constraint({e: 1 for e in edges if v in e}, ">=", 1) for v in S])
        return res.value, res.solution

    def relax(ones: frozenset, zeros: frozenset):
        free_n = g.n - len(ones) - len(zeros)
        if len(ones) > s or free_n + len(ones) < s:
            return None
        try:
            return solve_lp({e: 1 for e in edges}, _primal_constraints(g, s, ones, zeros))
        except InfeasibleError:
            return None

    def record(S: Sequence[int]) -> None:
        val, sol = agm_of(S)
        if best[0] is None or val < best[0]:
            best[0] = val
            best[1] = (tuple(sorted(S)), sol)

    def node(ones: frozenset, zeros: frozenset) -> None:
        res = relax(ones, zeros)
        if res is None or (best[0] is not None and res.value >= best[0]):
            return
        z = {v: Fraction(1) if v in ones else Fraction(0) if v in zeros else res.solution.get(("z", v), Fraction(0))
             for v in range(g.n)}
        cov = {v: sum((res.solution.get(e, Fraction(0)) for e in edges if v in e), Fraction(0)) for v in range(g.n)}
        full = [v for v in range(g.n) if v not in zeros and cov[v] >= 1]
        if len(full) >= s:
            # the relaxation already covers s vertices integrally
            record(full[:s] if len(full) == s else sorted(full, key=lambda v: -cov[v])[:s])
            if best[0] == res.value:
                return
        frac = [v for v in range(g.n) if v not in ones and v not in zeros and 0 < z[v] < 1]
        if not frac:
            frac = [v for v in range(g.n) if v not in ones and v not in zeros]
            if not frac:
                return
        v = max(frac, key=lambda u: (z[u], -u))
        node(ones | {v}, zeros)
        node(ones, zeros | {v})

    # incumbent from the s vertices of largest coverage in the root relaxation
    root = relax(frozenset(), frozenset())
    cov0 = {v: sum((root.solution.get(e, Fraction(0)) for e in edges if v in e), Fraction(0)) for v in range(g.n)}
    record(sorted(sorted(range(g.n), key=lambda v: (-cov0[v], v))[:s]))
    node(frozenset(), frozenset())
    S, sol = best[1]
    out = {_ename(e): sol.get(e, Fraction(0)) for e in edges}
    out.update({f"z[{v}]": Fraction(int(v in S)) for v in range(g.n)})
    return BoundReport(best[0], out, "LP_UB")


def lp_ub_star(g: Hypergraph, s: int, limit: int = 20) -> BoundReport:
    """min over all s-subsets S of the AGM bound of S, by enumeration."""
    g = _as_graph(g)
    _check_s(g, s)
    if g.n > limit:
        raise LimitError(f"subset enumeration is limited to n <= {limit}")
    best = None
    for S in itertools.combinations(range(g.n), s):
        rep = agm_bound(g, S)
        if best is None or rep.objective < best[0].objective:
            best = (rep, S)
    rep, S = best
    sol = dict(rep.solution)
    sol.update({f"z[{v}]": Fraction(int(v in S)) for v in range(g.n)})
    return BoundReport(rep.objective, sol, "LP_UB_STAR")
