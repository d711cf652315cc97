"""Which attribute subset to project on, for graphs of arity at most two.

With ``s = n - delta + 1`` the graph falls into one of six cases, each with
a predicted exponent ``a`` such that some s-subset ``S`` has a projected join
of size at most ``N**a``.  :func:`pick_S` returns that subset and
:func:`pick_bound` the LP value certifying it.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .core import Hypergraph, QueryInstance, Relation, naive_join
from .graphs import decompose, is_disedge, matching_number, maximum_matching
from .lpbounds import HALF, BoundReport, DegreeConstraint, agm_bound, frac_str, pmb_bound, tree_degree_constraints


@dataclass(frozen=True)
class CaseRow:
    row: int
    s: int
    predicted_exponent: Fraction

    def to_json(self) -> dict[str, Any]:
        return {"row": self.row, "s": self.s, "exponent": frac_str(self.predicted_exponent)}


def _s_of(g: Hypergraph, delta: int) -> int:
    if not g.is_graph:
        raise ValueError("needs a graph (edges of arity at most 2)")
    if not 1 <= delta <= g.n:
        raise ValueError(f"delta must lie in [1, {g.n}]")
    return g.n - delta + 1


def classify_case(g: Hypergraph, delta: int) -> CaseRow:
    s = _s_of(g, delta)
    m = 2 * matching_number(g)
    if s == 1:
        return CaseRow(1, s, Fraction(1))
    if s % 2 == 0 and s <= m:
        return CaseRow(2, s, Fraction(s, 2))
    if s % 2 == 1 and 3 <= s <= m - 1:
        if is_disedge(g):
            return CaseRow(4, s, Fraction(s + 1, 2))
        return CaseRow(3, s, Fraction(s, 2))
    n_I = decompose(g).n_I
    if m + 1 <= s <= m + n_I:
        return CaseRow(5, s, Fraction(s, 2))
    return CaseRow(6, s, s - Fraction(m + n_I, 2))


def _path_with(g: Hypergraph, comp: Sequence[int], k: int, budget: int = 200_000) -> list[int] | None:
    """A simple path on k vertices inside ``comp``, found by depth-first search."""
    allowed = set(comp)
    adj = {v: sorted(g.neighbours(v) & allowed) for v in comp}
    steps = 0
    for start in comp:
        stack = [(start, [start])]
        while stack:
            v, p = stack.pop()
            steps += 1
            if steps > budget:
                return None
            if len(p) == k:
                return p
            on = set(p)
            for w in reversed(adj[v]):
                if w not in on:
                    stack.append((w, p + [w]))
    return None


def _bfs_prefix(g: Hypergraph, comp: Sequence[int], k: int) -> list[int]:
    allowed = set(comp)
    order = [comp[0]]
    seen = {comp[0]}
    i = 0
    while i < len(order) and len(order) < k:
        for w in sorted(g.neighbours(order[i]) & allowed):
            if w not in seen and len(order) < k:
                seen.add(w)
                order.append(w)
        i += 1
    return order


def light_picking_1(g: Hypergraph, s: int) -> tuple[int, ...]:
    """Pick s vertices so that inside every component the picked part is connected with at least two vertices.

    Components are visited by decreasing size.  Each takes a path (or, when
    no path is long enough, a connected BFS prefix) of up to the remaining
    count.  When exactly one vertex is left to pick, a leaf of the last pick
    of three or more vertices is returned and the two endpoints of an edge in
    the current component are taken instead.
    """
    if not g.is_graph:
        raise ValueError("needs a graph (edges of arity at most 2)")
    if is_disedge(g):
        raise ValueError("light picking needs a graph that is not a disedge")
    if s < 3 or s % 2 == 0:
        raise ValueError("light picking needs an odd s >= 3")
    comps = sorted(g.components(), key=lambda c: (-len(c), c[0]))
    S: list[int] = []
    last: list[int] = []
    for cc in comps:
        topick = min(s - len(S), len(cc))
        if topick == 0:
            break
        if topick > 1:
            T = _path_with(g, cc, topick) or _bfs_prefix(g, cc, topick)
            S += T
            if len(T) > 2:
                last = T
        else:
            edge = next((e for e in g.edges if len(e) == 2 and set(e) <= set(cc)), None)
            if edge is None or not last:
                raise ValueError("s is too large for light picking on this graph")
            S.remove(last[-1])
            S += list(edge)
            break
    if len(S) != s:
        raise ValueError("s is too large for light picking on this graph")
    return tuple(sorted(S))


def pick_S(g: Hypergraph, delta: int) -> tuple[tuple[int, ...], CaseRow]:
    """The subset S of size n - delta + 1 chosen for the graph's case, with the case row."""
    row = classify_case(g, delta)
    s = row.s
    if row.row == 1:
        return (0,), row
    M = maximum_matching(g) if row.row in (2, 4) else decompose(g).matching
    if row.row == 2:
        S = [v for e in M.edges[: s // 2] for v in e]
    elif row.row == 3:
        return light_picking_1(g, s), row
    elif row.row == 4:
        S = [v for e in M.edges[: (s - 1) // 2] for v in e]
        S.append(min(v for v in range(g.n) if v not in S))
    else:
        d = decompose(g)
        S = sorted(d.matching.vertices)
        spare = [v for v in d.core if v not in d.matching.vertices]
        if row.row == 5:
            S += spare[: s - len(S)]
        else:
            S += spare
            S += [v for v in range(g.n) if v not in S][: s - len(S)]
    return tuple(sorted(S)), row


def pick_bound(g: Hypergraph, delta: int) -> BoundReport:
    """LP value certifying the predicted exponent of the picked subset.

    Case 3 uses the degree-constraint bound with sqrt(N) constraints along a
    spanning tree of each picked component (all values light); every other
    case uses the AGM bound.
    """
    S, row = pick_S(g, delta)
    if row.row == 3:
        return pmb_bound(g, S, tree_degree_constraints(g, S))
    return agm_bound(g, S)


def heavy_pick_bound(g: Hypergraph, h: int, S: Iterable[int]) -> BoundReport:
    """Bound for the heavy branch: h carries a unary sqrt(N) relation and its edges are dropped."""
    S = set(S) | {h}
    rest = Hypergraph(g.n, [e for e in g.edges if h not in e] + [(h,)])
    return pmb_bound(rest, S, [DegreeConstraint((), (h,), HALF, (h,))])


# heavy / light split of an instance

@dataclass(frozen=True)
class HeavyLightSplit:
    light: QueryInstance
    heavy: dict[int, QueryInstance]
    threshold: int


def heavy_light_split(q: QueryInstance, threshold: int | None = None) -> HeavyLightSplit:
    """Peel off heavy values vertex by vertex.

    For each vertex h in index order, R_h is the set of values of h that occur
    at least ``threshold`` times in some incident relation (as it stands after
    earlier vertices were processed).  The heavy instance for h replaces h's
    incident relations by the unary R_h; the heavy values are then removed
    from h's incident relations, and what remains at the end is the light
    instance.
    """
    if not q.hypergraph.is_graph:
        raise ValueError("needs an instance of arity at most 2")
    if threshold is None:
        if q.N is None:
            raise ValueError("threshold defaults to floor(sqrt(N)) and needs N")
        threshold = math.isqrt(q.N)
    if threshold < 1:
        raise ValueError("threshold must be at least 1")
    running = {r.schema: set(r.rows) for r in q.relations}
    heavy = {}
    for h in range(q.n):
        incident = [sch for sch in running if h in sch]
        values = set()
        for sch in incident:
            pos = sch.index(h)
            counts: dict[int, int] = {}
            for row in running[sch]:
                counts[row[pos]] = counts.get(row[pos], 0) + 1
            values |= {v for v, c in counts.items() if c >= threshold}
        if not values:
            continue
        rels = [Relation(sch, rows) for sch, rows in running.items() if h not in sch]
        rels.append(Relation((h,), [(v,) for v in values]))
        heavy[h] = QueryInstance(q.domains, tuple(rels))
        for sch in incident:
            pos = sch.index(h)
            running[sch] = {row for row in running[sch] if row[pos] not in values}
    light = QueryInstance(q.domains, tuple(Relation(sch, rows) for sch, rows in running.items()))
    return HeavyLightSplit(light, heavy, threshold)


def heavy_light_containment(q: QueryInstance, split: HeavyLightSplit) -> bool:
    """Whether every join tuple of q appears in the light join or in some heavy join."""
    union = set(naive_join(split.light).rows)
    for qh in split.heavy.values():
        union |= set(naive_join(qh).rows)
    return set(naive_join(q).rows) <= union
