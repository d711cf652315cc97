"""Matchings and the core/star/singleton decomposition of a graph.

Graphs are :class:`~joincover.core.Hypergraph` objects whose edges have
arity at most two; a unary edge is a self-loop.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .core import Hypergraph
from .lpbounds import HALF, frac_str, optimal_barrier_duals

Edge = tuple[int, int]


def _check_graph(g: Hypergraph) -> None:
    if not g.is_graph:
        raise ValueError("needs a graph (edges of arity at most 2)")


def _pairs(g: Hypergraph) -> list[Edge]:
    return [e for e in g.edges if len(e) == 2]


def _blossom_matching(n: int, edges: Iterable[Edge]) -> list[int]:
    """Mate array of a maximum-cardinality matching (augmenting paths, blossom contraction)."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    for a in adj:
        a.sort()
    match = [-1] * n

    def find_path(root: int) -> tuple[int, list[int]]:
        used = [False] * n
        parent = [-1] * n
        base = list(range(n))
        used[root] = True
        queue = [root]

        def lca(a: int, b: int) -> int:
            seen = [False] * n
            while True:
                a = base[a]
                seen[a] = True
                if match[a] == -1:
                    break
                a = parent[match[a]]
            while True:
                b = base[b]
                if seen[b]:
                    return b
                b = parent[match[b]]

        def mark(v: int, b: int, child: int, blossom: list[bool]) -> None:
            while base[v] != b:
                blossom[base[v]] = blossom[base[match[v]]] = True
                parent[v] = child
                child = match[v]
                v = parent[match[v]]

        qi = 0
        while qi < len(queue):
            v = queue[qi]
            qi += 1
            for to in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and parent[match[to]] != -1):
                    # odd cycle: contract it into its base
                    b = lca(v, to)
                    blossom = [False] * n
                    mark(v, b, to, blossom)
                    mark(to, b, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = b
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if match[to] == -1:
                        return to, parent
                    used[match[to]] = True
                    queue.append(match[to])
        return -1, parent

    for root in range(n):
        if match[root] != -1:
            continue
        v, parent = find_path(root)
        while v != -1:
            pv = parent[v]
            ppv = match[pv]
            match[v], match[pv] = pv, v
            v = ppv
    return match


def matching_number(g: Hypergraph, removed: Iterable[int] = ()) -> int:
    removed = set(removed)
    edges = [(u, v) for u, v in _pairs(g) if u not in removed and v not in removed]
    return sum(m != -1 for m in _blossom_matching(g.n, edges)) // 2


@dataclass(frozen=True)
class Matching:
    edges: tuple[Edge, ...]

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for e in self.edges for v in e)

    def __len__(self) -> int:
        # matched-vertex count, the size convention of the case table
        return 2 * len(self.edges)


def maximum_matching(g: Hypergraph) -> Matching:
    """The lexicographically smallest maximum-cardinality matching.

    Edges are scanned in sorted order and an edge is kept when the rest of the
    graph still has a matching completing it to maximum size.
    """
    _check_graph(g)
    pairs = _pairs(g)
    target = matching_number(g)
    removed: set[int] = set()
    chosen = []
    for u, v in pairs:
        if target == 0:
            break
        if u in removed or v in removed:
            continue
        rest = [(a, b) for a, b in pairs if not {a, b} & (removed | {u, v})]
        if sum(m != -1 for m in _blossom_matching(g.n, rest)) // 2 == target - 1:
            chosen.append((u, v))
            removed |= {u, v}
            target -= 1
    return Matching(tuple(chosen))


def is_disedge(g: Hypergraph) -> bool:
    """True iff every component, ignoring loops, has at most two vertices."""
    _check_graph(g)
    return all(len(c) <= 2 for c in g.components())


@dataclass(frozen=True)
class Star:
    center: int
    leaves: tuple[int, ...]

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted((self.center,) + self.leaves))


@dataclass(frozen=True)
class Decomposition:
    """Core (dual value 1/2), stars (centre 0, leaves 1) and singletons (1, loops only)."""

    graph: Hypergraph
    y: tuple[Fraction, ...]
    core: tuple[int, ...]
    stars: tuple[Star, ...]
    singletons: tuple[int, ...]
    matching: Matching
    n_I: int

    @property
    def star_vertices(self) -> tuple[int, ...]:
        return tuple(sorted(v for s in self.stars for v in s.vertices))

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.graph.n,
            "y": [frac_str(v) for v in self.y],
            "core": list(self.core),
            "stars": [{"center": s.center, "leaves": list(s.leaves)} for s in self.stars],
            "singletons": list(self.singletons),
            "matching": [list(e) for e in self.matching.edges],
            "matched_vertices": len(self.matching),
            "n_I": self.n_I,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any], graph: Hypergraph) -> "Decomposition":
        try:
            return cls(
                graph,
                tuple(Fraction(v) for v in data["y"]),
                tuple(data["core"]),
                tuple(Star(s["center"], tuple(s["leaves"])) for s in data["stars"]),
                tuple(data["singletons"]),
                Matching(tuple(tuple(e) for e in data["matching"])),
                int(data["n_I"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed decomposition JSON: {exc}") from exc


def _star_shaped(g: Hypergraph, y: Sequence[Fraction]) -> bool:
    # 0-vertices pairwise non-adjacent and every non-isolated 1-vertex has a unique neighbour
    for u, v in _pairs(g):
        if y[u] == 0 and y[v] == 0:
            return False
    for v in range(g.n):
        if y[v] == 1 and len(g.neighbours(v)) > 1:
            return False
    return True


def _stars_from_dual(g: Hypergraph, y: Sequence[Fraction]) -> tuple[list[Star], list[int]]:
    zeros = [v for v in range(g.n) if y[v] == 0]
    ones = [v for v in range(g.n) if y[v] == 1]
    # each 0-vertex gets a private 1-neighbour (Hall holds at an optimum)
    bip = [(u, v) for u, v in _pairs(g) if {y[u], y[v]} == {0, 1}]
    mate = _blossom_matching(g.n, bip)
    if any(mate[z] == -1 for z in zeros):
        raise ValueError("dual is not optimal: a zero vertex has no private one-neighbour")
    leaves: dict[int, list[int]] = {z: [mate[z]] for z in zeros}
    singles = []
    for v in ones:
        if mate[v] != -1:
            continue
        centres = sorted(u for u in g.neighbours(v) if y[u] == 0)
        if centres:
            leaves[centres[0]].append(v)
        else:
            singles.append(v)
    stars = [Star(z, tuple(sorted(leaves[z]))) for z in zeros]
    return stars, singles


def decompose(g: Hypergraph) -> Decomposition:
    """Split ``g`` by an optimal half-integral packing dual.

    Among all optimal half-integral duals the one used has the fewest 1/2
    values among those whose 0/1 part is a disjoint union of induced stars;
    if no dual has that shape, the fewest 1/2 values overall.  Ties go to the
    smallest zero set.  The matching is a maximum matching of the core plus
    one of the star part, which is maximum for the whole graph.
    """
    _check_graph(g)
    cands = optimal_barrier_duals(g)
    cands.sort(key=lambda y: (not _star_shaped(g, y), sum(v == HALF for v in y)))
    nu = matching_number(g)
    for y in cands:
        core = tuple(v for v in range(g.n) if y[v] == HALF)
        stars, singles = _stars_from_dual(g, y)
        svert = [v for s in stars for v in s.vertices]
        m_c = maximum_matching(g.induced(core))
        m_s = maximum_matching(g.induced(svert))
        if len(m_c.edges) + len(m_s.edges) != nu:
            continue
        M = Matching(tuple(sorted(m_c.edges + m_s.edges)))
        n_I = len(set(core) - M.vertices)
        return Decomposition(g, tuple(y), core, tuple(stars), tuple(sorted(singles)), M, n_I)
    raise RuntimeError("no optimal dual yields a maximum matching split")


def matching_split(d: Decomposition) -> tuple[Matching, Matching]:
    """Matching edges inside the core and inside the star part."""
    core, star = set(d.core), set(d.star_vertices)
    m_c, m_s = [], []
    for e in d.matching.edges:
        if set(e) <= core:
            m_c.append(e)
        elif set(e) <= star:
            m_s.append(e)
        else:
            raise ValueError(f"matching edge {e} crosses the decomposition")
    g = d.graph
    if len(m_c) != matching_number(g.induced(core)) or len(m_s) != matching_number(g.induced(star)):
        raise ValueError("matching is not maximum on its part")
    return Matching(tuple(m_c)), Matching(tuple(m_s))
