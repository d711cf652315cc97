"""Relations, join queries and the Hamming metric on join tuples.

Attributes are the integers ``0..n-1``.  Every attribute has an ordered
domain of symbols; internally a value is stored as its index in that domain
(its *code*), so relations are plain sorted tuples of small integers.

A query instance is a hypergraph whose edges are attribute sets, with one
relation per edge.  Edges over the same attribute set are merged by
intersecting their relations, which leaves the join unchanged.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Union

Symbol = Union[str, int]
Row = tuple[int, ...]


@dataclass(frozen=True)
class Hypergraph:
    """Vertices ``0..n-1`` and a set of non-empty edges.

    Edges are stored as sorted tuples of distinct vertices, so a self-loop on
    ``v`` is the unary edge ``(v,)``.  Duplicate edges are dropped.
    """

    n: int
    edges: tuple[tuple[int, ...], ...]

    def __init__(self, n: int, edges: Iterable[Iterable[int]]):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        norm = set()
        for e in edges:
            t = tuple(sorted(set(int(v) for v in e)))
            if not t:
                raise ValueError("empty edge")
            if t[0] < 0 or t[-1] >= n:
                raise ValueError(f"edge {t} has an endpoint outside [0, {n})")
            norm.add(t)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @property
    def is_graph(self) -> bool:
        return all(len(e) <= 2 for e in self.edges)

    def incident(self, v: int) -> list[int]:
        """Indices of the edges containing ``v``."""
        return [i for i, e in enumerate(self.edges) if v in e]

    def neighbours(self, v: int) -> set[int]:
        out = set()
        for e in self.edges:
            if v in e:
                out.update(e)
        out.discard(v)
        return out

    def covered(self) -> set[int]:
        return {v for e in self.edges for v in e}

    def induced(self, vertices: Iterable[int]) -> "Hypergraph":
        """Sub-hypergraph on the same vertex ids, keeping edges inside ``vertices``."""
        keep = set(vertices)
        return Hypergraph(self.n, [e for e in self.edges if set(e) <= keep])

    def components(self, vertices: Iterable[int] | None = None) -> list[list[int]]:
        """Connected components (ignoring loops), each sorted, ordered by smallest vertex."""
        verts = sorted(set(range(self.n) if vertices is None else vertices))
        allowed = set(verts)
        adj: dict[int, set[int]] = {v: set() for v in verts}
        for e in self.edges:
            if len(e) > 1 and set(e) <= allowed:
                for u in e:
                    adj[u].update(x for x in e if x != u)
        seen: set[int] = set()
        comps = []
        for v in verts:
            if v in seen:
                continue
            stack, comp = [v], []
            seen.add(v)
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def to_json(self) -> dict[str, Any]:
        return {"n": self.n, "edges": [list(e) if len(e) > 1 else [e[0], e[0]] for e in self.edges]}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Hypergraph":
        try:
            return cls(int(data["n"]), data["edges"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed graph JSON: {exc}") from exc


def cycle(n: int) -> Hypergraph:
    return Hypergraph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Hypergraph:
    return Hypergraph(n, [(i, i + 1) for i in range(n - 1)])


@dataclass(frozen=True)
class Relation:
    """A set of rows over an ordered attribute schema."""

    schema: tuple[int, ...]
    rows: tuple[Row, ...]

    def __init__(self, schema: Iterable[int], rows: Iterable[Sequence[int]]):
        schema = tuple(schema)
        if len(set(schema)) != len(schema):
            raise ValueError(f"repeated attribute in schema {schema}")
        perm = sorted(range(len(schema)), key=schema.__getitem__)
        body = set()
        for r in rows:
            if len(r) != len(schema):
                raise ValueError(f"row {tuple(r)} does not match schema {schema}")
            body.add(tuple(int(r[i]) for i in perm))
        object.__setattr__(self, "schema", tuple(schema[i] for i in perm))
        object.__setattr__(self, "rows", tuple(sorted(body)))

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[Row]:
        return iter(self.rows)

    def __contains__(self, row: object) -> bool:
        return row in self._index

    @property
    def _index(self) -> frozenset[Row]:
        cached = self.__dict__.get("_idx")
        if cached is None:
            cached = frozenset(self.rows)
            object.__setattr__(self, "_idx", cached)
        return cached


def hamming_dist(t1: Sequence[Any] | Mapping[int, Any], t2: Sequence[Any] | Mapping[int, Any]) -> int:
    """Number of attributes on which two tuples disagree."""
    if isinstance(t1, Mapping) or isinstance(t2, Mapping):
        if not (isinstance(t1, Mapping) and isinstance(t2, Mapping)) or t1.keys() != t2.keys():
            raise ValueError("tuples are over different attribute sets")
        return sum(t1[a] != t2[a] for a in t1)
    if len(t1) != len(t2):
        raise ValueError(f"tuples of length {len(t1)} and {len(t2)} are not comparable")
    return sum(a != b for a, b in zip(t1, t2))


def project(r: Relation, attrs: Iterable[int]) -> Relation:
    attrs = sorted(set(attrs))
    pos = {a: i for i, a in enumerate(r.schema)}
    missing = [a for a in attrs if a not in pos]
    if missing:
        raise ValueError(f"attributes {missing} not in schema {r.schema}")
    idx = [pos[a] for a in attrs]
    return Relation(attrs, {tuple(row[i] for i in idx) for row in r.rows})


@dataclass(frozen=True)
class QueryInstance:
    """Domains, edges and one relation per edge, with an optional size bound ``N``.

    Values inside ``relations`` are domain codes.  Use :meth:`from_symbols` to
    build an instance from symbol rows.
    """

    domains: tuple[tuple[Symbol, ...], ...]
    relations: tuple[Relation, ...]
    N: int | None = None
    _codes: tuple[dict, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        doms = tuple(tuple(d) for d in self.domains)
        for a, d in enumerate(doms):
            if not d:
                raise ValueError(f"attribute {a} has an empty domain")
            if len(set(d)) != len(d):
                raise ValueError(f"attribute {a} has duplicate domain values")
        merged: dict[tuple[int, ...], set[Row]] = {}
        for rel in self.relations:
            if not rel.schema:
                raise ValueError("relation with empty schema")
            for a in rel.schema:
                if not 0 <= a < len(doms):
                    raise ValueError(f"attribute {a} outside [0, {len(doms)})")
            rows = set(rel.rows)
            for row in rows:
                for a, c in zip(rel.schema, row):
                    if not 0 <= c < len(doms[a]):
                        raise ValueError(f"code {c} outside the domain of attribute {a}")
            if rel.schema in merged:
                merged[rel.schema] &= rows
            else:
                merged[rel.schema] = rows
        rels = tuple(Relation(s, merged[s]) for s in sorted(merged))
        if self.N is not None:
            if self.N < 1:
                raise ValueError("N must be positive")
            for rel in rels:
                if len(rel) > self.N:
                    raise ValueError(f"relation on {rel.schema} has {len(rel)} > N={self.N} rows")
        object.__setattr__(self, "domains", doms)
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "_codes", tuple({s: i for i, s in enumerate(d)} for d in doms))

    @property
    def n(self) -> int:
        return len(self.domains)

    @property
    def edges(self) -> tuple[tuple[int, ...], ...]:
        return tuple(r.schema for r in self.relations)

    @property
    def hypergraph(self) -> Hypergraph:
        return Hypergraph(self.n, self.edges)

    def relation(self, edge: Iterable[int]) -> Relation:
        key = tuple(sorted(edge))
        for r in self.relations:
            if r.schema == key:
                return r
        raise KeyError(key)

    def encode(self, attr: int, symbol: Symbol) -> int:
        """Code of ``symbol``; unknown symbols map to ``len(domain)``, which no row uses."""
        return self._codes[attr].get(symbol, len(self.domains[attr]))

    def decode(self, row: Sequence[int], schema: Sequence[int] | None = None) -> tuple[Symbol, ...]:
        schema = range(self.n) if schema is None else schema
        return tuple(self.domains[a][c] for a, c in zip(schema, row))

    def encode_row(self, row: Sequence[Symbol], schema: Sequence[int] | None = None) -> Row:
        schema = range(self.n) if schema is None else schema
        return tuple(self.encode(a, s) for a, s in zip(schema, row))

    @classmethod
    def from_symbols(
        cls,
        domains: Sequence[Sequence[Symbol]],
        edges: Sequence[Sequence[int]],
        relations: Sequence[Iterable[Sequence[Symbol]]],
        N: int | None = None,
    ) -> "QueryInstance":
        if len(edges) != len(relations):
            raise ValueError("need exactly one relation per edge")
        codes = [{s: i for i, s in enumerate(d)} for d in domains]
        rels = []
        for e, rows in zip(edges, relations):
            e = [int(a) for a in e]
            if len(set(e)) == 1 and len(e) > 1:
                # [v, v] encodes a self-loop
                rows = [(r[0],) for r in rows]
                e = e[:1]
            enc = []
            for r in rows:
                if len(r) != len(e):
                    raise ValueError(f"row {list(r)} does not match edge {e}")
                try:
                    enc.append(tuple(codes[a][s] for a, s in zip(e, r)))
                except KeyError as exc:
                    raise ValueError(f"symbol {exc} not in the domain") from exc
                except IndexError as exc:
                    raise ValueError(f"edge {e} names an unknown attribute") from exc
            rels.append(Relation(e, enc))
        return cls(tuple(tuple(d) for d in domains), tuple(rels), N)

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "domains": [[str(s) for s in d] for d in self.domains],
            "edges": [list(r.schema) for r in self.relations],
            "relations": [[[str(s) for s in self.decode(row, r.schema)] for row in r.rows] for r in self.relations],
            "N": self.N,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "QueryInstance":
        try:
            domains = [[str(s) for s in d] for d in data["domains"]]
            if "n" in data and int(data["n"]) != len(domains):
                raise ValueError("n does not match the number of domains")
            rels = [[[str(s) for s in row] for row in rel] for rel in data["relations"]]
            return cls.from_symbols(domains, data["edges"], rels, data.get("N"))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed instance JSON: {exc}") from exc


def load_instance(path_or_file: Any) -> QueryInstance:
    if hasattr(path_or_file, "read"):
        return QueryInstance.from_json(json.load(path_or_file))
    with open(path_or_file, encoding="utf-8") as fh:
        return QueryInstance.from_json(json.load(fh))


def example_instance() -> QueryInstance:
    """The conference/year/continent/country 4-cycle shipped with the package."""
    text = resources.files("joincover").joinpath("data/example1.json").read_text(encoding="utf-8")
    return QueryInstance.from_json(json.loads(text))


def example_cover() -> list[tuple[str, ...]]:
    text = resources.files("joincover").joinpath("data/example1_cover.json").read_text(encoding="utf-8")
    return [tuple(t) for t in json.loads(text)["tuples"]]


# joins

def naive_join(q: QueryInstance) -> Relation:
    """Join by successive pairwise hash joins, then a product over uncovered attributes."""
    schema: list[int] = []
    rows: list[Row] = [()]
    for rel in q.relations:
        if not rows:
            break
        shared = [a for a in rel.schema if a in schema]
        fresh = [i for i, a in enumerate(rel.schema) if a not in schema]
        left_pos = [schema.index(a) for a in shared]
        right_pos = [rel.schema.index(a) for a in shared]
        buckets: dict[Row, list[Row]] = {}
        for r in rel.rows:
            buckets.setdefault(tuple(r[i] for i in right_pos), []).append(tuple(r[i] for i in fresh))
        rows = [
            lrow + ext
            for lrow in rows
            for ext in buckets.get(tuple(lrow[i] for i in left_pos), ())
        ]
        schema += [rel.schema[i] for i in fresh]
    for a in range(q.n):
        if a not in schema:
            rows = [r + (c,) for r in rows for c in range(len(q.domains[a]))]
            schema.append(a)
    return Relation(schema, rows)


def _iter_generic(q: QueryInstance, order: Sequence[int]) -> Iterator[Row]:
    rank = {a: i for i, a in enumerate(order)}
    tries = []
    for rel in q.relations:
        attrs = sorted(rel.schema, key=rank.__getitem__)
        cols = [rel.schema.index(a) for a in attrs]
        root: dict = {}
        for r in rel.rows:
            node = root
            for c in cols:
                node = node.setdefault(r[c], {})
        tries.append((attrs, root))
    if any(not root for _, root in tries):
        return
    # attribute depth -> indices of relations whose next level is that attribute
    at: list[list[int]] = [[] for _ in order]
    for i, (attrs, _) in enumerate(tries):
        for a in attrs:
            at[rank[a]].append(i)
    nodes = [root for _, root in tries]
    values = [0] * len(order)

    def rec(depth: int) -> Iterator[tuple[int, ...]]:
        if depth == len(order):
            yield tuple(values)
            return
        rels = at[depth]
        if rels:
            levels = sorted((nodes[i] for i in rels), key=len)
            cands = [v for v in levels[0] if all(v in lv for lv in levels[1:])]
        else:
            cands = range(len(q.domains[order[depth]]))
        saved = [nodes[i] for i in rels]
        for v in sorted(cands):
            for i, node in zip(rels, saved):
                nodes[i] = node[v]
            values[depth] = v
            yield from rec(depth + 1)
        for i, node in zip(rels, saved):
            nodes[i] = node

    inverse = sorted(range(len(order)), key=order.__getitem__)
    for vals in rec(0):
        yield tuple(vals[i] for i in inverse)


def generic_join(q: QueryInstance, order: Sequence[int] | None = None) -> Relation:
    """Attribute-at-a-time join intersecting candidate values across all relations on the attribute."""
    order = list(range(q.n)) if order is None else list(order)
    if sorted(order) != list(range(q.n)):
        raise ValueError("order must be a permutation of the attributes")
    return Relation(range(q.n), _iter_generic(q, order))


def first_tuple(q: QueryInstance) -> Row | None:
    """Some join tuple, or None when the join is empty; stops at the first hit."""
    return next(_iter_generic(q, list(range(q.n))), None)


def projected_query(q: QueryInstance, S: Iterable[int]) -> QueryInstance:
    """The query induced on ``S``.

    Attribute ``i`` of the result stands for ``sorted(S)[i]``.  Each edge is cut
    down to its part inside ``S`` and its relation projected accordingly.
    """
    S = sorted(set(S))
    if not S:
        raise ValueError("S must be non-empty")
    if S[0] < 0 or S[-1] >= q.n:
        raise ValueError("S must be a subset of the attributes")
    new = {a: i for i, a in enumerate(S)}
    rels = []
    for rel in q.relations:
        keep = [a for a in rel.schema if a in new]
        if keep:
            p = project(rel, keep)
            rels.append(Relation([new[a] for a in p.schema], p.rows))
    return QueryInstance(tuple(q.domains[a] for a in S), tuple(rels), q.N)


def project_rows(rows: Iterable[Sequence[int]], attrs: Sequence[int]) -> set[Row]:
    return {tuple(r[a] for a in attrs) for r in rows}


def subsets(n: int, k: int) -> Iterator[tuple[int, ...]]:
    return itertools.combinations(range(n), k)
