"""Join covers and packings.

A cover of a join J at distance delta is a subset U of J such that every
tuple of J is within Hamming distance delta - 1 of some tuple in U.  A
packing is a subset with pairwise distances at least delta; a maximal packing
is a cover.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from .core import QueryInstance, Relation, first_tuple, generic_join, projected_query
from .lpbounds import LimitError

Row = tuple[int, ...]
BcqOracle = Callable[[QueryInstance], bool]

ROLES = ("COVER", "PACKING", "BOTH")
METHODS = ("GREEDY", "EXACT", "ALG_B", "GIVEN")
EXACT_LIMIT = 24


@dataclass(frozen=True)
class CoverResult:
    tuples: tuple[Row, ...]
    delta: int
    role: str
    method: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        object.__setattr__(self, "tuples", tuple(sorted(tuple(int(x) for x in t) for t in self.tuples)))

    @property
    def size(self) -> int:
        return len(self.tuples)

    def to_json(self, q: QueryInstance | None = None) -> dict[str, Any]:
        """Tuples are written as symbols when an instance is given, as domain codes otherwise."""
        rows = [list(q.decode(t)) if q is not None else list(t) for t in self.tuples]
        return {"delta": self.delta, "role": self.role, "method": self.method, "size": self.size, "tuples": rows}

    @classmethod
    def from_json(cls, data: Mapping[str, Any], q: QueryInstance | None = None) -> "CoverResult":
        try:
            rows = data["tuples"]
            if q is not None:
                rows = [q.encode_row([str(s) for s in t]) for t in rows]
            res = cls(tuple(tuple(t) for t in rows), int(data["delta"]), data.get("role", "COVER"), data.get("method", "GIVEN"))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed cover JSON: {exc}") from exc
        if "size" in data and int(data["size"]) != res.size:
            raise ValueError("size does not match the number of tuples")
        return res


def _rows(J: Relation | Iterable[Sequence[int]]) -> list[Row]:
    rows = J.rows if isinstance(J, Relation) else J
    return sorted({tuple(int(x) for x in t) for t in rows})


def _close_masks(rows: list[Row], delta: int) -> list[int]:
    """Bitmask per row of the rows at distance < delta (itself included)."""
    if not rows:
        return []
    w = np.array(rows, dtype=np.int64)
    masks = []
    for i in range(0, len(rows), 256):
        close = (w[i : i + 256, None, :] != w[None, :, :]).sum(axis=2) < delta
        packed = np.packbits(close, axis=1, bitorder="little")
        masks += [int.from_bytes(r.tobytes(), "little") for r in packed]
    return masks


# oracles and restriction

def bcq(q: QueryInstance) -> bool:
    """Whether the join is non-empty."""
    return first_tuple(q) is not None


def restrict_instance(q: QueryInstance, p: Mapping[int, int]) -> QueryInstance:
    """Keep in every relation only the rows agreeing with the partial tuple p (attribute -> code)."""
    rels = []
    for r in q.relations:
        fixed = [(i, p[a]) for i, a in enumerate(r.schema) if a in p]
        rows = r.rows if not fixed else [t for t in r.rows if all(t[i] == v for i, v in fixed)]
        rels.append(Relation(r.schema, rows))
    return QueryInstance(q.domains, tuple(rels), q.N)


# verification

def verify_cover(J: Relation | Iterable[Sequence[int]], result: CoverResult | Iterable[Sequence[int]], delta: int) -> bool:
    """Every tuple of J is within distance delta - 1 of some chosen tuple, and the chosen tuples lie in J."""
    rows = _rows(J)
    chosen = _rows(result.tuples if isinstance(result, CoverResult) else result)
    if not set(chosen) <= set(rows):
        return False
    if not rows:
        return True
    if not chosen:
        return False
    w, c = np.array(rows), np.array(chosen)
    for i in range(0, len(w), 256):
        d = (w[i : i + 256, None, :] != c[None, :, :]).sum(axis=2)
        if (d.min(axis=1) >= delta).any():
            return False
    return True


def verify_packing(result: CoverResult | Iterable[Sequence[int]], delta: int) -> bool:
    """All pairwise distances are at least delta."""
    chosen = _rows(result.tuples if isinstance(result, CoverResult) else result)
    return all(m == 1 << i for i, m in enumerate(_close_masks(chosen, delta)))


def projection_bound(J: Relation | Iterable[Sequence[int]], n: int, delta: int) -> int:
    """min over attribute sets S of size n - delta + 1 of |pi_S(J)|."""
    rows = _rows(J)
    s = n - delta + 1
    return min(len({tuple(t[a] for a in S) for t in rows}) for S in itertools.combinations(range(n), s))


# constructions

def greedy_packing(J: Relation | Iterable[Sequence[int]], delta: int) -> CoverResult:
    """Scan J in sorted order and keep each tuple at distance >= delta from all kept ones."""
    if delta < 1:
        raise ValueError("delta must be at least 1")
    kept: list[Row] = []
    arr = np.zeros((0, 0), dtype=np.int64)
    for t in _rows(J):
        if kept and ((arr != np.array(t)).sum(axis=1) < delta).any():
            continue
        kept.append(t)
        arr = np.array(kept, dtype=np.int64)
    return CoverResult(tuple(kept), delta, "BOTH", "GREEDY")


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _set_cover(universe: int, sets: list[int]) -> list[int]:
    """Indices of a minimum family of ``sets`` covering ``universe`` (bitmasks)."""
    best: list[list[int]] = [list(range(len(sets)))]
    biggest = max((_popcount(s & universe) for s in sets), default=1) or 1

    def rec(left: int, picked: list[int]) -> None:
        if not left:
            if len(picked) < len(best[0]):
                best[0] = picked[:]
            return
        if len(picked) + -(-_popcount(left) // biggest) >= len(best[0]):
            return
        # branch on the uncovered element with the fewest covering sets
        opts = None
        rest = left
        while rest:
            low = rest & -rest
            rest ^= low
            cand = [i for i, s in enumerate(sets) if s & low]
            if opts is None or len(cand) < len(opts):
                opts = cand
                if len(opts) <= 1:
                    break
        opts.sort(key=lambda i: -_popcount(sets[i] & left))
        for i in opts:
            picked.append(i)
            rec(left & ~sets[i], picked)
            picked.pop()

    rec(universe, [])
    return best[0]


def exact_min_cover(J: Relation | Iterable[Sequence[int]], delta: int, limit: int = EXACT_LIMIT) -> CoverResult:
    """Minimum cover with centres in J, by reduction then branch and bound.

    Tuples that only one centre covers force that centre.  The remaining
    kernel must have at most ``limit`` uncovered tuples.
    """
    if delta < 1:
        raise ValueError("delta must be at least 1")
    rows = _rows(J)
    if delta == 1:
        # every ball is a single tuple
        return CoverResult(tuple(rows), delta, "COVER", "EXACT")
    balls = _close_masks(rows, delta)
    full = (1 << len(rows)) - 1
    chosen: set[int] = set()
    covered = 0
    changed = True
    while changed:
        changed = False
        for i in range(len(rows)):
            bit = 1 << i
            if covered & bit:
                continue
            # the centres covering tuple i are exactly its ball (distance is symmetric)
            if _popcount(balls[i]) == 1:
                chosen.add(i)
                covered |= balls[i]
                changed = True
    left = full & ~covered
    if _popcount(left) > limit:
        raise LimitError(f"{_popcount(left)} tuples remain after reduction; exact cover is limited to {limit}, use greedy_packing")
    cands = [i for i in range(len(rows)) if balls[i] & left]
    picked = _set_cover(left, [balls[i] for i in cands])
    chosen |= {cands[i] for i in picked}
    return CoverResult(tuple(rows[i] for i in sorted(chosen)), delta, "COVER", "EXACT")


def exact_max_packing(J: Relation | Iterable[Sequence[int]], delta: int, limit: int = EXACT_LIMIT) -> CoverResult:
    """Maximum packing: an independent set of the graph joining tuples at distance < delta.

    Tuples with at most one conflict are taken greedily first (always safe);
    the rest must number at most ``limit``.
    """
    if delta < 1:
        raise ValueError("delta must be at least 1")
    rows = _rows(J)
    if delta == 1:
        return CoverResult(tuple(rows), delta, "PACKING", "EXACT")
    adj = [m & ~(1 << i) for i, m in enumerate(_close_masks(rows, delta))]
    alive = (1 << len(rows)) - 1
    chosen: list[int] = []
    changed = True
    while changed:
        changed = False
        for i in range(len(rows)):
            if alive >> i & 1 and _popcount(adj[i] & alive) <= 1:
                chosen.append(i)
                alive &= ~(adj[i] | 1 << i)
                changed = True
    if _popcount(alive) > limit:
        raise LimitError(f"{_popcount(alive)} tuples remain after reduction; exact packing is limited to {limit}")
    best: list[list[int]] = [[]]

    def rec(cand: int, picked: list[int]) -> None:
        if len(picked) + _popcount(cand) <= len(best[0]):
            return
        if not cand:
            best[0] = picked[:]
            return
        low = cand & -cand
        v = low.bit_length() - 1
        picked.append(v)
        rec(cand & ~adj[v] & ~low, picked)
        picked.pop()
        rec(cand & ~low, picked)

    rec(alive, [])
    chosen += best[0]
    return CoverResult(tuple(rows[i] for i in sorted(chosen)), delta, "PACKING", "EXACT")


def algorithm_B(q: QueryInstance, delta: int, S: Iterable[int], oracle: BcqOracle = bcq) -> CoverResult:
    """Cover from the projected join on S, extended one attribute at a time by emptiness tests.

    Each partial tuple keeps the first value of the next attribute (in
    ascending order) for which the restricted instance is non-empty, so the
    result has at most one tuple per S-projection of the join.
    """
    S = sorted(set(S))
    if len(S) != q.n - delta + 1:
        raise ValueError(f"|S| must be n - delta + 1 = {q.n - delta + 1}")
    parents = [dict(zip(S, t)) for t in generic_join(projected_query(q, S)).rows]
    for v in (a for a in range(q.n) if a not in S):
        survivors = []
        for p in parents:
            for val in range(len(q.domains[v])):
                ext = {**p, v: val}
                if oracle(restrict_instance(q, ext)):
                    survivors.append(ext)
                    break
        parents = survivors
    return CoverResult(tuple(tuple(p[a] for a in range(q.n)) for p in parents), delta, "COVER", "ALG_B")
