"""Reed-Solomon and CRT codebooks, and query instances built from them.

Field arithmetic is over prime fields only.  A :class:`Codebook` keeps its
generator (linear codes) or moduli (CRT codes) and enumerates codewords on
demand, so large codes can be described without being materialised.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .core import Hypergraph, QueryInstance, Relation, _iter_generic
from .graphs import decompose, is_disedge, maximum_matching
from .lpbounds import LimitError
from .pick import classify_case

ENUM_LIMIT = 2_000_000
PAIRWISE_LIMIT = 4096


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    return all(p % d for d in range(3, math.isqrt(p) + 1, 2))


def largest_prime_at_most(x: int) -> int:
    for p in range(int(x), 1, -1):
        if is_prime(p):
            return p
    raise ValueError(f"no prime <= {x}")


def next_prime(x: int) -> int:
    p = max(2, int(x))
    while not is_prime(p):
        p += 1
    return p


class Codebook:
    """A length-n code with per-coordinate alphabet sizes and a designed distance.

    Exactly one of ``words``, ``generator`` (k x n over F_q) or ``moduli``
    (with ``k``) describes the codewords.
    """

    def __init__(
        self,
        alphabet_sizes: Sequence[int],
        designed_distance: int,
        words: np.ndarray | Sequence[Sequence[int]] | None = None,
        generator: np.ndarray | None = None,
        moduli: Sequence[int] | None = None,
        k: int | None = None,
        eval_points: Sequence[int] | None = None,
    ):
        self.alphabet_sizes = tuple(int(a) for a in alphabet_sizes)
        self.n = len(self.alphabet_sizes)
        self.designed_distance = int(designed_distance)
        self.generator = None if generator is None else np.asarray(generator, dtype=np.int64)
        self.moduli = None if moduli is None else tuple(int(m) for m in moduli)
        self.k = k
        self.eval_points = None if eval_points is None else tuple(eval_points)
        self._words = None
        if words is not None:
            w = np.asarray(words, dtype=np.int64).reshape(-1, self.n)
            if w.size and ((w < 0) | (w >= np.array(self.alphabet_sizes))).any():
                raise ValueError("codeword symbol outside its alphabet")
            self._words = w
        if (self._words is None) + (self.generator is None) + (self.moduli is None) != 2:
            raise ValueError("give exactly one of words, generator, moduli")
        if self.generator is not None:
            self.k = self.generator.shape[0]

    @property
    def q(self) -> int | None:
        return self.alphabet_sizes[0] if self.generator is not None else None

    @property
    def is_linear(self) -> bool:
        return self.generator is not None

    @property
    def size(self) -> int:
        if self._words is not None:
            return len(self._words)
        if self.generator is not None:
            return self.q ** self.k
        return math.prod(sorted(self.moduli)[: self.k])

    def __len__(self) -> int:
        return self.size

    @property
    def words(self) -> np.ndarray:
        """All codewords as an (M, n) array, messages in lexicographic order."""
        if self._words is None:
            if self.size > ENUM_LIMIT:
                raise LimitError(f"code has {self.size} words, above the enumeration limit {ENUM_LIMIT}")
            if self.generator is not None:
                msgs = np.array(list(itertools.product(range(self.q), repeat=self.k)), dtype=np.int64)
                self._words = msgs.reshape(-1, self.k) @ self.generator % self.q
            else:
                m = np.arange(self.size, dtype=np.int64)[:, None]
                self._words = m % np.array(self.moduli, dtype=np.int64)
        return self._words

    @property
    def codewords(self) -> set[tuple[int, ...]]:
        return {tuple(int(x) for x in w) for w in self.words}

    def permuted(self, perm: Sequence[int]) -> "Codebook":
        """Coordinate ``i`` of the result is coordinate ``perm[i]`` of this code."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            raise ValueError("not a permutation")
        sizes = [self.alphabet_sizes[p] for p in perm]
        if self.generator is not None:
            pts = None if self.eval_points is None else [self.eval_points[p] for p in perm]
            return Codebook(sizes, self.designed_distance, generator=self.generator[:, perm], eval_points=pts)
        if self.moduli is not None:
            return Codebook(sizes, self.designed_distance, moduli=[self.moduli[p] for p in perm], k=self.k)
        return Codebook(sizes, self.designed_distance, words=self.words[:, perm])

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "alphabets": list(self.alphabet_sizes),
            "codewords": sorted([int(x) for x in w] for w in self.words),
            "delta": self.designed_distance,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Codebook":
        try:
            sizes = [int(a) for a in data["alphabets"]]
            if "n" in data and int(data["n"]) != len(sizes):
                raise ValueError("n does not match the alphabets")
            return cls(sizes, int(data["delta"]), words=data["codewords"] or np.zeros((0, len(sizes))))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed codebook JSON: {exc}") from exc


def rs_codebook(q: int, n: int, delta: int, eval_points: Sequence[int] | None = None) -> Codebook:
    """Evaluations of all polynomials of degree at most n - delta at n distinct points of F_q.

    The point ``q`` stands for infinity (the leading coefficient), which
    allows length q + 1 while keeping distance exactly delta.
    """
    if not is_prime(q):
        raise ValueError(f"q={q} is not prime")
    if not 1 <= n <= q + 1:
        raise ValueError(f"need 1 <= n <= q + 1, got n={n}, q={q}")
    if not 1 <= delta <= n:
        raise ValueError(f"need 1 <= delta <= n, got delta={delta}")
    pts = list(range(n)) if eval_points is None else [int(a) for a in eval_points]
    if n == q + 1 and eval_points is None:
        pts[-1] = q
    if len(pts) != n or len(set(pts)) != n or not all(0 <= a <= q for a in pts):
        raise ValueError("need n distinct evaluation points in F_q or infinity")
    k = n - delta + 1
    gen = np.array([[int(i == k - 1) if a == q else pow(a, i, q) for a in pts] for i in range(k)], dtype=np.int64)
    return Codebook([q] * n, delta, generator=gen, eval_points=pts)


def rs_extend(c: Codebook, t: int) -> Codebook:
    """Add t evaluation points to an RS code: length and distance grow by t, size is unchanged."""
    if c.eval_points is None:
        raise ValueError("only RS codebooks can be extended")
    if t < 0:
        raise ValueError("t must be non-negative")
    q = c.q
    if q < c.n + t:
        raise ValueError(f"q={q} is too small for {c.n + t} evaluation points")
    extra = [a for a in range(q) if a not in c.eval_points][:t]
    return rs_codebook(q, c.n + t, c.designed_distance + t, list(c.eval_points) + extra)


def crt_encode(m: int, primes: Sequence[int]) -> tuple[int, ...]:
    return tuple(m % p for p in primes)


def crt_codebook(primes: Sequence[int], k: int) -> Codebook:
    """Residue vectors of 0 <= m < q_1 * ... * q_k modulo every prime."""
    primes = [int(p) for p in primes]
    if not primes or any(not is_prime(p) for p in primes):
        raise ValueError("moduli must be primes")
    if any(a >= b for a, b in zip(primes, primes[1:])):
        raise ValueError("moduli must be strictly increasing")
    if not 1 <= k <= len(primes):
        raise ValueError(f"need 1 <= k <= {len(primes)}")
    return Codebook(primes, len(primes) - k + 1, moduli=primes, k=k)


@dataclass(frozen=True)
class DisedgeConstructionParams:
    n_s: int
    n_t: int
    delta_s: int

    def __post_init__(self):
        if self.n_s % 2 or self.n_s < 2:
            raise ValueError("n_s must be a positive even count")
        if self.delta_s <= 0 or self.delta_s % 2:
            raise ValueError(f"delta_s={self.delta_s} must be positive and even")

    @classmethod
    def from_graph(cls, g: Hypergraph, delta: int) -> "DisedgeConstructionParams":
        if not is_disedge(g):
            raise ValueError("graph is not a disedge")
        n_s = 2 * len(maximum_matching(g).edges)
        s = g.n - delta + 1
        return cls(n_s, g.n - n_s, n_s + 1 - s)

    @property
    def base_length(self) -> int:
        return self.n_s // 2 + self.n_t

    @property
    def base_distance(self) -> int:
        return self.delta_s // 2 + self.n_t


def duplicated_code(c: Codebook, params: DisedgeConstructionParams) -> Codebook:
    """Repeat each of the first n_s/2 coordinates twice; the n_t trailing coordinates stay single.

    Output layout is ``[m_0, m_0, m_1, m_1, ..., t_0, t_1, ...]``.
    """
    if c.n != params.base_length:
        raise ValueError(f"base code has length {c.n}, expected {params.base_length}")
    half = params.n_s // 2
    cols = [i for i in range(half) for _ in (0, 1)] + list(range(half, c.n))
    sizes = [c.alphabet_sizes[i] for i in cols]
    dist = params.delta_s + params.n_t
    if c.generator is not None:
        return Codebook(sizes, dist, generator=c.generator[:, cols])
    return Codebook(sizes, dist, words=c.words[:, cols])


def _rank_mod(rows: list[list[int]], q: int) -> int:
    a = [r[:] for r in rows]
    rank, ncols = 0, len(a[0]) if a else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(a)) if a[i][col] % q), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][col], -1, q)
        a[rank] = [x * inv % q for x in a[rank]]
        for i in range(len(a)):
            if i != rank and a[i][col] % q:
                f = a[i][col]
                a[i] = [(x - f * y) % q for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def _distance_pairwise(w: np.ndarray) -> int:
    m = len(w)
    best = w.shape[1]
    for i in range(0, m - 1, 64):
        block = w[i : i + 64]
        d = (block[:, None, :] != w[None, :, :]).sum(axis=2)
        for a in range(len(block)):
            d[a, : i + a + 1] = best
        best = min(best, int(d.min()))
    return best


def _distance_weight(c: Codebook) -> int:
    w = c.words
    wt = (w != 0).sum(axis=1)
    nz = wt[wt > 0]
    # a collision between two messages shows up as a zero-weight nonzero message
    return 0 if len(nz) < len(w) - 1 else int(nz.min())


def _distance_rank(c: Codebook) -> int:
    # d = n - (largest coordinate set on which some nonzero message vanishes)
    q, k, n = c.q, c.k, c.n
    g = c.generator.tolist()
    if _rank_mod(g, q) < k:
        return 0
    largest = k - 1
    for m in range(k, n + 1):
        if not any(_rank_mod([[row[j] for j in T] for row in g], q) < k for T in itertools.combinations(range(n), m)):
            break
        largest = m
    return n - largest


def _distance_difference(c: Codebook) -> int:
    # words m1 < m2 differ exactly at the moduli not dividing m2 - m1
    if c.size > ENUM_LIMIT:
        raise LimitError(f"difference scan is limited to {ENUM_LIMIT} messages")
    diff = np.arange(1, c.size, dtype=np.int64)[:, None]
    return int((diff % np.array(c.moduli, dtype=np.int64) != 0).sum(axis=1).min())


def min_distance(c: Codebook, method: str = "auto") -> int:
    """Exact minimum Hamming distance between two distinct codewords (positions in the list).

    ``pairwise`` scans all pairs, ``weight`` takes the lightest nonzero word
    of a linear code, ``rank`` finds the largest coordinate set on which the
    generator loses rank and ``difference`` scans the message differences of
    a CRT code.  ``auto`` picks the first that fits the size.
    """
    if c.size < 2:
        raise ValueError("need at least two codewords")
    if method == "auto":
        if c.size <= PAIRWISE_LIMIT:
            method = "pairwise"
        elif c.is_linear:
            method = "weight" if c.size <= ENUM_LIMIT else "rank"
        elif c.moduli is not None:
            method = "difference"
        else:
            raise LimitError(f"code has {c.size} words; pairwise scan is limited to {PAIRWISE_LIMIT}")
    if method == "pairwise":
        if c.size > PAIRWISE_LIMIT:
            raise LimitError(f"pairwise scan is limited to {PAIRWISE_LIMIT} words")
        return _distance_pairwise(c.words)
    if method == "difference":
        if c.moduli is None:
            raise ValueError("the difference scan needs a CRT code")
        return _distance_difference(c)
    if not c.is_linear:
        raise ValueError(f"method {method!r} needs a linear code")
    if method == "weight":
        return _distance_weight(c)
    if method == "rank":
        return _distance_rank(c)
    raise ValueError(f"unknown method {method!r}")


# instances from codes

def _row_basis(rows: list[list[int]], q: int) -> list[list[int]]:
    a = [r[:] for r in rows]
    basis = []
    for col in range(len(a[0]) if a else 0):
        piv = next((r for r in a if r[col] % q), None)
        if piv is None:
            continue
        inv = pow(piv[col], -1, q)
        piv = [x * inv % q for x in piv]
        a = [[(x - r[col] * y) % q for x, y in zip(r, piv)] for r in a if r is not piv]
        a = [r for r in a if any(r)]
        basis.append(piv)
    return basis


def project_code(c: Codebook, coords: Sequence[int]) -> set[tuple[int, ...]]:
    """The projection of the codeword set onto ``coords``, without enumerating the whole code when avoidable."""
    coords = list(coords)
    if c.generator is not None:
        q = c.q
        basis = _row_basis([[int(row[j]) for j in coords] for row in c.generator], q)
        if not basis:
            return {tuple(0 for _ in coords)}
        b = np.array(basis, dtype=np.int64)
        msgs = np.array(list(itertools.product(range(q), repeat=len(basis))), dtype=np.int64)
        return {tuple(int(x) for x in r) for r in msgs @ b % q}
    if c.moduli is not None:
        mods = [c.moduli[j] for j in coords]
        period = math.prod(mods)
        m = np.arange(min(c.size, period), dtype=np.int64)[:, None]
        return {tuple(int(x) for x in r) for r in m % np.array(mods, dtype=np.int64)}
    return {tuple(int(x) for x in r) for r in np.unique(c.words[:, coords], axis=0)}


def instance_from_codebook(g: Hypergraph, c: Codebook, N: int | None = None) -> QueryInstance:
    """R_e is the projection of the codebook onto e; attribute v has domain {0, ..., alphabet_v - 1}."""
    if c.n != g.n:
        raise ValueError(f"code length {c.n} does not match {g.n} vertices")
    rels = [Relation(e, project_code(c, e)) for e in g.edges]
    domains = tuple(tuple(str(i) for i in range(a)) for a in c.alphabet_sizes)
    return QueryInstance(domains, tuple(rels), N)


def join_size_upto(q: QueryInstance, limit: int) -> int:
    """|J_Q| if it is at most ``limit``, else ``limit + 1``."""
    return sum(1 for _ in itertools.islice(_iter_generic(q, list(range(q.n))), limit + 1))


def join_equals_codebook(q: QueryInstance, c: Codebook) -> bool:
    """Whether the join is exactly the codeword set (the codewords always lie in the join)."""
    if join_size_upto(q, c.size) != c.size:
        return False
    rows = set(itertools.islice(_iter_generic(q, list(range(q.n))), c.size))
    return rows == c.codewords


def _root_ceil(N: int, y: Fraction) -> int:
    # smallest integer x with x**den >= N**num
    num, den = y.numerator, y.denominator
    target = N**num
    x = max(1, round(target ** (1 / den)) if den > 1 else target)
    while x**den < target:
        x += 1
    while x > 1 and (x - 1) ** den >= target:
        x -= 1
    return x


def crt_from_dual(
    g: Hypergraph, N: int, y: Sequence[Fraction], k: int | None = None
) -> tuple[QueryInstance, Codebook]:
    """CRT code with vertex v taking a distinct prime q_v >= N**y_v.

    Vertices are assigned in order of increasing y_v, then index, each taking
    the smallest unused prime at or above its threshold, searched up to
    4 * max(threshold, n) so that zero-valued vertices still get distinct
    small primes.  The code keeps the integers below the product of the k
    smallest moduli (default all of them).
    """
    y = [Fraction(v) for v in y]
    if len(y) != g.n:
        raise ValueError("need one dual value per vertex")
    for e in g.edges:
        if sum(y[v] for v in e) > 1:
            raise ValueError(f"dual violates edge {e}")
    if all(v == 0 for v in y):
        raise ValueError("all-zero dual gives a degenerate code")
    k = g.n if k is None else k
    used: set[int] = set()
    primes = [0] * g.n
    for v in sorted(range(g.n), key=lambda v: (y[v], v)):
        lo = _root_ceil(N, y[v])
        p = next_prime(lo)
        while p in used:
            p = next_prime(p + 1)
        cap = 4 * max(lo, g.n)
        if p > cap:
            raise ValueError(f"no unused prime within [{lo}, {cap}] for vertex {v}")
        used.add(p)
        primes[v] = p
    order = sorted(range(g.n), key=lambda v: primes[v])
    c = crt_codebook([primes[v] for v in order], k).permuted([order.index(v) for v in range(g.n)])
    return instance_from_codebook(g, c), c


@dataclass(frozen=True)
class LowerBoundInstance:
    instance: QueryInstance
    codebook: Codebook
    row: int
    q: int
    predicted_cover_size: int


def lower_bound_instance(g: Hypergraph, N: int, delta: int) -> LowerBoundInstance:
    """Code-based instance for the case row of (g, delta), with |R_e| <= N for the RS rows.

    Row 1 uses a repetition code over the largest prime q <= N, rows 2, 3 and
    5 an RS code over the largest prime q <= sqrt(N), row 4 a duplicated RS
    code over the largest prime q <= N and row 6 a CRT code whose moduli
    follow the decomposition's dual.
    """
    if N < 4:
        raise ValueError("N must be at least 4")
    row = classify_case(g, delta).row
    n = g.n
    if row == 1:
        q = largest_prime_at_most(N)
        c = rs_codebook(q, n, n)
    elif row in (2, 3, 5):
        q = largest_prime_at_most(math.isqrt(N))
        if q + 1 < n:
            raise ValueError(f"N={N} is too small: need a prime q >= {n - 1} with q*q <= N")
        c = rs_codebook(q, n, delta)
    elif row == 4:
        params = DisedgeConstructionParams.from_graph(g, delta)
        q = largest_prime_at_most(N)
        if q + 1 < params.base_length:
            raise ValueError(f"N={N} is too small for a code of length {params.base_length}")
        dup = duplicated_code(rs_codebook(q, params.base_length, params.base_distance), params)
        matched = [v for e in maximum_matching(g).edges for v in e]
        layout = matched + [v for v in range(n) if v not in matched]
        c = dup.permuted([layout.index(v) for v in range(n)])
    else:
        d = decompose(g)
        inst, c = crt_from_dual(g, N, d.y, k=n - delta + 1)
        return LowerBoundInstance(inst, c, row, max(c.alphabet_sizes), c.size)
    inst = instance_from_codebook(g, c, N)
    return LowerBoundInstance(inst, c, row, q, c.size)
