"""Dependent rounding of fractional edge covers, and LP gap instances.

Randomised functions take an explicit ``numpy.random.Generator``; retry
loops derive one stream per trial from the configured seed.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .core import Hypergraph
from .lpbounds import Constraint, LPError, _primal_constraints, lp_lb, lp_primal, lp_ub, solve_lp

Edge = tuple[int, ...]
E_INV = 1 / math.e
_RES = 1 << 53


class RoundingError(RuntimeError):
    def __init__(self, message: str, best_coverage: int):
        super().__init__(message)
        self.best_coverage = best_coverage


@dataclass(frozen=True)
class RoundingConfig:
    c: Fraction = Fraction("5.184")
    max_retries: int = 1000
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        if self.c <= 1:
            raise ValueError("c must exceed 1")

    @property
    def c1(self) -> float:
        return (1 - E_INV) * float(self.c)

    @property
    def in_regime(self) -> bool:
        """Whether c1 > 1 and c / (c1 - 1)^2 < 1."""
        return self.c1 > 1 and float(self.c) / (self.c1 - 1) ** 2 < 1

    def rng(self, trial: int) -> np.random.Generator:
        return np.random.default_rng([self.rng_seed, trial])


def _coin(rng: np.random.Generator, p: Fraction) -> bool:
    # exact comparison against a 53-bit uniform
    return Fraction(int(rng.integers(0, _RES)), _RES) < p


def dependent_round(x: Sequence[Fraction | int | str], rng: np.random.Generator) -> list[int]:
    """Pipage rounding: marginals are kept and the sum lands on its floor or ceiling.

    Two fractional entries at a time exchange mass (one goes up and the other
    down by the same amount) with probabilities that keep both expectations,
    until at most one fractional entry is left; that one is rounded up with
    probability equal to its value.
    """
    vals = [Fraction(v) for v in x]
    if any(v < 0 or v > 1 for v in vals):
        raise ValueError("entries must lie in [0, 1]")
    frac = [i for i, v in enumerate(vals) if 0 < v < 1]
    while len(frac) >= 2:
        i, j = frac[0], frac[1]
        a = min(1 - vals[i], vals[j])
        b = min(vals[i], 1 - vals[j])
        if _coin(rng, b / (a + b)):
            vals[i] += a
            vals[j] -= a
        else:
            vals[i] -= b
            vals[j] += b
        frac = [k for k in frac if 0 < vals[k] < 1]
    if frac:
        i = frac[0]
        vals[i] = Fraction(int(_coin(rng, vals[i])))
    return [int(v) for v in vals]


def _edge_vector(g: Hypergraph, x: Mapping[Edge, Fraction] | Sequence[Fraction]) -> list[Fraction]:
    if isinstance(x, Mapping):
        return [Fraction(x.get(e, 0)) for e in g.edges]
    if len(x) != len(g.edges):
        raise ValueError("need one value per edge")
    return [Fraction(v) for v in x]


def _coverage(g: Hypergraph, X: Sequence[Fraction]) -> list[int]:
    load = [Fraction(0)] * g.n
    for e, val in zip(g.edges, X):
        for v in e:
            load[v] += val
    return [int(l >= 1) for l in load]


def algorithm_A(
    g: Hypergraph, x: Mapping[Edge, Fraction] | Sequence[Fraction], cfg: RoundingConfig, rng: np.random.Generator
) -> tuple[list[Fraction], list[int]]:
    """Scale by c and cap at 1, round dependently, then keep the larger of the two per edge.

    Returns the edge weights X and the 0/1 vector Z of vertices whose
    X-coverage is at least 1.
    """
    xs = _edge_vector(g, x)
    scaled = [min(cfg.c * v, Fraction(1)) for v in xs]
    rounded = dependent_round(scaled, rng)
    X = [max(Fraction(r), s) for r, s in zip(rounded, scaled)]
    return X, _coverage(g, X)


def cost_bound(x: Sequence[Fraction], c: Fraction) -> Fraction:
    """2c * sum(x) + 1, the guaranteed ceiling on sum(X) for a rounding."""
    return 2 * Fraction(c) * sum(x, Fraction(0)) + 1


@dataclass(frozen=True)
class RoundedCover:
    X: dict[Edge, Fraction]
    covered: tuple[int, ...]
    trials: int
    cost: Fraction
    forced: tuple[Edge, ...] = ()


def _lp_x(g: Hypergraph, s: int) -> list[Fraction]:
    sol = lp_primal(g, s).solution
    return [sol[f"x[{','.join(map(str, e))}]"] for e in g.edges]


def rounded_cover(g: Hypergraph, s: int, cfg: RoundingConfig = RoundingConfig()) -> RoundedCover:
    """Weights covering at least s vertices, from the fractional LP optimum.

    If vertices with z_v >= 1/c (always covered after scaling) fall short of
    s by s' and a single edge holds s' of the others, that edge is set to 1
    and no randomness is used.  Otherwise :func:`algorithm_A` is retried.
    """
    if s == 0:
        return RoundedCover({}, (), 0, Fraction(0))
    x = _lp_x(g, s)
    scaled = [min(cfg.c * v, Fraction(1)) for v in x]
    base_cov = _coverage(g, scaled)
    V1 = {v for v in range(g.n) if base_cov[v]}
    short = s - len(V1)
    if short > 0:
        big = [i for i, e in enumerate(g.edges) if len(set(e) - V1) >= short]
        if big:
            X = list(scaled)
            X[big[0]] = Fraction(1)
            cov = _coverage(g, X)
            return RoundedCover(dict(zip(g.edges, X)), tuple(v for v in range(g.n) if cov[v]), 0, sum(X, Fraction(0)), (g.edges[big[0]],))
    best = 0
    for trial in range(1, cfg.max_retries + 1):
        X, Z = algorithm_A(g, x, cfg, cfg.rng(trial))
        got = sum(Z)
        if got >= s:
            return RoundedCover(dict(zip(g.edges, X)), tuple(v for v in range(g.n) if Z[v]), trial, sum(X, Fraction(0)))
        best = max(best, got)
    raise RoundingError(f"covered at most {best} < {s} vertices in {cfg.max_retries} trials", best)


def rounded_cover_373(
    g: Hypergraph, s: int, eps: Fraction = Fraction(1, 20), cfg: RoundingConfig = RoundingConfig(c=Fraction("1.865"))
) -> RoundedCover:
    """Force heavy edges first, then round the LP on what is left.

    While some edge holds at least eps * r of the r still-needed uncovered
    vertices, it is taken with weight 1.  Each such step shrinks r by a
    factor 1 - eps, so there are at most 1 + log_{1+eps}(s) of them.  The
    remaining requirement is solved as an LP with the covered vertices
    fixed and rounded by :func:`algorithm_A`.
    """
    eps = Fraction(eps)
    if s == 0:
        return RoundedCover({}, (), 0, Fraction(0))
    covered: set[int] = set()
    forced: list[Edge] = []
    while len(covered) < s:
        r = s - len(covered)
        gains = [(len(set(e) - covered), -i) for i, e in enumerate(g.edges)]
        gain, neg = max(gains)
        if gain == 0 or gain < eps * r:
            break
        forced.append(g.edges[-neg])
        covered |= set(g.edges[-neg])
    limit = 1 + math.log(s) / math.log(1 + float(eps))
    assert len(forced) <= limit, (len(forced), limit)
    X0 = {e: Fraction(1) for e in forced}
    if len(covered) >= s:
        return RoundedCover(X0, tuple(sorted(covered)), 0, Fraction(len(forced)), tuple(forced))
    # forced edges are paid for, so they leave the objective and move to the right-hand sides
    cons = []
    for c in _primal_constraints(g, s, ones=covered):
        paid = sum((v for k, v in c.coeffs.items() if k in X0), 0)
        cons.append(Constraint({k: v for k, v in c.coeffs.items() if k not in X0}, c.sense, c.rhs - paid))
    res = solve_lp({e: 1 for e in g.edges if e not in X0}, cons)
    x = [X0.get(e, res.solution.get(e, Fraction(0))) for e in g.edges]
    best = 0
    for trial in range(1, cfg.max_retries + 1):
        X, Z = algorithm_A(g, x, cfg, cfg.rng(trial))
        X = [Fraction(1) if e in X0 else v for e, v in zip(g.edges, X)]
        Z = _coverage(g, X)
        got = sum(Z)
        if got >= s:
            return RoundedCover(dict(zip(g.edges, X)), tuple(v for v in range(g.n) if Z[v]), trial, sum(X, Fraction(0)), tuple(forced))
        best = max(best, got)
    raise RoundingError(f"covered at most {best} < {s} vertices in {cfg.max_retries} trials", best)


def gap_ratio(g: Hypergraph, s: int) -> Fraction:
    """lp_ub / lp_lb, exactly."""
    lo = lp_lb(g, s).objective
    if lo == 0:
        raise ZeroDivisionError("lp_lb is zero")
    return lp_ub(g, s).objective / lo


# gap instances

@dataclass(frozen=True)
class GapInstanceParams:
    n: int
    epsilon: float
    C: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.d >= self.n:
            raise ValueError(f"d={self.d} must be below n={self.n}")

    @property
    def d(self) -> int:
        return math.ceil(self.C * math.log(self.n) / self.epsilon**2)

    @property
    def d_private(self) -> int:
        return math.floor((1 - E_INV) * self.d)

    @property
    def t(self) -> int:
        return self.n

    @property
    def s_target(self) -> int:
        return round((2 - E_INV) * self.t)


@dataclass(frozen=True)
class GapInstance:
    """t random base edges over n vertices, each with d' private vertices of its own.

    ``base[i, v]`` says whether base vertex v is in edge i.  Private vertices
    are numbered n + i*d' + j.
    """

    params: GapInstanceParams
    base: np.ndarray
    attempts: int = 1
    _pair_union: list = field(default_factory=list, repr=False, compare=False)

    @property
    def edge_sizes(self) -> np.ndarray:
        return self.base.sum(axis=1)

    @property
    def degrees(self) -> np.ndarray:
        return self.base.sum(axis=0)

    @property
    def n_vertices(self) -> int:
        return self.params.n + self.params.t * self.params.d_private

    def property_a(self) -> bool:
        return bool((self.edge_sizes <= (1 + self.params.epsilon) * self.params.d).all())

    def property_b(self) -> bool:
        return bool((self.degrees >= (1 - self.params.epsilon) * self.params.d).all())

    def property_c_sample(self, rng: np.random.Generator, samples: int = 100) -> bool:
        """Random families of floor(n/d) base edges cover at most (1 - 1/e + eps) n vertices."""
        p = self.params
        size = max(1, p.n // p.d)
        cap = (1 - E_INV + p.epsilon) * p.n
        for _ in range(samples):
            idx = rng.choice(p.t, size=size, replace=False)
            if self.base[idx].any(axis=0).sum() > cap:
                return False
        return True

    def to_hypergraph(self, limit: int = 5000) -> Hypergraph:
        if self.n_vertices > limit:
            raise ValueError(f"{self.n_vertices} vertices is above the explicit limit {limit}")
        p = self.params
        edges = []
        for i in range(p.t):
            priv = range(p.n + i * p.d_private, p.n + (i + 1) * p.d_private)
            edges.append(list(np.flatnonzero(self.base[i])) + list(priv))
        return Hypergraph(self.n_vertices, edges)


def gap_instance(params: GapInstanceParams, rng: np.random.Generator, budget: int = 100) -> GapInstance:
    """Each base edge takes each vertex independently with probability d/n; resample until (a) and (b) hold."""
    p = params
    for attempt in range(1, budget + 1):
        base = rng.random((p.t, p.n)) < p.d / p.n
        inst = GapInstance(p, base, attempt)
        if inst.property_a() and inst.property_b():
            return inst
    raise RuntimeError(f"no sample satisfied both properties in {budget} attempts")


SCALE = 1 << 40


@dataclass(frozen=True)
class GapBounds:
    s: int
    lp_lb_upper: Fraction
    lp_lb_solver: float
    lp_ub_lower: Fraction
    lp_ub_upper: Fraction
    beta_lower: int

    @property
    def ratio_lower(self) -> Fraction:
        return self.lp_ub_lower / self.lp_lb_upper

    @property
    def ratio_upper(self) -> float:
        return float(self.lp_ub_upper) / self.lp_lb_solver


def _certified_value(inst: GapInstance, x: np.ndarray, s: int) -> Fraction | None:
    """Objective of x (rounded up to multiples of 2^-40) if it is feasible for the fractional LP, exactly."""
    p = inst.params
    xi = np.ceil(np.maximum(x, 0) * SCALE).astype(np.int64)
    load = inst.base.T.astype(np.int64) @ xi
    z = np.minimum(load, SCALE)
    w = np.minimum(xi, SCALE)
    total = int(z.sum()) + p.d_private * int(w.sum())
    if total < s * SCALE:
        return None
    return Fraction(int(xi.sum()), SCALE)


def gap_lp_lb(inst: GapInstance, s: int | None = None) -> tuple[float, Fraction]:
    """Fractional optimum via HiGHS on the aggregated LP, with a certified upper bound from its solution.

    Private vertices of one edge behave alike, so they collapse into a single
    variable w_i <= min(x_i, 1) of weight d'.
    """
    p = inst.params
    s = p.s_target if s is None else s
    t, n = p.t, p.n
    B = sparse.csr_matrix(inst.base.T.astype(float))
    I_n, I_t = sparse.identity(n, format="csr"), sparse.identity(t, format="csr")
    A = sparse.vstack([
        sparse.hstack([-B, I_n, sparse.csr_matrix((n, t))]),
        sparse.hstack([-I_t, sparse.csr_matrix((t, n)), I_t]),
        sparse.hstack([sparse.csr_matrix((1, t)), -np.ones((1, n)), -p.d_private * np.ones((1, t))]),
    ]).tocsr()
    b = np.concatenate([np.zeros(n + t), [-s]])
    cost = np.concatenate([np.ones(t), np.zeros(n + t)])
    bounds = [(0, None)] * t + [(0, 1)] * (n + t)
    # interior point is an order of magnitude faster than simplex here
    res = linprog(cost, A_ub=A, b_ub=b, bounds=bounds, method="highs-ipm")
    if res.status != 0:
        raise LPError(f"HiGHS failed: {res.message}")
    x = res.x[:t]
    for bump in (1.0, 1 + 1e-9, 1 + 1e-6, 1 + 1e-3):
        val = _certified_value(inst, x * bump, s)
        if val is not None:
            return float(res.fun), val
    raise LPError("could not certify the solver's solution")


def _pair_union_max(inst: GapInstance) -> int:
    b = inst.base.astype(np.float64)
    inter = b @ b.T
    sizes = inst.edge_sizes.astype(np.float64)
    union = sizes[:, None] + sizes[None, :] - inter
    np.fill_diagonal(union, 0)
    return int(union.max())


def gap_lp_ub_lower(inst: GapInstance, s: int | None = None) -> tuple[Fraction, int]:
    """A lower bound on the integral-coverage LP, by the number beta of edges with weight >= 1.

    Only edges with x_i >= 1 cover their private vertices, so beta edges
    give at most beta*d' private and U_beta base vertices (U_beta bounds the
    largest union of beta edges).  The r = s - beta*d' - U_beta base
    vertices still needed get their coverage from the other edges, each
    reaching at most min(D, n - U_beta) of them (D the largest edge), so
    the cost is at least beta + r / min(D, n - U_beta).
    """
    p = inst.params
    s = p.s_target if s is None else s
    n, dp = p.n, p.d_private
    D = int(inst.edge_sizes.max())
    U2 = _pair_union_max(inst)

    def union_cap(beta: int) -> int:
        if beta == 0:
            return 0
        if beta == 1:
            return D
        return min(n, U2 + (beta - 2) * D)

    beta = max(0, math.ceil((s - n) / dp))
    best, arg = None, beta
    while best is None or beta < best:
        u = union_cap(beta)
        need = s - beta * dp
        if need <= n:
            r = max(0, need - u)
            reach = min(D, n - u)
            lb = Fraction(beta) if r == 0 else (Fraction(beta) + Fraction(r, reach) if reach > 0 else None)
            if lb is not None and (best is None or lb < best):
                best, arg = lb, beta
        beta += 1
    return best, arg


def _residual_cost(inst: GapInstance, got: np.ndarray, need: int) -> Fraction | None:
    """Certified fractional cost of covering ``need`` more base vertices outside ``got``, or None if too few remain."""
    if need <= 0:
        return Fraction(0)
    rest = np.flatnonzero(~got)
    if len(rest) < need:
        return None
    # the needed vertices with the largest degrees
    deg = inst.base[:, rest].sum(axis=0)
    pick = rest[np.argsort(-deg, kind="stable")[:need]]
    A = -inst.base[:, pick].T.astype(float)
    res = linprog(np.ones(inst.params.t), A_ub=A, b_ub=-np.ones(len(pick)), bounds=[(0, None)] * inst.params.t, method="highs")
    if res.status != 0:
        return None
    xi = np.ceil(np.maximum(res.x, 0) * SCALE * (1 + 1e-9)).astype(np.int64)
    if ((inst.base[:, pick].T.astype(np.int64) @ xi) < SCALE).any():
        raise LPError("residual solution is not feasible")
    return Fraction(int(xi.sum()), SCALE)


def gap_lp_ub_upper(inst: GapInstance, s: int | None = None, extra: int = 3) -> Fraction:
    """A feasible integral-coverage solution: beta edges at weight 1 plus an LP for the rest.

    The weight-1 edges start from the pair with the largest union and grow
    greedily by new base coverage.  Every beta from the first one that leaves
    enough base vertices up to ``extra`` more is tried; the cheapest wins.
    """
    p = inst.params
    s = p.s_target if s is None else s
    dp = p.d_private
    b = inst.base.astype(np.float64)
    sizes = inst.edge_sizes.astype(np.float64)
    union = sizes[:, None] + sizes[None, :] - b @ b.T
    np.fill_diagonal(union, -1)
    i, j = np.unravel_index(int(union.argmax()), union.shape)
    chosen = [int(i), int(j)]
    got = inst.base[i] | inst.base[j]
    best, tried = None, 0
    while tried <= extra:
        cost = _residual_cost(inst, got, s - len(chosen) * dp - int(got.sum()))
        if cost is not None:
            tried += 1
            total = len(chosen) + cost
            if best is None or total < best:
                best = total
            if cost == 0:
                break
        if len(chosen) == p.t:
            break
        gain = (inst.base & ~got).sum(axis=1)
        gain[chosen] = -1
        k = int(gain.argmax())
        chosen.append(k)
        got = got | inst.base[k]
    if best is None:
        raise LPError("no feasible integral-coverage solution found")
    return best


def gap_bounds(inst: GapInstance, s: int | None = None) -> GapBounds:
    p = inst.params
    s = p.s_target if s is None else s
    solver, lb_up = gap_lp_lb(inst, s)
    ub_lo, beta = gap_lp_ub_lower(inst, s)
    ub_up = gap_lp_ub_upper(inst, s)
    return GapBounds(s, lb_up, solver, ub_lo, ub_up, beta)
