"""Exact engine for random permutations with cycle weights.

The probability of a permutation pi of n elements is

    p_n(pi) = exp(-sum_ell alpha_ell r_ell(pi)) / (h_n n!)

where r_ell counts the cycles of length ell.  Everything here is organized
around the normalization sequence h_n and the first-cycle-length law it
induces: h_n satisfies the recursion n h_n = sum_ell e^{-alpha_ell} h_{n-ell},
the number N_{a,b} of indices in cycles of length a..b has expectation
sum_{j=a}^{b} e^{-alpha_j} h_{n-j}/h_n, and the length of the cycle through a
fixed index has law e^{-alpha_j} h_{n-j} / (n h_n).

Independent routes to the same quantities (explicit composition formula,
increment series, Laplace identity, direct partition enumeration) are kept as
cross-checks; `enumerate_oracle` is the module's ground truth at small n.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import SizeCapError
from .summation import euler_maclaurin_tail
from .weights import WeightSequence

__all__ = [
    "HSeries", "CycleTypeSample", "OracleResult", "CrosscheckReport",
    "ShiftCovarianceReport", "Theorem21Scan",
    "h_series", "h_crosscheck", "shift_covariance_check",
    "expected_cycle_numbers", "first_cycle_length_dist", "expected_total_cycles",
    "sample_permutation", "enumerate_oracle", "cycle_type_distribution",
    "theorem21_scan",
]

_SAFE_LO, _SAFE_HI = 1e-300, 1e300
PARTITION_CAP = 60


@dataclass(frozen=True)
class HSeries:
    """h_0 .. h_{n_max} for a weight sequence, plus limit and ratio bound.

    `log_values` is always populated and is the authoritative representation;
    `values` may hold 0.0/inf entries after a log-domain fallback (triggered
    when a plain-float intermediate leaves [1e-300, 1e300], e.g. under large
    shifts).  `B` is the ratio bound sup h_m/h_n over the stored range only,
    a lower bound for the true constant.
    """

    weights: WeightSequence
    n_max: int
    values: np.ndarray
    log_values: np.ndarray
    h_inf: float | None
    h_inf_err: float
    B: float
    used_log_fallback: bool
    _dist_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def h(self, n):
        return float(self.values[n])

    def log_h(self, n):
        return float(self.log_values[n])

    def ratio(self, m, n):
        """h_m / h_n, safe in the log-fallback regime."""
        return math.exp(self.log_values[m] - self.log_values[n])


def h_series(weights, n_max):
    """Compute h_0..h_{n_max} by the defining recursion, O(n_max^2).

    h_inf = exp sum (e^{-alpha_ell}-1)/ell is attached when the weights are
    summable (dominated-convergence limit), absent otherwise.
    """
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    alpha = weights.alpha_array(n_max)
    b = np.exp(-alpha)
    h = np.empty(n_max + 1)
    h[0] = 1.0
    fallback = False
    for n in range(1, n_max + 1):
        val = float(np.dot(b[:n], h[n - 1::-1])) / n
        if not (_SAFE_LO < val < _SAFE_HI):
            fallback = True
            break
        h[n] = val
    if fallback:
        warnings.warn("h_series left the plain-float safe range; recomputing in log domain",
                      RuntimeWarning, stacklevel=2)
        logb = -alpha
        logh = np.empty(n_max + 1)
        logh[0] = 0.0
        for n in range(1, n_max + 1):
            logh[n] = logsumexp(logb[:n] + logh[n - 1::-1]) - math.log(n)
        with np.errstate(over="ignore", under="ignore"):
            values = np.exp(logh)
    else:
        values = h
        logh = np.log(h)
    if weights.is_summable():
        h_inf, h_err = _h_limit(weights)
    else:
        h_inf, h_err = None, 0.0
    with np.errstate(over="ignore"):
        B = float(np.exp(np.max(logh) - np.min(logh)))
    return HSeries(weights, n_max, values, logh, h_inf, h_err, B, fallback)


def _h_limit(weights):
    """h_inf = exp sum_{ell>=1} (e^{-alpha_ell} - 1)/ell for summable weights."""
    t = weights.tail
    n0 = len(weights.explicit)
    m_direct = max(2048, n0 + 16)
    ell = np.arange(1, m_direct + 1)
    s = float(np.sum(np.expm1(-weights.alpha(ell)) / ell))
    err = 0.0
    if t.kind != "zero" and t.c != 0.0:
        if t.kind == "power":
            f = lambda x: math.expm1(-t.c * x ** (-t.p)) / x
            tail, terr = euler_maclaurin_tail(f, m_direct + 1)
        else:
            f = lambda x: math.expm1(-t.c / math.log(x) ** t.p) / x
            tail, terr = euler_maclaurin_tail(f, m_direct + 1, log_substitution=True)
        s += tail
        err += terr
    val = math.exp(s)
    return val, abs(val) * err


# ---------------------------------------------------------------------------
# expectations induced by the first-cycle relation
# ---------------------------------------------------------------------------

def expected_cycle_numbers(h, n, a, b):
    """E_n(N_{a,b}) = sum_{j=a}^{b} e^{-alpha_j} h_{n-j}/h_n, exactly."""
    if not (1 <= a <= b):
        raise ValueError("need 1 <= a <= b")
    if b > n or n > h.n_max:
        raise ValueError(f"range error: a={a}, b={b}, n={n}, n_max={h.n_max}")
    j = np.arange(a, b + 1)
    lt = -h.weights.alpha(j) + h.log_values[n - j] - h.log_values[n]
    return float(np.sum(np.exp(lt)))


def first_cycle_length_dist(h, n):
    """Law of the cycle length through a fixed index: p_j = e^{-alpha_j} h_{n-j}/(n h_n)."""
    if not (1 <= n <= h.n_max):
        raise ValueError(f"range error: n={n}, n_max={h.n_max}")
    cached = h._dist_cache.get(n)
    if cached is not None:
        return cached
    j = np.arange(1, n + 1)
    p = np.exp(-h.weights.alpha(j) + h.log_values[n - j] - h.log_values[n] - math.log(n))
    p.setflags(write=False)
    h._dist_cache[n] = p
    return p


def expected_total_cycles(h, n):
    """E_n(sum_ell r_ell) = sum_j e^{-alpha_j} h_{n-j} / (j h_n).

    Exposed as an observable only; no growth rate is asserted.
    """
    j = np.arange(1, n + 1)
    lt = -h.weights.alpha(j) + h.log_values[n - j] - h.log_values[n] - np.log(j)
    return float(np.sum(np.exp(lt)))


# ---------------------------------------------------------------------------
# exact sequential sampler
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CycleTypeSample:
    n: int
    cycle_lengths: tuple
    permutation: np.ndarray | None = None

    def __post_init__(self):
        if sum(self.cycle_lengths) != self.n:
            raise ValueError("cycle lengths must sum to n")

    def tallies(self):
        """r_ell vector, index ell = 0..n (index 0 unused)."""
        r = np.zeros(self.n + 1, dtype=int)
        for ell in self.cycle_lengths:
            r[ell] += 1
        return r


def sample_permutation(h, n, rng, labeled=False):
    """Draw an exact sample of the cycle-weighted measure at size n.

    Sequentially draws the length of the cycle through the lowest remaining
    label from `first_cycle_length_dist` and, when a labeled permutation is
    requested, fills that cycle with a uniformly random ordered selection of
    the remaining labels, then recurses on what is left.
    """
    if not (0 <= n <= h.n_max):
        raise ValueError("n out of range")
    lengths = []
    perm = np.empty(n, dtype=int) if labeled else None
    pool = np.arange(n) if labeled else None
    m = n
    while m:
        p = first_cycle_length_dist(h, m)
        ell = 1 + int(rng.choice(m, p=p))
        lengths.append(ell)
        if labeled:
            anchor = pool[0]
            rest = pool[1:]
            pick = rng.permutation(m - 1)[:ell - 1]
            cyc = [int(anchor)] + [int(rest[t]) for t in pick]
            for idx in range(ell):
                perm[cyc[idx]] = cyc[(idx + 1) % ell]
            pool = np.delete(rest, pick)
        m -= ell
    return CycleTypeSample(n, tuple(sorted(lengths, reverse=True)), perm)


# ---------------------------------------------------------------------------
# partition-enumeration oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleResult:
    n: int
    h_n: float
    log_h_n: float
    expected_by_length: np.ndarray  # E(ell * r_ell), index ell = 0..n

    def expected_range(self, a, b):
        """E_n(N_{a,b}) from the enumeration, independent of the recursion."""
        if not (1 <= a <= b <= self.n):
            raise ValueError("range error")
        return float(np.sum(self.expected_by_length[a:b + 1]))


def _iter_partitions(n):
    from sympy.utilities.iterables import partitions
    return partitions(n)


def enumerate_oracle(weights, n):
    """h_n and the table E(ell r_ell) by direct summation over cycle types.

    A cycle type with multiplicities r_ell is carried by n!/prod ell^r r!
    permutations, so h_n = sum_types e^{-sum alpha r} / prod(ell^r r!).
    Independent of the recursion route; the cap keeps the number of integer
    partitions enumerable (partitions(60) is about 1e6).
    """
    if n > PARTITION_CAP:
        raise SizeCapError(f"partition enumeration capped at n <= {PARTITION_CAP}")
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return OracleResult(0, 1.0, 0.0, np.zeros(1))
    alpha = weights.alpha_array(n)
    scale = None
    z = 0.0
    m_num = np.zeros(n + 1)
    for part in _iter_partitions(n):
        lt = 0.0
        for ell, r in part.items():
            lt += -alpha[ell - 1] * r - r * math.log(ell) - math.lgamma(r + 1)
        if scale is None:
            scale = lt
        elif lt > scale + 40.0:
            fac = math.exp(scale - lt)
            z *= fac
            m_num *= fac
            scale = lt
        w = math.exp(lt - scale)
        z += w
        for ell, r in part.items():
            m_num[ell] += w * ell * r
    log_h = math.log(z) + scale
    with np.errstate(over="ignore"):
        h_n = math.exp(log_h) if abs(log_h) < 700 else float(np.exp(log_h))
    return OracleResult(n, h_n, log_h, m_num / z)


def cycle_type_distribution(weights, n):
    """Exact law over cycle types (sorted length tuples) at size n."""
    if n > PARTITION_CAP:
        raise SizeCapError(f"partition enumeration capped at n <= {PARTITION_CAP}")
    alpha = weights.alpha_array(n)
    raw = {}
    scale = None
    for part in _iter_partitions(n):
        lt = 0.0
        key = []
        for ell, r in part.items():
            lt += -alpha[ell - 1] * r - r * math.log(ell) - math.lgamma(r + 1)
            key.extend([ell] * r)
        if scale is None:
            scale = lt
        raw[tuple(sorted(key, reverse=True))] = math.exp(lt - scale)
    tot = sum(raw.values())
    return {k: v / tot for k, v in raw.items()}


# ---------------------------------------------------------------------------
# cross-checks between exact routes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrosscheckReport:
    n_max: int
    gamma: float
    explicit_abs: float          # recursion vs composition formula
    explicit_rel: float
    increments_abs: float        # recursion vs cumulative increments
    increments_rel: float
    laplace_applicable: bool
    laplace_residual: float
    laplace_bound: float
    laplace_rel: float
    bound_factorial_ok: bool     # h_n >= e^{-n alpha_1} / n!
    bound_single_cycle_ok: bool  # h_n >= e^{-alpha_n} / n
    alpha_subadditive: bool
    bound_subadditive_ok: bool | None   # h_n <= e^{-alpha_n}
    alpha_superadditive: bool
    bound_superadditive_ok: bool | None  # h_n >= e^{-alpha_n}

    def discrepancies(self):
        return {
            "explicit": self.explicit_abs,
            "increments": self.increments_abs,
            "laplace": self.laplace_residual,
        }


def _explicit_route(b, n_max):
    """h_n as the degree-n coefficient of exp(sum_m e^{-alpha_m} s^m / m).

    Evaluated literally as sum_k B(s)^k / k! with truncated polynomial powers,
    i.e. the composition-sum formula, so the arithmetic is genuinely different
    from the defining recursion.
    """
    c = np.zeros(n_max + 1)
    c[1:] = b / np.arange(1, n_max + 1)
    out = np.zeros(n_max + 1)
    out[0] = 1.0
    pk = np.zeros(n_max + 1)
    pk[0] = 1.0
    kfact = 1.0
    for k in range(1, n_max + 1):
        pk = np.convolve(pk, c)[:n_max + 1]
        kfact *= k
        out += pk / kfact
    return out


def _increment_route(alpha, n_max):
    """h_n via cumulative increments d_n with n d_n = sum (e^{-alpha_m}-1) d_{n-m}."""
    em1 = np.expm1(-alpha)
    d = np.empty(n_max + 1)
    d[0] = 1.0
    for n in range(1, n_max + 1):
        d[n] = float(np.dot(em1[:n], d[n - 1::-1])) / n
    return np.cumsum(d)


def h_crosscheck(weights, n_max, gamma):
    """Recompute h_n by independent exact routes and verify the bound chain.

    Routes: (a) recursion, (b) composition/exponential formula, (c)+(d)
    increment series; plus the Laplace-transform identity
    sum_n e^{-gamma n} h_n = exp sum_j e^{-gamma j - alpha_j}/j at gamma > 0,
    with a stated truncation bound.  The inequality checks follow the
    estimates h_n >= e^{-n alpha_1}/n!, h_n >= e^{-alpha_n}/n, and the
    sub/superadditive envelopes when the weight sequence qualifies.
    """
    if n_max < 1 or gamma <= 0:
        raise ValueError("need n_max >= 1 and gamma > 0")
    hs = h_series(weights, n_max)
    alpha = weights.alpha_array(n_max)
    b = np.exp(-alpha)
    h = hs.values

    hb = _explicit_route(b, n_max)
    hcd = _increment_route(alpha, n_max)
    expl_abs = float(np.max(np.abs(hb - h)))
    expl_rel = float(np.max(np.abs(hb - h) / np.abs(h)))
    incr_abs = float(np.max(np.abs(hcd - h)))
    incr_rel = float(np.max(np.abs(hcd - h) / np.abs(h)))

    # Laplace identity; requires alpha_ell/ell -> 0
    kind, lam, gc, gq = weights.growth()
    applicable = (lam == 0.0) and not (kind == "power" and gq > 1.0)
    lap_res = lap_bound = lap_rel = math.nan
    if applicable:
        n_lap = max(n_max, int(math.ceil(80.0 / gamma)))
        h_ext = hs if n_lap == n_max else h_series(weights, n_lap)
        ns = np.arange(n_lap + 1)
        lhs = float(np.sum(np.exp(h_ext.log_values - gamma * ns)))
        h_sup = 2.0 * float(np.exp(np.max(h_ext.log_values)))
        lap_bound = h_sup * math.exp(-gamma * (n_lap + 1)) / -math.expm1(-gamma)
        env = math.exp(-min(0.0, weights.min_g_beyond(0)))
        j_hi = n_lap
        while env * math.exp(-gamma * (j_hi + 1)) / ((j_hi + 1) * -math.expm1(-gamma)) > 1e-18:
            j_hi *= 2
        j = np.arange(1, j_hi + 1)
        rhs = math.exp(float(np.sum(np.exp(-gamma * j - weights.alpha(j)) / j)))
        lap_res = abs(lhs - rhs)
        lap_rel = lap_res / rhs

    # bound chain of the h_n estimates
    ns = np.arange(1, n_max + 1)
    slack = 1e-9
    logh = hs.log_values[1:]
    ok_fact = bool(np.all(logh >= -ns * alpha[0] - gammaln(ns + 1) - slack))
    ok_single = bool(np.all(logh >= -alpha - np.log(ns) - slack))
    # pairwise sub/superadditivity implies it for all compositions
    pair_sum = alpha[:, None] + alpha[None, :]
    ii, jj = np.indices(pair_sum.shape)
    mask = (ii + jj + 2) <= n_max
    combined = alpha[(ii + jj + 1)[mask]]
    sub = bool(np.all(combined <= pair_sum[mask] + 1e-12))
    sup = bool(np.all(combined >= pair_sum[mask] - 1e-12))
    ok_sub = bool(np.all(logh <= -alpha + slack)) if sub else None
    ok_sup = bool(np.all(logh >= -alpha - slack)) if sup else None

    return CrosscheckReport(n_max, gamma, expl_abs, expl_rel, incr_abs, incr_rel,
                            applicable, lap_res, lap_bound, lap_rel,
                            ok_fact, ok_single, sub, ok_sub, sup, ok_sup)


@dataclass(frozen=True)
class ShiftCovarianceReport:
    c: float
    n_max: int
    max_rel_h: float      # worst |h_n(shifted) e^{cn} / h_n - 1|
    max_abs_dist: float   # worst entrywise gap between first-cycle laws


def shift_covariance_check(weights, c, n_max):
    """Verify h_n(alpha + c*ell) = e^{-cn} h_n(alpha) and law invariance."""
    if n_max < 1:
        raise ValueError("need n_max >= 1")
    h0 = h_series(weights, n_max)
    h1 = h_series(weights.shifted(c), n_max)
    ns = np.arange(n_max + 1)
    dlog = h1.log_values + c * ns - h0.log_values
    max_rel = float(np.max(np.abs(np.expm1(dlog))))
    probe = sorted({1, max(1, n_max // 2), n_max})
    max_dist = 0.0
    for n in probe:
        d = np.max(np.abs(first_cycle_length_dist(h0, n) - first_cycle_length_dist(h1, n)))
        max_dist = max(max_dist, float(d))
    return ShiftCovarianceReport(float(c), n_max, max_rel, max_dist)


# ---------------------------------------------------------------------------
# finite-n scan of the macroscopic-fraction law
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Theorem21Scan:
    n: int
    rows: tuple          # (s, E_n(N_{1, floor(s n)}) / n)
    summable: bool       # scan hypothesis flag; values are exact either way


def theorem21_scan(weights, n, s_grid, h=None):
    """Exact values of E_n(N_{1, floor(s n)})/n on an s-grid.

    In the summable regime this converges to s as n grows; non-summable
    weights are still evaluated but flagged as outside that hypothesis.
    """
    if h is None:
        h = h_series(weights, n)
    rows = []
    for s in s_grid:
        if not (0.0 <= s <= 1.0):
            raise ValueError("s must lie in [0, 1]")
        b = int(math.floor(s * n))
        val = 0.0 if b < 1 else expected_cycle_numbers(h, n, 1, min(b, n)) / n
        rows.append((float(s), val))
    return Theorem21Scan(n, tuple(rows), weights.is_summable())
