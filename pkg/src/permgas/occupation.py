"""Occupation-number representation on a truncated dual lattice.

The periodized spatial model is exactly solvable through its Fourier modes:
occupation numbers (n_k) with sum N carry probability

    p(n) = (1/Y) prod_k e^{-n_k eps(k)} h_{n_k},

with h the cycle-weight normalization sequence.  This module computes Y by
convolution dynamic programming over the modes, exact per-mode marginals,
the zero-mode law and its moment generating function, exact backward-DP
sampling, and the cycle statistics that transfer from the non-spatial model:
E(rho_{a,b}) = (1/V) sum_k sum_m P(n_k = m) E_m(N_{a,b}).

Direct enumeration over (mode assignment, permutation) pairs on tiny
instances (`enumerate_small`) is the module's oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .cycles import h_series
from .errors import SizeCapError
from .weights import WeightSequence

__all__ = [
    "DPTables", "OccupationState", "ModeMarginals", "SmallEnumeration",
    "TypicalityReport", "ScanRow", "MacroscopicScan",
    "partition_dp", "mode_marginals", "n0_law_and_mgf",
    "sample_occupations", "sample_occupations_batch",
    "cycle_density_expectation", "typicality_probs", "macroscopic_scan",
    "enumerate_small",
]

_ENUM_CAP = 1_000_000


def _norm(arr):
    s = float(arr.max())
    if s <= 0.0:
        return arr, -math.inf
    return arr / s, math.log(s)


def _conv(a, sa, b, sb, n):
    c = np.convolve(a, b)[:n + 1]
    c, sc = _norm(c)
    return c, sa + sb + sc


@dataclass(frozen=True)
class OccupationState:
    """Per-mode occupation numbers, aligned with the lattice mode order."""

    n_by_mode: np.ndarray
    lattice: object

    def __post_init__(self):
        if np.any(self.n_by_mode < 0):
            raise ValueError("occupations must be >= 0")

    @property
    def N(self):
        return int(self.n_by_mode.sum())


class DPTables:
    """Prefix/suffix partition tables over eps-sorted mode groups.

    Z_j(m) values are kept as scaled arrays (row max ~ 1 plus a log scale) so
    shifted weight sequences cannot over/underflow the DP.  Per-mode weight
    entries below the relative floor 1e-300 flush to zero; this is recorded in
    `underflow_floored` (the flushed mass is negligible by construction).
    """

    def __init__(self, lattice, weights, N, h):
        self.lattice = lattice
        self.weights = weights
        self.N = int(N)
        self.h = h
        self._marginals = None
        self._emn = None
        self._samp_cum_cache = {}

        G = len(lattice.group_eps)
        n = self.N
        logw = np.empty((G, n + 1))
        for g in range(G):
            logw[g] = -lattice.group_eps[g] * np.arange(n + 1) + h.log_values[:n + 1]
        self.logw = logw
        self.underflow_floored = False

        self.w_scaled = []
        self.cstack = []
        self.cscale = []
        for g in range(G):
            s = float(np.max(logw[g]))
            with np.errstate(under="ignore"):
                w = np.exp(logw[g] - s)
            if np.any((w == 0.0) & np.isfinite(logw[g])):
                self.underflow_floored = True
            self.w_scaled.append((w, s))
            mult = int(lattice.group_mult[g])
            rows = np.zeros((mult + 1, n + 1))
            scales = np.zeros(mult + 1)
            rows[0, 0] = 1.0
            for i in range(1, mult + 1):
                rows[i], scales[i] = _conv(rows[i - 1], scales[i - 1], w, s, n)
            self.cstack.append(rows)
            self.cscale.append(scales)

        gp = np.zeros((G + 1, n + 1))
        gpscale = np.zeros(G + 1)
        gp[0, 0] = 1.0
        for g in range(G):
            gp[g + 1], gpscale[g + 1] = _conv(gp[g], gpscale[g],
                                              self.cstack[g][-1], self.cscale[g][-1], n)
        gs = np.zeros((G + 1, n + 1))
        gsscale = np.zeros(G + 1)
        gs[G, 0] = 1.0
        for g in range(G - 1, -1, -1):
            gs[g], gsscale[g] = _conv(gs[g + 1], gsscale[g + 1],
                                      self.cstack[g][-1], self.cscale[g][-1], n)
        self.gp, self.gpscale = gp, gpscale
        self.gs, self.gsscale = gs, gsscale
        self.log_Y = math.log(gp[G, n]) + gpscale[G]

    @property
    def Y(self):
        try:
            return math.exp(self.log_Y)
        except OverflowError:
            return math.inf

    # -- lazy derived tables -------------------------------------------------
    def marginals(self):
        if self._marginals is None:
            self._marginals = mode_marginals(self)
        return self._marginals

    def emn_prefix(self):
        """EMN[m, j] = E_m(N_{1, min(j, m)}) from the first-cycle relation."""
        if self._emn is None:
            n = self.N
            alpha = self.weights.alpha_array(n)
            logh = self.h.log_values
            emn = np.zeros((n + 1, n + 1))
            for m in range(1, n + 1):
                jj = np.arange(1, m + 1)
                terms = np.exp(-alpha[:m] + logh[m - jj] - logh[m])
                emn[m, 1:m + 1] = np.cumsum(terms)
                emn[m, m + 1:] = emn[m, m]
            self._emn = emn
        return self._emn

    def _samp_cum(self, g):
        """Cumulative law of the group-g total given m left for groups >= g."""
        cached = self._samp_cum_cache.get(g)
        if cached is None:
            n = self.N
            a = self.cstack[g][-1]
            bv = self.gs[g + 1]
            cum = np.ones((n + 1, n + 1))
            for m in range(n + 1):
                row = a[:m + 1] * bv[m::-1]
                tot = row.sum()
                if tot > 0:
                    cum[m, :m + 1] = np.cumsum(row) / tot
                    cum[m, m + 1:] = 1.0
            self._samp_cum_cache[g] = cum
            cached = cum
        return cached


def partition_dp(lattice, weights, N, h=None):
    """Exact DP for Y(Lambda, N); cost O(n_modes * N^2)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if h is None:
        h = h_series(weights, N)
    elif h.n_max < N:
        raise ValueError("h series too short for N")
    return DPTables(lattice, weights, N, h)


@dataclass(frozen=True)
class ModeMarginals:
    """Exact per-mode occupation laws P(n_k = m), grouped by equal eps."""

    lattice: object
    N: int
    group_laws: np.ndarray   # (G, N+1)

    def per_mode(self, j):
        return self.group_laws[self.lattice.group_of[j]]

    def group_expectations(self):
        return self.group_laws @ np.arange(self.N + 1)

    def total_expectation(self):
        """sum_k E(n_k); equals N up to roundoff."""
        return float(np.dot(self.lattice.group_mult, self.group_expectations()))


def mode_marginals(tables):
    """Leave-one-out laws P(n_k = m) = w_k(m) Y_{-k}(N-m) / Y.

    Y_{-k} is assembled from the prefix and suffix tables (all positive
    terms), which is unconditionally stable at the same cost as the build.
    """
    lat = tables.lattice
    n = tables.N
    G = len(lat.group_eps)
    laws = np.empty((G, n + 1))
    for g in range(G):
        rest, srest = _conv(tables.gp[g], tables.gpscale[g],
                            tables.gs[g + 1], tables.gsscale[g + 1], n)
        mult = int(lat.group_mult[g])
        ym, sym = _conv(rest, srest, tables.cstack[g][mult - 1], tables.cscale[g][mult - 1], n)
        with np.errstate(divide="ignore"):
            log_ym = np.log(ym[n::-1]) + sym     # index m -> ym[N - m]
        laws[g] = np.exp(tables.logw[g] + log_ym - tables.log_Y)
    return ModeMarginals(lat, n, laws)


def n0_law_and_mgf(tables, lambda_grid):
    """Exact law of n_0 and E e^{lambda n_0 / V} on a lambda grid."""
    marg = tables.marginals()
    law0 = marg.group_laws[0]
    lam = np.atleast_1d(np.asarray(lambda_grid, dtype=float))
    m = np.arange(tables.N + 1)
    mgf = np.exp(np.outer(lam, m) / tables.lattice.volume) @ law0
    return law0, mgf


# ---------------------------------------------------------------------------
# exact sampling
# ---------------------------------------------------------------------------

def sample_occupations_batch(tables, size, rng, chunk=None):
    """Exact i.i.d. samples of the occupation law, shape (size, n_modes).

    Stage 1 draws group totals by backward DP (vectorized over the batch);
    stage 2 splits each positive group total over its equal-eps modes by the
    same sequential rule.  The law is p(n) exactly.
    """
    lat = tables.lattice
    n_modes = lat.n_modes
    G = len(lat.group_eps)
    slices = lat.group_slices()
    if chunk is None:
        chunk = max(1, 5_000_000 // max(n_modes, 1))
    out = np.zeros((size, n_modes), dtype=np.int32)
    done = 0
    while done < size:
        csize = min(chunk, size - done)
        m = np.full(csize, tables.N, dtype=np.int64)
        tg = np.zeros((csize, G), dtype=np.int64)
        for g in range(G):
            if g == G - 1:
                t = m.copy()
            else:
                cum = tables._samp_cum(g)
                rows = cum[m]
                u = rng.random(csize)
                t = (u[:, None] > rows).sum(axis=1)
            tg[:, g] = t
            m -= t
        block = out[done:done + csize]
        for g, sl in enumerate(slices):
            mult = sl.stop - sl.start
            if mult == 1:
                block[:, sl.start] = tg[:, g]
                continue
            hot = np.nonzero(tg[:, g] > 0)[0]
            w = tables.cstack[g][1]          # single-mode weights (scaled)
            rows = tables.cstack[g]
            for i in hot:
                t = int(tg[i, g])
                for j in range(mult, 1, -1):
                    p = w[:t + 1] * rows[j - 1][t::-1]
                    p = p / p.sum()
                    v = int(rng.choice(t + 1, p=p))
                    block[i, sl.start + mult - j] = v
                    t -= v
                block[i, sl.stop - 1] = t
        done += csize
    return out


def sample_occupations(tables, rng):
    """One exact occupation sample (backward DP over modes)."""
    n = sample_occupations_batch(tables, 1, rng)[0]
    return OccupationState(n, tables.lattice)


# ---------------------------------------------------------------------------
# cycle statistics through the de-spatialized representation
# ---------------------------------------------------------------------------

def cycle_density_expectation(tables, a, b):
    """E(rho_{a,b}) = (1/V) sum_k sum_m P(n_k = m) E_m(N_{a,b}), exact."""
    if a < 1:
        raise ValueError("a must be >= 1")
    if b > tables.N:
        raise ValueError(f"range error: b={b} exceeds N={tables.N}")
    if a > b:
        return 0.0
    laws = tables.marginals().group_laws
    emn = tables.emn_prefix()
    m = np.arange(tables.N + 1)
    hi = emn[m, np.minimum(b, m)]
    lo = emn[m, np.minimum(a - 1, m)]
    per_group = laws @ (hi - lo)
    return float(np.dot(tables.lattice.group_mult, per_group)) / tables.lattice.volume


# ---------------------------------------------------------------------------
# typicality of occupation numbers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypicalityReport:
    p_a: float
    p_b: float
    p_c: float
    eps: float
    delta: float
    big_m: int
    rho0: float
    rho_c: float
    rho_c_finite: bool
    method: str
    n_samples: int | None = None
    ci_half: tuple | None = None     # one-sigma binomial half widths


def _group_subset_law(tables, groups):
    """Scaled law of the total occupancy carried by a set of groups."""
    n = tables.N
    arr = np.zeros(n + 1)
    arr[0] = 1.0
    sc = 0.0
    for g in groups:
        arr, sc = _conv(arr, sc, tables.cstack[g][-1], tables.cscale[g][-1], n)
    return arr, sc


def _far_excess_law(tables, far_groups, big_m):
    """Joint scaled law D[s, c]: s = far total, c = far mass on modes with n > M."""
    n = tables.N
    D = np.zeros((n + 1, n + 1))
    D[0, 0] = 1.0
    sc = 0.0
    for g in far_groups:
        w, ws = tables.w_scaled[g]
        mult = int(tables.lattice.group_mult[g])
        for _ in range(mult):
            new = np.zeros_like(D)
            for v in range(n + 1):
                if w[v] == 0.0:
                    continue
                cs = v if v > big_m else 0
                new[v:, cs:] += w[v] * D[:n + 1 - v, :n + 1 - cs]
            mx = new.max()
            new /= mx
            sc += ws + math.log(mx)
            D = new
    return D, sc


def typicality_probs(tables, eps, delta, big_m, rho_c=None, method="exact",
                     n_samples=100_000, rng=None, tol=1e-9):
    """P(A_eps), P(B_{eps,delta}), P(C_{eps,delta,M}) for the occupation law.

    A: |n_0/V - rho_0| < eps with rho_0 = max(0, rho - rho_c);
    B: sum of occupancies over modes 0 < |k| < delta below eps*V;
    C: far-mode (|k| >= delta) mass carried by occupancies above M below eps*V.
    Exact via DP by default; "sample" uses the exact sampler and reports
    binomial one-sigma confidence half-widths.  When rho_c is infinite the
    report flags that the interpretation sits outside the proven regime
    (rho_0 is then 0).
    """
    lat = tables.lattice
    if np.any(np.isnan(lat.group_knorm)):
        raise ValueError("mode |k| values unknown; build the lattice from a dispersion")
    if rho_c is None:
        if lat.disp is None:
            raise ValueError("pass rho_c explicitly for artificial lattices")
        from .thermo import critical_density
        rho_c = critical_density(lat.disp, tables.weights, tol)
    finite = math.isfinite(rho_c)
    V = lat.volume
    rho = tables.N / V
    rho0 = max(0.0, rho - rho_c) if finite else 0.0

    near = [g for g in range(len(lat.group_eps))
            if lat.group_knorm[g] < delta]          # includes k = 0
    mid = [g for g in near if lat.group_knorm[g] > 0.0]
    far = [g for g in range(len(lat.group_eps)) if g not in near]

    if method == "exact":
        law0, _ = n0_law_and_mgf(tables, [0.0])
        m = np.arange(tables.N + 1)
        p_a = float(law0[np.abs(m / V - rho0) < eps].sum())

        sub, ssub = _group_subset_law(tables, mid)
        comp, scomp = _group_subset_law(tables, [g for g in range(len(lat.group_eps))
                                                 if g not in mid])
        s = np.arange(tables.N + 1)
        with np.errstate(divide="ignore"):
            joint = np.exp(np.log(sub) + np.log(comp[::-1]) + ssub + scomp - tables.log_Y)
        p_b = float(joint[s < eps * V].sum())

        D, sd = _far_excess_law(tables, far, big_m)
        nr, snr = _group_subset_law(tables, near)
        with np.errstate(divide="ignore"):
            wcol = np.exp(np.log(nr[::-1]) + snr + sd - tables.log_Y)
        cmask = np.arange(tables.N + 1) < eps * V
        p_c = float((D[:, cmask].sum(axis=1) * wcol).sum())
        return TypicalityReport(p_a, p_b, p_c, eps, delta, big_m, rho0, rho_c,
                                finite, "exact")

    if method != "sample":
        raise ValueError("method must be 'exact' or 'sample'")
    rng = np.random.default_rng() if rng is None else rng
    draws = sample_occupations_batch(tables, n_samples, rng)
    slices = lat.group_slices()
    i0 = slices[0].start
    p_a = float(np.mean(np.abs(draws[:, i0] / V - rho0) < eps))
    mid_cols = np.concatenate([np.arange(slices[g].start, slices[g].stop) for g in mid]) \
        if mid else np.empty(0, dtype=int)
    p_b = float(np.mean(draws[:, mid_cols].sum(axis=1) < eps * V)) if mid_cols.size else 1.0
    far_cols = np.concatenate([np.arange(slices[g].start, slices[g].stop) for g in far]) \
        if far else np.empty(0, dtype=int)
    if far_cols.size:
        fv = draws[:, far_cols]
        excess = np.where(fv > big_m, fv, 0).sum(axis=1)
        p_c = float(np.mean(excess < eps * V))
    else:
        p_c = 1.0
    ci = tuple(math.sqrt(max(p * (1 - p), 1e-12) / n_samples) for p in (p_a, p_b, p_c))
    return TypicalityReport(p_a, p_b, p_c, eps, delta, big_m, rho0, rho_c,
                            finite, "sample", n_samples, ci)


# ---------------------------------------------------------------------------
# volume scan of micro/meso/macroscopic cycle densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRow:
    L: float
    V: float
    N: int
    kind: str
    a: int
    b: int
    value: float
    target: float


@dataclass(frozen=True)
class MacroscopicScan:
    rho: float
    rho_c: float
    rho0: float
    eta_exponent: float
    rows: tuple

    def rows_of(self, kind, L=None):
        out = [r for r in self.rows if r.kind == kind and (L is None or r.L == L)]
        return out


def macroscopic_scan(disp, weights, rho, L_list, eta_exponent=0.5, s_grid=(),
                     delta_trunc=1e-10, tol=1e-9, progress=None):
    """Exact micro/meso/macroscopic cycle densities over a volume sequence.

    Per volume V = L^d with N = floor(rho V) and eta = V^gamma, the rows are
    the contiguous decomposition (1, A), (A+1, B), (B+1, ...) with A =
    floor(eta), B = floor(V/eta): "micro", "meso", "macro" (to min(floor(sV),
    N), one row per s) and "macro_all" (to N).  Row targets are the limiting
    values min(rho, rho_c), 0, min(s, rho0) and rho0; the three contiguous
    rows sum to the realized density N/V at every finite volume.
    """
    from .lattice import auto_lattice
    from .thermo import critical_density

    if not (0.0 < eta_exponent < 1.0):
        raise ValueError("eta exponent must lie in (0, 1)")
    rho_c = critical_density(disp, weights, tol)
    if not math.isfinite(rho_c):
        raise ValueError("macroscopic scan requires a finite critical density")
    rho0 = max(0.0, rho - rho_c)
    rows = []
    for L in L_list:
        V = float(L) ** disp.d
        N = int(math.floor(rho * V))
        eta = V ** eta_exponent
        A = int(math.floor(eta))
        B = int(math.floor(V / eta))
        lat = auto_lattice(L, disp.d, disp, delta_trunc)
        tables = partition_dp(lat, weights, N)
        if progress:
            progress(L, lat.n_modes, N)

        def cde(a, b):
            a = max(a, 1)
            b = min(b, N)
            if a > b or N == 0:
                return 0.0
            return cycle_density_expectation(tables, a, b)

        rows.append(ScanRow(L, V, N, "micro", 1, min(A, N), cde(1, A),
                            min(rho, rho_c)))
        rows.append(ScanRow(L, V, N, "meso", A + 1, min(B, N), cde(A + 1, B), 0.0))
        for s in s_grid:
            bs = int(math.floor(s * V))
            rows.append(ScanRow(L, V, N, f"macro_s={s:g}", B + 1, min(bs, N),
                                cde(B + 1, bs), min(s, rho0)))
        rows.append(ScanRow(L, V, N, "macro_all", B + 1, N, cde(B + 1, N), rho0))
    return MacroscopicScan(rho, rho_c, rho0, eta_exponent, tuple(rows))


# ---------------------------------------------------------------------------
# direct enumeration oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmallEnumeration:
    N: int
    Y: float
    occupation_dist: dict           # occupation tuple -> probability
    mode_laws: np.ndarray           # (n_modes, N+1)
    expected_by_length: np.ndarray  # E(ell * r_ell), index 0..N
    cycle_type_dist: dict           # sorted length tuple -> probability

    def expected_range_density(self, a, b, volume):
        if a > b:
            return 0.0
        return float(np.sum(self.expected_by_length[a:min(b, self.N) + 1])) / volume


def _cycles_of(perm):
    n = len(perm)
    seen = [False] * n
    out = []
    for i in range(n):
        if seen[i]:
            continue
        ell = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            ell += 1
        out.append(ell)
    return out


def enumerate_small(lattice, weights, N):
    """Brute-force law over (mode vector, permutation) pairs.

    Sums e^{-sum_i eps(k_i) - sum_ell alpha_ell r_ell} over permutations and
    compatible mode vectors (constant on cycles).  The state count is the
    rising factorial J(J+1)...(J+N-1); capped at 1e6.
    """
    J = lattice.n_modes
    states = 1
    for t in range(N):
        states *= J + t
    if states > _ENUM_CAP:
        raise SizeCapError(f"enumeration needs {states} states (cap {_ENUM_CAP})")
    if N == 0:
        return SmallEnumeration(0, 1.0, {(0,) * J: 1.0}, np.zeros((J, 1)),
                                np.zeros(1), {(): 1.0})
    alpha = weights.alpha_array(N)
    eps = lattice.eps
    z = 0.0
    occ = {}
    mode_laws = np.zeros((J, N + 1))
    mlen = np.zeros(N + 1)
    types = {}
    for perm in itertools.permutations(range(N)):
        lens = _cycles_of(perm)
        afac = math.exp(-sum(alpha[l - 1] for l in lens))
        tkey = tuple(sorted(lens, reverse=True))
        for assign in itertools.product(range(J), repeat=len(lens)):
            e = sum(l * eps[a] for l, a in zip(lens, assign))
            w = afac * math.exp(-e)
            z += w
            n = [0] * J
            for l, a in zip(lens, assign):
                n[a] += l
            key = tuple(n)
            occ[key] = occ.get(key, 0.0) + w
            for j in range(J):
                mode_laws[j, n[j]] += w
            for l in lens:
                mlen[l] += w * l
            types[tkey] = types.get(tkey, 0.0) + w
    y = z / math.factorial(N)
    occ = {k: v / z for k, v in occ.items()}
    types = {k: v / z for k, v in types.items()}
    return SmallEnumeration(N, y, occ, mode_laws / z, mlen / z, types)
