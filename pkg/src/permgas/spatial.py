"""Metropolis Monte Carlo on the periodized spatial permutation model.

Configurations are (x_1..x_N, pi) in a periodic box of side L with energy

    H(x, pi) = sum_i xi_L(x_i - x_{pi(i)}) + sum_ell alpha_ell r_ell(pi),

where xi_L is the image-sum periodization of a Gaussian jump potential.  The
chain mixes symmetric position displacements with transpositions pi -> pi
compose (i j); both proposals are symmetric so min(1, e^{-dH}) acceptance
satisfies detailed balance for the Gibbs measure.  Small instances are
cross-validated against the exactly solvable Fourier representation: for
every fixed permutation the configuration integral equals the truncated
dual-lattice sum, and chain averages of cycle statistics match the exact
occupation-number values.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .cycles import h_series
from .lattice import build_lattice
from .mcstats import mc_error
from .occupation import cycle_density_expectation, partition_dp
from .thermo import GaussianDispersion
from .weights import WeightSequence

__all__ = [
    "XiPotential", "SpatialState", "MCParams", "ChainResult",
    "CrossValidateCase", "CrossValidateReport",
    "periodized_xi", "hamiltonian", "mc_step", "run_chain", "cross_validate",
]


@dataclass(frozen=True)
class XiPotential:
    """Gaussian jump potential e^{-xi(x)} = (4 pi beta)^{-d/2} e^{-|x|^2 / 4 beta}.

    Normalized so int e^{-xi} = 1.  `m_img` is the per-axis image count used
    by the periodization; `image_tail_bound` certifies the dropped mass.
    """

    beta: float
    d: int
    m_img: int = 3

    def __post_init__(self):
        if self.beta <= 0 or self.d < 1 or self.m_img < 0:
            raise ValueError("need beta > 0, d >= 1, m_img >= 0")

    @classmethod
    def for_box(cls, beta, d, L, tol=1e-12):
        """Smallest m_img whose periodization remainder at the cell corner < tol."""
        for m in range(64):
            pot = cls(beta, d, m)
            if pot.image_tail_bound(L) < tol:
                return pot
        raise ValueError("no m_img <= 63 met the remainder target")

    def xi0(self):
        """xi(0) = (d/2) log(4 pi beta)."""
        return 0.5 * self.d * math.log(4.0 * math.pi * self.beta)

    def image_tail_bound(self, L):
        """Upper bound on the dropped image mass of e^{-xi_L}, worst x in the cell.

        Per axis, for |x| <= L/2 the term at image y has |x - L y| >=
        L(|y| - 1/2); summing the dropped |y| > m_img terms geometrically and
        combining axes (d identical factors, each bounded by its full sum).
        """
        pref = (4.0 * math.pi * self.beta) ** (-0.5)
        js = np.arange(self.m_img + 1, self.m_img + 41)
        tail1 = 2.0 * pref * float(np.sum(np.exp(-(L * (js - 0.5)) ** 2 / (4.0 * self.beta))))
        full1 = pref * float(np.sum(np.exp(-(L * np.arange(-self.m_img - 40, self.m_img + 41)) ** 2
                                           / (4.0 * self.beta)))) + tail1
        return self.d * tail1 * max(full1, 1.0) ** (self.d - 1)

    def to_dict(self):
        return {"beta": self.beta, "d": self.d, "m_img": self.m_img}


def periodized_xi(pot, x, L):
    """xi_L(x) = -log sum_{|y_i| <= m_img} e^{-xi(x - L y)}; x of shape (..., d).

    x is reduced to the fundamental cell internally.  The per-axis Gaussian
    factorizes, so the image sum is a product of d one-dimensional sums.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        if pot.d != 1:
            raise ValueError("scalar x only valid for d = 1")
        x = x.reshape(1)
    if x.shape[-1] != pot.d:
        raise ValueError(f"last axis must have length d = {pot.d}")
    dx = (x + L / 2.0) % L - L / 2.0
    offs = L * np.arange(-pot.m_img, pot.m_img + 1)
    z = dx[..., None] - offs
    s = np.exp(-z * z / (4.0 * pot.beta)).sum(axis=-1)
    pref = (4.0 * math.pi * pot.beta) ** (-0.5)
    val = np.prod(pref * s, axis=-1)
    out = -np.log(val)
    return float(out) if out.ndim == 0 else out


class SpatialState:
    """Mutable chain state: positions, permutation, and incremental caches.

    Caches: per-index jump energies xi_L(x_i - x_{pi(i)}), the inverse
    permutation, and the cycle-length tally r_ell.  `hamiltonian` recomputes
    from scratch; the cached value must agree after any step sequence.
    """

    __slots__ = ("positions", "perm", "iperm", "L", "pot", "jump_e", "r_tally")

    def __init__(self, positions, perm, pot, L):
        self.positions = np.asarray(positions, dtype=float) % L
        self.perm = np.asarray(perm, dtype=int)
        n = len(self.perm)
        if self.positions.shape != (n, pot.d):
            raise ValueError("positions must have shape (N, d)")
        if sorted(self.perm.tolist()) != list(range(n)):
            raise ValueError("perm must be a permutation of 0..N-1")
        self.iperm = np.argsort(self.perm)
        self.L = float(L)
        self.pot = pot
        self.jump_e = periodized_xi(pot, self.positions - self.positions[self.perm], L)
        self.r_tally = np.zeros(n + 1, dtype=int)
        for ell in self.cycle_lengths():
            self.r_tally[ell] += 1

    @classmethod
    def random(cls, N, L, pot, rng, identity=True):
        pos = rng.random((N, pot.d)) * L
        perm = np.arange(N) if identity else rng.permutation(N)
        return cls(pos, perm, pot, L)

    @property
    def N(self):
        return len(self.perm)

    def cycle_lengths(self):
        seen = np.zeros(self.N, dtype=bool)
        out = []
        for i in range(self.N):
            if seen[i]:
                continue
            ell = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = self.perm[j]
                ell += 1
            out.append(ell)
        return out

    def nab(self, a, b):
        """N_{a,b}: indices in cycles of length between a and b."""
        ells = np.arange(self.N + 1)
        mask = (ells >= a) & (ells <= b)
        return int(np.sum(ells[mask] * self.r_tally[mask]))

    def cached_energy(self, weights):
        cyc = 0.0
        for ell in np.nonzero(self.r_tally)[0]:
            if ell:
                cyc += float(weights.alpha(int(ell))) * self.r_tally[ell]
        return float(self.jump_e.sum()) + cyc


def hamiltonian(state, pot, weights):
    """H(x, pi) recomputed from scratch (jump terms plus cycle weights)."""
    jumps = periodized_xi(pot, state.positions - state.positions[state.perm], state.L)
    cyc = 0.0
    for ell in state.cycle_lengths():
        cyc += float(weights.alpha(ell))
    return float(np.sum(jumps)) + cyc


@dataclass(frozen=True)
class MCParams:
    """Chain schedule and proposal mix. Displacements use sigma_x (default L/10,
    auto-tuned to 30-50% acceptance during burn-in only); `p_displacement` is
    the probability of a displacement proposal vs a transposition."""

    burn_in: int
    samples: int
    thinning: int = 1
    sigma_x: float | None = None
    p_displacement: float = 0.5
    seed: int = 0
    ab_pairs: tuple = ()
    tune: bool = True

    def __post_init__(self):
        if not (0.0 <= self.p_displacement <= 1.0):
            raise ValueError("p_displacement must lie in [0, 1]")
        if self.sigma_x is not None and self.sigma_x <= 0:
            raise ValueError("sigma_x must be positive")
        if min(self.burn_in, self.samples, self.thinning) < 0 or self.thinning == 0:
            raise ValueError("invalid step counts")


def _split_info(perm, i, j):
    """Whether i, j share a cycle; the split lengths (t, ell-t) or (ell_i, ell_j)."""
    t = None
    ell = 1
    k = perm[i]
    while k != i:
        if k == j:
            t = ell
        ell += 1
        k = perm[k]
    if t is not None:
        return True, ell, t
    ellj = 1
    k = perm[j]
    while k != j:
        ellj += 1
        k = perm[k]
    return False, ell, ellj


def mc_step(state, pot, weights, params, rng, sigma=None):
    """One Metropolis proposal (in place); returns (kind, accepted).

    Displacement: x_i += Normal(0, sigma^2)^d mod L, changing the two jump
    terms at i.  Transposition: pi -> pi o (i j), changing two jump terms and
    merging two cycles or splitting one; cycle-weight change
    alpha_{l1+l2} - alpha_{l1} - alpha_{l2} or its negative.  Both proposals
    are symmetric, acceptance min(1, e^{-dH}).
    """
    n = state.N
    L = state.L
    sigma = sigma if sigma is not None else (params.sigma_x or L / 10.0)
    if rng.random() < params.p_displacement:
        i = int(rng.integers(n))
        prop = (state.positions[i] + sigma * rng.standard_normal(pot.d)) % L
        pi_i = state.perm[i]
        ip_i = state.iperm[i]
        if pi_i == i:
            d_h = 0.0
            new_fwd = new_bwd = None
        else:
            new_fwd = float(periodized_xi(pot, prop - state.positions[pi_i], L))
            new_bwd = float(periodized_xi(pot, state.positions[ip_i] - prop, L))
            d_h = new_fwd + new_bwd - state.jump_e[i] - state.jump_e[ip_i]
        if d_h <= 0.0 or rng.random() < math.exp(-d_h):
            state.positions[i] = prop
            if pi_i != i:
                state.jump_e[i] = new_fwd
                state.jump_e[ip_i] = new_bwd
            return "disp", True
        return "disp", False

    if n < 2:
        return "swap", False
    i = int(rng.integers(n))
    j = int(rng.integers(n - 1))
    if j >= i:
        j += 1
    pi_i, pi_j = state.perm[i], state.perm[j]
    new_ei = float(periodized_xi(pot, state.positions[i] - state.positions[pi_j], L))
    new_ej = float(periodized_xi(pot, state.positions[j] - state.positions[pi_i], L))
    d_jump = new_ei + new_ej - state.jump_e[i] - state.jump_e[j]
    same, ell, other = _split_info(state.perm, i, j)
    if same:
        l1, l2 = other, ell - other
        d_cyc = float(weights.alpha(l1)) + float(weights.alpha(l2)) - float(weights.alpha(ell))
    else:
        l1, l2 = ell, other
        d_cyc = float(weights.alpha(l1 + l2)) - float(weights.alpha(l1)) - float(weights.alpha(l2))
    d_h = d_jump + d_cyc
    if d_h <= 0.0 or rng.random() < math.exp(-d_h):
        state.perm[i], state.perm[j] = pi_j, pi_i
        state.iperm[pi_j], state.iperm[pi_i] = i, j
        state.jump_e[i], state.jump_e[j] = new_ei, new_ej
        if same:
            state.r_tally[ell] -= 1
            state.r_tally[l1] += 1
            state.r_tally[l2] += 1
        else:
            state.r_tally[l1] -= 1
            state.r_tally[l2] -= 1
            state.r_tally[l1 + l2] += 1
        return "swap", True
    return "swap", False


@dataclass(frozen=True)
class ChainResult:
    """Recorded observables after burn-in, one row per retained sample."""

    params: MCParams
    energies: np.ndarray
    cycle_counts: np.ndarray
    nab: np.ndarray            # (samples, len(ab_pairs))
    r_tallies: np.ndarray      # (samples, N+1)
    sigma_final: float
    accept_disp: float
    accept_swap: float

    def error_bars(self):
        """Integrated-autocorrelation error bars per scalar observable."""
        out = {"energy": mc_error(self.energies),
               "cycle_count": mc_error(self.cycle_counts)}
        for idx, (a, b) in enumerate(self.params.ab_pairs):
            out[f"N_{a}_{b}"] = mc_error(self.nab[:, idx])
        return out


def run_chain(state, pot, weights, params):
    """Run the Metropolis chain; deterministic under the params seed.

    Burn-in first (with sigma auto-tuning toward 30-50% displacement
    acceptance when enabled, frozen afterward to preserve stationarity), then
    `samples` records spaced by `thinning` steps.
    """
    rng = np.random.default_rng(params.seed)
    sigma = params.sigma_x or state.L / 10.0
    window_acc = window_tot = 0
    for step in range(params.burn_in):
        kind, acc = mc_step(state, pot, weights, params, rng, sigma)
        if kind == "disp":
            window_tot += 1
            window_acc += acc
        if params.tune and window_tot >= 200:
            rate = window_acc / window_tot
            if rate < 0.30:
                sigma = max(sigma / 1.25, 1e-4 * state.L)
            elif rate > 0.50:
                sigma = min(sigma * 1.25, state.L)
            window_acc = window_tot = 0

    n_obs = params.samples
    pairs = params.ab_pairs
    energies = np.empty(n_obs)
    counts = np.empty(n_obs, dtype=int)
    nab = np.empty((n_obs, len(pairs)), dtype=int)
    tallies = np.empty((n_obs, state.N + 1), dtype=np.int32)
    acc_d = tot_d = acc_s = tot_s = 0
    for rec in range(n_obs):
        for _ in range(params.thinning):
            kind, acc = mc_step(state, pot, weights, params, rng, sigma)
            if kind == "disp":
                tot_d += 1
                acc_d += acc
            else:
                tot_s += 1
                acc_s += acc
        energies[rec] = state.cached_energy(weights)
        counts[rec] = int(state.r_tally.sum())
        for idx, (a, b) in enumerate(pairs):
            nab[rec, idx] = state.nab(a, b)
        tallies[rec] = state.r_tally
    return ChainResult(params, energies, counts, nab, tallies, sigma,
                       acc_d / tot_d if tot_d else math.nan,
                       acc_s / tot_s if tot_s else math.nan)


# ---------------------------------------------------------------------------
# spatial <-> Fourier cross-validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrossValidateCase:
    """Small instance for the two-sided check; d = 1 and N <= 3 only."""

    L: float
    N: int
    beta: float
    weights: WeightSequence
    grid_points: int = 256
    eps_cut: float = 30.0
    delta_trunc: float = 1e-8
    ab: tuple = (2, 2)
    mc: MCParams | None = None


@dataclass(frozen=True)
class CrossValidateReport:
    rows: tuple          # (perm, integral, lattice_sum, diff, bound) per permutation
    y_integral: float
    y_lattice: float
    exact_value: float   # E(rho_{a,b}) from the occupation DP
    mc_value: float | None
    mc_error: float | None
    mc_tau: float | None

    def max_violation(self):
        return max((r[3] - r[4] for r in self.rows), default=0.0)


def _perm_integrals_grid(pot, L, N, m_points):
    """Per-cycle-length traces of the periodized kernel on an m-point grid.

    The trapezoid rule on the torus is a plain average over the uniform grid;
    tr(W^ell) with W = (L/m) e^{-xi_L(g_a - g_b)} is exactly the tensor-grid
    value of the cycle integral, evaluated through the eigenvalues of W.
    """
    g = L * np.arange(m_points) / m_points
    diff = g[:, None] - g[None, :]
    k = np.exp(-periodized_xi(pot, diff[..., None], L))
    w = (L / m_points) * k
    eig = np.linalg.eigvalsh(w)
    return {ell: float(np.sum(eig ** ell)) for ell in range(1, N + 1)}


def cross_validate(case):
    """Per-permutation integral vs dual-lattice sum, plus MC vs exact values.

    For each pi in S_N the configuration integral int e^{-H(x, pi)} dx equals
    sum over compatible mode vectors of e^{-H_hat(k, pi)}; both sides are
    computed with explicit quadrature and truncation bounds.  Then a chain
    estimate of E(rho_{a,b}) is compared against the exact occupation-DP
    value.
    """
    if case.N > 3:
        raise ValueError("cross_validate is restricted to N <= 3")
    L, N, beta, w = case.L, case.N, case.beta, case.weights
    disp = GaussianDispersion(beta, 1)
    pot = XiPotential.for_box(beta, 1, L, tol=1e-14)
    lat = build_lattice(L, 1, disp, case.eps_cut, case.delta_trunc)

    tr_full = _perm_integrals_grid(pot, L, N, case.grid_points)
    tr_half = _perm_integrals_grid(pot, L, N, case.grid_points // 2)
    lat_sums = {}
    lat_bounds = {}
    for ell in range(1, N + 1):
        s = float(np.dot(lat.group_mult, np.exp(-ell * lat.group_eps)))
        lat_sums[ell] = s
        lat_bounds[ell] = lat.certificate * math.exp(-(ell - 1) * lat.eps_cut)

    rows = []
    y_int = y_lat = 0.0
    for perm in itertools.permutations(range(N)):
        lens = _cycles_of_perm(perm)
        afac = math.exp(-sum(float(w.alpha(l)) for l in lens))
        lhs = afac * math.prod(tr_full[l] for l in lens)
        lhs_half = afac * math.prod(tr_half[l] for l in lens)
        rhs = afac * math.prod(lat_sums[l] for l in lens)
        rhs_hi = afac * math.prod(lat_sums[l] + lat_bounds[l] for l in lens)
        bound = abs(lhs - lhs_half) + (rhs_hi - rhs) + 1e-12 * max(abs(lhs), abs(rhs), 1.0)
        rows.append((perm, lhs, rhs, abs(lhs - rhs), bound))
        y_int += lhs
        y_lat += rhs
    fact = math.factorial(N)
    y_int /= fact
    y_lat /= fact

    tables = partition_dp(lat, w, N)
    a, b = case.ab
    exact = cycle_density_expectation(tables, a, b)

    mc_val = mc_err = mc_tau = None
    if case.mc is not None:
        rng = np.random.default_rng(case.mc.seed)
        state = SpatialState.random(N, L, pot, rng)
        params = case.mc if case.mc.ab_pairs else \
            dataclasses.replace(case.mc, ab_pairs=((a, b),))
        res = run_chain(state, pot, w, params)
        dens = res.nab[:, 0] / L
        mc_val, mc_err, mc_tau, _ = mc_error(dens)
    return CrossValidateReport(tuple(rows), y_int, y_lat, exact, mc_val, mc_err, mc_tau)


def _cycles_of_perm(perm):
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
