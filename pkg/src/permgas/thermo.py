"""Dispersion relations and infinite-volume thermodynamics.

The grand-canonical pressure of the spatial cycle-weight model is

    p(mu) = sum_{n>=1} e^{mu n - alpha_n} / n * I_n,   I_n = int e^{-n eps(k)} d^d k,

finite and analytic for mu below the linear growth rate of the weights and
infinite above it.  Its derivative is the density, the critical density is
rho_c = sum_n e^{-alpha_n} I_n, and the canonical free energy q(rho) is the
Legendre transform sup_mu [rho mu - p(mu)], flat beyond rho_c.

Mode integrals I_n are reduced to 1-D radial quadrature; series are truncated
with explicit geometric/polynomial envelopes built from the quadratic lower
bound eps(k) >= a |k|^2 near 0, or completed by Euler-Maclaurin at the
mu -> rate endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import QuadratureError, UnboundedSearchError
from .summation import euler_maclaurin_tail, geometric_poly_tail
from .weights import WeightSequence

__all__ = [
    "GaussianDispersion", "TabulatedDispersion", "DualityReport", "ThermoResult",
    "sphere_area", "critical_density", "pressure", "density", "free_energy",
    "pressure_periodic_finite", "duality_and_shift_check", "thermo_curves",
]


def sphere_area(d):
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


# ---------------------------------------------------------------------------
# dispersions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianDispersion:
    """eps(k) = 4 pi^2 beta |k|^2, the Fourier energy of a normalized Gaussian jump."""

    beta: float
    d: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    kind = "gaussian"

    def __post_init__(self):
        if self.beta <= 0 or self.d < 1:
            raise ValueError("need beta > 0 and d >= 1")

    def eps_radial(self, r):
        return 4.0 * math.pi ** 2 * self.beta * np.asarray(r, dtype=float) ** 2

    @property
    def quad_a(self):
        """Coefficient of the global quadratic lower bound eps >= a |k|^2."""
        return 4.0 * math.pi ** 2 * self.beta

    @property
    def quad_radius(self):
        return math.inf

    def eps_floor_outside(self):
        """No spill region: the quadratic bound is global."""
        return None

    def radius_at_energy(self, e):
        return math.sqrt(e / self.beta) / (2.0 * math.pi)

    def _base_integral(self):
        cached = self._cache.get("I1")
        if cached is None:
            s = sphere_area(self.d)
            val, err = quad(lambda r: r ** (self.d - 1) * math.exp(-self.eps_radial(r)),
                            0.0, np.inf, limit=200, epsabs=1e-14, epsrel=1e-12)
            cached = (s * val, s * abs(err))
            self._cache["I1"] = cached
        return cached

    def mode_integral(self, n):
        """(value, error) of int e^{-n eps(k)} d^d k; exact n^{-d/2} rescaling."""
        i1, e1 = self._base_integral()
        f = float(n) ** (-self.d / 2.0)
        return i1 * f, e1 * f

    def mode_integrals_log(self, ns):
        i1, e1 = self._base_integral()
        ns = np.asarray(ns, dtype=float)
        logv = math.log(i1) - 0.5 * self.d * np.log(ns)
        errs = e1 * ns ** (-self.d / 2.0)
        return logv, errs

    def to_dict(self):
        return {"kind": "gaussian", "d": self.d, "beta": self.beta}


@dataclass(frozen=True)
class TabulatedDispersion:
    """Radial dispersion given on a grid, linearly interpolated.

    Requires a user-declared quadratic lower bound eps(k) >= quad_a * k^2 for
    k <= quad_radius, verified on the grid at construction (refused
    otherwise); beyond the last grid point the final segment is extended
    linearly, so its slope must be positive.
    """

    d: int
    k_grid: tuple
    eps_grid: tuple
    quad_a: float
    quad_radius: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    kind = "tabulated"

    def __post_init__(self):
        k = np.asarray(self.k_grid, dtype=float)
        e = np.asarray(self.eps_grid, dtype=float)
        if k.size != e.size or k.size < 2:
            raise ValueError("grids must have equal length >= 2")
        if k[0] != 0.0 or e[0] != 0.0:
            raise ValueError("grid must start at (0, 0): eps(0) = 0")
        if np.any(np.diff(k) <= 0):
            raise ValueError("k grid must be strictly increasing")
        if np.any(np.diff(e) < 0):
            raise ValueError("eps grid must be nondecreasing")
        if np.any(e[1:] <= 0):
            raise ValueError("eps must be positive away from k = 0")
        if e[-1] <= e[-2]:
            raise ValueError("final segment must have positive slope")
        if not (self.quad_a > 0 and self.quad_radius > 0):
            raise ValueError("need a declared quadratic bound (a > 0, radius > 0)")
        inside = k <= self.quad_radius
        if not np.all(e[inside] >= self.quad_a * k[inside] ** 2 - 1e-15):
            raise ValueError("declared quadratic bound fails on the grid; refusing")
        object.__setattr__(self, "k_grid", tuple(float(x) for x in k))
        object.__setattr__(self, "eps_grid", tuple(float(x) for x in e))

    def eps_radial(self, r):
        r = np.asarray(r, dtype=float)
        k = np.asarray(self.k_grid)
        e = np.asarray(self.eps_grid)
        out = np.interp(r, k, e)
        slope = (e[-1] - e[-2]) / (k[-1] - k[-2])
        beyond = r > k[-1]
        if np.any(beyond):
            out = np.where(beyond, e[-1] + slope * (r - k[-1]), out)
        return out

    def eps_floor_outside(self):
        """Minimum of eps outside the declared quadratic-bound radius."""
        if math.isinf(self.quad_radius):
            return None
        return float(self.eps_radial(min(self.quad_radius, self.k_grid[-1])))

    def radius_at_energy(self, e):
        k = np.asarray(self.k_grid)
        eps = np.asarray(self.eps_grid)
        if e <= eps[-1]:
            return float(np.interp(e, eps, k))
        slope = (eps[-1] - eps[-2]) / (k[-1] - k[-2])
        return float(k[-1] + (e - eps[-1]) / slope)

    def mode_integral(self, n):
        key = float(n)
        cached = self._cache.get(key)
        if cached is None:
            s = sphere_area(self.d)
            kmax = self.k_grid[-1]
            f = lambda r: r ** (self.d - 1) * math.exp(-key * float(self.eps_radial(r)))
            v1, e1 = quad(f, 0.0, kmax, limit=200, epsabs=1e-14, epsrel=1e-12)
            v2, e2 = quad(f, kmax, np.inf, limit=200, epsabs=1e-14, epsrel=1e-12)
            cached = (s * (v1 + v2), s * (abs(e1) + abs(e2)))
            self._cache[key] = cached
        return cached

    def mode_integrals_log(self, ns):
        vals = np.empty(len(ns))
        errs = np.empty(len(ns))
        for i, n in enumerate(np.asarray(ns, dtype=float)):
            v, e = self.mode_integral(n)
            vals[i] = math.log(v)
            errs[i] = e
        return vals, errs

    def to_dict(self):
        return {"kind": "tabulated", "d": self.d, "k": list(self.k_grid),
                "eps": list(self.eps_grid), "a": self.quad_a, "radius": self.quad_radius}


def dispersion_from_dict(d):
    if d.get("kind") == "gaussian":
        return GaussianDispersion(beta=float(d["beta"]), d=int(d["d"]))
    if d.get("kind") == "tabulated":
        return TabulatedDispersion(d=int(d["d"]), k_grid=tuple(d["k"]), eps_grid=tuple(d["eps"]),
                                   quad_a=float(d["a"]), quad_radius=float(d["radius"]))
    raise ValueError(f"unknown dispersion kind {d.get('kind')!r}")


# ---------------------------------------------------------------------------
# convergence classification of sum e^{mu n - alpha_n} n^s
# ---------------------------------------------------------------------------

def _series_converges(w, mu, s):
    """Whether sum_n e^{mu n - alpha_n} n^s converges, decided from the tail family."""
    kind, lam, c, q = w.growth()
    r = mu - lam
    if kind == "power":
        if q > 1.0:
            return c > 0
        if r < 0:
            return True
        if r > 0:
            return False
        return c > 0
    if r < 0:
        return True
    if r > 0:
        return False
    if kind == "log":
        if q > 1.0:
            return c > 0
        if q == 1.0:
            return s - c < -1.0
        return (s < -1.0) or (s == -1.0 and c > 0)
    return s < -1.0


# ---------------------------------------------------------------------------
# series evaluator with cached mode integrals
# ---------------------------------------------------------------------------

class _SeriesEvaluator:
    """Cached evaluation state for sums e^{mu n - alpha_n} n^extra I_n."""

    _MAX_TERMS = 50_000_000

    def __init__(self, disp, weights):
        self.disp = disp
        self.w = weights
        self._n = 0
        self._alpha = np.empty(0)
        self._logn = np.empty(0)
        self._logI = np.empty(0)
        self._Ierr = np.empty(0)

    def _extend(self, n):
        if n <= self._n:
            return
        ns = np.arange(self._n + 1, n + 1)
        self._alpha = np.concatenate([self._alpha, self.w.alpha(ns)])
        self._logn = np.concatenate([self._logn, np.log(ns)])
        logi, ierr = self.disp.mode_integrals_log(ns)
        self._logI = np.concatenate([self._logI, logi])
        self._Ierr = np.concatenate([self._Ierr, ierr])
        self._n = n

    # -- tail machinery ----------------------------------------------------
    def _envelope(self, n_start):
        """(A, padd, r_halved) with e^{-g_n} <= A n^padd for n > n_start.

        g is the sublinear part of alpha.  For stretched-exponentially growing
        negative weights no polynomial envelope exists; the caller then gives
        up half the geometric rate instead (r_halved=True signals that mode).
        """
        kind, lam, c, q = self.w.growth()
        if kind == "power" and c < 0 and 0 < q < 1:
            return 1.0, 0.0, True
        if kind == "log" and c < 0:
            # e^{|c| (log n)^q} <= n^{|c|} for q <= 1
            return 1.0, abs(c), False
        g_min = self.w.min_g_beyond(n_start)
        return math.exp(-g_min), 0.0, False

    def _tail_bound(self, mu, extra, n_start):
        """Certified bound on the discarded tail past n_start, or None (keep going)."""
        d = self.disp.d
        kind, lam, c, q = self.w.growth()
        r = mu - lam
        kappa = (math.pi / self.disp.quad_a) ** (d / 2.0)
        if kind == "power" and c > 0 and q > 1.0:
            # superlinearly growing weights: exponent phi(n) = mu n - alpha_n
            # eventually decreases faster than any fixed rate
            n1 = n_start + 1
            omega = c * q * n1 ** (q - 1.0) - mu
            if omega < 0.7:
                return None
            phi = mu * n1 - float(self.w.alpha(n1))
            poly = n1 ** max(extra - d / 2.0, 0.0) * kappa
            return poly * math.exp(phi) / -math.expm1(-omega) * 2.0
        if r >= 0:
            return None
        A, padd, halved = self._envelope(n_start)
        r_eff = r
        if halved:
            n0 = (2.0 * abs(c) / abs(r)) ** (1.0 / (1.0 - q))
            if n_start < n0:
                return None
            A, r_eff = 1.0, r / 2.0
        x = math.exp(r_eff)
        t1 = geometric_poly_tail(x, extra - d / 2.0 + padd, n_start)
        if t1 is None:
            return None
        total = A * kappa * t1
        eps0 = self.disp.eps_floor_outside()
        if eps0 is not None:
            i1, _ = self.disp.mode_integral(1)
            x2 = math.exp(r_eff - eps0)
            t2 = geometric_poly_tail(x2, extra + padd, n_start)
            if t2 is None:
                return None
            total += A * i1 * math.exp(eps0) * t2
        return total

    # -- main entry ----------------------------------------------------------
    def series(self, mu, extra, tol):
        """(value, error bound) of sum_{n>=1} e^{mu n - alpha_n} n^extra I_n."""
        d = self.disp.d
        if not _series_converges(self.w, mu, extra - d / 2.0):
            return math.inf, 0.0
        kind, lam, c, q = self.w.growth()
        r = mu - lam
        if r == 0.0 and not (kind == "power" and c > 0 and q > 1.0):
            return self._series_endpoint(mu, extra, tol)

        total = 0.0
        err = 0.0
        n_done = 0
        block = 64
        while True:
            self._extend(n_done + block)
            sl = slice(n_done, n_done + block)
            ns = np.arange(n_done + 1, n_done + block + 1)
            expo = mu * ns - self._alpha[sl] + extra * self._logn[sl]
            with np.errstate(over="raise"):
                total += float(np.sum(np.exp(expo + self._logI[sl])))
                err += float(np.sum(np.exp(expo) * self._Ierr[sl]))
            n_done += block
            tb = self._tail_bound(mu, extra, n_done)
            if tb is not None and tb < tol / 2.0:
                return total, err + tb
            block = min(2 * block, 1 << 20)
            if n_done > self._MAX_TERMS:
                raise QuadratureError(
                    f"series at mu={mu} did not meet tol={tol} within {n_done} terms")

    def _series_endpoint(self, mu, extra, tol):
        """Endpoint mu == growth rate: exact head plus Euler-Maclaurin tail."""
        disp, w = self.disp, self.w
        shift = w.shift

        def f(x):
            a_cont = float(w.tail.value(np.asarray(x, dtype=float))) + shift * x
            iv, _ = disp.mode_integral(x)
            return math.exp(mu * x - a_cont) * x ** extra * iv

        n0 = len(self.w.explicit)
        m = max(256, n0 + 8)
        while True:
            self._extend(m)
            ns = np.arange(1, m + 1)
            expo = mu * ns - self._alpha[:m] + extra * self._logn[:m]
            head = float(np.sum(np.exp(expo + self._logI[:m])))
            err = float(np.sum(np.exp(expo) * self._Ierr[:m]))
            tail, terr = euler_maclaurin_tail(f, m + 1)
            if terr <= tol / 2.0:
                return head + tail, err + terr
            if m > 1 << 22:
                raise QuadratureError(
                    f"endpoint series tail error {terr:g} exceeds tol={tol:g}")
            m *= 4


@lru_cache(maxsize=128)
def _evaluator(disp, weights):
    return _SeriesEvaluator(disp, weights)


# ---------------------------------------------------------------------------
# public thermodynamic functions
# ---------------------------------------------------------------------------

def critical_density(disp, weights, tol=1e-9):
    """rho_c = sum_n e^{-alpha_n} int e^{-n eps(k)} dk, or +inf.

    The formula is stated in the normalization alpha_ell/ell -> 0; for
    weights carrying a linear part c*ell it evaluates literally (then equal
    to the density at chemical potential -c), while the density at which the
    free energy flattens is `saturation_density`.  The divergence test
    (quadratic dispersion near 0 with non-vanishing weights in d <= 2) and
    its generalizations are decided from the tail family before summation.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    val, err = _evaluator(disp, weights).series(0.0, 0, tol)
    if math.isfinite(val) and err > tol:
        raise QuadratureError(f"critical density error bound {err:g} exceeds tol {tol:g}")
    return val


def saturation_density(disp, weights, tol=1e-9):
    """sup of the grand-canonical density: p'(mu) at the endpoint mu = rate.

    Coincides with critical_density in the alpha_ell/ell -> 0 normalization;
    shift-covariant in general.
    """
    lam = weights.linear_rate()
    val, _ = _evaluator(disp, weights).series(lam, 0, tol)
    return val


def pressure(disp, weights, mu, tol=1e-9):
    """p(mu) = sum_n e^{mu n - alpha_n}/n * I_n; +inf beyond the weight growth rate.

    The endpoint mu == rate is evaluated as the increasing limit (the value
    converges there; only the density derivative may blow up).
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    val, err = _evaluator(disp, weights).series(float(mu), -1, tol)
    if math.isfinite(val) and err > tol:
        raise QuadratureError(f"pressure error bound {err:g} exceeds tol {tol:g}")
    return val


def density(disp, weights, mu, tol=1e-9):
    """p'(mu) = sum_n e^{mu n - alpha_n} I_n, the grand-canonical density."""
    val, _ = _evaluator(disp, weights).series(float(mu), 0, tol)
    return val


def free_energy(disp, weights, rho, tol=1e-9):
    """q(rho) = sup_mu [rho mu - p(mu)] by 1-D concave maximization.

    Below rho_c the maximizer solves p'(mu) = rho (derivative bisection on a
    bracket); at and beyond rho_c the supremum saturates at the endpoint and
    q continues flat: q(rho) = rho*lam - p(lam) with lam the weight growth
    rate (lam = 0 for unshifted weights).
    """
    if rho < 0:
        raise ValueError("rho must be >= 0")
    if rho == 0.0:
        return 0.0
    lam = weights.linear_rate()
    rc = saturation_density(disp, weights, min(tol, 1e-9))
    if math.isfinite(rc) and rho >= rc:
        return rho * lam - pressure(disp, weights, lam, tol)

    dens = lambda m: density(disp, weights, m, tol=min(tol * max(rho, 1e-3) * 0.1, 1e-10))
    # bracket the root of p'(mu) = rho
    lo = lam - 1.0
    tries = 0
    while dens(lo) >= rho:
        lo = lam - 2.0 * (lam - lo)
        tries += 1
        if tries > 60:
            raise UnboundedSearchError(
                "no lower bracket for p'(mu) = rho",
                {"rho": rho, "mu_last": lo, "density_last": dens(lo)})
    gap = 1.0
    hi = lam - gap
    tries = 0
    while dens(hi) <= rho:
        gap *= 0.5
        hi = lam - gap
        tries += 1
        if gap < 1e-13:
            # numerically at the critical point: flat continuation
            return rho * lam - pressure(disp, weights, lam, tol)
    mu_star = brentq(lambda m: dens(m) - rho, lo, hi, xtol=1e-12, rtol=8.9e-16)
    return rho * mu_star - pressure(disp, weights, mu_star, tol)


def pressure_periodic_finite(disp, weights, L, mu, tol=1e-9):
    """Finite-volume periodic pressure (1/V) sum_n e^{mu n - alpha_n}/n sum_{k in L*} e^{-n eps(k)}.

    The dual-lattice sum runs over (1/L)Z^d truncated with the discarded-mass
    certificate of the mode lattice; converges to pressure(mu) as L grows.
    """
    from .lattice import auto_lattice

    lam = weights.linear_rate()
    if not (mu < lam):
        raise ValueError("periodic pressure needs mu below the weight growth rate")
    d = disp.d
    V = float(L) ** d
    lat = auto_lattice(L, d, disp, delta_trunc=tol * 0.1)
    eps_g = lat.group_eps
    mult = lat.group_mult.astype(float)
    s1 = float(np.dot(mult, np.exp(-eps_g)))
    r = mu - lam
    total = 0.0
    n = 0
    block = 64
    w = weights
    while True:
        ns = np.arange(n + 1, n + block + 1)
        lattice_sums = np.exp(-np.outer(ns, eps_g)) @ mult
        terms = np.exp(mu * ns - w.alpha(ns)) / ns * lattice_sums
        total += float(terms.sum())
        n += block
        a_env = math.exp(-min(0.0, w.min_g_beyond(n)))
        # lattice sum is at most 1 + (S(1)-1) e^{-(n-1) eps_1} <= S(1); crude geometric bound
        tail = a_env * s1 * math.exp(r * (n + 1)) / ((n + 1) * -math.expm1(r))
        if tail < tol / 2.0:
            break
        block = min(2 * block, 1 << 16)
    # discarded modes: sum_n e^{r n}/n * cert * e^{-(n-1) cut}
    cert_term = lat.certificate * math.exp(r) / -math.expm1(r - lat.eps_cut)
    if cert_term >= tol:
        raise QuadratureError(f"periodic truncation slack {cert_term:g} exceeds tol {tol:g}")
    return total / V


# ---------------------------------------------------------------------------
# Legendre duality checks and curve bundles
# ---------------------------------------------------------------------------

def _legendre_max(xs, fs, slope):
    """max_i [slope*x_i - f_i] over a grid."""
    return float(np.max(slope * xs - fs))


@dataclass(frozen=True)
class DualityReport:
    mu_grid: np.ndarray
    rho_grid: np.ndarray
    p_values: np.ndarray
    q_values: np.ndarray
    p_from_q_residual: float    # max_mu |p(mu) - max_rho[rho mu - q(rho)]|
    p_from_q_bound: float       # grid-resolution bound for that residual
    q_biconjugate_residual: float  # max_rho |q - LT(LT(q))| (slope range capped by mu grid)
    shift_p_residual: float     # p(mu; alpha + c ell) vs p(mu - c; alpha)
    shift_q_residual: float     # q(rho; alpha + c ell) vs q(rho) + c rho
    c: float


def duality_and_shift_check(disp, weights, mu_grid, rho_grid, c, tol=1e-8):
    """Verify equivalence of ensembles and the linear-shift covariance on grids.

    p(mu) = max_rho [rho mu - q(rho)] is checked within a grid-resolution
    bound (curvature times grid-step squared); the q-side biconjugate is
    reported as well, limited by the slope range of the mu grid.  Shift
    covariance: q(rho; alpha + c ell) = q(rho) + c rho and
    p(mu; alpha + c ell) = p(mu - c; alpha).
    """
    mu_grid = np.asarray(mu_grid, dtype=float)
    rho_grid = np.asarray(rho_grid, dtype=float)
    p_vals = np.array([pressure(disp, weights, m, tol) for m in mu_grid])
    q_vals = np.array([free_energy(disp, weights, r, tol) for r in rho_grid])

    p_hat = np.array([_legendre_max(rho_grid, q_vals, m) for m in mu_grid])
    res_p = float(np.max(np.abs(p_hat - p_vals)))
    # curvature bound: sup over rho between grid points loses <= q'' (drho/2)^2 / 2
    if len(rho_grid) > 2:
        d2 = np.diff(q_vals, 2)
        h2 = np.diff(rho_grid)[:-1] ** 2
        qpp = np.max(np.abs(d2 / h2)) if np.all(h2 > 0) else 0.0
        drho = np.max(np.diff(rho_grid))
        bound_p = 0.5 * qpp * (drho / 2.0) ** 2 * 2.0 + 2.0 * tol
    else:
        bound_p = 2.0 * tol
    q_hat = np.array([_legendre_max(mu_grid, p_vals, r) for r in rho_grid])
    res_q = float(np.max(np.abs(q_hat - q_vals)))

    shifted = weights.shifted(c)
    sp = max(abs(pressure(disp, shifted, m, tol) - pressure(disp, weights, m - c, tol))
             for m in mu_grid)
    sq = max(abs(free_energy(disp, shifted, r, tol) - (free_energy(disp, weights, r, tol) + c * r))
             for r in rho_grid)
    return DualityReport(mu_grid, rho_grid, p_vals, q_vals, res_p, bound_p, res_q,
                         float(sp), float(sq), float(c))


@dataclass(frozen=True)
class ThermoResult:
    rho_c: float
    mu_grid: np.ndarray
    p_values: np.ndarray
    p_errors: np.ndarray
    rho_grid: np.ndarray
    q_values: np.ndarray
    q_errors: np.ndarray


def thermo_curves(disp, weights, mu_grid, rho_grid, tol=1e-9):
    """Pressure and free-energy curves with per-point error bounds."""
    mu_grid = np.asarray(mu_grid, dtype=float)
    rho_grid = np.asarray(rho_grid, dtype=float)
    rc = critical_density(disp, weights, tol)
    p = np.array([pressure(disp, weights, m, tol) for m in mu_grid])
    q = np.array([free_energy(disp, weights, r, tol) for r in rho_grid])
    return ThermoResult(rc, mu_grid, p, np.full_like(p, tol),
                        rho_grid, q, np.full_like(q, tol))
