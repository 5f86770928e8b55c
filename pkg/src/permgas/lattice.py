"""Truncated dual-lattice mode sets with discarded-mass certificates.

The dual lattice of a periodic box of side L is (1/L)Z^d.  A ModeLattice
keeps the modes with eps(k) <= eps_cut, grouped by equal eps value, together
with a certificate bounding the single-mode mass sum_{eps(k) > cut} e^{-eps(k)}
that was thrown away.  The certificate compares the lattice sum against a
radial integral (each discarded mode is dominated on its Voronoi cell because
e^{-eps} is radially decreasing), so it is an honest upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import CertificateError
from .thermo import sphere_area

__all__ = ["ModeLattice", "build_lattice", "auto_lattice"]


@dataclass(frozen=True, eq=False)
class ModeLattice:
    L: float
    d: int
    mvecs: np.ndarray        # (J, d) integer multipliers; k = m / L
    eps: np.ndarray          # (J,) per-mode energies, sorted ascending
    group_of: np.ndarray     # (J,) index into the distinct-eps groups
    group_eps: np.ndarray    # (G,) distinct energies ascending (group 0 is k = 0)
    group_mult: np.ndarray   # (G,) multiplicities
    group_knorm: np.ndarray  # (G,) |k| of a representative mode (nan if unknown)
    eps_cut: float
    delta_trunc: float
    certificate: float
    disp: object | None = None

    @property
    def volume(self):
        return float(self.L) ** self.d

    @property
    def n_modes(self):
        return len(self.eps)

    def k(self, j):
        return self.mvecs[j] / self.L

    def group_slices(self):
        """Contiguous mode-index ranges per group (modes are sorted by eps)."""
        counts = self.group_mult
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        return [slice(int(s), int(s + c)) for s, c in zip(starts, counts)]


def _finalize(L, d, mvecs, eps, eps_cut, delta_trunc, certificate, disp, knorms=None):
    order = np.lexsort(tuple(mvecs[:, i] for i in range(d - 1, -1, -1)) + (eps,))
    mvecs = mvecs[order]
    eps = eps[order]
    knorms = knorms[order] if knorms is not None else np.full(len(eps), np.nan)
    group_eps, group_of = np.unique(eps, return_inverse=True)
    group_mult = np.bincount(group_of)
    if group_eps[0] != 0.0 or group_mult[0] != 1:
        raise ValueError("lattice must contain exactly one eps = 0 mode (k = 0)")
    group_knorm = np.full(len(group_eps), np.nan)
    for g in range(len(group_eps)):
        idx = np.argmax(group_of == g)
        group_knorm[g] = knorms[idx]
    return ModeLattice(float(L), int(d), mvecs, eps, group_of, group_eps,
                       group_mult, group_knorm, float(eps_cut), float(delta_trunc),
                       float(certificate), disp)


def discard_certificate(disp, L, d, eps_cut):
    """Upper bound on sum_{k in (1/L)Z^d, eps(k) > eps_cut} e^{-eps(k)}."""
    r_cut = disp.radius_at_energy(eps_cut)
    half_diag = math.sqrt(d) / (2.0 * L)
    lo = max(r_cut - 2.0 * half_diag, 0.0)
    s = sphere_area(d)

    def f(u):
        return (u + half_diag) ** (d - 1) * math.exp(-float(disp.eps_radial(u)))

    val, err = quad(f, lo, np.inf, limit=200)
    return L ** d * s * (val + abs(err))


def build_lattice(L, d, disp, eps_cut, delta_trunc):
    """Enumerate modes of (1/L)Z^d with eps(k) <= eps_cut, certified.

    Raises CertificateError (with the achieved bound) when the discarded mass
    cannot be certified below delta_trunc.
    """
    if eps_cut <= 0:
        raise ValueError("eps_cut must be > 0")
    cert = discard_certificate(disp, L, d, eps_cut)
    if not (cert <= delta_trunc):
        raise CertificateError(
            f"discarded-mass certificate {cert:g} exceeds delta_trunc {delta_trunc:g}",
            achieved=cert, required=delta_trunc)
    r_cut = disp.radius_at_energy(eps_cut)
    m_max = int(math.floor(L * r_cut))
    axes = np.arange(-m_max, m_max + 1)
    grids = np.meshgrid(*([axes] * d), indexing="ij")
    mv = np.stack([g.ravel() for g in grids], axis=1)
    knorm = np.linalg.norm(mv, axis=1) / L
    eps = np.asarray(disp.eps_radial(knorm), dtype=float)
    keep = eps <= eps_cut
    return _finalize(L, d, mv[keep], eps[keep], eps_cut, delta_trunc, cert, disp,
                     knorms=knorm[keep])


def auto_lattice(L, d, disp, delta_trunc, eps_cut_start=10.0):
    """Smallest-reasonable eps_cut meeting the certificate, then build."""
    cut = float(eps_cut_start)
    for _ in range(200):
        if discard_certificate(disp, L, d, cut) <= delta_trunc:
            return build_lattice(L, d, disp, cut, delta_trunc)
        cut *= 1.3
    raise CertificateError(f"no eps_cut up to {cut:g} met delta_trunc {delta_trunc:g}",
                           required=delta_trunc)


def lattice_from_modes(L, d, eps, mvecs=None):
    """Artificial lattice from explicit mode energies (tests, small cases).

    No truncation certificate applies (set to 0); the caller asserts the mode
    set is complete for its purpose.  Sign symmetry is checked when integer
    mode vectors are supplied.
    """
    eps = np.asarray(eps, dtype=float)
    if mvecs is None:
        mvecs = np.zeros((len(eps), d), dtype=int)
        mvecs[:, 0] = np.arange(len(eps))
        knorms = None
    else:
        mvecs = np.asarray(mvecs, dtype=int)
        keys = {tuple(m) for m in mvecs}
        if any(tuple(-np.asarray(m)) not in keys for m in mvecs):
            raise ValueError("mode set must be closed under k <-> -k")
        knorms = np.linalg.norm(mvecs, axis=1) / L
    return _finalize(L, d, mvecs, eps, float(np.max(eps)), 0.0, 0.0, None, knorms=knorms)
