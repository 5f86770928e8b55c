"""Tail completion of slowly decaying series by Euler-Maclaurin."""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad


def euler_maclaurin_tail(f, m, log_substitution=False, quad_limit=200,
                         epsabs=1e-13, epsrel=1e-11):
    """sum_{n=m}^inf f(n) for a smooth f decaying to 0, with an error estimate.

    Uses the expansion  sum = int_m^inf f + f(m)/2 - f'(m)/12 + f'''(m)/720 + R
    with derivatives from unit-step central differences (f varies slowly at the
    scales where this is called).  log_substitution integrates in u = log x,
    which keeps quadpack happy for integrands decaying like 1/(x log^p x).
    """
    m = float(m)
    if log_substitution:
        integral, ierr = quad(lambda u: f(np.exp(u)) * np.exp(u), np.log(m), np.inf,
                              limit=quad_limit, epsabs=epsabs, epsrel=epsrel)
    else:
        integral, ierr = quad(f, m, np.inf, limit=quad_limit,
                              epsabs=epsabs, epsrel=epsrel)
    fm = f(m)
    f1 = 0.5 * (f(m + 1.0) - f(m - 1.0))
    f3 = 0.5 * (f(m + 2.0) - 2.0 * f(m + 1.0) + 2.0 * f(m - 1.0) - f(m - 2.0))
    value = integral + 0.5 * fm - f1 / 12.0 + f3 / 720.0
    err = abs(ierr) + abs(f3) / 240.0 + 1e-18 * abs(value)
    return value, err


def geometric_poly_tail(x, beta, n_start):
    """Upper bound for sum_{n > n_start} x^n n^beta with 0 < x < 1.

    Returns None while the polynomial factor still dominates (caller should
    keep accumulating exact terms and retry at a larger n_start).
    """
    if not (0.0 < x < 1.0):
        return None
    n1 = n_start + 1
    if beta <= 0:
        return x ** n1 * n1 ** beta / (1.0 - x)
    ratio = x * np.exp(beta / n1)
    if ratio >= 1.0:
        return None
    return x ** n1 * n1 ** beta / (1.0 - ratio)
