"""Autocorrelation-aware error bars for Markov-chain time series."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["autocovariance", "integrated_time", "mc_error"]


def autocovariance(x):
    """Biased autocovariance estimate via FFT, lags 0..n-1."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    xc = x - x.mean()
    f = np.fft.rfft(xc, 2 * n)
    acov = np.fft.irfft(f * np.conj(f))[:n] / n
    return acov


def integrated_time(x, c=6.0):
    """Integrated autocorrelation time with a self-consistent window.

    tau = 1 + 2 sum_{t<=W} rho_t, W the first lag with W >= c*tau (Sokal's
    windowing); returns 1 for constant or uncorrelated series.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 4:
        return 1.0
    acov = autocovariance(x)
    if acov[0] <= 0:
        return 1.0
    rho = acov / acov[0]
    tau = 1.0
    for t in range(1, n):
        tau += 2.0 * rho[t]
        if t >= c * tau:
            break
    return max(tau, 1.0)


def mc_error(x):
    """(mean, error of the mean, tau_int, n_eff) for a chain series."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    mean = float(x.mean()) if n else math.nan
    if n < 2:
        return mean, math.inf, 1.0, float(n)
    tau = integrated_time(x)
    var = float(x.var(ddof=1))
    err = math.sqrt(var * tau / n)
    return mean, err, tau, n / tau
