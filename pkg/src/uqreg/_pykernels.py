"""Pure numpy versions of the hot loops (used when the extension is absent)."""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

_LOG_2PI = np.log(2.0 * np.pi)
_CHUNK = 2048


def _row_terms(code, y, params):
    """(len(y), K) matrix of log p(y_i | theta_k) without the y-only Poisson term."""
    y = y[:, None]
    if code == 0:
        mu, s2 = params[:, 0][None, :], params[:, 1][None, :]
        d = y - mu
        return -0.5 * (_LOG_2PI + np.log(s2)) - 0.5 * d * d / s2
    lam = params[:, 0][None, :]
    if code == 1:
        with np.errstate(invalid="ignore"):
            return np.where(y >= 0, np.log(lam) - lam * y, -np.inf)
    return y * np.log(lam) - lam


def log_mean_density(code: int, y, params) -> np.ndarray:
    """log((1/K) sum_k p(y_i | theta_k)) for every outcome y_i."""
    y = np.ascontiguousarray(y, dtype=float)
    params = np.ascontiguousarray(params, dtype=float)
    k = params.shape[0]
    out = np.empty(y.shape[0])
    for start in range(0, y.shape[0], _CHUNK):
        t = _row_terms(code, y[start:start + _CHUNK], params)
        m = t.max(axis=1)
        finite = np.isfinite(m)
        safe = np.where(finite, m, 0.0)
        s = np.exp(t - safe[:, None]).sum(axis=1)
        with np.errstate(divide="ignore"):
            out[start:start + _CHUNK] = np.where(finite, safe + (np.log(s) - np.log(k)), -np.inf)
    if code == 2:
        out -= gammaln(y + 1.0)
    return out


def log_density_pairs(code: int, y, params) -> np.ndarray:
    """log p(y_i | theta_i), row by row."""
    y = np.asarray(y, dtype=float)
    params = np.asarray(params, dtype=float)
    if code == 0:
        mu, s2 = params[:, 0], params[:, 1]
        d = y - mu
        return -0.5 * (_LOG_2PI + np.log(s2)) - 0.5 * d * d / s2
    lam = params[:, 0]
    if code == 1:
        with np.errstate(invalid="ignore"):
            return np.where(y >= 0, np.log(lam) - lam * y, -np.inf)
    return y * np.log(lam) - lam - gammaln(y + 1.0)
