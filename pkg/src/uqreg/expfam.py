"""First-order predictive distributions from the exponential family.

Three families are supported, each identified by a lowercase config name:

============  ================  ============  ==========================
name          parameters        outcomes      mean linear in
============  ================  ============  ==========================
gaussian      (mu, sigma2)      real line     mu, slope 1
exponential   (lambda,)         y >= 0        -- (mean is 1/lambda)
poisson       (lambda,)         0, 1, 2, ...  lambda, slope 1
============  ================  ============  ==========================

Scalar operations take a :class:`ParamPoint`. The ``batch_*`` helpers take
an ``(n, p)`` float array of parameter rows for Monte Carlo work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, UsageError
from .numerics import RandomnessContract, log_gamma

__all__ = [
    "LinearMean",
    "FamilyDescriptor",
    "GAUSSIAN",
    "EXPONENTIAL",
    "POISSON",
    "FAMILIES",
    "get_family",
    "ParamPoint",
    "gaussian",
    "exponential",
    "poisson",
    "NaturalForm",
    "mean_var",
    "entropy",
    "kl_divergence",
    "log_density",
    "natural_form",
    "natural_log_density",
    "sufficient_statistic",
    "log_base_measure",
    "sample_outcome",
    "poisson_entropy",
    "batch_mean_var",
    "batch_entropy",
    "batch_kl",
    "batch_sample",
    "batch_log_density",
]

_LOG_2PI = math.log(2.0 * math.pi)
_LOG_2PIE = _LOG_2PI + 1.0


@dataclass(frozen=True)
class LinearMean:
    """E[Y | theta] = slope * theta[index] + intercept."""

    index: int
    slope: float
    intercept: float


@dataclass(frozen=True)
class FamilyDescriptor:
    name: str
    param_names: tuple
    outcome_kind: str  # "continuous" or "count"
    positive: tuple  # per coordinate: must the value be > 0
    mean_linear_in: Optional[LinearMean]
    code: int  # kernel dispatch code

    @property
    def kind(self) -> str:
        return self.name

    @property
    def param_dim(self) -> int:
        return len(self.param_names)

    def index_of(self, param: str) -> int:
        try:
            return self.param_names.index(param)
        except ValueError:
            raise UsageError(
                f"family {self.name!r} has no parameter {param!r} "
                f"(expected one of {', '.join(self.param_names)})"
            ) from None

    def __str__(self):
        return self.name


GAUSSIAN = FamilyDescriptor(
    "gaussian", ("mu", "sigma2"), "continuous", (False, True), LinearMean(0, 1.0, 0.0), 0
)
EXPONENTIAL = FamilyDescriptor("exponential", ("lambda",), "continuous", (True,), None, 1)
POISSON = FamilyDescriptor("poisson", ("lambda",), "count", (True,), LinearMean(0, 1.0, 0.0), 2)

FAMILIES = {f.name: f for f in (GAUSSIAN, EXPONENTIAL, POISSON)}


def get_family(name: str) -> FamilyDescriptor:
    """Look up a family by its exact lowercase name."""
    try:
        return FAMILIES[name]
    except KeyError:
        raise UsageError(
            f"unknown family {name!r}; expected one of {', '.join(FAMILIES)}"
        ) from None


def _check_values(family: FamilyDescriptor, values: Sequence[float]) -> None:
    if len(values) != family.param_dim:
        raise DomainError(
            f"{family.name} takes {family.param_dim} parameter(s), got {len(values)}"
        )
    for name, v, pos in zip(family.param_names, values, family.positive):
        if not math.isfinite(v):
            raise DomainError(f"{family.name} parameter {name} must be finite, got {v}")
        if pos and not v > 0:
            raise DomainError(f"{family.name} parameter {name} must be > 0, got {v}")


@dataclass(frozen=True)
class ParamPoint:
    family: FamilyDescriptor
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        _check_values(self.family, vals)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, i):
        return self.values[i]

    def as_dict(self) -> dict:
        return dict(zip(self.family.param_names, self.values))


def gaussian(mu: float, sigma2: float) -> ParamPoint:
    return ParamPoint(GAUSSIAN, (mu, sigma2))


def exponential(lam: float) -> ParamPoint:
    return ParamPoint(EXPONENTIAL, (lam,))


def poisson(lam: float) -> ParamPoint:
    return ParamPoint(POISSON, (lam,))


@dataclass(frozen=True)
class NaturalForm:
    """Canonical-form pieces eta, A and dim(S) of one distribution."""

    eta: tuple
    log_partition: float
    sufficient_stat_dim: int


# ---------------------------------------------------------------------------
# Poisson entropy (no closed form)

_POISSON_ASYMPTOTIC = 1e5


def _poisson_window(lam: float):
    spread = 12.0 * math.sqrt(lam) + 30.0
    return max(0, math.floor(lam - spread)), math.ceil(lam + spread)


_HALF_LOG_2PI = 0.5 * _LOG_2PI
# Stirling-series coefficients for log k! - [(k + 1/2) log k - k + log sqrt(2 pi)]
_STIRLERR_COEF = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188)


def _stirlerr(k: np.ndarray) -> np.ndarray:
    out = np.empty_like(k)
    big = k >= 10
    kb = k[big]
    inv2 = 1.0 / (kb * kb)
    series = np.zeros_like(kb)
    for c in reversed(_STIRLERR_COEF):
        series = series * inv2 + c
    out[big] = series / kb
    ks = k[~big]
    out[~big] = log_gamma(ks + 1.0) - (ks + 0.5) * np.log(ks) + ks - _HALF_LOG_2PI
    return out


def _phi(x: np.ndarray) -> np.ndarray:
    """(1 + x) log1p(x) - x, by its power series near 0."""
    out = np.empty_like(x)
    small = np.abs(x) < 0.1
    xs = x[small]
    acc = np.zeros_like(xs)
    for n in range(16, 1, -1):
        acc = acc * -xs + 1.0 / (n * (n - 1))
    out[small] = acc * xs * xs
    xl = x[~small]
    out[~small] = (1.0 + xl) * np.log1p(xl) - xl
    return out


def _poisson_logpmf(k: np.ndarray, lam) -> np.ndarray:
    """log p(k) for integral k >= 0 without the k log(lam) - log k! cancellation."""
    k = np.asarray(k, dtype=float)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), k.shape)
    out = np.empty_like(k)
    zero = k == 0
    out[zero] = -lam[zero]
    kp, lp = k[~zero], lam[~zero]
    out[~zero] = -0.5 * np.log(2 * math.pi * kp) - _stirlerr(kp) - lp * _phi((kp - lp) / lp)
    return out


def _poisson_edge(k: int, lam: float) -> float:
    logp = float(_poisson_logpmf(np.array([float(k)]), lam)[0])
    return -math.exp(logp) * logp


def poisson_entropy(lam: float) -> float:
    """Entropy of Poisson(lam) in nats.

    Sums -p(k) log p(k) over lam +/- (12 sqrt(lam) + 30), widening the
    window while the edge terms are still >= 1e-14. Above lam = 1e5 the
    asymptotic expansion is used instead.
    """
    if not lam > 0 or not math.isfinite(lam):
        raise DomainError(f"poisson rate must be finite and > 0, got {lam}")
    if lam > _POISSON_ASYMPTOTIC:
        return (
            0.5 * math.log(2 * math.pi * math.e * lam)
            - 1 / (12 * lam) - 1 / (24 * lam**2) - 19 / (360 * lam**3)
        )
    lo, hi = _poisson_window(lam)
    while _poisson_edge(hi, lam) >= 1e-14:
        hi += 16
    while lo > 0 and _poisson_edge(lo, lam) >= 1e-14:
        lo = max(0, lo - 16)
    logp = _poisson_logpmf(np.arange(lo, hi + 1, dtype=float), lam)
    return float(-np.sum(np.exp(logp) * logp))


def _poisson_entropy_array(lam: np.ndarray) -> np.ndarray:
    out = np.empty_like(lam)
    big = lam > _POISSON_ASYMPTOTIC
    for i in np.flatnonzero(big):
        out[i] = poisson_entropy(float(lam[i]))
    idx = np.flatnonzero(~big)
    idx = idx[np.argsort(lam[idx], kind="stable")]
    chunk = 256
    for start in range(0, idx.size, chunk):
        sel = idx[start:start + chunk]
        lam_c = lam[sel]
        spread = 12.0 * np.sqrt(lam_c) + 30.0
        lo = np.maximum(0.0, np.floor(lam_c - spread))
        hi = np.ceil(lam_c + spread)
        width = int((hi - lo).max()) + 1
        k = lo[:, None] + np.arange(width)[None, :]
        logp = _poisson_logpmf(k, np.broadcast_to(lam_c[:, None], k.shape))
        terms = np.where(k <= hi[:, None], -np.exp(logp) * logp, 0.0)
        out[sel] = terms.sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# batch (array) implementations


def _as_params(family: FamilyDescriptor, params) -> np.ndarray:
    arr = np.asarray(params, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, family.param_dim)
    if arr.ndim != 2 or arr.shape[1] != family.param_dim:
        raise DomainError(f"{family.name} parameter rows must have {family.param_dim} columns")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{family.name} parameters must be finite")
    for j, pos in enumerate(family.positive):
        if pos and not np.all(arr[:, j] > 0):
            raise DomainError(f"{family.name} parameter {family.param_names[j]} must be > 0")
    return arr


def batch_mean_var(family: FamilyDescriptor, params):
    """Row-wise (E[Y | theta], V[Y | theta])."""
    p = _as_params(family, params)
    if family is GAUSSIAN:
        return p[:, 0].copy(), p[:, 1].copy()
    lam = p[:, 0]
    if family is EXPONENTIAL:
        return 1.0 / lam, 1.0 / (lam * lam)
    return lam.copy(), lam.copy()


def batch_entropy(family: FamilyDescriptor, params) -> np.ndarray:
    p = _as_params(family, params)
    if family is GAUSSIAN:
        return 0.5 * (_LOG_2PIE + np.log(p[:, 1]))
    if family is EXPONENTIAL:
        return 1.0 - np.log(p[:, 0])
    return _poisson_entropy_array(p[:, 0])


def batch_kl(family: FamilyDescriptor, params_from, theta_to) -> np.ndarray:
    """Row-wise D_KL(P_row || P_theta_to)."""
    p = _as_params(family, params_from)
    q = _as_params(family, theta_to)[0]
    if family is GAUSSIAN:
        r = p[:, 1] / q[1]
        d = p[:, 0] - q[0]
        return 0.5 * ((r - 1.0) - np.log(r)) + d * d / (2.0 * q[1])
    if family is EXPONENTIAL:
        s = q[0] / p[:, 0]
        return (s - 1.0) - np.log(s)
    t = p[:, 0] / q[0]
    return q[0] * (t * np.log(t) - t + 1.0)


def batch_log_density(family: FamilyDescriptor, params, y) -> np.ndarray:
    """Row-wise log p(y_i | theta_i) by the direct density formula."""
    p = _as_params(family, params)
    y = np.asarray(y, dtype=float)
    if family is GAUSSIAN:
        d = y - p[:, 0]
        return -0.5 * (_LOG_2PI + np.log(p[:, 1])) - d * d / (2.0 * p[:, 1])
    lam = p[:, 0]
    with np.errstate(invalid="ignore", divide="ignore"):
        if family is EXPONENTIAL:
            out = np.log(lam) - lam * y
        else:
            out = y * np.log(lam) - lam - log_gamma(np.maximum(y, 0.0) + 1.0)
    return np.where(y < 0, -np.inf, out)


def batch_sample(family: FamilyDescriptor, params, gen: np.random.Generator) -> np.ndarray:
    """One outcome per parameter row, as float64."""
    p = _as_params(family, params)
    if family is GAUSSIAN:
        return gen.normal(p[:, 0], np.sqrt(p[:, 1]))
    if family is EXPONENTIAL:
        return gen.exponential(1.0 / p[:, 0])
    return gen.poisson(p[:, 0]).astype(float)


# ---------------------------------------------------------------------------
# scalar API


def mean_var(theta: ParamPoint):
    """(E[Y], V[Y]) under P_theta."""
    m, v = batch_mean_var(theta.family, theta.values)
    return float(m[0]), float(v[0])


def entropy(theta: ParamPoint) -> float:
    """Differential (or, for Poisson, discrete) entropy in nats; may be negative."""
    if theta.family is POISSON:
        return poisson_entropy(theta[0])
    return float(batch_entropy(theta.family, theta.values)[0])


def kl_divergence(theta_from: ParamPoint, theta_to: ParamPoint) -> float:
    if theta_from.family is not theta_to.family:
        raise UsageError(
            f"KL divergence between different families "
            f"({theta_from.family.name} vs {theta_to.family.name})"
        )
    return float(batch_kl(theta_from.family, theta_from.values, theta_to.values)[0])


def _check_outcome(family: FamilyDescriptor, y: float) -> float:
    y = float(y)
    if math.isnan(y):
        raise DomainError("outcome must not be nan")
    if family.outcome_kind == "count" and math.isfinite(y) and not y.is_integer():
        raise DomainError(f"{family.name} outcomes are integers, got {y}")
    return y


def log_density(theta: ParamPoint, y: float) -> float:
    """log p(y | theta); -inf outside the support."""
    y = _check_outcome(theta.family, y)
    return float(batch_log_density(theta.family, theta.values, np.array([y]))[0])


def natural_form(theta: ParamPoint) -> NaturalForm:
    fam = theta.family
    if fam is GAUSSIAN:
        mu, s2 = theta.values
        return NaturalForm(
            (mu / s2, -0.5 / s2), mu * mu / (2 * s2) + 0.5 * math.log(2 * math.pi * s2), 2
        )
    lam = theta[0]
    if fam is EXPONENTIAL:
        return NaturalForm((-lam,), -math.log(lam), 1)
    return NaturalForm((math.log(lam),), lam, 1)


def sufficient_statistic(family: FamilyDescriptor, y: float) -> tuple:
    if family is GAUSSIAN:
        return (y, y * y)
    return (y,)


def log_base_measure(family: FamilyDescriptor, y: float) -> float:
    """log h(y), -inf outside the support."""
    y = _check_outcome(family, y)
    if family is GAUSSIAN:
        return 0.0
    if y < 0:
        return -math.inf
    if family is EXPONENTIAL:
        return 0.0
    return -log_gamma(y + 1.0)


def natural_log_density(theta: ParamPoint, y: float) -> float:
    """log h(y) + <eta, S(y)> - A evaluated from :func:`natural_form`."""
    log_h = log_base_measure(theta.family, y)
    if math.isinf(log_h):
        return log_h
    nf = natural_form(theta)
    stat = sufficient_statistic(theta.family, float(y))
    return log_h + math.fsum(e * s for e, s in zip(nf.eta, stat)) - nf.log_partition


def sample_outcome(theta: ParamPoint, rng: RandomnessContract, n: int) -> np.ndarray:
    """n i.i.d. draws from P_theta (float64; Poisson draws are integral)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    params = np.broadcast_to(np.asarray(theta.values), (n, theta.family.param_dim))
    return batch_sample(theta.family, params, rng.generator())
