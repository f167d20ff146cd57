"""Brute-force reference estimators.

These routines only sample parameters and outcomes and evaluate densities;
they never call the closed-form entropy, KL or moment formulas, so they
can be used to validate them.

Monte Carlo estimates are split into ``N_BATCHES`` independent batches,
each on its own derived random stream. The reported value is the mean of
the batch estimates and the standard error is their standard deviation
over sqrt(N_BATCHES).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import DomainError, UsageError
from .expfam import GAUSSIAN, ParamPoint, batch_mean_var, batch_sample
from .numerics import QuadratureSpec, RandomnessContract, integrate_1d
from .second_order import EmpiricalMixture, Law1D, SecondOrderDist, mean_params, sample_params

N_BATCHES = 20
MIN_SAMPLES = 1000

METHODS = ("nested_mc", "ancestral_mc", "quadrature")


@dataclass(frozen=True)
class OracleEstimate:
    value: float
    standard_error: Optional[float]
    method: str
    n_or_subdivisions: int

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown oracle method {self.method!r}")
        if (self.standard_error is None) != (self.method == "quadrature"):
            raise DomainError("standard_error is given exactly for Monte Carlo estimates")

    def agrees(self, target: float, n_se: float = 4.0, abs_tol: float = 1e-6) -> bool:
        """|value - target| within n_se standard errors (MC) or abs_tol (quadrature)."""
        if self.standard_error is None:
            return abs(self.value - target) <= abs_tol
        return abs(self.value - target) <= n_se * self.standard_error


def _check_n(n):
    if n < MIN_SAMPLES:
        raise DomainError(f"Monte Carlo oracles need n >= {MIN_SAMPLES}, got {n}")


def _batch_sizes(n):
    base, extra = divmod(n, N_BATCHES)
    return [base + (1 if b < extra else 0) for b in range(N_BATCHES)]


def _summarize(per_batch, method, n):
    arr = np.asarray(per_batch, dtype=float)
    se = float(arr.std(ddof=1) / math.sqrt(len(arr)))
    return OracleEstimate(float(arr.mean()), se, method, n)


def _ancestral(q, stream: RandomnessContract, m):
    theta = sample_params(q, stream.spawn(0), m)
    y = batch_sample(q.family, theta, stream.spawn(1).generator())
    return theta, y


def mc_entropy_decomposition(q: SecondOrderDist, rng: RandomnessContract, n: int):
    """Nested Monte Carlo estimates of (H(Y), H(Y | theta), I(Y; theta)).

    The marginal log-density of each outcome is the log of the average
    density over K = floor(sqrt(n)) inner parameter draws, fresh per batch.
    For an empirical mixture the exact mixture density is used instead.
    """
    _check_n(n)
    code = q.family.code
    k = math.isqrt(n)
    h_marg, h_cond, mi = [], [], []
    for b, m in enumerate(_batch_sizes(n)):
        stream = rng.spawn(b)
        theta, y = _ancestral(q, stream, m)
        if isinstance(q, EmpiricalMixture):
            inner = q.array
        else:
            inner = sample_params(q, stream.spawn(2), k)
        lm = kernels.log_mean_density(code, y, inner)
        lc = kernels.log_density_pairs(code, y, theta)
        h_marg.append(-lm.mean())
        h_cond.append(-lc.mean())
        mi.append(np.mean(lc - lm))
    return (
        _summarize(h_marg, "nested_mc", n),
        _summarize(h_cond, "nested_mc", n),
        _summarize(mi, "nested_mc", n),
    )


def mc_kl_decomposition(q: SecondOrderDist, rng: RandomnessContract, n: int):
    """Sampling estimates of (H(P_mean), E[H(P_theta)], E[KL(P_theta || P_mean)]).

    All three use log-density evaluations only: the expected KL is the
    average of log p(y | theta) - log p(y | theta_bar) over ancestral pairs.
    """
    _check_n(n)
    fam = q.family
    code = fam.code
    bar = np.array(mean_params(q).values)
    tu, au, eu = [], [], []
    for b, m in enumerate(_batch_sizes(n)):
        stream = rng.spawn(b)
        theta, y = _ancestral(q, stream, m)
        lc = kernels.log_density_pairs(code, y, theta)
        lb = kernels.log_density_pairs(code, y, np.broadcast_to(bar, theta.shape))
        bar_rows = np.tile(bar, (m, 1))
        y_bar = batch_sample(fam, bar_rows, stream.spawn(3).generator())
        tu.append(-kernels.log_density_pairs(code, y_bar, bar_rows).mean())
        au.append(-lc.mean())
        eu.append(np.mean(lc - lb))
    return (
        _summarize(tu, "ancestral_mc", n),
        _summarize(au, "ancestral_mc", n),
        _summarize(eu, "ancestral_mc", n),
    )


def _pair_variance(x: np.ndarray) -> float:
    """Unbiased variance from disjoint pairs, mean of (x_2k - x_2k+1)^2 / 2.

    Unlike the usual sample variance this is an average of i.i.d. terms,
    so the batch standard error stays calibrated even where the sample
    variance has a degenerate (chi-square) sampling law, e.g. a symmetric
    two-point distribution.
    """
    h = x.shape[0] - x.shape[0] % 2
    d = x[0:h:2] - x[1:h:2]
    return float(0.5 * np.mean(d * d))


def _variance_batches(q, rng, n):
    _check_n(n)
    total, alea, epi = [], [], []
    for b, m in enumerate(_batch_sizes(n)):
        theta, y = _ancestral(q, rng.spawn(b), m)
        mean, var = batch_mean_var(q.family, theta)
        total.append(_pair_variance(y))
        alea.append(var.mean())
        epi.append(_pair_variance(mean))
    return np.array(total), np.array(alea), np.array(epi)


def mc_variance_decomposition(q: SecondOrderDist, rng: RandomnessContract, n: int):
    """Monte Carlo (V[Y], E[V[Y | theta]], V[E[Y | theta]]) from ancestral draws."""
    return tuple(_summarize(x, "ancestral_mc", n) for x in _variance_batches(q, rng, n))


def mc_variance_gap(q: SecondOrderDist, rng: RandomnessContract, n: int) -> OracleEstimate:
    """total - aleatoric - epistemic, with the standard error of the paired batch differences."""
    total, alea, epi = _variance_batches(q, rng, n)
    return _summarize(total - alea - epi, "ancestral_mc", n)


def quad_expectation(law: Law1D, f: Callable[[float], float], spec: QuadratureSpec = QuadratureSpec()) -> OracleEstimate:
    """E[f(X)] for a 1-D law by integrating f against its density.

    Atomic laws are summed exactly. Raises :class:`IntegrationError` when
    the quadrature does not converge.
    """
    if law.atomic:
        values, weights = law.atoms()
        return OracleEstimate(math.fsum(w * f(v) for v, w in zip(values, weights)), None, "quadrature", 0)
    total = 0.0
    for lo, hi in law.pieces():
        total += integrate_1d(lambda t: f(t) * law.pdf(t), lo, hi, spec)
    return OracleEstimate(total, None, "quadrature", spec.max_subdivisions)


def _density_fn(theta: ParamPoint):
    """Plain density of one first-order distribution (continuous families)."""
    fam = theta.family
    if fam is GAUSSIAN:
        mu, s2 = theta.values
        c = 1.0 / math.sqrt(2 * math.pi * s2)
        return lambda y: c * math.exp(-0.5 * (y - mu) ** 2 / s2)
    if fam.outcome_kind == "continuous":
        (lam,) = theta.values
        return lambda y: lam * math.exp(-lam * y) if y >= 0 else 0.0
    raise UsageError("quad_marginal_entropy needs a continuous outcome family")


def quad_marginal_entropy(q: SecondOrderDist, spec: QuadratureSpec = QuadratureSpec()) -> OracleEstimate:
    """-int p(y) log p(y) dy for the marginal p(y) = E_Q[p(y | theta)].

    Supports empirical mixtures of continuous families and single-parameter
    continuous families whose parameter has an explicit 1-D density.
    """
    fam = q.family
    if isinstance(q, EmpiricalMixture):
        dens = [_density_fn(m) for m in q.members]
        w = 1.0 / len(dens)

        def p(y):
            return w * math.fsum(d(y) for d in dens)
        lo = 0.0 if fam is not GAUSSIAN else -math.inf
    else:
        laws = getattr(q, "laws", None)
        if laws is None or fam.param_dim != 1 or laws[0].atomic or fam.outcome_kind != "continuous":
            raise UsageError("quad_marginal_entropy: unsupported second-order law")
        law = laws[0]

        def p(y):
            return math.fsum(
                integrate_1d(lambda lam: lam * math.exp(-lam * y) * law.pdf(lam), a, b, spec)
                for a, b in law.pieces()
            )
        lo = 0.0

    def integrand(y):
        v = p(y)
        return -v * math.log(v) if v > 0 else 0.0

    return OracleEstimate(integrate_1d(integrand, lo, math.inf, spec), None, "quadrature", spec.max_subdivisions)
