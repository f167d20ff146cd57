"""Entropy- and variance-based total/aleatoric/epistemic uncertainty.

Entropy measure::

    AU = E_Q[H(P_theta)]
    TU = H(P_theta_bar)                 with theta_bar = E_Q[theta]
    EU = E_Q[KL(P_theta || P_theta_bar)]

Variance measure (law of total variance)::

    AU = E_Q[V[Y | theta]]
    EU = V_Q[E[Y | theta]]
    TU = AU + EU

Closed forms are used where they are known, quadrature over the 1-D
marginals next, and Monte Carlo over parameter draws last.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import DivergingMomentError, DomainError, IntegrationError, UsageError
from .expfam import (
    EXPONENTIAL,
    GAUSSIAN,
    POISSON,
    batch_entropy,
    batch_kl,
    batch_mean_var,
    batch_sample,
    entropy,
    mean_var,
    poisson_entropy,
)
from .numerics import QuadratureSpec, RandomnessContract, digamma
from .second_order import (
    Dirac,
    EmpiricalMixture,
    InverseGamma,
    Law1D,
    NormalInverseGamma,
    ProductMarginals,
    SecondOrderDist,
    is_dirac,
    law_expectation,
    mean_params,
    sample_params,
)

_LOG_2PI = math.log(2.0 * math.pi)
COMPONENTS = ("tu", "au", "eu")
ESTIMATORS = ("closed_form", "quadrature", "monte_carlo")
MEASURE_KINDS = ("entropy", "variance")
MIN_MC_SAMPLES = 1000
_N_BATCHES = 20


# ---------------------------------------------------------------------------
# request / report types


@dataclass(frozen=True)
class ForceMonteCarlo:
    n: int
    rng: RandomnessContract

    def __post_init__(self):
        if self.n < MIN_MC_SAMPLES:
            raise DomainError(f"Monte Carlo needs n >= {MIN_MC_SAMPLES}, got {self.n}")


@dataclass(frozen=True)
class PreferClosedForm:
    """Closed form, else quadrature, else ``fallback`` Monte Carlo."""

    spec: QuadratureSpec = QuadratureSpec()
    fallback: ForceMonteCarlo = ForceMonteCarlo(100_000, RandomnessContract(0))


@dataclass(frozen=True)
class ForceQuadrature:
    spec: QuadratureSpec = QuadratureSpec()


EstimatorPolicy = Union[PreferClosedForm, ForceMonteCarlo, ForceQuadrature]


@dataclass(frozen=True)
class MeasureRequest:
    q: SecondOrderDist
    measure_kind: str = "entropy"
    policy: EstimatorPolicy = PreferClosedForm()
    # optional nested-MC estimate of H(Y) for the entropy measure
    marginal_samples: Optional[int] = None
    marginal_rng: Optional[RandomnessContract] = None

    def __post_init__(self):
        if self.measure_kind not in MEASURE_KINDS:
            raise UsageError(f"measure_kind must be entropy or variance, got {self.measure_kind!r}")
        if self.marginal_samples is not None and self.marginal_samples < MIN_MC_SAMPLES:
            raise DomainError(f"marginal_samples must be >= {MIN_MC_SAMPLES}")


@dataclass(frozen=True)
class UncertaintyReport:
    tu: float
    au: float
    eu: float
    measure_kind: str
    estimator: dict
    mc_standard_error: dict = field(default_factory=dict)
    additivity_gap: float = 0.0
    tu_marginal: Optional[float] = None
    tu_marginal_se: Optional[float] = None

    @property
    def diagnostics(self) -> tuple:
        """Names of the notable sign/ordering facts about this report."""
        out = []
        if self.au < 0:
            out.append("negative_au")
        if self.tu < 0:
            out.append("negative_tu")
        if self.eu < 0:
            out.append("negative_eu")
        if self.tu < self.eu:
            out.append("tu_below_eu")
        return tuple(out)

    def get(self, component: str) -> float:
        return getattr(self, component)

    def to_record(self) -> dict:
        rec = {"measure": self.measure_kind, "tu": self.tu, "au": self.au, "eu": self.eu}
        if self.tu_marginal is not None:
            rec["tu_marginal"] = self.tu_marginal
        if self.tu_marginal_se is not None:
            rec["se_tu_marginal"] = self.tu_marginal_se
        rec["estimator"] = ",".join(f"{c}:{self.estimator[c]}" for c in COMPONENTS)
        for c in COMPONENTS:
            if self.mc_standard_error.get(c) is not None:
                rec[f"se_{c}"] = self.mc_standard_error[c]
        rec["additivity_gap"] = self.additivity_gap
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "UncertaintyReport":
        est = dict(part.split(":", 1) for part in rec["estimator"].split(","))
        se = {c: float(rec[f"se_{c}"]) for c in COMPONENTS if f"se_{c}" in rec}
        return cls(
            tu=float(rec["tu"]), au=float(rec["au"]), eu=float(rec["eu"]),
            measure_kind=rec["measure"], estimator=est, mc_standard_error=se,
            additivity_gap=float(rec["additivity_gap"]),
            tu_marginal=None if rec.get("tu_marginal") is None else float(rec["tu_marginal"]),
            tu_marginal_se=None if rec.get("se_tu_marginal") is None else float(rec["se_tu_marginal"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=False)


def _report(kind, tu, au, eu, est, se=None, gap=None, marginal=None):
    if isinstance(est, str):
        est = {c: est for c in COMPONENTS}
    if gap is None:
        gap = tu - au - eu if math.isfinite(tu) else (0.0 if math.isinf(au) or math.isinf(eu) else math.nan)
    tm, tse = marginal if marginal is not None else (None, None)
    return UncertaintyReport(
        tu=float(tu), au=float(au), eu=float(eu), measure_kind=kind, estimator=dict(est),
        mc_standard_error=dict(se or {}), additivity_gap=float(gap), tu_marginal=tm, tu_marginal_se=tse,
    )


# ---------------------------------------------------------------------------
# 1-D expectations with provenance


class _Moments:
    """Lazily computed marginal expectations, remembering how each was obtained."""

    _CLOSED = {
        "mean": "mean", "var": "variance", "log": "e_log",
        "inv": "e_inv", "inv2": "e_inv2", "xlogx": "e_xlogx",
    }
    _FUNCS = {
        "log": math.log,
        "inv": lambda t: 1.0 / t,
        "inv2": lambda t: 1.0 / (t * t),
        "xlogx": lambda t: t * math.log(t),
        "pois_h": poisson_entropy,
    }

    def __init__(self, law: Law1D, spec: QuadratureSpec, force_quad: bool):
        self.law, self.spec, self.force_quad = law, spec, force_quad
        self.labels = set()

    def __call__(self, what: str) -> float:
        law = self.law
        if what in ("mean", "var"):
            self.labels.add("closed_form")
            return law.mean if what == "mean" else law.variance
        closed = getattr(law, self._CLOSED[what], None) if what in self._CLOSED else None
        if law.atomic:
            self.labels.add("closed_form")
            return closed if closed is not None else law_expectation(law, self._FUNCS[what])
        if closed is not None and not self.force_quad:
            self.labels.add("closed_form")
            return closed
        self.labels.add("quadrature")
        return law_expectation(law, self._FUNCS[what], self.spec)


def _label(*moments: _Moments) -> str:
    labels = set().union(*(m.labels for m in moments))
    return "quadrature" if "quadrature" in labels else "closed_form"


# ---------------------------------------------------------------------------
# entropy measure


def _entropy_tu(q):
    """(H(P_theta_bar), theta_bar)."""
    try:
        bar = mean_params(q)
    except DivergingMomentError:
        raise DivergingMomentError(
            "TU and EU need a finite E_Q[theta]; only AU is defined for this law"
        ) from None
    return entropy(bar), bar


def _entropy_closed(q, policy):
    fam = q.family
    if isinstance(q, Dirac) or is_dirac(q):
        h = entropy(mean_params(q))
        return h, h, 0.0, "closed_form"
    tu, bar = _entropy_tu(q)
    if isinstance(q, EmpiricalMixture):
        arr = q.array
        au = float(np.mean(batch_entropy(fam, arr)))
        if fam is GAUSSIAN:
            s2bar = bar[1]
            v_mu = float(np.mean((arr[:, 0] - bar[0]) ** 2))
            eu = 0.5 * (math.log(s2bar) - float(np.mean(np.log(arr[:, 1]))) + v_mu / s2bar)
        else:
            eu = float(np.mean(batch_kl(fam, arr, bar.values)))
        return tu, au, eu, "closed_form"
    if isinstance(q, NormalInverseGamma):
        if isinstance(policy, ForceQuadrature):
            e_log = law_expectation(InverseGamma(q.alpha, q.beta), math.log, policy.spec)
            s2bar = q.beta / (q.alpha - 1.0)
            au = 0.5 * (1.0 + _LOG_2PI + e_log)
            eu = 0.5 * (math.log(s2bar) - e_log + 1.0 / q.upsilon)
            return tu, au, eu, "quadrature"
        au = 0.5 * (1.0 + _LOG_2PI + math.log(q.beta) - digamma(q.alpha))
        eu = 0.5 * (1.0 / q.upsilon - math.log(q.alpha - 1.0) + digamma(q.alpha))
        return tu, au, eu, "closed_form"
    spec = policy.spec
    force = isinstance(policy, ForceQuadrature)
    mom = [_Moments(law, spec, force) for law in q.laws]
    if fam is GAUSSIAN:
        m_mu, m_s2 = mom
        e_log = m_s2("log")
        s2bar = m_s2("mean")
        v_mu = m_mu("var")
        au = 0.5 * (1.0 + _LOG_2PI + e_log)
        eu = 0.5 * (math.log(s2bar) - e_log + v_mu / s2bar)
    elif fam is EXPONENTIAL:
        (m,) = mom
        e_log = m("log")
        lbar = m("mean")
        au = 1.0 - e_log
        eu = e_log - math.log(lbar) + lbar * m("inv") - 1.0
    else:
        (m,) = mom
        lbar = m("mean")
        au = m("pois_h")
        eu = m("xlogx") - lbar * math.log(lbar)
    return tu, au, eu, _label(*mom)


def _fallback(policy) -> ForceMonteCarlo:
    return getattr(policy, "fallback", PreferClosedForm().fallback)


def _mc_batches(n):
    base, extra = divmod(n, _N_BATCHES)
    return [base + (1 if b < extra else 0) for b in range(_N_BATCHES)]


def _mc_summary(per_batch):
    arr = np.asarray(per_batch, dtype=float)
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr)))


def _entropy_mc(q, policy: ForceMonteCarlo):
    tu, bar = _entropy_tu(q)
    fam = q.family
    au_b, eu_b = [], []
    for b, m in enumerate(_mc_batches(policy.n)):
        theta = sample_params(q, policy.rng.spawn(b), m)
        au_b.append(batch_entropy(fam, theta).mean())
        eu_b.append(batch_kl(fam, theta, bar.values).mean())
    au, se_au = _mc_summary(au_b)
    eu, se_eu = _mc_summary(eu_b)
    est = {"tu": "closed_form", "au": "monte_carlo", "eu": "monte_carlo"}
    return tu, au, eu, est, {"au": se_au, "eu": se_eu}


def marginal_entropy_tu(q: SecondOrderDist, rng: RandomnessContract, n: int):
    """Nested Monte Carlo estimate of H(Y) for p(y) = E_Q[p(y | theta)].

    Returns ``(value, standard_error)``.
    """
    from .oracle import mc_entropy_decomposition

    h_marg, _, _ = mc_entropy_decomposition(q, rng, n)
    return h_marg.value, h_marg.standard_error


def entropy_measures(req: MeasureRequest) -> UncertaintyReport:
    if req.measure_kind != "entropy":
        raise UsageError("entropy_measures needs measure_kind='entropy'")
    q, policy = req.q, req.policy
    se = {}
    if isinstance(policy, ForceMonteCarlo):
        tu, au, eu, est, se = _entropy_mc(q, policy)
    else:
        try:
            tu, au, eu, est = _entropy_closed(q, policy)
        except IntegrationError:
            tu, au, eu, est, se = _entropy_mc(q, _fallback(policy))
    marginal = None
    if req.marginal_samples is not None:
        marginal = marginal_entropy_tu(q, req.marginal_rng or RandomnessContract(0), req.marginal_samples)
    return _report("entropy", tu, au, eu, est, se, marginal=marginal)


# ---------------------------------------------------------------------------
# variance measure


def _variance_closed(q, policy):
    fam = q.family
    if isinstance(q, Dirac) or is_dirac(q):
        _, v = mean_var(mean_params(q))
        return v, 0.0, "closed_form"
    if isinstance(q, EmpiricalMixture):
        mean, var = batch_mean_var(fam, q.array)
        return float(np.mean(var)), float(np.mean((mean - np.mean(mean)) ** 2)), "closed_form"
    if isinstance(q, NormalInverseGamma):
        s2bar = q.beta / (q.alpha - 1.0)
        return s2bar, s2bar / q.upsilon, "closed_form"
    force = isinstance(policy, ForceQuadrature)
    mom = [_Moments(law, policy.spec, force) for law in q.laws]
    if fam is GAUSSIAN:
        au, eu = mom[1]("mean"), mom[0]("var")
    elif fam is POISSON:
        au, eu = mom[0]("mean"), mom[0]("var")
    else:
        (m,) = mom
        e_inv2 = m("inv2")
        au = e_inv2
        eu = e_inv2 - m("inv") ** 2 if math.isfinite(e_inv2) else math.inf
    return au, eu, _label(*mom)


def _variance_mc(q, policy: ForceMonteCarlo):
    fam = q.family
    tot_b, au_b, eu_b = [], [], []
    for b, m in enumerate(_mc_batches(policy.n)):
        stream = policy.rng.spawn(b)
        theta = sample_params(q, stream.spawn(0), m)
        y = batch_sample(fam, theta, stream.spawn(1).generator())
        mean, var = batch_mean_var(fam, theta)
        tot_b.append(y.var(ddof=1))
        au_b.append(var.mean())
        eu_b.append(mean.var(ddof=1))
    tot_b, au_b, eu_b = map(np.asarray, (tot_b, au_b, eu_b))
    tu, se_tu = _mc_summary(tot_b)
    au, se_au = _mc_summary(au_b)
    eu, se_eu = _mc_summary(eu_b)
    gap = float(np.mean(tot_b - au_b - eu_b))
    return tu, au, eu, gap, {"tu": se_tu, "au": se_au, "eu": se_eu}


def variance_measures(req: MeasureRequest) -> UncertaintyReport:
    if req.measure_kind != "variance":
        raise UsageError("variance_measures needs measure_kind='variance'")
    q, policy = req.q, req.policy
    if isinstance(policy, ForceMonteCarlo):
        tu, au, eu, gap, se = _variance_mc(q, policy)
        return _report("variance", tu, au, eu, "monte_carlo", se, gap=gap)
    try:
        au, eu, est = _variance_closed(q, policy)
    except IntegrationError:
        tu, au, eu, gap, se = _variance_mc(q, _fallback(policy))
        return _report("variance", tu, au, eu, "monte_carlo", se, gap=gap)
    return _report("variance", au + eu, au, eu, est, gap=0.0)


def measure(q: SecondOrderDist, measure_kind: str = "entropy", policy: EstimatorPolicy = PreferClosedForm(), **kw) -> UncertaintyReport:
    """Convenience dispatcher over :func:`entropy_measures` / :func:`variance_measures`."""
    req = MeasureRequest(q, measure_kind, policy, **kw)
    return entropy_measures(req) if measure_kind == "entropy" else variance_measures(req)
