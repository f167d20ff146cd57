"""Second-order distributions Q over first-order parameters.

A second-order distribution is one of

* :class:`Dirac` -- a point mass at one parameter vector,
* :class:`EmpiricalMixture` -- equally weighted point masses (a deep ensemble),
* :class:`NormalInverseGamma` -- the evidential-regression prior over (mu, sigma2),
* :class:`ProductMarginals` -- independent 1-D laws, one per coordinate.

The 1-D laws used by :class:`ProductMarginals` know their own closed-form
moments where those exist; anything missing falls back to quadrature in
:func:`marginal_moments`.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    ConfigError,
    ConstraintError,
    DivergingMomentError,
    DomainError,
    IntegrationError,
    UsageError,
)
from .expfam import GAUSSIAN, FamilyDescriptor, ParamPoint, get_family
from .numerics import QuadratureSpec, RandomnessContract, digamma, integrate_1d, log_gamma

_TINY = np.finfo(float).tiny
_INF = math.inf


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# 1-D laws


class Law1D:
    """Base class for the coordinate laws of :class:`ProductMarginals`.

    Subclasses are frozen dataclasses. ``lower`` is the infimum of the
    support and ``lower_open`` tells whether it is excluded.
    """

    config_name = ""
    atomic = False
    lower_open = False

    # closed forms; None means "not tabulated", math.inf means "diverges"
    mean: float
    variance: float

    @property
    def e_log(self) -> Optional[float]:
        return None

    @property
    def e_inv(self) -> Optional[float]:
        return None

    @property
    def e_inv2(self) -> Optional[float]:
        return None

    @property
    def e_xlogx(self) -> Optional[float]:
        return None

    @property
    def lower(self) -> float:
        return -_INF

    @property
    def upper(self) -> float:
        return _INF

    def strictly_positive(self) -> bool:
        return self.lower > 0 or (self.lower == 0 and self.lower_open)

    def pdf(self, x: float) -> float:
        raise NotImplementedError

    def pieces(self):
        """Intervals on which the density is smooth (for quadrature)."""
        return [(self.lower, self.upper)]

    def atoms(self):
        """(values, weights) for atomic laws."""
        raise NotImplementedError

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def shifted(self, z: float) -> "Law1D":
        return Shifted(self, z)

    def config_items(self):
        yield "law", self.config_name
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                yield f.name, ", ".join(_fmt(x) for x in v)
            else:
                yield f.name, _fmt(v)


def _need(cond: bool, msg: str):
    if not cond:
        raise DomainError(msg)


@dataclass(frozen=True)
class PointMass(Law1D):
    value: float
    config_name = "pointmass"
    atomic = True

    def __post_init__(self):
        _need(math.isfinite(self.value), "pointmass value must be finite")

    mean = property(lambda self: self.value)
    variance = property(lambda self: 0.0)
    lower = property(lambda self: self.value)
    upper = property(lambda self: self.value)
    e_log = property(lambda self: math.log(self.value) if self.value > 0 else None)
    e_inv = property(lambda self: 1.0 / self.value if self.value > 0 else None)
    e_inv2 = property(lambda self: self.value ** -2 if self.value > 0 else None)
    e_xlogx = property(lambda self: self.value * math.log(self.value) if self.value > 0 else None)

    def atoms(self):
        return np.array([self.value]), np.array([1.0])

    def sample(self, gen, n):
        return np.full(n, self.value)

    def shifted(self, z):
        return PointMass(self.value + z)


@dataclass(frozen=True)
class Discrete(Law1D):
    """Equally weighted atoms."""

    values: tuple
    config_name = "discrete"
    atomic = True

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        _need(len(vals) >= 1, "discrete law needs at least one value")
        _need(all(math.isfinite(v) for v in vals), "discrete values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def _arr(self):
        return np.array(self.values)

    @property
    def mean(self):
        return math.fsum(self.values) / len(self.values)

    @property
    def variance(self):
        m = self.mean
        return math.fsum((v - m) ** 2 for v in self.values) / len(self.values)

    lower = property(lambda self: min(self.values))
    upper = property(lambda self: max(self.values))

    def _positive_mean(self, f):
        if self.lower <= 0:
            return None
        return math.fsum(f(v) for v in self.values) / len(self.values)

    e_log = property(lambda self: self._positive_mean(math.log))
    e_inv = property(lambda self: self._positive_mean(lambda v: 1.0 / v))
    e_inv2 = property(lambda self: self._positive_mean(lambda v: v ** -2))
    e_xlogx = property(lambda self: self._positive_mean(lambda v: v * math.log(v)))

    def atoms(self):
        n = len(self.values)
        return self._arr, np.full(n, 1.0 / n)

    def sample(self, gen, n):
        return self._arr[gen.integers(0, len(self.values), size=n)]

    def shifted(self, z):
        return Discrete(tuple(v + z for v in self.values))


@dataclass(frozen=True)
class Uniform(Law1D):
    a: float
    b: float
    config_name = "uniform"

    def __post_init__(self):
        _need(math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b,
              f"uniform needs finite a < b, got ({self.a}, {self.b})")

    mean = property(lambda self: 0.5 * (self.a + self.b))
    variance = property(lambda self: (self.b - self.a) ** 2 / 12.0)
    lower = property(lambda self: self.a)
    upper = property(lambda self: self.b)

    @property
    def e_log(self):
        a, b = self.a, self.b
        if a <= 0:
            return None
        return (b * math.log(b) - a * math.log(a)) / (b - a) - 1.0

    @property
    def e_inv(self):
        a, b = self.a, self.b
        return (math.log(b) - math.log(a)) / (b - a) if a > 0 else None

    @property
    def e_inv2(self):
        return 1.0 / (self.a * self.b) if self.a > 0 else None

    @property
    def e_xlogx(self):
        a, b = self.a, self.b
        if a <= 0:
            return None
        g = _ANTIDERIVATIVES["log"][1]
        return (g(b) - g(a)) / (b - a)

    def pdf(self, x):
        return 1.0 / (self.b - self.a) if self.a <= x <= self.b else 0.0

    def sample(self, gen, n):
        return gen.uniform(self.a, self.b, size=n)

    def shifted(self, z):
        return Uniform(self.a + z, self.b + z)


# Antiderivatives used for piecewise-linear densities:
# (int g, int x*g) for g in {log x, 1/x, 1/x^2}
_ANTIDERIVATIVES = {
    "log": (lambda x: x * math.log(x) - x, lambda x: 0.5 * x * x * math.log(x) - 0.25 * x * x),
    "inv": (lambda x: math.log(x), lambda x: x),
    "inv2": (lambda x: -1.0 / x, lambda x: math.log(x)),
    "xlogx": (
        lambda x: 0.5 * x * x * math.log(x) - 0.25 * x * x,
        lambda x: x ** 3 * math.log(x) / 3.0 - x ** 3 / 9.0,
    ),
}


@dataclass(frozen=True)
class UniformSum(Law1D):
    """Law of U(a, b) + U(-w, w) with independent terms (trapezoidal density)."""

    a: float
    b: float
    w: float
    config_name = "uniformsum"

    def __post_init__(self):
        _need(math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b,
              "uniformsum needs finite a < b")
        _need(math.isfinite(self.w) and self.w > 0, "uniformsum needs w > 0")

    mean = property(lambda self: 0.5 * (self.a + self.b))
    variance = property(lambda self: (self.b - self.a) ** 2 / 12.0 + self.w ** 2 / 3.0)
    lower = property(lambda self: self.a - self.w)
    upper = property(lambda self: self.b + self.w)

    def _knots(self):
        l1, l2 = self.b - self.a, 2.0 * self.w
        x0 = self.a - self.w
        return x0, x0 + min(l1, l2), x0 + max(l1, l2), self.b + self.w, 1.0 / max(l1, l2)

    def pdf(self, x):
        overlap = min(x - self.a, self.w) - max(x - self.b, -self.w)
        return max(overlap, 0.0) / ((self.b - self.a) * 2.0 * self.w)

    def pieces(self):
        x0, x1, x2, x3, _ = self._knots()
        return [(u, v) for u, v in ((x0, x1), (x1, x2), (x2, x3)) if v > u]

    def _linear_expectation(self, kind):
        if self.lower <= 0:
            return None
        g0, g1 = _ANTIDERIVATIVES[kind]
        x0, x1, x2, x3, h = self._knots()
        total = 0.0
        # density on each piece is p + q x
        for u, v, p, q in (
            (x0, x1, -h * x0 / (x1 - x0) if x1 > x0 else 0.0, h / (x1 - x0) if x1 > x0 else 0.0),
            (x1, x2, h, 0.0),
            (x2, x3, h * x3 / (x3 - x2) if x3 > x2 else 0.0, -h / (x3 - x2) if x3 > x2 else 0.0),
        ):
            if v > u:
                total += p * (g0(v) - g0(u)) + q * (g1(v) - g1(u))
        return total

    e_log = property(lambda self: self._linear_expectation("log"))
    e_inv = property(lambda self: self._linear_expectation("inv"))
    e_inv2 = property(lambda self: self._linear_expectation("inv2"))
    e_xlogx = property(lambda self: self._linear_expectation("xlogx"))

    def sample(self, gen, n):
        return gen.uniform(self.a, self.b, size=n) + gen.uniform(-self.w, self.w, size=n)

    def shifted(self, z):
        return UniformSum(self.a + z, self.b + z, self.w)


@dataclass(frozen=True)
class Pareto(Law1D):
    """Pareto law with scale 1: density alpha x^(-alpha-1) on [1, inf)."""

    alpha: float
    config_name = "pareto"

    def __post_init__(self):
        _need(math.isfinite(self.alpha) and self.alpha > 0, "pareto needs alpha > 0")

    @property
    def mean(self):
        a = self.alpha
        return a / (a - 1.0) if a > 1 else _INF

    @property
    def variance(self):
        a = self.alpha
        return a / ((a - 1.0) ** 2 * (a - 2.0)) if a > 2 else _INF

    lower = property(lambda self: 1.0)
    e_log = property(lambda self: 1.0 / self.alpha)
    e_inv = property(lambda self: self.alpha / (self.alpha + 1.0))
    e_inv2 = property(lambda self: self.alpha / (self.alpha + 2.0))

    @property
    def e_xlogx(self):
        a = self.alpha
        return a / (a - 1.0) ** 2 if a > 1 else _INF

    def pdf(self, x):
        return self.alpha * x ** (-self.alpha - 1.0) if x >= 1.0 else 0.0

    def sample(self, gen, n):
        return 1.0 + gen.pareto(self.alpha, size=n)


@dataclass(frozen=True)
class InverseGamma(Law1D):
    alpha: float
    beta: float
    config_name = "invgamma"
    lower_open = True

    def __post_init__(self):
        _need(self.alpha > 0 and self.beta > 0 and math.isfinite(self.alpha * self.beta),
              "invgamma needs alpha > 0 and beta > 0")

    @property
    def mean(self):
        return self.beta / (self.alpha - 1.0) if self.alpha > 1 else _INF

    @property
    def variance(self):
        a, b = self.alpha, self.beta
        return b * b / ((a - 1.0) ** 2 * (a - 2.0)) if a > 2 else _INF

    lower = property(lambda self: 0.0)
    e_log = property(lambda self: math.log(self.beta) - digamma(self.alpha))
    e_inv = property(lambda self: self.alpha / self.beta)
    e_inv2 = property(lambda self: self.alpha * (self.alpha + 1.0) / self.beta ** 2)

    @property
    def e_xlogx(self):
        # x times the IG(a, b) density is the mean times the IG(a - 1, b) density
        a, b = self.alpha, self.beta
        return b / (a - 1.0) * (math.log(b) - digamma(a - 1.0)) if a > 1 else _INF

    def pdf(self, x):
        if x <= 0:
            return 0.0
        a, b = self.alpha, self.beta
        return math.exp(a * math.log(b) - log_gamma(a) - (a + 1.0) * math.log(x) - b / x)

    def sample(self, gen, n):
        return self.beta / np.maximum(gen.gamma(self.alpha, 1.0, size=n), _TINY)


@dataclass(frozen=True)
class GammaLaw(Law1D):
    shape: float
    rate: float
    config_name = "gamma"
    lower_open = True

    def __post_init__(self):
        _need(self.shape > 0 and self.rate > 0 and math.isfinite(self.shape * self.rate),
              "gamma needs shape > 0 and rate > 0")

    mean = property(lambda self: self.shape / self.rate)
    variance = property(lambda self: self.shape / self.rate ** 2)
    lower = property(lambda self: 0.0)
    e_log = property(lambda self: digamma(self.shape) - math.log(self.rate))

    @property
    def e_inv(self):
        k, r = self.shape, self.rate
        return r / (k - 1.0) if k > 1 else _INF

    @property
    def e_inv2(self):
        k, r = self.shape, self.rate
        return r * r / ((k - 1.0) * (k - 2.0)) if k > 2 else _INF

    @property
    def e_xlogx(self):
        k, r = self.shape, self.rate
        return k / r * (digamma(k + 1.0) - math.log(r))

    def pdf(self, x):
        if x <= 0:
            return 0.0
        k, r = self.shape, self.rate
        return math.exp(k * math.log(r) - log_gamma(k) + (k - 1.0) * math.log(x) - r * x)

    def sample(self, gen, n):
        return np.maximum(gen.gamma(self.shape, 1.0 / self.rate, size=n), _TINY)


@dataclass(frozen=True)
class GaussianLaw(Law1D):
    mean_: float
    var: float
    config_name = "gausslaw"

    def __post_init__(self):
        _need(math.isfinite(self.mean_) and math.isfinite(self.var) and self.var > 0,
              "gausslaw needs a finite mean and var > 0")

    mean = property(lambda self: self.mean_)
    variance = property(lambda self: self.var)

    def pdf(self, x):
        d = x - self.mean_
        return math.exp(-0.5 * d * d / self.var) / math.sqrt(2 * math.pi * self.var)

    def sample(self, gen, n):
        return gen.normal(self.mean_, math.sqrt(self.var), size=n)

    def shifted(self, z):
        return GaussianLaw(self.mean_ + z, self.var)

    def config_items(self):
        yield "law", self.config_name
        yield "mean", _fmt(self.mean_)
        yield "var", _fmt(self.var)


@dataclass(frozen=True)
class Shifted(Law1D):
    """``base`` translated by ``z``; log/inverse moments go through quadrature."""

    base: Law1D
    z: float
    config_name = "shifted"

    def __post_init__(self):
        _need(math.isfinite(self.z), "shift must be finite")

    atomic = property(lambda self: self.base.atomic)
    lower_open = property(lambda self: self.base.lower_open)
    mean = property(lambda self: self.base.mean + self.z)
    variance = property(lambda self: self.base.variance)
    lower = property(lambda self: self.base.lower + self.z)
    upper = property(lambda self: self.base.upper + self.z)

    def pdf(self, x):
        return self.base.pdf(x - self.z)

    def pieces(self):
        return [(u + self.z, v + self.z) for u, v in self.base.pieces()]

    def atoms(self):
        v, w = self.base.atoms()
        return v + self.z, w

    def sample(self, gen, n):
        return self.base.sample(gen, n) + self.z

    def shifted(self, z):
        return Shifted(self.base, self.z + z)

    def config_items(self):
        yield from self.base.config_items()
        yield "shift", _fmt(self.z)


LAWS_1D = {
    cls.config_name: cls
    for cls in (PointMass, Discrete, Uniform, UniformSum, Pareto, InverseGamma, GammaLaw, GaussianLaw)
}


def law_expectation(law: Law1D, f, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """E[f(X)] for X ~ law: exact sum for atomic laws, quadrature otherwise."""
    if law.atomic:
        values, weights = law.atoms()
        return math.fsum(w * f(v) for v, w in zip(values, weights))
    return math.fsum(
        integrate_1d(lambda t: f(t) * law.pdf(t), u, v, spec) for u, v in law.pieces()
    )


# ---------------------------------------------------------------------------
# second-order distributions


def _check_law_in_theta(family: FamilyDescriptor, index: int, law: Law1D):
    if family.positive[index] and not law.strictly_positive():
        raise ConstraintError(
            f"{family.name} parameter {family.param_names[index]} must stay > 0, "
            f"but the law {law} puts mass at or below {law.lower}"
        )


@dataclass(frozen=True)
class Dirac:
    theta: ParamPoint

    @property
    def family(self) -> FamilyDescriptor:
        return self.theta.family


@dataclass(frozen=True)
class EmpiricalMixture:
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise DomainError("an empirical mixture needs at least one member")
        fam = members[0].family
        if any(m.family is not fam for m in members):
            raise UsageError("mixture members must share one family")
        object.__setattr__(self, "members", members)

    @property
    def family(self) -> FamilyDescriptor:
        return self.members[0].family

    @property
    def array(self) -> np.ndarray:
        return np.array([m.values for m in self.members], dtype=float)

    @classmethod
    def from_columns(cls, family: FamilyDescriptor, **columns):
        """Build from per-parameter sequences, e.g. ``mu=[-2, 2], sigma2=[1, 1]``."""
        cols = [list(columns[name]) for name in family.param_names]
        if len({len(c) for c in cols}) != 1:
            raise DomainError("mixture parameter columns must have equal length")
        return cls(tuple(ParamPoint(family, vals) for vals in zip(*cols)))


@dataclass(frozen=True)
class NormalInverseGamma:
    """sigma2 ~ InvGamma(alpha, beta), mu | sigma2 ~ N(gamma, sigma2 / upsilon)."""

    gamma: float
    upsilon: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise DomainError("nig gamma must be finite")
        if not (self.upsilon > 0 and self.beta > 0 and math.isfinite(self.upsilon * self.beta)):
            raise DomainError("nig needs upsilon > 0 and beta > 0")
        if not (self.alpha > 1 and math.isfinite(self.alpha)):
            raise DomainError(f"nig needs alpha > 1 so the mean exists, got {self.alpha}")

    family = GAUSSIAN


@dataclass(frozen=True)
class ProductMarginals:
    family: FamilyDescriptor
    laws: tuple

    def __post_init__(self):
        laws = tuple(self.laws)
        if len(laws) != self.family.param_dim:
            raise DomainError(f"{self.family.name} needs {self.family.param_dim} coordinate laws")
        for i, law in enumerate(laws):
            _check_law_in_theta(self.family, i, law)
        object.__setattr__(self, "laws", laws)


SecondOrderDist = Union[Dirac, EmpiricalMixture, NormalInverseGamma, ProductMarginals]


def product(family: FamilyDescriptor, **laws) -> ProductMarginals:
    """ProductMarginals from keyword laws; bare numbers become point masses."""
    out = []
    for name in family.param_names:
        law = laws[name]
        out.append(law if isinstance(law, Law1D) else PointMass(float(law)))
    return ProductMarginals(family, tuple(out))


def marginal_law(q: SecondOrderDist, index: int) -> Optional[Law1D]:
    """The 1-D marginal of coordinate ``index`` as a law object, when expressible."""
    if isinstance(q, Dirac):
        return PointMass(q.theta[index])
    if isinstance(q, EmpiricalMixture):
        return Discrete(tuple(m[index] for m in q.members))
    if isinstance(q, ProductMarginals):
        return q.laws[index]
    if index == 1:
        return InverseGamma(q.alpha, q.beta)
    return None  # NIG mu marginal is a Student t


# ---------------------------------------------------------------------------
# moments


@dataclass(frozen=True)
class MarginalMoments:
    mean: tuple
    variance: tuple
    e_log: tuple
    e_inv: tuple
    e_inv2: tuple


def _quad_or_none(law, f, spec):
    try:
        return law_expectation(law, f, spec)
    except IntegrationError:
        return None


def _law_moments(law: Law1D, spec: QuadratureSpec):
    e_log, e_inv, e_inv2 = law.e_log, law.e_inv, law.e_inv2
    if law.strictly_positive():
        if e_log is None:
            e_log = _quad_or_none(law, math.log, spec)
        if e_inv is None:
            e_inv = _quad_or_none(law, lambda t: 1.0 / t, spec)
        if e_inv2 is None:
            e_inv2 = _quad_or_none(law, lambda t: 1.0 / (t * t), spec)
    return law.mean, law.variance, e_log, e_inv, e_inv2


def marginal_moments(q: SecondOrderDist, spec: QuadratureSpec = QuadratureSpec()) -> MarginalMoments:
    """Per-coordinate E, V, E[log], E[1/x], E[1/x^2] (the last three where defined)."""
    rows = []
    for i in range(q.family.param_dim):
        law = marginal_law(q, i)
        if law is None:  # NIG mu
            rows.append((q.gamma, q.beta / (q.upsilon * (q.alpha - 1.0)), None, None, None))
        else:
            rows.append(_law_moments(law, spec))
    cols = list(zip(*rows))
    return MarginalMoments(*(tuple(c) for c in cols))


def mean_params(q: SecondOrderDist) -> ParamPoint:
    """theta_bar = E_Q[theta], coordinate-wise."""
    if isinstance(q, Dirac):
        return q.theta
    if isinstance(q, EmpiricalMixture):
        arr = q.array
        return ParamPoint(q.family, tuple(math.fsum(arr[:, j]) / len(arr) for j in range(arr.shape[1])))
    if isinstance(q, NormalInverseGamma):
        return ParamPoint(GAUSSIAN, (q.gamma, q.beta / (q.alpha - 1.0)))
    means = tuple(law.mean for law in q.laws)
    if not all(math.isfinite(m) for m in means):
        raise DivergingMomentError(f"second-order mean diverges: {means}")
    return ParamPoint(q.family, means)


def is_dirac(q: SecondOrderDist) -> bool:
    if isinstance(q, Dirac):
        return True
    if isinstance(q, NormalInverseGamma):
        return False
    if isinstance(q, EmpiricalMixture):
        return all(m.values == q.members[0].values for m in q.members)
    return all(law.variance == 0 for law in q.laws)


# ---------------------------------------------------------------------------
# sampling


def _positive_guard(family, arr):
    for j, pos in enumerate(family.positive):
        if pos:
            np.maximum(arr[:, j], _TINY, out=arr[:, j])
    return arr


def sample_params(q: SecondOrderDist, rng: RandomnessContract, n: int) -> np.ndarray:
    """n i.i.d. parameter draws from Q as an ``(n, p)`` array (rows are theta)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    gen = rng.generator()
    fam = q.family
    if isinstance(q, Dirac):
        return np.tile(np.array(q.theta.values), (n, 1))
    if isinstance(q, EmpiricalMixture):
        arr = q.array
        return arr[gen.integers(0, len(arr), size=n)]
    if isinstance(q, NormalInverseGamma):
        sigma2 = q.beta / np.maximum(gen.gamma(q.alpha, 1.0, size=n), _TINY)
        mu = gen.normal(q.gamma, np.sqrt(sigma2 / q.upsilon))
        return _positive_guard(fam, np.column_stack([mu, sigma2]))
    cols = [law.sample(gen, n) for law in q.laws]
    return _positive_guard(fam, np.column_stack(cols).astype(float))


# ---------------------------------------------------------------------------
# spreads and shifts


@dataclass(frozen=True)
class UniformWidth:
    """Z ~ U(-w, w)."""

    w: float

    def __post_init__(self):
        _need(math.isfinite(self.w) and self.w > 0, "uniform spread width must be > 0")

    variance = property(lambda self: self.w ** 2 / 3.0)


@dataclass(frozen=True)
class SymmetricDiracSplit:
    """Z = +d or -d with probability 1/2 each."""

    d: float

    def __post_init__(self):
        _need(math.isfinite(self.d) and self.d > 0, "split distance must be > 0")

    variance = property(lambda self: self.d ** 2)


Perturbation = Union[UniformWidth, SymmetricDiracSplit, None]


@dataclass(frozen=True)
class SpreadSpec:
    """One zero-mean perturbation (or None) per parameter coordinate."""

    perturbations: tuple

    def __post_init__(self):
        perts = tuple(self.perturbations)
        if not any(p is not None for p in perts):
            raise DomainError("a mean-preserving spread must perturb at least one coordinate")
        object.__setattr__(self, "perturbations", perts)

    @classmethod
    def on(cls, family: FamilyDescriptor, **per_param):
        return cls(tuple(per_param.get(name) for name in family.param_names))


@dataclass(frozen=True)
class ShiftVector:
    z: tuple

    def __post_init__(self):
        z = tuple(float(v) for v in self.z)
        if not all(math.isfinite(v) for v in z):
            raise DomainError("shift must be finite")
        if all(v == 0 for v in z):
            raise DomainError("a location shift must be non-zero")
        object.__setattr__(self, "z", z)


def _unsupported(law, pert):
    return UsageError(f"no exact spread for {type(law).__name__} with {type(pert).__name__}")


def _spread_law(law: Law1D, pert: Perturbation) -> Law1D:
    if pert is None:
        return law
    if isinstance(pert, SymmetricDiracSplit):
        if law.atomic:
            values, _ = law.atoms()
            return Discrete(tuple(v - pert.d for v in values) + tuple(v + pert.d for v in values))
        raise _unsupported(law, pert)
    if isinstance(law, PointMass):
        return Uniform(law.value - pert.w, law.value + pert.w)
    if isinstance(law, Uniform):
        return UniformSum(law.a, law.b, pert.w)
    raise _unsupported(law, pert)


def _check_theta(family, arr):
    for j, pos in enumerate(family.positive):
        if pos and not np.all(arr[:, j] > 0):
            raise ConstraintError(
                f"{family.name} parameter {family.param_names[j]} would leave the parameter space"
            )


def mean_preserving_spread(q: SecondOrderDist, spec: SpreadSpec) -> SecondOrderDist:
    """Exact law of theta + Z for the supported (law, perturbation) pairs."""
    fam = q.family
    if len(spec.perturbations) != fam.param_dim:
        raise UsageError(f"spread has {len(spec.perturbations)} coordinates, {fam.name} has {fam.param_dim}")
    only_splits = all(p is None or isinstance(p, SymmetricDiracSplit) for p in spec.perturbations)
    if isinstance(q, (Dirac, EmpiricalMixture)) and only_splits:
        arr = np.array([q.theta.values]) if isinstance(q, Dirac) else q.array
        for j, p in enumerate(spec.perturbations):
            if p is not None:
                lo, hi = arr.copy(), arr.copy()
                lo[:, j] -= p.d
                hi[:, j] += p.d
                arr = np.concatenate([lo, hi])
        _check_theta(fam, arr)
        return EmpiricalMixture(tuple(ParamPoint(fam, row) for row in arr))
    if isinstance(q, Dirac):
        q = ProductMarginals(fam, tuple(PointMass(v) for v in q.theta.values))
    if not isinstance(q, ProductMarginals):
        raise UsageError(f"no exact spread for {type(q).__name__} with {spec}")
    laws = tuple(_spread_law(law, p) for law, p in zip(q.laws, spec.perturbations))
    return ProductMarginals(fam, laws)


def location_shift(q: SecondOrderDist, z: ShiftVector) -> SecondOrderDist:
    """Law of theta + z."""
    fam = q.family
    if len(z.z) != fam.param_dim:
        raise UsageError(f"shift has {len(z.z)} coordinates, {fam.name} has {fam.param_dim}")
    if isinstance(q, (Dirac, EmpiricalMixture)):
        arr = (np.array([q.theta.values]) if isinstance(q, Dirac) else q.array) + np.array(z.z)
        _check_theta(fam, arr)
        if isinstance(q, Dirac):
            return Dirac(ParamPoint(fam, arr[0]))
        return EmpiricalMixture(tuple(ParamPoint(fam, row) for row in arr))
    if isinstance(q, NormalInverseGamma):
        if z.z[1] != 0:
            raise UsageError("shifting sigma2 of a normal-inverse-gamma law is not supported")
        return NormalInverseGamma(q.gamma + z.z[0], q.upsilon, q.alpha, q.beta)
    laws = tuple(law if dz == 0 else law.shifted(dz) for law, dz in zip(q.laws, z.z))
    return ProductMarginals(fam, laws)


# ---------------------------------------------------------------------------
# config vocabulary

_LAW_ARGS = {
    "pointmass": ("value",),
    "discrete": ("values",),
    "uniform": ("a", "b"),
    "uniformsum": ("a", "b", "w"),
    "pareto": ("alpha",),
    "invgamma": ("alpha", "beta"),
    "gamma": ("shape", "rate"),
    "gausslaw": ("mean", "var"),
}


def _number(mapping, key, prefix):
    if key not in mapping:
        raise ConfigError("missing value", prefix + key)
    try:
        return float(mapping[key])
    except (TypeError, ValueError):
        raise ConfigError(f"not a number: {mapping[key]!r}", prefix + key) from None


def _numbers(mapping, key, prefix):
    if key not in mapping:
        raise ConfigError("missing value", prefix + key)
    try:
        return tuple(float(v) for v in str(mapping[key]).split(","))
    except ValueError:
        raise ConfigError(f"not a list of numbers: {mapping[key]!r}", prefix + key) from None


def _law_from_config(mapping, prefix) -> Law1D:
    name = mapping.get("law")
    if name not in _LAW_ARGS:
        raise ConfigError(f"unknown law {name!r}; expected one of {', '.join(_LAW_ARGS)}", prefix + "law")
    args = _LAW_ARGS[name]
    if name == "discrete":
        vals = [_numbers(mapping, "values", prefix)]
    else:
        vals = [_number(mapping, a, prefix) for a in args]
    try:
        law = LAWS_1D[name](*vals)
    except DomainError as exc:
        raise ConfigError(str(exc), prefix + "law") from None
    if "shift" in mapping:
        law = law.shifted(_number(mapping, "shift", prefix))
    return law


def _sub(mapping, key):
    head = key + "."
    return {k[len(head):]: v for k, v in mapping.items() if k.startswith(head)}


def from_config(family: FamilyDescriptor, mapping, prefix: str = "second_order.") -> SecondOrderDist:
    """Build a second-order law from flat keys (already stripped of ``prefix``).

    ``law`` selects the form: ``dirac``/``mixture`` take one value (list)
    per parameter name, ``nig`` takes gamma/upsilon/alpha/beta, ``product``
    takes ``<param>.law`` plus that law's arguments, and a bare 1-D law
    name applies to ``target`` with the other coordinates at ``fixed.<param>``.
    """
    name = mapping.get("law")
    try:
        if name == "dirac":
            return Dirac(ParamPoint(family, [_number(mapping, p, prefix) for p in family.param_names]))
        if name == "mixture":
            cols = {p: _numbers(mapping, p, prefix) for p in family.param_names}
            return EmpiricalMixture.from_columns(family, **cols)
        if name == "nig":
            if family is not GAUSSIAN:
                raise ConfigError("nig is only defined for the gaussian family", prefix + "law")
            return NormalInverseGamma(*(_number(mapping, k, prefix) for k in ("gamma", "upsilon", "alpha", "beta")))
        if name == "product":
            laws = [_law_from_config(_sub(mapping, p), f"{prefix}{p}.") for p in family.param_names]
            return ProductMarginals(family, tuple(laws))
        if name in _LAW_ARGS:
            target = mapping.get("target")
            if target is None:
                if family.param_dim != 1:
                    raise ConfigError("a single law on a multi-parameter family needs 'target'", prefix + "target")
                target = family.param_names[0]
            if target not in family.param_names:
                raise ConfigError(f"unknown parameter {target!r}", prefix + "target")
            fixed = _sub(mapping, "fixed")
            laws = []
            for p in family.param_names:
                if p == target:
                    laws.append(_law_from_config(mapping, prefix))
                else:
                    laws.append(PointMass(_number(fixed, p, prefix + "fixed.")))
            return ProductMarginals(family, tuple(laws))
    except (DomainError, ConstraintError) as exc:
        raise ConfigError(str(exc), prefix + "law") from None
    raise ConfigError(
        f"unknown law {name!r}; expected dirac, mixture, nig, product or one of {', '.join(_LAW_ARGS)}",
        prefix + "law",
    )


def to_config(q: SecondOrderDist) -> dict:
    """Inverse of :func:`from_config` (keys without prefix, exact float repr)."""
    fam = q.family
    if isinstance(q, Dirac):
        return {"law": "dirac", **{p: _fmt(v) for p, v in q.theta.as_dict().items()}}
    if isinstance(q, EmpiricalMixture):
        arr = q.array
        return {"law": "mixture", **{p: ", ".join(_fmt(v) for v in arr[:, j]) for j, p in enumerate(fam.param_names)}}
    if isinstance(q, NormalInverseGamma):
        return {"law": "nig", "gamma": _fmt(q.gamma), "upsilon": _fmt(q.upsilon),
                "alpha": _fmt(q.alpha), "beta": _fmt(q.beta)}
    out = {"law": "product"}
    for p, law in zip(fam.param_names, q.laws):
        for k, v in law.config_items():
            out[f"{p}.{k}"] = v
    return out


def describe(q: SecondOrderDist) -> str:
    """Short one-line label, e.g. ``gaussian nig(gamma=0, ...)``."""
    cfg = to_config(q)
    law = cfg.pop("law")
    body = ", ".join(f"{k}={v}" for k, v in cfg.items())
    return f"{q.family.name} {law}({body})"


def family_of_config(mapping, key="family") -> FamilyDescriptor:
    if key not in mapping:
        raise ConfigError("missing value", key)
    try:
        return get_family(mapping[key])
    except UsageError as exc:
        raise ConfigError(str(exc), key) from None
