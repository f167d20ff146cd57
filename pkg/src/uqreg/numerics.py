"""Special functions, seeded random streams and 1-D quadrature.

Everything here is a pure function of its arguments. ``digamma`` and
``log_gamma`` accept scalars or numpy arrays and return the same shape.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, IntegrationError

__all__ = [
    "EULER_GAMMA",
    "QuadratureSpec",
    "RandomnessContract",
    "digamma",
    "log_gamma",
    "integrate_1d",
]

EULER_GAMMA = 0.57721566490153286061

_ASYMPTOTIC_START = 10.0
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Bernoulli numbers B_2 .. B_14
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)
_DIGAMMA_COEF = tuple(b / (2 * k) for k, b in enumerate(_BERNOULLI, start=1))
_LGAMMA_COEF = tuple(b / (2 * k * (2 * k - 1)) for k, b in enumerate(_BERNOULLI, start=1))


def _as_positive_array(x, name):
    arr = np.array(x, dtype=float, copy=True)
    if not np.all(arr > 0):  # also catches nan
        raise DomainError(f"{name} requires x > 0, got {x!r}")
    return arr


def _shift_up(x):
    """Shift entries below the asymptotic threshold up by whole steps.

    Returns the shifted array and the per-entry step count.
    """
    steps = np.where(x < _ASYMPTOTIC_START, np.ceil(_ASYMPTOTIC_START - x), 0.0)
    return x + steps, steps.astype(int)


def digamma(x):
    """Digamma function psi(x) for x > 0.

    Upward recurrence psi(x) = psi(x + 1) - 1/x until x >= 10, then the
    asymptotic expansion with seven Bernoulli terms.
    """
    scalar = np.ndim(x) == 0
    z = _as_positive_array(x, "digamma")
    correction = np.zeros_like(z)
    shifted, steps = _shift_up(z)
    for k in range(int(steps.max(initial=0))):
        active = steps > k
        correction[active] -= 1.0 / (z[active] + k)
    inv2 = 1.0 / (shifted * shifted)
    series = np.zeros_like(z)
    for coef in reversed(_DIGAMMA_COEF):
        series = (series + coef) * inv2
    out = np.log(shifted) - 0.5 / shifted - series + correction
    return float(out) if scalar else out


def log_gamma(x):
    """log Gamma(x) for x > 0 (Stirling series after upward shifting)."""
    scalar = np.ndim(x) == 0
    z = _as_positive_array(x, "log_gamma")
    shifted, steps = _shift_up(z)
    product = np.ones_like(z)
    for k in range(int(steps.max(initial=0))):
        active = steps > k
        product[active] *= z[active] + k
    inv = 1.0 / shifted
    inv2 = inv * inv
    series = np.zeros_like(z)
    for coef in reversed(_LGAMMA_COEF):
        series = series * inv2 + coef
    series *= inv
    out = (shifted - 0.5) * np.log(shifted) - shifted + _LOG_SQRT_2PI + series
    out -= np.log(product)
    return float(out) if scalar else out


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 10_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


def _mapped_integrand(f, lower, upper):
    """Map the range onto a finite interval with x = a + t/(1-t)."""
    lo_inf, hi_inf = math.isinf(lower), math.isinf(upper)
    if not lo_inf and not hi_inf:
        return f, lower, upper
    if not lo_inf:
        def g(t):
            s = 1.0 - t
            return f(lower + t / s) / (s * s)
        return g, 0.0, 1.0
    if not hi_inf:
        def g(t):
            s = 1.0 - t
            return f(upper - t / s) / (s * s)
        return g, 0.0, 1.0

    def g(t):
        # x = t/(1-|t|) maps (-1, 1) onto the real line
        s = 1.0 - abs(t)
        return f(t / s) / (s * s)
    return g, -1.0, 1.0


def integrate_1d(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    spec: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Adaptive Gauss-Kronrod estimate of the integral of ``f`` over [lower, upper].

    Infinite limits are handled by a monotone change of variables. Raises
    :class:`IntegrationError` (carrying the best estimate) when the
    tolerance is not met within ``spec.max_subdivisions`` subintervals.
    """
    if math.isnan(lower) or math.isnan(upper):
        raise DomainError("integration limits must not be nan")
    if lower == upper:
        return 0.0
    if lower > upper:
        return -integrate_1d(f, upper, lower, spec)
    g, a, b = _mapped_integrand(f, lower, upper)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(
            g, a, b,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
            full_output=1,
        )
    value, abserr = res[0], res[1]
    if len(res) > 3 or not math.isfinite(value):
        raise IntegrationError("quadrature did not converge", value, abserr)
    return value


_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


def _splitmix64(z: int) -> int:
    z = (z + _GOLDEN64) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RandomnessContract:
    """Identifies one reproducible random stream.

    Draws come from a Philox counter-based generator keyed by
    ``(root_seed, stream_id)``, so a stream never depends on what other
    streams were consumed before it.
    """

    root_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("root_seed", "stream_id"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and 0 <= v <= _MASK64):
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        key = np.array([self.root_seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def spawn(self, index: int) -> "RandomnessContract":
        """Child stream number ``index``; distinct indices give distinct streams."""
        child = _splitmix64((self.stream_id ^ _splitmix64(index + 1)) & _MASK64)
        return RandomnessContract(self.root_seed, child)
