import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uqreg.errors import DomainError, IntegrationError
from uqreg.numerics import (
    EULER_GAMMA,
    QuadratureSpec,
    RandomnessContract,
    digamma,
    integrate_1d,
    log_gamma,
)

mpmath.mp.dps = 40

GRID = [1e-8, 1e-3, 0.1, 0.5, 0.999, 1.0, 1.5, 2.0, 2.5, 3.7, 9.99, 10.0, 10.5, 17.3,
        50.0, 123.456, 1e3, 1e4, 1e6, 1e8]
positive = st.floats(min_value=1e-6, max_value=1e7, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("x", GRID)
def test_digamma_against_mpmath(x):
    ref = float(mpmath.digamma(x))
    assert abs(digamma(x) - ref) <= 1e-12 * max(1.0, abs(ref))


@pytest.mark.parametrize("x", GRID)
def test_log_gamma_against_mpmath(x):
    # absolute 1e-12 where |log Gamma| <= 1, relative 1e-13 beyond (one ulp limits)
    ref = float(mpmath.loggamma(x))
    tol = 1e-12 if abs(ref) <= 1 else 1e-13 * abs(ref)
    assert abs(log_gamma(x) - ref) <= tol


def test_special_values():
    assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-15)
    assert digamma(0.5) == pytest.approx(-EULER_GAMMA - 2 * math.log(2), abs=1e-14)
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(2.0) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-14)


@given(positive)
def test_digamma_recurrence(x):
    # psi(x) ~ -1/x for small x, so the sum cancels; allow a few ulps of 1/x
    assert digamma(x + 1) == pytest.approx(digamma(x) + 1 / x, rel=1e-12, abs=1e-12 + 1e-15 / x)


@given(st.floats(min_value=1e-3, max_value=1e6))
def test_log_gamma_recurrence(x):
    lhs, rhs = log_gamma(x + 1), log_gamma(x) + math.log(x)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@given(st.floats(min_value=0.05, max_value=1e4))
def test_digamma_is_derivative_of_log_gamma(x):
    h = 1e-5 * max(x, 1.0)
    fd = (log_gamma(x + h) - log_gamma(x - h)) / (2 * h)
    assert fd == pytest.approx(digamma(x), rel=1e-5, abs=1e-5)


def test_vectorized_shape_and_values():
    x = np.array([[0.5, 1.0], [7.5, 200.0]])
    d, lg = digamma(x), log_gamma(x)
    assert d.shape == lg.shape == x.shape
    for idx in np.ndindex(x.shape):
        assert d[idx] == digamma(float(x[idx]))
        assert lg[idx] == log_gamma(float(x[idx]))
    assert isinstance(digamma(2.0), float)


@pytest.mark.parametrize("bad", [0.0, -1.0, -0.5, float("nan"), [1.0, 0.0]])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        digamma(bad)
    with pytest.raises(DomainError):
        log_gamma(bad)


# ---------------------------------------------------------------------------
# quadrature


@pytest.mark.parametrize(
    "f, a, b, ref",
    [
        (lambda x: math.log(x) / 2, 1.0, 3.0, 1.5 * math.log(3) - 1.0),
        (lambda x: math.exp(-x * x / 2) / math.sqrt(2 * math.pi), -math.inf, math.inf, 1.0),
        (lambda x: math.exp(-x), 0.0, math.inf, 1.0),
        (lambda x: math.exp(x), -math.inf, 0.0, 1.0),
        (lambda x: 1 / math.sqrt(x), 0.0, 1.0, 2.0),
        (lambda x: x ** -2.5, 1.0, math.inf, 1 / 1.5),
    ],
)
def test_integrate_known_values(f, a, b, ref):
    assert integrate_1d(f, a, b) == pytest.approx(ref, abs=1e-9)


def test_integrate_limits():
    f = lambda x: x * x
    assert integrate_1d(f, 2.0, 2.0) == 0.0
    assert integrate_1d(f, 1.0, 0.0) == pytest.approx(-1 / 3, abs=1e-12)
    with pytest.raises(DomainError):
        integrate_1d(f, float("nan"), 1.0)


def test_integrate_nonconvergent_raises_with_estimate():
    with pytest.raises(IntegrationError) as info:
        integrate_1d(lambda x: 1 / x, 0.0, 1.0, QuadratureSpec(max_subdivisions=50))
    assert info.value.estimate is not None


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureSpec(max_subdivisions=0)


# ---------------------------------------------------------------------------
# random streams


def test_stream_is_reproducible():
    a = RandomnessContract(42, 3).generator().standard_normal(100)
    b = RandomnessContract(42, 3).generator().standard_normal(100)
    assert np.array_equal(a, b)


def test_streams_differ():
    draws = {
        (s, i): RandomnessContract(s, i).generator().random(4).tobytes()
        for s in (0, 1, 2**64 - 1)
        for i in (0, 1, 2)
    }
    assert len(set(draws.values())) == len(draws)


@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6))
def test_spawn_deterministic_and_distinct(seed, idx):
    rc = RandomnessContract(seed)
    assert rc.spawn(idx) == rc.spawn(idx)
    assert rc.spawn(idx) != rc.spawn(idx + 1)
    assert rc.spawn(idx).root_seed == seed


def test_spawn_children_are_independent_of_consumption():
    parent = RandomnessContract(7)
    first = parent.spawn(5).generator().random(3)
    parent.spawn(4).generator().random(1000)
    assert np.array_equal(first, parent.spawn(5).generator().random(3))


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5, "1"])
def test_invalid_seed(seed):
    with pytest.raises(DomainError):
        RandomnessContract(seed)
