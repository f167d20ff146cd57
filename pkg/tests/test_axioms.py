import math

import pytest

from uqreg.axioms import (
    EXPECTED_SUMMARY,
    REPRO_IDS,
    AxiomVerdict,
    DiracTriple,
    check_a0,
    check_a1,
    check_a2,
    check_a3,
    check_a4,
    check_a5,
    default_catalog,
    load_catalog,
    random_batch,
    recheck,
    reproduce_counterexample,
    run_item,
    run_suite,
    summarize,
    triple_along,
)
from uqreg.errors import ConfigError, DomainError, UsageError
from uqreg.expfam import EXPONENTIAL, GAUSSIAN, POISSON, ParamPoint, exponential, gaussian, poisson
from uqreg.numerics import RandomnessContract
from uqreg.second_order import (
    Dirac,
    EmpiricalMixture,
    GammaLaw,
    InverseGamma,
    NormalInverseGamma,
    Pareto,
    ShiftVector,
    SpreadSpec,
    SymmetricDiracSplit,
    Uniform,
    UniformWidth,
    product,
)

RC = RandomnessContract


@pytest.fixture(scope="module")
def suite():
    return run_suite()


# ---------------------------------------------------------------------------
# individual checks


def test_a0_entropy_negative_au():
    v = check_a0("entropy", [Dirac(exponential(2 * math.e))])
    assert v.status == "violated" and set(v.witness["negative"]) == {"tu", "au"}
    assert check_a0("entropy", [Dirac(exponential(2 * math.e))], components=("eu",)).status == "holds"


def test_a0_variance_holds_on_random_batch():
    v = check_a0("variance", random_batch(RC(1), 100))
    assert v.status == "holds" and v.scope == "all"
    with pytest.raises(UsageError):
        check_a0("variance", [])


def test_a0_eu_scope_label():
    v = check_a0("entropy", random_batch(RC(2), 50), components=("eu",))
    assert v.label == "A0_eu" and v.status == "holds"


def test_a1_variance_blind_spot():
    v = check_a1("variance", GAUSSIAN, RC(3), n_forward=10, n_search=0)
    assert v.status == "violated"
    assert v.witness["is_dirac"] is False
    assert v.witness["values"]["eu"] == 0.0


@pytest.mark.parametrize("fam", [GAUSSIAN, EXPONENTIAL, POISSON], ids=lambda f: f.name)
def test_a1_entropy_holds(fam):
    assert check_a1("entropy", fam, RC(4), n_forward=20, n_search=40).status == "holds"


def test_a1_candidates():
    q = product(GAUSSIAN, mu=0.0, sigma2=GammaLaw(2.0, 2.0))
    assert check_a1("entropy", GAUSSIAN, RC(5), candidates=[q], n_forward=5).status == "holds"
    assert check_a1("variance", GAUSSIAN, RC(5), candidates=[q], n_forward=5).status == "violated"


def test_a2_upper_violated_for_exponential():
    q_inf = product(EXPONENTIAL, **{"lambda": Pareto(1.5)})
    q_fin = product(EXPONENTIAL, **{"lambda": InverseGamma(2.1, 0.5)})
    v = check_a2("entropy", EXPONENTIAL, q_inf, [q_fin], "upper")
    assert v.status == "violated"
    assert v.witness["eu_finite_variance"] > v.witness["eu_infinite_variance"]


def test_a2_upper_infinite_eu_for_gaussian_mean():
    q_inf = product(GAUSSIAN, mu=Pareto(1.5), sigma2=1.0)
    v = check_a2("variance", GAUSSIAN, q_inf, [NormalInverseGamma(0, 1, 3, 2)], "upper")
    assert v.status == "holds" and math.isinf(v.witness["eu_infinite_variance"])


def test_a2_argument_errors():
    with pytest.raises(UsageError):
        check_a2("entropy", EXPONENTIAL, product(EXPONENTIAL, **{"lambda": Uniform(1, 2)}), [], "upper")
    with pytest.raises(UsageError):
        check_a2("entropy", EXPONENTIAL, None, [], "sideways")


def test_a2_lower_holds():
    qs = [product(POISSON, **{"lambda": Uniform(1.0, 4.0)}), EmpiricalMixture.from_columns(POISSON, **{"lambda": [1, 5]})]
    assert check_a2("entropy", POISSON, None, qs, "lower").status == "holds"


def test_a3():
    t = triple_along(GAUSSIAN, "sigma2", [3.0, 1.0, 2.0], fixed={"mu": 0.0})
    assert t.theta_l[1] == 1.0 and t.theta_u[1] == 3.0
    assert check_a3("entropy", t).status == "holds"
    assert check_a3("variance", t).status == "holds"
    t = triple_along(EXPONENTIAL, "lambda", [1.0, 2.0, 3.0])
    assert t.theta_l[0] == 3.0
    assert check_a3("entropy", t).status == "holds"


def test_a3_precondition_inconclusive():
    # mu and sigma2 both change: not a one-coordinate monotone path
    t = DiracTriple(gaussian(0, 1), gaussian(1, 2), gaussian(5, 3))
    assert check_a3("entropy", t).status == "inconclusive"
    with pytest.raises(DomainError):
        DiracTriple(gaussian(0, 3), gaussian(0, 2), gaussian(0, 1))


def test_a4_weak_and_strict():
    q = Dirac(gaussian(0.0, 1.0))
    spec = SpreadSpec.on(GAUSSIAN, sigma2=SymmetricDiracSplit(0.5))
    assert check_a4("entropy", q, spec, strict=False).status == "holds"
    v = check_a4("entropy", q, spec, strict=True)
    assert v.status == "violated" and "tu" in v.witness["failed"]
    assert check_a4("variance", q, spec, strict=True).status == "violated"
    assert check_a4("variance", q, SpreadSpec.on(GAUSSIAN, mu=SymmetricDiracSplit(1.0)), strict=True).status == "holds"


def test_a4_unsupported_spread_is_inconclusive():
    q = NormalInverseGamma(0, 1, 3, 1)
    v = check_a4("entropy", q, SpreadSpec.on(GAUSSIAN, mu=UniformWidth(1.0)), strict=False)
    assert v.status == "inconclusive"


def test_a5():
    q = product(GAUSSIAN, mu=0.0, sigma2=Uniform(1.0, 3.0))
    v = check_a5("entropy", q, ShiftVector((0.0, 2.0)))
    assert v.status == "violated" and v.witness["eu_after"] < v.witness["eu_before"]
    assert check_a5("variance", q, ShiftVector((3.0, 2.0))).status == "holds"
    q = product(EXPONENTIAL, **{"lambda": Uniform(1.0, 3.0)})
    assert check_a5("entropy", q, ShiftVector((2.0,))).status == "violated"
    assert check_a5("variance", product(POISSON, **{"lambda": Uniform(1.0, 3.0)}), ShiftVector((2.0,))).status == "holds"


def test_verdict_validation():
    with pytest.raises(DomainError):
        AxiomVerdict("A9", "entropy", "holds", {}, 1e-9)
    with pytest.raises(DomainError):
        AxiomVerdict("A0", "entropy", "violated", {}, 1e-9)


def test_summarize_aggregation():
    mk = lambda s: AxiomVerdict("A5", "entropy", s, {"x": 1} if s == "violated" else {}, 1e-9)
    assert summarize([mk("holds"), mk("violated")]) == {("entropy", "A5"): "violated"}
    assert summarize([mk("holds"), mk("inconclusive")]) == {("entropy", "A5"): "holds"}
    assert summarize([mk("inconclusive")]) == {("entropy", "A5"): "inconclusive"}


# ---------------------------------------------------------------------------
# suite


def test_default_suite_matches_expected(suite):
    assert suite.summary == EXPECTED_SUMMARY
    assert suite.mismatches(EXPECTED_SUMMARY) == []
    assert len(suite.verdicts) == len(default_catalog())


def test_violated_witnesses_recheck_under_other_seed(suite):
    violated = [v for v in suite.verdicts if v.status == "violated"]
    assert violated
    for v in violated:
        again = recheck(v, seed=987654321)
        assert again.status == "violated", v.witness["check"]


def test_suite_is_deterministic_and_order_free():
    cat = default_catalog()
    picked = [c for c in cat if c[0].startswith("var_a1")]
    a = run_suite(picked, seed=11)
    b = run_suite(list(reversed(picked)), seed=11)
    assert [v.status for v in a.verdicts] == [v.status for v in reversed(b.verdicts)]
    assert a.verdicts == run_suite(picked, seed=11).verdicts


def test_empty_catalog():
    res = run_suite([])
    assert res.verdicts == [] and res.summary == {}
    assert res.mismatches() == []


def test_measure_filter():
    res = run_suite([c for c in default_catalog() if "a3" in c[0]], measure_kind="variance")
    assert {v.measure_kind for v in res.verdicts} == {"variance"}


def test_catalog_file(tmp_path):
    path = tmp_path / "cat.ini"
    path.write_text(
        "[shift]\ncheck = a5\nmeasure = entropy\nfamily = gaussian\nexpect = violated\n"
        "q.law = product\nq.mu.law = pointmass\nq.mu.value = 0\n"
        "q.sigma2.law = uniform\nq.sigma2.a = 1\nq.sigma2.b = 3\nshift = 0, 2\n"
        "[wrong]\ncheck = a0\nmeasure = variance\nfamily = poisson\nexpect = violated\n"
        "q.law = dirac\nq.lambda = 2\n"
    )
    cat = load_catalog(path)
    res = run_suite(cat)
    assert [v.status for v in res.verdicts] == ["violated", "holds"]
    assert res.mismatches() == ["wrong: expected violated, got holds"]


@pytest.mark.parametrize("item", [
    {"check": "a7", "measure": "entropy", "family": "gaussian"},
    {"check": "a0", "measure": "kl", "family": "gaussian"},
    {"check": "a0", "measure": "entropy", "family": "weibull"},
    {"check": "a5", "measure": "entropy", "family": "gaussian", "q.law": "dirac", "q.mu": "0", "q.sigma2": "1"},
    {"check": "a3", "measure": "entropy", "family": "exponential", "triple.lambda": "1, 2"},
    {"check": "a4", "measure": "entropy", "family": "poisson", "q.law": "dirac", "q.lambda": "3",
     "spread.lambda": "gauss:1"},
])
def test_bad_items(item):
    with pytest.raises(ConfigError):
        run_item(item)


def test_missing_catalog(tmp_path):
    with pytest.raises(ConfigError):
        load_catalog(tmp_path / "nope.ini")


# ---------------------------------------------------------------------------
# reproductions


@pytest.mark.parametrize("rid", REPRO_IDS)
def test_reproductions_agree(rid):
    rep = reproduce_counterexample(rid)
    assert rep.agree, [r for r in rep.rows if not r.agree]
    assert rep.rows


def test_reproduction_values():
    rep = reproduce_counterexample("prop4_pareto_invgamma")
    v = rep.values()
    assert v["eu_pareto"] == pytest.approx(0.368054, abs=1e-6)
    assert v["eu_invgamma"] == pytest.approx(0.519076, abs=1e-4)
    assert all(rep.facts.values())
    with pytest.raises(UsageError):
        reproduce_counterexample("prop99")
