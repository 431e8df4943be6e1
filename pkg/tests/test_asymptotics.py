import json
import math

import numpy as np
import pytest

from dormantwalk import ModelParams, green
from dormantwalk.asymptotics import (
    AsymptoticReport,
    baseline_asymptotic,
    crossover,
    derived_asymptotic,
    responsive_asymptotic,
)
from dormantwalk.exact import long_time_limit
from dormantwalk.params import InvalidParameterError
from dormantwalk.renewal import k_constant


def params(**kw):
    base = dict(d=1, kappa=1.0, rho=1.0, gamma=1.0, s0=1.0, s1=1.0)
    base.update(kw)
    return ModelParams(**base)


def random_params(rng, d=None, s1=None):
    return ModelParams(
        d=int(rng.integers(1, 5)) if d is None else d,
        kappa=float(rng.uniform(0, 3)), rho=float(rng.uniform(0.1, 3)),
        gamma=float(rng.uniform(0.1, 3)), s0=float(rng.uniform(0.1, 3)),
        s1=float(rng.uniform(0.01, 5)) if s1 is None else s1,
    )


def test_no_dormancy_recovers_baseline_exactly():
    rng = np.random.default_rng(1)
    for _ in range(40):
        p = random_params(rng, s1=0.0)
        none = baseline_asymptotic(p, "none").leading_value
        for name, value in responsive_asymptotic(p).readings.items():
            if name.endswith("_discrete"):
                # the same formula with the Green value in the discrete normalization
                g = green.green_d3((0,) * p.d, "discrete")
                assert value == pytest.approx(1 - p.gamma * g / (p.nu + p.gamma * g), rel=4e-16)
            elif name == responsive_asymptotic(p).reading:
                assert value == none
            else:
                # algebraically equal rewrites, e.g. 2 nu / sqrt(nu) for 2 sqrt(nu)
                assert value == pytest.approx(none, rel=4e-16)


def test_d1_prefactor():
    r = responsive_asymptotic(params())
    assert r.leading_value == pytest.approx(2 * (math.sqrt(2) + 0.572061), abs=1e-6)
    assert r.leading_value == pytest.approx(3.972550, abs=1e-6)
    assert r.readings["theorem"] == pytest.approx(r.readings["proof"], rel=1e-15)


def test_value_at_t():
    r = responsive_asymptotic(params(), t=100.0)
    assert r.value_at_t == pytest.approx(r.leading_value / math.sqrt(math.pi * 100))
    r2 = responsive_asymptotic(params(d=2), t=100.0)
    assert r2.value_at_t == pytest.approx(r2.leading_value / math.log(100))
    with pytest.raises(InvalidParameterError):
        responsive_asymptotic(params(d=2), t=1.0)


def test_d3_readings_reported():
    r = responsive_asymptotic(params(d=3))
    assert set(r.readings) == {"theorem_occupation", "proof_occupation", "theorem_discrete",
                               "proof_discrete", "derived"}
    assert r.readings["theorem_occupation"] == pytest.approx(0.85140, abs=1e-5)
    assert r.readings["proof_occupation"] == pytest.approx(0.88005, abs=1e-5)
    assert r.readings["derived"] == pytest.approx(0.89719, abs=1e-5)
    assert r.readings["theorem_occupation"] != r.readings["proof_occupation"]


def test_unknown_reading():
    with pytest.raises(ValueError):
        responsive_asymptotic(params(), reading="harmonic")


def test_needs_killing():
    with pytest.raises(InvalidParameterError):
        responsive_asymptotic(params(gamma=0.0))


def test_baseline_none_d3():
    p = params(d=3, s1=0.0)
    g = green.green_d3((0, 0, 0), "occupation")
    expected = 1 - g / (2 + g)
    assert baseline_asymptotic(p, "none").leading_value == pytest.approx(expected, rel=1e-15)


def test_baseline_stochastic_d1():
    assert baseline_asymptotic(params(), "stochastic").leading_value == pytest.approx(
        2 * math.sqrt(6), abs=1e-12)


def test_stochastic_reduces_to_none():
    rng = np.random.default_rng(2)
    for _ in range(30):
        p = random_params(rng, s1=1e-13)
        a = baseline_asymptotic(p, "stochastic").leading_value
        b = baseline_asymptotic(p, "none").leading_value
        assert a == pytest.approx(b, rel=1e-10, abs=1e-10)
    with pytest.raises(InvalidParameterError):
        baseline_asymptotic(params(s1=0.0), "stochastic")


def test_crossover_d1():
    c = crossover(params(s0=3.0))
    assert c.d1_threshold == pytest.approx(2 * math.sqrt(2))
    assert c.d1_responsive_wins


def test_crossover_large_s1_limit_formula():
    c = crossover(params(d=3))
    for norm in ("occupation", "discrete"):
        K = k_constant(params(d=3), norm)
        assert c.d3_large_s1_limit[norm] == pytest.approx(1 - 1 / K)
        # K < 1, so the stated limit is negative and cannot be a probability
        assert K < 1 and c.d3_large_s1_limit[norm] < 0
        assert c.d3_rhs[norm] < 0 and not c.d3_condition_holds[norm]


def test_derived_limit_tends_to_one_at_large_s1():
    vals = [derived_asymptotic(params(d=3, s1=s1)).leading_value for s1 in (1, 10, 100, 1e4)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0.999


def test_crossover_without_dormancy_degenerates():
    p = params(s1=0.0)
    for d in (1, 2, 3):
        q = p.replace(d=d)
        r = responsive_asymptotic(q).leading_value
        n = baseline_asymptotic(q, "none").leading_value
        s = baseline_asymptotic(q.replace(s1=1e-14), "stochastic").leading_value
        assert r == n and s == pytest.approx(n, rel=1e-12)


def test_report_json_round_trip():
    r = responsive_asymptotic(params(d=2), t=50.0)
    back = AsymptoticReport.from_dict(json.loads(r.to_json()))
    assert back == r
    json.loads(crossover(params()).to_json())


# -- invariants --------------------------------------------------------------

def test_dominance_of_true_limit():
    rng = np.random.default_rng(3)
    for _ in range(30):
        p = random_params(rng, d=int(rng.integers(3, 5)))
        assert (derived_asymptotic(p).leading_value
                > baseline_asymptotic(p, "none").leading_value)


def test_dominance_against_exact_solver():
    p = params(d=3)
    limit = long_time_limit(p, 20, t_max=200.0).value
    assert limit > baseline_asymptotic(p, "none").leading_value


def test_stated_d3_forms_violate_dominance():
    """Recorded finding: every stated d >= 3 reading lies below the no-dormancy limit."""
    rng = np.random.default_rng(4)
    for _ in range(20):
        p = random_params(rng, d=3)
        none = baseline_asymptotic(p, "none").leading_value
        r = responsive_asymptotic(p).readings
        for name in ("theorem_occupation", "proof_occupation",
                     "theorem_discrete", "proof_discrete"):
            assert r[name] < none


@pytest.mark.parametrize("reading", ["theorem", "proof", "derived"])
def test_d1_prefactor_increasing_in_s1(reading):
    for rho in (0.5, 1.0, 2.0):
        for s0 in (0.3, 3.0):
            vals = [responsive_asymptotic(params(rho=rho, s0=s0, s1=s1)).readings[reading]
                    for s1 in np.linspace(0.01, 10, 25)]
            assert all(b > a for a, b in zip(vals, vals[1:]))


def test_stated_readings_ignore_s0():
    for d in (1, 2, 3):
        a = responsive_asymptotic(params(d=d, s0=0.5)).readings
        b = responsive_asymptotic(params(d=d, s0=5.0)).readings
        for name in a:
            if name != "derived":
                assert a[name] == b[name]


def test_true_limit_depends_on_s0():
    a = derived_asymptotic(params(d=3, s0=0.5)).leading_value
    b = derived_asymptotic(params(d=3, s0=5.0)).leading_value
    assert a - b == pytest.approx(1.25e-3, abs=5e-5)


def test_derived_d3_increasing_in_s1():
    for gamma in (0.5, 1.0, 5.0):
        vals = [derived_asymptotic(params(d=3, gamma=gamma, s1=s1)).leading_value
                for s1 in np.linspace(0, 20, 15)]
        assert all(b > a for a, b in zip(vals, vals[1:]))
