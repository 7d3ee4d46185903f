import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from traplab.tails import (Family, TailFunction, eval_tail, sample_log_trap, sample_trap,
                           survival)

FAMILIES = [TailFunction.log(), TailFunction.logpower(2.0), TailFunction.logpower(0.5),
            TailFunction.expsqrtlog()]


# -- evaluation ---------------------------------------------------------------

def test_log_at_e_is_one():
    assert eval_tail(TailFunction.log(), math.e) == 1.0


def test_log_at_e10():
    assert eval_tail(TailFunction.log(), math.exp(10)) == pytest.approx(10.0, rel=1e-15)


def test_logpower_squared_at_e3():
    assert eval_tail(TailFunction.logpower(2), math.exp(3)) == pytest.approx(9.0, rel=1e-14)


@pytest.mark.parametrize("tail", FAMILIES, ids=lambda t: t.name)
def test_one_below_floor(tail):
    for x in (0.0, 0.5, 1.0, 2.0, math.e * (1 - 1e-12)):
        assert eval_tail(tail, x) == 1.0


@pytest.mark.parametrize("bad", [-1.0, -1e-300, math.nan])
def test_rejects_bad_arguments(bad):
    with pytest.raises(ValueError):
        eval_tail(TailFunction.log(), bad)


def test_family_parsing_and_beta_rules():
    assert Family.parse("ExpSqrtLog") is Family.EXPSQRTLOG
    assert Family.parse("log-power") is Family.LOGPOWER
    with pytest.raises(ValueError):
        Family.parse("pareto")
    with pytest.raises(ValueError):
        TailFunction("logpower")
    with pytest.raises(ValueError):
        TailFunction("log", 2.0)
    with pytest.raises(ValueError):
        TailFunction.logpower(-1.0)


def test_expsqrtlog_jumps_at_floor():
    tail = TailFunction.expsqrtlog()
    assert tail.left_limit(math.e) == 1.0
    assert tail(math.e) == pytest.approx(math.e)


def test_dict_round_trip():
    for tail in FAMILIES:
        assert TailFunction.from_dict(tail.to_dict()) == tail


@pytest.mark.parametrize("tail", FAMILIES, ids=lambda t: t.name)
@given(a=st.floats(0, 1e6, allow_nan=False), b=st.floats(0, 1e6, allow_nan=False))
def test_non_decreasing(tail, a, b):
    lo, hi = min(a, b), max(a, b)
    assert eval_tail(tail, lo) <= eval_tail(tail, hi)


@pytest.mark.parametrize("tail", FAMILIES, ids=lambda t: t.name)
@given(lx=st.floats(1.0, 700.0))
def test_right_continuous(tail, lx):
    x = math.exp(lx)
    assert tail(x * (1 + 1e-12)) == pytest.approx(tail(x), rel=1e-9)


@pytest.mark.parametrize("tail", FAMILIES, ids=lambda t: t.name)
def test_unbounded(tail):
    vals = [float(tail.of_log(k * math.log(10))) for k in range(1, 300)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("tail,eps", [(TailFunction.log(), 0.17), (TailFunction.logpower(2.0), 0.37),
                                      (TailFunction.expsqrtlog(), 0.56)], ids=lambda v: str(v))
@pytest.mark.parametrize("v", [2.0, 10.0, 100.0])
def test_slow_variation_at_1e12(tail, eps, v):
    # closed form: ratio is L(u v) / L(u) at u = 1e12
    lu = 12 * math.log(10)
    ratio = float(tail.of_log(lu + math.log(v))) / float(tail.of_log(lu))
    assert 1.0 <= ratio <= 1.0 + eps
    # and it keeps shrinking further out
    lu2 = 300 * math.log(10)
    assert float(tail.of_log(lu2 + math.log(v))) / float(tail.of_log(lu2)) < ratio


# -- inverse and sampling -----------------------------------------------------

@pytest.mark.parametrize("tail", FAMILIES, ids=lambda t: t.name)
@given(y=st.floats(1.0 + 1e-9, 1e12))
def test_generalized_inverse(tail, y):
    lx = tail.log_inverse(y)
    assert float(tail.of_log(lx)) >= y * (1 - 1e-12)
    if lx > 1.0 + 1e-9:
        assert float(tail.of_log(lx * (1 - 1e-9))) < y


def test_log_sample_half():
    assert sample_trap(TailFunction.log(), 0.5) == pytest.approx(math.exp(2))


def test_logpower_sample_quarter():
    assert sample_trap(TailFunction.logpower(2), 0.25) == pytest.approx(math.exp(2))


def test_overflow_goes_to_log_space():
    u = math.exp(-10)
    assert sample_trap(TailFunction.log(), u) == math.inf
    assert sample_log_trap(TailFunction.log(), u) == pytest.approx(math.exp(10), rel=1e-14)


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5])
def test_sampling_rejects_closed_endpoints(u):
    with pytest.raises(ValueError):
        sample_trap(TailFunction.log(), u)


def test_tail_frequencies_match(rng):
    u = rng.random(100_000) + 2.0 ** -54
    for tail, x, p in [(TailFunction.log(), math.exp(2), 0.5),
                       (TailFunction.logpower(2), math.exp(2), 0.25)]:
        freq = np.mean(sample_trap(tail, u) > x)
        assert abs(freq - p) < 3 * math.sqrt(p * (1 - p) / u.size)


@pytest.mark.parametrize("tail", FAMILIES, ids=lambda t: t.name)
def test_sampling_ks_against_tail(tail, rng):
    u = rng.random(100_000) + 2.0 ** -54
    lx = sample_log_trap(tail, u)
    # compare L(sigma) with the law of 1/U: P(L(sigma) > y) = 1/y, i.e. 1/L(sigma) ~ U(0,1)
    stat = stats.kstest(1.0 / tail.of_log(lx), "uniform").statistic
    crit = stats.kstwo.ppf(0.99, lx.size)
    if tail.family is Family.EXPSQRTLOG:
        # atom at x0: 1/L(sigma) = 1/e there; compare the continuous part only
        cont = lx > 1.0
        stat = stats.kstest(1.0 / tail.of_log(lx[cont]) * math.e, "uniform").statistic
        crit = stats.kstwo.ppf(0.99, cont.sum())
    assert stat < crit


def test_survival_matches_reciprocal():
    tail = TailFunction.log()
    assert survival(tail, math.exp(4)) == pytest.approx(0.25)
