import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from traplab.landscape import Landscape, level, localisation_frame
from traplab.pmf import TrapWindow, pmf_at_time
from traplab.stats import total_variation
from traplab.tails import TailFunction
from traplab.walker import (JumpBudgetExceeded, first_gamma_site_distribution, sample_positions,
                            simulate_to_time, srw_excursion, srw_hitting_estimate,
                            srw_hitting_probability)

LOG = TailFunction.log()
ESL = TailFunction.expsqrtlog()


def gamma_landscape(z1=3, z2=-7, t=1e4, deep=20.0):
    """Shallow traps (sigma = e) between z2 and z1, very deep traps at both."""
    pins = {z: 1.0 for z in range(z2 + 1, z1)}
    pins.update({z1: deep, z2: deep})
    land = Landscape(LOG, 1, pinned=pins)
    return land, localisation_frame(land, t, h=2.0)


# -- hitting probabilities ----------------------------------------------------------

def test_hitting_symmetric():
    assert srw_hitting_probability(1, -1) == 0.5


def test_hitting_three_minus_seven():
    assert srw_hitting_probability(3, -7) == pytest.approx(0.7)


@given(x=st.integers(1, 10 ** 6), y=st.integers(-10 ** 6, -1))
def test_hitting_in_unit_interval(x, y):
    p = srw_hitting_probability(x, y)
    assert 0 < p < 1
    assert p + srw_hitting_probability(-y, -x) == pytest.approx(1.0)


@pytest.mark.parametrize("x,y", [(0, -1), (1, 0), (-2, -3)])
def test_hitting_rejects_bad_sides(x, y):
    with pytest.raises(ValueError):
        srw_hitting_probability(x, y)


def test_hitting_monte_carlo(rng):
    est, se = srw_hitting_estimate(4, -2, 100_000, rng)
    assert abs(est - 1 / 3) <= 3 * se


# -- first site of Gamma ---------------------------------------------------------

def test_first_gamma_site_closed_form():
    _, f = gamma_landscape(1, -1)
    assert first_gamma_site_distribution(f) == 0.5
    _, f = gamma_landscape(3, -7)
    assert (f.z1, f.z2) == (3, -7)
    assert first_gamma_site_distribution(f) == pytest.approx(0.7)


def test_first_gamma_site_matches_simulation(rng):
    land, f = gamma_landscape(3, -7)
    n = 10_000
    hits = sum(simulate_to_time(land, f.t, f, rng).first_gamma_site == 3 for _ in range(n))
    p = first_gamma_site_distribution(f)
    assert abs(hits / n - p) <= 3 * math.sqrt(p * (1 - p) / n)


# -- path simulation ------------------------------------------------------------

def test_tiny_time_no_jumps(rng):
    land = Landscape(LOG, 0, pinned={0: 1.0})
    rec = simulate_to_time(land, 1e-12, None, rng)
    assert rec.position_at_t == 0 and rec.n_jumps == 0 and rec.hold_times == []


def test_zero_time_and_negative_time(rng):
    land = Landscape(LOG, 0)
    assert simulate_to_time(land, 0.0, None, rng).n_jumps == 0
    with pytest.raises(ValueError):
        simulate_to_time(land, -1.0, None, rng)


def test_jump_count_bounded_by_max_rate(rng):
    land = Landscape(ESL, 9)
    t = 200.0
    jumps = np.array([simulate_to_time(land, t, None, rng).n_jumps for _ in range(2000)])
    # every depth is at least e, so jump intensity is at most 1/e
    assert jumps.mean() <= t / math.e + 3 * jumps.std() / math.sqrt(jumps.size)


def test_jump_budget(rng):
    with pytest.raises(JumpBudgetExceeded):
        simulate_to_time(Landscape(ESL, 9), 1e4, None, rng, jump_budget=10)


def _path_invariants(rec, frame):
    sites = np.array(rec.jump_sites)
    assert np.all(np.abs(np.diff(sites)) == 1)
    assert len(rec.hold_times) == rec.n_jumps
    assert math.fsum(rec.hold_times) <= rec.t
    assert rec.position_at_t == sites[-1]
    if rec.tau1 is not None:
        assert rec.first_gamma_site in frame.gamma
        assert sites[rec.tau1_step] == rec.first_gamma_site
        assert not set(sites[:rec.tau1_step].tolist()) & set(frame.gamma)
        assert sum(rec.local_times.values()) == rec.tau1_step
        assert rec.tau1 == pytest.approx(math.fsum(rec.hold_times[:rec.tau1_step]), rel=1e-12, abs=0)
    if rec.tau2 is not None:
        assert rec.tau1 <= rec.tau2
        inside = sites[rec.tau1_step:rec.tau2_step]
        assert np.all(np.abs(inside - rec.first_gamma_site) < frame.radius)
        assert abs(sites[rec.tau2_step] - rec.first_gamma_site) >= frame.radius


@given(seed=st.integers(0, 2 ** 32), path_seed=st.integers(0, 2 ** 32))
def test_path_invariants(seed, path_seed):
    land = Landscape(ESL, seed)
    frame = localisation_frame(land, 1e3, h=2.0)
    rec = simulate_to_time(land, 1e3, frame, np.random.default_rng(path_seed))
    _path_invariants(rec, frame)


def test_tau2_recorded_on_shallow_gamma(rng):
    # Gamma sites barely above the level, so the walk leaves their neighbourhood quickly
    t = 1e6
    ell = level(LOG, t)
    land = Landscape(LOG, 3, pinned={z: 1.0 for z in range(-30, 31)} | {5: math.log(ell) + 1e-9,
                                                                          -5: math.log(ell) + 1e-9})
    frame = localisation_frame(land, t, h=2.0)
    seen = 0
    for _ in range(200):
        rec = simulate_to_time(land, t, frame, rng)
        _path_invariants(rec, frame)
        seen += rec.tau2 is not None
    assert seen > 0


def test_start_in_gamma_gives_zero_tau1(rng):
    land, f = gamma_landscape(3, -7)
    rec = simulate_to_time(land, 10.0, f, rng, start=3)
    assert rec.tau1 == 0.0 and rec.first_gamma_site == 3 and rec.local_times == {}


def test_fair_steps(rng):
    land = Landscape(ESL, 4)
    ups = downs = 0
    for _ in range(300):
        s = np.diff(simulate_to_time(land, 2000.0, None, rng).jump_sites)
        ups += int(np.sum(s > 0))
        downs += int(np.sum(s < 0))
    n = ups + downs
    assert abs(ups / n - 0.5) <= 3 * 0.5 / math.sqrt(n)


def test_holding_times_exponential(rng):
    land = Landscape(ESL, 2024)
    mean = land.sigma(0)
    holds = []
    while len(holds) < 10_000:
        rec = simulate_to_time(land, 50 * mean, None, rng)
        holds.extend(h for z, h in zip(rec.jump_sites, rec.hold_times) if z == 0)
    holds = np.array(holds[:10_000])
    assert stats.kstest(holds / mean, "expon").pvalue > 0.01


def test_reproducible():
    land = Landscape(ESL, 8)
    f = localisation_frame(land, 1e4, h=2.0)
    a = simulate_to_time(land, 1e4, f, np.random.default_rng(3))
    b = simulate_to_time(Landscape(ESL, 8), 1e4, f, np.random.default_rng(3))
    assert a == b


def test_monte_carlo_matches_oracle_on_fixture(rng):
    land = Landscape(ESL, 2024)
    pmf = pmf_at_time(TrapWindow.from_landscape(land, -200, 200), 50.0, tol=1e-12)
    assert pmf.escaped_mass_bound < 1e-12
    pos = np.array([simulate_to_time(land, 50.0, None, rng).position_at_t for _ in range(100_000)])
    emp = np.bincount(pos - pmf.lo, minlength=pmf.mass.size) / pos.size
    assert total_variation(emp, pmf.mass) < 0.02


def test_vectorized_sampler_agrees(rng):
    land = Landscape(ESL, 2024)
    pmf = pmf_at_time(TrapWindow.from_landscape(land, -200, 200), 50.0, tol=1e-12)
    pos = sample_positions(land, 50.0, 100_000, rng)
    emp = np.bincount(pos - pmf.lo, minlength=pmf.mass.size) / pos.size
    assert total_variation(emp, pmf.mass) < 0.02


def test_path_export(tmp_path, rng):
    land, f = gamma_landscape(3, -7)
    rec = simulate_to_time(land, 1e4, f, rng)
    rec.write_csv(tmp_path / "p.csv")
    rec.write_summary(tmp_path / "p.json")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "step,site,hold_time"
    assert len(lines) == rec.n_jumps + 2
    assert lines[-1].endswith(",")            # censored final sojourn
    summary = json.loads((tmp_path / "p.json").read_text())
    for key in ("tau1", "tau2", "ybar", "x_t"):
        assert key in summary
    assert summary["ybar"] == rec.first_gamma_site


# -- excursions ------------------------------------------------------------------

def test_excursion_level_one(rng):
    e = srw_excursion(1, rng)
    assert e.exit_step == 1 and e.local_times == {0: 1}


@given(level=st.integers(1, 60), seed=st.integers(0, 2 ** 32))
def test_excursion_invariants(level, seed):
    e = srw_excursion(level, np.random.default_rng(seed))
    assert sum(e.local_times.values()) == e.exit_step
    assert e.origin_local_time >= 1
    assert all(abs(z) < level for z in e.local_times)
    # the exit step leaves from a neighbour of the boundary
    assert level - 1 in e.local_times or -(level - 1) in e.local_times


def test_excursion_mean_exit(rng):
    level = 30
    a = np.array([srw_excursion(level, rng).exit_step for _ in range(10_000)])
    assert abs(a.mean() - level ** 2) <= 3 * a.std() / math.sqrt(a.size)


def test_excursion_rejects_bad_level(rng):
    with pytest.raises(ValueError):
        srw_excursion(0, rng)


@pytest.mark.slow
def test_excursion_quantiles_stable(rng):
    q = {}
    for level, runs in ((100, 2000), (1000, 2000), (10_000, 200)):
        ex = [srw_excursion(level, rng) for _ in range(runs)]
        q[level] = (np.quantile([e.max_local_time / level for e in ex], 0.9),
                    np.quantile([e.origin_local_time / level for e in ex], 0.9))
    for a, b in ((100, 1000), (1000, 10_000)):
        for i in range(2):
            assert 0.75 <= q[b][i] / q[a][i] <= 1.25
