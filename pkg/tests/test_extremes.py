import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from traplab import extremes as ex
from traplab.landscape import level, neighbourhood_offsets
from traplab.numerics import log_sum
from traplab.stats import chi2_geometric
from traplab.tails import TailFunction

LOG = TailFunction.log()
ESL = TailFunction.expsqrtlog()
FAMILIES = [LOG, TailFunction.logpower(2.0), ESL]


# -- panels ----------------------------------------------------------------------

@pytest.mark.parametrize("tail", FAMILIES, ids=lambda t: t.name)
@given(seed=st.integers(0, 2 ** 32), n=st.integers(1, 400))
def test_panel_invariants(tail, seed, n):
    panel = ex.SequencePanel.sample(tail, n, np.random.default_rng(seed))
    assert np.all(np.diff(panel.log_M) >= 0)
    # S_k - S_{k-1} = Y_k > 0 exactly; in floats the step may be below one ulp of ln S
    step = panel.log_Y[1:] - panel.log_S[:-1]
    assert np.all(np.isfinite(step))
    assert np.all(np.diff(panel.log_S) >= 0)
    visible = np.logaddexp(0.0, step) > 4 * np.spacing(panel.log_S[1:])
    assert np.all(np.diff(panel.log_S)[visible] > 0)
    assert np.all(panel.log_M <= panel.log_S + 1e-12)
    assert panel.log_S[-1] == pytest.approx(log_sum(panel.log_Y))
    lvl = float(np.median(panel.log_Y))
    k = panel.first_exceedance(lvl)
    if k is not None:
        assert panel.log_Y[k - 1] > lvl and np.all(panel.log_Y[:k - 1] <= lvl)


def test_exceedance_record_fields():
    log_Y = np.log([3.0, 4.0, 5.0, 100.0, 6.0, 7.0, 8.0])
    panel = ex.SequencePanel(LOG, log_Y)
    # L(l) = ln 50 ~ 3.9, h = 1.5 -> radius 2.6 -> two neighbours each side
    rec = panel.exceedance_record(math.log(50.0), 1.5)
    assert rec.n_l == 4
    assert math.exp(rec.log_s_l) == pytest.approx(12.0)
    assert math.exp(rec.log_Y_nl) == pytest.approx(100.0)
    assert math.exp(rec.log_sbar) == pytest.approx(4 + 5 + 6 + 7)


def test_exceedance_record_none_when_no_room():
    panel = ex.SequencePanel(LOG, np.log([3.0, 100.0]))
    assert panel.exceedance_record(math.log(50.0), 1.0) is None
    assert panel.exceedance_record(math.log(1e9), 1.0) is None


def test_log_excess():
    panel = ex.SequencePanel(LOG, np.log([2.0, 8.0, 6.0]))
    assert math.exp(panel.log_excess()) == pytest.approx(1.0)      # (2 + 6) / 8


# -- sum versus max ----------------------------------------------------------------

@pytest.mark.parametrize("tail", FAMILIES, ids=lambda t: t.name)
@given(seed=st.integers(0, 2 ** 32))
def test_gap_non_negative(tail, seed):
    assert ex.sum_max_gap(tail, 100, np.random.default_rng(seed)) >= 0.0


def test_gap_closed_form_panel():
    n, H = 1000, math.exp(500.0)
    log_Y = np.concatenate([np.zeros(n - 1), [math.log(H)]])
    panel = ex.SequencePanel(LOG, log_Y)
    lg = ex._tail_gap(LOG, float(panel.log_M[-1]), panel.log_excess())
    # L(n - 1 + H) - L(H) = ln(1 + (n-1)/H) ~ (n-1)/H
    assert lg == pytest.approx(math.log(n - 1) - 500.0, rel=1e-12)
    assert math.exp(lg) / n < 1e-200


def test_gap_validates():
    with pytest.raises(ValueError):
        ex.sum_max_gap(LOG, 0, np.random.default_rng(0))


def test_sum_max_excess_shrinks(rng):
    meds = [np.median(ex.sum_max_ratios(LOG, n, 300, rng)) for n in (100, 1000, 10_000)]
    assert meds[0] > meds[1] > meds[2]
    assert 1.0 <= 1.0 + math.exp(meds[2]) <= 1.1


def test_sum_max_gap_median_decreasing(rng):
    meds = [np.median([ex.sum_max_gap(LOG, n, rng, log=True) for _ in range(200)])
            for n in (100, 1000, 10_000)]
    assert meds[0] > meds[1] > meds[2]


# -- first exceedence --------------------------------------------------------------

def test_first_exceedence_exact_law(rng):
    law = ex.first_exceedence_law(LOG, 10_000, rng, log_level=50.0)
    assert law.scale == 50.0
    _, p, _ = chi2_geometric(law.n_l, 1 / 50)
    assert p > 0.01
    k = 75
    freq = np.mean(law.n_l > k)
    exact = (1 - 1 / 50) ** k
    assert abs(freq - exact) <= 3 * math.sqrt(exact * (1 - exact) / law.n_l.size)


def test_first_exceedence_ks(rng):
    law = ex.first_exceedence_law(LOG, 10_000, rng, log_level=50.0)
    assert law.ks < 0.05
    assert law.ks <= law.ks_bound + 0.01


def test_first_exceedence_mean(rng):
    law = ex.first_exceedence_law(ESL, 10_000, rng, level_value=math.exp(20.0))
    s = law.scaled
    assert abs(s.mean() - 1.0) <= 3 * s.std() / math.sqrt(s.size)


def test_first_exceedence_requires_high_level(rng):
    with pytest.raises(ValueError):
        ex.first_exceedence_law(LOG, 100, rng, log_level=5.0)
    with pytest.raises(ValueError):
        ex.first_exceedence_law(LOG, 100, rng)


# -- exceedence events at l_t ------------------------------------------------------

def test_exceedence_bounds_are_frequencies(rng):
    out = ex.exceedence_bounds(ESL, 1e6, 2.29, 300, rng)
    assert set(out) == {"sum_half", "sum", "exceedance", "partial_sum", "dominated"}
    for d in out.values():
        assert 0.0 <= d["frequency"] <= 1.0 and d["n"] == 300
    assert out["sum_half"]["successes"] <= out["sum"]["successes"]


def test_exceedence_bounds_trend(rng):
    from traplab.experiments.results import SummaryRow, nondecreasing_within
    names = ("sum", "exceedance", "partial_sum", "dominated")
    rows = {k: [] for k in names}
    for t in (1e4, 1e6, 1e8):
        out = ex.exceedence_bounds(ESL, t, 2.0, 1000, rng)
        for k in names:
            rows[k].append(SummaryRow.proportion("x", k, t, out[k]["successes"], out[k]["n"]))
    for k in names:
        assert nondecreasing_within(rows[k]).passed, k


def test_records_redraw_small_cap(rng, caplog):
    lvl = math.log(level(LOG, 1e6))
    recs = ex.exceedance_records(LOG, lvl, 2.0, 50, rng, cap=2)
    k = neighbourhood_offsets(LOG.of_log(lvl) / 2.0)
    assert len(recs) == 50
    assert all(r.n_l >= 1 and r.log_Y_nl > lvl for r in recs)
    assert k >= 1


def test_panel_stats_export(tmp_path, rng):
    _, recs = ex.exceedence_bounds(LOG, 1e6, 2.0, 20, rng, return_records=True)
    ex.write_panel_stats(recs, tmp_path / "s.csv", tmp_path / "s.json", metadata={"t": 1e6})
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "trial,n_l,s_l,exceedence,sbar"
    assert len(lines) == 21
    meta = json.loads((tmp_path / "s.json").read_text())
    assert meta["scale"] == "linear" and meta["t"] == 1e6 and meta["trials"] == 20
    ex.write_panel_stats(recs, tmp_path / "l.csv", log_values=True)
    first = (tmp_path / "l.csv").read_text().splitlines()[1].split(",")
    assert float(first[3]) == recs[0].log_Y_nl


# -- l_t r_t / t --------------------------------------------------------------------

def test_ell_ratio_log_1e12():
    r = ex.ell_asymptotic_check(LOG, [1e4, 1e6, 1e8, 1e12])
    assert abs(r[-1] - 1) <= 0.05


@pytest.mark.parametrize("tail", FAMILIES, ids=lambda t: t.name)
def test_ell_ratio_one_for_continuous(tail):
    r = ex.ell_asymptotic_check(tail, np.geomspace(1e3, 1e15, 13))
    assert np.all(np.abs(r - 1) < 1e-10)


def test_ell_sandwich_at_jump():
    # t inside the jump of expsqrtlog at x0: l_t sits at x0 and the sandwich still holds
    r = ex.ell_asymptotic_check(ESL, [math.e * 1.5, math.e * 2.5, 1e6])
    assert r[0] > 1


def test_ell_check_validates():
    with pytest.raises(ValueError):
        ex.ell_asymptotic_check(LOG, [1e6, 1e4])
