import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from wikimeta.effects import EffectMeasure, estimate, log_odds_ratio, log_variance_ratio, smd
from wikimeta.errors import AllZeroArm, InsufficientSubjects
from wikimeta.ingest import CountTable, GroupSummary, StudyRecord

G1 = GroupSummary(10, 1.0, 1.0)
G2 = GroupSummary(10, 0.0, 1.0)


def test_cohen_example():
    est = smd(G1, G2, "cohen")
    assert est.effect == pytest.approx(1.0, rel=1e-15)
    # 20/100 + 1/(2*20)
    assert est.variance == pytest.approx(0.225, rel=1e-15)
    assert est.measure is EffectMeasure.SMD_COHEN
    assert est.n_total == 20


def test_hedges_example():
    est = smd(G1, G2, "hedges")
    j = 1 - 3 / 71
    assert est.effect == pytest.approx(j, rel=1e-15)
    assert est.effect == pytest.approx(0.957746, abs=5e-7)
    assert est.variance == pytest.approx(j * j * 0.225, rel=1e-15)


@pytest.mark.parametrize("variant", ["cohen", "hedges"])
def test_identical_groups(variant):
    g = GroupSummary(17, 3.3, 2.1)
    assert smd(g, g, variant).effect == 0.0


def test_hedges_needs_five_subjects():
    g = GroupSummary(2, 1.0, 1.0)
    with pytest.raises(InsufficientSubjects):
        smd(g, g, "hedges")
    assert smd(g, g, "cohen").effect == 0.0


def test_unknown_variant():
    with pytest.raises(ValueError):
        smd(G1, G2, "glass")


def test_log_odds_ratio_symmetric():
    est = log_odds_ratio(CountTable(10, 20, 10, 20))
    assert est.effect == 0.0
    assert est.variance == pytest.approx(0.4, rel=1e-15)
    assert est.n_total == 40


def test_log_odds_ratio_zero_cell():
    est = log_odds_ratio(CountTable(0, 10, 5, 10))
    # corrected a=0.5, b=10.5, c=5.5, d=5.5
    assert est.effect == pytest.approx(math.log(1 / 21), rel=1e-14)
    assert est.variance == pytest.approx(1 / 0.5 + 1 / 10.5 + 2 / 5.5, rel=1e-14)


def test_log_odds_ratio_no_correction_without_zero():
    est = log_odds_ratio(CountTable(3, 10, 6, 10))
    assert est.effect == pytest.approx(math.log(3 * 4 / (7 * 6)), rel=1e-14)


def test_all_zero_arm():
    class Broken:
        events1, total1, events2, total2 = 0, 0, 1, 5

    with pytest.raises(AllZeroArm):
        log_odds_ratio(Broken())


def test_log_variance_ratio_examples():
    est = log_variance_ratio(GroupSummary(11, 0.0, 2.0), GroupSummary(11, 0.0, 1.0))
    assert est.effect == pytest.approx(math.log(2), rel=1e-15)
    assert est.effect == pytest.approx(0.693147, abs=5e-7)
    assert est.variance == pytest.approx(0.1, rel=1e-15)
    assert log_variance_ratio(G1, G2).effect == 0.0


def test_estimate_dispatch():
    rec = StudyRecord("S", group1=G1, group2=G2, counts=CountTable(1, 5, 2, 5))
    assert estimate(rec, "smd_cohen").effect == pytest.approx(1.0)
    assert estimate(rec, "log_odds_ratio").measure is EffectMeasure.LOG_ODDS_RATIO
    assert estimate(rec, EffectMeasure.LOG_VARIANCE_RATIO).study_label == "S"


# -- properties ----------------------------------------------------------------------

means = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
sds = st.floats(min_value=1e-2, max_value=1e2, allow_nan=False)
sizes = st.integers(min_value=3, max_value=400)
groups = st.builds(GroupSummary, sizes, means, sds)
PROPERTY = settings(max_examples=1000, deadline=None)


@st.composite
def count_tables(draw):
    t1, t2 = draw(st.integers(1, 300)), draw(st.integers(1, 300))
    return CountTable(draw(st.integers(0, t1)), t1, draw(st.integers(0, t2)), t2)


@PROPERTY
@given(groups, groups, st.floats(-1e3, 1e3), st.sampled_from(["cohen", "hedges"]))
def test_smd_location_invariance(g1, g2, shift, variant):
    a = smd(g1, g2, variant)
    b = smd(GroupSummary(g1.n, g1.mean + shift, g1.sd), GroupSummary(g2.n, g2.mean + shift, g2.sd),
            variant)
    assert b.effect == pytest.approx(a.effect, rel=1e-6, abs=1e-6)
    assert b.variance == pytest.approx(a.variance, rel=1e-6)


@PROPERTY
@given(groups, groups, st.floats(1e-2, 1e2), st.sampled_from(["cohen", "hedges"]))
def test_smd_scale_invariance(g1, g2, c, variant):
    a = smd(g1, g2, variant)
    b = smd(GroupSummary(g1.n, c * g1.mean, c * g1.sd), GroupSummary(g2.n, c * g2.mean, c * g2.sd),
            variant)
    assert b.effect == pytest.approx(a.effect, rel=1e-9, abs=1e-12)
    assert b.variance == pytest.approx(a.variance, rel=1e-9)


@PROPERTY
@given(groups, groups, st.sampled_from(["cohen", "hedges"]))
def test_smd_antisymmetry(g1, g2, variant):
    a, b = smd(g1, g2, variant), smd(g2, g1, variant)
    assert b.effect == -a.effect
    assert b.variance == pytest.approx(a.variance, rel=1e-14)


@PROPERTY
@given(count_tables())
def test_log_odds_ratio_antisymmetry(c):
    a = log_odds_ratio(c)
    b = log_odds_ratio(CountTable(c.events2, c.total2, c.events1, c.total1))
    assert b.effect == pytest.approx(-a.effect, abs=1e-12)
    assert b.variance == pytest.approx(a.variance, rel=1e-14)
    assert a.variance > 0


@PROPERTY
@given(groups, groups)
def test_log_variance_ratio_antisymmetry(g1, g2):
    a, b = log_variance_ratio(g1, g2), log_variance_ratio(g2, g1)
    assert b.effect == pytest.approx(-a.effect, abs=1e-12)
    assert b.variance == pytest.approx(a.variance, rel=1e-14)


@PROPERTY
@given(groups, groups)
def test_hedges_shrinks_cohen(g1, g2):
    d, g = smd(g1, g2, "cohen"), smd(g1, g2, "hedges")
    assume(d.effect != 0)
    assert abs(g.effect) < abs(d.effect)
    assert g.variance > 0 and d.variance > 0
