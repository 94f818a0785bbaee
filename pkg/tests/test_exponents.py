import math
from fractions import Fraction as F

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from soblab.exponents import (
    INF,
    Answer,
    DomainKind,
    Flag,
    Lemma,
    Regime,
    SobolevIndex,
    classify,
    classify_compact,
    connecting_q,
    curve_chain_check,
    format_exact,
    from_recip,
    gamma_curve,
    interpolation_exponents,
    max_target_p,
    partition_counts,
    regime,
    region_sample,
    sobolev_conjugate,
    to_exact,
)

WS, BD = DomainKind.WHOLE_SPACE, DomainKind.BOUNDED


def idx(N, s, p):
    return SobolevIndex(N, s, p)


# Exact numbers ------------------------------------------------------------------------

@pytest.mark.parametrize("raw, expected", [
    ("1/2", F(1, 2)), (0.1, F(1, 10)), (3, F(3)), ("inf", INF), (math.inf, INF), ("0.25", F(1, 4)),
])
def test_to_exact(raw, expected):
    assert to_exact(raw) == expected


@pytest.mark.parametrize("bad", ["abc", math.nan, -math.inf])
def test_to_exact_rejects(bad):
    with pytest.raises(ValueError):
        to_exact(bad)


def test_to_exact_rejects_bool():
    with pytest.raises(TypeError):
        to_exact(True)


def test_format_exact():
    assert format_exact(INF) == "inf"
    assert format_exact(F(8, 3)) == "8/3"


@pytest.mark.parametrize("N, s, p", [(0, 0.5, 2), (1, 1.5, 2), (1, -0.1, 2), (1, 0.5, 0.5)])
def test_index_validation(N, s, p):
    with pytest.raises(ValueError):
        SobolevIndex(N, s, p)


def test_index_reciprocal_and_product():
    assert idx(1, F(1, 2), INF).r == 0
    assert idx(1, F(1, 2), INF).sp == INF
    assert idx(2, F(1, 2), 2).sp == 1


# Regime, conjugate, max p~ ----------------------------------------------------------------

@pytest.mark.parametrize("index, expected", [
    (idx(2, F(1, 2), 2), Regime.SUBCRITICAL),
    (idx(1, F(1, 2), 2), Regime.CRITICAL),
    (idx(2, F(4, 5), INF), Regime.SUPERCRITICAL),
    (idx(2, 0, INF), Regime.UNSUPPORTED),
])
def test_regime(index, expected):
    assert regime(index) is expected


@pytest.mark.parametrize("index, expected", [
    (idx(2, F(1, 2), 2), 4), (idx(1, F(1, 2), 1), 2), (idx(3, 0, 2), 2),
])
def test_sobolev_conjugate(index, expected):
    assert sobolev_conjugate(index) == expected


def test_sobolev_conjugate_needs_subcritical():
    with pytest.raises(ValueError):
        sobolev_conjugate(idx(1, F(1, 2), 2))


@pytest.mark.parametrize("index, s_t, expected", [
    (idx(2, F(1, 2), 2), F(1, 4), F(8, 3)),
    (idx(2, F(1, 2), 2), F(1, 2), 2),
    (idx(1, F(1, 2), 2), F(1, 4), 4),
    (idx(1, F(9, 10), 2), F(1, 5), INF),    # Hölder block: every p~ allowed
])
def test_max_target_p(index, s_t, expected):
    assert max_target_p(index, s_t) == expected


def test_max_target_p_range():
    with pytest.raises(ValueError):
        max_target_p(idx(2, F(1, 2), 2), F(3, 4))


# Classifier examples ------------------------------------------------------------------

SRC = idx(2, F(1, 2), 2)


@pytest.mark.parametrize("target, domain, cont, tag", [
    ((F(1, 4), F(5, 2)), WS, "yes", "Thm-1.1"),
    ((F(1, 4), 3), WS, "no", "Lemma-2.4/Prop-2.8"),
    ((F(1, 4), F(3, 2)), BD, "yes", "Thm-1.2"),
    ((F(1, 4), F(3, 2)), WS, "no", "Lemma-2.3/Prop-2.8"),
    ((F(1, 4), INF), WS, "no", "Lemma-2.4/Prop-2.8"),
])
def test_classify_examples(target, domain, cont, tag):
    v = classify(SRC, idx(2, *target), domain)
    assert v.continuous.value == cont
    assert v.justification == tag


def test_classify_trivial_flag():
    v = classify(SRC, SRC, WS)
    assert v.continuous is Answer.YES
    assert Flag.TRIVIAL in v.boundary_flags


def test_compact_examples():
    on_curve = classify_compact(SRC, idx(2, F(1, 4), F(8, 3)), BD)
    assert (on_curve.continuous, on_curve.compact) == (Answer.YES, Answer.NO)
    assert Flag.TARGET_P_MAX in on_curve.boundary_flags
    inside = classify_compact(SRC, idx(2, F(1, 4), F(5, 2)), BD)
    assert inside.compact is Answer.YES
    assert inside.compact_justification == "Cor-1.4"
    assert classify_compact(SRC, idx(2, F(1, 4), F(5, 2)), WS).compact is Answer.NOT_APPLICABLE


def test_critical_curve_excluded_from_compact():
    v = classify(idx(1, F(1, 2), 2), idx(1, F(1, 4), 4), BD)
    assert (v.continuous, v.compact) == (Answer.YES, Answer.NO)
    assert Flag.CRITICAL_CURVE in v.boundary_flags


def test_critical_bounded_lower_p_is_lemma_2_5():
    v = classify(idx(1, F(1, 2), 2), idx(1, F(1, 2), 6), WS)
    assert v.justification == "Lemma-2.5/Prop-2.11"


def test_w11_line_embeds_in_linf():
    v = classify(idx(1, 1, 1), idx(1, 0, INF), WS)
    assert v.continuous is Answer.YES
    assert v.justification == "Thm-1.5"


def test_w11_other_targets_unsupported():
    v = classify(idx(1, 1, 1), idx(1, F(1, 2), 2), WS)
    assert v.continuous is Answer.UNSUPPORTED
    assert v.reason


def test_bounded_needs_positive_smoothness():
    v = classify(idx(2, 0, 2), idx(2, 0, 1), BD)
    assert v.continuous is Answer.UNSUPPORTED


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        classify(idx(1, F(1, 2), 2), idx(2, F(1, 2), 2), WS)


def test_verdict_as_dict_keys():
    d = classify(SRC, idx(2, F(1, 4), F(8, 3)), BD).as_dict()
    assert set(d) == {"continuous", "compact", "justification", "compact_justification",
                      "boundary_flags", "reason"}
    assert d["boundary_flags"] == ["target-p-max"]


# Curves -----------------------------------------------------------------------------------

@pytest.mark.parametrize("src, tgt, theta, expected", [
    ((F(1, 2), 2), (F(1, 4), 4), 0, (F(1, 2), 2)),
    ((F(1, 2), 2), (F(1, 4), 4), F(1, 2), (F(3, 8), F(8, 3))),
    ((1, INF), (0, 1), F(1, 2), (F(1, 2), 2)),
])
def test_gamma_curve_examples(src, tgt, theta, expected):
    pt = gamma_curve(idx(1, *src), idx(1, *tgt), theta)
    assert (pt.s_theta, pt.p_theta) == expected


def test_gamma_curve_float_mode():
    pt = gamma_curve(idx(1, F(1, 2), 2), idx(1, F(1, 4), 4), 0.5, exact=False)
    assert pt.s_theta == pytest.approx(0.375, abs=1e-15)
    assert pt.p_theta == pytest.approx(8 / 3, abs=1e-15)


@pytest.mark.parametrize("theta", [-0.1, 1.5])
def test_gamma_curve_theta_range(theta):
    with pytest.raises(ValueError):
        gamma_curve(SRC, SRC, theta)


@pytest.mark.parametrize("args, expected", [
    ((F(1, 5), 2, F(4, 5), 2, F(1, 2)), (F(1, 2), 2)),
    ((0, INF, 1, 1, F(1, 2)), (F(1, 2), 2)),
    ((0, 4, F(1, 2), 2, 1), (0, 4)),
    ((0, 4, F(1, 2), 2, 0), (F(1, 2), 2)),
])
def test_interpolation_exponents(args, expected):
    assert interpolation_exponents(*args) == expected


def test_interpolation_exponents_ordering():
    with pytest.raises(ValueError):
        interpolation_exponents(F(4, 5), 2, F(1, 5), 2, F(1, 2))


@pytest.mark.parametrize("tgt, lemma, q, theta", [
    ((F(1, 4), F(8, 3)), "subcritical-cont", 4, F(1, 2)),
    ((F(1, 4), 2), "subcritical-cont", 2, F(1, 2)),
    ((F(1, 2), 2), "subcritical-cont", 2, 0),
])
def test_connecting_q_examples(tgt, lemma, q, theta):
    c = connecting_q(SRC, idx(2, *tgt), lemma)
    assert (c.q, c.theta_tilde) == (q, theta)


def test_connecting_q_outside_region():
    with pytest.raises(ValueError):
        connecting_q(SRC, idx(2, F(1, 4), 3), "subcritical-cont")
    with pytest.raises(ValueError):
        connecting_q(idx(1, F(9, 10), 2), idx(1, F(1, 2), 2), "critical")


def test_connecting_q_on_critical_curve_reaches_infinity():
    src = idx(1, F(1, 2), 2)
    c = connecting_q(src, idx(1, F(1, 4), 4), Lemma.CRITICAL)
    assert c.q == INF
    pt = gamma_curve(src, idx(1, 0, c.q), c.theta_tilde)
    assert (pt.s_theta, pt.p_theta) == (F(1, 4), 4)
    with pytest.raises(ValueError):
        connecting_q(src, idx(1, 0, INF), Lemma.CRITICAL)


def test_curve_chain_examples():
    tgt = idx(2, F(1, 4), F(8, 3))
    assert curve_chain_check(SRC, tgt, 0, 1, WS).continuous is Answer.YES
    assert curve_chain_check(SRC, tgt, F(1, 4), F(3, 4), WS).continuous is Answer.YES
    with pytest.raises(ValueError):
        curve_chain_check(SRC, tgt, 0, F(1, 2), BD, mode="compact")
    with pytest.raises(ValueError):
        curve_chain_check(SRC, tgt, F(3, 4), F(1, 4), WS)


# Region sampling ------------------------------------------------------------------------

def test_region_single_cell_at_source():
    sample = region_sample(SRC, WS, n_s=1, n_r=1, s_range=(F(1, 2), F(1, 2)),
                           r_range=(F(1, 2), F(1, 2)))
    assert sample.cells == ((F(1, 2), F(1, 2), Answer.YES),)


def test_region_grid_includes_infinity():
    sample = region_sample(SRC, WS, n_s=3, n_r=3)
    assert len(sample.cells) == 9
    assert any(r == 0 for _, r, _ in sample.cells)
    assert "target-p-max" in sample.curves


def test_region_critical_compact_excludes_curve():
    src = idx(1, F(1, 2), 2)
    sample = region_sample(src, BD, "compact", n_s=9, n_r=9)
    for t, r, answer in sample.cells:
        if 0 < t < F(1, 2) and r == t:
            assert answer is Answer.NO
    assert "critical-curve-sp=N" in sample.curves


def test_region_rejects_zero_resolution():
    with pytest.raises(ValueError):
        region_sample(SRC, WS, n_s=0)


# Properties ---------------------------------------------------------------------------

fractions01 = st.builds(F, st.integers(0, 60), st.just(60))


@st.composite
def sources(draw):
    N = draw(st.integers(1, 3))
    s = draw(st.builds(F, st.integers(1, 20), st.just(20)))
    r = draw(st.builds(F, st.integers(0, 20), st.just(20)))
    src = SobolevIndex(N, s, from_recip(r))
    assume(regime(src) is not Regime.UNSUPPORTED and not (s == 1 and r == 1))
    return src


@st.composite
def targets(draw, N):
    return SobolevIndex(N, draw(fractions01), from_recip(draw(fractions01)))


@given(st.data())
def test_partition_exactly_one(data):
    src = data.draw(sources())
    tgt = data.draw(targets(src.N))
    for domain in (WS, BD):
        inside, complements = partition_counts(src, tgt, domain)
        assert int(inside) + len(complements) == 1
        v = classify(src, tgt, domain)
        assert (v.continuous is Answer.YES) == inside


@given(st.data())
def test_compact_implies_continuous(data):
    src = data.draw(sources())
    tgt = data.draw(targets(src.N))
    v = classify(src, tgt, BD)
    if v.compact is Answer.YES:
        assert v.continuous is Answer.YES
    assert classify(src, tgt, WS).compact is Answer.NOT_APPLICABLE


@given(st.data())
def test_boundary_law(data):
    """Continuous but not compact exactly on the critical curves or at s~ = s."""
    src = data.draw(sources())
    tgt = data.draw(targets(src.N))
    v = classify(src, tgt, BD)
    gap = v.continuous is Answer.YES and v.compact is Answer.NO
    on_curve = bool(v.boundary_flags & {Flag.TARGET_P_MAX, Flag.CRITICAL_CURVE})
    assert gap == (v.continuous is Answer.YES and (on_curve or tgt.s == src.s))


@given(st.data())
def test_curve_chain_closure(data):
    src = data.draw(sources())
    tgt = data.draw(targets(src.N))
    domain = data.draw(st.sampled_from([WS, BD]))
    assume(classify(src, tgt, domain).continuous is Answer.YES)
    a, b = sorted((data.draw(fractions01), data.draw(fractions01)))
    assert curve_chain_check(src, tgt, a, b, domain).continuous is Answer.YES


CONNECTING_SOURCES = [idx(2, F(1, 2), 2), idx(3, 1, 2), idx(1, F(1, 4), 2), idx(2, F(3, 4), 2),
                      idx(1, F(1, 2), 2), idx(2, 1, 2), idx(3, F(3, 4), 4)]


@given(st.sampled_from(CONNECTING_SOURCES), fractions01, fractions01)
def test_connecting_q_inverts_the_segment(src, theta, w):
    """Walk the segment to (0, q) for an admissible q, then solve for q again."""
    if regime(src) is Regime.CRITICAL:
        lemma, q = Lemma.CRITICAL, from_recip(src.r * (1 - w))
    else:
        lemma = Lemma.SUBCRITICAL_CONT
        p_star = sobolev_conjugate(src)
        q = from_recip(src.r + w * (1 / p_star - src.r))
    # the far end (0, inf) is L^inf itself, which a critical source misses
    assume(not (q == INF and theta == 1))
    pt = gamma_curve(src, SobolevIndex(src.N, 0, q), theta)
    target = SobolevIndex(src.N, pt.s_theta, pt.p_theta)
    c = connecting_q(src, target, lemma)
    back = gamma_curve(src, SobolevIndex(src.N, 0, c.q), c.theta_tilde)
    assert (back.s_theta, back.p_theta) == (target.s, target.p)
    if 0 < theta and target.p != src.p:
        assert (c.q, c.theta_tilde) == (q, theta)


@settings(suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow])
@given(st.sampled_from(CONNECTING_SOURCES), st.sampled_from(list(Lemma)), fractions01, fractions01)
def test_connecting_q_reconstructs(src, lemma, t_frac, q_frac):
    tgt = SobolevIndex(src.N, src.s * t_frac, from_recip(q_frac))
    try:
        c = connecting_q(src, tgt, lemma)
    except ValueError:
        assume(False)
    lo, hi, closed = c.valid_range
    assert lo <= c.q and (c.q <= hi if closed else c.q < hi)
    pt = gamma_curve(src, SobolevIndex(src.N, 0, c.q), c.theta_tilde)
    assert (pt.s_theta, pt.p_theta) == (tgt.s, tgt.p)
    assert c.theta_tilde == 1 - tgt.s / src.s


@given(st.data())
def test_max_target_p_endpoints(data):
    src = data.draw(sources())
    assert max_target_p(src, src.s) == src.p
    if regime(src) is Regime.SUBCRITICAL:
        assert max_target_p(src, 0) == sobolev_conjugate(src)


@given(st.data())
def test_gamma_curve_endpoints_and_linearity(data):
    src = data.draw(sources())
    tgt = data.draw(targets(src.N))
    theta = data.draw(fractions01)
    start, end = gamma_curve(src, tgt, 0), gamma_curve(src, tgt, 1)
    assert (start.s_theta, start.p_theta) == (src.s, src.p)
    assert (end.s_theta, end.p_theta) == (tgt.s, tgt.p)
    mid = gamma_curve(src, tgt, theta)
    assert mid.s_theta == theta * tgt.s + (1 - theta) * src.s
    r = 0 if mid.p_theta == INF else 1 / mid.p_theta
    assert r == (1 - theta) * src.r + theta * tgt.r
