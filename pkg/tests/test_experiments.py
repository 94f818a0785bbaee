import math
from fractions import Fraction as F

import pytest

from soblab.experiments import (
    DIVERGENCE,
    EmbeddingHolds,
    ExperimentReport,
    Tolerances,
    bbm_limit_sweep,
    bmo_prefactor,
    counterexample_run,
    estimate_embedding_constant,
    lemma_of,
    lemma_scaling,
    parallel_map,
    predicted_slope,
    scaling_prediction,
    verify_bounded_scaling_bounds,
    verify_interpolation,
    verify_scaling_identity,
)
from soblab.exponents import SobolevIndex, classify
from soblab.functions import ScalingSpec, build_corpus, make_bump, make_tent
from soblab.norms import Box, WholeSpace, lp_norm

HALF = F(1, 2)
IDX = SobolevIndex(1, HALF, 2)


# Configuration and report shape -------------------------------------------------------

def test_tolerances_from_mapping():
    t = Tolerances.from_mapping({"slope": "0.1"})
    assert t.slope == 0.1 and t.quadrature == 1e-6
    with pytest.raises(KeyError):
        Tolerances.from_mapping({"nope": 0.1})
    with pytest.raises(ValueError):
        Tolerances.from_mapping({"slope": 2})


def test_report_alignment_and_fitted_exponent():
    with pytest.raises(ValueError):
        ExperimentReport("bbm-limit", {}, "s", [1, 2], [1], [], True)
    with pytest.raises(ValueError):
        ExperimentReport("bbm-limit", {}, "s", [1], [1], [], True, fitted_exponent=1.0)
    with pytest.raises(ValueError):
        ExperimentReport(DIVERGENCE, {}, "eps", [1], [1], [], True)
    rep = ExperimentReport("bbm-limit", {}, "s", [1], [1], [], True, warnings=["w"])
    assert rep.tolerance_unmet
    assert rep.as_dict()["kind"] == "bbm-limit"


def test_parallel_map_keeps_order(monkeypatch):
    monkeypatch.setenv("SOBLAB_THREADS", "3")
    assert parallel_map(lambda x: x * x, list(range(20))) == [x * x for x in range(20)]
    monkeypatch.setenv("SOBLAB_THREADS", "1")
    assert parallel_map(str, [3, 1, 2]) == ["3", "1", "2"]


# Scaling lemmas ------------------------------------------------------------------------

def test_lemma_scaling_pairs():
    assert lemma_scaling(3, 1, 0.5, 2) == (0.5, 1.0)
    assert lemma_scaling(4, 1, 0.5, 2) == (0.0, -1.0)
    assert lemma_scaling(5, 1, 0.5, 2) == (0.0, -1.0)
    assert lemma_scaling(6, 1, 0.5, 2) == (0.0, -1.0)
    assert lemma_scaling(4, 2, 0.5, 2) == (-0.5, -1.0)
    gamma, _ = lemma_scaling(4, 1, 0.5, 2)
    assert math.copysign(1.0, gamma) == 1.0


@pytest.mark.parametrize("lemma, tgt, expected", [
    (5, (HALF, 6), -1 / 3),
    (3, (HALF, 1), -1 / 2),
    (5, (HALF, 4), -1 / 4),
])
def test_predicted_slopes(lemma, tgt, expected):
    assert predicted_slope(lemma, IDX, SobolevIndex(1, *tgt)) == pytest.approx(expected, abs=1e-15)


def test_lemma_of():
    assert lemma_of(classify(IDX, SobolevIndex(1, HALF, 6), "whole-space")) == 5
    with pytest.raises(ValueError):
        lemma_of(classify(IDX, IDX, "whole-space"))


def test_scaling_prediction_identity():
    assert scaling_prediction(2.0, 3.0, IDX, 0.0, 0.0, 0.5) == pytest.approx(math.sqrt(13))


# Scaling identity --------------------------------------------------------------------------

def test_scaling_identity_unit_epsilon():
    rep = verify_scaling_identity(make_tent(1.0), IDX, ScalingSpec(0.3, -1.0, 1.0), (1.0,))
    assert rep.details["max_relative_deviation"] <= 1e-12


def test_scaling_identity_tent():
    rep = verify_scaling_identity(make_tent(1.0), IDX, ScalingSpec(1.0, 1.0, 1.0), (0.5, 0.25))
    assert rep.passed and rep.details["max_relative_deviation"] <= 1e-3


def test_scaling_identity_non_dyadic():
    rep = verify_scaling_identity(make_bump(1, 1.0), SobolevIndex(1, F(3, 10), 3),
                                  ScalingSpec(0.4, -1.0, 1.0), (0.3, 0.7, 0.9))
    assert rep.passed
    assert rep.details["max_relative_deviation"] <= 1e-5


def test_scaling_identity_sup_type():
    idx = SobolevIndex(1, HALF, "inf")
    rep = verify_scaling_identity(make_bump(1, 1.0), idx, ScalingSpec(0.0, -1.0, 1.0), (1.0, 0.5))
    assert rep.passed
    assert rep.details["tolerance"] == Tolerances().holder


def test_scaling_identity_rejects_bounded_variant():
    spec = ScalingSpec(0.0, -1.0, 1.0, variant="bounded-translate")
    with pytest.raises(ValueError):
        verify_scaling_identity(make_bump(1), IDX, spec)


# Bounded sandwich -------------------------------------------------------------------------

def test_sandwich_unit_epsilon_collapses():
    u = make_bump(1, 0.5)
    rep = verify_bounded_scaling_bounds(u, IDX, 0.0, (1.0,), Box([-1.0], [1.0]))
    assert rep.passed
    assert rep.details["lower"][0] <= rep.measured[0] <= rep.details["upper"][0] * (1 + 1e-9)


def test_sandwich_bump_half_radius():
    rep = verify_bounded_scaling_bounds(make_bump(1, 0.5), IDX, 0.0, (1.0, 0.5),
                                        Box([-1.0], [1.0]))
    assert rep.passed
    assert rep.details["full_norm_sandwich"] and rep.details["seminorm_sandwich"]


def test_sandwich_lp_law_exact():
    N, s, p = 1, 0.5, 2.0
    gamma = -(N - s * p) / p
    u = make_bump(1, 0.5)
    dom = Box([-1.0], [1.0])
    rep = verify_bounded_scaling_bounds(u, IDX, gamma, (0.5, 0.25), dom)
    assert rep.details["lp_law_max_deviation"] <= 1e-8
    base = lp_norm(u, dom, p, 1e-10).value ** p
    from soblab.functions import BOUNDED_TRANSLATE, scale_function
    v = scale_function(u, ScalingSpec(gamma, -1.0, 0.25, u.center, BOUNDED_TRANSLATE))
    assert lp_norm(v, dom, p, 1e-10).value ** p == pytest.approx(0.25 ** (gamma * p + N) * base,
                                                                 rel=1e-9)


def test_sandwich_needs_support_inside():
    with pytest.raises(ValueError):
        verify_bounded_scaling_bounds(make_bump(1, 2.0), IDX, 0.0, (1.0,), Box([-1.0], [1.0]))
    with pytest.raises(ValueError):
        verify_bounded_scaling_bounds(make_bump(1, 0.5), IDX, 0.0, (1.0,), WholeSpace(1))


# Counterexamples ---------------------------------------------------------------------------

def test_counterexample_refuses_embedding():
    with pytest.raises(EmbeddingHolds):
        counterexample_run(IDX, SobolevIndex(1, F(1, 4), 2), "whole-space")


def test_counterexample_bounded():
    rep = counterexample_run(IDX, SobolevIndex(1, HALF, 6), "bounded")
    assert rep.kind == DIVERGENCE
    assert rep.passed and rep.details["sandwich"]
    assert rep.fitted_exponent == pytest.approx(-1 / 3, rel=0.05)


def test_counterexample_needs_a_scaling_family():
    # same smoothness, lower integrability: fails on a bounded domain, but not by rescaling
    with pytest.raises(ValueError, match="no scaling lemma"):
        counterexample_run(IDX, SobolevIndex(1, HALF, 1), "bounded")


def test_counterexample_monotone_ratios():
    rep = counterexample_run(IDX, SobolevIndex(1, HALF, 4), "whole-space")
    assert rep.details["monotone"]
    assert len(rep.details["fit_window"]) == len(rep.schedule) - 1


# Embedding constants ---------------------------------------------------------------------

def test_embedding_constant_identity():
    corpus = {k: v for k, v in build_corpus().items() if k in ("bump", "tent")}
    rep = estimate_embedding_constant(IDX, IDX, "whole-space", corpus, (1.0, 0.5, 0.25))
    assert rep.constant == 1.0
    assert rep.passed


def test_embedding_constant_box():
    rep = estimate_embedding_constant(IDX, SobolevIndex(1, F(1, 4), 2), Box([-2.0], [2.0]),
                                      build_corpus(), (1.0, 0.5, 0.25))
    assert rep.passed and math.isfinite(rep.constant)
    assert "gaussian" in rep.details["skipped"]
    assert all(sl >= -0.05 for sl in rep.details["stress_slopes"].values())


def test_embedding_constant_needs_embedding():
    with pytest.raises(ValueError):
        estimate_embedding_constant(IDX, SobolevIndex(1, HALF, 6), "whole-space", build_corpus())


# Interpolation, BBM, BMO ---------------------------------------------------------------

def test_interpolation_endpoints_exact():
    rep = verify_interpolation(make_tent(1.0), 0, 2, F(4, 5), 2, (0, 0.25, 0.5, 0.75, 1))
    assert rep.measured[0] == 1.0 and rep.measured[-1] == 1.0
    assert all(math.isfinite(r) for r in rep.measured)
    assert rep.details["exponents"][2] == ["2/5", "2"]


def test_bbm_refinement_contract():
    rep = bbm_limit_sweep(make_bump(1, 1.0), 2.0, (0.001, 0.999))
    assert rep.passed
    for entry in rep.details["refinement"].values():
        assert entry["shift"] <= max(entry["previous_error"], 1e-12 * rep.details["lp_norm"])


def test_bbm_needs_compact_gradient():
    from soblab.functions import make_gaussian
    with pytest.raises(ValueError):
        bbm_limit_sweep(make_gaussian(1))


def test_bmo_prefactor():
    assert bmo_prefactor(1, HALF, 2) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-14)
    with pytest.raises(ValueError):
        bmo_prefactor(1, F(1, 4), 2)
    with pytest.raises(NotImplementedError):
        bmo_prefactor(2, 1, 2)
