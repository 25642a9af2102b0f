import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascade_kpz.rng import RandomStream
from cascade_kpz.weights import (
    LN2,
    LN4,
    Empirical,
    InvalidModelError,
    LogNormal,
    TwoPoint,
    moment,
    moment_quadrature,
    moment_report,
    neg_moment,
    phi,
    psi,
    require_valid,
    sample,
    sample_many,
    validate,
)

MODELS = [LogNormal(0.1), LogNormal(LN2), LogNormal(1.2), TwoPoint(0.2), TwoPoint(0.6), TwoPoint(0.9),
          Empirical((0.5, 1.5), (0.5, 0.5)), Empirical((0.25, 1.0, 1.75), (0.25, 0.5, 0.25))]


@pytest.mark.parametrize("model", MODELS, ids=repr)
def test_trivial_moments(model):
    assert moment(model, 0) == 1.0
    assert moment(model, 1) == pytest.approx(1.0, abs=1e-12)
    assert neg_moment(model, 0) == 1.0


def test_twopoint_second_moment():
    assert moment(TwoPoint(0.5), 2) == 1.25


def test_lognormal_closed_forms():
    m = LogNormal(LN2)
    assert phi(m, 0.5) == pytest.approx(0.625, abs=1e-15)
    assert neg_moment(m, 1) == pytest.approx(2.0, abs=1e-14)
    assert m.mean_wlog2w() == pytest.approx(0.5, abs=1e-15)


def test_twopoint_neg_moment():
    assert neg_moment(TwoPoint(0.5), 1) == pytest.approx(4 / 3, abs=1e-15)


@pytest.mark.parametrize("model", MODELS, ids=repr)
def test_phi_endpoints(model):
    assert phi(model, 0) == pytest.approx(0.0, abs=1e-12)
    assert phi(model, 1) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("model", MODELS, ids=repr)
def test_psi_decreasing(model):
    v = [psi(model, s) for s in np.linspace(0, 1, 51)]
    assert all(a > b for a, b in zip(v, v[1:]))


@pytest.mark.parametrize("sigma2", [0.1, LN2, 1.2])
@pytest.mark.parametrize("s", [-1.5, -0.5, 0.3, 0.5, 2.0])
def test_quadrature_matches_closed_form(sigma2, s):
    m = LogNormal(sigma2)
    assert moment_quadrature(m, s) == pytest.approx(moment(m, s), rel=1e-10)


def test_empirical_sums():
    e = Empirical((0.5, 1.5), (0.5, 0.5))
    assert moment(e, 2) == pytest.approx(moment(TwoPoint(0.5), 2), abs=1e-15)
    assert moment(e, -1) == pytest.approx(4 / 3, abs=1e-15)


def test_validation_examples():
    ok = validate(LogNormal(LN2))
    assert ok.valid and ok.mean_wlog2w == pytest.approx(0.5)
    assert not validate(LogNormal(LN4)).valid  # boundary equality is invalid
    bad = validate(TwoPoint(1.0))
    assert not bad.valid and not bad.positive
    assert not validate(Empirical((2.0,), (1.0,))).valid
    with pytest.raises(InvalidModelError):
        require_valid(TwoPoint(1.0))


def test_validate_never_raises_on_garbage():
    for model in [TwoPoint(1.5), Empirical((0.0, 2.0), (0.5, 0.5)), Empirical((1.0, 3.0), (0.5, 0.7))]:
        rep = validate(model)
        assert not rep.valid
        assert rep.messages


def test_empirical_with_zero_has_infinite_neg_moment():
    e = Empirical((0.0, 2.0), (0.5, 0.5))
    assert math.isinf(neg_moment(e, 0.5))


def test_constructor_errors():
    with pytest.raises(ValueError):
        LogNormal(0.0)
    with pytest.raises(ValueError):
        TwoPoint(-0.1)
    with pytest.raises(ValueError):
        Empirical((1.0, 2.0), (1.0,))


def test_empirical_from_csv(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("value,prob\n0.5,0.5\n1.5,0.5\n")
    e = Empirical.from_csv(p)
    assert e.values == (0.5, 1.5) and e.probs == (0.5, 0.5)


def test_sample_examples():
    assert sample(TwoPoint(0.0), RandomStream(3)) == 1.0
    assert all(sample_many(Empirical((2.0,), (1.0,)), RandomStream(3), 50) == 2.0)
    m = LogNormal(LN2)
    assert sample(m, RandomStream(17, 5)) == sample(m, RandomStream(17, 5))


@pytest.mark.parametrize("model", [LogNormal(LN2), TwoPoint(0.6), Empirical((0.25, 1.0, 1.75), (0.25, 0.5, 0.25))],
                         ids=repr)
def test_sampled_moments(model):
    w = sample_many(model, RandomStream(2024), 200_000)
    assert np.all(w > 0)
    for s in (0.5, 1.0, 1.5):
        x = w**s
        assert abs(x.mean() - moment(model, s)) < 5 * x.std() / math.sqrt(x.size)


def test_twopoint_sampler_is_balanced():
    w = sample_many(TwoPoint(0.5), RandomStream(8), 100_000)
    up = np.mean(w > 1)
    assert abs(up - 0.5) < 5 * 0.5 / math.sqrt(w.size)


def test_moment_report():
    r = moment_report(LogNormal(LN2), 0.5)
    assert r.phi == pytest.approx(0.625) and r.m == pytest.approx(2**-0.125)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 1.38), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_phi_monotone_lognormal(sigma2, a, b):
    m = LogNormal(sigma2)
    lo, hi = sorted((a, b))
    if hi - lo > 1e-9:
        assert phi(m, lo) < phi(m, hi)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 0.99), st.floats(-3, 3))
def test_twopoint_moment_matches_definition(sigma, s):
    m = TwoPoint(sigma)
    assert moment(m, s) == pytest.approx(0.5 * ((1 - sigma) ** s + (1 + sigma) ** s), rel=1e-14)
