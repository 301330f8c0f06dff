import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma

from fracneutral.mlf import MlfParams, mlf_eval, mlf_eval_batch, _asymptotic, _contour, _series
from fracneutral.selftest import E15

from oracles import ml_cut_integral, ml_series


def test_exponential_identity():
    z = np.linspace(-100, 0, 401)
    assert np.max(np.abs(mlf_eval_batch(MlfParams(1, 1), z) - np.exp(z))) <= 1e-10


def test_cosine_identity():
    x = np.linspace(0, 10, 401)
    assert np.max(np.abs(mlf_eval_batch(MlfParams(2, 1), -x ** 2) - np.cos(x))) <= 1e-10


def test_scalar_examples():
    assert mlf_eval(MlfParams(1, 1), -1) == pytest.approx(0.3678794412, abs=1e-10)
    assert mlf_eval(MlfParams(2, 1), -1) == pytest.approx(0.5403023059, abs=1e-10)


@pytest.mark.parametrize("z", sorted(E15))
def test_frozen_values_match_series_oracle(z):
    assert E15[z] == pytest.approx(ml_series(1.5, 1.0, z), abs=1e-15)
    assert abs(mlf_eval(MlfParams(1.5), z) - E15[z]) <= 1e-12


def test_large_argument_against_cut_integral():
    # two unrelated oracles and the implementation must agree
    ref = ml_cut_integral(1.5, 1.0, 1e4)
    assert ref == pytest.approx(E15[-1e4], rel=1e-12)
    assert mlf_eval(MlfParams(1.5), -1e4) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("alpha", [1.05, 1.3, 1.5, 1.75, 1.95])
def test_accuracy_up_to_a_million(alpha):
    xs = np.geomspace(1e2, 1e6, 6)
    got = mlf_eval_batch(MlfParams(alpha), -xs)
    for g, x in zip(got, xs):
        assert abs(g - ml_cut_integral(alpha, 1.0, x)) <= 1e-10


@pytest.mark.parametrize("alpha", [1 + 1e-6, 1.2, 4 / 3, 1.34, 1.5, 1.8, 2 - 1e-9])
def test_regime_boundaries(alpha):
    s = np.array([7.99, 8.0, 8.01, 25.99, 26.0, 26.01])
    for x in s ** alpha:
        assert abs(mlf_eval(MlfParams(alpha), -x) - ml_series(alpha, 1.0, -x)) <= 1e-10


@pytest.mark.parametrize("alpha,beta", [(1.5, 0.5), (1.5, 1.7), (1.5, 2.7), (1.2, 2.3), (1.9, 0.3)])
def test_second_parameter(alpha, beta):
    # beta >= alpha + 1 exercises the recurrence inside the contour regime
    zs = -np.array([0.5, 6.0, 12.0, 20.0, 40.0]) ** alpha
    for z, g in zip(zs, mlf_eval_batch(MlfParams(alpha, beta), zs)):
        assert abs(g - ml_series(alpha, beta, z)) <= 1e-10


def test_series_and_contour_agree_on_overlap_window():
    z = -np.linspace(5, 50, 91)
    assert np.max(np.abs(_series(1.5, 1.0, z) - _contour(1.5, 1.0, -z))) <= 1e-8


def test_series_and_asymptotic_agree_where_both_converge():
    # the pure algebraic expansion only reaches 1e-8 once |z|^(1/alpha) is about 17
    z = -np.linspace(70, 85, 31)
    assert np.max(np.abs(_series(1.5, 1.0, z) - _asymptotic(1.5, 1.0, -z))) <= 1e-8


@given(st.floats(1.0 + 1e-9, 2.0 - 1e-9))
def test_value_at_zero_is_exactly_one(alpha):
    assert mlf_eval(MlfParams(alpha), 0.0) == 1.0
    assert mlf_eval(MlfParams(alpha), -0.0) == 1.0


@settings(max_examples=60)
@given(st.floats(1.01, 1.99), st.floats(0.0, 1e5))
def test_bounded_by_one(alpha, x):
    v = mlf_eval(MlfParams(alpha), -x)
    assert -1.0 < v <= 1.0 + 1e-12


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_algebraic_decay(alpha):
    c = 1.0 / gamma(1.0 - alpha)
    errs = [abs(mlf_eval(MlfParams(alpha), -x) * -x + c) for x in (1e3, 1e4, 1e5, 1e6)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-5


@settings(max_examples=40)
@given(st.floats(1.01, 1.99), st.lists(st.floats(-1e4, 0.0), min_size=1, max_size=8))
def test_batch_matches_scalar(alpha, zs):
    p = MlfParams(alpha)
    batch = mlf_eval_batch(p, zs)
    assert np.array_equal(batch, [mlf_eval(p, z) for z in zs])


def test_batch_examples():
    assert mlf_eval_batch(MlfParams(1.5), [0, 0, 0]).tolist() == [1.0, 1.0, 1.0]
    np.testing.assert_allclose(mlf_eval_batch(MlfParams(1, 1), [-1, -2]), np.exp([-1, -2]), atol=1e-12)
    np.testing.assert_allclose(mlf_eval_batch(MlfParams(1.5), [-0.5, -5, -500]), [E15[-0.5], E15[-5.0], E15[-500.0]], atol=1e-12)


@pytest.mark.parametrize("z", [0.1, math.inf, -math.inf, math.nan])
def test_rejects_bad_arguments(z):
    with pytest.raises(ValueError):
        mlf_eval(MlfParams(1.5), z)


def test_batch_reports_offending_index():
    with pytest.raises(ValueError, match="entry 2"):
        mlf_eval_batch(MlfParams(1.5), [-1.0, 0.0, 3.0, -2.0])


@pytest.mark.parametrize("alpha,beta", [(0.0, 1.0), (2.1, 1.0), (1.5, 0.0), (1.5, -1.0), (math.nan, 1.0)])
def test_rejects_bad_parameters(alpha, beta):
    with pytest.raises(ValueError):
        MlfParams(alpha, beta)


def test_alpha_one_non_integer_beta_outside_series_range():
    assert mlf_eval(MlfParams(1.0, 1.5), -2.0) == pytest.approx(ml_series(1.0, 1.5, -2.0), abs=1e-12)
    with pytest.raises(ValueError):
        mlf_eval(MlfParams(1.0, 1.5), -50.0)


def test_runtime_of_identity_sweep():
    import time

    t0 = time.perf_counter()
    mlf_eval_batch(MlfParams(1, 1), np.linspace(-50, 0, 200))
    mlf_eval_batch(MlfParams(2, 1), -np.linspace(0, 7, 200) ** 2)
    assert time.perf_counter() - t0 < 1.0
