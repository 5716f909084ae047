import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from sorted_l1l2.regularizer import (
    DegenerateDenominatorError,
    Stage,
    WeightSchedule,
    ZeroIterateError,
    build_weights,
    dca_linearization,
    eval_ratio,
    magnitude_order,
    shrink,
)

E25 = np.exp(-2.5)
vectors = arrays(np.float64, st.integers(3, 40),
                 elements=st.floats(-1e3, 1e3, allow_nan=False, allow_subnormal=False))


def test_build_weights_examples():
    np.testing.assert_allclose(build_weights([0.3, -2, 1, 0], 2, 5), [1, E25, 1, 1])
    assert abs(E25 - 0.082085) < 1e-6
    np.testing.assert_allclose(build_weights([1, 1, 0, 0], 2, 5), [E25, 1, 1, 1])
    assert build_weights([3, 2, 1, 0.5], 2, 1e-9).min() >= 1 - 1e-9


def test_build_weights_errors():
    with pytest.raises(ZeroIterateError):
        build_weights(np.zeros(4), 2, 1.0)
    with pytest.raises(ValueError):
        build_weights(np.ones(4), 5, 1.0)
    with pytest.raises(ValueError):
        build_weights(np.ones(4), 2, 0.0)
    with pytest.raises(ValueError):
        Stage(1, 1.0)


def test_magnitude_order_ties_prefer_smaller_index():
    assert list(magnitude_order([1, -1, 2, 1])) == [2, 0, 1, 3]


def test_eval_ratio_examples():
    w = build_weights([1, 1, 0, 0], 2, 5)
    assert eval_ratio([1, 1, 0, 0], w) == pytest.approx((E25 + 1) / (1 - E25), rel=1e-14)
    assert eval_ratio([3, 4, 0], np.full(3, 0.5)) == pytest.approx(1.4, rel=1e-15)
    assert eval_ratio(np.zeros(3), np.full(3, 0.5)) == 0.0
    with pytest.raises(DegenerateDenominatorError):
        eval_ratio([1.0, 0.0], [1.0, 0.5])


@settings(max_examples=200, deadline=None)
@given(vectors, st.sampled_from([(2, 5.0), (3, 0.8), (20, 0.8), (27, 3.0)]))
def test_weight_ordering_and_range(x, tr):
    assume(np.any(x))
    t, r = tr
    t = min(t, x.size)
    w = build_weights(x, t, r)
    assert np.all(w > 0) and np.all(w <= 1) and np.any(w < 1)
    ordered = w[magnitude_order(x)]
    assert np.all(np.diff(ordered) >= 0)
    assert ordered[0] == pytest.approx(np.exp(-r * (t - 1) / t), rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(vectors, st.sampled_from([(20, 0.8), (27, 3.0)]))
def test_ratio_lower_bound(x, tr):
    # Only the lower bound of the two-sided estimate holds for rank weights; see the ledger.
    assume(np.any(x))
    t, r = tr
    t = min(t, x.size)
    w = build_weights(x, t, r)
    assert eval_ratio(x, w) >= np.exp(-r * (t - 1) / t) * (1 - 1e-12)


def test_ratio_can_exceed_sqrt_l0():
    # 20 equal entries: the numerator is ~ sum(w), the denominator ~ ||1 - w||_2
    x = np.ones(20)
    val = eval_ratio(x, build_weights(x, 20, 0.8))
    assert val > np.sqrt(20)


@settings(max_examples=200, deadline=None)
@given(vectors, st.sampled_from([1e-3, -7.0, 1e3]))
def test_scale_invariance(x, c):
    assume(np.any(x))
    w = build_weights(x, min(5, x.size), 3.0)
    assert np.array_equal(build_weights(c * x, min(5, x.size), 3.0), w)
    assert abs(eval_ratio(c * x, w) - eval_ratio(x, w)) <= 1e-12 * eval_ratio(x, w)


@settings(max_examples=100, deadline=None)
@given(vectors)
def test_constant_half_is_l1_over_l2(x):
    assume(np.any(x))
    w = WeightSchedule.constant_half().weights(x, 1)
    u = x / np.abs(x).max()
    assert eval_ratio(x, w) == pytest.approx(np.abs(u).sum() / np.linalg.norm(u), rel=1e-14)


def test_schedule_stages():
    s = WeightSchedule.noisefree()
    assert s.stage(1) == Stage(20, 0.8)
    assert s.stage(20) == Stage(20, 0.8)
    assert s.stage(21) == Stage(27, 3.0)
    assert WeightSchedule.one_stage(2, 5).stage(50) == Stage(2, 5)
    assert WeightSchedule.noisy().stage(30) == Stage(120, 3.0)
    with pytest.raises(ValueError):
        WeightSchedule(mode="three_stage")


def test_schedule_clamps_t_to_length():
    w = WeightSchedule.noisefree().weights(np.arange(1.0, 6.0), 1)
    np.testing.assert_allclose(w, build_weights(np.arange(1.0, 6.0), 5, 0.8))


def _objective(x, w, alpha, lam):
    return alpha * np.abs(x).sum() - lam * eval_ratio(x, w)


def test_linearization_finite_differences():
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.standard_normal(15)
        w = build_weights(x, 6, 3.0)
        d = rng.standard_normal(15)
        y = dca_linearization(x, w, 1.0, 1.0)
        eps = 1e-5
        fd = (_objective(x + eps * d, w, 1.0, 1.0) - _objective(x - eps * d, w, 1.0, 1.0)) / (2 * eps)
        assert abs(fd - y @ d) <= 1e-6 * max(1.0, abs(fd))


def _l1l2_linearization(x):
    # gradient of ||x||_1/||x||_2 written out: sign/||x|| - ||x||_1 x/||x||^3; halves cancel
    n2 = np.linalg.norm(x)
    return np.sign(x) - (np.sign(x) / n2 - np.abs(x).sum() * x / n2**3)


def test_linearization_constant_half_formula():
    rng = np.random.default_rng(6)
    for _ in range(20):
        x = rng.standard_normal(9)
        y = dca_linearization(x, np.full(9, 0.5), 1.0, 1.0)
        np.testing.assert_allclose(y, _l1l2_linearization(x), rtol=0, atol=1e-12)


def test_linearization_hand_value():
    y = dca_linearization([1.0, 0.0, 0.0], [0.5, 1.0, 1.0], 0.0, 1.0)
    np.testing.assert_allclose(y, [0.0, 0.0, 0.0], atol=1e-15)


def test_shrink_cases():
    np.testing.assert_allclose(shrink([2, -0.5, 0.05], 0.1), [1.9, -0.4, 0.0])
    v = np.array([1.5, -2.0, 0.0])
    np.testing.assert_array_equal(shrink(v, 0.0), v)
    with pytest.raises(ValueError):
        shrink(v, -1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 2))
def test_shrink_minimizes_scalar_prox(v, a):
    grid = np.linspace(-4, 4, 80001)
    vals = a * np.abs(grid) + 0.5 * (grid - v) ** 2
    z = shrink(np.array([v]), a)[0]
    assert a * abs(z) + 0.5 * (z - v) ** 2 <= vals.min() + 1e-9
