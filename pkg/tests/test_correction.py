import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from priorshift.correction import adjust_posteriors, predict_top1
from priorshift.errors import DegenerateRow, DimensionMismatch


def test_examples():
    out = adjust_posteriors([[0.6, 0.4]], [0.5, 0.5], [0.25, 0.75])
    np.testing.assert_allclose(out, [[1 / 3, 2 / 3]], rtol=1e-15)
    assert adjust_posteriors([[0.6, 0.4]], [0.5, 0.5], [1.0, 0.0]).tolist() == [[1.0, 0.0]]
    post = np.array([[0.6, 0.4], [0.123, 0.877]])
    assert np.array_equal(adjust_posteriors(post, [0.3, 0.7], [0.3, 0.7]), post)


def test_errors():
    with pytest.raises(DimensionMismatch):
        adjust_posteriors([[0.6, 0.4]], [0.5, 0.5], [0.2, 0.3, 0.5])
    with pytest.raises(DegenerateRow) as info:
        adjust_posteriors([[0.5, 0.5], [1.0, 0.0]], [0.5, 0.5], [0.0, 1.0])
    assert info.value.row == 1


def test_predict_top1():
    assert predict_top1([[0.6, 0.4]]).tolist() == [0]
    assert predict_top1([[0.5, 0.5]]).tolist() == [0]
    assert predict_top1([[0.1, 0.2, 0.7]]).tolist() == [2]


def simplex_rows(k):
    return arrays(np.float64, st.tuples(st.integers(1, 6), st.just(k)),
                  elements=st.floats(0.01, 1.0)).map(lambda m: m / m.sum(axis=1, keepdims=True))


priors = st.integers(2, 6).flatmap(
    lambda k: st.tuples(simplex_rows(k), *[arrays(np.float64, k, elements=st.floats(0.05, 1.0))
                                            .map(lambda v: v / v.sum())] * 3))


@settings(max_examples=150, deadline=None)
@given(priors)
def test_composition(case):
    post, train, a, b = case
    two_step = adjust_posteriors(adjust_posteriors(post, train, a), a, b)
    np.testing.assert_allclose(two_step, adjust_posteriors(post, train, b), rtol=0, atol=1e-12)


@settings(max_examples=150, deadline=None)
@given(priors)
def test_rows_are_simplex_points(case):
    post, train, _, b = case
    out = adjust_posteriors(post, train, b)
    assert np.all(out >= 0)
    assert np.all(np.abs(out.sum(axis=1) - 1) <= 4e-16 * out.shape[1])


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6).flatmap(simplex_rows))
def test_uniform_priors_keep_argmax(post):
    k = post.shape[1]
    u = np.full(k, 1.0 / k)
    assert np.array_equal(predict_top1(adjust_posteriors(post, u, u)), predict_top1(post))
