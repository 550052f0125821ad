import itertools

import numpy as np
import pytest

from calex.isotonic import IsotonicFit, fit_pava, merge_equal_x, pava


def brute_force_isotonic(y, w):
    """Optimal monotone fit by enumerating contiguous block partitions.

    Every optimal isotonic fit is constant on contiguous blocks with each
    block at its weighted mean, so trying all partitions and keeping the
    best monotone one is exact for small n.
    """
    n = len(y)
    best = None
    best_sse = np.inf
    for cuts in itertools.product([False, True], repeat=n - 1):
        bounds = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [n]
        fit = np.empty(n)
        levels = []
        for a, b in zip(bounds[:-1], bounds[1:]):
            m = np.average(y[a:b], weights=w[a:b])
            fit[a:b] = m
            levels.append(m)
        if any(b < a for a, b in zip(levels[:-1], levels[1:])):
            continue
        sse = float(np.sum(w * (y - fit) ** 2))
        if sse < best_sse - 1e-15:
            best_sse = sse
            best = fit
    return best


def test_worked_example():
    y = np.array([0.0, 0.0, 1.0, 1.0, 0.0])
    out = pava(y, np.ones(5))
    assert np.allclose(out, [0, 0, 2 / 3, 2 / 3, 2 / 3], atol=1e-12)


def test_already_monotone_unchanged():
    y = np.array([0.1, 0.2, 0.2, 0.9])
    assert np.array_equal(pava(y, np.ones(4)), y)


def test_single_point():
    assert np.array_equal(pava(np.array([0.7]), np.array([2.0])), [0.7])


def test_all_decreasing_pools_to_weighted_mean():
    y = np.array([3.0, 2.0, 1.0])
    w = np.array([1.0, 2.0, 1.0])
    expected = np.average(y, weights=w)
    assert np.allclose(pava(y, w), expected)


def test_matches_brute_force_small():
    g = np.random.default_rng(7)
    for _ in range(150):
        n = int(g.integers(1, 9))
        y = g.normal(size=n)
        w = g.uniform(0.1, 3.0, size=n)
        got = pava(y, w)
        want = brute_force_isotonic(y, w)
        assert np.allclose(got, want, atol=1e-9)


def test_output_is_monotone_and_mean_preserving():
    g = np.random.default_rng(3)
    for _ in range(50):
        n = int(g.integers(2, 40))
        y = g.normal(size=n)
        w = g.uniform(0.1, 2.0, size=n)
        out = pava(y, w)
        assert (np.diff(out) >= -1e-12).all()
        assert np.isclose(np.sum(w * out), np.sum(w * y))


def test_merge_equal_x_pools_weights():
    x = np.array([1.0, 1.0, 2.0, 3.0, 3.0])
    y = np.array([0.0, 1.0, 0.5, 1.0, 0.0])
    w = np.array([1.0, 3.0, 2.0, 1.0, 1.0])
    xm, ym, wm = merge_equal_x(x, y, w)
    assert np.array_equal(xm, [1.0, 2.0, 3.0])
    assert np.allclose(ym, [0.75, 0.5, 0.5])
    assert np.array_equal(wm, [4.0, 2.0, 2.0])


def test_fit_pava_sorts_and_evaluates():
    x = np.array([0.9, 0.1, 0.4, 0.6])
    y = np.array([1.0, 0.0, 0.0, 1.0])
    fit = fit_pava(x, y)
    assert fit.evaluate(0.05) == 0.0
    assert fit.evaluate(0.9) == 1.0
    assert fit.evaluate(2.0) == 1.0
    # step function is right-continuous: at a knot, that knot's value
    assert fit.evaluate(0.6) == 1.0
    assert fit.evaluate(0.5) == 0.0


def test_evaluate_batch_matches_scalar():
    g = np.random.default_rng(11)
    x = g.uniform(size=20)
    y = g.uniform(size=20)
    fit = fit_pava(x, y)
    qs = g.uniform(-0.2, 1.2, size=15)
    batch = fit.evaluate(qs)
    for q, b in zip(qs, batch):
        assert fit.evaluate(float(q)) == b


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_pava(np.array([]), np.array([]))
    with pytest.raises(ValueError):
        fit_pava(np.array([1.0]), np.array([1.0]), np.array([0.0]))
    with pytest.raises(ValueError):
        fit_pava(np.array([1.0, 2.0]), np.array([1.0]))
