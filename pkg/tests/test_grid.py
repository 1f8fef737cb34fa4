import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chernoffkit.grid import (
    CompactWindow,
    Grid1d,
    GridFunction,
    WeightKappa,
    displaced,
    kappa_norm,
    lipschitz_estimate,
    mixed_convergence_check,
    sample_function,
    second_central_difference,
    shift,
    sup_norm_on_window,
)


def grid_on(lo, hi, spacing):
    return Grid1d.from_span(lo, hi, spacing)


# ---------------------------------------------------------------- sampling


def test_sample_zero():
    g = grid_on(-1, 1, 0.1)
    assert np.all(sample_function(lambda x: 0.0 * x, g).values == 0.0)


def test_sample_square_three_nodes():
    g = Grid1d(-0.1, 0.1, 3)
    v = sample_function(lambda x: x * x, g).values
    np.testing.assert_allclose(v, [0.01, 0.0, 0.01], rtol=0, atol=1e-17)


def test_sample_gaussian_against_high_precision():
    g = Grid1d.from_span(-8.0, 8.0, 16.0 / 256)
    assert g.count == 257
    v = sample_function(lambda x: np.exp(-x * x), g).values
    mpmath.mp.dps = 30
    ref = np.array([float(mpmath.exp(-mpmath.mpf(float(x)) ** 2)) for x in g.nodes])
    np.testing.assert_allclose(v, ref, rtol=1e-15, atol=0)


def test_sample_scalar_callable():
    g = grid_on(-1, 1, 0.5)
    v = sample_function(lambda x: math.cos(x), g).values
    np.testing.assert_allclose(v, np.cos(g.nodes))


def test_sample_rejects_non_finite_and_names_node():
    g = grid_on(-1, 1, 0.5)
    with pytest.raises(ValueError, match="node 2"), np.errstate(divide="ignore"):
        sample_function(lambda x: 1.0 / x, g)


def test_grid_needs_three_nodes():
    with pytest.raises(ValueError):
        Grid1d(0.0, 0.1, 2)


# ----------------------------------------------------------------- norms


def test_kappa_norm_examples():
    g = grid_on(-1, 1, 0.1)
    assert kappa_norm(GridFunction(g, np.zeros(g.count))) == 0.0
    assert kappa_norm(GridFunction(g, np.full(g.count, 3.0))) == 3.0


def test_kappa_norm_polynomial_weight():
    g = grid_on(-10, 10, 0.01)
    f = sample_function(lambda x: x, g)
    k = WeightKappa.polynomial(2)
    val = kappa_norm(f, k)
    # exhaustive max over nodes of |x|/(1+x^2)
    ref = max(abs(x) / (1 + x * x) for x in g.nodes.tolist())
    assert val == pytest.approx(ref, rel=1e-15)
    assert val == pytest.approx(0.5, abs=1e-12)


def test_sampled_c_kappa_below_stored_constant():
    k = WeightKappa.polynomial(2)
    x = np.linspace(-20, 20, 4001)
    ys = np.linspace(-1, 1, 201)
    est = k.sampled_c_kappa(x, ys)
    assert est <= k.c_kappa * (1 + 1e-12)
    assert est >= 0.99 * k.c_kappa


def test_sup_norm_on_window_examples():
    g = grid_on(-3, 3, 0.01)
    f = sample_function(np.sin, g)
    w = CompactWindow(-2, 2)
    assert sup_norm_on_window(f, f, w) == 0.0
    assert sup_norm_on_window(f + 2.0, f, w) == pytest.approx(2.0, abs=1e-15)
    zero = f.with_values(np.zeros(g.count))
    assert abs(sup_norm_on_window(f, zero, w) - 1.0) <= 0.01**2


def test_window_outside_grid_rejected():
    g = grid_on(-1, 1, 0.1)
    f = sample_function(np.sin, g)
    with pytest.raises(ValueError):
        sup_norm_on_window(f, f, CompactWindow(-2, 0))


# ------------------------------------------------------------- differences


def test_second_difference_examples():
    g = grid_on(-1, 1, 0.1)
    assert np.all(second_central_difference(sample_function(lambda x: 0 * x + 4.0, g)).values == 0)
    d2 = second_central_difference(sample_function(lambda x: x * x, g)).values
    np.testing.assert_allclose(d2[1:-1], 2.0, rtol=1e-12)
    lin = second_central_difference(sample_function(lambda x: x, g)).values
    np.testing.assert_allclose(lin[1:-1], 0.0, atol=1e-12)


def test_shift_examples():
    g = grid_on(-1, 1, 0.1)
    f = sample_function(lambda x: x * x, g)
    assert np.array_equal(shift(f, 0).values, f.values)
    assert shift(f, 1).at(0.0) == pytest.approx(0.01, abs=1e-15)
    with pytest.raises(ValueError):
        shift(f, g.count)


def test_lipschitz_examples():
    g = grid_on(-5, 5, 0.01)
    assert lipschitz_estimate(sample_function(lambda x: 0 * x + 1, g)) == 0.0
    assert lipschitz_estimate(sample_function(lambda x: 3 * x, g)) == pytest.approx(3.0, rel=1e-12)
    assert abs(lipschitz_estimate(sample_function(np.sin, g)) - 1.0) <= 1e-4


def test_displaced_interpolates_and_extends():
    v = np.array([0.0, 1.0, 4.0, 9.0])
    np.testing.assert_allclose(displaced(v, 1.0, 0.5), [0.5, 2.5, 6.5, 9.0])
    np.testing.assert_allclose(displaced(v, 1.0, -1.0), [0.0, 0.0, 1.0, 4.0])


# ---------------------------------------------------------- mixed topology


def test_mixed_convergence_exact_and_harmonic():
    g = grid_on(-2, 2, 0.1)
    target = sample_function(np.cos, g)
    ws = [CompactWindow(-1, 1), CompactWindow(-2, 2)]
    rep = mixed_convergence_check([target] * 3, target, ws, bound=2.0)
    assert rep.bounded and all(d == 0 for row in rep.distances for d in row)
    fs = [target + 1.0 / n for n in range(1, 5)]
    rep = mixed_convergence_check(fs, target, ws, bound=3.0)
    for n, row in enumerate(rep.distances, start=1):
        assert row == pytest.approx([1.0 / n] * 2, abs=1e-14)
    assert all(rep.decreasing)


def test_mixed_convergence_rejects_empty():
    with pytest.raises(ValueError):
        mixed_convergence_check([], np.cos, [CompactWindow(0, 1)])


# --------------------------------------------------------------- properties

vals = st.lists(st.floats(-1e3, 1e3), min_size=5, max_size=40)


@settings(max_examples=200, deadline=None)
@given(vals, vals, st.floats(-10, 10))
def test_kappa_norm_is_a_seminorm(a, b, c):
    n = min(len(a), len(b))
    g = Grid1d(-1.0, 0.1, n)
    f, h = GridFunction(g, np.array(a[:n])), GridFunction(g, np.array(b[:n]))
    k = WeightKappa.polynomial(1.5)
    assert kappa_norm(f + h, k) <= kappa_norm(f, k) + kappa_norm(h, k) + 1e-9
    assert kappa_norm(f * c, k) == pytest.approx(abs(c) * kappa_norm(f, k), rel=1e-12, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(vals, st.integers(-3, 3))
def test_shift_commutes_with_second_difference(a, s):
    g = Grid1d(0.0, 0.25, len(a))
    f = GridFunction(g, np.array(a))
    lhs = second_central_difference(shift(f, s)).values
    rhs = shift(second_central_difference(f), s).values
    m = abs(s) + 1
    if 2 * m < g.count:
        np.testing.assert_array_equal(lhs[m:-m], rhs[m:-m])


@settings(max_examples=100, deadline=None)
@given(vals, vals, st.floats(-5, 5))
def test_second_difference_is_linear(a, b, c):
    n = min(len(a), len(b))
    g = Grid1d(0.0, 0.5, n)
    f, h = GridFunction(g, np.array(a[:n])), GridFunction(g, np.array(b[:n]))
    lhs = second_central_difference(f * c + h).values
    rhs = c * second_central_difference(f).values + second_central_difference(h).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * max(1.0, np.abs(lhs).max()))
