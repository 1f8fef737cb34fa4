import math
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np
import pytest
from scipy.linalg import expm

from chernoffkit import functions as fn
from chernoffkit.grid import CompactWindow, Grid1d, GridFunction, sample_function, second_difference_values
from chernoffkit.operators import (
    Action,
    AdmissibilityError,
    ControlParams,
    FdHjbParams,
    ResolventSupParams,
    SchemeStep,
    StepKind,
    StepMeta,
    SublinearEulerParams,
    TiltParams,
    WassersteinShiftParams,
    generator_of,
    generator_residual,
    hamiltonian_eval,
    sublinear_euler_step,
)
from chernoffkit.properties import check_all
from chernoffkit.sublinear import AmbiguitySet, DiscreteMeasure, Penalty

from conftest import RAD, euler_step, fd_step

ZERO_DRIFT = fn.constant(0.0)


def line(lo, hi, spacing):
    return Grid1d.from_span(lo, hi, spacing)


# ------------------------------------------------------------------ FdHjb


def test_fd_zero_and_heat_of_square():
    step = fd_step(0.1, 1.0, Penalty.indicator(1.0, 1.0), h=0.005)
    g = line(-1, 1, 0.1)
    assert np.all(step(GridFunction(g, np.zeros(g.count))).values == 0.0)
    f = sample_function(lambda x: x * x, g)
    out = step(f).values
    np.testing.assert_allclose(out[1:-1], f.values[1:-1] + 0.005, rtol=0, atol=1e-15)


def test_fd_cfl_rejected():
    with pytest.raises(AdmissibilityError, match="CFL") as ei:
        SchemeStep.fd_hjb(FdHjbParams(0.1, 2.0, Penalty.indicator(0.0, 2.0)), 0.01)
    assert ei.value.field == "sigma_max"


def test_fd_grid_mismatch_rejected():
    step = fd_step(0.1, 1.0, h=0.005)
    with pytest.raises(AdmissibilityError):
        step(sample_function(np.sin, line(-1, 1, 0.05)))


def test_fd_sigma_grid_contains_zero_point_and_endpoints():
    p = FdHjbParams(0.1, 1.0, Penalty.indicator(0.37, 0.81), sigma_grid_size=5)
    assert 0.37 in p.sigma_grid and 0.81 in p.sigma_grid


# ------------------------------------------------------------------ Euler


def test_euler_without_noise_is_transport():
    step = euler_step(drift=fn.constant(1.5), scale=0.0, h=0.1)
    g = line(-2, 2, 0.05)
    f = sample_function(np.sin, g)
    out = step(f).values
    np.testing.assert_allclose(out[:-5], np.sin(g.nodes[:-5] + 0.15), atol=0.05**2)


def test_euler_rademacher_average():
    step = SchemeStep.sublinear_euler(SublinearEulerParams(ZERO_DRIFT, 1.0, RAD), 0.01)
    f = sample_function(lambda x: x, line(-1, 1, 0.1))
    assert step(f).at(0.0) == pytest.approx(0.0, abs=1e-15)


def test_euler_kernel_on_two_point_set():
    # {delta_-1, delta_+1} is not centred, so the params record refuses it;
    # the kernel itself is exercised with a bare parameter namespace
    noise = AmbiguitySet((DiscreteMeasure.dirac(-1.0), DiscreteMeasure.dirac(1.0)))
    with pytest.raises(AdmissibilityError):
        SublinearEulerParams(ZERO_DRIFT, 1.0, noise)
    bare = SimpleNamespace(drift=ZERO_DRIFT, noise_scale=1.0, noise=noise, constant_drift=True)
    f = sample_function(lambda x: x, line(-1, 1, 0.1))
    assert sublinear_euler_step(bare, 0.01, f).at(0.0) == pytest.approx(0.1, abs=1e-15)


# ------------------------------------------------------------------ tilt


def test_tilt_identity_inner():
    inner = SchemeStep.sublinear_euler(
        SublinearEulerParams(ZERO_DRIFT, 0.0, AmbiguitySet.single(DiscreteMeasure.dirac(0.0))), 0.01
    )
    step = SchemeStep.exp_tilt(TiltParams(3.0), inner)
    f = sample_function(np.cos, line(-1, 1, 0.1))
    np.testing.assert_allclose(step(f).values, f.values, atol=1e-15)


def test_tilt_averaging_value():
    inner = SchemeStep.sublinear_euler(SublinearEulerParams(ZERO_DRIFT, 1.0, RAD), 0.01)
    step = SchemeStep.exp_tilt(TiltParams(1.0), inner)
    g = line(-1, 1, 0.1)
    v = np.zeros(g.count)
    v[g.index_of(0.1)] = 1.0
    out = step(GridFunction(g, v)).at(0.0)
    assert out == pytest.approx(math.log((math.e + 1) / 2), abs=1e-15)
    assert out == pytest.approx(0.620115, abs=1e-6)


@pytest.mark.parametrize("seed", range(20))
def test_tilt_cash_additive(seed):
    rng = np.random.default_rng(seed)
    step = SchemeStep.exp_tilt(TiltParams(float(rng.uniform(0.5, 20))), euler_step())
    g = line(-2, 2, 0.05)
    f = GridFunction(g, rng.normal(size=g.count))
    c = float(rng.uniform(-50, 50))
    np.testing.assert_allclose(step(f + c).values, step(f).values + c, atol=1e-10)


def test_tilt_rejects_other_inner():
    with pytest.raises(AdmissibilityError):
        SchemeStep.exp_tilt(TiltParams(1.0), fd_step())


# ------------------------------------------------------------------ control


def test_control_examples():
    g = line(-2, 2, 0.01)
    f = sample_function(lambda x: x * x, g)
    one = SchemeStep.control(ControlParams((Action(1.0, 0.0, 0.0),), RAD), 0.04)
    x = g.nodes
    np.testing.assert_allclose(one(f).values[30:-30], 0.5 * ((x + 0.2) ** 2 + (x - 0.2) ** 2)[30:-30], atol=1e-12)
    move = SchemeStep.control(ControlParams((Action(0.0, 2.0, 0.0),), RAD), 0.04)
    np.testing.assert_allclose(move(f).values[:-10], ((x + 0.08) ** 2)[:-10], atol=1e-12)
    two = SchemeStep.control(ControlParams((Action(1.0, 0.0, 0.0), Action(4.0, 0.0, 1.0)), RAD), 0.01)
    assert two(f).at(0.0) == pytest.approx(0.03, abs=1e-15)


def test_control_rejections():
    with pytest.raises(AdmissibilityError):
        ControlParams((), RAD)
    with pytest.raises(AdmissibilityError):
        ControlParams((Action(1.0, 0.0, 0.5),), RAD)


# -------------------------------------------------------------- Wasserstein


def _wass(shifts, penalty, h=0.1):
    p = WassersteinShiftParams(DiscreteMeasure.dirac(0.0), penalty, np.asarray(shifts, dtype=float))
    return SchemeStep.wasserstein_shift(p, h)


def test_wasserstein_trivial_cases():
    f = sample_function(np.sin, line(-2, 2, 0.01))
    assert np.array_equal(_wass([0.0], Penalty.quadratic(0.5))(f).values, f.values)
    lam = np.arange(-100, 101) * 0.01
    assert np.array_equal(_wass(lam, Penalty.indicator(0.0, 0.0))(f).values, f.values)


def test_wasserstein_linear_data():
    g = line(-2, 2, 0.01)
    step = _wass(np.arange(-100, 101) * 0.01, Penalty.quadratic(0.5))
    assert step(sample_function(lambda x: x, g)).at(0.0) == pytest.approx(0.05, abs=1e-12)


def test_wasserstein_needs_zero_shift():
    with pytest.raises(AdmissibilityError):
        _wass([0.1, 0.2], Penalty.quadratic(0.5))


# --------------------------------------------------------- resolvent, Yosida


def _res(kind, lam, delta, thetas=(1.0,)):
    p = ResolventSupParams(thetas, lam, delta)
    return SchemeStep.resolvent_sup(p) if kind == "resolvent" else SchemeStep.yosida(p)


@pytest.mark.parametrize("kind", ["resolvent", "yosida"])
def test_constants_are_fixed(kind):
    g = line(-1, 1, 0.05)
    step = _res(kind, 20.0, 0.05, (0.3, 1.0))
    for c in (0.0, 2.5, -7.0):
        np.testing.assert_allclose(step(GridFunction(g, np.full(g.count, c))).values, c, atol=1e-13)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_resolvent_dirichlet_eigenvector(k):
    n, delta, lam = 41, 0.05, 30.0
    i = np.arange(n)
    v = np.sin(k * math.pi * i / (n - 1))
    v[0] = v[-1] = 0.0
    mu = 4.0 / delta**2 * math.sin(k * math.pi / (2 * (n - 1))) ** 2
    step = _res("resolvent", lam, delta)
    out = step(GridFunction(Grid1d(0.0, delta, n), v)).values
    np.testing.assert_allclose(out, lam / (lam + mu) * v, atol=1e-12)


def _dense_b(n, lam, theta, delta):
    k = theta / delta**2
    m = np.diag(np.full(n, lam + 2 * k)) - k * (np.eye(n, k=1) + np.eye(n, k=-1))
    m[0, :] = 0.0
    m[-1, :] = 0.0
    m[0, 0] = m[-1, -1] = 1.0
    d = np.full(n, lam)
    d[0] = d[-1] = 1.0
    return np.linalg.solve(m, np.diag(d))


@pytest.mark.parametrize("seed", range(5))
def test_yosida_matches_matrix_exponential(seed):
    rng = np.random.default_rng(seed)
    n, delta, lam = 61, 0.05, 40.0
    v = rng.normal(size=n)
    out = _res("yosida", lam, delta)(GridFunction(Grid1d(0.0, delta, n), v)).values
    ref = math.exp(-1.0) * expm(_dense_b(n, lam, 1.0, delta)) @ v
    np.testing.assert_allclose(out, ref, atol=1e-9)


def test_resolvent_needs_matching_h():
    with pytest.raises(AdmissibilityError):
        SchemeStep.resolvent_sup(ResolventSupParams((1.0,), 10.0, 0.1), h=0.2)


# ---------------------------------------------------------------- generators


def test_hamiltonian_examples():
    x = np.array([0.0])
    step = fd_step(0.1, 1.0, Penalty.indicator(0.0, 1.0), h=0.005)
    assert hamiltonian_eval(generator_of(step), fn.quadratic(1.0), 0.0) == pytest.approx(1.0, abs=1e-12)
    assert hamiltonian_eval(generator_of(step), fn.quadratic(-1.0), 0.0) == pytest.approx(0.0, abs=1e-12)
    step = fd_step(0.1, 1.0, Penalty.power(1.0, 4.0), h=0.005)
    assert hamiltonian_eval(generator_of(step), fn.quadratic(1.0), 0.0) == pytest.approx(0.25, abs=1e-10)
    quiet = SchemeStep.sublinear_euler(SublinearEulerParams(ZERO_DRIFT, 0.0, RAD), 0.01)
    np.testing.assert_array_equal(hamiltonian_eval(generator_of(quiet), fn.modulated_gaussian(), x), [0.0])


def test_fd_descriptor_rejects_quadratic_penalty():
    step = fd_step(0.1, 1.0, Penalty.quadratic(1.0), h=0.005)
    with pytest.raises(AdmissibilityError):
        generator_of(step)


def test_residual_of_constants(any_step):
    if any_step.kind is StepKind.FD_HJB:
        grid = Grid1d.from_span(-3, 3, any_step.params.delta)
    elif any_step.kind in (StepKind.RESOLVENT, StepKind.YOSIDA):
        grid = Grid1d.from_span(-3, 3, any_step.params.delta)
    else:
        grid = Grid1d.from_span(-3, 3, 0.05)
    w = CompactWindow(-1, 1)
    g = generator_of(any_step)
    assert generator_residual(any_step, g, fn.constant(0.0), w, grid) == 0.0
    # exact for translation-invariant kinds; the global solves leave round-off / h
    tol = 1e-12 if any_step.meta.translation_invariant else 1e-10
    assert generator_residual(any_step, g, fn.constant(1.75), w, grid) <= tol


def test_fd_residual_decreases():
    f = fn.modulated_gaussian(1.0, 0.0, 8.0)
    w = CompactWindow(-2, 2)
    res = []
    for d in (0.2, 0.1, 0.05):
        step = fd_step(d, 1.0, Penalty.power(1.0, 4.0), h=d * d)
        res.append(generator_residual(step, generator_of(step), f, w, Grid1d.from_span(-6, 6, d)))
    assert res[2] < res[1] < res[0]
    assert res[2] < 1e-2


# ---------------------------------------------------------------- properties


def test_every_kind_has_the_structural_properties(any_step):
    rep = check_all(any_step, trials=25, seed=7)
    assert rep.passed, rep.violations[:3]
    expected = {"monotonicity", "convexity", "lemma_b1", "normalization", "nonexpansive", "lipschitz_growth"}
    assert expected <= set(rep.checked)
    assert ("translation" in rep.checked) == any_step.meta.translation_invariant


@dataclass(frozen=True)
class FlippedFd:
    """FD step with the Hamiltonian's sign flipped: anti-diffusive and concave."""

    params: FdHjbParams
    h: float
    kind: StepKind = StepKind.FD_HJB
    meta: StepMeta = StepMeta(0.0, 0.0, True)

    def stencil_radius(self, grid):
        return 1

    def __call__(self, f):
        d2 = second_difference_values(f.values, self.params.delta)
        best = None
        for s in self.params.sigma_grid.tolist():
            c = float(self.params.penalty(s))
            if math.isfinite(c):
                cand = 0.5 * s * s * d2 - c
                best = cand if best is None else np.maximum(best, cand)
        return f.with_values(f.values - self.h * best)


def test_broken_step_produces_witnesses():
    p = FdHjbParams(0.05, 1.0, Penalty.indicator(0.5, 1.0))
    rep = check_all(FlippedFd(p, 0.05**2 / 2), trials=20, seed=3)
    counts = rep.counts()
    assert counts["monotonicity"] > 0
    assert counts["convexity"] > 0
    v = next(v for v in rep.violations if v.property == "monotonicity")
    assert v.excess > 1e-12
