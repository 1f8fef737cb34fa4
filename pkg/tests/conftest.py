import numpy as np
import pytest

from chernoffkit import functions as fn
from chernoffkit.operators import (
    Action,
    ControlParams,
    FdHjbParams,
    ResolventSupParams,
    SchemeStep,
    SublinearEulerParams,
    TiltParams,
    WassersteinShiftParams,
)
from chernoffkit.sublinear import AmbiguitySet, DiscreteMeasure, Penalty

RAD = AmbiguitySet.single(DiscreteMeasure.rademacher(1.0))
TWO_RAD = AmbiguitySet((DiscreteMeasure.rademacher(1.0), DiscreteMeasure.rademacher(2.0)))


def fd_step(delta=0.05, sigma_max=1.0, penalty=None, h=None):
    penalty = penalty or Penalty.indicator(0.5, 1.0)
    p = FdHjbParams(delta, sigma_max, penalty)
    return SchemeStep.fd_hjb(p, h if h is not None else delta**2 / (2 * sigma_max**2))


def euler_step(drift=None, scale=1.0, noise=TWO_RAD, h=0.01):
    return SchemeStep.sublinear_euler(SublinearEulerParams(drift or fn.tanh_drift(0.5), scale, noise), h)


def tilt_step(alpha=2.0, **kw):
    return SchemeStep.exp_tilt(TiltParams(alpha), euler_step(**kw))


def control_step(h=0.01):
    acts = tuple(
        Action(a, b, 0.5 * b * b + (a - 0.25)) for a in (0.25, 0.5, 1.0) for b in (-0.5, 0.0, 0.5)
    )
    return SchemeStep.control(ControlParams(acts, RAD), h)


def wasserstein_step(spacing=0.05, span=0.5, h=0.1):
    n = int(round(span / spacing))
    lam = np.arange(-n, n + 1) * spacing
    p = WassersteinShiftParams(DiscreteMeasure.dirac(0.0), Penalty.quadratic(0.5), lam)
    return SchemeStep.wasserstein_shift(p, h)


def resolvent_step(lam=50.0, delta=0.05, thetas=(0.5, 1.0)):
    return SchemeStep.resolvent_sup(ResolventSupParams(thetas, lam, delta))


def yosida_step(lam=50.0, delta=0.05, thetas=(0.5, 1.0)):
    return SchemeStep.yosida(ResolventSupParams(thetas, lam, delta))


KIND_FACTORIES = {
    "fd-hjb": fd_step,
    "euler": euler_step,
    "tilt": tilt_step,
    "control": control_step,
    "wasserstein": wasserstein_step,
    "resolvent": resolvent_step,
    "yosida": yosida_step,
}


@pytest.fixture(params=sorted(KIND_FACTORIES))
def any_step(request):
    return KIND_FACTORIES[request.param]()
