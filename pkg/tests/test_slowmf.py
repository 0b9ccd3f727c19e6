import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from exosc.errors import DomainError, EmptyWindow, OutOfDomain
from exosc.singular import hester_jump_point
from exosc.slowmf import (Order, lambert_w, manifold_residual, manifold_samples, slow_manifold_corbeiller,
                          slow_manifold_hester, z_function)


def _bisect_w(w, lo=-1.0, hi=50.0):
    # oracle: bisection on z e^z = w
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * math.exp(mid) < w:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_lambert_w_examples():
    assert lambert_w(0.0) == 0.0
    assert lambert_w(math.e) == pytest.approx(1.0, rel=1e-15)
    assert abs(lambert_w(1.0) - 0.5671432904097838) <= 1e-15
    assert abs(lambert_w(1.0) - _bisect_w(1.0)) <= 1e-15
    with pytest.raises(DomainError):
        lambert_w(-1 / math.e)


def test_lambert_w_near_branch_point():
    # W(-1/e + d) + 1 ~ sqrt(2 e d); for d = 1e-12 that is 2.33e-6, so the nominal 2e-6 window is too tight
    w = -1 / math.e + 1e-12
    v = lambert_w(w)
    assert v == pytest.approx(float(mpmath.lambertw(mpmath.mpf(w))), abs=1e-6)
    assert abs(v + 1) < 3e-6


@pytest.mark.parametrize("w", [10.0, 20.0, 200.0, 1e6, 0.1, -0.3])
def test_lambert_w_vs_mpmath(w):
    assert lambert_w(w) == pytest.approx(float(mpmath.lambertw(w).real), rel=1e-15, abs=1e-16)


@given(st.floats(-1 / math.e + 1e-9, 1e12))
def test_lambert_w_identity(w):
    v = lambert_w(w)
    assert v > -1
    assert abs(v * math.exp(v) - w) <= 1e-13 * max(1.0, abs(w))


def test_z_function():
    assert z_function(0.0) == 0.0
    assert z_function(math.exp(-1)) == pytest.approx(1.0, rel=1e-15)
    assert z_function(0.1) == pytest.approx(1 / 1.7455280027406993831, rel=1e-15)
    with pytest.raises(DomainError):
        z_function(-1e-3)
    for s in np.linspace(1e-6, 0.3, 200):
        z = z_function(s)
        assert z * math.exp(-1 / z) == pytest.approx(s, rel=1e-12)


def test_slow_manifold_hester(hp):
    assert slow_manifold_hester(hp, 0.0) == pytest.approx(2 * math.log(5), abs=1e-12)
    # mpmath findroot oracle
    h = slow_manifold_hester(hp, -10.0)
    assert h == pytest.approx(3.9833659965482720319, abs=1e-10)
    xj, yj = hester_jump_point(hp)
    assert slow_manifold_hester(hp, xj - 1e-12) == pytest.approx(yj, abs=1e-4)
    with pytest.raises(OutOfDomain):
        slow_manifold_hester(hp, xj)


@given(st.floats(-50, 1.48))
def test_slow_manifold_hester_brackets(x):
    from exosc.models import HesterParams
    p = HesterParams(0.5, 0.4, 0.2, 0.3)
    _, yj = hester_jump_point(p)
    h = slow_manifold_hester(p, x)
    xc = lambda v: p.mu * (math.exp(v) - p.kappa * math.exp(1.5 * v))  # noqa: E731
    assert h > yj
    assert xc(h + 1e-6) <= x <= xc(h - 1e-6)


def test_slow_manifold_corbeiller(cp):
    eps = 0.01
    assert slow_manifold_corbeiller(cp, eps, -eps * cp.b * math.e) == pytest.approx(eps, rel=1e-15)
    lead = slow_manifold_corbeiller(cp, eps, -0.5)
    # mpmath: W(200) = 3.92974326880461730572
    assert lead == pytest.approx(0.01 * 3.9297432688046173057, rel=1e-14)
    full = slow_manifold_corbeiller(cp, eps, -0.5, Order.FULL)
    assert full == pytest.approx(lead * 1.01, rel=1e-14)
    ys = [slow_manifold_corbeiller(cp, eps, x) for x in np.linspace(-3, -0.01, 50)]
    assert all(a > b for a, b in zip(ys, ys[1:]))
    with pytest.raises(OutOfDomain):
        slow_manifold_corbeiller(cp, eps, 0.0)


def test_residual_of_graph_itself(hp, cp):
    xs = np.linspace(0.2, 1.0, 200)
    pts = [(x, 0.01 * slow_manifold_hester(hp, x)) for x in xs]
    assert manifold_residual("hester", hp, 0.01, pts, (0.2, 1.0)) < 1e-12
    xs = np.linspace(-0.8, -0.3, 200)
    pts = [(x, slow_manifold_corbeiller(cp, 0.01, x)) for x in xs]
    assert manifold_residual("corbeiller", cp, 0.01, pts, (-0.8, -0.3)) < 1e-15
    with pytest.raises(EmptyWindow):
        manifold_residual("corbeiller", cp, 0.01, pts, (1.0, 2.0))


def test_manifold_samples(hp, cp):
    rows = manifold_samples("corbeiller", cp, 0.01, [-0.5, -0.2], Order.FULL)
    assert rows[0][2] == "full" and rows[0][1] == pytest.approx(0.01 * 3.9297432688046173057 * 1.01, rel=1e-13)
    rows = manifold_samples("hester", hp, 0.01, [0.0])
    assert rows[0][1] == pytest.approx(0.02 * math.log(5), rel=1e-12)
