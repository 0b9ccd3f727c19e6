import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from exosc.errors import OnSwitchingManifold, OverflowGuard, ValidationError
from exosc.models import (PWS, CorbeillerParams, HesterParams, System, corbeiller_field_normalized,
                          corbeiller_field_raw, equilibrium, hester_field_normalized, hester_field_raw,
                          normalized_field, pws_field, sigma, softplus)


def test_softplus_values():
    assert softplus(0.0) == pytest.approx(math.log(2), abs=1e-16)
    assert abs(softplus(1000.0) - 1000.0) <= 1e-300
    assert 0.0 <= softplus(-1000.0) <= math.exp(-1000.0) + 1e-320


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_softplus_monotone_nonnegative(u, v):
    assert softplus(u) >= 0
    if u <= v:
        assert softplus(u) <= softplus(v)


def test_param_validation():
    with pytest.raises(ValidationError):
        HesterParams(0.5, 0.4, 0.2, 1.5)
    with pytest.raises(ValidationError):
        HesterParams(-0.5, 0.4, 0.2, 0.3)
    with pytest.raises(ValidationError):
        CorbeillerParams(1.0, 1.0)
    with pytest.raises(ValidationError):
        CorbeillerParams(0.0, 0.25)


def test_cycle_condition_flag(hp):
    assert hp.cycle_condition
    assert not HesterParams(0.5, 0.4, 0.8, 0.3).cycle_condition
    assert not HesterParams(1.0, 1.0, 0.5, 0.3).cycle_condition  # exactly 1


def test_hester_normalized_examples(hp):
    assert hester_field_normalized(hp, 0.1, (0, 0)) == pytest.approx((0, 0.16), abs=1e-15)
    dx, dy = hester_field_normalized(hp, 0.01, (0.5, -1))
    assert abs(dx + 1) <= 1e-40 and abs(dy - 0.1) <= 1e-15
    dx, dy = hester_field_normalized(hp, 0.01, (0.5, 1))
    # 0.2*0.4 is 0.08000000000000002 in binary; compare with the float product
    assert abs(dx) <= 1e-20 and abs(dy + hp.kappa * hp.mu) <= 1e-20


def test_corbeiller_normalized_examples(cp):
    assert corbeiller_field_normalized(cp, 0.1, (0, 0)) == pytest.approx((0.5, 0), abs=1e-15)
    assert corbeiller_field_normalized(cp, 0.01, (0.3, -0.5)) == pytest.approx((0.5, -0.55), abs=1e-20)
    assert corbeiller_field_normalized(cp, 0.01, (0.3, 0.5)) == pytest.approx((0, -0.125), abs=1e-20)


def test_raw_examples(hp, cp):
    assert hester_field_raw(hp, 0.1, (0, 0)) == pytest.approx((0, 0.32), abs=1e-15)
    assert corbeiller_field_raw(cp, 0.1, (0, 0)) == pytest.approx((1, 0), abs=1e-15)
    with pytest.raises(OverflowGuard):
        hester_field_raw(hp, 0.001, (0, 1))


def test_pws_field(hp, cp):
    assert pws_field(System.HESTER, hp, (1, -1)) == pytest.approx((-1, -0.4))
    assert pws_field(System.HESTER, hp, (7, 3)) == pytest.approx((0, -0.08))
    assert pws_field(System.CORBEILLER, cp, (2, 3)) == pytest.approx((0, -0.75))
    with pytest.raises(OnSwitchingManifold):
        pws_field(System.HESTER, hp, (1, 0))


def test_pws_sentinel_only_where_allowed(hp, cp):
    with pytest.raises(ValidationError):
        hester_field_normalized(hp, PWS, (0, 0))
    assert equilibrium(System.CORBEILLER, cp, PWS) == pytest.approx((-0.5, -1))


def test_equilibria(hp, cp):
    assert equilibrium(System.HESTER, hp, 0.1) == pytest.approx((0.32, 0), abs=1e-15)
    e = equilibrium(System.CORBEILLER, cp, 0.1)
    assert e.x == pytest.approx(-0.25 * (2 - math.exp(-10)), rel=1e-15) and e.y == -1
    for sysname, p in ((System.HESTER, hp), (System.CORBEILLER, cp)):
        for eps in (0.1, 0.05):
            s = equilibrium(sysname, p, eps)
            f = (hester_field_raw if sysname is System.HESTER else corbeiller_field_raw)(p, eps, s)
            assert math.hypot(*f) < 1e-12


@settings(max_examples=200)
@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(1e-6, 1.0))
def test_normalized_fields_total(x, y, eps):
    hp = HesterParams(0.5, 0.4, 0.2, 0.3)
    cp = CorbeillerParams(1.0, 0.25)
    for v in hester_field_normalized(hp, eps, (x, y)) + corbeiller_field_normalized(cp, eps, (x, y)):
        assert math.isfinite(v)


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_orbit_equivalence(x, y):
    hp = HesterParams(0.5, 0.4, 0.2, 0.3)
    cp = CorbeillerParams(1.0, 0.25)
    eps = 0.1
    for p, raw, norm, c in ((hp, hester_field_raw, hester_field_normalized, 1.5),
                            (cp, corbeiller_field_raw, corbeiller_field_normalized, 1.0)):
        r, n = raw(p, eps, (x, y)), norm(p, eps, (x, y))
        s = sigma(c * y / eps)
        for ri, ni in zip(r, n):
            assert ni == pytest.approx(s * ri, rel=1e-12, abs=1e-12 * s * max(1.0, abs(ri)))


def test_fast_closure_matches_validated_field(hp, cp):
    rng = np.random.default_rng(1)
    for _ in range(200):
        s = tuple(rng.uniform(-3, 3, 2))
        a = normalized_field(System.HESTER, hp, 0.03)(s)
        b = tuple(hester_field_normalized(hp, 0.03, s))
        assert np.allclose(a, b, rtol=1e-13, atol=1e-15)
        a = normalized_field(System.CORBEILLER, cp, 0.03)(s)
        b = tuple(corbeiller_field_normalized(cp, 0.03, s))
        assert np.allclose(a, b, rtol=1e-13, atol=1e-15)


# |y|/eps stays below ~25 so the deviation is above double resolution
@pytest.mark.parametrize("y", [0.5, -0.5, 0.25, -0.25])
def test_exponential_pws_convergence(hp, cp, y):
    for p, norm, sysname in ((hp, hester_field_normalized, System.HESTER),
                             (cp, corbeiller_field_normalized, System.CORBEILLER)):
        epss = [0.1, 0.05, 0.02]
        errs = [math.hypot(*np.subtract(norm(p, e, (0.7, y)), pws_field(sysname, p, (0.7, y)))) for e in epss]
        X, Y = np.array([abs(y) / e for e in epss]), np.log(errs)
        slope, icpt = np.polyfit(X, Y, 1)
        resid = Y - (slope * X + icpt)
        r2 = 1 - resid.var() / Y.var()
        assert -slope > 0 and r2 > 0.99
