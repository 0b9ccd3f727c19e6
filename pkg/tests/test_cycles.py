import io
import json
import math

import numpy as np
import pytest

from exosc.cycles import (ConvergenceReport, Existence, LimitCycle, SectionSpec, auto_section,
                          classify_existence, find_cycle, log_multiplier, return_map)
from exosc.errors import ConditionViolated, NoReturn, ValidationError
from exosc.models import HesterParams, System, equilibrium


@pytest.fixture(scope="module")
def hester_cycle():
    return find_cycle(System.HESTER, HesterParams(0.5, 0.4, 0.2, 0.3), 0.1)


@pytest.fixture(scope="module")
def corb_cycle():
    from exosc.models import CorbeillerParams
    return find_cycle(System.CORBEILLER, CorbeillerParams(1.0, 0.25), 0.01)


def _winding(poly, pt):
    d = poly - np.asarray(pt)
    ang = np.arctan2(d[:, 1], d[:, 0])
    return round(float(np.sum(np.angle(np.exp(1j * np.diff(ang))))) / (2 * math.pi))


def test_section_validation():
    with pytest.raises(ValidationError):
        SectionSpec(delta=0.0)
    with pytest.raises(ValueError):
        SectionSpec(crossing="sideways")


def test_eps_range(hp):
    with pytest.raises(ValidationError):
        return_map(System.HESTER, hp, 0.5, SectionSpec(), 0.0)
    with pytest.raises(ValidationError):
        find_cycle(System.HESTER, hp, 1e-4)


def test_find_cycle_requires_condition():
    with pytest.raises(ConditionViolated):
        find_cycle(System.HESTER, HesterParams(0.5, 0.4, 0.8, 0.3), 0.1)


def test_hester_cycle_properties(hester_cycle, hp):
    c = hester_cycle
    P = lambda x: return_map(System.HESTER, hp, 0.1, c.section, x)  # noqa: E731
    assert abs(P(c.fixed_point_x) - c.fixed_point_x) < 1e-9
    assert abs(c.floquet) < 1
    assert np.linalg.norm(c.points[0] - c.points[-1]) < 1e-8
    assert abs(P(c.fixed_point_x + 0.05) - c.fixed_point_x) < 0.05
    assert _winding(c.points, equilibrium(System.HESTER, hp, 0.1)) != 0
    assert c.period > 0 and c.period_original > 0


def test_hester_return_map_contracts(hester_cycle, hp):
    xs = hester_cycle.fixed_point_x + np.array([-0.2, -0.05, 0.1, 0.2])
    ys = [return_map(System.HESTER, hp, 0.1, SectionSpec(), x) for x in xs]
    for i in range(len(xs)):
        for j in range(i):
            assert abs(ys[i] - ys[j]) < abs(xs[i] - xs[j])


def test_no_return_without_cycle():
    with pytest.raises(NoReturn):
        return_map(System.HESTER, HesterParams(0.5, 0.4, 0.8, 0.3), 0.05, SectionSpec(), 0.5)


def test_auto_section_small_cycle():
    # near the boundary the cycle stays inside |y| < 0.1, so the default section is never hit
    p = HesterParams(0.5, 0.4, 0.6, 0.3)
    with pytest.raises(NoReturn):
        find_cycle(System.HESTER, p, 0.05, SectionSpec())
    sec = auto_section(System.HESTER, p, 0.05)
    assert 0 < sec.delta < 0.1
    cyc = find_cycle(System.HESTER, p, 0.05, sec)
    assert min(cyc.points[:, 1]) < -sec.delta


def test_corbeiller_sharp_corner(corb_cycle):
    pts = corb_cycle.points
    d = np.diff(pts, axis=0)
    ds = np.hypot(d[:, 0], d[:, 1])
    keep = ds > 0
    d, ds = d[keep], ds[keep]
    ang = np.unwrap(np.arctan2(d[:, 1], d[:, 0]))
    # discrete curvature: turning angle over the local arclength
    kappa = np.abs(np.diff(ang)) / (0.5 * (ds[1:] + ds[:-1]))
    i = int(np.argmax(kappa))
    corner = pts[1:][keep][i]
    # the corner is where the fast orbit lands on the slow manifold; the origin is a smooth tangency
    from exosc.singular import drop_point_corbeiller
    assert math.hypot(corner[0] - drop_point_corbeiller(corb_cycle.params), corner[1]) < 0.1
    assert abs(corb_cycle.floquet) < 1


def test_limit_cycle_json_round_trip(corb_cycle):
    d = json.loads(json.dumps(corb_cycle.to_json()))
    assert set(d) >= {"system", "params", "eps", "fixed_point_x", "period_t1", "period_t", "floquet",
                      "floquet_noise_floor_flag", "points"}
    back = LimitCycle.from_json(d)
    assert back.fixed_point_x == corb_cycle.fixed_point_x and back.period == corb_cycle.period
    assert np.array_equal(back.points, corb_cycle.points) and back.params == corb_cycle.params


def test_classify_indeterminate_on_boundary():
    p = HesterParams(1.0, 1.0, 0.5, 0.3)
    assert classify_existence(System.HESTER, p, 0.05, n_seeds=2) is Existence.INDETERMINATE


def test_classify_equilibrium_with_longer_budget():
    # the slowest of the default 20 seeds needs t1 ~ 830 to come within 1e-4 of the equilibrium
    p = HesterParams(0.5, 0.4, 0.8, 0.3)
    assert classify_existence(System.HESTER, p, 0.05, t_budget=1000.0) is Existence.CONVERGES_TO_EQUILIBRIUM


def test_classify_cycle_few_seeds(cp):
    assert classify_existence(System.CORBEILLER, cp, 0.05, n_seeds=4, seed=7) is Existence.CYCLE_FOUND


@pytest.mark.parametrize("system", [System.HESTER, System.CORBEILLER])
def test_log_multiplier_scaling(system, hp, cp):
    # the divergence integral resolves multipliers far below the finite-difference floor
    p = hp if system is System.HESTER else cp
    epss = [0.1, 0.05, 0.025]
    lm = [log_multiplier(system, p, e) for e in epss]
    assert all(v < math.log(1e-12) for v in lm)
    assert lm[0] > lm[1] > lm[2]
    assert np.polyfit([1 / e for e in epss], lm, 1)[0] < 0


def test_log_multiplier_matches_resolved_difference(hp):
    # at kappa=0.5, eps=0.1 the multiplier is large enough for the finite difference to resolve
    p = HesterParams(0.5, 0.4, 0.5, 0.3)
    c = find_cycle(System.HESTER, p, 0.1)
    assert not c.floor_flag
    assert log_multiplier(System.HESTER, p, 0.1, x_star=c.fixed_point_x) == pytest.approx(
        math.log(abs(c.floquet)), abs=1e-3)


def test_convergence_report_csv_and_slope():
    rep = ConvergenceReport(System.CORBEILLER, [0.1, 0.05], [0.4, 0.2], [8.0, 8.1], [1.0, 2.0],
                            [-30.0, -50.0], [False, False])
    buf = io.StringIO()
    rep.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "eps,hausdorff,period,log_floquet,floor_flag"
    assert lines[1] == "0.10000000000000001,0.40000000000000002,8,-30,0"
    assert rep.contraction_slope() == pytest.approx(-2.0)
    rep.floor_flags[1] = True
    assert math.isnan(rep.contraction_slope())
