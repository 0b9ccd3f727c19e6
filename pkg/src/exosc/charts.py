"""Blow-up charts of the Le Corbeiller system.

Every chart carries its coordinate names, the desingularized vector field
and the blow-up map to its parent chart; composing parent maps gives the
blow-down to the original variables ``(x, y, eps)``.  Transition maps
between overlapping charts, the catalog of equilibria with their spectra,
the blown-up singular cycle and the closed-form transition through the
exponential regime live here as well.

Chart fields are desingularized: each equals the pulled-back original
field divided by a positive factor, so pushforwards along transition and
parent maps are positive multiples of the target field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DomainError, InvalidChartPoint, OutsideOverlap, ValidationError
from .models import CorbeillerParams
from .ode import Direction, EventSpec, IntegratorConfig, integrate
from .singular import drop_point_corbeiller
from .slowmf import lambert_w

__all__ = [
    "ChartId", "ChartPoint", "EquilibriumRecord", "CHARTS", "TRANSITIONS", "INVERSE_PAIRS",
    "eval_chart_field", "chart_transition", "blow_down", "to_parent",
    "equilibria_catalog", "full_catalog", "numeric_jacobian", "numeric_eigenvalues",
    "eigen_mismatch", "resonance_holds", "blown_up_singular_segments",
    "pi14_transition", "pi14_numeric", "center_manifold_slope", "verify_charts", "pushforward",
]


class ChartId(str, Enum):
    K1 = "K1"
    K2 = "K2"
    K3 = "K3"
    ExtK3 = "ExtK3"
    FrakK1 = "FrakK1"
    CalK1 = "CalK1"
    CalK2 = "CalK2"
    TildeK1 = "TildeK1"
    TildeK2 = "TildeK2"
    HatK31 = "HatK31"
    HatK32 = "HatK32"
    K11 = "K11"
    K12 = "K12"
    K21 = "K21"
    K22 = "K22"
    K31 = "K31"
    K32 = "K32"


ORIGINAL = "original"


def em(u):
    """e^{-1/u}, extended by 0 for u <= 0 (the flat smooth extension)."""
    if u <= 0.0:
        return 0.0
    return math.exp(-1.0 / u)


def _sig(u):
    # 1/(1+e^u) without overflow
    return math.exp(-(max(u, 0.0) + math.log1p(math.exp(-abs(u)))))


def _exp(u):
    try:
        return math.exp(u)
    except OverflowError:
        return math.inf


# ---------------------------------------------------------------- fields

def _f_original(p, c):
    # original system on the fast time scale, eps as a trivial variable
    x, y, e = c
    if e <= 0:
        raise InvalidChartPoint("original coordinates need eps > 0")
    s = _sig(y / e)
    return (e * (y + p.a) * s, e * ((-x + 2 * p.b * y) * s - p.b * y * (1 - s)), 0.0)


def _f_k1(p, c):
    x, r1, e1 = c
    F = x + p.b * r1 * (2 - em(e1))
    return (r1 * (p.a - r1), r1 * F, -e1 * F)


def _f_k2(p, c):
    x, y2, r2 = c
    s = _sig(y2)
    # (2 - e^{y2})/(1 + e^{y2}) = 3 s - 1
    return (r2 * (r2 * y2 + p.a) * s, -x * s + r2 * p.b * y2 * (3 * s - 1), 0.0)


def _f_k3(p, c):
    x, r3, e3 = c
    E = em(e3)
    G = p.b * r3 + E * (x - 2 * p.b * r3)
    return (r3 * E * (p.a + r3), -r3 * G, e3 * G)


def _f_extk3(p, c):
    x, r, e, q = c
    G = p.b * r + q * (x - 2 * p.b * r)
    return (r * e * q * (p.a + r), -r * e * G, e * e * G, q * G)


def _f_frakk1(p, c):
    x, r1, e, rho = c
    F = x + p.b * r1 * (1 - 2 * rho)
    return (rho * r1 * e * (p.a + rho * r1), -r1 * (1 + e) * F, e * e * F, rho * F)


def _f_calk1(p, c):
    r1, e, rho, nu = c
    A = 1 - p.b * r1 * (1 - 2 * nu * rho)
    B = rho * r1 * e * (p.a + rho * r1 * nu * nu)
    return (r1 * ((1 + e) * A + B), -e * e * A, -rho * (A - B), -nu * B)


def _f_calk2(p, c):
    # reduced to the invariant set nu2 = e^{-1/eps}
    x2, r2, e = c
    nu = em(e)
    F = x2 + p.b * r2 * (1 - 2 * nu)
    return (-x2 * F + r2 * e * (p.a + r2 * nu * nu), -r2 * (2 + e) * F, e * e * F)


def _f_tildek1(p, c):
    x1, e1, s1 = c
    E = em(s1 * e1)
    f = x1 + p.b * (1 - 2 * E)
    return (e1 * (p.a + s1 * E * E) + x1 * (1 + s1 * e1) * f,
            2 * e1 * (1 + s1 * e1) * f,
            -s1 * (2 + s1 * e1) * f)


def _f_tildek2(p, c):
    x2, r2, s2 = c
    E = em(s2)
    D = x2 + p.b * r2 * (1 - 2 * E)
    return (r2 * (p.a + s2 * r2 * E * E) - x2 * (1 + s2) * D,
            -2 * r2 * (1 + s2) * D,
            s2 * s2 * D)


def _f_hatk31(p, c):
    r, sg, s = c
    E = em(sg)
    P = p.a + sg * r * s * s * E * E
    g = 1 + p.b * r * s * (1 - 2 * E)
    return (-2 * r * r * P, sg * sg * g, -s * (-r * P + (1 + sg) * g))


def _f_k11(p, c):
    r, e1, s = c
    g = 1 + p.b * s * r * (2 - em(e1))
    return (r * (g - 2 * r * (p.a - r * s * s)), -e1 * g, s * r * (p.a - r * s * s))


def _f_k12(p, c):
    x2, e1, s = c
    G = x2 + p.b * s * (2 - em(e1))
    return (p.a - s * s - 0.5 * x2 * G, -e1 * G, 0.5 * s * G)


def _f_k21(p, c):
    y2, r, s = c
    P = p.a + s * s * r * y2
    return (-1 + p.b * s * r * y2 * (2 - _exp(y2)), -2 * r * r * P, s * r * P)


def _f_k22(p, c):
    x2, y2, s = c
    return (p.a + s * s * y2, -x2 + p.b * s * y2 * (2 - _exp(y2)), 0.0)


def _f_k31(p, c):
    r, e3, s = c
    E = em(e3)
    return (-r * (p.b * r * s + E * (1 - 2 * p.b * r * s + 2 * r * (p.a + s * s * r))),
            e3 * (p.b * r * s + E * (1 - 2 * p.b * r * s)),
            s * r * E * (p.a + s * s * r))


# ----------------------------------------------------------- parent maps

def _up_k1(p, c):
    x, r1, e1 = c
    return (x, -r1, r1 * e1)


def _up_k2(p, c):
    x, y2, r2 = c
    return (x, r2 * y2, r2)


def _up_k3(p, c):
    x, r3, e3 = c
    return (x, r3, r3 * e3)


def _up_extk3(p, c):
    x, r, e, q = c
    return (x, r, e)


def _up_frakk1(p, c):
    x, r1, e, rho = c
    return (x, rho * r1, e, rho)


def _up_calk1(p, c):
    r1, e, rho, nu = c
    return (-nu, nu * r1, e, nu * rho)


def _up_calk2(p, c):
    x2, r2, e = c
    nu = em(e)
    return (nu * x2, nu * r2, e, nu)


def _up_tildek1(p, c):
    x1, e1, s1 = c
    return (s1 * x1, s1, s1 * e1)


def _up_tildek2(p, c):
    x2, r2, s2 = c
    return (s2 * x2, s2 * r2, s2)


def _up_hatk31(p, c):
    r, sg, s = c
    return (s, s * s * r, sg)


def _up_hatk32(p, c):
    xh, sg, s = c
    return (s * xh, s * s, sg)


def _up_k11(p, c):
    r, e1, s = c
    return (s, s * s * r, e1)


def _up_k12(p, c):
    x2, e1, s = c
    return (s * x2, s * s, e1)


def _up_k21(p, c):
    y2, r, s = c
    return (s, y2, s * s * r)


def _up_k22(p, c):
    x2, y2, s = c
    return (s * x2, y2, s * s)


def _up_k31(p, c):
    r, e3, s = c
    return (s, s * s * r, e3)


def _up_k32(p, c):
    x2, e3, s = c
    return (s * x2, s * s, e3)


@dataclass(frozen=True)
class ChartSpec:
    chart: ChartId
    coords: tuple
    nonneg: tuple
    field: Callable | None
    parent: object
    up: Callable


_C = ChartId
CHARTS = {
    _C.K1: ChartSpec(_C.K1, ("x", "r1", "eps1"), (1, 2), _f_k1, ORIGINAL, _up_k1),
    _C.K2: ChartSpec(_C.K2, ("x", "y2", "r2"), (2,), _f_k2, ORIGINAL, _up_k2),
    _C.K3: ChartSpec(_C.K3, ("x", "r3", "eps3"), (1, 2), _f_k3, ORIGINAL, _up_k3),
    _C.ExtK3: ChartSpec(_C.ExtK3, ("x", "r", "eps", "q"), (1, 2, 3), _f_extk3, _C.K3, _up_extk3),
    _C.FrakK1: ChartSpec(_C.FrakK1, ("x", "r1", "eps", "rho1"), (1, 2, 3), _f_frakk1, _C.ExtK3, _up_frakk1),
    _C.CalK1: ChartSpec(_C.CalK1, ("r1", "eps", "rho1", "nu1"), (0, 1, 2, 3), _f_calk1, _C.FrakK1, _up_calk1),
    _C.CalK2: ChartSpec(_C.CalK2, ("x2", "r2", "eps"), (1, 2), _f_calk2, _C.FrakK1, _up_calk2),
    _C.TildeK1: ChartSpec(_C.TildeK1, ("x1", "eps1", "sigma1"), (1, 2), _f_tildek1, _C.CalK2, _up_tildek1),
    _C.TildeK2: ChartSpec(_C.TildeK2, ("x2", "r2", "sigma2"), (1, 2), _f_tildek2, _C.CalK2, _up_tildek2),
    _C.HatK31: ChartSpec(_C.HatK31, ("rh1", "sigma", "sh1"), (0, 1, 2), _f_hatk31, _C.TildeK2, _up_hatk31),
    _C.HatK32: ChartSpec(_C.HatK32, ("xh2", "sigma", "sh2"), (1, 2), None, _C.TildeK2, _up_hatk32),
    _C.K11: ChartSpec(_C.K11, ("r11", "eps1", "s1"), (0, 1, 2), _f_k11, _C.K1, _up_k11),
    _C.K12: ChartSpec(_C.K12, ("x2", "eps1", "s2"), (1, 2), _f_k12, _C.K1, _up_k12),
    _C.K21: ChartSpec(_C.K21, ("y2", "r21", "s1"), (1, 2), _f_k21, _C.K2, _up_k21),
    _C.K22: ChartSpec(_C.K22, ("x2", "y2", "s2"), (2,), _f_k22, _C.K2, _up_k22),
    _C.K31: ChartSpec(_C.K31, ("r31", "eps3", "s1"), (0, 1, 2), _f_k31, _C.K3, _up_k31),
    _C.K32: ChartSpec(_C.K32, ("x2", "eps3", "s2"), (1, 2), None, _C.K3, _up_k32),
}


@dataclass(frozen=True)
class ChartPoint:
    chart: ChartId
    coords: tuple
    params: CorbeillerParams

    def __post_init__(self):
        object.__setattr__(self, "chart", ChartId(self.chart))
        object.__setattr__(self, "coords", tuple(float(v) for v in self.coords))
        _validate(self.chart, self.coords)


def _validate(chart, coords):
    spec = CHARTS[ChartId(chart)]
    if len(coords) != len(spec.coords):
        raise InvalidChartPoint(f"{chart.value} takes {len(spec.coords)} coordinates {spec.coords}")
    if not all(math.isfinite(v) for v in coords):
        raise InvalidChartPoint("coordinates must be finite")
    for i in spec.nonneg:
        if coords[i] < 0:
            raise InvalidChartPoint(f"{chart.value}: {spec.coords[i]} must be >= 0")


def chart_field(chart) -> Callable:
    """Raw field (p, coords) -> tuple, defined also off the validity domain."""
    spec = CHARTS[ChartId(chart)]
    if spec.field is None:
        raise InvalidChartPoint(f"no vector field is provided in chart {spec.chart.value}")
    return spec.field


def eval_chart_field(pt: ChartPoint) -> tuple:
    return tuple(chart_field(pt.chart)(pt.params, pt.coords))


def to_parent(pt: ChartPoint):
    """Image under the chart's own blow-up map: (parent chart, coords)."""
    spec = CHARTS[pt.chart]
    return spec.parent, spec.up(pt.params, pt.coords)


def _blow_down_raw(p, chart, c):
    while chart != ORIGINAL:
        spec = CHARTS[chart]
        c = spec.up(p, c)
        chart = spec.parent
    return tuple(c)


def blow_down(pt: ChartPoint) -> tuple:
    """(x, y, eps) in the original variables."""
    return _blow_down_raw(pt.params, pt.chart, pt.coords)


# ----------------------------------------------------------- transitions

def _need(cond, msg):
    if not cond:
        raise OutsideOverlap(msg)


def _t_k2_k1(p, c):
    x, y2, r2 = c
    _need(y2 < 0, "needs y2 < 0")
    return (x, -r2 * y2, -1.0 / y2)


def _t_k1_k2(p, c):
    x, r1, e1 = c
    _need(e1 > 0, "needs eps1 > 0")
    return (x, -1.0 / e1, r1 * e1)


def _t_k3_k2(p, c):
    x, r3, e3 = c
    _need(e3 > 0, "needs eps3 > 0")
    return (x, 1.0 / e3, r3 * e3)


def _t_k2_k3(p, c):
    x, y2, r2 = c
    _need(y2 > 0, "needs y2 > 0")
    return (x, r2 * y2, 1.0 / y2)


def _t_calk2_calk1(p, c):
    x2, r2, e = c
    _need(x2 < 0, "needs x2 < 0")
    return (-r2 / x2, e, -1.0 / x2, -em(e) * x2)


def _t_calk1_calk2(p, c):
    r1, e, rho, nu = c
    _need(rho > 0, "needs rho1 > 0")
    q = em(e)
    _need(abs(nu * rho - q) <= 1e-12 * q,
          "the reduced chart only covers the invariant set nu1 rho1 = e^{-1/eps}")
    return (-1.0 / rho, r1 / rho, e)


def _t_tk2_tk1(p, c):
    x2, r2, s2 = c
    _need(r2 > 0, "needs r2 > 0")
    return (x2 / r2, 1.0 / r2, s2 * r2)


def _t_tk1_tk2(p, c):
    x1, e1, s1 = c
    _need(e1 > 0, "needs eps1 > 0")
    return (x1 / e1, 1.0 / e1, s1 * e1)


def _t_hk32_hk31(p, c):
    xh, sg, s2 = c
    _need(xh > 0, "needs xh2 > 0")
    return (xh ** -2, sg, s2 * xh)


def _t_hk31_hk32(p, c):
    r, sg, s1 = c
    _need(r > 0, "needs rh1 > 0")
    sr = math.sqrt(r)
    return (1.0 / sr, sg, s1 * sr)


def _t_k12_k11(p, c):
    x2, e1, s2 = c
    _need(x2 > 0, "needs x2 > 0")
    return (x2 ** -2, e1, s2 * x2)


def _t_k11_k12(p, c):
    r, e1, s1 = c
    _need(r > 0, "needs r11 > 0")
    sr = math.sqrt(r)
    return (1.0 / sr, e1, s1 * sr)


def _t_k21_k11(p, c):
    y2, r21, s1 = c
    _need(y2 < 0, "needs y2 < 0")
    return (-r21 * y2, -1.0 / y2, s1)


def _t_k11_k21(p, c):
    r, e1, s1 = c
    _need(e1 > 0, "needs eps1 > 0")
    return (-1.0 / e1, r * e1, s1)


def _t_k22_k11(p, c):
    x2, y2, s2 = c
    _need(x2 > 0 and y2 < 0, "needs x2 > 0, y2 < 0")
    return (-y2 / (x2 * x2), -1.0 / y2, s2 * x2)


def _t_k11_k22(p, c):
    r, e1, s1 = c
    _need(e1 > 0 and r > 0, "needs eps1 > 0, r11 > 0")
    w = math.sqrt(e1 * r)
    return (1.0 / w, -1.0 / e1, s1 * w)


def _t_k21_k12(p, c):
    y2, r21, s1 = c
    _need(y2 < 0 and r21 > 0, "needs y2 < 0, r21 > 0")
    w = math.sqrt(-r21 * y2)
    return (1.0 / w, -1.0 / y2, s1 * w)


def _t_k12_k21(p, c):
    x2, e1, s2 = c
    _need(x2 > 0 and e1 > 0, "needs x2 > 0, eps1 > 0")
    return (-1.0 / e1, e1 / (x2 * x2), s2 * x2)


def _t_k22_k21(p, c):
    x2, y2, s2 = c
    _need(x2 > 0, "needs x2 > 0")
    return (y2, x2 ** -2, s2 * x2)


def _t_k21_k22(p, c):
    y2, r21, s1 = c
    _need(r21 > 0, "needs r21 > 0")
    sr = math.sqrt(r21)
    return (1.0 / sr, y2, s1 * sr)


def _t_k31_k21(p, c):
    r31, e3, s1 = c
    _need(e3 > 0, "needs eps3 > 0")
    return (1.0 / e3, r31 * e3, s1)


def _t_k21_k31(p, c):
    y2, r21, s1 = c
    _need(y2 > 0, "needs y2 > 0")
    return (r21 * y2, 1.0 / y2, s1)


def _t_k32_k21(p, c):
    x2, e3, s2 = c
    _need(x2 > 0 and e3 > 0, "needs x2 > 0, eps3 > 0")
    return (1.0 / e3, e3 / (x2 * x2), s2 * x2)


def _t_k21_k32(p, c):
    y2, r21, s1 = c
    _need(y2 > 0 and r21 > 0, "needs y2 > 0, r21 > 0")
    w = math.sqrt(r21 * y2)
    return (1.0 / w, 1.0 / y2, s1 * w)


def _t_k31_k22(p, c):
    r31, e3, s1 = c
    _need(r31 > 0 and e3 > 0, "needs r31 > 0, eps3 > 0")
    w = math.sqrt(r31 * e3)
    return (1.0 / w, 1.0 / e3, s1 * w)


def _t_k22_k31(p, c):
    x2, y2, s2 = c
    _need(x2 > 0 and y2 > 0, "needs x2 > 0, y2 > 0")
    return (y2 / (x2 * x2), 1.0 / y2, s2 * x2)


def _t_k32_k31(p, c):
    x2, e3, s2 = c
    _need(x2 > 0, "needs x2 > 0")
    return (x2 ** -2, e3, s2 * x2)


def _t_k31_k32(p, c):
    r31, e3, s1 = c
    _need(r31 > 0, "needs r31 > 0")
    sr = math.sqrt(r31)
    return (1.0 / sr, e3, s1 * sr)


def _t_hk31_k31(p, c):
    r, sg, s = c
    _need(sg > 0, "needs sigma > 0")
    return (r / sg, sg, sg * em(sg) * s)


def _t_k31_hk31(p, c):
    r31, e3, s1 = c
    _need(0 < e3 and 1.0 / e3 < 700, "needs eps3 > 1/700")
    return (r31 * e3, e3, s1 * math.exp(1.0 / e3) / e3)


def _t_hk32_k32(p, c):
    xh, sg, s = c
    _need(sg > 0, "needs sigma > 0")
    rs = math.sqrt(sg)
    return (rs * xh, sg, rs * em(sg) * s)


def _t_k32_hk32(p, c):
    x2, e3, s2 = c
    _need(0 < e3 and 1.0 / e3 < 700, "needs eps3 > 1/700")
    rs = math.sqrt(e3)
    return (x2 / rs, e3, s2 * math.exp(1.0 / e3) / rs)


TRANSITIONS = {
    (_C.K2, _C.K1): ("kappa12", _t_k2_k1),
    (_C.K1, _C.K2): ("kappa21", _t_k1_k2),
    (_C.K3, _C.K2): ("kappa23", _t_k3_k2),
    (_C.K2, _C.K3): ("kappa32", _t_k2_k3),
    (_C.CalK2, _C.CalK1): ("kappa'12", _t_calk2_calk1),
    (_C.CalK1, _C.CalK2): ("kappa'21", _t_calk1_calk2),
    (_C.TildeK2, _C.TildeK1): ("tilde kappa12", _t_tk2_tk1),
    (_C.TildeK1, _C.TildeK2): ("tilde kappa21", _t_tk1_tk2),
    (_C.HatK32, _C.HatK31): ("hat kappa3132", _t_hk32_hk31),
    (_C.HatK31, _C.HatK32): ("hat kappa3231", _t_hk31_hk32),
    (_C.K12, _C.K11): ("kappa1112", _t_k12_k11),
    (_C.K11, _C.K12): ("kappa1211", _t_k11_k12),
    (_C.K21, _C.K11): ("kappa1121", _t_k21_k11),
    (_C.K11, _C.K21): ("kappa2111", _t_k11_k21),
    (_C.K22, _C.K11): ("kappa1122", _t_k22_k11),
    (_C.K11, _C.K22): ("kappa2211", _t_k11_k22),
    (_C.K21, _C.K12): ("kappa1221", _t_k21_k12),
    (_C.K12, _C.K21): ("kappa2112", _t_k12_k21),
    (_C.K22, _C.K21): ("kappa2122", _t_k22_k21),
    (_C.K21, _C.K22): ("kappa2221", _t_k21_k22),
    (_C.K31, _C.K21): ("kappa2131", _t_k31_k21),
    (_C.K21, _C.K31): ("kappa3121", _t_k21_k31),
    (_C.K32, _C.K21): ("kappa2132", _t_k32_k21),
    (_C.K21, _C.K32): ("kappa3221", _t_k21_k32),
    (_C.K31, _C.K22): ("kappa2231", _t_k31_k22),
    (_C.K22, _C.K31): ("kappa3122", _t_k22_k31),
    (_C.K32, _C.K31): ("kappa3132", _t_k32_k31),
    (_C.K31, _C.K32): ("kappa3231", _t_k31_k32),
    (_C.HatK31, _C.K31): ("exp_to_alg1", _t_hk31_k31),
    (_C.K31, _C.HatK31): ("alg_to_exp1", _t_k31_hk31),
    (_C.HatK32, _C.K32): ("exp_to_alg2", _t_hk32_k32),
    (_C.K32, _C.HatK32): ("alg_to_exp2", _t_k32_hk32),
}

INVERSE_PAIRS = sorted({tuple(sorted((a.value, b.value))) for a, b in TRANSITIONS})


def chart_transition(src, dst, pt: ChartPoint) -> ChartPoint:
    src, dst = ChartId(src), ChartId(dst)
    if pt.chart is not src:
        raise ValidationError(f"point lives in {pt.chart.value}, not {src.value}")
    if (src, dst) not in TRANSITIONS:
        raise OutsideOverlap(f"no transition map {src.value} -> {dst.value}")
    _, fn = TRANSITIONS[(src, dst)]
    return ChartPoint(dst, fn(pt.params, pt.coords), pt.params)


# ------------------------------------------------------------- spectra

def numeric_jacobian(fn: Callable, c, h: float = 1e-4) -> np.ndarray:
    """Fourth-order central differences of fn at c."""
    c = np.asarray(c, dtype=float)
    n = len(c)
    f0 = np.asarray(fn(tuple(c)), dtype=float)
    J = np.empty((len(f0), n))
    for j in range(n):
        hj = h * max(1.0, abs(c[j]))
        cols = []
        for k in (2, 1, -1, -2):
            cc = c.copy()
            cc[j] += k * hj
            cols.append(np.asarray(fn(tuple(cc)), dtype=float))
        J[:, j] = (-cols[0] + 8 * cols[1] - 8 * cols[2] + cols[3]) / (12 * hj)
    return J


def _sort_eigs(ev):
    return sorted((complex(v) for v in ev), key=lambda z: (round(z.real, 6), z.imag))


def numeric_eigenvalues(chart, params, point) -> list:
    fn = chart_field(chart)
    return _sort_eigs(np.linalg.eigvals(numeric_jacobian(lambda c: fn(params, c), point)))


def eigen_mismatch(a, b) -> float:
    """Max abs difference after sorting by real, then imaginary part."""
    a, b = _sort_eigs(a), _sort_eigs(b)
    if len(a) != len(b):
        return math.inf
    return max(abs(u - v) for u, v in zip(a, b))


def resonance_holds(eigs, tol: float = 1e-6) -> bool:
    """Whether some ordering of three eigenvalues has l1 = l2 + l3."""
    e = list(eigs)
    for i in range(3):
        rest = [e[j] for j in range(3) if j != i]
        if abs(e[i] - rest[0] - rest[1]) <= tol:
            return True
    return False


@dataclass
class EquilibriumRecord:
    chart: ChartId
    point: tuple
    eigenvalues: list           # closed form, from the chart field
    classification: str
    lemma_eigenvalues: list | None = None   # as stated by the lemma, when it gives numbers
    note: str = ""

    def to_json(self, params) -> dict:
        num = numeric_eigenvalues(self.chart, params, self.point)
        d = {
            "chart": self.chart.value,
            "point": list(self.point),
            "classification": self.classification,
            "analytic_eigs": [[z.real, z.imag] for z in _sort_eigs(self.eigenvalues)],
            "numeric_eigs": [[z.real, z.imag] for z in num],
            "max_mismatch": eigen_mismatch(num, self.eigenvalues),
        }
        if self.lemma_eigenvalues is not None:
            d["lemma_eigs"] = [[z.real, z.imag] for z in _sort_eigs(self.lemma_eigenvalues)]
            d["lemma_mismatch"] = eigen_mismatch(num, self.lemma_eigenvalues)
        if self.note:
            d["note"] = self.note
        return d


def equilibria_catalog(chart, params: CorbeillerParams) -> list:
    chart = ChartId(chart)
    a, b = params.a, params.b
    R = EquilibriumRecord
    w = math.sqrt(1 - b * b)
    out = []
    if chart is _C.K1:
        for x in (-1.5, 0.7, 2.0):
            out.append(R(chart, (x, 0.0, 0.0), [0, x, -x], "saddle on l_s", [0, x, -x]))
        out.append(R(chart, (0.0, 0.0, 0.0), [0, 0, 0], "fully non-hyperbolic (q1)", [0, 0, 0]))
        for e1 in (0.3, 1.0):
            out.append(R(chart, (0.0, 0.0, e1), [0, 0, 0], "fully non-hyperbolic (L1)", [0, 0, 0]))
        out.append(R(chart, (-2 * a * b, a, 0.0), [0, a * complex(b, w), a * complex(b, -w)],
                     "unstable focus within eps1 = 0 (p1)"))
    elif chart is _C.K3:
        for x in (-1.0, 0.5):
            out.append(R(chart, (x, 0.0, 0.0), [0, 0, 0], "fully non-hyperbolic (l_e3)", [0, 0, 0]))
        for e3 in (0.3, 1.0):
            out.append(R(chart, (0.0, 0.0, e3), [0, 0, 0], "fully non-hyperbolic (L3)", [0, 0, 0]))
    elif chart is _C.FrakK1:
        for x, rho in ((-1.0, 0.0), (-0.5, 0.2)):
            lam = x / (1 - 2 * rho)
            out.append(R(chart, (x, -x / (b * (1 - 2 * rho)), 0.0, rho), [0, 0, 0, lam],
                         "normally hyperbolic attracting (C1)", [0, 0, 0, x / (b * (1 - 2 * rho))],
                         "lemma value x/(b(1-2 rho1)) equals -r1; the field gives -b r1 = x/(1-2 rho1)"))
        x, e = -1.0, 0.3
        out.append(R(chart, (x, -x / b, e, 0.0), [0, 0, 0, x * (1 + e)],
                     "normally hyperbolic attracting (S1)", [0, 0, 0, x / b],
                     "lemma value x/b; the field gives -b r1 (1+eps) = x (1+eps)"))
        for x in (-2.0, 1.0):
            out.append(R(chart, (x, 0.0, 0.0, 0.0), [0, -x, 0, x], "partially hyperbolic saddle (l_e1)",
                         [0, -x, 0, x]))
        out.append(R(chart, (0.0, 0.0, 0.3, 0.1), [0, 0, 0, 0], "fully non-hyperbolic (P1)", [0, 0, 0, 0]))
    elif chart is _C.CalK1:
        out.append(R(chart, (1 / b, 0.0, 0.0, 0.0), [-1, 0, 0, 0], "partially hyperbolic (P_L)", [-1, 0, 0, 0]))
        for nu in (0.5, 2.0):
            out.append(R(chart, (0.0, 0.0, 0.0, nu), [1, 0, -1, 0], "partially hyperbolic saddle (l'_e1)",
                         [1, 0, -1, 0]))
    elif chart is _C.CalK2:
        for x2 in (-1.0, -0.3):
            out.append(R(chart, (x2, -x2 / b, 0.0), [x2, 0, 0], "normally hyperbolic attracting (N2')",
                         [x2, 0, 0]))
        out.append(R(chart, (0.0, 0.0, 0.0), [0, 0, 0], "non-hyperbolic (P_O)"))
    elif chart is _C.TildeK1:
        out.append(R(chart, (-b, 0.0, 0.0), [-b, 0, 0], "partially hyperbolic (p_l)", [-b, 0, 0]))
        out.append(R(chart, (0.0, 0.0, 0.0), [b, 2 * b, -2 * b], "hyperbolic saddle (p_r)", [b, 2 * b, -2 * b]))
    elif chart is _C.TildeK2:
        out.append(R(chart, (0.0, 0.0, 0.0), [0, 0, 0], "non-hyperbolic (p_o)"))
    elif chart is _C.HatK31:
        out.append(R(chart, (0.0, 0.0, 0.0), [-1, 0, 0], "partially hyperbolic (p_s)", [-1, 0, 0]))
    elif chart is _C.K12:
        s2a, sa2 = math.sqrt(2 * a), math.sqrt(a / 2)
        note = ("lemma lists sqrt(a/2) for the eps1 direction; the field gives eps1' = -eps1 G, "
                "i.e. -x2 = +-sqrt(2a), and the resonance l1 = l2 + l3 does not hold")
        out.append(R(chart, (-s2a, 0.0, 0.0), [s2a, s2a, -sa2], "hyperbolic saddle (q_i)", [sa2, s2a, -sa2], note))
        out.append(R(chart, (s2a, 0.0, 0.0), [-s2a, -s2a, sa2], "hyperbolic saddle (q_o)", [-sa2, -s2a, sa2], note))
        ra = math.sqrt(a)
        out.append(R(chart, (-2 * b * ra, 0.0, ra), [0, ra * complex(b, w), ra * complex(b, -w)],
                     "unstable focus within eps1 = 0 (p12)"))
    elif chart is _C.K11:
        out.append(R(chart, (0.0, 0.0, 0.0), [1, -1, 0], "partially hyperbolic (q_s)", [1, -1, 0]))
        out.append(R(chart, (1 / (2 * a), 0.0, 0.0), [-1, -1, 0.5], "hyperbolic saddle (q_o2 = q_o)"))
    return out


def full_catalog(params) -> list:
    out = []
    for c in ChartId:
        out.extend(equilibria_catalog(c, params))
    return out


# ------------------------------------------------- blown-up singular cycle

def center_manifold_slope(params) -> float:
    """dx1/deps1 of the center manifold at p_l in TildeK1 (within sigma1 = 0)."""
    return params.a / params.b


def _planar(fn, p, fixed_last=0.0):
    return lambda s: fn(p, (s[0], s[1], fixed_last))[:2]


def blown_up_singular_segments(params: CorbeillerParams, n: int = 201, eps1_start: float = 1e-4,
                               exit_radius: float = 1e-3) -> list:
    """Segments Gamma2 ... Gamma8 as (label, chart, ndarray of chart coordinates)."""
    p = params
    a, b = p.a, p.b
    xd = drop_point_corbeiller(p)
    segs = []
    y2 = np.linspace(-10.0, 10.0, n)
    segs.append(("Gamma2", _C.K2, np.column_stack([np.full(n, xd), y2, np.zeros(n)])))
    r1 = np.linspace(0.0, -xd / b, n)
    segs.append(("Gamma3", _C.FrakK1, np.column_stack([np.full(n, xd), r1, np.zeros(n), np.zeros(n)])))
    x1 = np.linspace(xd, 0.0, n)
    segs.append(("Gamma4", _C.FrakK1, np.column_stack([x1, -x1 / b, np.zeros(n), np.zeros(n)])))
    rho = np.linspace(0.0, 1.0, n)
    segs.append(("Gamma5", _C.CalK1, np.column_stack([np.full(n, 1 / b), np.zeros(n), rho, np.zeros(n)])))
    x2 = np.linspace(-1.0, 0.0, n)
    segs.append(("Gamma5", _C.CalK2, np.column_stack([x2, -x2 / b, np.zeros(n)])))

    # Gamma6: shoot along the center manifold of p_l, then continue in TildeK2
    cfg = IntegratorConfig(rtol=1e-10, atol=1e-13)
    f1 = _planar(_f_tildek1, p)
    start = (-b + center_manifold_slope(p) * eps1_start, eps1_start)
    ev = EventSpec("eps1=1", lambda s: s[1] - 1.0, Direction.RISING, terminal=True)
    tr = integrate(f1, start, (0.0, 1e7), cfg, [ev])
    if not tr.events:
        raise ValidationError("center manifold orbit did not reach eps1 = 1")
    pts1 = np.array([(-b, 0.0)] + [tuple(s) for s in tr.states])
    segs.append(("Gamma6", _C.TildeK1, np.column_stack([pts1, np.zeros(len(pts1))])))
    x1e, e1e = tr.states[-1]
    f2 = _planar(_f_tildek2, p)
    ev2 = EventSpec("near p_o", lambda s: math.hypot(s[0], s[1]) - exit_radius, Direction.FALLING, terminal=True)
    tr2 = integrate(f2, (x1e / e1e, 1.0 / e1e), (0.0, 1e9), cfg, [ev2])
    pts2 = np.array([tuple(s) for s in tr2.states])
    segs.append(("Gamma6", _C.TildeK2, np.column_stack([pts2, np.zeros(len(pts2))])))

    sg = np.linspace(0.0, 1.0, n)
    segs.append(("Gamma7", _C.HatK31, np.column_stack([np.zeros(n), sg, np.zeros(n)])))
    r11 = np.linspace(0.0, 1 / (2 * a), n)
    segs.append(("Gamma8", _C.K11, np.column_stack([r11, np.zeros(n), np.zeros(n)])))
    return segs


# ------------------------------------------------------ Pi^{1,4} transit

def _check_pi14(delta, r_in):
    if not (0 < delta < 1) or not (r_in > 0) or not math.isfinite(r_in):
        raise DomainError("needs 0 < delta < 1 and r_in > 0")


def pi14_transition(delta: float, r_in: float):
    """Closed-form transit (T, eps_out, rho_out) of r' = r(1+eps), eps' = -eps^2, rho' = -rho
    from (r_in, delta, e^{-1/delta}) to r = R5 = e^{-1/delta}."""
    _check_pi14(delta, r_in)
    w = lambert_w(1.0 / (r_in * delta))
    return -1.0 / delta + w, 1.0 / w, r_in * delta * w


def pi14_numeric(delta: float, r_in: float, rtol: float = 1e-12):
    """The same transit by direct integration; backward in time when r_in > R5."""
    _check_pi14(delta, r_in)
    R5 = math.exp(-1.0 / delta)

    def f(s):
        r, e, rho = s
        return (r * (1 + e), -e * e, -rho)

    # eps(t) = delta/(1 + delta t) blows up at t = -1/delta
    t_end = 1e3 if r_in < R5 else -(1.0 / delta) * (1 - 1e-9)
    ev = EventSpec("r=R5", lambda s: s[0] - R5, Direction.ANY, terminal=True)
    cfg = IntegratorConfig(rtol=rtol, atol=1e-300, event_time_tol=1e-14)
    tr = integrate(f, (r_in, delta, R5), (0.0, t_end), cfg, [ev])
    if not tr.events:
        raise ValidationError("r never reached R5")
    e = tr.events[-1]
    return e.t, e.state[1], e.state[2]


# ------------------------------------------------------ invariant suite

def _u(rng, lo, hi):
    return float(rng.uniform(lo, hi))


def _sample_overlap(src, dst, p, rng):
    """A random point of the open overlap of src and dst, in src coordinates."""
    S, D = src, dst
    u = lambda lo, hi: _u(rng, lo, hi)  # noqa: E731
    if S is _C.K1:
        return (u(-2, 2), u(0.05, 2), u(0.1, 2))
    if S is _C.K2:
        y2 = u(-5, -0.2) if D is _C.K1 else u(0.2, 5)
        return (u(-2, 2), y2, u(0.05, 2))
    if S is _C.K3:
        return (u(-2, 2), u(0.05, 2), u(0.1, 2))
    if S is _C.CalK2:
        return (u(-3, -0.1), u(0.05, 2), u(0.1, 1))
    if S is _C.CalK1:
        e, rho = u(0.1, 1), u(0.1, 3)
        return (u(0.05, 2), e, rho, em(e) / rho)
    if S is _C.TildeK1:
        return (u(-2, 2), u(0.1, 3), u(0.05, 1))
    if S is _C.TildeK2:
        return (u(-2, 2), u(0.1, 3), u(0.05, 1))
    if S is _C.HatK31:
        if D is _C.K31:
            return (u(0.05, 2), u(0.2, 1), u(0.05, 2))
        return (u(0.1, 3), u(0.05, 1), u(0.05, 2))
    if S is _C.HatK32:
        return (u(0.3, 3), u(0.2, 1), u(0.05, 2))
    if S is _C.K11:
        return (u(0.1, 2), u(0.1, 2), u(0.05, 1))
    if S is _C.K12:
        return (u(0.3, 3), u(0.1, 2), u(0.05, 1))
    if S is _C.K21:
        y2 = u(0.2, 5) if D in (_C.K31, _C.K32) else (u(-5, 5) if D is _C.K22 else u(-5, -0.2))
        return (y2, u(0.1, 2), u(0.05, 1))
    if S is _C.K22:
        y2 = u(0.2, 5) if D is _C.K31 else (u(-5, 5) if D is _C.K21 else u(-5, -0.2))
        return (u(0.3, 3), y2, u(0.05, 1))
    if S is _C.K31:
        return (u(0.1, 2), u(0.2, 2), u(0.05, 1))
    if S is _C.K32:
        return (u(0.3, 3), u(0.2, 2), u(0.05, 1))
    raise ValidationError(f"no sampler for {S.value}")


def _sample_chart(chart, p, rng):
    """Interior point with every radius positive, for parent-map checks."""
    c = chart
    u = lambda lo, hi: _u(rng, lo, hi)  # noqa: E731
    if c is _C.ExtK3:
        e = u(0.1, 1)
        return (u(-2, 2), u(0.05, 2), e, em(e))
    if c is _C.FrakK1:
        e = u(0.1, 1)
        return (u(-2, 2), u(0.05, 2), e, u(0.05, 1))
    if c is _C.CalK1:
        e, rho = u(0.1, 1), u(0.1, 3)
        return (u(0.05, 2), e, rho, u(0.05, 2))
    others = {
        _C.K1: _C.K2, _C.K2: _C.K1, _C.K3: _C.K2, _C.CalK2: _C.CalK1, _C.TildeK1: _C.TildeK2,
        _C.TildeK2: _C.TildeK1, _C.HatK31: _C.K31, _C.K11: _C.K12, _C.K12: _C.K11,
        _C.K21: _C.K22, _C.K22: _C.K21, _C.K31: _C.K21,
    }
    return _sample_overlap(c, others[c], p, rng)


def _rel_err(a, b):
    return max(abs(u - v) / max(1.0, abs(u), abs(v)) for u, v in zip(a, b))


def _angle(u, v):
    u, v = np.asarray(u, float), np.asarray(v, float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0 if nu == nv else math.pi
    u, v = u / nu, v / nv
    # well conditioned at tiny angles, unlike arccos of the dot product
    return 2.0 * math.atan2(float(np.linalg.norm(u - v)), float(np.linalg.norm(u + v)))


def pushforward(mapping: Callable, c, vec, h: float = 1e-7):
    """Central finite-difference pushforward of vec under mapping at c."""
    c = np.asarray(c, float)
    v = np.asarray(vec, float)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return np.zeros(len(mapping(tuple(c))))
    step = h * max(1.0, float(np.linalg.norm(c))) / nv
    fp = np.asarray(mapping(tuple(c + step * v)), float)
    fm = np.asarray(mapping(tuple(c - step * v)), float)
    return (fp - fm) / (2 * step)


def _parent_field(p, chart):
    parent = CHARTS[chart].parent
    if parent == ORIGINAL:
        return _f_original
    return CHARTS[parent].field


def _invariant_sets(p):
    """(chart, name, sampler, normal) with normal(coords, field) -> normal component."""
    a = p.a
    out = []

    def coord(i):
        return lambda c, f: f[i]

    def add(chart, name, sampler, normal):
        out.append((chart, name, sampler, normal))

    u = _u
    add(_C.K1, "eps1=0", lambda r: (u(r, -2, 2), u(r, 0, 2), 0.0), coord(2))
    add(_C.K1, "r1=0", lambda r: (u(r, -2, 2), 0.0, u(r, 0, 2)), coord(1))
    add(_C.K3, "r3=0", lambda r: (u(r, -2, 2), 0.0, u(r, 0, 2)), coord(1))
    add(_C.K3, "eps3=0", lambda r: (u(r, -2, 2), u(r, 0, 2), 0.0), coord(2))
    add(_C.ExtK3, "q=e^{-1/eps}", lambda r: (lambda e: (u(r, -2, 2), u(r, 0, 2), e, em(e)))(u(r, 0.05, 1)),
        lambda c, f: f[3] - (em(c[2]) / c[2] ** 2) * f[2])
    add(_C.FrakK1, "rho1=0", lambda r: (u(r, -2, 2), u(r, 0, 2), u(r, 0, 1), 0.0), coord(3))
    add(_C.FrakK1, "eps=0", lambda r: (u(r, -2, 2), u(r, 0, 2), 0.0, u(r, 0, 1)), coord(2))
    add(_C.FrakK1, "r1=0", lambda r: (u(r, -2, 2), 0.0, u(r, 0, 1), u(r, 0, 1)), coord(1))
    add(_C.CalK1, "rho1=0", lambda r: (u(r, 0, 2), u(r, 0, 1), 0.0, u(r, 0, 2)), coord(2))
    add(_C.CalK1, "nu1=0", lambda r: (u(r, 0, 2), u(r, 0, 1), u(r, 0, 2), 0.0), coord(3))
    add(_C.CalK1, "eps=0", lambda r: (u(r, 0, 2), 0.0, u(r, 0, 2), u(r, 0, 2)), coord(1))
    add(_C.CalK1, "r1=0", lambda r: (0.0, u(r, 0, 1), u(r, 0, 2), u(r, 0, 2)), coord(0))

    def q1_sample(r):
        e, rho = u(r, 0.1, 1), u(r, 0.1, 3)
        return (u(r, 0, 2), e, rho, em(e) / rho)
    add(_C.CalK1, "Q1'={nu1 rho1=e^{-1/eps}}", q1_sample,
        lambda c, f: f[3] * c[2] + c[3] * f[2] - em(c[1]) / c[1] ** 2 * f[1])
    add(_C.CalK2, "eps=0", lambda r: (u(r, -2, 0), u(r, 0, 2), 0.0), coord(2))
    add(_C.CalK2, "r2=0", lambda r: (u(r, -2, 0), 0.0, u(r, 0, 1)), coord(1))
    add(_C.TildeK1, "sigma1=0", lambda r: (u(r, -2, 2), u(r, 0, 2), 0.0), coord(2))
    add(_C.TildeK1, "eps1=0", lambda r: (u(r, -2, 2), 0.0, u(r, 0, 1)), coord(1))
    add(_C.TildeK2, "sigma2=0", lambda r: (u(r, -2, 2), u(r, 0, 2), 0.0), coord(2))
    add(_C.TildeK2, "r2=0", lambda r: (u(r, -2, 2), 0.0, u(r, 0, 1)), coord(1))
    add(_C.HatK31, "H (sigma axis)", lambda r: (0.0, u(r, 0, 1), 0.0), lambda c, f: math.hypot(f[0], f[2]))
    add(_C.HatK31, "sigma=0", lambda r: (u(r, 0, 2), 0.0, u(r, 0, 2)), coord(1))
    add(_C.HatK31, "sh1=0", lambda r: (u(r, 0, 2), u(r, 0, 1), 0.0), coord(2))
    add(_C.K11, "eps1=0", lambda r: (u(r, 0, 2), 0.0, u(r, 0, 1)), coord(1))
    add(_C.K11, "s1=0", lambda r: (u(r, 0, 2), u(r, 0, 2), 0.0), coord(2))
    add(_C.K11, "G+,11", lambda r: (1 / (2 * a), u(r, 0, 2), 0.0), lambda c, f: math.hypot(f[0], f[2]))
    add(_C.K11, "H11", lambda r: (0.0, u(r, 0, 2), 0.0), lambda c, f: math.hypot(f[0], f[2]))
    add(_C.K12, "eps1=0", lambda r: (u(r, -2, 2), 0.0, u(r, 0, 1)), coord(1))
    add(_C.K12, "s2=0", lambda r: (u(r, -2, 2), u(r, 0, 2), 0.0), coord(2))
    for sgn, lab in ((1, "+"), (-1, "-")):
        add(_C.K12, f"G{lab},12", (lambda s: lambda r: (s * math.sqrt(2 * a), u(r, 0, 2), 0.0))(sgn),
            lambda c, f: math.hypot(f[0], f[2]))
    add(_C.K21, "s1=0", lambda r: (u(r, -3, 3), u(r, 0, 2), 0.0), coord(2))
    add(_C.K21, "r21=0", lambda r: (u(r, -3, 3), 0.0, u(r, 0, 1)), coord(1))
    add(_C.K22, "s2=0", lambda r: (u(r, -2, 2), u(r, -3, 3), 0.0), coord(2))
    add(_C.K22, "parabola y2=-x2^2/(2a)", lambda r: (lambda x: (x, -x * x / (2 * a), 0.0))(u(r, -2, 2)),
        lambda c, f: f[1] + c[0] * f[0] / a)
    add(_C.K31, "r31=0", lambda r: (0.0, u(r, 0, 2), u(r, 0, 1)), coord(0))
    add(_C.K31, "eps3=0", lambda r: (u(r, 0, 2), 0.0, u(r, 0, 1)), coord(1))
    add(_C.K31, "s1=0", lambda r: (u(r, 0, 2), u(r, 0, 2), 0.0), coord(2))
    return out


def _k12_to_k22(c):
    # composite through the cylinder: x = s2 x2, y = -s2^2, eps = s2^2 eps1
    x2, e1, s2 = c
    w = math.sqrt(e1)
    return (x2 / w, -1.0 / e1, s2 * w)


@dataclass
class CheckResult:
    check: str
    chart: str
    ok: bool
    worst: float
    tol: float
    point: list = dc_field(default_factory=list)
    detail: str = ""

    def to_json(self):
        return {"check": self.check, "chart": self.chart, "ok": self.ok, "worst": self.worst,
                "tol": self.tol, "point": list(self.point), "detail": self.detail}


def _collect(name, chart, tol, items, detail=""):
    worst, wp = 0.0, []
    for err, pt in items:
        if math.isnan(err):
            err = math.inf
        if err > worst or not wp:
            worst, wp = err, list(pt)
    return CheckResult(name, chart, worst <= tol, worst, tol, wp, detail)


def verify_charts(params: CorbeillerParams, seed: int = 0, n_points: int = 100) -> dict:
    """Run the chart invariant suite and return a JSON-ready report.

    ``checks`` hold everything computed from the chart fields themselves;
    ``lemma_checks`` compare spectra against the eigenvalues as stated in the
    lemmas (including the resonance identity at q_i and q_o), which are
    reported separately because several of them disagree with the fields.
    """
    p = params
    rng = np.random.default_rng(seed)
    checks = []

    for (src, dst), (name, fn) in TRANSITIONS.items():
        back = TRANSITIONS[(dst, src)][1]
        rt, cm = [], []
        for _ in range(n_points):
            c = _sample_overlap(src, dst, p, rng)
            d = fn(p, c)
            rt.append((_rel_err(back(p, d), c), c))
            cm.append((_rel_err(_blow_down_raw(p, dst, d), _blow_down_raw(p, src, c)), c))
        checks.append(_collect("round_trip", f"{src.value}->{dst.value}", 1e-12, rt, name))
        checks.append(_collect("blow_down_commutation", f"{src.value}->{dst.value}", 1e-12, cm, name))
        if CHARTS[src].field is None or CHARTS[dst].field is None:
            continue
        fs, fd = CHARTS[src].field, CHARTS[dst].field
        col = []
        for _ in range(n_points):
            c = _sample_overlap(src, dst, p, rng)
            push = pushforward(lambda z: fn(p, z), c, fs(p, c))
            tgt = fd(p, fn(p, c))
            col.append((_angle(push, tgt), c))
        checks.append(_collect("collinearity", f"{src.value}->{dst.value}", 1e-6, col, name))

    for chart, spec in CHARTS.items():
        if spec.field is None:
            continue
        pf = _parent_field(p, chart)
        if pf is None:
            continue
        col = []
        for _ in range(n_points):
            c = _sample_chart(chart, p, rng)
            push = pushforward(lambda z: spec.up(p, z), c, spec.field(p, c))
            col.append((_angle(push, pf(p, spec.up(p, c))), c))
        parent = spec.parent if spec.parent == ORIGINAL else spec.parent.value
        checks.append(_collect("collinearity", f"{chart.value}->{parent}", 1e-6, col, "blow-up map"))

    for chart, name, sampler, normal in _invariant_sets(p):
        fn = CHARTS[chart].field
        items = []
        for _ in range(50):
            c = sampler(rng)
            items.append((abs(normal(c, fn(p, c))), c))
        checks.append(_collect("invariant_set", chart.value, 1e-12, items, name))

    par = []
    for sgn in (1, -1):
        for _ in range(n_points):
            c = (sgn * math.sqrt(2 * p.a), _u(rng, 0.05, 3), 0.0)
            x2, y2, _s = _k12_to_k22(c)
            par.append((abs(y2 + x2 * x2 / (2 * p.a)), c))
    checks.append(_collect("invariant_parabola", "K12->K22", 1e-10, par, "G+- on y2=-x2^2/(2a)"))

    lemma_checks = []
    catalog = []
    for rec in full_catalog(p):
        d = rec.to_json(p)
        catalog.append(d)
        checks.append(CheckResult("spectrum", rec.chart.value, d["max_mismatch"] <= 1e-6, d["max_mismatch"],
                                  1e-6, list(rec.point), rec.classification))
        if rec.lemma_eigenvalues is not None:
            lemma_checks.append(CheckResult("lemma_spectrum", rec.chart.value, d["lemma_mismatch"] <= 1e-6,
                                            d["lemma_mismatch"], 1e-6, list(rec.point), rec.note or rec.classification))
        if rec.chart is _C.K12 and rec.lemma_eigenvalues is not None:
            num = numeric_eigenvalues(rec.chart, p, rec.point)
            real = [z.real for z in num]
            lemma_checks.append(CheckResult("resonance", rec.chart.value, resonance_holds(real), 0.0, 1e-6,
                                            list(rec.point), "l1 = l2 + l3 on the field spectrum"))

    failed = [c.to_json() for c in checks if not c.ok]
    return {
        "params": {"a": p.a, "b": p.b},
        "seed": seed,
        "n_points": n_points,
        "n_checks": len(checks),
        "failed": failed,
        "checks": [c.to_json() for c in checks],
        "lemma_checks": [c.to_json() for c in lemma_checks],
        "lemma_discrepancies": [c.to_json() for c in lemma_checks if not c.ok],
        "catalog": catalog,
        "ok": not failed,
    }
