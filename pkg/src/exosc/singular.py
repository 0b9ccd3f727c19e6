"""Singular (eps -> 0) cycles, critical manifold and Hausdorff distances."""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from enum import Enum

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConditionViolated, EmptyInput, IntegrationFailure, ValidationError
from .models import CorbeillerParams, HesterParams, State2, System, pws_field
from .ode import Direction, EventSpec, IntegratorConfig, integrate

__all__ = [
    "Branch", "CriticalManifoldSample", "SingularCycle",
    "hester_jump_point", "critical_manifold_hester", "drop_point_hester",
    "drop_point_hester_numeric", "drop_point_corbeiller", "singular_cycle",
    "resample_polyline", "hausdorff_distance",
]

GAMMA1_POINTS = 2000
TANGENCY_HOLDOFF = 1e-6


class Branch(str, Enum):
    ATTRACTING = "attracting"
    FOLD = "fold"
    REPELLING = "repelling"


@dataclass(frozen=True)
class CriticalManifoldSample:
    y2: float
    x: float
    branch: Branch


@dataclass
class SingularCycle:
    system: System
    params: object
    segments: list  # [(label, ndarray (n, 2))]

    def polylines(self):
        return [np.asarray(pts, dtype=float) for _, pts in self.segments]

    def to_json(self) -> dict:
        return {
            "system": self.system.value,
            "params": asdict(self.params),
            "segments": [{"label": lab, "points": np.asarray(pts).tolist()} for lab, pts in self.segments],
        }

    @classmethod
    def from_json(cls, d: dict) -> "SingularCycle":
        from .models import params_from_dict
        system = System(d["system"])
        return cls(system, params_from_dict(system, d["params"]),
                   [(s["label"], np.asarray(s["points"], dtype=float)) for s in d["segments"]])


def hester_jump_point(p: HesterParams):
    """Fold of the critical manifold: returns (x_j, y_j) with y_j in units of eps."""
    p.require_cycle_condition()
    a, k = p.alpha, p.kappa
    xj = p.mu * a / ((1.0 + a) ** ((1.0 + a) / a) * k ** (1.0 / a))
    yj = -math.log(k * (1.0 + a)) / a
    return xj, yj


def _critical_x(p, y2):
    return p.mu * (math.exp(y2) - p.kappa * math.exp((1.0 + p.alpha) * y2))


def critical_manifold_hester(p: HesterParams, y2: float) -> CriticalManifoldSample:
    _, yj = hester_jump_point(p)
    if abs(y2 - yj) <= 1e-12:
        br = Branch.FOLD
    elif y2 > yj:
        br = Branch.ATTRACTING
    else:
        br = Branch.REPELLING
    return CriticalManifoldSample(y2, _critical_x(p, y2), br)


def drop_point_hester(p: HesterParams) -> float:
    """Half a turn of the damped linear focus starting from (x_j, 0)."""
    xj, _ = hester_jump_point(p)
    g = p.gamma
    return -xj * math.exp(-g * math.pi / math.sqrt(1.0 - g * g))


def _lower_field(system, p):
    if system is System.HESTER:
        g2 = 2.0 * p.gamma
        return lambda s: (s[1], -s[0] - g2 * s[1])
    a, b2 = p.a, 2.0 * p.b
    return lambda s: (s[1] + a, -s[0] + b2 * s[1])


def _first_return(system, p, start, rtol, t_max=200.0):
    f = _lower_field(system, p)
    cfg = IntegratorConfig(rtol=rtol, atol=rtol * 1e-2, h_max=0.05)
    ev = EventSpec("sigma", lambda s: s[1], Direction.RISING, terminal=True, holdoff=TANGENCY_HOLDOFF)
    tr = integrate(f, start, (0.0, t_max), cfg, [ev])
    if not tr.events:
        raise IntegrationFailure("lower field orbit did not return to y = 0")
    return tr


def drop_point_hester_numeric(p: HesterParams, rtol: float = 1e-12) -> float:
    xj, _ = hester_jump_point(p)
    # leave the line y=0 downwards: at (x_j, 0) the lower field points to y<0
    tr = _first_return(System.HESTER, p, (xj, 0.0), rtol)
    return tr.events[-1].state[0]


def drop_point_corbeiller(p: CorbeillerParams, rtol: float = 1e-11) -> float:
    tr = _first_return(System.CORBEILLER, p, (0.0, 0.0), rtol)
    xd = tr.events[-1].state[0]
    if not xd < 0:
        raise IntegrationFailure(f"drop point {xd!r} is not negative")
    return xd


def _resample_count(pts, n):
    pts = np.asarray(pts, dtype=float)
    seg = np.hypot(*np.diff(pts, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    u = np.linspace(0.0, s[-1], n)
    return np.column_stack([np.interp(u, s, pts[:, 0]), np.interp(u, s, pts[:, 1])])


def singular_cycle(system, p) -> SingularCycle:
    system = System(system)
    if system is System.HESTER:
        xj, _ = hester_jump_point(p)
        start = (xj, 0.0)
        xd = drop_point_hester(p)
        tr = _first_return(system, p, start, 1e-12)
        end = tr.events[-1].state
        if abs(end[0] - xd) > 1e-8:
            raise IntegrationFailure(f"drop point mismatch {end[0]!r} vs {xd!r}")
    else:
        start = (0.0, 0.0)
        tr = _first_return(system, p, start, 1e-11)
        xd = tr.events[-1].state[0]
    pts = np.array(tr.states, dtype=float)
    pts[0] = start
    pts[-1] = (xd, 0.0)
    g1 = _resample_count(pts, GAMMA1_POINTS)
    g1[0], g1[-1] = start, (xd, 0.0)
    g2 = np.array([(xd, 0.0), start], dtype=float)
    return SingularCycle(system, p, [("Gamma1", g1), ("Gamma2", g2)])


def resample_polyline(pts, step: float) -> np.ndarray:
    """Points along the polyline at arclength spacing <= step, endpoints kept."""
    pts = np.asarray(pts, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise EmptyInput("empty polyline")
    if len(pts) == 1:
        return pts.copy()
    seg = np.hypot(*np.diff(pts, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    n = max(2, int(math.ceil(s[-1] / step)) + 1)
    u = np.linspace(0.0, s[-1], n)
    return np.column_stack([np.interp(u, s, pts[:, 0]), np.interp(u, s, pts[:, 1])])


def _as_point_set(obj, step):
    if isinstance(obj, SingularCycle):
        lines = obj.polylines()
    elif isinstance(obj, np.ndarray):
        lines = [obj]
    elif hasattr(obj, "points"):
        lines = [np.asarray(obj.points, dtype=float)]
    elif len(obj) == 0:
        raise EmptyInput("empty point set")
    elif np.ndim(obj[0]) == 1:
        lines = [np.asarray(obj, dtype=float)]
    else:
        lines = [np.asarray(o, dtype=float) for o in obj]
    if all(len(l) == 0 for l in lines):
        raise EmptyInput("empty point set")
    return np.vstack([resample_polyline(l, step) for l in lines if len(l)])


def hausdorff_distance(A, B, resample_step: float = 1e-3) -> float:
    """Symmetric Hausdorff distance between arclength-resampled polyline sets.

    ``A`` and ``B`` may be an (n, 2) array, a list of such polylines, a
    ``SingularCycle`` or anything with a ``points`` attribute.
    """
    if not resample_step > 0:
        raise ValidationError("resample_step must be positive")
    pa = _as_point_set(A, resample_step)
    pb = _as_point_set(B, resample_step)
    dab = cKDTree(pb).query(pa)[0].max()
    dba = cKDTree(pa).query(pb)[0].max()
    return float(max(dab, dba))
