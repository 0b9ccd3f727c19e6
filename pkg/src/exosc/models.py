"""Vector fields of the Hester and Le Corbeiller oscillators.

Both systems carry an exponential nonlinearity ``e^{y/eps}``.  The raw
right-hand sides overflow once ``y/eps`` is a few hundred, so every
downstream module works with the *normalized* fields obtained by the time
rescaling ``dt = dt1 / (1 + e^{c y/eps})`` (``c = 1 + alpha`` for Hester,
``c = 1`` for Le Corbeiller).  These are evaluated through ``softplus`` and
are finite for every finite state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

from .errors import ConditionViolated, OnSwitchingManifold, OverflowGuard, ValidationError

__all__ = [
    "System", "HesterParams", "CorbeillerParams", "PWS", "State2", "FieldValue",
    "softplus", "sigma", "check_eps",
    "hester_field_normalized", "corbeiller_field_normalized",
    "hester_field_raw", "corbeiller_field_raw", "pws_field", "equilibrium",
    "normalized_field", "raw_field", "rescaling_exponent", "params_from_dict",
]

EXP_GUARD = 700.0


class System(str, Enum):
    HESTER = "hester"
    CORBEILLER = "corbeiller"


class State2(NamedTuple):
    x: float
    y: float


class FieldValue(NamedTuple):
    dx: float
    dy: float


class _PWSLimit:
    """Sentinel standing for the limit eps -> 0+."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "PWS"


PWS = _PWSLimit()


def _finite_positive(name, v):
    if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
        raise ValidationError(f"{name} must be a finite positive number, got {v!r}")


@dataclass(frozen=True)
class HesterParams:
    alpha: float
    mu: float
    kappa: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "mu", "kappa"):
            _finite_positive(name, getattr(self, name))
        g = self.gamma
        if not (isinstance(g, (int, float)) and 0.0 < g < 1.0):
            raise ValidationError(f"gamma must lie in (0,1) (stable focus of the lower field), got {g!r}")

    @property
    def cycle_condition(self) -> bool:
        """True iff kappa*(1+alpha) lies in (0, 1)."""
        return 0.0 < self.kappa * (1.0 + self.alpha) < 1.0

    @property
    def system(self):
        return System.HESTER

    def require_cycle_condition(self):
        k = self.kappa * (1.0 + self.alpha)
        if not 0.0 < k < 1.0:
            raise ConditionViolated(f"kappa*(1+alpha) = {k!r} is not in (0,1)")


@dataclass(frozen=True)
class CorbeillerParams:
    a: float
    b: float

    def __post_init__(self):
        _finite_positive("a", self.a)
        if not (isinstance(self.b, (int, float)) and 0.0 < self.b < 1.0):
            raise ValidationError(f"b must lie in (0,1), got {self.b!r}")

    @property
    def system(self):
        return System.CORBEILLER


def params_from_dict(system, d: dict):
    system = System(system)
    if system is System.HESTER:
        return HesterParams(float(d["alpha"]), float(d["mu"]), float(d["kappa"]), float(d["gamma"]))
    return CorbeillerParams(float(d["a"]), float(d["b"]))


def check_eps(eps) -> float:
    if eps is PWS:
        raise ValidationError("the PWS limit is only accepted by pws_field / equilibrium")
    if not (isinstance(eps, (int, float)) and math.isfinite(eps) and eps > 0):
        raise ValidationError(f"eps must be positive, got {eps!r}")
    return float(eps)


def softplus(u: float) -> float:
    """log(1 + e^u) without overflow."""
    return max(u, 0.0) + math.log1p(math.exp(-abs(u)))


def sigma(u: float) -> float:
    """1 / (1 + e^u), via exp(-softplus(u))."""
    return math.exp(-softplus(u))


def hester_field_normalized(p: HesterParams, eps, s) -> FieldValue:
    eps = check_eps(eps)
    x, y = s
    u = (1.0 + p.alpha) * y / eps
    sp = softplus(u)
    sg = math.exp(-sp)
    dx = y * sg
    dy = (-x - 2.0 * p.gamma * y) * sg + p.mu * math.exp(y / eps - sp) - p.kappa * p.mu * (1.0 - sg)
    return FieldValue(dx, dy)


def corbeiller_field_normalized(p: CorbeillerParams, eps, s) -> FieldValue:
    eps = check_eps(eps)
    x, y = s
    sg = math.exp(-softplus(y / eps))
    return FieldValue((y + p.a) * sg, (-x + 2.0 * p.b * y) * sg - p.b * y * (1.0 - sg))


def hester_field_raw(p: HesterParams, eps, s) -> FieldValue:
    eps = check_eps(eps)
    x, y = s
    u = y / eps
    # the kappa term carries the larger exponent (1+alpha) y/eps
    if max(abs(u), abs((1.0 + p.alpha) * u)) > EXP_GUARD:
        raise OverflowGuard(f"exponent {(1.0 + p.alpha) * u:.6g} beyond guard; use the normalized field")
    dy = -x - 2.0 * p.gamma * y + p.mu * (math.exp(u) - p.kappa * math.exp((1.0 + p.alpha) * u))
    return FieldValue(y, dy)


def corbeiller_field_raw(p: CorbeillerParams, eps, s) -> FieldValue:
    eps = check_eps(eps)
    x, y = s
    u = y / eps
    if abs(u) > EXP_GUARD:
        raise OverflowGuard(f"exponent {u:.6g} beyond guard; use the normalized field")
    return FieldValue(y + p.a, -x + p.b * y * (2.0 - math.exp(u)))


def pws_field(system, p, s) -> FieldValue:
    """eps -> 0 limit of the normalized field, off the switching line y = 0."""
    system = System(system)
    x, y = s
    if y == 0.0:
        raise OnSwitchingManifold("the limit field is degenerate on y = 0")
    if system is System.HESTER:
        if y > 0:
            return FieldValue(0.0, -p.kappa * p.mu)
        return FieldValue(y, -x - 2.0 * p.gamma * y)
    if y > 0:
        return FieldValue(0.0, -p.b * y)
    return FieldValue(y + p.a, -x + 2.0 * p.b * y)


def equilibrium(system, p, eps) -> State2:
    system = System(system)
    if system is System.HESTER:
        if eps is not PWS:
            check_eps(eps)
        return State2(p.mu * (1.0 - p.kappa), 0.0)
    if eps is PWS:
        return State2(-2.0 * p.a * p.b, -p.a)
    eps = check_eps(eps)
    return State2(-p.a * p.b * (2.0 - math.exp(-p.a / eps)), -p.a)


def rescaling_exponent(system, p) -> float:
    """c such that dt/dt1 = 1/(1 + e^{c y/eps})."""
    return 1.0 + p.alpha if System(system) is System.HESTER else 1.0


def normalized_field(system, p, eps) -> Callable:
    """Fast closure s -> (dx, dy) of the normalized field (no validation per call)."""
    eps = check_eps(eps)
    system = System(system)
    exp, log1p = math.exp, math.log1p
    if system is System.HESTER:
        c = (1.0 + p.alpha) / eps
        ie = 1.0 / eps
        g2 = 2.0 * p.gamma
        mu = p.mu
        km = p.kappa * p.mu

        def f(s):
            x, y = s[0], s[1]
            u = c * y
            sp = (u if u > 0.0 else 0.0) + log1p(exp(-abs(u)))
            sg = exp(-sp)
            return (y * sg, (-x - g2 * y) * sg + mu * exp(ie * y - sp) - km * (1.0 - sg))
        return f
    ie = 1.0 / eps
    a, b = p.a, p.b

    def g(s):
        x, y = s[0], s[1]
        u = ie * y
        sg = exp(-((u if u > 0.0 else 0.0) + log1p(exp(-abs(u)))))
        return ((y + a) * sg, (-x + 2.0 * b * y) * sg - b * y * (1.0 - sg))
    return g


def raw_field(system, p, eps) -> Callable:
    system = System(system)
    fn = hester_field_raw if system is System.HESTER else corbeiller_field_raw
    return lambda s: fn(p, eps, s)
