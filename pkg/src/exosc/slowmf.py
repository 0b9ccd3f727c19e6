"""Lambert W and the slow manifolds of both oscillators."""
from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .errors import DomainError, EmptyWindow, OutOfDomain
from .models import System, check_eps
from .singular import hester_jump_point

__all__ = [
    "Order", "lambert_w", "z_function", "slow_manifold_hester",
    "slow_manifold_corbeiller", "manifold_residual", "manifold_samples",
]

INV_E = math.exp(-1.0)
HALLEY_MAX_ITER = 50
HESTER_BRACKET = 60.0


class Order(str, Enum):
    LEADING = "leading"
    FULL = "full"


def _w_initial(w):
    if abs(w) < 0.3:
        return w * (1.0 + w * (-1.0 + w * (1.5 - w * 8.0 / 3.0)))
    if w < 0:
        # expansion about the branch point -1/e
        p = math.sqrt(2.0 * (math.e * w + 1.0))
        return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0))
    if w <= math.e:
        # Winitzki's closed-form fit
        l1 = math.log1p(w)
        return l1 * (1.0 - math.log1p(l1) / (2.0 + l1))
    l1 = math.log(w)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1)


def lambert_w(w: float) -> float:
    """Principal branch W0 on (-1/e, inf), by Halley iteration."""
    w = float(w)
    if math.isnan(w) or w <= -INV_E:
        raise DomainError(f"W0 needs w > -1/e, got {w!r}")
    if w == 0.0:
        return 0.0
    if math.isinf(w):
        return math.inf
    z = _w_initial(w)
    for _ in range(HALLEY_MAX_ITER):
        ez = math.exp(z)
        f = z * ez - w
        zp1 = z + 1.0
        if zp1 == 0.0:
            break
        denom = ez * zp1 - (z + 2.0) * f / (2.0 * zp1)
        if denom == 0.0:
            break
        dz = f / denom
        z -= dz
        if abs(dz) <= 4e-16 * (1.0 + abs(z)):
            break
    return z


def z_function(s: float) -> float:
    """Z(s) = 1/W(1/s), continuously extended by Z(0) = 0."""
    if s < 0:
        raise DomainError(f"Z needs s >= 0, got {s!r}")
    if s == 0:
        return 0.0
    inv = 1.0 / s
    if math.isinf(inv):
        return 0.0
    return 1.0 / lambert_w(inv)


def _critical_x(p, h):
    # x(h) = mu e^h (1 - kappa e^{alpha h}); saturates to -inf instead of overflowing
    try:
        return p.mu * math.exp(h) * (1.0 - p.kappa * math.exp(p.alpha * h))
    except OverflowError:
        return -math.inf


def slow_manifold_hester(p, x: float) -> float:
    """Scaled ordinate h > y_j on the attracting branch with x = x(h)."""
    xj, yj = hester_jump_point(p)
    if x >= xj:
        raise OutOfDomain(f"x = {x!r} is not below the jump point {xj!r}")
    lo, hi = yj, yj + HESTER_BRACKET
    if _critical_x(p, hi) > x:
        raise OutOfDomain(f"x = {x!r} beyond the bracketed branch")
    # x(h) decreases on [y_j, inf)
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _critical_x(p, mid) > x:
            lo = mid
        else:
            hi = mid
    return hi if abs(_critical_x(p, hi) - x) < abs(_critical_x(p, lo) - x) else lo


def slow_manifold_corbeiller(p, eps, x: float, order=Order.LEADING) -> float:
    eps = check_eps(eps)
    if x >= 0:
        raise OutOfDomain(f"x = {x!r} must be negative")
    lead = eps * lambert_w(-x / (eps * p.b))
    if Order(order) is Order.LEADING:
        return lead
    # first correction with the constant remainder h = 2
    return lead * (1.0 - eps * p.b * 2.0 / x)


def manifold_samples(system, p, eps, xs, order=Order.LEADING):
    """Rows (x, y_graph, order) of the manifold graph; y_graph = eps h for Hester."""
    system = System(system)
    out = []
    for x in xs:
        if system is System.HESTER:
            out.append((float(x), eps * slow_manifold_hester(p, x), Order.LEADING.value))
        else:
            out.append((float(x), slow_manifold_corbeiller(p, eps, x, order), Order(order).value))
    return out


def manifold_residual(system, p, eps, traj, window, order=Order.LEADING, relative: bool = False) -> float:
    """Max deviation of an integrated orbit from the manifold graph inside an x-window.

    Only samples with y > 0 (the slow, upper part of the orbit) are used.
    Hester residuals are in scaled units |y/eps - h|, Le Corbeiller ones in
    y (divided by y_graph when ``relative``).  A degenerate window
    ``(x0, x0)`` interpolates the upper passages at x0.  The transient prefix
    is dropped until the residual first falls below three times the median
    of the later half of the in-window residuals.
    """
    system = System(system)
    eps = check_eps(eps)
    lo, hi = float(window[0]), float(window[1])
    states = np.asarray(traj.states if hasattr(traj, "states") else traj, dtype=float)
    xs, ys = states[:, 0], states[:, 1]

    def graph(x):
        if system is System.HESTER:
            return slow_manifold_hester(p, x)
        return slow_manifold_corbeiller(p, eps, x, order)

    def resid(x, y):
        g = graph(x)
        if system is System.HESTER:
            return abs(y / eps - g)
        r = abs(y - g)
        return r / abs(g) if relative else r

    res = []
    if lo == hi:
        for i in range(len(xs) - 1):
            x0, x1 = xs[i], xs[i + 1]
            if (x0 - lo) * (x1 - lo) <= 0 and x0 != x1 and ys[i] > 0 and ys[i + 1] > 0:
                th = (lo - x0) / (x1 - x0)
                res.append(resid(lo, ys[i] + th * (ys[i + 1] - ys[i])))
    else:
        for x, y in zip(xs, ys):
            if lo <= x <= hi and y > 0:
                res.append(resid(x, y))
    if not res:
        raise EmptyWindow(f"no upper-branch samples in window [{lo}, {hi}]")
    res = np.asarray(res)
    med = float(np.median(res[len(res) // 2:]))
    keep = np.nonzero(res < 3.0 * med)[0] if med > 0 else np.arange(len(res))
    start = int(keep[0]) if len(keep) else 0
    return float(res[start:].max())
