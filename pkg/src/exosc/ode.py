"""Adaptive Dormand-Prince 5(4) integrator with dense output and events.

States are plain tuples of floats of any dimension.  Events are located by
sign-change bracketing over an accepted step followed by bisection on the
continuous extension, so they are robust where ``g'`` is tiny.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Callable, Sequence

from .errors import MaxStepsExceeded, StepUnderflow, ValidationError

__all__ = [
    "IntegratorConfig", "Direction", "EventSpec", "Event", "Trajectory",
    "integrate", "flow_map",
]


class Direction(str, Enum):
    RISING = "rising"
    FALLING = "falling"
    ANY = "any"


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-9
    atol: float = 1e-12
    h_init: float | None = None
    h_max: float = math.inf
    max_steps: int = 1_000_000
    event_time_tol: float = 1e-12

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0 and self.event_time_tol > 0):
            raise ValidationError("tolerances must be positive")
        if self.max_steps <= 0:
            raise ValidationError("max_steps must be positive")
        if not self.h_max > 0 or (self.h_init is not None and not self.h_init > 0):
            raise ValidationError("step sizes must be positive")

    @classmethod
    def for_eps(cls, eps: float, **kw) -> "IntegratorConfig":
        """Defaults for a normalized field: h_max = min(0.1, 10 eps)."""
        kw.setdefault("h_max", min(0.1, 10.0 * eps))
        return cls(**kw)


@dataclass(frozen=True)
class EventSpec:
    event_id: str
    g: Callable[[Sequence[float]], float]
    direction: Direction = Direction.ANY
    terminal: bool = False
    # crossings closer than this to the start time are ignored
    holdoff: float = 0.0


@dataclass(frozen=True)
class Event:
    index: int
    event_id: str
    t: float
    state: tuple


@dataclass
class Trajectory:
    times: list
    states: list
    events: list = dc_field(default_factory=list)
    steps_rejected: int = 0

    @property
    def final(self):
        return self.states[-1]

    def events_of(self, event_id):
        return [e for e in self.events if e.event_id == event_id]

    def to_csv(self, path_or_file, precision: int = 17):
        def fmt(v):
            return format(v, f".{precision}g")

        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            dim = len(self.states[0]) if self.states else 2
            names = ["x", "y"] if dim == 2 else [f"u{i}" for i in range(dim)]
            fh.write(",".join(["t"] + names) + "\n")
            for t, s in zip(self.times, self.states):
                fh.write(",".join([fmt(t)] + [fmt(v) for v in s]) + "\n")
            for ev in self.events:
                fh.write("# event," + ",".join([ev.event_id, fmt(ev.t)] + [fmt(v) for v in ev.state]) + "\n")
        finally:
            if own:
                fh.close()


# Dormand-Prince coefficients
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
# continuous extension (Hairer, dopri5 contd5)
D1, D3, D4 = -12715105075 / 11282082432, 87487479700 / 32700410799, -10690763975 / 1880347072
D5, D6, D7 = 701980252875 / 199316789632, -1453857185 / 822651844, 69997945 / 29380423


def _dense_coeffs(y0, y1, k1, k3, k4, k5, k6, k7, h):
    rc = []
    for i in range(len(y0)):
        ydiff = y1[i] - y0[i]
        bspl = h * k1[i] - ydiff
        rc.append((y0[i], ydiff, bspl, ydiff - h * k7[i] - bspl,
                   h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])))
    return rc


def _dense_eval(rc, theta):
    t1 = 1.0 - theta
    return tuple(r0 + theta * (r1 + t1 * (r2 + theta * (r3 + t1 * r4))) for r0, r1, r2, r3, r4 in rc)


def _crossed(g0, g1, direction):
    if direction is Direction.RISING:
        return g0 <= 0.0 < g1
    if direction is Direction.FALLING:
        return g0 >= 0.0 > g1
    return (g0 <= 0.0 < g1) or (g0 >= 0.0 > g1)


def _locate(ev, rc, t0, h, g0, g1, tol):
    """Bisection on the dense output; returns (t, state)."""
    lo, hi = 0.0, 1.0
    glo = g0
    habs = abs(h)
    while (hi - lo) * habs > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = ev.g(_dense_eval(rc, mid))
        if gm == 0.0:
            lo = hi = mid
            break
        if (glo < 0.0) == (gm < 0.0) and glo != 0.0:
            lo, glo = mid, gm
        else:
            hi = mid
    # report the side that satisfies the crossing (g past zero)
    th = hi
    return t0 + th * h, _dense_eval(rc, th)


def _initial_step(f, t0, y0, f0, direction, rtol, atol, h_max):
    # Hairer-Norsett-Wanner starting step heuristic
    sc = [atol + rtol * abs(v) for v in y0]
    d0 = math.sqrt(sum((v / s) ** 2 for v, s in zip(y0, sc)) / len(y0))
    d1 = math.sqrt(sum((v / s) ** 2 for v, s in zip(f0, sc)) / len(y0))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, h_max)
    y1 = tuple(v + direction * h0 * k for v, k in zip(y0, f0))
    f1 = f(y1)
    d2 = math.sqrt(sum(((a - b) / s) ** 2 for a, b, s in zip(f1, f0, sc)) / len(y0)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, h_max)


def integrate(field: Callable, s0: Sequence[float], t_span, cfg: IntegratorConfig | None = None,
              events: Sequence[EventSpec] = (), record: bool = True) -> Trajectory:
    """Integrate ``s' = field(s)`` over ``t_span`` (forward or backward).

    With ``record=False`` only the initial and final states (and events) are kept.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (math.isfinite(t0) and math.isfinite(t1)) or t0 == t1:
        raise ValidationError("t_span must be finite and nondegenerate")
    y = tuple(float(v) for v in s0)
    n = len(y)
    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    h_min = 1e-14 * max(span, abs(t0), abs(t1))
    rtol, atol = cfg.rtol, cfg.atol
    h_max = min(cfg.h_max, span)
    f = field
    k1 = tuple(f(y))
    h = cfg.h_init if cfg.h_init is not None else _initial_step(f, t0, y, k1, direction, rtol, atol, h_max)
    h = min(h, h_max)

    times = [t0]
    states = [y]
    traj = Trajectory(times, states)
    gvals = [ev.g(y) for ev in events]
    t = t0
    steps = 0
    rejected = 0
    rng = range(n)
    while True:
        remaining = (t1 - t) * direction
        if remaining <= h_min:
            break
        last = h >= remaining
        if last:
            h = remaining
        if steps >= cfg.max_steps:
            raise MaxStepsExceeded(f"exceeded {cfg.max_steps} steps at t={t!r}")
        hs = h * direction
        k2 = f(tuple(y[i] + hs * A21 * k1[i] for i in rng))
        k3 = f(tuple(y[i] + hs * (A31 * k1[i] + A32 * k2[i]) for i in rng))
        k4 = f(tuple(y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]) for i in rng))
        k5 = f(tuple(y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]) for i in rng))
        k6 = f(tuple(y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
                     for i in rng))
        yn = tuple(y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
                   for i in rng)
        k7 = f(yn)
        err = 0.0
        for i in rng:
            sc = atol + rtol * max(abs(y[i]), abs(yn[i]))
            e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]) / sc
            err += e * e
        err = math.sqrt(err / n)
        if not math.isfinite(err):
            err = 1e10
        if err > 1.0:
            rejected += 1
            steps += 1
            h *= max(0.2, 0.9 * err ** -0.2)
            if h < h_min:
                raise StepUnderflow(f"step {h!r} below {h_min!r} at t={t!r}")
            continue
        steps += 1
        tn = t1 if last else t + hs
        stop = False
        if events:
            rc = None
            hits = []
            for j, ev in enumerate(events):
                gn = ev.g(yn)
                go = gvals[j]
                gvals[j] = gn
                if _crossed(go, gn, ev.direction):
                    if rc is None:
                        rc = _dense_coeffs(y, yn, k1, k3, k4, k5, k6, k7, hs)
                    te, se = _locate(ev, rc, t, hs, go, gn, cfg.event_time_tol)
                    if (te - t0) * direction < ev.holdoff:
                        continue
                    hits.append(((te - t) * direction, te, se, ev))
            hits.sort(key=lambda z: z[0])
            for _, te, se, ev in hits:
                traj.events.append(Event(len(times), ev.event_id, te, se))
                if ev.terminal:
                    tn, yn = te, se
                    stop = True
                    break
        t, y = tn, yn
        if record or stop:
            times.append(t)
            states.append(y)
        if stop:
            break
        k1 = k7
        fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h = min(h * fac, h_max)
    if not record and times[-1] != t:
        times.append(t)
        states.append(y)
    traj.steps_rejected = rejected
    return traj


def flow_map(field, s0, T, cfg: IntegratorConfig | None = None):
    """State after time T (T may be negative)."""
    if T == 0:
        return tuple(float(v) for v in s0)
    return integrate(field, s0, (0.0, T), cfg, record=False).final
