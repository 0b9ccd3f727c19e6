"""Poincare sections, limit cycles and their convergence as eps -> 0."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field as dc_field
from enum import Enum

import numpy as np

from .errors import ExoscError, NoConvergence, NoReturn, ValidationError
from .models import (System, equilibrium, normalized_field, params_from_dict, rescaling_exponent, sigma,
                     softplus)
from .ode import Direction, EventSpec, IntegratorConfig, integrate
from .singular import (drop_point_corbeiller, drop_point_hester, hausdorff_distance, hester_jump_point,
                       singular_cycle)
from .slowmf import slow_manifold_hester

__all__ = [
    "Crossing", "SectionSpec", "auto_section", "LimitCycle", "ConvergenceReport", "Existence",
    "return_map", "find_cycle", "classify_existence", "convergence_study", "log_multiplier",
]

EPS_RANGE = (1e-3, 0.2)
RETURN_RTOL = 1e-10
# the slow phase drifts at a rate proportional to eps in rescaled time
T1_BUDGET_PER_INV_EPS = 200.0
FLOQUET_STEP = 1e-3
NOISE_FLOOR = 1e-12
SECTION_HOLDOFF = 1e-6


class Crossing(str, Enum):
    DESCENDING = "descending"
    ASCENDING = "ascending"


class Existence(str, Enum):
    CYCLE_FOUND = "CycleFound"
    CONVERGES_TO_EQUILIBRIUM = "ConvergesToEquilibrium"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class SectionSpec:
    """The line y = -delta, crossed in the given direction."""
    delta: float = 0.1
    crossing: Crossing = Crossing.DESCENDING

    def __post_init__(self):
        if not (isinstance(self.delta, (int, float)) and math.isfinite(self.delta) and self.delta > 0):
            raise ValidationError(f"section delta must be positive, got {self.delta!r}")
        object.__setattr__(self, "crossing", Crossing(self.crossing))

    def event(self, terminal=True) -> EventSpec:
        d = Direction.FALLING if self.crossing is Crossing.DESCENDING else Direction.RISING
        delta = self.delta
        return EventSpec("section", lambda s: s[1] + delta, d, terminal, SECTION_HOLDOFF)


@dataclass
class LimitCycle:
    system: System
    params: object
    eps: float
    fixed_point_x: float
    period: float               # rescaled time t1
    period_original: float      # original time t
    floquet: float
    floor_flag: bool
    points: np.ndarray
    section: SectionSpec = dc_field(default_factory=SectionSpec)

    def to_json(self) -> dict:
        return {
            "system": self.system.value,
            "params": asdict(self.params),
            "eps": self.eps,
            "section": {"delta": self.section.delta, "crossing": self.section.crossing.value},
            "fixed_point_x": self.fixed_point_x,
            "period_t1": self.period,
            "period_t": self.period_original,
            "floquet": self.floquet,
            "floquet_noise_floor_flag": self.floor_flag,
            "points": np.asarray(self.points).tolist(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "LimitCycle":
        system = System(d["system"])
        sec = d.get("section", {})
        return cls(system, params_from_dict(system, d["params"]), float(d["eps"]), float(d["fixed_point_x"]),
                   float(d["period_t1"]), float(d["period_t"]), float(d["floquet"]),
                   bool(d["floquet_noise_floor_flag"]), np.asarray(d["points"], dtype=float),
                   SectionSpec(sec.get("delta", 0.1), sec.get("crossing", "descending")))


@dataclass
class ConvergenceReport:
    system: System
    eps_values: list
    hausdorff: list
    periods: list               # original time
    periods_t1: list
    log_contraction: list
    floor_flags: list
    errors: dict = dc_field(default_factory=dict)

    def to_csv(self, path_or_file):
        own = isinstance(path_or_file, str) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["eps", "hausdorff", "period", "log_floquet", "floor_flag"])
            for row in zip(self.eps_values, self.hausdorff, self.periods, self.log_contraction, self.floor_flags):
                e, h, t, lf, fl = row
                w.writerow([_g17(e), _g17(h), _g17(t), _g17(lf), int(fl)])
        finally:
            if own:
                fh.close()

    def contraction_slope(self) -> float:
        """Least-squares slope of log|floquet| against 1/eps over points above the floor."""
        pts = [(1.0 / e, lf) for e, lf, fl in zip(self.eps_values, self.log_contraction, self.floor_flags)
               if not fl and math.isfinite(lf)]
        if len(pts) < 2:
            return math.nan
        x, y = np.array(pts).T
        return float(np.polyfit(x, y, 1)[0])


def _g17(v):
    return format(float(v), ".17g")


def _check_eps_range(eps):
    if not (isinstance(eps, (int, float)) and EPS_RANGE[0] <= eps <= EPS_RANGE[1]):
        raise ValidationError(f"eps must lie in [{EPS_RANGE[0]}, {EPS_RANGE[1]}], got {eps!r}")
    return float(eps)


def _cfg(eps, rtol=RETURN_RTOL):
    return IntegratorConfig.for_eps(eps, rtol=rtol, atol=rtol * 1e-2, max_steps=5_000_000)


def _slow_passage_t1(system, p, eps):
    """Upper estimate of the t1 spent on the slow part of the singular cycle.

    Hester: on the manifold y = eps h, dx/dt1 = eps h sigma((1+alpha) h) with
    h between y_j and h(x_d).  Le Corbeiller: dt1/dx = (1 + e^W)/a with
    e^W = -x/(eps b W).  Both grow without bound as the slow segment lengthens.
    """
    if System(system) is System.HESTER:
        if not p.cycle_condition:
            return 0.0
        xj, yj = hester_jump_point(p)
        xd = drop_point_hester(p)
        hd = slow_manifold_hester(p, xd)
        c = 1.0 + p.alpha
        return (xj - xd) * (1.0 + math.exp(min(c * hd, 700.0))) / (eps * max(yj, 1e-3))
    xd = abs(drop_point_corbeiller(p))
    return (xd + xd * xd / (p.b * eps)) / p.a


def _t1_budget(system, p, eps):
    return T1_BUDGET_PER_INV_EPS / eps + 4.0 * _slow_passage_t1(system, p, eps)


def _to_section(f, s0, section, cfg, t_budget, record=False, budget_scale=1.0):
    t_max = budget_scale * t_budget
    tr = integrate(f, s0, (0.0, t_max), cfg, [section.event()], record=record)
    if not tr.events:
        raise NoReturn(f"no {section.crossing.value} crossing of y = {-section.delta!r} within t1 = {t_max!r}")
    ev = tr.events[-1]
    dy = f(ev.state)[1]
    if abs(dy) <= 1e-6:
        raise ValidationError(f"section not transversal at x = {ev.state[0]!r} (|dy| = {abs(dy):.3g})")
    return tr, ev


def return_map(system, p, eps, section: SectionSpec, x: float) -> float:
    """x-coordinate of the next same-direction crossing of y = -delta from (x, -delta)."""
    eps = _check_eps_range(eps)
    f = normalized_field(system, p, eps)
    _, ev = _to_section(f, (float(x), -section.delta), section, _cfg(eps), _t1_budget(system, p, eps))
    return ev.state[0]


def _start_point(system, p, eps):
    if System(system) is System.HESTER:
        xj, yj = hester_jump_point(p)
        return (xj, eps * yj)
    return (0.0, 0.0)


def _seed(system, p, eps, section, start=None, returns=3, budget_scale=1.0):
    f = normalized_field(system, p, eps)
    s = _start_point(system, p, eps) if start is None else tuple(start)
    cfg = _cfg(eps, 1e-8)
    budget = _t1_budget(system, p, eps)
    for _ in range(returns):
        _, ev = _to_section(f, s, section, cfg, budget, budget_scale=budget_scale)
        s = ev.state
    return s[0]


def _secant(P, x0, tol=1e-10, max_iter=40):
    """Damped secant on F(x) = P(x) - x; returns (x*, P(x*))."""
    x0 = float(x0)
    p0 = P(x0)
    F0 = p0 - x0
    if abs(F0) < tol:
        return x0, p0
    x1 = p0     # one fixed-point step is an excellent second iterate for a contraction
    for _ in range(max_iter):
        p1 = P(x1)
        F1 = p1 - x1
        if abs(F1) < tol:
            return x1, p1
        dF = F1 - F0
        step = -F1 * (x1 - x0) / dF if dF != 0.0 else F1
        lam = 1.0
        while True:
            x2 = x1 + lam * step
            try:
                p2 = P(x2)
            except NoReturn:
                p2 = None
            if p2 is not None and abs(p2 - x2) < abs(F1):
                break
            lam *= 0.5
            if lam < 1e-4:
                raise NoConvergence(f"secant stagnated at x = {x1!r}, residual {F1!r}")
        x0, F0 = x1, F1
        x1 = x2
        if abs(p2 - x2) < tol:
            return x2, p2
        if abs(x1 - x0) < 1e-15 * max(1.0, abs(x1)):
            raise NoConvergence(f"secant step vanished with residual {F1!r}")
    raise NoConvergence(f"no convergence in {max_iter} secant iterations")


def find_cycle(system, p, eps, section: SectionSpec | None = None, seed_x: float | None = None) -> LimitCycle:
    system = System(system)
    section = section or SectionSpec()
    eps = _check_eps_range(eps)
    if system is System.HESTER:
        p.require_cycle_condition()
    x_seed = _seed(system, p, eps, section) if seed_x is None else float(seed_x)

    def P(x):
        return return_map(system, p, eps, section, x)

    xs, _ = _secant(P, x_seed)
    floq, resolution = _floquet(system, p, eps, section, xs)
    floor = abs(floq) < resolution

    # one more pass with the original time carried along as a third component
    f = normalized_field(system, p, eps)
    c = rescaling_exponent(system, p) / eps

    def f3(s):
        dx, dy = f(s)
        return (dx, dy, sigma(c * s[1]))

    tr, ev = _to_section(f3, (xs, -section.delta, 0.0), section, _cfg(eps), _t1_budget(system, p, eps),
                         record=True)
    pts = np.array([s[:2] for s in tr.states], dtype=float)
    return LimitCycle(system, p, eps, xs, ev.t, ev.state[2], floq, floor, pts, section)


def _floquet(system, p, eps, section, xs, h=FLOQUET_STEP):
    """Central difference of the return map at xs and its resolution.

    Each return is accurate to about rtol * |x|, so differences below
    rtol * max(1, |x|) / h are indistinguishable from integration noise.
    """
    P = lambda x: return_map(system, p, eps, section, x)  # noqa: E731
    d = (P(xs + h) - P(xs - h)) / (2 * h)
    return d, max(NOISE_FLOOR, RETURN_RTOL * max(1.0, abs(xs)) / h)


def _divergence(system, p, eps):
    """Closed-form divergence of the normalized field."""
    system = System(system)
    ie = 1.0 / eps
    if system is System.CORBEILLER:
        a, b = p.a, p.b

        def div(s):
            x, y = s[0], s[1]
            sg = sigma(ie * y)
            return 2 * b * sg - b * (1 - sg) - (-x + 3 * b * y) * sg * (1 - sg) * ie
        return div
    c = (1.0 + p.alpha) * ie
    g2, mu, km = 2 * p.gamma, p.mu, p.kappa * p.mu

    def div(s):
        x, y = s[0], s[1]
        u = c * y
        sp = softplus(u)
        sg = math.exp(-sp)
        ds = -sg * (1 - sg) * c     # d sigma(c y)/dy
        E = math.exp(ie * y - sp)   # e^{y/eps} sigma(c y)
        return -g2 * sg + (-x - g2 * y) * ds + mu * E * (ie - (1 - sg) * c) + km * ds
    return div


def log_multiplier(system, p, eps, section: SectionSpec | None = None, x_star: float | None = None) -> float:
    """log of the cycle's nontrivial Floquet multiplier, as the divergence integral over one return.

    For a planar cycle this equals log |Pi'(x*)| exactly, and stays
    representable long after Pi'(x*) itself underflows any finite-difference
    resolution.
    """
    section = section or SectionSpec()
    eps = _check_eps_range(eps)
    if x_star is None:
        x_star = find_cycle(system, p, eps, section).fixed_point_x
    f = normalized_field(system, p, eps)
    div = _divergence(system, p, eps)

    def f3(s):
        dx, dy = f(s)
        return (dx, dy, div(s))

    _, ev = _to_section(f3, (x_star, -section.delta, 0.0), section, _cfg(eps), _t1_budget(system, p, eps))
    return ev.state[2]


def auto_section(system, p, eps) -> SectionSpec:
    """Default section if the attractor crosses it, else one at half the attractor's depth.

    Close to the existence boundary the cycle is small and may never reach
    y = -0.1; its depth is read off the late half of a transient from the
    usual start point.
    """
    eps = _check_eps_range(eps)
    default = SectionSpec()
    try:
        _seed(system, p, eps, default, returns=2)
        return default
    except NoReturn:
        pass
    f = normalized_field(system, p, eps)
    T = _t1_budget(system, p, eps)
    tr = integrate(f, _start_point(system, p, eps), (0.0, T), _cfg(eps, 1e-8))
    late = [s[1] for t, s in zip(tr.times, tr.states) if t >= 0.5 * T]
    y_min = min(late)
    if not y_min < 0:
        raise NoReturn("the attractor never enters y < 0")
    return SectionSpec(0.5 * -y_min, default.crossing)


def _ball_points(rng, radius, n):
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    th = rng.uniform(0.0, 2 * math.pi, n)
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


def classify_existence(system, p, eps, ball_radius: float = 5.0, n_seeds: int = 20, seed: int = 0,
                       t_budget: float = 2000.0, section: SectionSpec | None = None) -> Existence:
    """Integrate from random states in a ball and classify their common fate."""
    system = System(system)
    if n_seeds < 1:
        raise ValidationError("n_seeds must be >= 1")
    if system is System.HESTER and abs(p.kappa * (1.0 + p.alpha) - 1.0) <= 1e-12:
        return Existence.INDETERMINATE
    try:
        eps = _check_eps_range(eps)
        rng = np.random.default_rng(seed)
        starts = _ball_points(rng, ball_radius, n_seeds)
        f = normalized_field(system, p, eps)
        eq = equilibrium(system, p, eps)
        cfg = _cfg(eps, 1e-9)

        has_cycle = system is System.CORBEILLER or p.cycle_condition
        if has_cycle and section is None:
            section = auto_section(system, p, eps)
        if not has_cycle:
            for s0 in starts:
                fin = integrate(f, tuple(s0), (0.0, t_budget), cfg, record=False).final
                if math.hypot(fin[0] - eq[0], fin[1] - eq[1]) >= 1e-4:
                    return Existence.INDETERMINATE
            return Existence.CONVERGES_TO_EQUILIBRIUM

        cyc = find_cycle(system, p, eps, section)
        for s0 in starts:
            # the omega-limit lies on the cycle iff late section crossings sit at x*;
            # starts far out on the slow manifold need a long first passage
            x = _seed(system, p, eps, section, start=tuple(s0), returns=4, budget_scale=5.0)
            if abs(x - cyc.fixed_point_x) >= 1e-3:
                return Existence.INDETERMINATE
        return Existence.CYCLE_FOUND
    except (ExoscError, ValueError, ArithmeticError):
        return Existence.INDETERMINATE


def convergence_study(system, p, eps_list, section: SectionSpec | None = None,
                      resample_step: float = 1e-3) -> ConvergenceReport:
    system = System(system)
    section = section or SectionSpec()
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValidationError("eps_list must be nonempty and strictly decreasing")
    gamma0 = singular_cycle(system, p)
    rep = ConvergenceReport(system, [], [], [], [], [], [])
    for eps in eps_list:
        rep.eps_values.append(eps)
        try:
            cyc = find_cycle(system, p, eps, section)
            rep.hausdorff.append(hausdorff_distance(cyc.points, gamma0, resample_step))
            rep.periods.append(cyc.period_original)
            rep.periods_t1.append(cyc.period)
            rep.log_contraction.append(math.log(abs(cyc.floquet)) if cyc.floquet != 0 else -math.inf)
            rep.floor_flags.append(cyc.floor_flag)
        except (ExoscError, ValueError, ArithmeticError) as exc:
            rep.errors[eps] = f"{type(exc).__name__}: {exc}"
            for lst in (rep.hausdorff, rep.periods, rep.periods_t1, rep.log_contraction):
                lst.append(math.nan)
            rep.floor_flags.append(True)
    return rep
