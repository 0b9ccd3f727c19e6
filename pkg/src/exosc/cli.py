"""Command line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 partial sweep.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict

import numpy as np

from . import charts, cycles, singular, slowmf
from .errors import ExoscError, IntegrationFailure, ValidationError
from .models import System, equilibrium, normalized_field, params_from_dict, rescaling_exponent, sigma
from .ode import Direction, Event, EventSpec, IntegratorConfig, Trajectory, integrate

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_PARTIAL = 0, 2, 3, 4
PARAM_NAMES = {System.HESTER: ("alpha", "mu", "kappa", "gamma"), System.CORBEILLER: ("a", "b")}


def g17(v) -> str:
    return format(float(v), ".17g")


def _dump_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def read_config(path) -> dict:
    """Flat ``key = value`` file; blank lines and ``#`` comments ignored."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _params(args):
    system = System(args.system)
    vals = {}
    for name in PARAM_NAMES[system]:
        v = getattr(args, name, None)
        if v is None:
            raise ValidationError(f"--{name} is required for the {system.value} system")
        vals[name] = v
    return system, params_from_dict(system, vals)


# ------------------------------------------------------------ commands

def cmd_simulate(args):
    system, p = _params(args)
    if not args.t_end > 0:
        raise ValidationError("--t-end must be positive")
    f = normalized_field(system, p, args.eps)
    c = rescaling_exponent(system, p) / args.eps
    cfg = IntegratorConfig.for_eps(args.eps, rtol=args.rtol, atol=args.rtol * 1e-3, max_steps=args.max_steps)
    ev = [EventSpec("switch_down", lambda s: s[1], Direction.FALLING),
          EventSpec("switch_up", lambda s: s[1], Direction.RISING)]
    if args.time == "original":
        # carry t along (dt/dt1 = sigma(c y)) and stop when it reaches t_end
        def f3(s):
            dx, dy = f(s)
            return (dx, dy, sigma(c * s[1]))
        t_end = args.t_end
        ev.append(EventSpec("t_end", lambda s: s[2] - t_end, Direction.RISING, terminal=True))
        # march in bounded t1 chunks: the underflow floor scales with the span
        times, states, events = [0.0], [(args.x0, args.y0, 0.0)], []
        chunk, steps = 1000.0, 0
        while not any(e.event_id == "t_end" for e in events):
            if steps >= args.max_steps:
                raise IntegrationFailure("original time did not reach --t-end within --max-steps")
            t0 = times[-1]
            part = integrate(f3, states[-1], (t0, t0 + chunk), cfg, ev)
            steps += len(part.times)
            off = len(times) - 1
            events += [Event(e.index + off, e.event_id, e.t, e.state) for e in part.events]
            times += part.times[1:]
            states += part.states[1:]
        tr = Trajectory(times, states, events)
        t1 = tr.times
        tr = Trajectory([s[2] for s in tr.states], [s[:2] for s in tr.states],
                        [Event(e.index, e.event_id, e.state[2], e.state[:2]) for e in tr.events
                         if e.event_id != "t_end"])
    else:
        tr = integrate(f, (args.x0, args.y0), (0.0, args.t_end), cfg, ev)
        t1 = tr.times
    tr.to_csv(args.out)
    eq = equilibrium(system, p, args.eps)
    _dump_json({
        "system": system.value, "params": asdict(p), "eps": args.eps,
        "t_end": args.t_end, "time": args.time, "t1_end": t1[-1],
        "equilibrium": list(eq), "final_state": list(tr.final), "n_points": len(tr.times),
        "events": [{"id": e.event_id, "t": e.t, "state": list(e.state)} for e in tr.events],
    }, args.summary)
    return EXIT_OK


def _section(args):
    return cycles.SectionSpec(args.delta, args.crossing)


def cmd_cycle(args):
    system, p = _params(args)
    cyc = cycles.find_cycle(system, p, args.eps, _section(args))
    _dump_json(cyc.to_json(), args.out)
    return EXIT_OK


def cmd_singular(args):
    system, p = _params(args)
    sc = singular.singular_cycle(system, p)
    _dump_json(sc.to_json(), args.out)
    if args.blown_up:
        if system is not System.CORBEILLER:
            raise ValidationError("blown-up segments exist for the corbeiller system only")
        with open(args.blown_up, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["segment", "chart", "c0", "c1", "c2", "c3"])
            for label, chart, pts in charts.blown_up_singular_segments(p):
                for row in pts:
                    vals = [g17(v) for v in row] + [""] * (4 - len(row))
                    w.writerow([label, chart.value] + vals)
    return EXIT_OK


def cmd_manifold(args):
    system, p = _params(args)
    if args.n < 2:
        raise ValidationError("--n must be at least 2")
    xs = np.linspace(args.x_min, args.x_max, args.n)
    rows = slowmf.manifold_samples(system, p, args.eps, xs, args.order)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "order"])
        for x, y, order in rows:
            w.writerow([g17(x), g17(y), order])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_charts_verify(args):
    system, p = _params(args)
    if system is not System.CORBEILLER:
        raise ValidationError("the chart catalog covers the corbeiller system only")
    rep = charts.verify_charts(p, seed=args.seed, n_points=args.n_points)
    _dump_json(rep, args.out)
    for c in rep["failed"]:
        print(f"FAILED {c['check']} [{c['chart']}] {c['detail']} at {c['point']}: "
              f"{c['worst']:.3e} > {c['tol']:.0e}", file=sys.stderr)
    for c in rep["lemma_discrepancies"]:
        print(f"note: stated {c['check']} differs from the field [{c['chart']}] at {c['point']}: "
              f"{c['worst']:.3e}", file=sys.stderr)
    return EXIT_OK if rep["ok"] else EXIT_NUMERIC


def _parse_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad number list {text!r}") from exc


def cmd_converge(args):
    system, p = _params(args)
    rep = cycles.convergence_study(system, p, _parse_list(args.eps_list), _section(args))
    if args.out == "-":
        rep.to_csv(sys.stdout)
    else:
        rep.to_csv(args.out)
    for e, msg in rep.errors.items():
        print(f"eps={e}: {msg}", file=sys.stderr)
    return EXIT_NUMERIC if rep.errors else EXIT_OK


# --------------------------------------------------------------- sweep

def parse_grid(text) -> list:
    """``v`` | ``v1,v2,...`` | ``start:stop:n`` (n points, both ends included)."""
    text = str(text)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"grid {text!r} must be start:stop:n")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ValidationError(f"bad grid {text!r}") from exc
        if n < 1:
            raise ValidationError(f"grid {text!r} needs n >= 1")
        return [lo] if n == 1 else [float(v) for v in np.linspace(lo, hi, n)]
    return _parse_list(text)


def _sweep_point(task):
    index, system, pdict, eps, opts = task
    row = {"index": index, **pdict, "eps": eps, "classification": None, "fixed_point_x": None,
           "period": None, "hausdorff": None, "floquet": None, "error": None}
    try:
        p = params_from_dict(system, pdict)
        cls = cycles.classify_existence(system, p, eps, opts["ball_radius"], opts["n_seeds"], opts["seed"],
                                        opts["t_budget"])
        row["classification"] = cls.value
        if cls is cycles.Existence.CYCLE_FOUND:
            cyc = cycles.find_cycle(system, p, eps, cycles.auto_section(system, p, eps))
            row["fixed_point_x"] = cyc.fixed_point_x
            row["period"] = cyc.period_original
            row["floquet"] = cyc.floquet
            row["hausdorff"] = singular.hausdorff_distance(cyc.points, singular.singular_cycle(system, p))
    except (ExoscError, ValueError, ArithmeticError) as exc:
        row["classification"] = row["classification"] or cycles.Existence.INDETERMINATE.value
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _threads():
    raw = os.environ.get("EXOSC_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValidationError(f"EXOSC_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ValidationError("EXOSC_THREADS must be >= 1")
    return n


def cmd_sweep(args):
    system = System(args.system)
    names = PARAM_NAMES[system]
    axes = []
    for name in names:
        v = getattr(args, name, None)
        if v is None:
            raise ValidationError(f"--{name} is required for the {system.value} system")
        axes.append(parse_grid(v))
    eps_axis = parse_grid(args.eps)
    grid = []
    for combo in np.ndindex(*[len(a) for a in axes], len(eps_axis)):
        pdict = {n: axes[i][combo[i]] for i, n in enumerate(names)}
        grid.append((pdict, eps_axis[combo[-1]]))
    for pdict, _ in grid:
        params_from_dict(system, pdict)     # validate the whole grid before running anything

    journal = args.journal or (args.out + ".journal")
    done = {}
    if os.path.exists(journal):
        with open(journal) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    row = json.loads(line)
                    done[row["index"]] = row
    opts = {"ball_radius": args.ball_radius, "n_seeds": args.n_seeds, "seed": args.seed, "t_budget": args.t_budget}
    todo = [(i, system.value, pd, e, opts) for i, (pd, e) in enumerate(grid) if i not in done]
    n_workers = min(_threads(), max(1, len(todo)))
    with open(journal, "a") as jf:
        def record(row):
            jf.write(json.dumps(row, sort_keys=True) + "\n")
            jf.flush()
            done[row["index"]] = row
        if n_workers == 1:
            for t in todo:
                record(_sweep_point(t))
        else:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                for row in pool.map(_sweep_point, todo):
                    record(row)

    cols = ["index", *names, "eps", "classification", "fixed_point_x", "period", "hausdorff", "floquet", "error"]
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["# seed", args.seed])
        w.writerow(cols)
        for i in range(len(grid)):
            row = done[i]
            w.writerow([_cell(row.get(c)) for c in cols])
    finally:
        if fh is not sys.stdout:
            fh.close()
    failed = [r for r in done.values() if r.get("error")]
    for r in failed:
        print(f"point {r['index']}: {r['error']}", file=sys.stderr)
    return EXIT_PARTIAL if failed else EXIT_OK


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return g17(v)
    return v


# -------------------------------------------------------------- parser

def _system_opts(sp, eps=True, eps_type=float):
    sp.add_argument("--config", help="flat key = value file; flags override it")
    sp.add_argument("--system", choices=[s.value for s in System], required=False)
    for name in ("alpha", "mu", "kappa", "gamma", "a", "b"):
        sp.add_argument(f"--{name}", type=eps_type)
    if eps:
        sp.add_argument("--eps", type=eps_type)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="exosc", description="Exponential relaxation oscillators: simulation, "
                                 "cycles, slow manifolds and blow-up chart checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="integrate the normalized field and write a trajectory CSV")
    _system_opts(sp)
    sp.add_argument("--x0", type=float, default=1.0)
    sp.add_argument("--y0", type=float, default=-1.0)
    sp.add_argument("--t-end", type=float, default=60.0, help="end time, in the unit chosen by --time")
    sp.add_argument("--time", choices=["original", "rescaled"], default="original",
                    help="original time t, or the rescaled time t1 of the normalized field")
    sp.add_argument("--rtol", type=float, default=1e-9)
    sp.add_argument("--max-steps", type=int, default=5_000_000)
    sp.add_argument("--out", default="trajectory.csv")
    sp.add_argument("--summary", default="summary.json")
    sp.set_defaults(func=cmd_simulate)

    for name, func, hlp in (("cycle", cmd_cycle, "locate the limit cycle on a section"),
                            ("converge", cmd_converge, "cycles across a decreasing eps ladder")):
        sp = sub.add_parser(name, help=hlp)
        _system_opts(sp, eps=name == "cycle")
        sp.add_argument("--delta", type=float, default=0.1)
        sp.add_argument("--crossing", choices=[c.value for c in cycles.Crossing], default="descending")
        if name == "converge":
            sp.add_argument("--eps-list", default="0.1,0.05,0.02,0.01")
        sp.add_argument("--out", default=f"{name}.{'json' if name == 'cycle' else 'csv'}")
        sp.set_defaults(func=func)

    sp = sub.add_parser("singular", help="singular cycle as polylines (JSON)")
    _system_opts(sp, eps=False)
    sp.add_argument("--out", default="singular.json")
    sp.add_argument("--blown-up", help="also write the blown-up segments (corbeiller) to this CSV")
    sp.set_defaults(func=cmd_singular)

    sp = sub.add_parser("manifold", help="sample the slow manifold graph")
    _system_opts(sp)
    sp.add_argument("--x-min", type=float, required=False, default=-1.0)
    sp.add_argument("--x-max", type=float, required=False, default=-0.1)
    sp.add_argument("--n", type=int, default=50)
    sp.add_argument("--order", choices=[o.value for o in slowmf.Order], default="leading")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_manifold)

    sp = sub.add_parser("charts-verify", help="run the chart invariant suite")
    _system_opts(sp, eps=False)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n-points", type=int, default=100)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_charts_verify)

    sp = sub.add_parser("sweep", help="classify existence over a parameter grid")
    _system_opts(sp, eps_type=str)
    sp.add_argument("--ball-radius", type=float, default=5.0)
    sp.add_argument("--n-seeds", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--t-budget", type=float, default=2000.0)
    sp.add_argument("--out", default="sweep.csv")
    sp.add_argument("--journal", help="resume journal (default: <out>.journal)")
    sp.set_defaults(func=cmd_sweep)
    return ap


def _apply_config(parser, argv):
    """Parse argv with defaults taken from --config, if given."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    args = parser.parse_args(argv)
    if not known.config:
        return args
    cfg = read_config(known.config)
    sp = parser._subparsers._group_actions[0].choices[args.command]
    dests = {a.dest: a for a in sp._actions if a.dest not in ("help", "config")}
    unknown = sorted(set(cfg) - set(dests))
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
    converted = {}
    for k, v in cfg.items():
        act = dests[k]
        try:
            converted[k] = act.type(v) if act.type else v
        except ValueError as exc:
            raise ValidationError(f"config {k}: {exc}") from exc
        if act.choices is not None and converted[k] not in act.choices:
            raise ValidationError(f"config {k}: {v!r} not in {sorted(act.choices)}")
    sp.set_defaults(**converted)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if getattr(args, "system", None) is None:
            raise ValidationError("--system is required (on the command line or in --config)")
        if hasattr(args, "eps") and args.eps is None:
            raise ValidationError("--eps is required")
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ExoscError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
