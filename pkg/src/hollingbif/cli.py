"""Command line front end.

    hollingbif equilibria --alpha 1 --beta 1 --delta 1 --lambda 1 --mu 1 --format json
    hollingbif scenario --out scenario.json
    hollingbif audit --draws 200 --seed 42 --workers 4

Exit codes: 0 ok, 1 configuration error, 2 degenerate or negative finding,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import continuation as cont
from .cycles import NoiseDominated, QuadratureFailure
from .equilibria import (ContourThroughSingularity, DegenerateAtInfinity, NonIntegerWinding,
                         find_finite, find_infinite)
from .fixtures import SCENARIO_BASE
from .flow import StepSizeUnderflow, integrate
from .vectorfield import InvalidParameter, SystemParams

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_NUMERICAL = 0, 1, 2, 3

PARAM_FLAGS = ("alpha", "beta", "delta", "lambda", "mu", "gamma")
FORMATS = {
    "equilibria": ("json", "csv"),
    "cycles": ("json", "csv"),
    "continue": ("csv", "json"),
    "scenario": ("json",),
    "audit": ("json",),
    "portrait": ("svg",),
}
DEFAULTS = {
    "gamma": 0.0,
    "format": None,
    "out": None,
    "seed": 0,
    "draws": 200,
    "workers": 1,
    "parameter": "gamma",
    "stop": None,
    "cycle": 0,
    "scan": 60,
    "budget": 600.0,
}
INT_KEYS = ("seed", "draws", "workers", "cycle", "scan")
FLOAT_KEYS = PARAM_FLAGS + ("stop", "budget")
EQUILIBRIA_HEADER = ["x", "y", "kind", "index", "re_eig1", "im_eig1", "re_eig2", "im_eig2"]
NUMERICAL = (StepSizeUnderflow, QuadratureFailure, NoiseDominated, NonIntegerWinding,
             ContourThroughSingularity, FloatingPointError, ZeroDivisionError,
             np.linalg.LinAlgError)


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hollingbif", description="Limit cycles of a quartic predator-prey field.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in FORMATS:
        sp = sub.add_parser(name)
        for p in PARAM_FLAGS:
            sp.add_argument(f"--{p}", dest=p, type=float, default=None)
        sp.add_argument("--format", default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--draws", type=int, default=None)
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--config", default=None)
        if name == "continue":
            sp.add_argument("--parameter", default=None)
            sp.add_argument("--stop", type=float, default=None)
            sp.add_argument("--cycle", type=int, default=None)
        if name in ("cycles", "continue"):
            sp.add_argument("--scan", type=int, default=None)
        if name == "scenario":
            sp.add_argument("--budget", type=float, default=None)
    return parser


# ---------------------------------------------------------------- config

def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be an object")
    return data


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags > config file > defaults and type-check the result."""
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    cfg = _load_config(args.config) if args.config else {}
    known = set(flags)
    for key in cfg:
        if key not in known:
            raise ConfigError(f"config: unknown field {key!r} for command {args.command}")
    merged = {}
    for key in known:
        if flags[key] is not None:
            merged[key] = flags[key]
        elif key in cfg:
            merged[key] = cfg[key]
        else:
            merged[key] = DEFAULTS.get(key)
    for key in INT_KEYS:
        v = merged.get(key)
        if key in known and v is not None and (isinstance(v, bool) or not isinstance(v, int)):
            raise ConfigError(f"{key}: expected an integer, got {v!r}")
    for key in FLOAT_KEYS:
        v = merged.get(key)
        if key in known and v is not None and (isinstance(v, bool) or not isinstance(v, (int, float))):
            raise ConfigError(f"{key}: expected a number, got {v!r}")
    fmt = merged.get("format") or FORMATS[args.command][0]
    if fmt not in FORMATS[args.command]:
        raise ConfigError(f"format: {fmt!r} not available for {args.command} "
                          f"(choose from {', '.join(FORMATS[args.command])})")
    merged["format"] = fmt
    if merged.get("workers") is not None and merged["workers"] < 1:
        raise ConfigError("workers: must be >= 1")
    if merged.get("draws") is not None and merged["draws"] < 0:
        raise ConfigError("draws: must be >= 0")
    return merged


def params_from(cfg: dict, required=("alpha", "beta", "delta", "lambda", "mu"),
                fallback: SystemParams | None = None) -> SystemParams:
    vals = {}
    for name in PARAM_FLAGS:
        v = cfg.get(name)
        if v is None and fallback is not None:
            v = fallback.to_dict()[name]
        if v is None:
            if name in required:
                raise ConfigError(f"{name}: missing required parameter --{name}")
            continue
        vals[name] = v
    try:
        return SystemParams.from_dict(vals)
    except InvalidParameter as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------- serialization

def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _eig_pair(eig):
    e = list(eig) + [complex("nan")] * (2 - len(eig))
    return [complex(e[0]).real, complex(e[0]).imag, complex(e[1]).real, complex(e[1]).imag]


def _params_json(p: SystemParams) -> dict:
    return {k: _num(v) for k, v in p.to_dict().items()}


def cycle_json(c) -> dict:
    pt = c.point
    return {
        "anchor": [_num(c.section.anchor[0]), _num(c.section.anchor[1])],
        "s_star": _num(c.s_star),
        "x": _num(pt[0]),
        "y": _num(pt[1]),
        "period": _num(c.period),
        "stability": c.stability,
        "multiplicity": int(c.multiplicity_estimate),
        "multiplicity_flag": c.multiplicity_flag,
        "d_s": _num(c.d_s_value),
        "closure": _num(c.closure),
        "amplitude": _num(c.amplitude),
    }


def fold_json(f) -> dict:
    return {
        "value": _num(f.value),
        "s_star": _num(f.s_star),
        "multiplicity": int(f.multiplicity),
        "flag": f.flag,
        "counts": [int(f.counts[0]), int(f.counts[1])],
        "closure": _num(f.closure),
    }


# ---------------------------------------------------------------- commands

def cmd_equilibria(cfg):
    p = params_from(cfg)
    finite = find_finite(p)
    degenerate = any(e.degenerate for e in finite)
    try:
        infinite = find_infinite(p)
        inf_note = ""
    except DegenerateAtInfinity as exc:
        infinite, inf_note, degenerate = [], str(exc), True
    records, rows = [], []
    for e in finite:
        eig = _eig_pair(e.eigenvalues)
        records.append({
            "x": _num(e.location[0]), "y": _num(e.location[1]), "at_infinity": False,
            "kind": e.kind, "index": int(e.index),
            "eigenvalues": [[_num(eig[0]), _num(eig[1])], [_num(eig[2]), _num(eig[3])]],
            "in_open_first_quadrant": bool(e.in_open_first_quadrant),
            "degenerate": bool(e.degenerate),
        })
        rows.append([float(e.location[0]), float(e.location[1]), e.kind, int(e.index)] + eig)
    for q in infinite:
        if q.direction == "y-axis ends":
            ux, uy = 0.0, 1.0
        else:
            n = math.hypot(1.0, q.direction)
            ux, uy = 1.0 / n, q.direction / n
        eig = _eig_pair(q.chart_eigenvalues)
        records.append({
            "x": _num(ux), "y": _num(uy), "at_infinity": True,
            "kind": q.kind, "index": int(q.index), "multiplicity": int(q.multiplicity),
            "eigenvalues": [[_num(eig[0]), _num(eig[1])], [_num(eig[2]), _num(eig[3])]],
        })
        rows.append([ux, uy, f"infinite-{q.kind}", int(q.index)] + eig)
    if cfg["format"] == "csv":
        text = _csv_text(EQUILIBRIA_HEADER, rows)
    else:
        text = _dump_json(records)
    if inf_note:
        print(f"note: {inf_note}", file=sys.stderr)
    return text, EXIT_DEGENERATE if degenerate else EXIT_OK


def _all_cycles(p, n_scan):
    out = []
    degenerate = False
    for a in find_finite(p):
        if not (a.in_open_first_quadrant and a.is_antisaddle):
            continue
        if a.degenerate or a.kind == "center-candidate":
            degenerate = True
        for c in cont.cycles_around(p, a.location, n_scan, multiplicity=True):
            out.append(c)
    return out, degenerate


def cmd_cycles(cfg):
    p = params_from(cfg)
    cycles, degenerate = _all_cycles(p, cfg["scan"])
    if cfg["format"] == "csv":
        header = ["anchor_x", "anchor_y", "s_star", "x", "y", "period", "stability",
                  "multiplicity", "d_s", "closure"]
        rows = [[c.section.anchor[0], c.section.anchor[1], c.s_star, c.point[0], c.point[1],
                 c.period, c.stability, int(c.multiplicity_estimate), c.d_s_value, c.closure]
                for c in cycles]
        text = _csv_text(header, rows)
    else:
        text = _dump_json({"params": _params_json(p), "cycles": [cycle_json(c) for c in cycles]})
    return text, EXIT_DEGENERATE if degenerate else EXIT_OK


def cmd_continue(cfg):
    p = params_from(cfg)
    name = cfg["parameter"]
    if name not in cont.CONTINUABLE:
        raise ConfigError(f"parameter: must be one of {', '.join(cont.CONTINUABLE)}, got {name!r}")
    cycles, _ = _all_cycles(p, cfg["scan"])
    if not cycles:
        print("no limit cycle to continue", file=sys.stderr)
        return "", EXIT_DEGENERATE
    k = cfg["cycle"]
    if not 0 <= k < len(cycles):
        raise ConfigError(f"cycle: index {k} out of range (found {len(cycles)} cycles)")
    start = float(getattr(p, name))
    stop = cfg["stop"] if cfg["stop"] is not None else start + 0.3
    if name == "alpha" and stop < 0:
        raise ConfigError("stop: alpha must stay >= 0")
    branch = cont.continue_branch(p, cycles[k], name, stop)
    if cfg["format"] == "json":
        text = _dump_json({
            "params": _params_json(p),
            "parameter": name,
            "points": [{"value": _num(v), "s_star": _num(s), "period": _num(T), "d_s": _num(d)}
                       for v, s, T, d in branch.points],
            "folds": [fold_json(f) for f in branch.folds],
            "termination": branch.termination,
        })
    else:
        rows = [["point", name, v, s, T, d, ""] for v, s, T, d in branch.points]
        rows += [["fold", name, f.value, f.s_star, "", "", f"multiplicity={f.multiplicity}"]
                 for f in branch.folds]
        rows.append(["end", name, "", "", "", "", branch.termination])
        text = _csv_text(["row", "parameter", "value", "s_star", "period", "d_s", "note"], rows)
    return text, EXIT_OK


def scenario_json(rec) -> dict:
    return {
        "base": {k: _num(v) for k, v in rec.base.to_dict().items() if k in ("delta", "lambda", "mu")},
        "alpha_direction": int(rec.alpha_direction),
        "hopf_beta": _num(rec.hopf_beta),
        "outer_birth": {k: _num(v) for k, v in rec.outer_birth.items()},
        "stages": [{
            "stage": s.name,
            "params": _params_json(s.params),
            "anchor": None if s.anchor is None else [_num(s.anchor[0]), _num(s.anchor[1])],
            "cycles": [cycle_json(c) for c in s.cycles],
            "note": s.note,
        } for s in rec.stages],
        "fold": fold_json(rec.fold),
        "branch": [{"alpha": _num(v), "s_star": _num(s), "period": _num(T), "d_s": _num(d)}
                   for v, s, T, d in rec.branch.points],
        "trace": list(rec.trace),
    }


def cmd_scenario(cfg):
    base = params_from(cfg, required=(), fallback=SCENARIO_BASE)
    try:
        rec = cont.reproduce_two_cycle_scenario(base, budget=cfg["budget"])
    except cont.ScenarioNotFound as exc:
        return _dump_json({"status": "not-found", "reason": str(exc), "trace": exc.trace}), EXIT_DEGENERATE
    return _dump_json(scenario_json(rec)), EXIT_OK


def audit_json(rep) -> dict:
    return {
        "seed": rep.seed,
        "draws": rep.draws,
        "ranges": {k: [_num(a), _num(b)] for k, (a, b) in rep.ranges.items()},
        "max_nested_cycles_observed": rep.max_nested_cycles_observed,
        "violations": [{k: _num(v) for k, v in d.items()} for d in rep.violations],
        "records": [{
            "index": r.index,
            "params": {k: _num(v) for k, v in r.params.items()},
            "antisaddles": r.antisaddles,
            "counts": list(r.counts),
            "stabilities": [list(s) for s in r.stabilities],
            "alternation_ok": bool(r.alternation_ok),
            "verified": bool(r.verified),
        } for r in rep.records],
    }


def cmd_audit(cfg):
    rep = cont.audit_max_cycles(cfg["draws"], cfg["seed"], workers=cfg["workers"])
    return _dump_json(audit_json(rep)), EXIT_DEGENERATE if rep.violations else EXIT_OK


def cmd_portrait(cfg):
    p = params_from(cfg)
    return render_portrait(p), EXIT_OK


COMMANDS = {
    "equilibria": cmd_equilibria,
    "cycles": cmd_cycles,
    "continue": cmd_continue,
    "scenario": cmd_scenario,
    "audit": cmd_audit,
    "portrait": cmd_portrait,
}


# ---------------------------------------------------------------- SVG

WIDTH, HEIGHT, MARGIN = 640, 640, 40
COLORS = {"stable": "#1f4e9c", "unstable": "#c0392b", "semistable": "#7d3c98"}


def _window(p, finite, cycles):
    xs = [1.0 / p.lam] + [e.location[0] for e in finite if e.in_open_first_quadrant]
    ys = [1.0] + [e.location[1] for e in finite if e.in_open_first_quadrant]
    for c in cycles:
        xs.append(float(np.max(c.orbit_samples[:, 0])))
        ys.append(float(np.max(c.orbit_samples[:, 1])))
    return 1.15 * max(xs), 1.15 * max(ys)


def render_portrait(p: SystemParams, n_grid: int = 5, t_max: float = 40.0) -> str:
    finite = find_finite(p)
    cycles, _ = _all_cycles(p, 60)
    xmax, ymax = _window(p, finite, cycles)
    sx = (WIDTH - 2 * MARGIN) / xmax
    sy = (HEIGHT - 2 * MARGIN) / ymax

    def px(x, y):
        return f"{MARGIN + x * sx:.3f},{HEIGHT - MARGIN - y * sy:.3f}"

    def polyline(xy, limit=600):
        step = max(1, len(xy) // limit)
        pts = xy[::step]
        inside = (pts[:, 0] >= 0) & (pts[:, 0] <= xmax) & (pts[:, 1] >= 0) & (pts[:, 1] <= ymax)
        return " ".join(px(x, y) for x, y in pts[inside])

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        "<title>phase portrait "
        + " ".join(f"{k}={v!r}" for k, v in p.to_dict().items()) + "</title>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<g class="axes" stroke="black" stroke-width="1">'
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}"/>'
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}"/></g>',
        f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 16}" font-size="11" '
        f'text-anchor="end">x = {xmax:.4g}</text>',
        f'<text x="{MARGIN - 4}" y="{MARGIN - 6}" font-size="11">y = {ymax:.4g}</text>',
        '<g class="trajectories" fill="none" stroke="#999999" stroke-width="0.6">',
    ]
    for i in range(n_grid):
        for j in range(n_grid):
            x0 = xmax * (i + 0.5) / n_grid
            y0 = ymax * (j + 0.5) / n_grid
            try:
                orb = integrate(p, (x0, y0), t_max, record=4000)
            except (StepSizeUnderflow, ValueError):
                continue
            line = polyline(orb.z)
            if line:
                out.append(f'<polyline class="trajectory" points="{line}"/>')
    out.append("</g>")
    out.append('<g class="cycles" fill="none" stroke-width="2">')
    for c in cycles:
        step = max(1, len(c.orbit_samples) // 800)
        pts = c.orbit_samples[::step]
        d = "M " + " L ".join(px(x, y) for x, y in pts) + " Z"
        out.append(f'<path class="cycle {c.stability}" stroke="{COLORS.get(c.stability, "black")}" '
                   f'd="{d}"/>')
    out.append("</g>")
    out.append('<g class="equilibria">')
    for e in finite:
        x, y = e.location
        if not (0 <= x <= xmax and 0 <= y <= ymax):
            continue
        cx, cy = (float(v) for v in px(x, y).split(","))
        if e.kind == "saddle":
            out.append(f'<path class="saddle" stroke="black" stroke-width="1.5" '
                       f'd="M {cx - 5:.3f},{cy - 5:.3f} L {cx + 5:.3f},{cy + 5:.3f} '
                       f'M {cx - 5:.3f},{cy + 5:.3f} L {cx + 5:.3f},{cy - 5:.3f}"/>')
        else:
            cls = "antisaddle" if (e.is_antisaddle and e.in_open_first_quadrant) else "equilibrium"
            fill = "black" if e.trace < 0 else "white"
            out.append(f'<circle class="{cls} {e.kind}" cx="{cx:.3f}" cy="{cy:.3f}" r="4" '
                       f'fill="{fill}" stroke="black"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- entry

def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise ConfigError("missing command (equilibria, cycles, continue, scenario, audit, portrait)")
        cfg = resolve(args)
        text, code = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    try:
        _emit(text, cfg["out"])
    except OSError as exc:
        print(f"error: out: cannot write {cfg['out']}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
