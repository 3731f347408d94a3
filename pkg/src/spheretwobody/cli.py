"""Command-line front end.

Subcommands: simulate, verify-collision, topology, blowup, version.  Each
command builds an effective configuration from built-in defaults, an
optional JSON file (``--config``) and explicit flags, in increasing order of
precedence; validates it against the command's JSON schema; runs; and
writes CSV data plus a JSON sidecar that echoes the effective config.

Exit codes: 0 success, 1 a verification verdict failed, 2 invalid
configuration, 3 integration failure, 4 insufficient collision tail.
Errors are reported on stderr as one JSON object per line.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .core import Chart, DomainError, LevelSet

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_INTEGRATION, EXIT_TAIL = 0, 1, 2, 3, 4

SYSTEMS = ["poly", "reduced", "regularised", "full", "invariant-plane", "invariant-plane-q",
           "invariant-plane-reg", "invariant-plane-blowup", "chart1", "chart2"]

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_OUT = {"type": "string", "minLength": 1}

SCHEMAS: dict[str, dict] = {
    "simulate": {
        "type": "object",
        "additionalProperties": False,
        "required": ["system", "t", "out"],
        "properties": {
            "system": {"enum": SYSTEMS},
            "state": {"type": "array", "items": _NUM},
            "m": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
            "xi": _NUM, "q": _NUM, "p": _NUM, "eta": _NUM, "zeta": _NUM,
            "C": {"type": "number", "minimum": 0},
            "sign": {"enum": ["+", "-"]},
            "masses": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
            "t": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
            "rel_tol": _POS, "abs_tol": _POS, "xi_threshold": {"type": "number", "exclusiveMinimum": 1},
            "max_steps": {"type": "integer", "minimum": 1},
            "out": _OUT,
            "plot": {"type": "boolean"},
        },
    },
    "verify-collision": {
        "type": "object",
        "additionalProperties": False,
        "required": ["out"],
        "properties": {
            "seeds": {"type": "array", "items": {"type": "string"}},
            "state": {"type": "array", "items": _NUM, "minItems": 5, "maxItems": 5},
            "plane": {"type": "object", "additionalProperties": False, "required": ["C", "sign"],
                      "properties": {"C": {"type": "number", "minimum": 0}, "sign": {"enum": ["+", "-"]},
                                     "xi": _NUM, "p": _NUM}},
            "negative_control": {"type": "boolean"},
            "t_max": _POS,
            "jobs": {"type": "integer", "minimum": 1},
            "out": _OUT,
        },
    },
    "topology": {
        "type": "object",
        "additionalProperties": False,
        "required": ["out"],
        "properties": {
            "h": _NUM,
            "C": {"type": "number", "minimum": 0},
            "grid": {"type": "object", "additionalProperties": False, "required": ["h", "C"],
                     "properties": {k: {"type": "array", "minItems": 3, "maxItems": 3, "items": _NUM}
                                    for k in ("h", "C")}},
            "region_mask": {"type": "string"},
            "mask_resolution": {"type": "integer", "minimum": 16},
            "cross_check": {"type": "boolean"},
            "jobs": {"type": "integer", "minimum": 1},
            "out": _OUT,
            "plot": {"type": "boolean"},
        },
    },
    "blowup": {
        "type": "object",
        "additionalProperties": False,
        "required": ["chart", "out"],
        "properties": {
            "chart": {"enum": ["1", "2", "invariant-plane"]},
            "C": {"type": "number", "minimum": 0},
            "sign": {"enum": ["+", "-"]},
            "m": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
            "resolution": {"type": "integer", "minimum": 32},
            "portrait_resolution": {"type": "integer", "minimum": 32},
            "out": _OUT,
            "plot": {"type": "boolean"},
        },
    },
}

DEFAULTS: dict[str, dict] = {
    "simulate": {"t": [0.0, 10.0], "out": "run", "sign": "+", "masses": [1.0, 1.0],
                 "rel_tol": 1e-10, "abs_tol": 1e-12, "xi_threshold": 1e6, "plot": False},
    "verify-collision": {"negative_control": False, "t_max": 100.0, "jobs": 1, "out": "collision"},
    "topology": {"mask_resolution": 201, "cross_check": False, "jobs": 1, "out": "topology",
                 "plot": False},
    "blowup": {"C": 1.0, "sign": "+", "m": [1.0, 1.0], "resolution": 2000,
               "portrait_resolution": 200, "out": "blowup", "plot": False},
}


class ConfigError(ValueError):
    """The effective configuration violates the command's schema or an input invariant."""


def _fail(kind: str, message: str, code: int, **extra) -> int:
    rec = {"error": kind, "message": message}
    rec.update(extra)
    print(json.dumps(rec, sort_keys=True, default=str), file=sys.stderr)
    return code


# --- Flag parsing helpers ---

def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _span(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected t0:t1, got {text!r}")
    return [float(parts[0]), float(parts[1])]


def _grid(items: list[str]) -> dict:
    out = {}
    for item in items:
        key, _, rng = item.partition("=")
        parts = rng.split(":")
        if key not in ("h", "C") or len(parts) != 3:
            raise ConfigError(f"grid axis must look like h=lo:hi:n or C=lo:hi:n, got {item!r}")
        lo, hi, n = float(parts[0]), float(parts[1]), float(parts[2])
        out[key] = [lo, hi, n]
    return out


def _sign(text: str) -> str:
    t = text.strip()
    if t in ("+", "+1", "1"):
        return "+"
    if t in ("-", "-1"):
        return "-"
    raise argparse.ArgumentTypeError(f"sign must be + or -, got {text!r}")


def effective_config(command: str, flags: dict, config_path: str | None) -> dict:
    """Defaults, then the JSON file, then explicit flags; validated against the schema."""
    cfg = dict(DEFAULTS[command])
    if config_path:
        try:
            data = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {config_path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update(data)
    cfg.update({k: v for k, v in flags.items() if v is not None})
    try:
        jsonschema.validate(cfg, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "(root)"
        raise ConfigError(f"{where}: {exc.message}") from exc
    return cfg


def _sidecar(command: str, cfg: dict, **fields) -> dict:
    from .io import config_hash
    rec = {"command": command, "version": __version__, "config": cfg, "config_hash": config_hash(cfg)}
    rec.update(fields)
    return rec


# --- simulate ---

_STATE_KEYS = {
    "poly": ("m", "xi", "p"), "reduced": ("m", "q", "p"), "regularised": ("m", "eta", "zeta"),
    "invariant-plane": ("xi", "p"), "invariant-plane-q": ("q", "p"), "invariant-plane-reg": ("eta", "zeta"),
}


def initial_state(cfg: dict) -> np.ndarray:
    if "state" in cfg:
        return np.array(cfg["state"], float)
    keys = _STATE_KEYS.get(cfg["system"])
    if keys is None:
        raise ConfigError(f"system {cfg['system']} needs an explicit 'state'")
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"system {cfg['system']} needs {', '.join(missing)} (or 'state')")
    out = []
    for k in keys:
        out.extend(cfg[k] if k == "m" else [cfg[k]])
    return np.array(out, float)


def cmd_simulate(cfg: dict) -> int:
    from .core import Masses
    from .integrate import IntegrationError, IntegratorConfig, integrate, make_system
    from .io import write_csv, write_json

    try:
        sign = 1 if cfg["sign"] == "+" else -1
        system = make_system(cfg["system"], Masses(*cfg["masses"]), cfg.get("C"), sign)
        y0 = initial_state(cfg)
        if y0.shape != (len(system.components),):
            raise ConfigError(f"{cfg['system']} needs {len(system.components)} state components")
        if system.validate is not None:
            system.validate(y0)
        icfg = IntegratorConfig(rel_tol=cfg["rel_tol"], abs_tol=cfg["abs_tol"],
                                xi_collision_threshold=cfg["xi_threshold"],
                                **({"max_steps": cfg["max_steps"]} if "max_steps" in cfg else {}))
    except (ConfigError, ValueError) as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    try:
        traj = integrate(system, y0, tuple(cfg["t"]), icfg)
    except IntegrationError as exc:
        return _fail("integration", str(exc), EXIT_INTEGRATION)
    out = Path(cfg["out"])
    header = ["t", *traj.components, "dH", "dC"]
    rows = (np.concatenate([[t], y, d]) for t, y, d in zip(traj.times, traj.states, traj.drift))
    write_csv(out.with_suffix(".csv"), header, rows)
    ev = traj.terminal_event
    write_json(out.with_suffix(".json"), _sidecar(
        "simulate", cfg, status=traj.status, steps=len(traj) - 1,
        invariants0=list(traj.invariants0),
        terminal_event=None if ev is None else {
            "kind": ev.kind, "t_star": ev.t_star, "terminal_state": list(ev.terminal_state),
            "extrapolation_order": ev.extrapolation_order, "beta": ev.beta,
            "t_star_stderr": ev.t_star_stderr, "fit_rms": ev.fit_rms}))
    if cfg["plot"]:
        return _plot(lambda p: p.plot_trajectory(traj.times, traj.states, traj.components,
                                                 out.with_suffix(".png")))
    return EXIT_OK


def _plot(fn) -> int:
    from . import plots
    try:
        fn(plots)
    except plots.PlottingUnavailableError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    return EXIT_OK


# --- verify-collision ---

def _battery_job(job: tuple) -> dict:
    """Run one battery; returns a record (picklable for process pools)."""
    from .collision import (COLLISION_CONFIG, NEGATIVE_CONTROL, InsufficientTailError,
                            collision_battery, run_collision)
    from .integrate import IntegrationError, integrate, make_system
    name, kind, payload, t_max, negative = job
    try:
        if kind == "plane":
            sign = 1 if payload["sign"] == "+" else -1
            traj = integrate(make_system("invariant-plane", C=payload["C"], sign=sign),
                             [payload.get("xi", 0.0), payload.get("p", 0.0)], (0.0, t_max),
                             COLLISION_CONFIG)
            if traj.status != "collision":
                raise InsufficientTailError(f"planar run did not collide (status {traj.status})")
        else:
            traj = run_collision(payload, COLLISION_CONFIG, t_max)
        rep = collision_battery(traj, name, COLLISION_CONFIG, NEGATIVE_CONTROL if negative else None)
        rec = rep.to_record()
        rec["seed"] = payload
        return rec
    except InsufficientTailError as exc:
        return {"name": name, "seed": payload, "error": "insufficient-tail", "message": str(exc)}
    except IntegrationError as exc:
        return {"name": name, "seed": payload, "error": "integration", "message": str(exc)}


def cmd_verify_collision(cfg: dict) -> int:
    from .collision import COLLISION_CONFIG, COLLISION_SEEDS
    from .io import write_json

    jobs = []
    if "plane" in cfg:
        jobs.append(("invariant-plane", "plane", cfg["plane"], cfg["t_max"], cfg["negative_control"]))
    if "state" in cfg:
        jobs.append(("state", "poly", list(cfg["state"]), cfg["t_max"], cfg["negative_control"]))
    names = cfg.get("seeds")
    if names is None and not jobs:
        names = list(COLLISION_SEEDS)
    for name in names or []:
        if name not in COLLISION_SEEDS:
            return _fail("config", f"unknown seed {name!r}; known: {', '.join(COLLISION_SEEDS)}",
                         EXIT_CONFIG)
        jobs.append((name, "poly", list(COLLISION_SEEDS[name]), cfg["t_max"], cfg["negative_control"]))
    if cfg["jobs"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            records = list(pool.map(_battery_job, jobs))
    else:
        records = [_battery_job(j) for j in jobs]
    icfg = {"rel_tol": COLLISION_CONFIG.rel_tol, "abs_tol": COLLISION_CONFIG.abs_tol,
            "xi_collision_threshold": COLLISION_CONFIG.xi_collision_threshold}
    out = Path(cfg["out"])
    write_json(out.with_suffix(".json"), _sidecar("verify-collision", cfg, integrator=icfg,
                                                   reports=records))
    code = EXIT_OK
    for rec in records:
        if rec.get("error") == "insufficient-tail":
            code = max(code, EXIT_TAIL)
            _fail("insufficient-tail", rec["message"], EXIT_TAIL, name=rec["name"])
        elif rec.get("error") == "integration":
            code = max(code, EXIT_INTEGRATION)
            _fail("integration", rec["message"], EXIT_INTEGRATION, name=rec["name"])
        elif not rec["pass"]:
            code = max(code, EXIT_FAILED)
            for v in rec["verdicts"]:
                if not v["pass"]:
                    _fail("verdict", v["name"], EXIT_FAILED, seed=rec["name"], record=v)
    return code


# --- topology ---

def _classify_cell(args: tuple) -> tuple:
    from .topology import classify_isoenergy, region_boundary_count
    h, C, cross = args
    r = classify_isoenergy(LevelSet(h, C))
    sampled = region_boundary_count(LevelSet(h, C)) if cross and C > 0 else None
    return (h, C, r.boundary_components, r.label.value, r.margin, r.near_degenerate, sampled)


def cmd_topology(cfg: dict) -> int:
    from .io import write_csv, write_json
    from .topology import sample_projection_region

    if "grid" in cfg:
        g = cfg["grid"]
        for k in ("h", "C"):
            if g[k][2] < 1 or g[k][2] != int(g[k][2]):
                return _fail("config", f"grid/{k}: point count must be a positive integer", EXIT_CONFIG)
        hs = np.linspace(g["h"][0], g["h"][1], int(g["h"][2]))
        Cs = np.linspace(g["C"][0], g["C"][1], int(g["C"][2]))
        if Cs.min() < 0:
            return _fail("config", "grid/C: Casimir values must be >= 0", EXIT_CONFIG)
        cells = [(float(h), float(C), cfg["cross_check"]) for C in Cs for h in hs]
    elif "h" in cfg and "C" in cfg:
        cells = [(float(cfg["h"]), float(cfg["C"]), cfg["cross_check"])]
    else:
        return _fail("config", "give either h and C or a grid", EXIT_CONFIG)
    if cfg["jobs"] > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            rows = list(pool.map(_classify_cell, cells, chunksize=max(1, len(cells) // (4 * cfg["jobs"]))))
    else:
        rows = [_classify_cell(c) for c in cells]
    out = Path(cfg["out"])
    header = ["h", "C", "holes", "label", "margin", "near_degenerate"]
    if cfg["cross_check"]:
        header.append("sampled_boundaries")
        body = rows
    else:
        body = [r[:-1] for r in rows]
    write_csv(out.with_suffix(".csv"), header, body)
    # Near-degenerate cells sit within sampling resolution of a critical level; the
    # pixel count there is not a reliable reference and is excluded from the verdict.
    mismatches = [r for r in rows if cfg["cross_check"] and r[6] is not None and not r[5] and r[6] != r[2]]
    write_json(out.with_suffix(".json"), _sidecar("topology", cfg, cells=len(rows),
                                                   cross_check_mismatches=len(mismatches)))
    if "region_mask" in cfg:
        h, C = cells[0][0], cells[0][1]
        try:
            mask = sample_projection_region(LevelSet(h, C), cfg["mask_resolution"])
        except ValueError as exc:
            return _fail("config", str(exc), EXIT_CONFIG)
        M2, M3 = np.meshgrid(mask.m2, mask.m3)
        write_csv(cfg["region_mask"], ["m2", "m3", "in_disk", "admissible"],
                  zip(M2.ravel(), M3.ravel(), mask.in_disk.ravel().astype(int), mask.mask.ravel().astype(int)))
        if cfg["plot"]:
            code = _plot(lambda p: p.plot_region_mask(mask.m2, mask.m3, mask.mask,
                                                      Path(cfg["region_mask"]).with_suffix(".png"),
                                                      f"h = {h:g}, C = {C:g}"))
            if code:
                return code
    if cfg["plot"] and "grid" in cfg:
        holes = np.array([r[2] for r in rows]).reshape(len(Cs), len(hs))
        return _plot(lambda p: p.plot_topology_grid(hs, Cs, holes, out.with_suffix(".png")))
    if mismatches:
        return _fail("verdict", f"{len(mismatches)} cells disagree with the region sampler", EXIT_FAILED)
    return EXIT_OK


# --- blowup ---

def cmd_blowup(cfg: dict) -> int:
    from . import blowup as bu
    from .io import write_csv, write_json

    chart = {"1": Chart.CHART1, "2": Chart.CHART2, "invariant-plane": Chart.INVARIANT_PLANE}[cfg["chart"]]
    sign = 1 if cfg["sign"] == "+" else -1
    points = bu.find_divisor_equilibria(chart, cfg["resolution"])
    entries = []
    for p in points:
        rec = {"location": list(p.location), "residual": p.residual,
               "full_equilibrium": p.full_equilibrium, "at_pole": p.at_pole}
        if p.at_pole:
            rec["note"] = "chart pole; classified in the other chart"
            other = bu.find_divisor_equilibria(Chart.CHART1, cfg["resolution"]) if chart is Chart.CHART2 else []
            for q, match in bu.match_across_charts(other, [p]):
                if match is not None:
                    rec["other_chart"] = bu.classify_equilibrium(Chart.CHART1, q.location, tuple(cfg["m"])).to_record()
        else:
            rep = bu.classify_equilibrium(chart, p.location, tuple(cfg["m"]), sign, cfg["C"])
            rec.update(rep.to_record())
            if not p.full_equilibrium:
                rec["note"] = "critical point of the sphere flow only; not an equilibrium of the full field"
        entries.append(rec)
    extra = {}
    out = Path(cfg["out"])
    if chart is Chart.INVARIANT_PLANE:
        n = cfg["portrait_resolution"]
        phi = np.arange(n) * 2 * math.pi / n
        write_csv(Path(f"{out}_portrait.csv"), ["phi", "dphi"], zip(phi, bu.plane_divisor_field(phi)))
    else:
        portrait = bu.divisor_phase_portrait(chart, cfg["portrait_resolution"])
        names = ["q1", "q2", "dq1", "dq2"] if chart is Chart.CHART1 else ["Q1", "Q2", "dQ1", "dQ2"]
        write_csv(Path(f"{out}_portrait.csv"), names, portrait.rows())
        extra["index_sum_inside_chart"] = portrait.index_sum()
        extra["overlap_discrepancy"] = bu.overlap_discrepancy()
        if chart is Chart.CHART1:
            published = [(0.0, bu.CENTRE_ANGLE), (0.0, math.pi - bu.CENTRE_ANGLE)]
            extra["published_centre_locations"] = [
                {"location": list(loc), "is_zero": bool(_is_zero(bu, chart, loc))} for loc in published]
            extra["centre_location_discrepancy"] = not all(
                e["is_zero"] for e in extra["published_centre_locations"])
        if cfg["plot"]:
            code = _plot(lambda p: p.plot_portrait(portrait.a1, portrait.a2, portrait.d1, portrait.d2,
                                                   Path(f"{out}_portrait.png"), names[:2],
                                                   [q.location for q in points]))
            if code:
                return code
    write_json(out.with_suffix(".json"), _sidecar("blowup", cfg, chart=chart.value, equilibria=entries, **extra))
    return EXIT_OK


def _is_zero(bu, chart, loc) -> bool:
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.array(bu.divisor_field(chart, *loc), float)
    return bool(np.all(np.isfinite(d)) and np.max(np.abs(d)) <= bu.EQUILIBRIUM_TOL)


# --- Entry point ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spheretwobody", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate one system from one initial state")
    s.add_argument("--config")
    s.add_argument("--system", choices=SYSTEMS)
    s.add_argument("--state", type=_floats)
    s.add_argument("--m", type=_floats)
    for k in ("xi", "q", "p", "eta", "zeta", "C"):
        s.add_argument(f"--{k}", type=float)
    s.add_argument("--sign", type=_sign)
    s.add_argument("--masses", type=_floats)
    s.add_argument("--t", type=_span)
    s.add_argument("--rel-tol", dest="rel_tol", type=float)
    s.add_argument("--abs-tol", dest="abs_tol", type=float)
    s.add_argument("--xi-threshold", dest="xi_threshold", type=float)
    s.add_argument("--max-steps", dest="max_steps", type=int)
    s.add_argument("--out")
    s.add_argument("--plot", action="store_const", const=True)

    v = sub.add_parser("verify-collision", help="run the collision verification battery")
    v.add_argument("--config")
    v.add_argument("--seed", dest="seeds", action="append")
    v.add_argument("--state", type=_floats)
    v.add_argument("--plane-C", dest="plane_C", type=float)
    v.add_argument("--plane-sign", dest="plane_sign", type=_sign)
    v.add_argument("--negative-control", dest="negative_control", action="store_const", const=True)
    v.add_argument("--t-max", dest="t_max", type=float)
    v.add_argument("--jobs", type=int)
    v.add_argument("--out")

    t = sub.add_parser("topology", help="classify compactified isoenergy surfaces")
    t.add_argument("--config")
    t.add_argument("--h", type=float)
    t.add_argument("--C", type=float)
    t.add_argument("--grid", nargs=2, metavar=("h=lo:hi:n", "C=lo:hi:n"))
    t.add_argument("--region-mask", dest="region_mask")
    t.add_argument("--mask-resolution", dest="mask_resolution", type=int)
    t.add_argument("--cross-check", dest="cross_check", action="store_const", const=True)
    t.add_argument("--jobs", type=int)
    t.add_argument("--out")
    t.add_argument("--plot", action="store_const", const=True)

    b = sub.add_parser("blowup", help="divisor equilibria, spectra and phase portrait")
    b.add_argument("--config")
    b.add_argument("--chart", type=lambda x: {"chart1": "1", "chart2": "2"}.get(x, x))
    b.add_argument("--C", type=float)
    b.add_argument("--sign", type=_sign)
    b.add_argument("--m", type=_floats)
    b.add_argument("--resolution", type=int)
    b.add_argument("--portrait-resolution", dest="portrait_resolution", type=int)
    b.add_argument("--out")
    b.add_argument("--plot", action="store_const", const=True)

    sub.add_parser("version", help="print the package version")
    return parser


COMMANDS = {"simulate": cmd_simulate, "verify-collision": cmd_verify_collision,
            "topology": cmd_topology, "blowup": cmd_blowup}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.command == "version":
        print(__version__)
        return EXIT_OK
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if args.command == "verify-collision":
        pc, ps = flags.pop("plane_C"), flags.pop("plane_sign")
        if pc is not None or ps is not None:
            flags["plane"] = {"C": pc if pc is not None else 1.0, "sign": ps or "+"}
    if args.command == "topology" and flags.get("grid") is not None:
        try:
            flags["grid"] = _grid(flags["grid"])
        except ConfigError as exc:
            return _fail("config", str(exc), EXIT_CONFIG)
    try:
        cfg = effective_config(args.command, flags, args.config)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    try:
        return COMMANDS[args.command](cfg)
    except DomainError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
