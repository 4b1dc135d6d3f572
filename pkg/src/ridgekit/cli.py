"""Command-line front end.

    ridgekit classify --builtin disc --point 0.5,0
    ridgekit rho --builtin ellipse --param a=2,b=1 --at vertex
    ridgekit verify --builtin disc_halfplane --out report/
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import plotting, verify
from .config import DEFAULT
from .curvature import rho, rho_from_curvature, rho_rows, rho_star, rho_table, table_envelope
from .cutlocus import Grid, agreement_report, classify, classify_many, detect_skeleton
from .eikonal import error_report, solve
from .errors import RidgekitError
from .geometry import BUILTIN_NAMES, DomainSpec, as_point, builtin, get_domain
from .projection import project, projection_rows, skeleton_flags

COMMANDS = ("distfield", "skeleton", "rho", "classify", "eikonal", "verify", "render")
FORMATS = ("csv", "json", "svg", "pgm")
DEFAULT_FORMAT = {
    "distfield": "csv",
    "skeleton": "csv",
    "rho": "json",
    "classify": "json",
    "eikonal": "csv",
    "verify": "json",
    "render": "svg",
}
SUPPORTED = {
    "distfield": {"csv", "json", "pgm", "svg"},
    "skeleton": {"csv", "json", "pgm", "svg"},
    "rho": {"csv", "json", "svg"},
    "classify": {"csv", "json"},
    "eikonal": {"csv", "json", "pgm", "svg"},
    "verify": {"json"},
    "render": {"svg"},
}


class UsageError(Exception):
    code = "invalid_input"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- formatting ---------------------------------------------------------------

def fmt(v) -> str:
    """Floats at 12 significant digits, "inf" for unbounded values, "" for missing."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".12g")
    return str(v)


def clean(obj):
    """Make an object JSON-safe with the same float convention as :func:`fmt`."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(format(v, ".12g"))
    return obj


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


# -- argument parsing -------------------------------------------------------------

def _point(text: str):
    try:
        parts = [float(v) for v in text.replace(" ", "").split(",")]
    except ValueError as exc:
        raise UsageError(f"bad point {text!r}; expected X,Y") from exc
    if len(parts) != 2 or not all(math.isfinite(v) for v in parts):
        raise UsageError(f"bad point {text!r}; expected X,Y")
    return tuple(parts)


def _params(items):
    out = {}
    for item in items or []:
        for pair in item.split(","):
            if not pair:
                continue
            key, eq, raw = pair.partition("=")
            if not eq:
                raise UsageError(f"bad parameter {pair!r}; expected KEY=VAL")
            try:
                out[key.strip()] = float(raw)
            except ValueError as exc:
                raise UsageError(f"parameter {key!r} needs a number") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ridgekit", description="Distance functions, skeletons and radii of curvature of planar domains.")
    p.add_argument("command", choices=COMMANDS)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--builtin", choices=BUILTIN_NAMES, help="builtin domain name")
    src.add_argument("--domain", metavar="FILE", help="DomainSpec JSON file")
    p.add_argument("--param", action="append", metavar="K=V[,K=V]", help="builtin parameters, e.g. a=2,b=1")
    p.add_argument("--grid-res", type=float, default=verify.H, metavar="H", help="grid spacing (default 1/64)")
    p.add_argument("--resolution", type=float, default=1e-3, help="classifier resolution for single points")
    p.add_argument("--point", action="append", metavar="X,Y", help="query point (repeatable)")
    p.add_argument("--at", metavar="NAME", help="named boundary point: vertex, covertex, corner, origin")
    p.add_argument("--out", metavar="PATH", help="output file (directory for verify)")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--tol", action="append", default=[], metavar="KEY=VAL", help="tolerance override (repeatable)")
    p.add_argument("--seed", type=int, default=0, help="seed for the randomized suites")
    p.add_argument("--band", type=float, help="agreement band (default 2h)")
    p.add_argument("--no-figure", action="store_true", help="skip the SVG written next to CSV/JSON output")
    return p


def _spec(args) -> DomainSpec:
    if args.domain:
        try:
            text = Path(args.domain).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read domain file: {exc}") from exc
        try:
            return DomainSpec.from_json(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"domain file is not valid JSON: {exc}") from exc
    if not args.builtin:
        raise UsageError("one of --builtin or --domain is required")
    return builtin(args.builtin, **_params(args.param))


def anchor(spec: DomainSpec, name: str):
    """Named boundary points of the builtin shapes."""
    prm = spec.params
    table = {
        "disc": {"vertex": (prm.get("R", 1.0), 0.0)},
        "ellipse": {"vertex": (prm.get("a", 2.0), 0.0), "covertex": (0.0, prm.get("b", 1.0))},
        "disc_halfplane": {"corner": (1.0, 0.0), "vertex": (0.0, -1.0)},
        "graph_power": {"vertex": (0.0, 0.0), "origin": (0.0, 0.0)},
        "graph_piecewise_parabola": {"vertex": (0.0, 0.0), "origin": (0.0, 0.0)},
    }
    if spec.kind == "polyline":
        v = prm["vertices"][0]
        table["polyline"] = {"vertex": (float(v[0]), float(v[1])), "corner": (float(v[0]), float(v[1]))}
    names = table.get(spec.kind, {})
    if name not in names:
        raise UsageError(f"--at {name!r} is not defined for {spec.kind}; choose from {sorted(names) or 'none'}")
    return names[name]


# -- output ---------------------------------------------------------------------

class Output:
    def __init__(self, args, command):
        self.path = Path(args.out) if args.out else None
        self.format = args.format or DEFAULT_FORMAT[command]
        if self.format not in SUPPORTED[command]:
            raise UsageError(f"{command} does not support --format {self.format}")
        if self.format in ("svg", "pgm") and self.path is None:
            raise UsageError(f"--format {self.format} needs --out")
        self.figure = not args.no_figure
        self.written = []

    def text(self, s: str):
        if self.path is None:
            sys.stdout.write(s)
        else:
            self._parent(self.path)
            self.path.write_text(s)
            self.written.append(str(self.path))

    def data(self, b: bytes):
        self._parent(self.path)
        self.path.write_bytes(b)
        self.written.append(str(self.path))

    def sidecar(self, suffix: str) -> Path | None:
        """Path for a figure next to a CSV/JSON file, or None."""
        if self.path is None or not self.figure:
            return None
        p = self.path.with_suffix(suffix)
        self.written.append(str(p))
        return p

    @staticmethod
    def _parent(p: Path):
        if p.parent and not p.parent.exists():
            p.parent.mkdir(parents=True, exist_ok=True)


def _boundary_for_plot(dom):
    tab = rho_table(dom)
    star = table_envelope(dom, tab)
    keep = dom.in_query_box(tab.samples.points)
    return tab.samples.points[keep], star[keep], tab.samples.spacing


def _overlay(path, dom, mask, labels, title):
    pts, star, sp = _boundary_for_plot(dom)
    plotting.render_overlay(path, mask.grid, mask.inside, mask.closure(), labels, pts, star, sp, title)


def _all_labels(dom, mask, h):
    labels = np.full(mask.grid.shape, -1)
    C = mask.grid.centers()
    if mask.inside.any():
        labels[mask.inside] = classify_many(dom, C[mask.inside], h, dom.tol)[0]
    return labels


# -- commands -------------------------------------------------------------------

def cmd_distfield(args, spec, tol, out: Output):
    dom = get_domain(spec, tol)
    if args.point:
        pts = [_point(s) for s in args.point]
        res = [project(dom, p, tol) for p in pts]
        if out.format == "json":
            out.text(json_text([{"x": p[0], "y": p[1], "d": r.distance, "is_singleton": r.is_singleton,
                                 "projections": [s.to_dict() for s in r.projections]} for p, r in zip(pts, res)]))
        elif out.format == "csv":
            out.text(csv_text(*projection_rows(pts, res)))
        else:
            raise UsageError("point queries support csv and json")
        return 0
    grid = Grid.over(dom, args.grid_res)
    C = grid.centers()
    inside = dom.inside_many(C.reshape(-1, 2)).reshape(grid.shape)
    d = np.full(grid.shape, np.nan)
    multi = np.zeros(grid.shape, dtype=bool)
    if inside.any():
        dd, mm, _ = skeleton_flags(dom, C[inside], tol)
        d[inside], multi[inside] = dd, mm
    if out.format in ("csv", "json"):
        rows = [[C[j, i, 0], C[j, i, 1], d[j, i], int(multi[j, i])] for j, i in zip(*np.nonzero(inside))]
        if out.format == "csv":
            out.text(csv_text(["x", "y", "d", "multi"], rows))
        else:
            out.text(json_text({"grid": grid.to_dict(), "cells": [dict(zip(["x", "y", "d", "multi"], r)) for r in rows]}))
        side = out.sidecar(".svg")
        if side:
            _plot_distance(side, grid, d, multi)
    elif out.format == "pgm":
        top = np.nanmax(d) if inside.any() else 1.0
        img = np.zeros(grid.shape, dtype=np.uint8)
        img[inside] = (1 + np.round(254 * d[inside] / top)).astype(np.uint8)
        out.data(f"P5\n{grid.nx} {grid.ny}\n255\n".encode() + img[::-1].tobytes())
    else:
        _plot_distance(out.path, grid, d, multi)
        out.written.append(str(out.path))
    return 0


def _plot_distance(path, grid, d, multi):
    import matplotlib.pyplot as plt

    with plt.rc_context(plotting.STYLE):
        fig, ax = plt.subplots(figsize=(6, 5))
        ext = plotting._extent(grid)
        im = ax.imshow(np.ma.masked_invalid(d), origin="lower", extent=ext, cmap="viridis", interpolation="nearest")
        sk = np.ma.masked_where(~multi, np.ones(grid.shape))
        ax.imshow(sk, origin="lower", extent=ext, cmap=plotting.ListedColormap(["white"]), interpolation="nearest")
        ax.set_aspect("equal")
        fig.colorbar(im, ax=ax, shrink=0.8).set_label("d")
        plotting._save(fig, path)


def cmd_skeleton(args, spec, tol, out: Output):
    dom = get_domain(spec, tol)
    h = args.grid_res
    mask = detect_skeleton(dom, h, tol)
    if out.format == "csv":
        out.text(csv_text(*mask.rows()))
    elif out.format == "pgm":
        out.data(mask.to_pgm())
    elif out.format == "json":
        band = args.band if args.band is not None else 2 * h
        r = agreement_report(dom, h, band, tol, mask)
        out.text(json_text({**r.to_dict(), "grid": mask.grid.to_dict(), "band": band}))
    if out.format in ("csv", "json", "pgm"):
        side = out.sidecar(".svg")
        if side:
            _overlay(side, dom, mask, _all_labels(dom, mask, h), f"{spec.kind}: skeleton, h={fmt(h)}")
    else:
        _overlay(out.path, dom, mask, _all_labels(dom, mask, h), f"{spec.kind}: skeleton, h={fmt(h)}")
        out.written.append(str(out.path))
    return 0


def _boundary_query(args, spec):
    if args.at and args.point:
        raise UsageError("give either --at or --point, not both")
    if args.at:
        return anchor(spec, args.at)
    if args.point:
        if len(args.point) != 1:
            raise UsageError("rho takes a single --point")
        return _point(args.point[0])
    return None


def cmd_rho(args, spec, tol, out: Output):
    dom = get_domain(spec, tol)
    q = _boundary_query(args, spec)
    if q is None:
        tab = rho_table(dom)
        star = table_envelope(dom, tab)
        header, rows = rho_rows(dom, tab, star)
        keep = dom.in_query_box(tab.samples.points)
        rows = [r for r, k in zip(rows, keep) if k]
        if out.format == "csv":
            out.text(csv_text(header, rows))
        elif out.format == "json":
            out.text(json_text([dict(zip(header, r)) for r in rows]))
        path = out.sidecar(".svg") if out.format != "svg" else out.path
        if out.format == "svg":
            out.written.append(str(out.path))
        if path:
            arr = np.array([[r[0], r[3], r[5]] for r in rows], dtype=float) if rows else np.zeros((0, 3))
            plotting.plot_rho_profile(path, arr[:, 0], arr[:, 1], arr[:, 2], title=f"{spec.kind}: rho and rho* along the boundary")
        return 0
    if out.format == "svg":
        raise UsageError("a single boundary point has no figure; use json or csv")
    try:
        samples = dom.samples_near(as_point(q), radius=1e-6 * max(1.0, dom.diameter))
    except ValueError as exc:
        raise UsageError(f"{q} is not on the boundary: {exc}") from exc
    per = []
    for s in samples:
        r = rho(dom, s, tol)
        rs = rho_star(dom, s, tol=tol)
        per.append({"sample": s.to_dict(), "rho": r.to_dict(), "rho_star": rs.to_dict()})
    r_max = max(float(rho(dom, s, tol)) for s in samples)
    rs_min = min(float(p["rho_star"]["value"]) if p["rho_star"]["value"] != "inf" else math.inf for p in per)
    result = {"point": list(q), "rho": r_max, "rho_star": rs_min, "samples": per}
    try:
        result["rho_from_curvature"] = float(rho_from_curvature(dom, samples[0], tol))
    except RidgekitError as exc:
        result["rho_from_curvature"] = None
        result["rho_from_curvature_error"] = exc.to_dict()
    if out.format == "json":
        out.text(json_text(result))
    else:
        rows = [[q[0], q[1], p["sample"]["nx"], p["sample"]["ny"], p["rho"]["value"], p["rho"]["uncertainty"], p["rho_star"]["value"]] for p in per]
        out.text(csv_text(["x", "y", "nx", "ny", "rho", "rho_uncertainty", "rho_star"], rows))
    return 0


def cmd_classify(args, spec, tol, out: Output):
    if not args.point:
        raise UsageError("classify needs --point X,Y")
    dom = get_domain(spec, tol)
    res = [classify(dom, _point(s), args.resolution, tol) for s in args.point]
    pts = [_point(s) for s in args.point]
    if out.format == "json":
        items = [{"x": p[0], "y": p[1], **r.to_dict()} for p, r in zip(pts, res)]
        out.text(json_text(items[0] if len(items) == 1 else items))
    else:
        rows = [[p[0], p[1], r.label.value, r.distance, r.rho_star, r.n_projections] for p, r in zip(pts, res)]
        out.text(csv_text(["x", "y", "classification", "d", "rho_star", "n_projections"], rows))
    return 0


def cmd_eikonal(args, spec, tol, out: Output):
    dom = get_domain(spec, tol)
    h = args.grid_res
    f = solve(dom, h, tol)
    mask = detect_skeleton(dom, h, tol)
    stats = error_report(f, dom, tol, mask)
    if out.format == "csv":
        out.text(csv_text(*f.rows()))
    elif out.format == "json":
        out.text(json_text({"grid": f.grid.to_dict(), "stats": stats.to_dict()}))
    elif out.format == "pgm":
        out.data(f.to_pgm())
    side = out.path if out.format == "svg" else out.sidecar(".svg")
    if out.format == "svg":
        out.written.append(str(out.path))
    if side:
        C = f.grid.centers()
        d = np.full(f.grid.shape, np.nan)
        d[f.inside] = skeleton_flags(dom, C[f.inside], tol)[0]
        near = ndimage.distance_transform_edt(~mask.flags) * h <= 3 * h + 1e-12 if mask.flags.any() else np.zeros(f.grid.shape, bool)
        plotting.plot_error_map(side, f.grid, np.abs(f.values - d), near & f.inside, title=f"{spec.kind}: |u - d|, h={fmt(h)}")
    if out.format in ("csv", "pgm") and out.path is not None:
        stats_path = out.path.with_suffix(".json")
        stats_path.write_text(json_text({"grid": f.grid.to_dict(), "stats": stats.to_dict()}))
        out.written.append(str(stats_path))
    return 0


def cmd_verify(args, spec, tol, out: Output):
    name = spec.kind
    if name not in verify.PER_DOMAIN:
        raise UsageError("verify runs on builtin domains only")
    if spec != builtin(name):
        raise UsageError("verify runs the suite with the builtin default parameters")
    checks = verify.run_for(name, tol, args.seed)
    for c in checks:
        print(c.line())
        for k, v in c.details.items():
            print(f"    {k}: {json.dumps(clean(v), sort_keys=True)}")
    failed = [c for c in checks if not c.passed]
    print(f"{'FAIL' if failed else 'PASS'} {name}: {len(checks) - len(failed)}/{len(checks)} criteria passed")
    if out.path is not None:
        out.path.mkdir(parents=True, exist_ok=True)
        report = {"domain": spec.to_dict(), "seed": args.seed, "checks": [c.to_dict() for c in checks]}
        # timings vary between runs; keep them out of the artifact so it is reproducible
        for c in report["checks"]:
            c.pop("seconds", None)
            for v in c["details"].values():
                if isinstance(v, dict):
                    v.pop("seconds", None)
        (out.path / "report.json").write_text(json_text(report))
        dom = get_domain(spec, tol)
        mask = detect_skeleton(dom, args.grid_res, tol)
        (out.path / "skeleton.csv").write_text(csv_text(*mask.rows()))
        if out.figure:
            _overlay(out.path / "overlay.svg", dom, mask, _all_labels(dom, mask, args.grid_res), f"{name}: classification and skeleton")
    return 1 if failed else 0


def cmd_render(args, spec, tol, out: Output):
    dom = get_domain(spec, tol)
    h = args.grid_res
    mask = detect_skeleton(dom, h, tol)
    _overlay(out.path, dom, mask, _all_labels(dom, mask, h), f"{spec.kind}: classification and skeleton, h={fmt(h)}")
    out.written.append(str(out.path))
    return 0


HANDLERS = {
    "distfield": cmd_distfield,
    "skeleton": cmd_skeleton,
    "rho": cmd_rho,
    "classify": cmd_classify,
    "eikonal": cmd_eikonal,
    "verify": cmd_verify,
    "render": cmd_render,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not args.grid_res > 0:
            raise UsageError("--grid-res must be positive")
        if not args.resolution > 0:
            raise UsageError("--resolution must be positive")
        try:
            tol = DEFAULT.with_overrides(args.tol) if args.tol else DEFAULT
        except (ValueError, TypeError) as exc:
            raise UsageError(str(exc)) from exc
        spec = _spec(args)
        out = Output(args, args.command)
        return HANDLERS[args.command](args, spec, tol, out)
    except (UsageError, RidgekitError) as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(json.dumps({"error": "invalid_input", "message": str(exc)}, sort_keys=True) + "\n")
        return 2


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
