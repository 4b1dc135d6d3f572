"""Acceptance suite: numbered checks run per builtin domain.

Each check returns a :class:`Check` with a PASS/FAIL verdict, the measured
numbers and its wall time.  Oracles are independent of the projection
module where possible (analytic values, brute force over boundary samples).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .config import DEFAULT, Tolerances
from .curvature import curvature_radius, default_locality, is_touching_ball, rho, rho_batch, rho_point, rho_star, rho_star_point
from .cutlocus import Classification, agreement_report, classify, detect_skeleton, endpoint_check
from .eikonal import error_report, solve
from .geometry import BUILTIN_NAMES, builtin, get_domain
from .projection import distance, distances, project, usc_probe

H = 1 / 64


@dataclass
class Check:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0
    limit: float | None = None  # runtime budget in seconds

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        return f"{self.verdict} criterion {self.number} {self.name} ({self.seconds:.1f}s)"

    def to_dict(self):
        return {
            "criterion": self.number,
            "name": self.name,
            "verdict": self.verdict,
            "seconds": self.seconds,
            "details": self.details,
        }


def _timed(number, name, limit, fn):
    t0 = time.perf_counter()
    ok, details = fn()
    dt = time.perf_counter() - t0
    if limit is not None and dt > limit:
        details["runtime_exceeded"] = True
        ok = False
    return Check(number, name, bool(ok), details, dt, limit)


def random_interior(spec, n, rng, tol: Tolerances = DEFAULT):
    """``n`` uniform points of the query box that lie in the domain."""
    dom = get_domain(spec, tol)
    b = dom.query_box
    out = []
    while sum(len(o) for o in out) < n:
        p = rng.uniform(b[:2], b[2:], size=(4 * n, 2))
        out.append(p[dom.inside_many(p)])
    return np.concatenate(out)[:n]


def brute_force_distance(spec, xs, n_samples=1_000_000, tol: Tolerances = DEFAULT):
    """Minimum over ~n_samples boundary points spread uniformly in arc length."""
    dom = get_domain(spec, tol)
    total = sum(pc.length() for pc in dom.pieces)
    ss = dom.samples(total / n_samples, clip=False)
    return cKDTree(ss.points).query(np.atleast_2d(xs))[0], len(ss)


# -- criteria ---------------------------------------------------------------

def halfplane_values(tol: Tolerances = DEFAULT) -> Check:
    def run():
        spec = builtin("disc_halfplane")
        dom = get_domain(spec, tol)
        pr = project(dom, (1.0, 1.0), tol)
        xi = pr.projections[0]
        sides = dom.samples_near((1.0, 0.0))
        # the corner sample carried by the circle; its normal points to the disc center
        circle = [s for s in sides if s.inner_normal[0] < -0.5]
        r_circle = rho(dom, circle[0], tol) if circle else None
        r_max = rho_point(dom, (1.0, 0.0), tol)
        rs = rho_star_point(dom, (1.0, 0.0), tol=tol)
        cl = classify(dom, (1.0, 1.0), 1e-3, tol)
        det = {
            "d": pr.distance,
            "is_singleton": pr.is_singleton,
            "xi": [float(v) for v in xi.point],
            "rho_circle_side": None if r_circle is None else float(r_circle),
            "rho_max_over_normals": str(r_max),
            "rho_star": float(rs),
            "classification": cl.label.value,
        }
        ok = (
            abs(pr.distance - 1.0) <= 1e-6
            and pr.is_singleton
            and np.linalg.norm(xi.point - np.array([1.0, 0.0])) <= 1e-3
            and r_circle is not None
            and abs(float(r_circle) - 1.0) <= 1e-2
            and abs(float(rs) - 1.0) <= 5e-2
            and cl.label is Classification.BoundaryCase
        )
        return ok, det

    return _timed(1, "halfplane counterexample values", 10.0, run)


def halfplane_skeleton(tol: Tolerances = DEFAULT, h: float = H) -> Check:
    def run():
        m = detect_skeleton(builtin("disc_halfplane"), h, tol)
        P = m.flagged_points()
        dist = np.where(P[:, 1] >= 0, np.abs(P[:, 0]), np.hypot(P[:, 0], P[:, 1]))
        hd = float(dist.max()) if len(P) else math.inf
        # coverage of the axis, reported but not asserted (one-sided criterion)
        ys = m.grid.ys()
        axis = ys[(ys >= 0) & (ys <= m.grid.ys()[-1])]
        cover = cKDTree(P).query(np.stack([np.zeros_like(axis), axis], axis=1))[0].max() if len(P) else math.inf
        return hd <= 2 * h + 1e-12, {"n_flagged": int(len(P)), "hausdorff_one_sided": hd, "bound": 2 * h, "axis_coverage_gap": float(cover)}

    return _timed(2, "halfplane skeleton on the nonnegative axis", 60.0, run)


def agreement(names=("disc", "ellipse"), tol: Tolerances = DEFAULT, h: float = H) -> Check:
    def run():
        det = {}
        ok = True
        for name in names:
            t0 = time.perf_counter()
            r = agreement_report(builtin(name), h, 2 * h, tol)
            dt = time.perf_counter() - t0
            det[name] = {"agreement": r.agreement, "n_cells": r.n_cells, "counts": r.counts, "seconds": dt}
            ok &= r.agreement >= 0.99 and dt < 120.0
        if "ellipse" in names:
            c = classify(builtin("ellipse"), (1.5, 0.0), 1e-3, tol)
            det["ellipse_endpoint"] = c.to_dict()
            ok &= c.label is Classification.BoundaryCase and abs(c.distance - c.rho_star) <= 1e-3
            ok &= abs(c.distance - 0.5) <= 1e-3 and abs(c.rho_star - 0.5) <= 1e-3
        return ok, det

    return _timed(3, "classifier agrees with detected closure", None, run)


def inequality(names=("ellipse", "graph_piecewise_parabola"), tol: Tolerances = DEFAULT, h: float = H) -> Check:
    def run():
        det = {}
        ok = True
        for name in names:
            r = endpoint_check(builtin(name), h, tol)
            det[name] = r.to_dict()
            # a check with nothing to check is not evidence
            ok &= r.n_checked > 0 and not r.violations
        return ok, det

    return _timed(4, "d >= rho_star - tol next to the skeleton", 120.0, run)


def curvature_equivalence(n: int = 200, tol: Tolerances = DEFAULT) -> Check:
    def run():
        dom = get_domain(builtin("ellipse"), tol)
        L = sum(p.length() for p in dom.pieces)
        ss = dom.samples(L / n)
        ss_idx = np.arange(len(ss))[:n]
        v, u, _, _ = rho_batch(dom, ss.piece[ss_idx], ss.t[ss_idx], ss.points[ss_idx], ss.normals[ss_idx])
        ref = np.array([curvature_radius(dom, int(p), t) for p, t in zip(ss.piece[ss_idx], ss.t[ss_idx])], dtype=float)
        fin = np.isfinite(v) & np.isfinite(ref)
        rel = np.abs(v[fin] - ref[fin]) / ref[fin]
        return bool(fin.sum() == len(ss_idx) and rel.max() <= 0.01), {"n": int(fin.sum()), "max_rel_error": float(rel.max())}

    return _timed(5, "rho matches 1/kappa on the ellipse", 60.0, run)


def usc(names=("disc", "ellipse", "disc_halfplane"), n: int = 20, seed: int = 0, tol: Tolerances = DEFAULT) -> Check:
    def run():
        rng = np.random.default_rng(seed)
        det = {}
        ok = True
        for name in names:
            spec = builtin(name)
            pts = random_interior(spec, n, rng, tol)
            fails = 0
            worst = 0.0
            for x in pts:
                d = distance(spec, x, tol)
                radii = d / 4 * 0.25 ** np.arange(8)
                r = usc_probe(spec, x, radii, 0.05, tol)
                fails += not r.passed
                worst = max(worst, r.deviations[-1])
            det[name] = {"n": int(len(pts)), "failures": fails, "max_final_deviation": worst}
            ok &= fails == 0
        return ok, det

    return _timed(6, "projection is upper semicontinuous", 30.0, run)


def projection_oracle(names=BUILTIN_NAMES, n: int = 1000, seed: int = 0, tol: Tolerances = DEFAULT) -> Check:
    def run():
        rng = np.random.default_rng(seed)
        det = {}
        ok = True
        for name in names:
            spec = builtin(name)
            t0 = time.perf_counter()
            pts = random_interior(spec, n, rng, tol)
            d = distances(spec, pts, tol)
            ref, ns = brute_force_distance(spec, pts, tol=tol)
            err = float(np.max(np.abs(d - ref)))
            dt = time.perf_counter() - t0
            det[name] = {"n": int(len(pts)), "n_boundary_samples": int(ns), "max_abs_diff": err, "seconds": dt}
            ok &= err <= 2 * tol.eps_proj and dt < 60.0
        return ok, det

    return _timed(7, "distance matches brute force", None, run)


def eikonal_convergence(tol: Tolerances = DEFAULT, h: float = H) -> Check:
    def run():
        spec = builtin("disc")
        e1 = error_report(solve(spec, h, tol), spec, tol)
        e2 = error_report(solve(spec, h / 2, tol), spec, tol)
        ratio = e2.far_max / e1.far_max if e1.far_max > 0 else math.nan
        det = {"far_max_h": e1.far_max, "far_max_h2": e2.far_max, "bound": 2 * h, "ratio": ratio}
        return e1.far_max <= 2 * h and 0.4 <= ratio <= 0.7, det

    return _timed(8, "fast marching converges at first order", 60.0, run)


def power_degeneracy(tol: Tolerances = DEFAULT, h: float = H) -> Check:
    def run():
        spec = builtin("graph_power", p=1.5)
        dom = get_domain(spec, tol)
        r = rho_point(dom, (0.0, 0.0), tol)
        rs = rho_star_point(dom, (0.0, 0.0), tol=tol)
        reach = {}
        for hh in (2 * h, h):
            P = detect_skeleton(dom, hh, tol).flagged_points()
            reach[hh] = float(np.min(np.hypot(P[:, 0], P[:, 1]))) if len(P) else math.inf
        det = {
            "rho": float(r),
            "rho_uncertainty": r.uncertainty,
            "rho_star": float(rs),
            "skeleton_distance_to_origin": {f"{k:.6g}": v for k, v in reach.items()},
        }
        ok = float(r) == 0.0 and float(rs) == 0.0 and reach[h] <= 2 * h and reach[h] < reach[2 * h]
        return ok, det

    return _timed(9, "C1 not C11 boundary: rho = 0 and skeleton reaches the boundary", None, run)


def invariants(names=BUILTIN_NAMES, seed: int = 0, tol: Tolerances = DEFAULT, n_pairs: int = 200, n_rho: int = 24, h: float = H) -> Check:
    def run():
        rng = np.random.default_rng(seed)
        det = {}
        ok = True
        for name in names:
            spec = builtin(name)
            dom = get_domain(spec, tol)
            # 1-Lipschitz on close pairs (both inside)
            x = random_interior(spec, n_pairs, rng, tol)
            step = rng.normal(size=x.shape) * 0.05
            y = x + step
            keep = dom.in_query_box(y) & dom.inside_many(y)
            dx = distances(spec, x[keep], tol)
            dy = distances(spec, y[keep], tol)
            lip = int(np.sum(np.abs(dx - dy) > np.linalg.norm(step[keep], axis=1) + 2 * tol.eps_proj))
            # rho_star <= rho and bracket soundness at random boundary samples
            ss = dom.samples(0.01)
            pick = rng.choice(len(ss), size=min(n_rho, len(ss)), replace=False)
            env = bracket = 0
            loc = default_locality(dom)
            for i in np.sort(pick):
                s = ss.sample(int(i))
                r = rho(dom, s, tol)
                if float(rho_star(dom, s, tol=tol)) > float(r):
                    env += 1
                if r.unbounded:
                    continue
                lo = float(r) - 2 * r.uncertainty
                hi = float(r) + 2 * r.uncertainty
                if lo > 0 and not is_touching_ball(dom, s, lo, loc, tol):
                    bracket += 1
                if is_touching_ball(dom, s, hi, loc, tol):
                    bracket += 1
            f = solve(spec, h, tol)
            acc = f.accepted_values()
            mono = int(f.monotone_violations) + int(np.sum(np.diff(acc) < -1e-12))
            det[name] = {"lipschitz": lip, "rho_star_above_rho": env, "bracket": bracket, "marching": mono, "n_pairs": int(keep.sum())}
            ok &= lip == 0 and env == 0 and bracket == 0 and mono == 0
        return ok, det

    return _timed(10, "invariant suites", None, run)


CHECKS = {
    1: halfplane_values,
    2: halfplane_skeleton,
    3: agreement,
    4: inequality,
    5: curvature_equivalence,
    6: usc,
    7: projection_oracle,
    8: eikonal_convergence,
    9: power_degeneracy,
    10: invariants,
}

# which checks concern which builtin, and with which arguments
PER_DOMAIN = {
    "disc": [(3, {"names": ("disc",)}), (6, {"names": ("disc",)}), (7, {"names": ("disc",)}), (8, {}), (10, {"names": ("disc",)})],
    "ellipse": [
        (3, {"names": ("ellipse",)}),
        (4, {"names": ("ellipse",)}),
        (5, {}),
        (6, {"names": ("ellipse",)}),
        (7, {"names": ("ellipse",)}),
        (10, {"names": ("ellipse",)}),
    ],
    "disc_halfplane": [(1, {}), (2, {}), (6, {"names": ("disc_halfplane",)}), (7, {"names": ("disc_halfplane",)}), (10, {"names": ("disc_halfplane",)})],
    "graph_power": [(7, {"names": ("graph_power",)}), (9, {}), (10, {"names": ("graph_power",)})],
    "graph_piecewise_parabola": [
        (4, {"names": ("graph_piecewise_parabola",)}),
        (7, {"names": ("graph_piecewise_parabola",)}),
        (10, {"names": ("graph_piecewise_parabola",)}),
    ],
    "polyline": [(7, {"names": ("polyline",)}), (10, {"names": ("polyline",)})],
}


def run_for(name: str, tol: Tolerances = DEFAULT, seed: int = 0):
    out = []
    for number, kw in PER_DOMAIN[name]:
        fn = CHECKS[number]
        kw = dict(kw)
        if number in (6, 7, 10):
            kw["seed"] = seed
        out.append(fn(tol=tol, **kw))
    return out
