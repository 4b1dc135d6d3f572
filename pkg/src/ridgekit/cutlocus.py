"""Skeleton detection on grids, the ridge classifier and its diagnostics."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .config import DEFAULT, Tolerances
from .curvature import rho_star, rho_star_batch
from .errors import GridTooCoarse
from .geometry import BoundarySample, Domain, as_point, get_domain, local_frame
from .projection import _check_interior, _multi_flags, minimizers, project


class Classification(enum.Enum):
    RegularPoint = "RegularPoint"
    CutLocusPoint = "CutLocusPoint"
    BoundaryCase = "BoundaryCase"


_LABELS = [Classification.RegularPoint, Classification.CutLocusPoint, Classification.BoundaryCase]


@dataclass(frozen=True)
class Grid:
    """Cell centers at (i*h, j*h) for i0 <= i < i0+nx, j0 <= j < j0+ny.

    Centers sit on integer multiples of h so that symmetry axes through the
    origin fall on grid lines.
    """

    h: float
    i0: int
    j0: int
    nx: int
    ny: int

    @classmethod
    def over(cls, dom: Domain, h: float, min_cells: int = 32) -> "Grid":
        if not h > 0:
            raise ValueError("grid spacing must be positive")
        b = dom.query_box
        i0 = math.ceil(b[0] / h - 1e-9)
        i1 = math.floor(b[2] / h + 1e-9)
        j0 = math.ceil(b[1] / h - 1e-9)
        j1 = math.floor(b[3] / h + 1e-9)
        g = cls(float(h), i0, j0, i1 - i0 + 1, j1 - j0 + 1)
        if g.nx < min_cells or g.ny < min_cells:
            raise GridTooCoarse(f"grid {g.nx}x{g.ny} has fewer than {min_cells}x{min_cells} cells in the query box")
        return g

    @property
    def origin(self):
        return (self.i0 * self.h, self.j0 * self.h)

    @property
    def shape(self):
        return (self.ny, self.nx)

    def xs(self):
        return (self.i0 + np.arange(self.nx)) * self.h

    def ys(self):
        return (self.j0 + np.arange(self.ny)) * self.h

    def centers(self) -> np.ndarray:
        """(ny, nx, 2) array of cell centers."""
        X, Y = np.meshgrid(self.xs(), self.ys())
        return np.stack([X, Y], axis=-1)

    def to_dict(self):
        return {"origin": list(self.origin), "h": self.h, "nx": self.nx, "ny": self.ny}


@dataclass
class SkeletonMask:
    grid: Grid
    flags: np.ndarray  # (ny, nx) cells meeting the skeleton
    inside: np.ndarray  # (ny, nx) cell centers in the domain
    multi: np.ndarray  # (ny, nx) cell centers with several projections
    dilation: int = 1  # closure approximation radius, in cells
    distance: np.ndarray = field(default=None, repr=False)  # d at cell centers (nan outside)

    @property
    def dilation_radius(self) -> float:
        return self.dilation * self.grid.h

    def closure(self) -> np.ndarray:
        st = np.ones((3, 3), dtype=bool)
        return ndimage.binary_dilation(self.flags, st, iterations=self.dilation) & self.inside

    def flagged_points(self, closed: bool = False) -> np.ndarray:
        m = self.closure() if closed else self.flags
        return self.grid.centers()[m]

    def to_pgm(self, closed: bool = True) -> bytes:
        """Binary grey map: 0 exterior, 128 interior, 255 skeleton (top row = max y)."""
        img = np.where(self.inside, 128, 0).astype(np.uint8)
        img[self.closure() if closed else self.flags] = 255
        img = img[::-1]
        head = f"P5\n{self.grid.nx} {self.grid.ny}\n255\n".encode()
        return head + img.tobytes()

    def rows(self, closed: bool = False):
        pts = self.flagged_points(closed)
        return ["x", "y"], [[p[0], p[1]] for p in pts]


# -- detection -------------------------------------------------------------

def _ties(dom: Domain, xs: np.ndarray, h: float, tol: Tolerances):
    """Minimizers of each cell center and the rows taking part in a tie.

    A branch j ties with the nearest branch 1 inside the cell when the
    linearizations f_j + g_j.(y - x) and f_1 + g_1.(y - x) meet for some y in
    the cell, i.e. f_j - f_1 <= (h/2) |g_j - g_1|_1.  Returns (mz, multi, tie
    rows, leader rows).
    """
    mz = minimizers(dom, xs, slack=1.5 * h + 2.0 * dom.dense_spacing)
    multi = _multi_flags(mz, dom, tol)
    lead = mz.leader[mz.query]
    f1 = mz.dist[lead]
    x = mz.xs[mz.query]
    with np.errstate(invalid="ignore", divide="ignore"):
        g = (x - mz.points) / mz.dist[:, None]
    g1 = g[lead]
    sep = np.linalg.norm(mz.points - mz.points[lead], axis=1)
    other = sep > tol.cluster_merge * dom.dense_spacing
    tie = other & (mz.dist - f1 <= 0.5 * h * np.abs(g - g1).sum(axis=1) + 1e-12)
    is_lead = np.zeros(len(mz.dist), dtype=bool)
    is_lead[mz.leader] = True
    return mz, multi, tie | (mz.admitted(tol.tau_rel) & multi[mz.query]), is_lead


def _cell_flags(dom: Domain, xs: np.ndarray, h: float, tol: Tolerances):
    """(d, multi-at-center, cell crossed by a tie between branches)."""
    mz, multi, tie, _ = _ties(dom, xs, h, tol)
    cross = np.zeros(len(xs), dtype=bool)
    np.logical_or.at(cross, mz.query, tie)
    return mz.d, multi, cross | multi


def _subcell_flags(dom: Domain, centers: np.ndarray, h: float, k: int, tol: Tolerances):
    """Crossing test on a k x k sub-grid of each cell."""
    off = (np.arange(k) + 0.5) / k - 0.5
    ox, oy = np.meshgrid(off * h, off * h)
    sub = (centers[:, None, :] + np.stack([ox.ravel(), oy.ravel()], axis=1)[None]).reshape(-1, 2)
    ok = dom.inside_many(sub)
    hit = np.zeros(len(sub), dtype=bool)
    if ok.any():
        hit[ok] = _cell_flags(dom, sub[ok], h / k, tol)[2]
    return hit.reshape(len(centers), k * k).any(axis=1)


def detect_skeleton(spec, h: float, tol: Tolerances = DEFAULT, refine: int = 5) -> SkeletonMask:
    """Cells whose center has several projections or which a branch tie crosses.

    Near skeleton endpoints the competing branch may not exist at the cell
    center; unflagged neighbors of flagged cells are therefore re-tested on a
    ``refine`` x ``refine`` sub-grid until no new cell is flagged.
    """
    dom = get_domain(spec, tol)
    grid = Grid.over(dom, h)
    C = grid.centers().reshape(-1, 2)
    inside = dom.inside_many(C)
    d = np.full(len(C), np.nan)
    multi = np.zeros(len(C), dtype=bool)
    flags = np.zeros(len(C), dtype=bool)
    idx = np.nonzero(inside)[0]
    if len(idx):
        d[idx], multi[idx], flags[idx] = _cell_flags(dom, C[idx], h, dom.tol)
    sh = grid.shape
    flags, inside2 = flags.reshape(sh), inside.reshape(sh)
    if refine > 1:
        tested = flags.copy()
        st = np.ones((3, 3), dtype=bool)
        while True:
            front = ndimage.binary_dilation(flags, st) & inside2 & ~tested
            if not front.any():
                break
            tested |= front
            hit = _subcell_flags(dom, grid.centers()[front], h, refine, dom.tol)
            if not hit.any():
                break
            new = np.zeros(sh, dtype=bool)
            new[front] = hit
            flags |= new
    return SkeletonMask(grid, flags, inside2, multi.reshape(sh), 1, d.reshape(sh))


# -- classification --------------------------------------------------------

@dataclass
class ClassifyResult:
    label: Classification
    distance: float
    rho_star: float
    projection: BoundarySample | None
    n_projections: int
    resolution: float

    def to_dict(self):
        out = {
            "classification": self.label.value,
            "d": self.distance,
            "rho_star": "inf" if math.isinf(self.rho_star) else self.rho_star,
            "n_projections": self.n_projections,
            "resolution": self.resolution,
        }
        if self.projection is not None:
            out["xi"] = [float(v) for v in self.projection.point]
        return out


def _decide(d, rs, multi, res):
    lab = np.full(len(d), 2)
    lab[d < rs - res] = 0
    lab[d > rs + res] = 1
    lab[multi] = 1
    return lab


def classify(spec, x, resolution: float, tol: Tolerances = DEFAULT) -> ClassifyResult:
    """Regular iff pi(x) = {xi} and d(x) < rho_star(xi), up to ``resolution``."""
    dom = get_domain(spec, tol)
    x = as_point(x)
    pr = project(dom, x, tol)
    if not pr.is_singleton:
        return ClassifyResult(Classification.CutLocusPoint, pr.distance, math.nan, None, pr.n_clusters, resolution)
    xi = pr.projections[0]
    rs = rho_star(dom, xi, tol=tol).value
    lab = _decide(np.array([pr.distance]), np.array([rs]), np.array([False]), resolution)[0]
    return ClassifyResult(_LABELS[lab], pr.distance, rs, xi, 1, resolution)


def classify_many(spec, xs, resolution: float, tol: Tolerances = DEFAULT):
    """Vectorized classify; returns (labels 0/1/2, d, rho_star, multi)."""
    dom = get_domain(spec, tol)
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    _check_interior(dom, xs)
    mz = minimizers(dom, xs)
    multi = _multi_flags(mz, dom, dom.tol)
    lead = mz.leader
    piece, t = mz.piece[lead], mz.t[lead]
    nrm = np.empty((len(xs), 2))
    for p in np.unique(piece):
        m = piece == p
        nrm[m] = dom.inner_normal(p, t[m])
    rs = np.full(len(xs), np.nan)
    single = ~multi
    if single.any():
        rs[single], _ = rho_star_batch(dom, piece[single], t[single], mz.points[lead][single], nrm[single])
    return _decide(mz.d, rs, multi, resolution), mz.d, rs, multi


# -- non-spreading inner perpendicular -------------------------------------

@dataclass
class NonspreadingReport:
    outcome: str  # PASS, FAIL or VACUOUS
    pullback: np.ndarray
    directions_deg: list
    spread_deg: float
    graph_representable: bool

    def to_dict(self):
        return {
            "outcome": self.outcome,
            "n_pullback": int(len(self.pullback)),
            "directions_deg": self.directions_deg,
            "spread_deg": self.spread_deg,
            "graph_representable": self.graph_representable,
        }


def _graph_along(dom: Domain, xi: BoundarySample, axis, radius: float) -> bool:
    """Whether the boundary chain within ``radius`` of xi is a graph over the line normal to ``axis``."""
    p = np.asarray(xi.point, dtype=float)
    k0 = int(dom.dense_tree.query(p)[1])
    seq = [k0]
    for step in (dom.dense_prev, dom.dense_next):
        k = step[k0]
        while k >= 0 and k != k0 and np.linalg.norm(dom.dense_points[k] - p) <= radius:
            seq.append(k) if step is dom.dense_next else seq.insert(0, k)
            k = step[k]
    w = np.array([-axis[1], axis[0]])
    s = dom.dense_points[seq] @ w
    ds = np.diff(s)
    return bool(np.all(ds > 0) or np.all(ds < 0))


def nonspreading_diagnostic(spec, xi: BoundarySample, probe_count: int = 1024, tol: Tolerances = DEFAULT) -> NonspreadingReport:
    """Sample the pull-back {y : pi(y) = {xi}} along rays from xi.

    Rays go in 64 uniform directions plus the sample normals (and their
    bisector at a corner), each probed at 16 radii.  FAIL needs two pull-back
    points whose directions from xi differ by at least the spread angle.
    """
    dom = get_domain(spec, tol)
    p = np.asarray(xi.point, dtype=float)
    ang = list(2 * np.pi * np.arange(64) / 64)
    frame = local_frame(dom, xi, tol)
    for v in (np.asarray(xi.inner_normal), frame.axis):
        ang.append(math.atan2(v[1], v[0]))
    is_c, other = dom.joint_corner(*xi.param)
    if is_c:
        po = dom.pieces[other]
        n2 = dom.inner_normal(other, po.t0 if other == dom.next_piece[xi.param[0]] else po.t1)
        ang.append(math.atan2(n2[1], n2[0]))
    ang = np.array(ang)
    b = dom.query_box
    r_hi = 0.5 * min(b[2] - b[0], b[3] - b[1])
    radii = np.geomspace(8 * dom.dense_spacing, r_hi, 16)
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    ys = (p[None, None, :] + radii[None, :, None] * dirs[:, None, :]).reshape(-1, 2)
    dir_of = np.repeat(ang, len(radii))
    ok = dom.in_query_box(ys) & dom.inside_many(ys)
    ys, dir_of = ys[ok][:probe_count], dir_of[ok][:probe_count]
    hits = np.zeros(len(ys), dtype=bool)
    if len(ys):
        mz = minimizers(dom, ys)
        multi = _multi_flags(mz, dom, dom.tol)
        near = np.linalg.norm(mz.points[mz.leader] - p, axis=1) <= 10 * dom.eps_bd + 1e-12
        hits = near & ~multi
    pb = ys[hits]
    dirs_deg = sorted({round(math.degrees(a) % 360.0, 6) for a in dir_of[hits]})
    if not len(pb):
        return NonspreadingReport("VACUOUS", pb, [], 0.0, frame.graph_representable)
    u = (pb - p) / np.linalg.norm(pb - p, axis=1)[:, None]
    cosm = np.clip(u @ u.T, -1.0, 1.0)
    spread = float(np.degrees(np.arccos(cosm.min())))
    if spread >= tol.spread_angle_deg:
        return NonspreadingReport("FAIL", pb, dirs_deg, spread, False)
    axis = u.mean(axis=0)
    axis /= np.linalg.norm(axis)
    graph = _graph_along(dom, xi, axis, max(16 * dom.dense_spacing, 1e-3))
    return NonspreadingReport("PASS" if graph else "FAIL", pb, dirs_deg, spread, graph)


# -- agreement and the inequality checks ------------------------------------

@dataclass
class AgreementReport:
    agreement: float
    n_cells: int
    disagreements: list
    endpoint_gap: float  # max of rho_star - d over the points checked by endpoint_check
    counts: dict
    mask: SkeletonMask = field(repr=False, default=None)
    labels: np.ndarray = field(repr=False, default=None)  # (ny, nx), -1 where not evaluated

    def to_dict(self):
        return {
            "agreement": self.agreement,
            "n_cells": self.n_cells,
            "endpoint_gap": None if math.isnan(self.endpoint_gap) else self.endpoint_gap,
            "counts": self.counts,
            "disagreements": self.disagreements,
        }


def band_mask(mask: SkeletonMask, band: float) -> np.ndarray:
    """Interior cells within ``band`` of the boundary of the closure mask."""
    cl = mask.closure()
    edge = cl & ~ndimage.binary_erosion(cl, np.ones((3, 3), dtype=bool), border_value=0)
    outer = ndimage.binary_dilation(cl, np.ones((3, 3), dtype=bool)) & ~cl
    seeds = edge | outer
    if not seeds.any():
        return np.zeros_like(cl)
    dist = ndimage.distance_transform_edt(~seeds) * mask.grid.h
    return dist <= band + 1e-12


def agreement_report(spec, h: float, band: float, tol: Tolerances = DEFAULT, mask: SkeletonMask | None = None) -> AgreementReport:
    """Fraction of interior cells (outside the band) where the classifier
    matches membership in the detected closure mask."""
    dom = get_domain(spec, tol)
    if mask is None:
        mask = detect_skeleton(dom, h, tol)
    cl = mask.closure()
    keep = mask.inside & ~band_mask(mask, band)
    C = mask.grid.centers()
    pts = C[keep]
    labels = np.full(mask.grid.shape, -1)
    if len(pts):
        lab, d, rs, multi = classify_many(dom, pts, h, tol)
        labels[keep] = lab
    expected = np.where(cl, 1, 0)
    agree = keep & (labels == expected)
    n = int(keep.sum())
    bad = keep & ~agree
    dis = []
    for j, i in zip(*np.nonzero(bad)):
        dis.append(
            {
                "x": float(C[j, i, 0]),
                "y": float(C[j, i, 1]),
                "expected": _LABELS[expected[j, i]].value,
                "got": _LABELS[labels[j, i]].value,
            }
        )
    # points of the discrete closure-minus-skeleton, as in endpoint_check
    pmax = endpoint_check(dom, h, tol, mask).max_gap
    counts = {lab.value: int(np.sum(labels[keep] == k)) for k, lab in enumerate(_LABELS)}
    return AgreementReport(float(agree.sum() / n) if n else 1.0, n, dis, pmax, counts, mask, labels)


@dataclass
class InequalityReport:
    n_checked: int
    violations: list
    tol_theorem: float
    min_margin: float  # min of d - rho_star + tol over checked points
    max_gap: float  # max of rho_star - d over checked points

    def to_dict(self):
        return {
            "n_checked": self.n_checked,
            "n_violations": len(self.violations),
            "tol_theorem": self.tol_theorem,
            "min_margin": self.min_margin,
            "max_gap": None if math.isnan(self.max_gap) else self.max_gap,
            "violations": self.violations,
        }


def _subcell_ties(dom: Domain, centers: np.ndarray, h: float, k: int, tol: Tolerances):
    """Boundary points taking part in a tie anywhere on a k x k sub-grid of each cell.

    Returns per-cell lists of (points, pieces, params); empty where no
    sub-point sees a tie.
    """
    off = (np.arange(k) + 0.5) / k - 0.5
    ox, oy = np.meshgrid(off * h, off * h)
    sub = (centers[:, None, :] + np.stack([ox.ravel(), oy.ravel()], axis=1)[None]).reshape(-1, 2)
    ok = np.nonzero(dom.inside_many(sub))[0]
    out = [(np.zeros((0, 2)), np.zeros(0, dtype=np.int64), np.zeros(0)) for _ in range(len(centers))]
    if not len(ok):
        return out
    mz, _, tie, lead = _ties(dom, sub[ok], h / k, tol)
    has = np.zeros(len(ok), dtype=bool)
    np.logical_or.at(has, mz.query, tie)
    part = (tie | lead) & has[mz.query]
    cell = ok[mz.query] // (k * k)
    for c in np.unique(cell[part]):
        m = part & (cell == c)
        out[c] = (mz.points[m], mz.piece[m], mz.t[m])
    return out


def endpoint_check(spec, h: float, tol: Tolerances = DEFAULT, mask: SkeletonMask | None = None, refine: int = 5) -> InequalityReport:
    """d(x) >= rho_star(xi) - tol_theorem at grid points next to skeleton endpoints.

    For every flagged cell the boundary points taking part in a tie on its
    sub-grid form a set T.  Endpoint cells are flagged cells whose T has
    locally minimal diameter: the discrete picture of a closure point where
    the projections of nearby skeleton points collapse.  Their unflagged
    8-neighbors with a single projection xi are checked, with rho_star(xi)
    replaced by its minimum over T and xi (rho_star is only lower
    semicontinuous, and xi moves quickly near an endpoint).
    """
    dom = get_domain(spec, tol)
    if mask is None:
        mask = detect_skeleton(dom, h, tol)
    C = mask.grid.centers()
    fl = np.argwhere(mask.flags)
    empty = InequalityReport(0, [], 0.0, math.inf, math.nan)
    if not len(fl):
        return empty
    T = _subcell_ties(dom, C[mask.flags], h, refine, dom.tol)
    diam = np.full(len(fl), np.inf)
    for c, (P, _, _) in enumerate(T):
        if len(P):
            diam[c] = np.linalg.norm(P[:, None] - P[None], axis=2).max()
    fpos = {tuple(v): c for c, v in enumerate(fl)}
    ny, nx = mask.grid.shape
    cand: dict[tuple, int] = {}
    for c, (j, i) in enumerate(fl):
        if not np.isfinite(diam[c]):
            continue
        nb = [fpos.get((j + dj, i + di)) for dj in (-1, 0, 1) for di in (-1, 0, 1)]
        if any(q is not None and diam[q] < diam[c] for q in nb):
            continue
        for dj in (-1, 0, 1):
            for di in (-1, 0, 1):
                jj, ii = j + dj, i + di
                if 0 <= jj < ny and 0 <= ii < nx and mask.inside[jj, ii] and not mask.flags[jj, ii]:
                    cand.setdefault((jj, ii), c)
    if not cand:
        return empty
    keys = sorted(cand)
    pts = np.array([C[j, i] for j, i in keys])
    mz = minimizers(dom, pts)
    multi = _multi_flags(mz, dom, dom.tol)
    sel = np.nonzero(~multi)[0]
    if not len(sel):
        return empty
    # rho_star at every projection and every tie point involved
    own = [(mz.points[mz.leader[k]][None], mz.piece[mz.leader[k]][None], mz.t[mz.leader[k]][None]) for k in sel]
    groups = [T[cand[keys[k]]] for k in sel]
    P = np.concatenate([np.concatenate([a[0], b[0]]) for a, b in zip(own, groups)])
    pc = np.concatenate([np.concatenate([a[1], b[1]]) for a, b in zip(own, groups)])
    tt = np.concatenate([np.concatenate([a[2], b[2]]) for a, b in zip(own, groups)])
    owner = np.concatenate([np.full(1 + len(b[0]), n) for n, b in enumerate(groups)])
    nrm = np.empty((len(P), 2))
    for p in np.unique(pc):
        m = pc == p
        nrm[m] = dom.inner_normal(p, tt[m])
    rs_all, ru_all = rho_star_batch(dom, pc, tt, P, nrm)
    rs = np.full(len(sel), np.inf)
    np.minimum.at(rs, owner, rs_all)
    ru = np.zeros(len(sel))
    np.maximum.at(ru, owner, ru_all)
    tol_thm = np.maximum(2 * ru, dom.tol.theorem_h_factor * h)
    d = mz.d[sel]
    margin = d - rs + tol_thm
    viol = []
    for k in np.nonzero(margin < 0)[0]:
        viol.append({"x": float(pts[sel[k], 0]), "y": float(pts[sel[k], 1]), "d": float(d[k]), "rho_star": float(rs[k])})
    return InequalityReport(len(sel), viol, float(np.max(tol_thm)), float(margin.min()), float(np.max(rs - d)))
